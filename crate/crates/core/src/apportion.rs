//! Largest-remainder (Hamilton) apportionment.

/// Splits `total` into integers proportional to `weights`.
///
/// Each entry first receives the floor of its exact quota; the leftover units
/// go to the largest fractional remainders, ties resolved towards the lower
/// index. The result always sums to `total`. All-zero weights yield zeros
/// only when `total` is zero; otherwise the units are spread as if the weights
/// were equal.
pub fn largest_remainder(total: usize, weights: &[f64]) -> Vec<usize> {
    if weights.is_empty() {
        return Vec::new();
    }
    let sum: f64 = weights.iter().sum();
    let uniform;
    let weights = if sum > 0.0 {
        weights
    } else {
        uniform = vec![1.0; weights.len()];
        &uniform[..]
    };
    let sum: f64 = weights.iter().sum();

    let quotas: Vec<f64> = weights.iter().map(|w| total as f64 * w / sum).collect();
    let mut alloc: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = alloc.iter().sum();
    // Floating error can push a floor one past the true value; trim from the
    // smallest remainders if so.
    if assigned > total {
        let mut order: Vec<usize> = (0..alloc.len()).collect();
        order.sort_by(|&a, &b| {
            let ra = quotas[a] - quotas[a].floor();
            let rb = quotas[b] - quotas[b].floor();
            ra.total_cmp(&rb).then(b.cmp(&a))
        });
        let mut excess = assigned - total;
        for i in order {
            if excess == 0 {
                break;
            }
            if alloc[i] > 0 {
                alloc[i] -= 1;
                excess -= 1;
            }
        }
        return alloc;
    }

    let mut order: Vec<usize> = (0..alloc.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - alloc[a] as f64;
        let rb = quotas[b] - alloc[b] as f64;
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().take(total - assigned) {
        alloc[i] += 1;
    }
    alloc
}
