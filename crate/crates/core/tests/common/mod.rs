#![allow(dead_code)]

use adsched_core::task::{DIALECT_LABELS, EMOTION_LABELS};
use adsched_core::{FrameEmbeddings, Lang, Manifest, MemoryStore, SampleRecord, Task};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn record(id: impl Into<String>, task: Task, label: Option<&str>, lang: Lang) -> SampleRecord {
    let id = id.into();
    SampleRecord {
        embedding_ref: format!("{id}.emb"),
        id,
        task,
        label: label.map(str::to_string),
        lang,
        duration_s: 1.0,
        text: None,
    }
}

/// Records with a skewed label distribution (every label present at least
/// once) and random durations.
pub fn corpus(counts: &[(Task, usize)], seed: u64) -> Vec<SampleRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for &(task, n) in counts {
        let labels: &[&str] = match task {
            Task::Did => &DIALECT_LABELS,
            Task::Ser => &EMOTION_LABELS,
            _ => &[],
        };
        let weights: Vec<f64> = (0..labels.len()).map(|i| 1.0 / (i + 1) as f64).collect();
        let total: f64 = weights.iter().sum();
        for i in 0..n {
            let (label, lang) = if labels.is_empty() {
                (None, if rng.random_bool(0.6) { Lang::Ar } else { Lang::En })
            } else if i < labels.len() {
                (Some(labels[i]), Lang::Ar)
            } else {
                let mut u = rng.random::<f64>() * total;
                let mut pick = labels.len() - 1;
                for (j, w) in weights.iter().enumerate() {
                    if u < *w {
                        pick = j;
                        break;
                    }
                    u -= w;
                }
                (Some(labels[pick]), Lang::Ar)
            };
            let mut r = record(format!("{}-{i:05}", task), task, label, lang);
            r.duration_s = rng.random_range(1.0..30.0);
            out.push(r);
        }
    }
    out
}

pub fn manifest(counts: &[(Task, usize)], seed: u64) -> Manifest {
    Manifest::from_records(corpus(counts, seed), "synthetic").unwrap()
}

/// Frame embeddings scattered around `centers` blob centres in `dim`
/// dimensions, one to three frames per sample.
pub fn embeddings(m: &Manifest, dim: usize, centers: usize, seed: u64) -> MemoryStore {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mu: Vec<Vec<f32>> = (0..centers)
        .map(|_| (0..dim).map(|_| rng.random_range(-10.0f32..10.0)).collect())
        .collect();
    let mut store = MemoryStore::new();
    for s in m.samples() {
        let c = &mu[rng.random_range(0..centers)];
        let frames = rng.random_range(1..=3);
        let rows: Vec<Vec<f32>> = (0..frames)
            .map(|_| c.iter().map(|v| v + rng.random_range(-1.0f32..1.0)).collect())
            .collect();
        store.insert(s.embedding_ref.clone(), FrameEmbeddings::from_rows(&rows).unwrap());
    }
    store
}

pub fn five_task_counts(n: usize) -> Vec<(Task, usize)> {
    vec![
        (Task::Asr, n * 30 / 100),
        (Task::Did, n * 25 / 100),
        (Task::Ser, n * 15 / 100),
        (Task::Tsum, n * 15 / 100),
        (Task::Ssum, n - n * 85 / 100),
    ]
}

/// Codebook with uniformly random cluster assignments.
pub fn random_codebook(m: &Manifest, k: usize, seed: u64) -> adsched_core::Codebook {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centroids = (0..k).map(|c| vec![c as f32]).collect();
    let assignment = m
        .samples()
        .iter()
        .map(|s| (s.id.clone(), rng.random_range(0..k)))
        .collect();
    adsched_core::Codebook::from_parts(seed, 0, centroids, assignment).unwrap()
}

/// Fairness oracle for one group's pick stream. Picks are split into local
/// epochs of `sizes.sum()` draws; inside an epoch no sample repeats, and at
/// every prefix the most-visited cluster is at most one visit ahead of every
/// cluster that still has samples left.
pub fn check_spread(
    picks: &[(String, usize)],
    sizes: &std::collections::BTreeMap<usize, usize>,
) -> Result<usize, String> {
    let n: usize = sizes.values().sum();
    let mut sweeps = 0;
    for (e, epoch) in picks.chunks(n).enumerate() {
        let mut seen = std::collections::HashSet::new();
        let mut visits: std::collections::BTreeMap<usize, usize> = sizes.keys().map(|&c| (c, 0)).collect();
        for (i, (id, c)) in epoch.iter().enumerate() {
            if !seen.insert(id) {
                return Err(format!("epoch {e}: `{id}` repeated"));
            }
            *visits.get_mut(c).ok_or(format!("unknown cluster {c}"))? += 1;
            let max = *visits.values().max().unwrap();
            let live_min = visits
                .iter()
                .filter(|(c, v)| **v < sizes[c])
                .map(|(_, v)| *v)
                .min();
            if let Some(min) = live_min {
                if max - min > 1 {
                    return Err(format!("epoch {e}, pick {i}: spread {}", max - min));
                }
            }
        }
        sweeps += visits.values().copied().min().unwrap_or(0);
    }
    Ok(sweeps)
}
