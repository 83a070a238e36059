//! Global embedding codebook.
//!
//! Frame embeddings are max-pooled over time into one vector per sample, a
//! k-means model is fitted on a stratified subset of those vectors, and every
//! sample in the manifest is then mapped to its nearest centroid.
//!
//! File layout: a text header line `K d seed iterations`, then `K * d`
//! little-endian `f32` centroid values (row-major), then one `id<TAB>cluster`
//! line per sample in manifest order.

use std::fs;
use std::path::Path;

use indexmap::IndexMap;
use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::embedding::{EmbeddingError, EmbeddingStore, FrameEmbeddings};
use crate::manifest::{self, Manifest, ManifestError};
use crate::seed;

#[derive(Debug, Error)]
pub enum CodebookError {
    #[error("k-means needs at least K = {k} vectors, got {n}")]
    TooFewVectors { n: usize, k: usize },
    #[error("K must be at least 1")]
    ZeroK,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(
        "clustering subset has {subset} samples ({fraction} of {total}) but K = {k}; \
         lower K or raise the subset fraction"
    )]
    SubsetTooSmall {
        subset: usize,
        k: usize,
        fraction: f64,
        total: usize,
    },
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error(transparent)]
    Manifest(#[from] ManifestError),
    #[error("malformed codebook file: {0}")]
    Format(String),
    #[error("codebook I/O: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = CodebookError> = std::result::Result<T, E>;

/// Fixed-size summary of one sample's frames.
#[derive(Debug, Clone, PartialEq)]
pub struct PooledVector(Vec<f32>);

impl PooledVector {
    pub fn new(values: Vec<f32>) -> Self {
        Self(values)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.0
    }
}

/// Coordinate-wise maximum over the time axis.
pub fn pool(frames: &FrameEmbeddings) -> PooledVector {
    let mut out = frames.row(0).to_vec();
    for t in 1..frames.rows() {
        for (o, &v) in out.iter_mut().zip(frames.row(t)) {
            if v > *o {
                *o = v;
            }
        }
    }
    PooledVector(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansParams {
    pub max_iters: usize,
    /// Convergence threshold on the largest centroid displacement, relative to
    /// the RMS spread of the data around its mean.
    pub tol: f64,
}

impl Default for KMeansParams {
    fn default() -> Self {
        Self {
            max_iters: 100,
            tol: 1e-4,
        }
    }
}

#[derive(Debug, Clone)]
pub struct KMeansFit {
    pub centroids: Vec<Vec<f64>>,
    /// Cluster of each input vector under the final centroids.
    pub labels: Vec<usize>,
    pub inertia: f64,
    /// Inertia after the initial assignment and after every Lloyd step.
    pub inertia_history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(point: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (k, c) in centroids.iter().enumerate() {
        let d = sq_dist(point, c);
        if d < best.1 {
            best = (k, d);
        }
    }
    best
}

fn assign_all(points: &[Vec<f64>], centroids: &[Vec<f64>]) -> (Vec<usize>, Vec<f64>) {
    points
        .par_iter()
        .map(|p| nearest(p, centroids))
        .unzip()
}

fn kmeans_pp_init(points: &[Vec<f64>], k: usize, seed: u64) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut rng = seed::rng_for(seed, seed::DOMAIN_KMEANS, 0);
    let mut chosen = vec![false; n];
    let first = rng.random_range(0..n);
    chosen[first] = true;
    let mut centroids = vec![points[first].clone()];
    let mut d2: Vec<f64> = points.par_iter().map(|p| sq_dist(p, &centroids[0])).collect();

    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &d) in d2.iter().enumerate() {
                if d <= 0.0 {
                    continue;
                }
                acc += d;
                pick = Some(i);
                if acc > target {
                    break;
                }
            }
            pick.expect("positive total implies a positive entry")
        } else {
            // Every remaining point coincides with a centroid.
            (0..n).find(|&i| !chosen[i]).unwrap_or(0)
        };
        chosen[pick] = true;
        let c = points[pick].clone();
        d2.par_iter_mut()
            .zip(points.par_iter())
            .for_each(|(d, p)| *d = d.min(sq_dist(p, &c)));
        centroids.push(c);
    }
    centroids
}

fn rms_spread(points: &[Vec<f64>]) -> f64 {
    let dim = points[0].len();
    let n = points.len() as f64;
    let mut mean = vec![0.0; dim];
    for p in points {
        for (m, v) in mean.iter_mut().zip(p) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let ss: f64 = points.iter().map(|p| sq_dist(p, &mean)).sum();
    let s = (ss / n).sqrt();
    if s > 0.0 {
        s
    } else {
        1.0
    }
}

/// Lloyd's algorithm with k-means++ seeding.
///
/// Deterministic for a given `(vectors, k, seed)`. Clusters that lose all
/// their members are moved onto the point currently farthest from its own
/// centroid.
pub fn kmeans(
    vectors: &[PooledVector],
    k: usize,
    seed: u64,
    params: &KMeansParams,
) -> Result<KMeansFit> {
    if k == 0 {
        return Err(CodebookError::ZeroK);
    }
    if vectors.len() < k {
        return Err(CodebookError::TooFewVectors {
            n: vectors.len(),
            k,
        });
    }
    let dim = vectors[0].dim();
    if let Some(v) = vectors.iter().find(|v| v.dim() != dim) {
        return Err(CodebookError::DimensionMismatch {
            expected: dim,
            got: v.dim(),
        });
    }
    let points: Vec<Vec<f64>> = vectors
        .iter()
        .map(|v| v.as_slice().iter().map(|&x| x as f64).collect())
        .collect();

    let threshold = params.tol * rms_spread(&points);
    let mut centroids = kmeans_pp_init(&points, k, seed);
    let (mut labels, mut dists) = assign_all(&points, &centroids);
    let mut history = vec![dists.iter().sum::<f64>()];
    let mut iterations = 0;
    let mut converged = false;

    while iterations < params.max_iters {
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &l) in points.iter().zip(&labels) {
            counts[l] += 1;
            for (s, v) in sums[l].iter_mut().zip(p) {
                *s += v;
            }
        }
        let mut next: Vec<Vec<f64>> = sums
            .into_iter()
            .zip(&counts)
            .zip(&centroids)
            .map(|((s, &c), old)| {
                if c == 0 {
                    old.clone()
                } else {
                    s.into_iter().map(|v| v / c as f64).collect()
                }
            })
            .collect();

        if counts.contains(&0) {
            let mut far: Vec<f64> = points
                .iter()
                .zip(&labels)
                .map(|(p, &l)| sq_dist(p, &next[l]))
                .collect();
            for (cluster, _) in counts.iter().enumerate().filter(|(_, &c)| c == 0) {
                let mut best = 0;
                for i in 1..far.len() {
                    if far[i] > far[best] {
                        best = i;
                    }
                }
                next[cluster] = points[best].clone();
                far[best] = f64::NEG_INFINITY;
            }
        }

        let shift = centroids
            .iter()
            .zip(&next)
            .map(|(a, b)| sq_dist(a, b).sqrt())
            .fold(0.0, f64::max);
        centroids = next;
        (labels, dists) = assign_all(&points, &centroids);
        history.push(dists.iter().sum());
        iterations += 1;
        if shift <= threshold {
            converged = true;
            break;
        }
    }

    Ok(KMeansFit {
        centroids,
        labels,
        inertia: *history.last().unwrap(),
        inertia_history: history,
        iterations,
        converged,
    })
}

/// Statistics of the fit that produced a codebook. Not persisted.
#[derive(Debug, Clone, PartialEq)]
pub struct FitStats {
    pub subset_size: usize,
    pub inertia: f64,
    pub inertia_history: Vec<f64>,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    k: usize,
    dim: usize,
    seed: u64,
    iterations: usize,
    centroids: Vec<Vec<f32>>,
    assignment: IndexMap<String, usize>,
    fit: Option<FitStats>,
}

impl Codebook {
    /// Assembles a codebook from parts, checking shapes and cluster ranges.
    pub fn from_parts(
        seed: u64,
        iterations: usize,
        centroids: Vec<Vec<f32>>,
        assignment: IndexMap<String, usize>,
    ) -> Result<Self> {
        let k = centroids.len();
        if k == 0 {
            return Err(CodebookError::ZeroK);
        }
        let dim = centroids[0].len();
        for c in &centroids {
            if c.len() != dim {
                return Err(CodebookError::DimensionMismatch {
                    expected: dim,
                    got: c.len(),
                });
            }
            if c.iter().any(|v| !v.is_finite()) {
                return Err(CodebookError::Format("non-finite centroid".into()));
            }
        }
        if let Some((id, c)) = assignment.iter().find(|(_, &c)| c >= k) {
            return Err(CodebookError::Format(format!(
                "sample `{id}` assigned to cluster {c} but K = {k}"
            )));
        }
        Ok(Self {
            k,
            dim,
            seed,
            iterations,
            centroids,
            assignment,
            fit: None,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn centroids(&self) -> &[Vec<f32>] {
        &self.centroids
    }

    pub fn assignment(&self) -> &IndexMap<String, usize> {
        &self.assignment
    }

    pub fn cluster_of(&self, id: &str) -> Option<usize> {
        self.assignment.get(id).copied()
    }

    pub fn fit(&self) -> Option<&FitStats> {
        self.fit.as_ref()
    }

    /// Nearest centroid by squared Euclidean distance; ties go to the lower index.
    pub fn assign(&self, h: &[f32]) -> Result<usize> {
        if h.len() != self.dim {
            return Err(CodebookError::DimensionMismatch {
                expected: self.dim,
                got: h.len(),
            });
        }
        let mut best = (0, f64::INFINITY);
        for (k, c) in self.centroids.iter().enumerate() {
            let d: f64 = c
                .iter()
                .zip(h)
                .map(|(&a, &b)| {
                    let diff = a as f64 - b as f64;
                    diff * diff
                })
                .sum();
            if d < best.1 {
                best = (k, d);
            }
        }
        Ok(best.0)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = format!("{} {} {} {}\n", self.k, self.dim, self.seed, self.iterations)
            .into_bytes();
        for row in &self.centroids {
            for v in row {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        for (id, c) in &self.assignment {
            out.extend_from_slice(format!("{id}\t{c}\n").as_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let nl = bytes
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| CodebookError::Format("missing header line".into()))?;
        let header = std::str::from_utf8(&bytes[..nl])
            .map_err(|_| CodebookError::Format("header is not UTF-8".into()))?;
        let fields: Vec<u64> = header
            .split_whitespace()
            .map(|f| f.parse::<u64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| CodebookError::Format(format!("header `{header}`: {e}")))?;
        let [k, dim, seed, iterations] = fields[..] else {
            return Err(CodebookError::Format(format!(
                "header must have 4 fields, got `{header}`"
            )));
        };
        let (k, dim) = (k as usize, dim as usize);
        let body = &bytes[nl + 1..];
        let n_bytes = k * dim * 4;
        if body.len() < n_bytes {
            return Err(CodebookError::Format("truncated centroid block".into()));
        }
        let values: Vec<f32> = body[..n_bytes]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let centroids: Vec<Vec<f32>> = if dim == 0 {
            vec![Vec::new(); k]
        } else {
            values.chunks(dim).map(<[f32]>::to_vec).collect()
        };
        let tail = std::str::from_utf8(&body[n_bytes..])
            .map_err(|_| CodebookError::Format("assignment block is not UTF-8".into()))?;
        let mut assignment = IndexMap::new();
        for (i, line) in tail.lines().enumerate() {
            let (id, c) = line.split_once('\t').ok_or_else(|| {
                CodebookError::Format(format!("assignment line {}: expected id<TAB>cluster", i + 1))
            })?;
            let c: usize = c.parse().map_err(|e| {
                CodebookError::Format(format!("assignment line {}: {e}", i + 1))
            })?;
            if assignment.insert(id.to_string(), c).is_some() {
                return Err(CodebookError::Format(format!("duplicate assignment for `{id}`")));
            }
        }
        let cb = Self::from_parts(seed, iterations as usize, centroids, assignment)?;
        if cb.dim != dim {
            return Err(CodebookError::Format("dimension does not match header".into()));
        }
        Ok(cb)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&fs::read(path)?)
    }
}

fn pool_all(
    manifest: &Manifest,
    store: &dyn EmbeddingStore,
) -> Result<Vec<PooledVector>> {
    let pooled: Vec<Result<PooledVector>> = manifest
        .samples()
        .par_iter()
        .map(|s| Ok(pool(&store.load(&s.embedding_ref)?)))
        .collect();
    pooled.into_iter().collect()
}

/// Fits the codebook on a stratified subset and assigns every manifest sample.
pub fn build_codebook(
    manifest: &Manifest,
    store: &dyn EmbeddingStore,
    k: usize,
    subset_fraction: f64,
    seed: u64,
    params: &KMeansParams,
) -> Result<Codebook> {
    if k == 0 {
        return Err(CodebookError::ZeroK);
    }
    let subset = manifest::stratified_subset(manifest, subset_fraction, seed)?;
    if subset.len() < k {
        return Err(CodebookError::SubsetTooSmall {
            subset: subset.len(),
            k,
            fraction: subset_fraction,
            total: manifest.len(),
        });
    }

    let pooled = pool_all(manifest, store)?;
    let dim = pooled[0].dim();
    if let Some(p) = pooled.iter().find(|p| p.dim() != dim) {
        return Err(CodebookError::DimensionMismatch {
            expected: dim,
            got: p.dim(),
        });
    }
    let index = manifest.index();
    let training: Vec<PooledVector> = subset
        .samples()
        .iter()
        .map(|s| pooled[index[s.id.as_str()]].clone())
        .collect();

    let fit = kmeans(&training, k, seed, params)?;
    let centroids: Vec<Vec<f32>> = fit
        .centroids
        .iter()
        .map(|c| c.iter().map(|&v| v as f32).collect())
        .collect();
    let mut codebook = Codebook::from_parts(seed, fit.iterations, centroids, IndexMap::new())?;

    let clusters: Vec<usize> = pooled
        .par_iter()
        .map(|p| codebook.assign(p.as_slice()))
        .collect::<Result<_>>()?;
    codebook.assignment = manifest
        .samples()
        .iter()
        .zip(clusters)
        .map(|(s, c)| (s.id.clone(), c))
        .collect();
    codebook.fit = Some(FitStats {
        subset_size: subset.len(),
        inertia: fit.inertia,
        inertia_history: fit.inertia_history,
        converged: fit.converged,
    });
    Ok(codebook)
}
