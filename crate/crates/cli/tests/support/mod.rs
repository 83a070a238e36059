#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use adsched_core::task::{DIALECT_LABELS, EMOTION_LABELS};
use adsched_core::{DirStore, FrameEmbeddings, Lang, Manifest, MemoryStore, SampleRecord, Task};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub const BIN: &str = env!("CARGO_BIN_EXE_adsched");

pub fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

pub fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN).current_dir(dir).args(args).output().expect("binary runs")
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

pub fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

pub fn sha256_file(path: &Path) -> String {
    let bytes = std::fs::read(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
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

/// Records with skewed label frequencies; every label occurs at least once.
pub fn records(counts: &[(Task, usize)], seed: u64) -> Vec<SampleRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for &(task, n) in counts {
        let labels: &[&str] = match task {
            Task::Did => &DIALECT_LABELS,
            Task::Ser => &EMOTION_LABELS,
            _ => &[],
        };
        for i in 0..n {
            let (label, lang) = if labels.is_empty() {
                (None, if rng.random_bool(0.6) { Lang::Ar } else { Lang::En })
            } else if i < labels.len() {
                (Some(labels[i].to_string()), Lang::Ar)
            } else {
                // rank-weighted: label j with probability proportional to 1/(j+1)
                let j = loop {
                    let j = rng.random_range(0..labels.len());
                    if rng.random_bool(1.0 / (j + 1) as f64) {
                        break j;
                    }
                };
                (Some(labels[j].to_string()), Lang::Ar)
            };
            let id = format!("{task}-{i:05}");
            out.push(SampleRecord {
                embedding_ref: format!("{task}/{id}.emb"),
                id,
                task,
                label,
                lang,
                duration_s: rng.random_range(1.0..30.0),
                text: None,
            });
        }
    }
    out
}

/// Frames scattered around random blob centres.
pub fn frames_for(m: &Manifest, dim: usize, centers: usize, seed: u64) -> Vec<FrameEmbeddings> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mu: Vec<Vec<f32>> = (0..centers)
        .map(|_| (0..dim).map(|_| rng.random_range(-10.0f32..10.0)).collect())
        .collect();
    m.samples()
        .iter()
        .map(|_| {
            let c = &mu[rng.random_range(0..centers)];
            let t = rng.random_range(1..=3);
            let rows: Vec<Vec<f32>> = (0..t)
                .map(|_| c.iter().map(|v| v + rng.random_range(-1.0f32..1.0)).collect())
                .collect();
            FrameEmbeddings::from_rows(&rows).unwrap()
        })
        .collect()
}

pub fn memory_store(m: &Manifest, dim: usize, centers: usize, seed: u64) -> MemoryStore {
    let mut store = MemoryStore::new();
    for (s, f) in m.samples().iter().zip(frames_for(m, dim, centers, seed)) {
        store.insert(s.embedding_ref.clone(), f);
    }
    store
}

pub struct Fixture {
    pub dir: tempfile::TempDir,
    pub manifest: PathBuf,
    pub embeddings: PathBuf,
}

impl Fixture {
    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    pub fn write(&self, name: &str, text: &str) -> PathBuf {
        let p = self.path(name);
        std::fs::write(&p, text).unwrap();
        p
    }
}

/// Manifest and embedding files in a fresh temporary directory.
pub fn fixture(counts: &[(Task, usize)], dim: usize, seed: u64) -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let m = Manifest::from_records(records(counts, seed), "fixture").unwrap();
    let manifest = dir.path().join("manifest.jsonl");
    std::fs::write(&manifest, m.to_jsonl()).unwrap();
    let embeddings = dir.path().join("emb");
    std::fs::create_dir_all(&embeddings).unwrap();
    let store = DirStore::new(&embeddings);
    for (s, f) in m.samples().iter().zip(frames_for(&m, dim, 8, seed)) {
        store.write(&s.embedding_ref, &f).unwrap();
    }
    Fixture {
        dir,
        manifest,
        embeddings,
    }
}

pub fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}
