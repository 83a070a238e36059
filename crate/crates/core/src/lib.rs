//! Deterministic data scheduling and evaluation for multi-task audio
//! instruction tuning.
//!
//! The crate covers the whole pipeline that sits in front of a trainer:
//!
//! * [`manifest`] loads and validates line-delimited sample manifests.
//! * [`codebook`] max-pools frame embeddings and fits a k-means codebook.
//! * [`sampler`] emits batch plans under stochastic mixing, a staged task
//!   curriculum, cluster-aware diverse sampling, or a curriculum/diverse hybrid.
//! * [`runplan`] holds the effective-batch and learning-rate arithmetic.
//! * [`metrics`] implements WER, weighted-F1, ROUGE-L and the synthesis
//!   quality gate.

pub mod apportion;
pub mod codebook;
pub mod embedding;
pub mod manifest;
pub mod metrics;
pub mod runplan;
pub mod sampler;
pub mod seed;
pub mod task;

pub use codebook::{Codebook, KMeansParams};
pub use embedding::{DirStore, EmbeddingStore, FrameEmbeddings, MemoryStore};
pub use manifest::{Manifest, SampleRecord};
pub use sampler::{BatchPlan, RegimeConfig};
pub use task::{Lang, Task};
