//! Per-sample frame embeddings and where to find them.
//!
//! On disk each sample is a little-endian binary blob: `u32 T`, `u32 d`, then
//! `T * d` `f32` values in row-major order.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("embedding `{reference}` not found: {message}")]
    Missing { reference: String, message: String },
    #[error("embedding `{reference}` is malformed: {message}")]
    Malformed { reference: String, message: String },
    #[error("invalid frame matrix: {0}")]
    Invalid(String),
}

/// A `T x d` matrix of aligner hidden states for one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameEmbeddings {
    rows: usize,
    cols: usize,
    data: Vec<f32>,
}

impl FrameEmbeddings {
    pub fn new(rows: usize, cols: usize, data: Vec<f32>) -> Result<Self, EmbeddingError> {
        if rows == 0 || cols == 0 {
            return Err(EmbeddingError::Invalid(format!(
                "shape must be positive, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(EmbeddingError::Invalid(format!(
                "expected {} values for {rows}x{cols}, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(EmbeddingError::Invalid(format!(
                "non-finite value at frame {}, dim {}",
                pos / cols,
                pos % cols
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f32>]) -> Result<Self, EmbeddingError> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(EmbeddingError::Invalid("ragged rows".into()));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, t: usize) -> &[f32] {
        &self.data[t * self.cols..(t + 1) * self.cols]
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 + self.data.len() * 4);
        out.extend_from_slice(&(self.rows as u32).to_le_bytes());
        out.extend_from_slice(&(self.cols as u32).to_le_bytes());
        for v in &self.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, EmbeddingError> {
        if bytes.len() < 8 {
            return Err(EmbeddingError::Invalid("truncated header".into()));
        }
        let rows = u32::from_le_bytes(bytes[0..4].try_into().unwrap()) as usize;
        let cols = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
        let body = &bytes[8..];
        if body.len() != rows * cols * 4 {
            return Err(EmbeddingError::Invalid(format!(
                "header says {rows}x{cols} ({} bytes) but body has {} bytes",
                rows * cols * 4,
                body.len()
            )));
        }
        let data = body
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Self::new(rows, cols, data)
    }
}

/// Resolves an `embedding_ref` to its frame matrix.
pub trait EmbeddingStore: Sync {
    fn load(&self, reference: &str) -> Result<FrameEmbeddings, EmbeddingError>;
}

/// Files under a root directory; references are paths relative to it.
#[derive(Debug, Clone)]
pub struct DirStore {
    root: PathBuf,
}

impl DirStore {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn path_for(&self, reference: &str) -> PathBuf {
        self.root.join(Path::new(reference))
    }

    pub fn write(&self, reference: &str, frames: &FrameEmbeddings) -> std::io::Result<()> {
        let path = self.path_for(reference);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(path, frames.to_bytes())
    }
}

impl EmbeddingStore for DirStore {
    fn load(&self, reference: &str) -> Result<FrameEmbeddings, EmbeddingError> {
        let bytes = fs::read(self.path_for(reference)).map_err(|e| EmbeddingError::Missing {
            reference: reference.to_string(),
            message: e.to_string(),
        })?;
        FrameEmbeddings::from_bytes(&bytes).map_err(|e| EmbeddingError::Malformed {
            reference: reference.to_string(),
            message: e.to_string(),
        })
    }
}

/// In-memory store, mostly for tests and synthetic corpora.
#[derive(Debug, Clone, Default)]
pub struct MemoryStore {
    items: HashMap<String, FrameEmbeddings>,
}

impl MemoryStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, reference: impl Into<String>, frames: FrameEmbeddings) {
        self.items.insert(reference.into(), frames);
    }
}

impl EmbeddingStore for MemoryStore {
    fn load(&self, reference: &str) -> Result<FrameEmbeddings, EmbeddingError> {
        self.items
            .get(reference)
            .cloned()
            .ok_or_else(|| EmbeddingError::Missing {
                reference: reference.to_string(),
                message: "not in store".into(),
            })
    }
}
