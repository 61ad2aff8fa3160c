//! Exact inner-product search over a flat matrix of embeddings.
//!
//! Vectors are stored in single precision; every dot product accumulates in
//! double precision.

use std::collections::HashMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{snapshot, top_k, Error, Result};

const SNAPSHOT_FORMAT: &str = "clir-flat-index";

/// Rows per parallel work unit.
const SCAN_CHUNK: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseVector(Vec<f32>);

impl DenseVector {
    pub fn new(values: Vec<f32>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("dense vectors need at least one dimension".into()));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite vector component {bad}")));
        }
        Ok(Self(values))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim.max(1)])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[f32] {
        &self.0
    }

    pub fn dot(&self, other: &[f32]) -> f64 {
        dot(&self.0, other)
    }
}

fn dot(a: &[f32], b: &[f32]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| f64::from(x) * f64::from(y)).sum()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlatIndex {
    dim: usize,
    doc_ids: Vec<String>,
    /// Row-major, `doc_ids.len() × dim`.
    matrix: Vec<f32>,
    #[serde(skip)]
    lookup: HashMap<String, usize>,
}

impl FlatIndex {
    pub fn build(vectors: impl IntoIterator<Item = (String, DenseVector)>) -> Result<Self> {
        let mut index = FlatIndex { dim: 0, doc_ids: Vec::new(), matrix: Vec::new(), lookup: HashMap::new() };
        for (id, v) in vectors {
            if index.doc_ids.is_empty() {
                index.dim = v.dim();
            } else if v.dim() != index.dim {
                return Err(Error::DimensionMismatch { expected: index.dim, got: v.dim() });
            }
            if index.lookup.insert(id.clone(), index.doc_ids.len()).is_some() {
                return Err(Error::DuplicateId(id));
            }
            index.doc_ids.push(id);
            index.matrix.extend_from_slice(v.values());
        }
        Ok(index)
    }

    pub fn len(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.doc_ids.is_empty()
    }

    /// Dimension of the stored vectors; 0 for an empty index.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    pub fn vector(&self, doc_id: &str) -> Option<DenseVector> {
        let row = *self.lookup.get(doc_id)?;
        Some(DenseVector(self.row(row).to_vec()))
    }

    fn row(&self, i: usize) -> &[f32] {
        &self.matrix[i * self.dim..(i + 1) * self.dim]
    }

    /// Top-k documents by exact inner product with `query`.
    pub fn search(&self, query: &DenseVector, k: usize) -> Result<Vec<(String, f64)>> {
        if k == 0 {
            return Err(Error::InvalidArgument("k must be at least 1".into()));
        }
        if self.is_empty() {
            return Ok(Vec::new());
        }
        if query.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: query.dim() });
        }
        let q = query.values();
        let rows_per_chunk = SCAN_CHUNK;
        let scores: Vec<f64> = self
            .matrix
            .par_chunks(self.dim * rows_per_chunk)
            .flat_map_iter(|chunk| chunk.chunks_exact(self.dim).map(|row| dot(q, row)))
            .collect();
        let cands = self.doc_ids.iter().map(String::as_str).zip(scores).collect();
        Ok(top_k(cands, k).into_iter().map(|(d, s)| (d.to_string(), s)).collect())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        snapshot::write(path.as_ref(), SNAPSHOT_FORMAT, self)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let mut index: Self = snapshot::read(path.as_ref(), SNAPSHOT_FORMAT)?;
        if index.matrix.len() != index.doc_ids.len() * index.dim {
            return Err(Error::Snapshot("matrix size does not match doc count and dimension".into()));
        }
        index.lookup = index.doc_ids.iter().enumerate().map(|(i, d)| (d.clone(), i)).collect();
        Ok(index)
    }

    pub(crate) const FORMAT: &'static str = SNAPSHOT_FORMAT;
}
