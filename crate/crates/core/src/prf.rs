//! Rocchio pseudo-relevance feedback for sparse and dense queries.
//!
//! The expanded query is `alpha * q + beta * centroid(feedback)`. Pseudo
//! feedback has no judged non-relevant set, so the `gamma` term is always
//! zero; it is kept in [`RocchioParams`] for completeness.
//!
//! Feedback documents are represented by what the index stores: term counts
//! for BM25 indexes, de-quantized weights for impact indexes and raw
//! embeddings for flat indexes.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use crate::dense::{DenseVector, FlatIndex};
use crate::sparse::{Bm25Params, InvertedIndex, SparseVector};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocchioParams {
    /// Number of first-pass documents used as feedback.
    pub depth: usize,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// Expansion terms kept for sparse queries (original terms are always kept).
    pub top_terms: usize,
}

impl Default for RocchioParams {
    fn default() -> Self {
        Self { depth: 10, alpha: 1.0, beta: 0.75, gamma: 0.0, top_terms: 128 }
    }
}

impl RocchioParams {
    pub fn validate(&self) -> Result<()> {
        if self.depth == 0 || self.top_terms == 0 {
            return Err(Error::InvalidArgument("Rocchio depth and top_terms must be at least 1".into()));
        }
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta), ("gamma", self.gamma)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidArgument(format!("Rocchio {name} must be finite and non-negative")));
            }
        }
        Ok(())
    }
}

pub fn rocchio_sparse(query: &SparseVector, feedback: &[SparseVector], params: &RocchioParams) -> SparseVector {
    if feedback.is_empty() {
        return query.clone();
    }
    let n = feedback.len() as f64;
    let mut sums: BTreeMap<&str, f64> = BTreeMap::new();
    for doc in feedback {
        for (t, w) in doc.iter() {
            *sums.entry(t).or_insert(0.0) += w;
        }
    }
    let mut blended: BTreeMap<&str, f64> = query.iter().map(|(t, w)| (t, params.alpha * w)).collect();
    for (t, sum) in sums {
        let q = query.get(t);
        blended.insert(t, params.alpha * q + params.beta * (sum / n));
    }

    let mut ranked: Vec<(&str, f64)> =
        blended.iter().map(|(t, w)| (*t, w.max(0.0))).filter(|(_, w)| *w > 0.0).collect();
    ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(Ordering::Equal).then_with(|| a.0.cmp(b.0)));

    let mut out = SparseVector::new();
    for (i, (t, w)) in ranked.into_iter().enumerate() {
        if i < params.top_terms || query.contains(t) {
            out.insert(t, w).expect("clamped weights are non-negative");
        }
    }
    out
}

pub fn rocchio_dense(query: &DenseVector, feedback: &[DenseVector], params: &RocchioParams) -> Result<DenseVector> {
    let dim = query.dim();
    if let Some(bad) = feedback.iter().find(|v| v.dim() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, got: bad.dim() });
    }
    if feedback.is_empty() {
        return Ok(query.clone());
    }
    let n = feedback.len() as f64;
    let values = (0..dim)
        .map(|i| {
            let sum: f64 = feedback.iter().map(|v| f64::from(v.values()[i])).sum();
            (params.alpha * f64::from(query.values()[i]) + params.beta * (sum / n)) as f32
        })
        .collect();
    DenseVector::new(values)
}

/// A first-stage retriever together with its scoring parameters.
#[derive(Debug, Clone, Copy)]
pub enum Engine<'a> {
    Bm25(&'a InvertedIndex, Bm25Params),
    Impact(&'a InvertedIndex),
    Dense(&'a FlatIndex),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Query {
    /// Term weights; for BM25 these are query term counts.
    Sparse(SparseVector),
    Dense(DenseVector),
}

impl Engine<'_> {
    pub fn search(&self, query: &Query, k: usize) -> Result<Vec<(String, f64)>> {
        match (self, query) {
            (Engine::Bm25(idx, p), Query::Sparse(q)) => idx.search_bm25_weighted(q, k, *p),
            (Engine::Impact(idx), Query::Sparse(q)) => idx.search_impact(q, k),
            (Engine::Dense(idx), Query::Dense(q)) => idx.search(q, k),
            _ => Err(Error::InvalidArgument("query type does not match the engine".into())),
        }
    }

    /// Rocchio-expanded version of `query` given first-pass hits.
    pub fn expand(&self, query: &Query, hits: &[(String, f64)], params: &RocchioParams) -> Result<Query> {
        let ids = hits.iter().take(params.depth).map(|(d, _)| d.as_str());
        match (self, query) {
            (Engine::Bm25(idx, _) | Engine::Impact(idx), Query::Sparse(q)) => {
                let fb: Vec<SparseVector> = ids.filter_map(|d| idx.doc_vector(d)).collect();
                Ok(Query::Sparse(rocchio_sparse(q, &fb, params)))
            }
            (Engine::Dense(idx), Query::Dense(q)) => {
                let fb: Vec<DenseVector> = ids.filter_map(|d| idx.vector(d)).collect();
                Ok(Query::Dense(rocchio_dense(q, &fb, params)?))
            }
            _ => Err(Error::InvalidArgument("query type does not match the engine".into())),
        }
    }
}

/// Retrieve `depth` feedback documents, expand the query, retrieve `k`.
pub fn prf_search(engine: &Engine<'_>, query: &Query, k: usize, params: &RocchioParams) -> Result<Vec<(String, f64)>> {
    params.validate()?;
    let first = engine.search(query, params.depth)?;
    if first.is_empty() {
        return Ok(first);
    }
    let expanded = engine.expand(query, &first, params)?;
    engine.search(&expanded, k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sv(pairs: &[(&str, f64)]) -> SparseVector {
        SparseVector::try_from_weights(pairs.iter().map(|(t, w)| (t.to_string(), *w))).unwrap()
    }

    fn dv(v: &[f32]) -> DenseVector {
        DenseVector::new(v.to_vec()).unwrap()
    }

    fn params(alpha: f64, beta: f64, top_terms: usize) -> RocchioParams {
        RocchioParams { alpha, beta, top_terms, ..Default::default() }
    }

    #[test]
    fn degenerate_sparse_is_identity() {
        let q = sv(&[("a", 1.0), ("b", 2.0)]);
        let out = rocchio_sparse(&q, &[sv(&[("c", 5.0)])], &params(1.0, 0.0, 128));
        assert_eq!(out, q);
    }

    #[test]
    fn sparse_blend() {
        let out = rocchio_sparse(&sv(&[("a", 1.0)]), &[sv(&[("b", 2.0)]), sv(&[("b", 4.0)])], &params(1.0, 0.5, 128));
        assert_eq!(out, sv(&[("a", 1.0), ("b", 1.5)]));
    }

    #[test]
    fn original_terms_survive_truncation() {
        let out = rocchio_sparse(&sv(&[("a", 1.0)]), &[sv(&[("b", 2.0)]), sv(&[("b", 4.0)])], &params(1.0, 0.5, 1));
        assert_eq!(out, sv(&[("a", 1.0), ("b", 1.5)]));
        let out = rocchio_sparse(&sv(&[("a", 1.0)]), &[sv(&[("b", 2.0), ("c", 1.0)])], &params(1.0, 0.5, 1));
        assert_eq!(out, sv(&[("a", 1.0)]), "a ties b at 1.0 and wins on term order");
    }

    #[test]
    fn empty_feedback_returns_query() {
        let q = sv(&[("a", 1.0)]);
        assert_eq!(rocchio_sparse(&q, &[], &RocchioParams::default()), q);
    }

    #[test]
    fn dense_examples() {
        let out = rocchio_dense(&dv(&[3.0, -1.0]), &[dv(&[9.0, 9.0])], &params(1.0, 0.0, 1)).unwrap();
        assert_eq!(out, dv(&[3.0, -1.0]));
        let out = rocchio_dense(&dv(&[0.0, 0.0]), &[dv(&[2.0, 4.0])], &params(1.0, 0.5, 1)).unwrap();
        assert_eq!(out, dv(&[1.0, 2.0]));
        let out = rocchio_dense(&dv(&[7.0, 7.0]), &[dv(&[1.0, 0.0]), dv(&[0.0, 1.0])], &params(0.0, 1.0, 1)).unwrap();
        assert_eq!(out, dv(&[0.5, 0.5]));
    }

    #[test]
    fn dense_dim_mismatch() {
        let err = rocchio_dense(&dv(&[0.0, 0.0]), &[dv(&[1.0])], &RocchioParams::default()).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn params_validated() {
        assert!(RocchioParams { depth: 0, ..Default::default() }.validate().is_err());
        assert!(RocchioParams { beta: -1.0, ..Default::default() }.validate().is_err());
        assert!(RocchioParams::default().validate().is_ok());
    }

    #[test]
    fn empty_first_pass_short_circuits() {
        let idx = FlatIndex::build(Vec::new()).unwrap();
        let hits = prf_search(&Engine::Dense(&idx), &Query::Dense(dv(&[1.0])), 10, &RocchioParams::default()).unwrap();
        assert!(hits.is_empty());
    }

    #[test]
    fn mismatched_query_type() {
        let idx = FlatIndex::build(vec![("a".to_string(), dv(&[1.0]))]).unwrap();
        assert!(Engine::Dense(&idx).search(&Query::Sparse(SparseVector::new()), 1).is_err());
    }
}
