//! Multi-stage cross-lingual retrieval engine.
//!
//! First-stage retrieval comes in three flavours: BM25 over analyzed text,
//! impact scoring over quantized learned term weights, and exact inner-product
//! search over dense embeddings. Any of them can be wrapped in Rocchio
//! pseudo-relevance feedback. Candidate lists are reordered with externally
//! produced relevance scores, combined with reciprocal rank fusion (before or
//! after reranking), and scored with nDCG, recall and average precision plus
//! paired t-tests.
//!
//! Everything is exact and deterministic: ties are always broken by ascending
//! document id, so any ranking can be compared entry-for-entry against a
//! brute-force computation.

pub mod analysis;
pub mod cli;
pub mod dense;
mod error;
pub mod eval;
pub mod fusion;
pub mod ingest;
pub mod prf;
pub mod rerank;
mod snapshot;
pub mod sparse;

pub use error::{Error, Result};
pub use ingest::{Document, Qrels, Run, RunEntry, Topic};

use std::cmp::Ordering;

/// A per-topic ranked list of `(doc_id, score)` pairs.
///
/// Scores are non-increasing; equal scores are ordered by ascending doc id.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RankedList {
    pub topic_id: String,
    pub hits: Vec<(String, f64)>,
}

impl RankedList {
    pub fn new(topic_id: impl Into<String>, hits: Vec<(String, f64)>) -> Self {
        Self { topic_id: topic_id.into(), hits }
    }

    pub fn len(&self) -> usize {
        self.hits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hits.is_empty()
    }

    pub fn doc_ids(&self) -> impl Iterator<Item = &str> {
        self.hits.iter().map(|(d, _)| d.as_str())
    }
}

/// Canonical result order: descending score, then ascending doc id.
pub fn rank_order(a: (&str, f64), b: (&str, f64)) -> Ordering {
    b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0))
}

/// Select the top `k` of `(doc_id, score)` candidates in canonical order.
pub(crate) fn top_k<S: AsRef<str>>(mut cands: Vec<(S, f64)>, k: usize) -> Vec<(S, f64)> {
    let cmp = |a: &(S, f64), b: &(S, f64)| rank_order((a.0.as_ref(), a.1), (b.0.as_ref(), b.1));
    if k == 0 {
        return Vec::new();
    }
    if cands.len() > k {
        cands.select_nth_unstable_by(k - 1, cmp);
        cands.truncate(k);
    }
    cands.sort_unstable_by(cmp);
    cands
}
