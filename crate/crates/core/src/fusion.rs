//! Reciprocal rank fusion and the two orderings of fusion and reranking.
//!
//! * early fusion: fuse the first-stage runs, then rerank the fused run once;
//! * late fusion: rerank every first-stage run, then fuse the reranked runs.
//!
//! Late fusion asks the scorer about `Σ min(|run_i|, depth)` candidates per
//! topic, early fusion only about `min(|fused|, depth)`.

use std::collections::{BTreeSet, HashMap};

use crate::ingest::{Run, RunEntry};
use crate::rerank::{rerank, Scorer};
use crate::{top_k, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RrfParams {
    pub k_rrf: f64,
    /// Only the first `input_depth` entries of each input run contribute.
    pub input_depth: usize,
    /// Fused lists are truncated to this length.
    pub output_depth: usize,
}

impl Default for RrfParams {
    fn default() -> Self {
        Self { k_rrf: 60.0, input_depth: 1000, output_depth: 1000 }
    }
}

impl RrfParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.k_rrf.is_finite() && self.k_rrf > 0.0) {
            return Err(Error::InvalidArgument("RRF k must be positive".into()));
        }
        if self.input_depth == 0 || self.output_depth == 0 {
            return Err(Error::InvalidArgument("RRF depths must be at least 1".into()));
        }
        Ok(())
    }
}

/// Fuse runs by summing `1 / (k + rank)` over the runs that retrieve each
/// document. Topics are the union over inputs; ties go to the smaller doc id.
pub fn rrf(runs: &[Run], params: &RrfParams) -> Result<Run> {
    params.validate()?;
    if runs.is_empty() {
        return Err(Error::InvalidArgument("RRF needs at least one run".into()));
    }
    let topics: BTreeSet<&str> = runs.iter().flat_map(Run::topic_ids).collect();
    let mut out = Run::new("rrf");
    for topic in topics {
        let mut ranks: HashMap<&str, Vec<usize>> = HashMap::new();
        for run in runs {
            for (i, e) in run.topic(topic).unwrap_or_default().iter().take(params.input_depth).enumerate() {
                ranks.entry(e.doc_id.as_str()).or_default().push(i + 1);
            }
        }
        // Sum in ascending rank order so the result does not depend on input order.
        let fused = ranks
            .into_iter()
            .map(|(doc, mut rs)| {
                rs.sort_unstable();
                (doc, rs.iter().map(|&r| 1.0 / (params.k_rrf + r as f64)).sum::<f64>())
            })
            .collect();
        let entries = top_k(fused, params.output_depth)
            .into_iter()
            .map(|(doc, score)| RunEntry { doc_id: doc.to_string(), score })
            .collect();
        out.insert_topic(topic, entries)?;
    }
    Ok(out)
}

/// Fuse, then rerank the fused run.
pub fn early_fusion(runs: &[Run], scorer: &impl Scorer, params: &RrfParams, rerank_depth: usize) -> Result<Run> {
    rerank(&rrf(runs, params)?, scorer, rerank_depth)
}

/// Rerank each run, then fuse.
pub fn late_fusion(runs: &[Run], scorer: &impl Scorer, params: &RrfParams, rerank_depth: usize) -> Result<Run> {
    let reranked = runs.iter().map(|r| rerank(r, scorer, rerank_depth)).collect::<Result<Vec<_>>>()?;
    rrf(&reranked, params)
}
