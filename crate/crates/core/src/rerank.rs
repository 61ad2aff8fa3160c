//! Second-stage reranking from externally produced relevance scores.
//!
//! Cross-encoder inference happens outside this crate. A [`Scorer`] supplies
//! a score per `(topic, candidate)`; the usual source is a score file written
//! by an external model ([`ScoreOracle`]). [`write_candidates`] emits the
//! pairs such a model needs to score.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};

use crate::ingest::{Run, RunEntry};
use crate::{Error, Result};

pub const DEFAULT_RERANK_DEPTH: usize = 1000;

pub trait Scorer {
    /// Relevance of a candidate, or `None` if this scorer has no opinion.
    fn score(&self, topic: &str, candidate: &RunEntry) -> Option<f64>;
}

impl<S: Scorer + ?Sized> Scorer for &S {
    fn score(&self, topic: &str, candidate: &RunEntry) -> Option<f64> {
        (**self).score(topic, candidate)
    }
}

/// Scores keyed by `(topic, doc)`, typically loaded from an external model's output.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScoreOracle {
    scores: HashMap<String, HashMap<String, f64>>,
}

impl ScoreOracle {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the previous score for the pair, if any.
    pub fn insert(&mut self, topic: impl Into<String>, doc: impl Into<String>, score: f64) -> Option<f64> {
        self.scores.entry(topic.into()).or_default().insert(doc.into(), score)
    }

    pub fn get(&self, topic: &str, doc: &str) -> Option<f64> {
        self.scores.get(topic)?.get(doc).copied()
    }

    pub fn len(&self) -> usize {
        self.scores.values().map(HashMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl Scorer for ScoreOracle {
    fn score(&self, topic: &str, candidate: &RunEntry) -> Option<f64> {
        self.get(topic, &candidate.doc_id)
    }
}

/// Parse `topic_id doc_id score` lines. Later duplicates overwrite earlier
/// ones; the number of overwrites is returned alongside the oracle.
pub fn read_score_oracle<R: BufRead>(reader: R) -> Result<(ScoreOracle, usize)> {
    let mut oracle = ScoreOracle::new();
    let mut duplicates = 0;
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::parse(line_no, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split_whitespace().collect();
        let [topic, doc, score] = cols[..] else {
            return Err(Error::parse(line_no, format!("expected 3 columns, found {}", cols.len())));
        };
        let score: f64 = score
            .parse()
            .ok()
            .filter(|s: &f64| s.is_finite())
            .ok_or_else(|| Error::parse(line_no, format!("score `{score}` is not a finite number")))?;
        if oracle.insert(topic, doc, score).is_some() {
            duplicates += 1;
        }
    }
    Ok((oracle, duplicates))
}

pub fn load_score_oracle(path: impl AsRef<Path>) -> Result<(ScoreOracle, usize)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_score_oracle(BufReader::new(file)).map_err(|e| e.in_file(path))
}

/// Echoes each candidate's incoming score. Reranking with it is a no-op.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityScorer;

impl Scorer for IdentityScorer {
    fn score(&self, _topic: &str, candidate: &RunEntry) -> Option<f64> {
        Some(candidate.score)
    }
}

/// Reference scorer: fraction of distinct query tokens present in the document.
#[derive(Debug, Clone, Default)]
pub struct OverlapScorer {
    queries: HashMap<String, HashSet<String>>,
    docs: HashMap<String, HashSet<String>>,
}

impl OverlapScorer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_query<S: AsRef<str>>(&mut self, topic: impl Into<String>, tokens: &[S]) {
        self.queries.insert(topic.into(), tokens.iter().map(|t| t.as_ref().to_string()).collect());
    }

    pub fn add_doc<S: AsRef<str>>(&mut self, doc: impl Into<String>, tokens: &[S]) {
        self.docs.insert(doc.into(), tokens.iter().map(|t| t.as_ref().to_string()).collect());
    }
}

impl Scorer for OverlapScorer {
    fn score(&self, topic: &str, candidate: &RunEntry) -> Option<f64> {
        let q = self.queries.get(topic)?;
        let d = self.docs.get(&candidate.doc_id)?;
        if q.is_empty() {
            return Some(0.0);
        }
        Some(q.intersection(d).count() as f64 / q.len() as f64)
    }
}

/// Wraps a scorer and counts how many pairs it was asked to score.
#[derive(Debug, Default)]
pub struct CountingScorer<S> {
    inner: S,
    calls: AtomicUsize,
}

impl<S> CountingScorer<S> {
    pub fn new(inner: S) -> Self {
        Self { inner, calls: AtomicUsize::new(0) }
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::Relaxed)
    }

    pub fn reset(&self) {
        self.calls.store(0, Ordering::Relaxed);
    }
}

impl<S: Scorer> Scorer for CountingScorer<S> {
    fn score(&self, topic: &str, candidate: &RunEntry) -> Option<f64> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.inner.score(topic, candidate)
    }
}

/// Reorder the top `depth` entries of every topic by descending scorer
/// output. Unscored candidates follow the scored ones in their first-stage
/// order, then everything beyond `depth`. Scored entries take the scorer's
/// score; the rest get strictly decreasing scores below the lowest scored
/// value. Equal scores keep first-stage order.
pub fn rerank(run: &Run, scorer: &impl Scorer, depth: usize) -> Result<Run> {
    if depth == 0 {
        return Err(Error::InvalidArgument("rerank depth must be at least 1".into()));
    }
    let mut out = Run::new(run.tag.clone());
    for (topic, entries) in run.topics() {
        out.insert_topic(topic, rerank_topic(topic, entries, scorer, depth))?;
    }
    Ok(out)
}

fn rerank_topic(topic: &str, entries: &[RunEntry], scorer: &impl Scorer, depth: usize) -> Vec<RunEntry> {
    let cut = depth.min(entries.len());
    let mut scored = Vec::with_capacity(cut);
    let mut rest = Vec::new();
    for (i, e) in entries[..cut].iter().enumerate() {
        match scorer.score(topic, e) {
            Some(s) if s.is_finite() => scored.push((i, s)),
            _ => rest.push(i),
        }
    }
    rest.extend(cut..entries.len());

    if scored.is_empty() {
        return rest.into_iter().map(|i| entries[i].clone()).collect();
    }
    scored.sort_by(|a, b| b.1.total_cmp(&a.1));
    let floor = scored.last().map(|s| s.1).unwrap_or_default();

    let mut out: Vec<RunEntry> =
        scored.into_iter().map(|(i, s)| RunEntry { doc_id: entries[i].doc_id.clone(), score: s }).collect();
    out.extend(
        rest.into_iter()
            .enumerate()
            .map(|(n, i)| RunEntry { doc_id: entries[i].doc_id.clone(), score: floor - (n + 1) as f64 }),
    );
    out
}

/// Emit `topic_id<TAB>doc_id<TAB>doc_text` for the top `depth` candidates of
/// each topic. Tabs and newlines inside the text are replaced by spaces.
pub fn write_candidates<W: Write>(
    run: &Run,
    doc_text: impl Fn(&str) -> Option<String>,
    depth: usize,
    mut w: W,
) -> Result<usize> {
    let mut n = 0;
    for (topic, entries) in run.topics() {
        for e in entries.iter().take(depth) {
            let text = doc_text(&e.doc_id).unwrap_or_default().replace(['\t', '\n', '\r'], " ");
            writeln!(w, "{topic}\t{}\t{text}", e.doc_id).map_err(|e| Error::io("<candidates>", e))?;
            n += 1;
        }
    }
    w.flush().map_err(|e| Error::io("<candidates>", e))?;
    Ok(n)
}
