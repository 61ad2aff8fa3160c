//! Inverted index with two scoring modes.
//!
//! * **Text/BM25**: postings hold analyzer term frequencies and are scored
//!   with the Lucene-style BM25 (no `k1 + 1` numerator).
//! * **Impact**: each document is a vector of learned term weights. Weights
//!   are quantized to integers and stored where a term frequency would go, so
//!   summing `query_weight * tf` over matching postings is exactly the inner
//!   product of the quantized query and document vectors.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::{analyze, AnalyzerConfig};
use crate::ingest::Document;
use crate::{snapshot, top_k, Error, Result};

pub const DEFAULT_QUANTIZATION_SCALE: u32 = 100;

const SNAPSHOT_FORMAT: &str = "clir-sparse-index";

/// Term → non-negative weight. Zero weights are never stored.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseVector(BTreeMap<String, f64>);

impl SparseVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn try_from_weights(weights: impl IntoIterator<Item = (String, f64)>) -> Result<Self> {
        let mut v = Self::new();
        for (term, w) in weights {
            v.insert(term, w)?;
        }
        Ok(v)
    }

    /// Bag-of-words vector: each weight is the token's multiplicity.
    pub fn from_tokens<S: AsRef<str>>(tokens: &[S]) -> Self {
        let mut v = Self::new();
        for t in tokens {
            *v.0.entry(t.as_ref().to_string()).or_insert(0.0) += 1.0;
        }
        v
    }

    /// Set a weight; zero removes the term.
    pub fn insert(&mut self, term: impl Into<String>, weight: f64) -> Result<()> {
        let term = term.into();
        if !weight.is_finite() || weight < 0.0 {
            return Err(Error::InvalidWeight { term, weight });
        }
        if weight == 0.0 {
            self.0.remove(&term);
        } else {
            self.0.insert(term, weight);
        }
        Ok(())
    }

    pub fn get(&self, term: &str) -> f64 {
        self.0.get(term).copied().unwrap_or(0.0)
    }

    pub fn contains(&self, term: &str) -> bool {
        self.0.contains_key(term)
    }

    /// Terms in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(t, w)| (t.as_str(), *w))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `floor(weight * scale + 0.5)`.
pub fn quantize(weight: f64, scale: u32) -> Result<u32> {
    if !weight.is_finite() || weight < 0.0 {
        return Err(Error::InvalidWeight { term: String::new(), weight });
    }
    if scale == 0 {
        return Err(Error::InvalidArgument("quantization scale must be positive".into()));
    }
    let q = (weight * f64::from(scale) + 0.5).floor();
    if q > f64::from(u32::MAX) {
        return Err(Error::InvalidArgument(format!("weight {weight} overflows at scale {scale}")));
    }
    Ok(q as u32)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IndexMode {
    TextBm25,
    /// Quantized learned weights at the given scale.
    Impact {
        scale: u32,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Self { k1: 0.9, b: 0.4 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Posting {
    pub doc: u32,
    pub tf: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InvertedIndex {
    mode: IndexMode,
    /// Analyzer language for text indexes, kept so searches can re-create it.
    language: Option<String>,
    terms: Vec<String>,
    postings: Vec<Vec<Posting>>,
    doc_ids: Vec<String>,
    doc_lengths: Vec<u64>,
    avg_doc_length: f64,
    #[serde(skip)]
    term_lookup: HashMap<String, u32>,
    #[serde(skip)]
    doc_lookup: HashMap<String, u32>,
    /// Per document: (term id, tf), ascending term id.
    #[serde(skip)]
    forward: Vec<Vec<(u32, u32)>>,
}

struct Builder {
    mode: IndexMode,
    terms: Vec<String>,
    term_lookup: HashMap<String, u32>,
    postings: Vec<Vec<Posting>>,
    doc_ids: Vec<String>,
    doc_lookup: HashMap<String, u32>,
    doc_lengths: Vec<u64>,
}

impl Builder {
    fn new(mode: IndexMode) -> Self {
        Self {
            mode,
            terms: Vec::new(),
            term_lookup: HashMap::new(),
            postings: Vec::new(),
            doc_ids: Vec::new(),
            doc_lookup: HashMap::new(),
            doc_lengths: Vec::new(),
        }
    }

    fn add(&mut self, doc_id: String, tfs: BTreeMap<String, u32>) -> Result<()> {
        let doc = self.doc_ids.len() as u32;
        if self.doc_lookup.insert(doc_id.clone(), doc).is_some() {
            return Err(Error::DuplicateId(doc_id));
        }
        self.doc_ids.push(doc_id);
        let mut len = 0u64;
        for (term, tf) in tfs {
            if tf == 0 {
                continue;
            }
            let id = match self.term_lookup.get(&term) {
                Some(&id) => id,
                None => {
                    let id = self.terms.len() as u32;
                    self.term_lookup.insert(term.clone(), id);
                    self.terms.push(term);
                    self.postings.push(Vec::new());
                    id
                }
            };
            self.postings[id as usize].push(Posting { doc, tf });
            len += u64::from(tf);
        }
        self.doc_lengths.push(len);
        Ok(())
    }

    fn finish(self, language: Option<String>) -> InvertedIndex {
        let n = self.doc_ids.len();
        let total: u64 = self.doc_lengths.iter().sum();
        let avg_doc_length = if n == 0 { 0.0 } else { total as f64 / n as f64 };
        let mut index = InvertedIndex {
            mode: self.mode,
            language,
            terms: self.terms,
            postings: self.postings,
            doc_ids: self.doc_ids,
            doc_lengths: self.doc_lengths,
            avg_doc_length,
            term_lookup: self.term_lookup,
            doc_lookup: self.doc_lookup,
            forward: Vec::new(),
        };
        index.build_forward();
        index
    }
}

impl InvertedIndex {
    /// Analyze and index documents for BM25.
    pub fn index_text(docs: impl IntoIterator<Item = Document>, config: &AnalyzerConfig) -> Result<Self> {
        let mut b = Builder::new(IndexMode::TextBm25);
        for doc in docs {
            let mut tfs = BTreeMap::new();
            for tok in analyze(&doc.indexable_text(), config) {
                *tfs.entry(tok).or_insert(0u32) += 1;
            }
            b.add(doc.doc_id, tfs)?;
        }
        Ok(b.finish(Some(config.language().as_str().to_string())))
    }

    /// Index learned weight vectors, quantizing each weight at `scale`.
    /// Entries that quantize to zero are dropped.
    pub fn index_impact(vectors: impl IntoIterator<Item = (String, SparseVector)>, scale: u32) -> Result<Self> {
        if scale == 0 {
            return Err(Error::InvalidArgument("quantization scale must be positive".into()));
        }
        let mut b = Builder::new(IndexMode::Impact { scale });
        for (id, vec) in vectors {
            let tfs = vec
                .iter()
                .map(|(t, w)| {
                    quantize(w, scale)
                        .map(|q| (t.to_string(), q))
                        .map_err(|_| Error::InvalidWeight { term: t.to_string(), weight: w })
                })
                .collect::<Result<BTreeMap<_, _>>>()?;
            b.add(id, tfs)?;
        }
        Ok(b.finish(None))
    }

    fn build_forward(&mut self) {
        let mut forward = vec![Vec::new(); self.doc_ids.len()];
        for (term, list) in self.postings.iter().enumerate() {
            for p in list {
                forward[p.doc as usize].push((term as u32, p.tf));
            }
        }
        self.forward = forward;
    }

    pub fn mode(&self) -> IndexMode {
        self.mode
    }

    pub fn language(&self) -> Option<&str> {
        self.language.as_deref()
    }

    pub fn num_docs(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn avg_doc_length(&self) -> f64 {
        self.avg_doc_length
    }

    pub fn doc_lengths(&self) -> &[u64] {
        &self.doc_lengths
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    pub fn doc_index(&self, doc_id: &str) -> Option<usize> {
        self.doc_lookup.get(doc_id).map(|&d| d as usize)
    }

    /// Postings of a term as `(doc_id, tf)` in internal-id order.
    pub fn postings(&self, term: &str) -> Vec<(&str, u32)> {
        self.term_lookup
            .get(term)
            .map(|&t| self.postings[t as usize].iter().map(|p| (self.doc_ids[p.doc as usize].as_str(), p.tf)).collect())
            .unwrap_or_default()
    }

    pub fn document_frequency(&self, term: &str) -> usize {
        self.term_lookup.get(term).map_or(0, |&t| self.postings[t as usize].len())
    }

    /// Stored `(term, tf)` pairs of a document.
    pub fn doc_terms(&self, doc_id: &str) -> Vec<(&str, u32)> {
        self.doc_index(doc_id)
            .map(|d| self.forward[d].iter().map(|&(t, tf)| (self.terms[t as usize].as_str(), tf)).collect())
            .unwrap_or_default()
    }

    /// A document's stored representation in query units: raw term
    /// frequencies for text indexes, de-quantized weights (`tf / scale`) for
    /// impact indexes.
    pub fn doc_vector(&self, doc_id: &str) -> Option<SparseVector> {
        let d = self.doc_index(doc_id)?;
        let div = match self.mode {
            IndexMode::TextBm25 => 1.0,
            IndexMode::Impact { scale } => f64::from(scale),
        };
        let weights = self.forward[d].iter().map(|&(t, tf)| (self.terms[t as usize].clone(), f64::from(tf) / div));
        Some(SparseVector::try_from_weights(weights).expect("stored weights are non-negative"))
    }

    pub fn idf(&self, term: &str) -> f64 {
        bm25_idf(self.num_docs(), self.document_frequency(term))
    }

    /// BM25 over analyzed query tokens; repeated tokens weigh by multiplicity.
    pub fn search_bm25<S: AsRef<str>>(
        &self,
        query_tokens: &[S],
        k: usize,
        params: Bm25Params,
    ) -> Result<Vec<(String, f64)>> {
        self.search_bm25_weighted(&SparseVector::from_tokens(query_tokens), k, params)
    }

    /// BM25 with real-valued query-side weights in place of term counts.
    pub fn search_bm25_weighted(
        &self,
        query: &SparseVector,
        k: usize,
        params: Bm25Params,
    ) -> Result<Vec<(String, f64)>> {
        if self.mode != IndexMode::TextBm25 {
            return Err(Error::WrongMode("BM25 search needs a text index"));
        }
        check_k(k)?;
        let n = self.num_docs();
        let mut acc = Accumulator::new(n);
        let Bm25Params { k1, b } = params;
        let avgdl = self.avg_doc_length;
        for (term, w) in query.iter() {
            let Some(&t) = self.term_lookup.get(term) else { continue };
            let list = &self.postings[t as usize];
            let idf = bm25_idf(n, list.len());
            for p in list {
                let tf = f64::from(p.tf);
                let dl = self.doc_lengths[p.doc as usize] as f64;
                let s = w * idf * tf / (tf + k1 * (1.0 - b + b * dl / avgdl));
                acc.add(p.doc, s);
            }
        }
        Ok(acc.top_k(&self.doc_ids, k))
    }

    /// Sum-of-tf scoring: `Σ_t quantize(query[t], scale) · tf(t, d)`.
    pub fn search_impact(&self, query: &SparseVector, k: usize) -> Result<Vec<(String, f64)>> {
        let IndexMode::Impact { scale } = self.mode else {
            return Err(Error::WrongMode("impact search needs an impact index"));
        };
        check_k(k)?;
        let mut scores = vec![0u64; self.num_docs()];
        let mut touched = Vec::new();
        for (term, w) in query.iter() {
            let qw = u64::from(quantize(w, scale)?);
            if qw == 0 {
                continue;
            }
            let Some(&t) = self.term_lookup.get(term) else { continue };
            for p in &self.postings[t as usize] {
                let slot = &mut scores[p.doc as usize];
                if *slot == 0 {
                    touched.push(p.doc);
                }
                *slot += qw * u64::from(p.tf);
            }
        }
        let cands =
            touched.into_iter().map(|d| (self.doc_ids[d as usize].as_str(), scores[d as usize] as f64)).collect();
        Ok(top_k(cands, k).into_iter().map(|(d, s)| (d.to_string(), s)).collect())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        snapshot::write(path.as_ref(), SNAPSHOT_FORMAT, self)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let mut index: Self = snapshot::read(path.as_ref(), SNAPSHOT_FORMAT)?;
        index.term_lookup = index.terms.iter().enumerate().map(|(i, t)| (t.clone(), i as u32)).collect();
        index.doc_lookup = index.doc_ids.iter().enumerate().map(|(i, d)| (d.clone(), i as u32)).collect();
        index.build_forward();
        Ok(index)
    }

    pub(crate) const FORMAT: &'static str = SNAPSHOT_FORMAT;
}

/// `ln(1 + (N - df + 0.5) / (df + 0.5))`.
pub fn bm25_idf(n: usize, df: usize) -> f64 {
    let (n, df) = (n as f64, df as f64);
    (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    Ok(())
}

/// Dense score accumulator that remembers which documents were matched.
struct Accumulator {
    scores: Vec<f64>,
    hit: Vec<bool>,
    touched: Vec<u32>,
}

impl Accumulator {
    fn new(n: usize) -> Self {
        Self { scores: vec![0.0; n], hit: vec![false; n], touched: Vec::new() }
    }

    fn add(&mut self, doc: u32, s: f64) {
        let d = doc as usize;
        if !self.hit[d] {
            self.hit[d] = true;
            self.touched.push(doc);
        }
        self.scores[d] += s;
    }

    fn top_k(self, doc_ids: &[String], k: usize) -> Vec<(String, f64)> {
        let cands = self.touched.iter().map(|&d| (doc_ids[d as usize].as_str(), self.scores[d as usize])).collect();
        top_k(cands, k).into_iter().map(|(d, s)| (d.to_string(), s)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{Language, Stemmer};

    fn plain() -> AnalyzerConfig {
        AnalyzerConfig::for_language(Language::En)
            .with_stopwords(Default::default())
            .with_stemmer(Stemmer::None)
            .unwrap()
    }

    fn docs(texts: &[&str]) -> Vec<Document> {
        texts.iter().enumerate().map(|(i, t)| Document::new(format!("d{i}"), *t)).collect()
    }

    fn sv(pairs: &[(&str, f64)]) -> SparseVector {
        SparseVector::try_from_weights(pairs.iter().map(|(t, w)| (t.to_string(), *w))).unwrap()
    }

    #[test]
    fn hand_countable_index() {
        let idx = InvertedIndex::index_text(docs(&["a b", "b"]), &plain()).unwrap();
        assert_eq!(idx.num_docs(), 2);
        assert_eq!(idx.postings("a"), [("d0", 1)]);
        assert_eq!(idx.postings("b"), [("d0", 1), ("d1", 1)]);
        assert_eq!(idx.avg_doc_length(), 1.5);
    }

    #[test]
    fn empty_index_searches_empty() {
        let idx = InvertedIndex::index_text(Vec::new(), &plain()).unwrap();
        assert_eq!(idx.num_docs(), 0);
        assert!(idx.search_bm25(&["a"], 10, Bm25Params::default()).unwrap().is_empty());
    }

    #[test]
    fn duplicate_doc_rejected() {
        let d = vec![Document::new("x", "a"), Document::new("x", "b")];
        assert!(matches!(InvertedIndex::index_text(d, &plain()), Err(Error::DuplicateId(_))));
    }

    #[test]
    fn quantize_examples() {
        assert_eq!(quantize(10.0, 1).unwrap(), 10);
        assert_eq!(quantize(0.0, 100).unwrap(), 0);
        assert_eq!(quantize(0.126, 100).unwrap(), 13);
        assert!(quantize(-0.1, 100).is_err());
        assert!(quantize(f64::NAN, 100).is_err());
    }

    #[test]
    fn single_doc_bm25_value() {
        let idx = InvertedIndex::index_text(docs(&["a"]), &plain()).unwrap();
        let hits = idx.search_bm25(&["a"], 10, Bm25Params::default()).unwrap();
        let expected = (4.0f64 / 3.0).ln() / 1.9;
        assert_eq!(hits.len(), 1);
        assert!((hits[0].1 - expected).abs() < 1e-12);
        assert!((hits[0].1 - 0.151412).abs() < 5e-6);
    }

    #[test]
    fn no_matching_term() {
        let idx = InvertedIndex::index_text(docs(&["a b"]), &plain()).unwrap();
        assert!(idx.search_bm25(&["zzz"], 5, Bm25Params::default()).unwrap().is_empty());
    }

    #[test]
    fn modes_are_exclusive() {
        let text = InvertedIndex::index_text(docs(&["a"]), &plain()).unwrap();
        assert!(matches!(text.search_impact(&sv(&[("a", 1.0)]), 1), Err(Error::WrongMode(_))));
        let imp = InvertedIndex::index_impact(vec![("d".to_string(), sv(&[("a", 1.0)]))], 1).unwrap();
        assert!(matches!(imp.search_bm25(&["a"], 1, Bm25Params::default()), Err(Error::WrongMode(_))));
    }

    #[test]
    fn impact_posting_and_score() {
        let idx = InvertedIndex::index_impact(vec![("d1".to_string(), sv(&[("car", 10.0)]))], 1).unwrap();
        assert_eq!(idx.postings("car"), [("d1", 10)]);
        let hits = idx.search_impact(&sv(&[("car", 1.0)]), 10).unwrap();
        assert_eq!(hits, [("d1".to_string(), 10.0)]);
        assert!(idx.search_impact(&sv(&[("bus", 1.0)]), 10).unwrap().is_empty());
    }

    #[test]
    fn impact_drops_zero_quantized_weights() {
        let idx = InvertedIndex::index_impact(vec![("d".to_string(), sv(&[("car", 0.004)]))], 100).unwrap();
        assert!(idx.postings("car").is_empty());
        assert_eq!(idx.num_terms(), 0);
    }

    #[test]
    fn ties_break_by_doc_id() {
        let idx = InvertedIndex::index_text(
            vec![Document::new("z", "a"), Document::new("m", "a"), Document::new("b", "a")],
            &plain(),
        )
        .unwrap();
        let hits = idx.search_bm25(&["a"], 2, Bm25Params::default()).unwrap();
        assert_eq!(hits.iter().map(|h| h.0.as_str()).collect::<Vec<_>>(), ["b", "m"]);
    }

    #[test]
    fn doc_vectors_in_query_units() {
        let idx = InvertedIndex::index_impact(vec![("d".to_string(), sv(&[("a", 0.5), ("b", 2.0)]))], 100).unwrap();
        let v = idx.doc_vector("d").unwrap();
        assert_eq!(v.get("a"), 0.5);
        assert_eq!(v.get("b"), 2.0);
        let text = InvertedIndex::index_text(docs(&["a a b"]), &plain()).unwrap();
        assert_eq!(text.doc_vector("d0").unwrap(), sv(&[("a", 2.0), ("b", 1.0)]));
    }

    #[test]
    fn snapshot_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("idx.json");
        let idx = InvertedIndex::index_text(docs(&["a b c", "b c", "c"]), &plain()).unwrap();
        idx.save(&path).unwrap();
        let back = InvertedIndex::load(&path).unwrap();
        let q = ["b", "c"];
        assert_eq!(
            idx.search_bm25(&q, 3, Bm25Params::default()).unwrap(),
            back.search_bm25(&q, 3, Bm25Params::default()).unwrap()
        );
        assert_eq!(back.doc_terms("d0"), idx.doc_terms("d0"));
    }
}
