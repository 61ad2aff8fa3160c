//! Readers and writers for corpora, topics, qrels, runs and vector files.
//!
//! Corpus, topic and vector files are JSONL, one record per line; blank lines
//! are skipped. Qrels and runs use the whitespace-separated TREC layouts:
//!
//! ```text
//! qrels: topic 0 docid grade
//! run:   topic Q0 docid rank score tag
//! ```

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use indexmap::IndexMap;
use serde::Deserialize;

use crate::dense::DenseVector;
use crate::sparse::SparseVector;
use crate::{Error, RankedList, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub doc_id: String,
    pub title: Option<String>,
    pub text: String,
}

impl Document {
    pub fn new(doc_id: impl Into<String>, text: impl Into<String>) -> Self {
        Self { doc_id: doc_id.into(), title: None, text: text.into() }
    }

    /// Text handed to the analyzer: title and body joined by a space.
    pub fn indexable_text(&self) -> String {
        match &self.title {
            Some(t) if !t.is_empty() => format!("{t} {}", self.text),
            _ => self.text.clone(),
        }
    }
}

// Adapter point for other corpus layouts: map them onto these keys.
#[derive(Deserialize)]
struct DocRecord {
    #[serde(alias = "docid", alias = "doc_id")]
    id: String,
    contents: Option<String>,
    title: Option<String>,
    text: Option<String>,
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Error::io(path, e))
}

/// Non-blank lines with their 1-based line numbers.
fn numbered_lines<R: BufRead>(reader: R) -> impl Iterator<Item = Result<(usize, String)>> {
    reader.lines().enumerate().filter_map(|(i, line)| match line {
        Ok(l) if l.trim().is_empty() => None,
        Ok(l) => Some(Ok((i + 1, l))),
        Err(e) => Some(Err(Error::parse(i + 1, e.to_string()))),
    })
}

/// Stream documents from a JSONL reader in file order.
///
/// Records carry `"id"` plus either `"contents"` or `"title"`/`"text"`.
pub fn read_corpus<R: BufRead>(reader: R) -> impl Iterator<Item = Result<Document>> {
    let mut seen = HashSet::new();
    numbered_lines(reader).map(move |item| {
        let (line, raw) = item?;
        let rec: DocRecord = serde_json::from_str(&raw).map_err(|e| Error::parse(line, e.to_string()))?;
        if rec.id.is_empty() {
            return Err(Error::parse(line, "empty document id"));
        }
        let text = match (rec.contents, rec.text) {
            (Some(c), _) => c,
            (None, Some(t)) => t,
            (None, None) if rec.title.is_some() => String::new(),
            (None, None) => return Err(Error::parse(line, "record has neither `contents` nor `text`")),
        };
        if !seen.insert(rec.id.clone()) {
            return Err(Error::parse(line, format!("duplicate document id `{}`", rec.id)));
        }
        Ok(Document { doc_id: rec.id, title: rec.title, text })
    })
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Vec<Document>> {
    let path = path.as_ref();
    read_corpus(open(path)?).collect::<Result<Vec<_>>>().map_err(|e| e.in_file(path))
}

/// Which rendering of a topic a query is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// The topic as originally written (English).
    Original,
    /// Human translation into the document language.
    Human,
    /// Machine translation into the document language.
    Machine,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Original, Variant::Human, Variant::Machine];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Original => "original",
            Variant::Human => "human",
            Variant::Machine => "machine",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "original" => Ok(Variant::Original),
            "human" => Ok(Variant::Human),
            "machine" => Ok(Variant::Machine),
            other => Err(Error::InvalidArgument(format!("unknown translation variant `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QueryFields {
    Title,
    Description,
    Both,
}

impl QueryFields {
    pub fn as_str(self) -> &'static str {
        match self {
            QueryFields::Title => "title",
            QueryFields::Description => "desc",
            QueryFields::Both => "both",
        }
    }
}

impl FromStr for QueryFields {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "title" => Ok(QueryFields::Title),
            "description" | "desc" => Ok(QueryFields::Description),
            "both" => Ok(QueryFields::Both),
            other => Err(Error::InvalidArgument(format!("unknown query fields `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Deserialize)]
pub struct TopicText {
    #[serde(default)]
    pub title: String,
    #[serde(default)]
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topic {
    pub topic_id: String,
    pub variants: BTreeMap<Variant, TopicText>,
}

#[derive(Deserialize)]
struct TopicRecord {
    #[serde(alias = "id")]
    topic_id: String,
    variants: BTreeMap<Variant, TopicText>,
}

/// Parse topics, one JSONL record each:
/// `{"topic_id": "1", "variants": {"original": {"title": .., "description": ..}, ..}}`.
pub fn read_topics<R: BufRead>(reader: R) -> Result<Vec<Topic>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for item in numbered_lines(reader) {
        let (line, raw) = item?;
        let rec: TopicRecord = serde_json::from_str(&raw).map_err(|e| Error::parse(line, e.to_string()))?;
        if rec.variants.is_empty() {
            return Err(Error::parse(line, format!("topic `{}` has no variants", rec.topic_id)));
        }
        if let Some((v, _)) = rec.variants.iter().find(|(_, t)| t.title.trim().is_empty()) {
            return Err(Error::parse(line, format!("topic `{}` variant `{v}` is missing a title", rec.topic_id)));
        }
        if !seen.insert(rec.topic_id.clone()) {
            return Err(Error::parse(line, format!("duplicate topic id `{}`", rec.topic_id)));
        }
        out.push(Topic { topic_id: rec.topic_id, variants: rec.variants });
    }
    Ok(out)
}

pub fn load_topics(path: impl AsRef<Path>) -> Result<Vec<Topic>> {
    let path = path.as_ref();
    read_topics(open(path)?).map_err(|e| e.in_file(path))
}

/// Query text for one topic rendering. `Both` joins title and description with one space.
pub fn build_query_text(topic: &Topic, variant: Variant, fields: QueryFields) -> Result<String> {
    let text = topic
        .variants
        .get(&variant)
        .ok_or_else(|| Error::MissingVariant { topic: topic.topic_id.clone(), variant: variant.to_string() })?;
    Ok(match fields {
        QueryFields::Title => text.title.clone(),
        QueryFields::Description => text.description.clone(),
        QueryFields::Both => format!("{} {}", text.title, text.description),
    })
}

/// Graded relevance judgments. Unjudged pairs are absent and read as grade 0.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Qrels {
    judgments: BTreeMap<String, HashMap<String, u32>>,
}

impl Qrels {
    pub fn new() -> Self {
        Self::default()
    }

    /// Record a judgment; returns false if the pair was already judged.
    pub fn insert(&mut self, topic: impl Into<String>, doc: impl Into<String>, grade: u32) -> bool {
        self.judgments.entry(topic.into()).or_default().insert(doc.into(), grade).is_none()
    }

    pub fn grade(&self, topic: &str, doc: &str) -> u32 {
        self.judgments.get(topic).and_then(|m| m.get(doc)).copied().unwrap_or(0)
    }

    pub fn topic(&self, topic: &str) -> Option<&HashMap<String, u32>> {
        self.judgments.get(topic)
    }

    /// Judged topic ids, ascending.
    pub fn topics(&self) -> impl Iterator<Item = &str> {
        self.judgments.keys().map(String::as_str)
    }

    pub fn num_topics(&self) -> usize {
        self.judgments.len()
    }

    /// All `(topic, doc, grade)` triples.
    pub fn triples(&self) -> impl Iterator<Item = (&str, &str, u32)> {
        self.judgments.iter().flat_map(|(t, m)| m.iter().map(move |(d, g)| (t.as_str(), d.as_str(), *g)))
    }
}

pub fn read_qrels<R: BufRead>(reader: R) -> Result<Qrels> {
    let mut qrels = Qrels::new();
    for item in numbered_lines(reader) {
        let (line, raw) = item?;
        let cols: Vec<&str> = raw.split_whitespace().collect();
        let [topic, _iter, doc, grade] = cols[..] else {
            return Err(Error::parse(line, format!("expected 4 columns, found {}", cols.len())));
        };
        let grade: u32 =
            grade.parse().map_err(|_| Error::parse(line, format!("grade `{grade}` is not a non-negative integer")))?;
        if !qrels.insert(topic, doc, grade) {
            return Err(Error::parse(line, format!("duplicate judgment for ({topic}, {doc})")));
        }
    }
    Ok(qrels)
}

pub fn load_qrels(path: impl AsRef<Path>) -> Result<Qrels> {
    let path = path.as_ref();
    read_qrels(open(path)?).map_err(|e| e.in_file(path))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunEntry {
    pub doc_id: String,
    pub score: f64,
}

/// A TREC run: per-topic ranked lists under one tag. Ranks are positions.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Run {
    pub tag: String,
    topics: IndexMap<String, Vec<RunEntry>>,
}

impl Run {
    pub fn new(tag: impl Into<String>) -> Self {
        Self { tag: tag.into(), topics: IndexMap::new() }
    }

    /// Add (or replace) one topic's list. Entries must have non-increasing
    /// scores and distinct doc ids.
    pub fn insert_topic(&mut self, topic: impl Into<String>, entries: Vec<RunEntry>) -> Result<()> {
        let topic = topic.into();
        let mut seen = HashSet::with_capacity(entries.len());
        for (i, e) in entries.iter().enumerate() {
            if !seen.insert(e.doc_id.as_str()) {
                return Err(Error::InvalidArgument(format!("topic {topic}: duplicate doc `{}`", e.doc_id)));
            }
            if !e.score.is_finite() {
                return Err(Error::InvalidArgument(format!("topic {topic}: non-finite score for `{}`", e.doc_id)));
            }
            if i > 0 && e.score > entries[i - 1].score {
                return Err(Error::InvalidArgument(format!("topic {topic}: score increases at rank {}", i + 1)));
            }
        }
        self.topics.insert(topic, entries);
        Ok(())
    }

    pub fn insert_ranked(&mut self, list: RankedList) -> Result<()> {
        let entries = list.hits.into_iter().map(|(doc_id, score)| RunEntry { doc_id, score }).collect();
        self.insert_topic(list.topic_id, entries)
    }

    pub fn topic(&self, topic: &str) -> Option<&[RunEntry]> {
        self.topics.get(topic).map(Vec::as_slice)
    }

    pub fn topics(&self) -> impl Iterator<Item = (&str, &[RunEntry])> {
        self.topics.iter().map(|(t, e)| (t.as_str(), e.as_slice()))
    }

    pub fn topic_ids(&self) -> impl Iterator<Item = &str> {
        self.topics.keys().map(String::as_str)
    }

    pub fn num_topics(&self) -> usize {
        self.topics.len()
    }

    pub fn num_entries(&self) -> usize {
        self.topics.values().map(Vec::len).sum()
    }

    /// Doc ids of a topic in rank order.
    pub fn ranking(&self, topic: &str) -> Vec<&str> {
        self.topic(topic).unwrap_or_default().iter().map(|e| e.doc_id.as_str()).collect()
    }

    pub fn sort_topics(&mut self) {
        self.topics.sort_keys();
    }
}

pub fn read_run<R: BufRead>(reader: R) -> Result<Run> {
    // topic -> (rank, line, entry)
    let mut rows: IndexMap<String, Vec<(usize, usize, RunEntry)>> = IndexMap::new();
    let mut tag: Option<String> = None;
    for item in numbered_lines(reader) {
        let (line, raw) = item?;
        let cols: Vec<&str> = raw.split_whitespace().collect();
        let [topic, _q0, doc, rank, score, run_tag] = cols[..] else {
            return Err(Error::parse(line, format!("expected 6 columns, found {}", cols.len())));
        };
        let rank: usize =
            rank.parse().map_err(|_| Error::parse(line, format!("rank `{rank}` is not a positive integer")))?;
        let score: f64 = score
            .parse()
            .ok()
            .filter(|s: &f64| s.is_finite())
            .ok_or_else(|| Error::parse(line, format!("score `{score}` is not a finite number")))?;
        match &tag {
            None => tag = Some(run_tag.to_string()),
            Some(t) if t != run_tag => {
                return Err(Error::parse(line, format!("run tag `{run_tag}` differs from `{t}`")));
            }
            Some(_) => {}
        }
        rows.entry(topic.to_string()).or_default().push((rank, line, RunEntry { doc_id: doc.to_string(), score }));
    }

    let mut run = Run::new(tag.unwrap_or_default());
    for (topic, mut entries) in rows {
        entries.sort_by_key(|(rank, line, _)| (*rank, *line));
        let mut seen = HashSet::new();
        for (i, (rank, line, e)) in entries.iter().enumerate() {
            if *rank != i + 1 {
                return Err(Error::parse(*line, format!("topic {topic}: expected rank {}, found {rank}", i + 1)));
            }
            if !seen.insert(e.doc_id.as_str()) {
                return Err(Error::parse(*line, format!("topic {topic}: duplicate doc `{}`", e.doc_id)));
            }
            if i > 0 && e.score > entries[i - 1].2.score {
                return Err(Error::parse(*line, format!("topic {topic}: score increases at rank {rank}")));
            }
        }
        run.topics.insert(topic, entries.into_iter().map(|(_, _, e)| e).collect());
    }
    Ok(run)
}

pub fn load_run(path: impl AsRef<Path>) -> Result<Run> {
    let path = path.as_ref();
    read_run(open(path)?).map_err(|e| e.in_file(path))
}

/// Serialize in TREC layout. Ranks are regenerated from position; scores use
/// six decimals.
pub fn write_run_to<W: Write>(run: &Run, mut w: W) -> std::io::Result<()> {
    for (topic, entries) in &run.topics {
        for (i, e) in entries.iter().enumerate() {
            writeln!(w, "{topic} Q0 {} {} {:.6} {}", e.doc_id, i + 1, e.score, run.tag)?;
        }
    }
    w.flush()
}

pub fn write_run(run: &Run, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_run_to(run, BufWriter::new(file)).map_err(|e| Error::io(path, e))
}

#[derive(Deserialize)]
struct VectorRecord<V> {
    #[serde(alias = "docid", alias = "doc_id", alias = "topic_id")]
    id: String,
    vector: V,
}

/// Stream `{"id": .., "vector": {token: weight}}` records.
pub fn read_sparse_vectors<R: BufRead>(reader: R) -> impl Iterator<Item = Result<(String, SparseVector)>> {
    numbered_lines(reader).map(|item| {
        let (line, raw) = item?;
        let rec: VectorRecord<BTreeMap<String, f64>> =
            serde_json::from_str(&raw).map_err(|e| Error::parse(line, e.to_string()))?;
        let vec = SparseVector::try_from_weights(rec.vector).map_err(|e| Error::parse(line, e.to_string()))?;
        Ok((rec.id, vec))
    })
}

pub fn load_sparse_vectors(path: impl AsRef<Path>) -> Result<Vec<(String, SparseVector)>> {
    let path = path.as_ref();
    read_sparse_vectors(open(path)?).collect::<Result<Vec<_>>>().map_err(|e| e.in_file(path))
}

/// Stream `{"id": .., "vector": [floats]}` records; every record must share
/// the first record's dimension.
pub fn read_dense_vectors<R: BufRead>(reader: R) -> impl Iterator<Item = Result<(String, DenseVector)>> {
    let mut dim: Option<usize> = None;
    numbered_lines(reader).map(move |item| {
        let (line, raw) = item?;
        let rec: VectorRecord<Vec<f32>> = serde_json::from_str(&raw).map_err(|e| Error::parse(line, e.to_string()))?;
        let vec = DenseVector::new(rec.vector).map_err(|e| Error::parse(line, e.to_string()))?;
        match dim {
            None => dim = Some(vec.dim()),
            Some(d) if d != vec.dim() => {
                return Err(Error::parse(line, Error::DimensionMismatch { expected: d, got: vec.dim() }.to_string()));
            }
            Some(_) => {}
        }
        Ok((rec.id, vec))
    })
}

pub fn load_dense_vectors(path: impl AsRef<Path>) -> Result<Vec<(String, DenseVector)>> {
    let path = path.as_ref();
    read_dense_vectors(open(path)?).collect::<Result<Vec<_>>>().map_err(|e| e.in_file(path))
}
