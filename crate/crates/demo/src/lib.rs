//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Each exported function takes plain text in the formats the CLI reads and
//! returns JSON (or TREC run text) for the page to render.

use clir_core::analysis::{analyze, AnalyzerConfig, Language};
use clir_core::eval;
use clir_core::fusion::{rrf, RrfParams};
use clir_core::ingest::{read_qrels, read_run, write_run_to};
use clir_core::sparse::{Bm25Params, InvertedIndex};
use clir_core::Document;
use serde_json::json;
use wasm_bindgen::prelude::*;

fn js_err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

/// One document per non-empty line: `doc_id<TAB>text`, or bare text (ids become `d1`, `d2`, ...).
fn parse_corpus(text: &str) -> Vec<Document> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| match l.split_once('\t') {
            Some((id, body)) if !id.trim().is_empty() => Document::new(id.trim(), body),
            _ => Document::new(format!("d{}", i + 1), l),
        })
        .collect()
}

/// BM25 index over an in-browser corpus.
#[wasm_bindgen]
pub struct SearchDemo {
    index: InvertedIndex,
    analyzer: AnalyzerConfig,
}

#[wasm_bindgen]
impl SearchDemo {
    #[wasm_bindgen(constructor)]
    pub fn new(corpus: &str, language: &str) -> Result<SearchDemo, JsError> {
        SearchDemo::build(corpus, language).map_err(js_err)
    }

    #[wasm_bindgen(js_name = numDocs)]
    pub fn num_docs(&self) -> usize {
        self.index.num_docs()
    }

    /// JSON `{"tokens": [...], "hits": [{"doc_id", "score"}]}`.
    pub fn search(&self, query: &str, k1: f64, b: f64, k: usize) -> Result<String, JsError> {
        self.search_json(query, k1, b, k).map_err(js_err)
    }
}

impl SearchDemo {
    pub fn build(corpus: &str, language: &str) -> clir_core::Result<SearchDemo> {
        let analyzer = AnalyzerConfig::for_language(language.parse::<Language>()?);
        let index = InvertedIndex::index_text(parse_corpus(corpus), &analyzer)?;
        Ok(SearchDemo { index, analyzer })
    }

    pub fn search_json(&self, query: &str, k1: f64, b: f64, k: usize) -> clir_core::Result<String> {
        let tokens = analyze(query, &self.analyzer);
        let hits = self.index.search_bm25(&tokens, k.max(1), Bm25Params { k1, b })?;
        let hits: Vec<_> = hits.into_iter().map(|(d, s)| json!({"doc_id": d, "score": s})).collect();
        Ok(json!({"tokens": tokens, "hits": hits}).to_string())
    }
}

/// Fuse TREC runs (one run per array element) and return the fused run text.
#[wasm_bindgen]
pub fn fuse(runs: Vec<String>, k_rrf: f64, depth: usize) -> Result<String, JsError> {
    fuse_runs(&runs, k_rrf, depth).map_err(js_err)
}

pub fn fuse_runs(runs: &[String], k_rrf: f64, depth: usize) -> clir_core::Result<String> {
    let parsed = runs.iter().map(|r| read_run(r.as_bytes())).collect::<clir_core::Result<Vec<_>>>()?;
    let fused = rrf(&parsed, &RrfParams { k_rrf, input_depth: depth, output_depth: depth })?;
    let mut out = Vec::new();
    write_run_to(&fused, &mut out).expect("writing to memory");
    Ok(String::from_utf8(out).expect("run text is UTF-8"))
}

/// JSON with per-topic and mean nDCG@k, Recall@k and AP, plus the mean nDCG
/// and recall at every cutoff 1..=max_k for plotting.
#[wasm_bindgen]
pub fn evaluate(run: &str, qrels: &str, ndcg_k: usize, recall_k: usize, max_k: usize) -> Result<String, JsError> {
    evaluate_json(run, qrels, ndcg_k, recall_k, max_k).map_err(js_err)
}

pub fn evaluate_json(
    run: &str,
    qrels: &str,
    ndcg_k: usize,
    recall_k: usize,
    max_k: usize,
) -> clir_core::Result<String> {
    let run = read_run(run.as_bytes())?;
    let qrels = read_qrels(qrels.as_bytes())?;
    let metrics = eval::evaluate(&run, &qrels, ndcg_k, recall_k, eval::Gain::Linear);
    let table: Vec<_> =
        metrics.iter().map(|m| json!({"metric": m.name, "mean": m.mean(), "per_topic": m.per_topic})).collect();
    let curve: Vec<_> = (1..=max_k)
        .map(|k| {
            json!({
                "k": k,
                "ndcg": eval::mean(&eval::ndcg_at_k(&run, &qrels, k)),
                "recall": eval::mean(&eval::recall_at_k(&run, &qrels, k)),
            })
        })
        .collect();
    Ok(json!({"metrics": table, "curve": curve}).to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn search_ranks_matching_lines() {
        let demo = SearchDemo::build("a\tThe volcano erupted\nb\tFootball final\nvolcanic ash", "en").unwrap();
        let out: serde_json::Value = serde_json::from_str(&demo.search_json("volcano", 0.9, 0.4, 10).unwrap()).unwrap();
        assert_eq!(out["hits"][0]["doc_id"], "a");
        assert_eq!(out["hits"].as_array().unwrap().len(), 1);
        assert_eq!(demo.num_docs(), 3);
    }

    #[test]
    fn fusion_and_evaluation() {
        let a = "1 Q0 x 1 2.0 a\n1 Q0 y 2 1.0 a\n".to_string();
        let b = "1 Q0 y 1 5.0 b\n1 Q0 z 2 4.0 b\n".to_string();
        let fused = fuse_runs(&[a, b], 60.0, 1000).unwrap();
        assert!(fused.starts_with("1 Q0 y 1 "));
        let report: serde_json::Value =
            serde_json::from_str(&evaluate_json(&fused, "1 0 y 1\n1 0 q 1\n", 20, 1000, 3).unwrap()).unwrap();
        assert_eq!(report["metrics"][1]["mean"], 0.5);
        assert_eq!(report["curve"].as_array().unwrap().len(), 3);
    }

    #[test]
    fn bad_input_is_an_error() {
        assert!(SearchDemo::build("x", "xx").is_err());
        assert!(evaluate_json("1 Q0 x", "", 20, 100, 1).is_err());
    }
}
