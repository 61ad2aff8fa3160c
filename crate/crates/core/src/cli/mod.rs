//! The `clir` command-line tool.
//!
//! ```text
//! clir index        build a BM25, impact or flat index snapshot
//! clir search       run one first-stage condition (optionally with PRF) into a TREC run
//! clir rerank       emit candidate pairs for an external scorer, or apply its scores
//! clir fuse         reciprocal rank fusion, optionally as an early/late rerank pipeline
//! clir eval         nDCG@k, Recall@k and MAP per topic
//! clir significance paired t-tests against a baseline with Bonferroni correction
//! ```

mod config;
mod pipeline;

use std::collections::HashMap;
use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::analysis::{analyze, load_stopwords, AnalyzerConfig, Language, Stemmer};
use crate::dense::FlatIndex;
use crate::eval::{self, Gain, PerTopic};
use crate::fusion::{early_fusion, late_fusion, rrf, RrfParams};
use crate::ingest::{self, QueryFields, Run, Variant};
use crate::prf::{prf_search, Engine, Query, RocchioParams};
use crate::rerank::{self, rerank, write_candidates};
use crate::sparse::{Bm25Params, InvertedIndex, SparseVector, DEFAULT_QUANTIZATION_SCALE};
use crate::{snapshot, Error, RankedList, Result};

pub use config::{config_args, parse_config, CONFIG_VERSION};
pub use pipeline::{Mode, PipelineConfig};

#[derive(Debug, Parser)]
#[command(name = "clir", version, about = "Multi-stage cross-lingual retrieval toolkit")]
pub struct Cli {
    /// TOML file with default flags per subcommand (`version = 1`).
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build an index snapshot.
    Index(IndexArgs),
    /// Retrieve for every topic and write a TREC run.
    Search(SearchArgs),
    /// Rerank a run with external scores, or emit the pairs to be scored.
    Rerank(RerankArgs),
    /// Fuse runs with reciprocal rank fusion.
    Fuse(FuseArgs),
    /// Evaluate a run against qrels.
    Eval(EvalArgs),
    /// Paired t-tests of runs against a baseline.
    Significance(SignificanceArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum IndexKind {
    /// Analyzed text for BM25 (input: corpus JSONL).
    Text,
    /// Quantized learned weights (input: sparse vector JSONL).
    Impact,
    /// Flat dense index (input: dense vector JSONL).
    Dense,
}

#[derive(Debug, Args)]
pub struct IndexArgs {
    #[arg(long, value_enum)]
    pub kind: IndexKind,
    /// Corpus or vector file.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "en")]
    pub language: Language,
    /// Replace the bundled stopword list (one token per line).
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
    #[arg(long)]
    pub no_stem: bool,
    /// Quantization scale for impact indexes.
    #[arg(long, default_value_t = DEFAULT_QUANTIZATION_SCALE)]
    pub scale: u32,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long)]
    pub index: PathBuf,
    #[arg(long)]
    pub mode: Mode,
    /// Topic JSONL (BM25 modes).
    #[arg(long)]
    pub topics: Option<PathBuf>,
    /// Pre-encoded query vectors keyed by topic id (impact and dense modes).
    #[arg(long)]
    pub query_vectors: Option<PathBuf>,
    #[arg(long, default_value = "both")]
    pub fields: QueryFields,
    #[arg(long, default_value = "original")]
    pub variant: Variant,
    #[arg(long, default_value_t = 1000)]
    pub k: usize,
    #[arg(long, default_value_t = 0.9)]
    pub k1: f64,
    #[arg(long, default_value_t = 0.4)]
    pub b: f64,
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
    #[arg(long)]
    pub no_stem: bool,
    /// Apply Rocchio pseudo-relevance feedback.
    #[arg(long)]
    pub prf: bool,
    #[arg(long, default_value_t = 10)]
    pub prf_depth: usize,
    #[arg(long, default_value_t = 1.0)]
    pub prf_alpha: f64,
    #[arg(long, default_value_t = 0.75)]
    pub prf_beta: f64,
    #[arg(long, default_value_t = 0.0)]
    pub prf_gamma: f64,
    #[arg(long, default_value_t = 128)]
    pub prf_terms: usize,
    /// Run tag; defaults to the condition string, e.g. `qt-impact.machine.both.prf`.
    #[arg(long)]
    pub tag: Option<String>,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("action").required(true).args(["scores", "emit_candidates"]))]
pub struct RerankArgs {
    #[arg(long)]
    pub run: PathBuf,
    /// Score file (`topic_id doc_id score` per line).
    #[arg(long)]
    pub scores: Option<PathBuf>,
    /// Write `topic_id<TAB>doc_id<TAB>doc_text` for an external scorer instead of reranking.
    #[arg(long, requires = "corpus")]
    pub emit_candidates: Option<PathBuf>,
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long, default_value_t = rerank::DEFAULT_RERANK_DEPTH)]
    pub depth: usize,
    #[arg(long)]
    pub tag: Option<String>,
    #[arg(long, required_unless_present = "emit_candidates")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FusionOrder {
    /// Fuse, then rerank.
    Early,
    /// Rerank each run, then fuse.
    Late,
}

#[derive(Debug, Args)]
pub struct FuseArgs {
    #[arg(long = "run", required = true)]
    pub runs: Vec<PathBuf>,
    #[arg(long, default_value_t = 60.0)]
    pub k_rrf: f64,
    #[arg(long, default_value_t = 1000)]
    pub input_depth: usize,
    #[arg(long, default_value_t = 1000)]
    pub output_depth: usize,
    /// Rerank with these scores as part of the fusion pipeline.
    #[arg(long)]
    pub scores: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "early", requires = "scores")]
    pub order: FusionOrder,
    #[arg(long, default_value_t = rerank::DEFAULT_RERANK_DEPTH)]
    pub rerank_depth: usize,
    #[arg(long, default_value = "rrf")]
    pub tag: String,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GainArg {
    Linear,
    Exponential,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub run: PathBuf,
    #[arg(long)]
    pub qrels: PathBuf,
    #[arg(long, default_value_t = eval::DEFAULT_NDCG_CUTOFF)]
    pub ndcg_k: usize,
    #[arg(long, default_value_t = eval::DEFAULT_RECALL_CUTOFF)]
    pub recall_k: usize,
    #[arg(long, value_enum, default_value = "linear")]
    pub gain: GainArg,
    /// Re-sort by score (ties by descending doc id) before scoring, as trec_eval does.
    #[arg(long)]
    pub trec_eval_order: bool,
    /// Report file; stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricArg {
    Ndcg,
    Recall,
    Map,
}

#[derive(Debug, Args)]
pub struct SignificanceArgs {
    #[arg(long)]
    pub qrels: PathBuf,
    #[arg(long)]
    pub baseline: PathBuf,
    #[arg(long = "run", required = true)]
    pub runs: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "ndcg")]
    pub metric: MetricArg,
    /// Cutoff for nDCG or recall (defaults 20 and 1000).
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Usage(#[from] clap::Error),
    #[error(transparent)]
    Run(#[from] Error),
}

const SUBCOMMANDS: [&str; 6] = ["index", "search", "rerank", "fuse", "eval", "significance"];

/// Splice flags from `--config FILE` in right after the subcommand name so
/// explicit flags, which come later, override them.
fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let mut config: Option<PathBuf> = None;
    let mut sub_pos: Option<usize> = None;
    let mut i = 1;
    while i < args.len() {
        let a = args[i].to_string_lossy();
        if a == "--config" {
            config = args.get(i + 1).map(PathBuf::from);
            i += 1;
        } else if let Some(p) = a.strip_prefix("--config=") {
            config = Some(PathBuf::from(p));
        } else if sub_pos.is_none() && SUBCOMMANDS.contains(&a.as_ref()) {
            sub_pos = Some(i);
        }
        i += 1;
    }
    let (Some(path), Some(pos)) = (config, sub_pos) else { return Ok(args) };
    let extra = config_args(&path, &args[pos].to_string_lossy())?;
    let mut out = args[..=pos].to_vec();
    out.extend(extra);
    out.extend_from_slice(&args[pos + 1..]);
    Ok(out)
}

pub fn parse<I, T>(args: I) -> Result<Cli, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args = expand_config(args.into_iter().map(Into::into).collect())?;
    let command = Cli::command().mut_subcommands(|s| s.args_override_self(true));
    let matches = command.try_get_matches_from(args)?;
    Ok(Cli::from_arg_matches(&matches)?)
}

/// Parse and execute. Reports that have no output file go to `stdout`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let cli = parse(args)?;
    match cli.command {
        Command::Index(a) => cmd_index(&a),
        Command::Search(a) => cmd_search(&a),
        Command::Rerank(a) => cmd_rerank(&a),
        Command::Fuse(a) => cmd_fuse(&a),
        Command::Eval(a) => cmd_eval(&a, stdout),
        Command::Significance(a) => cmd_significance(&a, stdout),
    }?;
    Ok(())
}

fn analyzer(language: Language, stopwords: Option<&Path>, no_stem: bool) -> Result<AnalyzerConfig> {
    let mut cfg = AnalyzerConfig::for_language(language);
    if let Some(p) = stopwords {
        cfg = cfg.with_stopwords(load_stopwords(p)?);
    }
    if no_stem {
        cfg = cfg.with_stemmer(Stemmer::None)?;
    }
    Ok(cfg)
}

pub fn cmd_index(a: &IndexArgs) -> Result<()> {
    match a.kind {
        IndexKind::Text => {
            let cfg = analyzer(a.language, a.stopwords.as_deref(), a.no_stem)?;
            let docs = ingest::load_corpus(&a.input)?;
            let index = InvertedIndex::index_text(docs, &cfg)?;
            eprintln!("indexed {} documents, {} terms", index.num_docs(), index.num_terms());
            index.save(&a.output)
        }
        IndexKind::Impact => {
            let vectors = ingest::load_sparse_vectors(&a.input)?;
            let index = InvertedIndex::index_impact(vectors, a.scale)?;
            eprintln!("indexed {} documents, {} terms", index.num_docs(), index.num_terms());
            index.save(&a.output)
        }
        IndexKind::Dense => {
            let index = FlatIndex::build(ingest::load_dense_vectors(&a.input)?)?;
            eprintln!("indexed {} vectors of dimension {}", index.len(), index.dim());
            index.save(&a.output)
        }
    }
}

enum LoadedIndex {
    Sparse(InvertedIndex),
    Dense(FlatIndex),
}

fn load_index(path: &Path) -> Result<LoadedIndex> {
    match snapshot::peek_format(path)?.as_str() {
        InvertedIndex::FORMAT => Ok(LoadedIndex::Sparse(InvertedIndex::load(path)?)),
        FlatIndex::FORMAT => Ok(LoadedIndex::Dense(FlatIndex::load(path)?)),
        other => Err(Error::Snapshot(format!("{}: unknown snapshot format `{other}`", path.display()))),
    }
}

pub fn cmd_search(a: &SearchArgs) -> Result<()> {
    let prf = a.prf.then_some(RocchioParams {
        depth: a.prf_depth,
        alpha: a.prf_alpha,
        beta: a.prf_beta,
        gamma: a.prf_gamma,
        top_terms: a.prf_terms,
    });
    let cfg = PipelineConfig::new(a.mode, a.fields, a.variant, prf, a.k)?;
    let index = load_index(&a.index)?;

    let (engine, queries): (Engine<'_>, Vec<(String, Query)>) = match (&index, cfg.mode) {
        (LoadedIndex::Sparse(idx), Mode::DtBm25 | Mode::QtBm25) => {
            let lang: Language = idx.language().ok_or(Error::WrongMode("BM25 modes need a text index"))?.parse()?;
            if cfg.mode == Mode::DtBm25 && lang != Language::En {
                return Err(Error::InvalidArgument(format!("dt-bm25 expects an English index, found `{lang}`")));
            }
            let analyzer = analyzer(lang, a.stopwords.as_deref(), a.no_stem)?;
            let topics_path = a
                .topics
                .as_ref()
                .ok_or_else(|| Error::InvalidArgument("--topics is required for BM25 modes".into()))?;
            let queries = ingest::load_topics(topics_path)?
                .iter()
                .map(|t| {
                    let text = ingest::build_query_text(t, cfg.translation_variant, cfg.query_fields)?;
                    Ok((t.topic_id.clone(), Query::Sparse(SparseVector::from_tokens(&analyze(&text, &analyzer)))))
                })
                .collect::<Result<Vec<_>>>()?;
            (Engine::Bm25(idx, Bm25Params { k1: a.k1, b: a.b }), queries)
        }
        (LoadedIndex::Sparse(idx), Mode::DtImpact | Mode::QtImpact) => {
            let path = a
                .query_vectors
                .as_ref()
                .ok_or_else(|| Error::InvalidArgument("--query-vectors is required for impact modes".into()))?;
            let queries =
                ingest::load_sparse_vectors(path)?.into_iter().map(|(id, v)| (id, Query::Sparse(v))).collect();
            (Engine::Impact(idx), queries)
        }
        (LoadedIndex::Dense(idx), Mode::Dense) => {
            let path = a
                .query_vectors
                .as_ref()
                .ok_or_else(|| Error::InvalidArgument("--query-vectors is required for dense mode".into()))?;
            let queries = ingest::load_dense_vectors(path)?.into_iter().map(|(id, v)| (id, Query::Dense(v))).collect();
            (Engine::Dense(idx), queries)
        }
        _ => {
            return Err(Error::InvalidArgument(format!(
                "mode {} does not match the index at {}",
                cfg.mode,
                a.index.display()
            )))
        }
    };

    let lists = queries
        .par_iter()
        .map(|(topic, q)| {
            let hits = match &cfg.prf {
                Some(p) => prf_search(&engine, q, cfg.k, p)?,
                None => engine.search(q, cfg.k)?,
            };
            Ok(RankedList::new(topic.clone(), hits))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut run = Run::new(a.tag.clone().unwrap_or_else(|| cfg.tag()));
    for list in lists {
        run.insert_ranked(list)?;
    }
    eprintln!("{} topics, {} entries", run.num_topics(), run.num_entries());
    ingest::write_run(&run, &a.output)
}

pub fn cmd_rerank(a: &RerankArgs) -> Result<()> {
    let input = ingest::load_run(&a.run)?;
    if let Some(path) = &a.emit_candidates {
        let corpus_path = a.corpus.as_ref().expect("clap enforces --corpus");
        let texts: HashMap<String, String> =
            ingest::load_corpus(corpus_path)?.into_iter().map(|d| (d.doc_id.clone(), d.indexable_text())).collect();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let n = write_candidates(&input, |d| texts.get(d).cloned(), a.depth, BufWriter::new(file))?;
        eprintln!("wrote {n} candidate pairs");
        return Ok(());
    }
    let scores = a.scores.as_ref().expect("clap enforces --scores or --emit-candidates");
    let (oracle, duplicates) = rerank::load_score_oracle(scores)?;
    if duplicates > 0 {
        eprintln!("warning: {duplicates} duplicate score lines; later values kept");
    }
    let mut out = rerank(&input, &oracle, a.depth)?;
    out.tag = a.tag.clone().unwrap_or_else(|| format!("{}.rerank", input.tag));
    ingest::write_run(&out, a.output.as_ref().expect("clap enforces --output"))
}

pub fn cmd_fuse(a: &FuseArgs) -> Result<()> {
    let runs = a.runs.iter().map(ingest::load_run).collect::<Result<Vec<_>>>()?;
    let params = RrfParams { k_rrf: a.k_rrf, input_depth: a.input_depth, output_depth: a.output_depth };
    let mut fused = match &a.scores {
        None => rrf(&runs, &params)?,
        Some(path) => {
            let (oracle, _) = rerank::load_score_oracle(path)?;
            match a.order {
                FusionOrder::Early => early_fusion(&runs, &oracle, &params, a.rerank_depth)?,
                FusionOrder::Late => late_fusion(&runs, &oracle, &params, a.rerank_depth)?,
            }
        }
    };
    fused.tag = a.tag.clone();
    ingest::write_run(&fused, &a.output)
}

fn output_writer<'a>(path: Option<&Path>, stdout: &'a mut dyn Write) -> Result<Box<dyn Write + 'a>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| Error::io(p, e))?)),
        None => Box::new(stdout),
    })
}

fn load_for_eval(path: &Path, trec_eval_order: bool) -> Result<Run> {
    let run = ingest::load_run(path)?;
    Ok(if trec_eval_order { eval::trec_eval_order(&run) } else { run })
}

pub fn cmd_eval(a: &EvalArgs, stdout: &mut dyn Write) -> Result<()> {
    let run = load_for_eval(&a.run, a.trec_eval_order)?;
    let qrels = ingest::load_qrels(&a.qrels)?;
    let gain = match a.gain {
        GainArg::Linear => Gain::Linear,
        GainArg::Exponential => Gain::Exponential,
    };
    let report = eval::format_report(&eval::evaluate(&run, &qrels, a.ndcg_k, a.recall_k, gain));
    let mut w = output_writer(a.output.as_deref(), stdout)?;
    w.write_all(report.as_bytes()).and_then(|_| w.flush()).map_err(|e| Error::io("<report>", e))
}

pub fn cmd_significance(a: &SignificanceArgs, stdout: &mut dyn Write) -> Result<()> {
    let qrels = ingest::load_qrels(&a.qrels)?;
    let score = |run: &Run| -> (String, PerTopic) {
        match a.metric {
            MetricArg::Ndcg => {
                let k = a.k.unwrap_or(eval::DEFAULT_NDCG_CUTOFF);
                (format!("ndcg_cut_{k}"), eval::ndcg_at_k(run, &qrels, k))
            }
            MetricArg::Recall => {
                let k = a.k.unwrap_or(eval::DEFAULT_RECALL_CUTOFF);
                (format!("recall_{k}"), eval::recall_at_k(run, &qrels, k))
            }
            MetricArg::Map => ("map".to_string(), eval::average_precision(run, &qrels)),
        }
    };
    let name = |run: &Run, path: &Path| if run.tag.is_empty() { path.display().to_string() } else { run.tag.clone() };

    let base_run = ingest::load_run(&a.baseline)?;
    let (metric, base_scores) = score(&base_run);
    let systems = a
        .runs
        .iter()
        .map(|p| {
            let r = ingest::load_run(p)?;
            Ok((name(&r, p), score(&r).1))
        })
        .collect::<Result<Vec<_>>>()?;
    let rows = eval::compare_systems(&metric, (&name(&base_run, &a.baseline), &base_scores), &systems)?;
    let w = output_writer(a.output.as_deref(), stdout)?;
    eval::write_comparisons(&rows, a.alpha, w).map_err(|e| Error::io("<report>", e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn explicit_flags_override_config() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.toml");
        std::fs::write(&cfg, "version = 1\n[eval]\nndcg-k = 5\nrun = \"r\"\nqrels = \"q\"\n").unwrap();
        let cli = parse(["clir", "--config", cfg.to_str().unwrap(), "eval", "--ndcg-k", "7"]).unwrap();
        let Command::Eval(a) = cli.command else { panic!("expected eval") };
        assert_eq!(a.ndcg_k, 7);
        assert_eq!(a.run, PathBuf::from("r"));
    }

    #[test]
    fn rerank_requires_an_action() {
        assert!(parse(["clir", "rerank", "--run", "x", "--output", "y"]).is_err());
        assert!(parse(["clir", "rerank", "--run", "x", "--emit-candidates", "c"]).is_err());
        assert!(parse(["clir", "rerank", "--run", "x", "--emit-candidates", "c", "--corpus", "d"]).is_ok());
    }
}
