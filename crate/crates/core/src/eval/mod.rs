//! TREC-style effectiveness metrics.
//!
//! Every topic that has judgments is scored; a judged topic missing from the
//! run scores 0. Unjudged documents count as non-relevant, and a document is
//! relevant for recall and AP when its grade is above zero.

mod stats;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;

use crate::ingest::{Qrels, Run, RunEntry};
use crate::{Error, Result};

pub use stats::{bonferroni, paired_t_test, TTest};

pub type PerTopic = BTreeMap<String, f64>;

pub const DEFAULT_NDCG_CUTOFF: usize = 20;
pub const DEFAULT_RECALL_CUTOFF: usize = 1000;

/// How a relevance grade turns into gain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Gain {
    /// The grade itself (trec_eval).
    #[default]
    Linear,
    /// `2^grade - 1`.
    Exponential,
}

impl Gain {
    fn apply(self, grade: u32) -> f64 {
        match self {
            Gain::Linear => f64::from(grade),
            Gain::Exponential => 2f64.powi(grade as i32) - 1.0,
        }
    }
}

fn per_topic(
    run: &Run,
    qrels: &Qrels,
    f: impl Fn(&[RunEntry], &std::collections::HashMap<String, u32>) -> f64,
) -> PerTopic {
    qrels
        .topics()
        .map(|t| {
            let judged = qrels.topic(t).expect("listed topic");
            (t.to_string(), f(run.topic(t).unwrap_or_default(), judged))
        })
        .collect()
}

pub fn ndcg_at_k(run: &Run, qrels: &Qrels, k: usize) -> PerTopic {
    ndcg_at_k_with(run, qrels, k, Gain::Linear)
}

pub fn ndcg_at_k_with(run: &Run, qrels: &Qrels, k: usize, gain: Gain) -> PerTopic {
    per_topic(run, qrels, |entries, judged| {
        let dcg: f64 = entries
            .iter()
            .take(k)
            .enumerate()
            .map(|(i, e)| gain.apply(judged.get(&e.doc_id).copied().unwrap_or(0)) / ((i + 2) as f64).log2())
            .sum();
        let mut grades: Vec<u32> = judged.values().copied().filter(|&g| g > 0).collect();
        grades.sort_unstable_by(|a, b| b.cmp(a));
        let idcg: f64 = grades.iter().take(k).enumerate().map(|(i, &g)| gain.apply(g) / ((i + 2) as f64).log2()).sum();
        if idcg > 0.0 {
            dcg / idcg
        } else {
            0.0
        }
    })
}

pub fn recall_at_k(run: &Run, qrels: &Qrels, k: usize) -> PerTopic {
    per_topic(run, qrels, |entries, judged| {
        let relevant = judged.values().filter(|&&g| g > 0).count();
        if relevant == 0 {
            return 0.0;
        }
        let found = entries.iter().take(k).filter(|e| judged.get(&e.doc_id).is_some_and(|&g| g > 0)).count();
        found as f64 / relevant as f64
    })
}

/// Average precision over the full run depth.
pub fn average_precision(run: &Run, qrels: &Qrels) -> PerTopic {
    per_topic(run, qrels, |entries, judged| {
        let relevant = judged.values().filter(|&&g| g > 0).count();
        if relevant == 0 {
            return 0.0;
        }
        let mut hits = 0usize;
        let mut sum = 0.0;
        for (i, e) in entries.iter().enumerate() {
            if judged.get(&e.doc_id).is_some_and(|&g| g > 0) {
                hits += 1;
                sum += hits as f64 / (i + 1) as f64;
            }
        }
        sum / relevant as f64
    })
}

pub fn mean(scores: &PerTopic) -> f64 {
    if scores.is_empty() {
        0.0
    } else {
        scores.values().sum::<f64>() / scores.len() as f64
    }
}

/// Re-sort every topic by descending score, breaking ties by descending doc
/// id, the order trec_eval evaluates in regardless of file ranks.
pub fn trec_eval_order(run: &Run) -> Run {
    let mut out = Run::new(run.tag.clone());
    for (topic, entries) in run.topics() {
        let mut e = entries.to_vec();
        e.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| b.doc_id.cmp(&a.doc_id)));
        out.insert_topic(topic, e).expect("sorted entries satisfy run invariants");
    }
    out
}

/// A named per-topic metric.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricScores {
    pub name: String,
    pub per_topic: PerTopic,
}

impl MetricScores {
    pub fn mean(&self) -> f64 {
        mean(&self.per_topic)
    }
}

/// nDCG@`ndcg_k`, Recall@`recall_k` and AP for every judged topic.
pub fn evaluate(run: &Run, qrels: &Qrels, ndcg_k: usize, recall_k: usize, gain: Gain) -> Vec<MetricScores> {
    vec![
        MetricScores { name: format!("ndcg_cut_{ndcg_k}"), per_topic: ndcg_at_k_with(run, qrels, ndcg_k, gain) },
        MetricScores { name: format!("recall_{recall_k}"), per_topic: recall_at_k(run, qrels, recall_k) },
        MetricScores { name: "map".to_string(), per_topic: average_precision(run, qrels) },
    ]
}

/// `metric<TAB>topic<TAB>value` rows followed by an `all` row per metric.
pub fn format_report(metrics: &[MetricScores]) -> String {
    let mut s = String::new();
    for m in metrics {
        for (topic, v) in &m.per_topic {
            let _ = writeln!(s, "{}\t{topic}\t{v:.4}", m.name);
        }
        let _ = writeln!(s, "{}\tall\t{:.4}", m.name, m.mean());
    }
    s
}

/// One pairwise comparison in a significance report.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub metric: String,
    pub baseline: String,
    pub system: String,
    pub test: TTest,
    pub mean_baseline: f64,
    pub mean_system: f64,
    pub p_adjusted: f64,
}

/// Compare every system against the baseline with paired t-tests, adjusting
/// p-values for the number of comparisons.
pub fn compare_systems(
    metric: &str,
    baseline: (&str, &PerTopic),
    systems: &[(String, PerTopic)],
) -> Result<Vec<Comparison>> {
    if systems.is_empty() {
        return Err(Error::InvalidArgument("nothing to compare against the baseline".into()));
    }
    let tests = systems.iter().map(|(_, s)| paired_t_test(s, baseline.1)).collect::<Result<Vec<_>>>()?;
    let adjusted = bonferroni(&tests.iter().map(|t| t.p).collect::<Vec<_>>(), tests.len());
    Ok(systems
        .iter()
        .zip(tests)
        .zip(adjusted)
        .map(|(((name, scores), test), p_adjusted)| Comparison {
            metric: metric.to_string(),
            baseline: baseline.0.to_string(),
            system: name.clone(),
            test,
            mean_baseline: mean(baseline.1),
            mean_system: mean(scores),
            p_adjusted,
        })
        .collect())
}

pub fn write_comparisons<W: Write>(rows: &[Comparison], alpha: f64, mut w: W) -> std::io::Result<()> {
    writeln!(w, "metric\tbaseline\tsystem\tn\tmean_baseline\tmean_system\tt\tp\tp_bonferroni\tsignificant")?;
    for c in rows {
        writeln!(
            w,
            "{}\t{}\t{}\t{}\t{:.4}\t{:.4}\t{:.4}\t{:.6}\t{:.6}\t{}",
            c.metric,
            c.baseline,
            c.system,
            c.test.n,
            c.mean_baseline,
            c.mean_system,
            c.test.t,
            c.test.p,
            c.p_adjusted,
            if c.p_adjusted <= alpha { "yes" } else { "no" }
        )?;
    }
    w.flush()
}
