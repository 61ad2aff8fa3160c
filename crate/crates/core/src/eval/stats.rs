use statrs::distribution::{ContinuousCDF, StudentsT};

use super::PerTopic;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TTest {
    /// Paired t statistic of `a - b`.
    pub t: f64,
    /// Two-sided p-value.
    pub p: f64,
    pub n: usize,
}

/// Two-sided paired t-test over per-topic scores with `n - 1` degrees of
/// freedom. Identical inputs give `t = 0, p = 1`.
pub fn paired_t_test(a: &PerTopic, b: &PerTopic) -> Result<TTest> {
    if a.len() != b.len() || a.keys().zip(b.keys()).any(|(x, y)| x != y) {
        let only_a = a.keys().filter(|k| !b.contains_key(*k)).count();
        let only_b = b.keys().filter(|k| !a.contains_key(*k)).count();
        return Err(Error::TopicMismatch(format!(
            "{only_a} topics only in the first set, {only_b} only in the second"
        )));
    }
    let n = a.len();
    if n < 2 {
        return Err(Error::InvalidArgument(format!("paired t-test needs at least 2 topics, got {n}")));
    }
    let diffs: Vec<f64> = a.values().zip(b.values()).map(|(x, y)| x - y).collect();
    let nf = n as f64;
    let mean = diffs.iter().sum::<f64>() / nf;
    let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    if var == 0.0 {
        return Ok(if mean == 0.0 {
            TTest { t: 0.0, p: 1.0, n }
        } else {
            TTest { t: f64::INFINITY.copysign(mean), p: 0.0, n }
        });
    }
    let t = mean / (var.sqrt() / nf.sqrt());
    let dist = StudentsT::new(0.0, 1.0, nf - 1.0).expect("degrees of freedom are positive");
    let p = (2.0 * dist.sf(t.abs())).min(1.0);
    Ok(TTest { t, p, n })
}

/// `min(1, m * p)` for each p-value.
pub fn bonferroni(p_values: &[f64], m: usize) -> Vec<f64> {
    p_values.iter().map(|p| (m as f64 * p).min(1.0)).collect()
}
