use std::fmt;
use std::str::FromStr;

use crate::ingest::{QueryFields, Variant};
use crate::prf::RocchioParams;
use crate::{Error, Result};

/// First-stage retrieval condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// BM25 over the translated (English) corpus.
    DtBm25,
    /// Learned sparse weights over the translated corpus.
    DtImpact,
    /// BM25 over the native corpus with translated queries.
    QtBm25,
    /// Learned sparse weights over the native corpus with translated queries.
    QtImpact,
    /// Language-independent dense retrieval.
    Dense,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::DtBm25 => "dt-bm25",
            Mode::DtImpact => "dt-impact",
            Mode::QtBm25 => "qt-bm25",
            Mode::QtImpact => "qt-impact",
            Mode::Dense => "dense",
        }
    }

    pub fn is_bm25(self) -> bool {
        matches!(self, Mode::DtBm25 | Mode::QtBm25)
    }

    /// Query variants this condition is defined for.
    pub fn allowed_variants(self) -> &'static [Variant] {
        match self {
            Mode::DtBm25 | Mode::DtImpact => &[Variant::Original],
            Mode::QtBm25 | Mode::QtImpact => &[Variant::Human, Variant::Machine],
            Mode::Dense => &Variant::ALL,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "dt-bm25" => Mode::DtBm25,
            "dt-impact" => Mode::DtImpact,
            "qt-bm25" => Mode::QtBm25,
            "qt-impact" => Mode::QtImpact,
            "dense" => Mode::Dense,
            other => return Err(Error::InvalidArgument(format!("unknown mode `{other}`"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub mode: Mode,
    pub query_fields: QueryFields,
    pub translation_variant: Variant,
    pub prf: Option<RocchioParams>,
    pub k: usize,
}

impl PipelineConfig {
    pub fn new(
        mode: Mode,
        query_fields: QueryFields,
        translation_variant: Variant,
        prf: Option<RocchioParams>,
        k: usize,
    ) -> Result<Self> {
        if !mode.allowed_variants().contains(&translation_variant) {
            let allowed: Vec<&str> = mode.allowed_variants().iter().map(|v| v.as_str()).collect();
            return Err(Error::InvalidArgument(format!(
                "mode {mode} takes variant {}, not `{translation_variant}`",
                allowed.join(" or ")
            )));
        }
        if k == 0 {
            return Err(Error::InvalidArgument("k must be at least 1".into()));
        }
        if let Some(p) = &prf {
            p.validate()?;
        }
        Ok(Self { mode, query_fields, translation_variant, prf, k })
    }

    /// Canonical run tag, e.g. `qt-impact.machine.both.prf`.
    pub fn tag(&self) -> String {
        let mut tag = format!("{}.{}.{}", self.mode, self.translation_variant, self.query_fields.as_str());
        if self.prf.is_some() {
            tag.push_str(".prf");
        }
        tag
    }
}
