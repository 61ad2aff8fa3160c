//! Text analysis: per-language tokenization, normalization, stopping and stemming.
//!
//! | language | pipeline |
//! |----------|----------|
//! | `en` | lowercase, split on non-alphanumerics, stopwords, Porter stemmer |
//! | `fa` | Arabic/Persian letter folding and diacritic removal, split, stopwords |
//! | `ru` | lowercase, split, light suffix stemmer, stopwords |
//! | `zh` | drop whitespace and punctuation, character unigrams then adjacent bigrams |

mod porter;
mod russian;

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::{Error, Result};

pub use porter::stem as porter_stem;
pub use russian::stem as russian_light_stem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Language {
    En,
    Fa,
    Ru,
    Zh,
}

impl Language {
    pub fn as_str(self) -> &'static str {
        match self {
            Language::En => "en",
            Language::Fa => "fa",
            Language::Ru => "ru",
            Language::Zh => "zh",
        }
    }

    /// Bundled stopword list.
    pub fn default_stopwords(self) -> HashSet<String> {
        let raw = match self {
            Language::En => include_str!("../../data/stopwords/en.txt"),
            Language::Fa => include_str!("../../data/stopwords/fa.txt"),
            Language::Ru => include_str!("../../data/stopwords/ru.txt"),
            Language::Zh => include_str!("../../data/stopwords/zh.txt"),
        };
        parse_stopwords(raw)
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Language {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "en" => Ok(Language::En),
            "fa" => Ok(Language::Fa),
            "ru" => Ok(Language::Ru),
            "zh" => Ok(Language::Zh),
            other => Err(Error::InvalidArgument(format!("unsupported language `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stemmer {
    None,
    EnglishPorter,
    RussianLight,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalyzerConfig {
    language: Language,
    lowercase: bool,
    stopwords: HashSet<String>,
    stemmer: Stemmer,
    fa_normalization: bool,
}

impl AnalyzerConfig {
    pub fn new(
        language: Language,
        lowercase: bool,
        stopwords: HashSet<String>,
        stemmer: Stemmer,
        fa_normalization: bool,
    ) -> Result<Self> {
        if language == Language::Zh && stemmer != Stemmer::None {
            return Err(Error::InvalidArgument("the zh analyzer does not stem".into()));
        }
        Ok(Self { language, lowercase, stopwords, stemmer, fa_normalization })
    }

    /// Standard configuration with the bundled stopword list.
    pub fn for_language(language: Language) -> Self {
        let stemmer = match language {
            Language::En => Stemmer::EnglishPorter,
            Language::Ru => Stemmer::RussianLight,
            Language::Fa | Language::Zh => Stemmer::None,
        };
        Self {
            language,
            lowercase: true,
            stopwords: language.default_stopwords(),
            stemmer,
            fa_normalization: language == Language::Fa,
        }
    }

    pub fn language(&self) -> Language {
        self.language
    }

    pub fn stemmer(&self) -> Stemmer {
        self.stemmer
    }

    pub fn with_stopwords(mut self, stopwords: HashSet<String>) -> Self {
        self.stopwords = stopwords;
        self
    }

    pub fn with_stemmer(mut self, stemmer: Stemmer) -> Result<Self> {
        if self.language == Language::Zh && stemmer != Stemmer::None {
            return Err(Error::InvalidArgument("the zh analyzer does not stem".into()));
        }
        self.stemmer = stemmer;
        Ok(self)
    }

    pub fn with_lowercase(mut self, lowercase: bool) -> Self {
        self.lowercase = lowercase;
        self
    }
}

fn parse_stopwords(raw: &str) -> HashSet<String> {
    raw.lines().map(str::trim).filter(|l| !l.is_empty()).map(str::to_string).collect()
}

/// Read a stopword file: one UTF-8 token per line.
pub fn load_stopwords(path: impl AsRef<Path>) -> Result<HashSet<String>> {
    let path = path.as_ref();
    let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_stopwords(&raw))
}

pub fn analyze(text: &str, config: &AnalyzerConfig) -> Vec<String> {
    let normalized = if config.fa_normalization { normalize_persian(text) } else { text.to_string() };
    let cased = if config.lowercase { normalized.to_lowercase() } else { normalized };

    if config.language == Language::Zh {
        return cjk_grams(&cased).into_iter().filter(|t| !config.stopwords.contains(t)).collect();
    }

    let tokens = cased.split(|c: char| !c.is_alphanumeric()).filter(|t| !t.is_empty());
    let stem = |t: &str| match config.stemmer {
        Stemmer::None => t.to_string(),
        Stemmer::EnglishPorter => porter::stem(t),
        Stemmer::RussianLight => russian::stem(t),
    };
    let out: Vec<String> = if config.language == Language::Ru {
        tokens.map(stem).filter(|t| !config.stopwords.contains(t)).collect()
    } else {
        tokens.filter(|t| !config.stopwords.contains(*t)).map(stem).collect()
    };
    out.into_iter().filter(|t| !t.is_empty()).collect()
}

/// Fold Arabic letter forms onto their Persian counterparts and drop
/// diacritics and tatweel. ZWNJ becomes a token boundary.
pub fn normalize_persian(text: &str) -> String {
    text.chars()
        .filter_map(|c| match c {
            '\u{064A}' | '\u{0649}' => Some('\u{06CC}'),
            '\u{0643}' => Some('\u{06A9}'),
            '\u{0629}' | '\u{06C0}' | '\u{06C1}' => Some('\u{0647}'),
            '\u{0623}' | '\u{0625}' | '\u{0622}' => Some('\u{0627}'),
            '\u{064B}'..='\u{065F}' | '\u{0670}' | '\u{0640}' => None,
            '\u{200C}' => Some(' '),
            other => Some(other),
        })
        .collect()
}

/// All character unigrams in order, then all adjacent bigrams. Bigrams do
/// not span whitespace or punctuation.
fn cjk_grams(text: &str) -> Vec<String> {
    let runs: Vec<Vec<char>> =
        text.split(|c: char| !c.is_alphanumeric()).filter(|r| !r.is_empty()).map(|r| r.chars().collect()).collect();
    let mut out: Vec<String> = runs.iter().flatten().map(|c| c.to_string()).collect();
    for run in &runs {
        out.extend(run.windows(2).map(|w| w.iter().collect::<String>()));
    }
    out
}
