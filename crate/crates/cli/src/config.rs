//! Configuration resolution: defaults, then the optional TOML config file,
//! then command-line flags, each layer overriding the previous one.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use chrono::{DateTime, Utc};
use serde::Deserialize;

use keyness::analysis::Metric;
use keyness::corpus::{ActionKind, CategoryId, CategorySet};
use keyness::metrics::DirectionFilter;
use keyness::tokenize::TokenClass;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FormatChoice {
    Tsv,
    Jsonl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricChoice {
    Count,
    Tfidf,
    ExpectedDif,
    All,
}

impl MetricChoice {
    pub fn metrics(self) -> Vec<Metric> {
        match self {
            MetricChoice::Count => vec![Metric::Count],
            MetricChoice::Tfidf => vec![Metric::TfIdf],
            MetricChoice::ExpectedDif => vec![Metric::ExpectedDif],
            MetricChoice::All => Metric::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ActionChoice {
    Rt,
    Like,
    Both,
}

impl ActionChoice {
    pub fn actions(self) -> Vec<ActionKind> {
        match self {
            ActionChoice::Rt => vec![ActionKind::Rt],
            ActionChoice::Like => vec![ActionKind::Like],
            ActionChoice::Both => ActionKind::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DirectionChoice {
    Over,
    All,
}

impl From<DirectionChoice> for DirectionFilter {
    fn from(c: DirectionChoice) -> Self {
        match c {
            DirectionChoice::Over => DirectionFilter::OverOnly,
            DirectionChoice::All => DirectionFilter::All,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightingChoice {
    /// Each article's title counts once (the default analysis unit).
    PerArticle,
    /// Each article's title counts once per referencing tweet.
    PerTweet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TokenizerChoice {
    Whitespace,
    Dictionary,
    External,
}

/// The TOML config file. Every field is optional; flags override.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub articles: Option<PathBuf>,
    pub tweets: Option<PathBuf>,
    pub snapshot: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub format: Option<FormatChoice>,
    pub min_rt: Option<u64>,
    pub min_like: Option<u64>,
    pub exclude_categories: Option<Vec<String>>,
    pub date_start: Option<String>,
    pub date_end: Option<String>,
    /// Category universe; articles outside it are rejected.
    pub categories: Option<Vec<String>>,
    /// Categories to analyze; default is every category present.
    pub requested_categories: Option<Vec<String>>,
    pub metric: Option<MetricChoice>,
    pub action: Option<ActionChoice>,
    pub top_k: Option<usize>,
    pub dice_k: Option<usize>,
    pub min_word_total: Option<u64>,
    pub direction: Option<DirectionChoice>,
    pub weighting: Option<WeightingChoice>,
    pub tokenizer: Option<TokenizerChoice>,
    pub dictionary: Option<PathBuf>,
    pub pretokenized: Option<PathBuf>,
    pub stopwords: Option<PathBuf>,
    /// Class names, or the single entry "none" for no dropping.
    pub drop_classes: Option<Vec<String>>,
    pub bucket_days: Option<i64>,
    pub origin: Option<String>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("invalid config file {}", path.display()))
    }
}

/// Flag value if present, else config-file value, else the default.
pub fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

/// Flag value if present, else config-file value.
pub fn pick_opt<T>(flag: Option<T>, file: Option<T>) -> Option<T> {
    flag.or(file)
}

pub fn require<T>(value: Option<T>, what: &str) -> Result<T> {
    value.with_context(|| format!("missing required setting: {what} (flag or config file)"))
}

pub fn parse_timestamp(raw: &str, what: &str) -> Result<DateTime<Utc>> {
    DateTime::parse_from_rfc3339(raw)
        .map(|t| t.with_timezone(&Utc))
        .with_context(|| format!("{what}: {raw:?} is not an RFC 3339 timestamp"))
}

/// Resolve the category universe. An empty list is invalid.
pub fn resolve_universe(flag: Option<Vec<String>>, file: Option<Vec<String>>) -> Result<CategorySet> {
    match pick_opt(flag, file) {
        None => Ok(CategorySet::default_news()),
        Some(names) => {
            if names.is_empty() {
                bail!("category universe must not be empty");
            }
            Ok(CategorySet::new(names))
        }
    }
}

/// Resolve drop classes. The single entry "none" clears the set; the default
/// drops symbols and unknown single-character emissions.
pub fn resolve_drop_classes(
    flag: &[String],
    file: Option<&[String]>,
) -> Result<BTreeSet<TokenClass>> {
    let names: &[String] = if !flag.is_empty() {
        flag
    } else if let Some(file_names) = file {
        file_names
    } else {
        return Ok([TokenClass::Symbol, TokenClass::Unknown].into_iter().collect());
    };
    if names.len() == 1 && names[0].eq_ignore_ascii_case("none") {
        return Ok(BTreeSet::new());
    }
    names
        .iter()
        .map(|name| {
            TokenClass::parse(name).with_context(|| {
                format!("unknown token class {name:?} (symbol, numeral, unknown, stopword, none)")
            })
        })
        .collect()
}

/// Validate requested categories against the universe, keeping input order
/// but dropping duplicates.
pub fn resolve_requested(
    flag: &[String],
    file: Option<&[String]>,
    universe: &CategorySet,
) -> Result<Vec<CategoryId>> {
    let names: &[String] = if !flag.is_empty() {
        flag
    } else if let Some(file_names) = file {
        file_names
    } else {
        return Ok(Vec::new());
    };
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for name in names {
        let category = CategoryId::new(name.clone());
        if !universe.contains(&category) {
            bail!("unknown category {name:?}: not in the configured category set");
        }
        if seen.insert(category.clone()) {
            out.push(category);
        }
    }
    Ok(out)
}
