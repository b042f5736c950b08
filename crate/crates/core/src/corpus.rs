//! Domain types shared by the whole pipeline.
//!
//! The corpus model is built around four records: a news [`Article`], a
//! [`TweetRecord`] carrying final engagement snapshots, the [`ReferencePair`]
//! joining the two by URL, and the per-article [`ArticleEngagement`] rollup
//! that decides retweet/Like dominance. Word-level analysis runs over
//! [`BagOfWords`] multisets summed into a word-by-category
//! [`ContingencyTable`] per action.
//!
//! All types are immutable value types after construction and safe to share
//! across threads.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

/// RFC 3339 timestamps at seconds precision, always UTC (`Z` suffix).
/// Sub-second components are truncated on read so that a parse/serialize
/// round trip is byte-stable.
pub mod ts_rfc3339 {
    use chrono::{DateTime, SecondsFormat, SubsecRound, Utc};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(dt: &DateTime<Utc>, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&dt.to_rfc3339_opts(SecondsFormat::Secs, true))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DateTime<Utc>, D::Error> {
        let raw = String::deserialize(d)?;
        let parsed = DateTime::parse_from_rfc3339(&raw).map_err(serde::de::Error::custom)?;
        Ok(parsed.with_timezone(&Utc).trunc_subsecs(0))
    }
}

macro_rules! string_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn new(s: impl Into<String>) -> Self {
                Self(s.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_owned())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                Self(s)
            }
        }
    };
}

string_id!(
    /// Opaque unique identifier of a news article.
    ArticleId
);
string_id!(
    /// Opaque unique identifier of a tweet.
    TweetId
);
string_id!(
    /// Name of a news category. The category universe is configuration, not a
    /// hard-coded enum; see [`CategorySet`].
    CategoryId
);

/// The default category universe shipped with the CLI.
pub const DEFAULT_CATEGORIES: &[&str] = &[
    "economy",
    "entertainment",
    "etc.",
    "IT",
    "local",
    "society",
    "politics",
    "science",
    "sports",
    "world",
    "obituaries",
    "CN-KR",
];

/// The configured set of valid categories. Every [`Article`] must belong to
/// exactly one member of this set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategorySet(BTreeSet<CategoryId>);

impl CategorySet {
    pub fn new<I, T>(categories: I) -> Self
    where
        I: IntoIterator<Item = T>,
        T: Into<CategoryId>,
    {
        Self(categories.into_iter().map(Into::into).collect())
    }

    /// The twelve-category news taxonomy used as the default configuration.
    pub fn default_news() -> Self {
        Self::new(DEFAULT_CATEGORIES.iter().copied())
    }

    pub fn contains(&self, category: &CategoryId) -> bool {
        self.0.contains(category)
    }

    pub fn iter(&self) -> impl Iterator<Item = &CategoryId> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// The two engagement actions under comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionKind {
    Rt,
    Like,
}

impl ActionKind {
    pub const ALL: [ActionKind; 2] = [ActionKind::Rt, ActionKind::Like];

    /// Lowercase token used in file names and CLI flags.
    pub fn slug(&self) -> &'static str {
        match self {
            ActionKind::Rt => "rt",
            ActionKind::Like => "like",
        }
    }
}

impl fmt::Display for ActionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ActionKind::Rt => f.write_str("RT"),
            ActionKind::Like => f.write_str("Like"),
        }
    }
}

/// Which side of the engagement split an article falls on.
///
/// Tie articles are retained in storage and excluded at query time, so the
/// partition stays auditable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dominance {
    RtDominant,
    LikeDominant,
    Tie,
}

/// Classify an article's summed engagement counts.
///
/// Strictly more retweets than Likes is RT-dominant, strictly fewer is
/// Like-dominant, equality is a tie. Total over all inputs.
pub fn classify_dominance(n_rt: u64, n_like: u64) -> Dominance {
    match n_rt.cmp(&n_like) {
        std::cmp::Ordering::Greater => Dominance::RtDominant,
        std::cmp::Ordering::Less => Dominance::LikeDominant,
        std::cmp::Ordering::Equal => Dominance::Tie,
    }
}

/// A news article.
///
/// Invariants (enforced at ingest): `url` is non-empty and normalized, `title`
/// is non-empty after NFC normalization, and `category` is a member of the
/// configured [`CategorySet`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Article {
    pub id: ArticleId,
    pub url: String,
    pub title: String,
    pub category: CategoryId,
    #[serde(with = "ts_rfc3339")]
    pub published_at: DateTime<Utc>,
}

/// A tweet with its final engagement snapshot.
///
/// `rt_count` and `like_count` are the values observed at the last retweet
/// within the dataset period; the type stores final snapshots only, never
/// deltas. `urls` holds normalized URL strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TweetRecord {
    pub id: TweetId,
    #[serde(with = "ts_rfc3339")]
    pub created_at: DateTime<Utc>,
    pub rt_count: u64,
    pub like_count: u64,
    pub urls: Vec<String>,
}

/// One (tweet, article) association after URL matching.
///
/// A tweet referring to `k` articles yields `k` pairs; duplicate
/// (tweet, article) input records collapse to a single pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferencePair {
    pub tweet_id: TweetId,
    pub article_id: ArticleId,
    pub rt_count: u64,
    pub like_count: u64,
    #[serde(with = "ts_rfc3339")]
    pub created_at: DateTime<Utc>,
    pub category: CategoryId,
}

/// Per-article engagement rollup: sums over the article's reference pairs
/// plus the resulting dominance side.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArticleEngagement {
    pub article_id: ArticleId,
    pub category: CategoryId,
    pub n_rt: u64,
    pub n_like: u64,
    pub dominance: Dominance,
}

impl ArticleEngagement {
    pub fn from_sums(article_id: ArticleId, category: CategoryId, n_rt: u64, n_like: u64) -> Self {
        Self {
            article_id,
            category,
            n_rt,
            n_like,
            dominance: classify_dominance(n_rt, n_like),
        }
    }
}

/// A word multiset. `BTreeMap` keeps iteration deterministic.
pub type TokenMultiset = BTreeMap<String, u64>;

/// The filtered title tokens of one article, with multiplicities.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BagOfWords {
    pub article_id: ArticleId,
    pub tokens: TokenMultiset,
}

impl BagOfWords {
    pub fn new(article_id: ArticleId, tokens: TokenMultiset) -> Self {
        Self { article_id, tokens }
    }

    pub fn from_tokens<I>(article_id: ArticleId, tokens: I) -> Self
    where
        I: IntoIterator<Item = String>,
    {
        let mut multiset = TokenMultiset::new();
        for token in tokens {
            *multiset.entry(token).or_insert(0) += 1;
        }
        Self::new(article_id, multiset)
    }

    /// Total token occurrences, with multiplicity.
    pub fn total_tokens(&self) -> u64 {
        self.tokens.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Word-by-category occurrence counts for one action, with cached marginals.
///
/// Rows are categories, columns are words; `count(c, w)` is the number of
/// occurrences of word `w` across the titles of the category's articles on
/// this action side. Row, column, and grand totals are computed once at
/// construction and cross-checked by [`ContingencyTable::totals_consistent`].
#[derive(Debug, Clone, PartialEq)]
pub struct ContingencyTable {
    action: ActionKind,
    categories: Vec<CategoryId>,
    words: Vec<String>,
    counts: Vec<u64>,
    row_totals: Vec<u64>,
    col_totals: Vec<u64>,
    grand_total: u64,
    category_index: HashMap<CategoryId, usize>,
    word_index: HashMap<String, usize>,
}

impl ContingencyTable {
    /// Build a table from per-category word counts.
    ///
    /// Rows are the map's categories in sorted order; columns are all words
    /// whose summed count across categories is at least `min_word_total`,
    /// in lexicographic order.
    pub fn build(
        action: ActionKind,
        rows: &BTreeMap<CategoryId, TokenMultiset>,
        min_word_total: u64,
    ) -> Self {
        let mut word_totals: BTreeMap<&str, u64> = BTreeMap::new();
        for counts in rows.values() {
            for (word, &n) in counts {
                *word_totals.entry(word.as_str()).or_insert(0) += n;
            }
        }

        let words: Vec<String> = word_totals
            .iter()
            .filter(|(_, &total)| total >= min_word_total)
            .map(|(word, _)| (*word).to_owned())
            .collect();
        let categories: Vec<CategoryId> = rows.keys().cloned().collect();

        let word_index: HashMap<String, usize> = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();
        let category_index: HashMap<CategoryId, usize> = categories
            .iter()
            .enumerate()
            .map(|(i, c)| (c.clone(), i))
            .collect();

        let n_cols = words.len();
        let mut counts = vec![0u64; categories.len() * n_cols];
        for (row, category) in categories.iter().enumerate() {
            for (word, &n) in &rows[category] {
                if let Some(&col) = word_index.get(word.as_str()) {
                    counts[row * n_cols + col] = n;
                }
            }
        }

        let mut row_totals = vec![0u64; categories.len()];
        for (row, total) in row_totals.iter_mut().enumerate() {
            *total = counts[row * n_cols..(row + 1) * n_cols].iter().sum();
        }
        let mut col_totals = vec![0u64; n_cols];
        for row in 0..categories.len() {
            for col in 0..n_cols {
                col_totals[col] += counts[row * n_cols + col];
            }
        }
        let grand_total = row_totals.iter().sum();

        Self {
            action,
            categories,
            words,
            counts,
            row_totals,
            col_totals,
            grand_total,
            category_index,
            word_index,
        }
    }

    pub fn action(&self) -> ActionKind {
        self.action
    }

    pub fn categories(&self) -> &[CategoryId] {
        &self.categories
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn n_categories(&self) -> usize {
        self.categories.len()
    }

    pub fn n_words(&self) -> usize {
        self.words.len()
    }

    pub fn category_pos(&self, category: &CategoryId) -> Option<usize> {
        self.category_index.get(category).copied()
    }

    pub fn word_pos(&self, word: &str) -> Option<usize> {
        self.word_index.get(word).copied()
    }

    /// Count at (row, col). Panics if out of range.
    pub fn count(&self, row: usize, col: usize) -> u64 {
        assert!(row < self.categories.len() && col < self.words.len());
        self.counts[row * self.words.len() + col]
    }

    pub fn row_total(&self, row: usize) -> u64 {
        self.row_totals[row]
    }

    pub fn col_total(&self, col: usize) -> u64 {
        self.col_totals[col]
    }

    pub fn grand_total(&self) -> u64 {
        self.grand_total
    }

    /// Cross-check the cached marginals three ways: the sum of row totals,
    /// the sum of column totals, and the sum over all cells must agree with
    /// each other and with `grand_total`, and each cached row/column total
    /// must equal its recomputed sum.
    pub fn totals_consistent(&self) -> bool {
        let n_cols = self.words.len();
        for (row, &cached) in self.row_totals.iter().enumerate() {
            let sum: u64 = (0..n_cols).map(|c| self.counts[row * n_cols + c]).sum();
            if sum != cached {
                return false;
            }
        }
        for (col, &cached) in self.col_totals.iter().enumerate() {
            let sum: u64 = (0..self.categories.len())
                .map(|r| self.counts[r * n_cols + col])
                .sum();
            if sum != cached {
                return false;
            }
        }
        let cell_sum: u64 = self.counts.iter().sum();
        let row_sum: u64 = self.row_totals.iter().sum();
        let col_sum: u64 = self.col_totals.iter().sum();
        cell_sum == self.grand_total && row_sum == self.grand_total && col_sum == self.grand_total
    }

    /// Multiply every cell by `k`, rebuilding the marginals. Used by scale
    /// covariance checks.
    pub fn scaled(&self, k: u64) -> Self {
        let mut scaled = self.clone();
        for cell in &mut scaled.counts {
            *cell *= k;
        }
        for total in &mut scaled.row_totals {
            *total *= k;
        }
        for total in &mut scaled.col_totals {
            *total *= k;
        }
        scaled.grand_total *= k;
        scaled
    }
}
