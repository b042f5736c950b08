//! File ingestion: read article and tweet records, join them on normalized
//! URLs, apply the engagement filter, and aggregate per-article engagement.
//!
//! Both input files are line-delimited JSON (one record per line, UTF-8; see
//! the repository README for the field names). Article files are indexed in
//! full; tweet files are streamed a line at a time, so memory stays
//! proportional to the article index plus the matched pairs.
//!
//! Deduplication of (tweet, article) pairs happens before the engagement
//! filter: when the same pair appears in several input records, the record
//! with the latest `created_at` wins, since stored counts are final
//! snapshots.

use std::collections::hash_map::Entry;
use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use chrono::{DateTime, SubsecRound, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;
use url::Url;

use crate::corpus::{
    classify_dominance, Article, ArticleEngagement, ArticleId, CategoryId, CategorySet,
    ReferencePair, TweetId, TweetRecord,
};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("unparseable url: {0:?}")]
    UnparseableUrl(String),
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid ingest config: {0}")]
    InvalidConfig(String),
}

/// Version tag of the URL normalization rule set. Only `v1` exists; the tag
/// is recorded so future rule changes cannot silently change joins.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum UrlRules {
    #[default]
    #[serde(rename = "v1")]
    V1,
}

/// Closed interval of tweet creation times, `start <= t <= end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DateRange {
    #[serde(with = "crate::corpus::ts_rfc3339")]
    pub start: DateTime<Utc>,
    #[serde(with = "crate::corpus::ts_rfc3339")]
    pub end: DateTime<Utc>,
}

impl DateRange {
    pub fn new(start: DateTime<Utc>, end: DateTime<Utc>) -> Result<Self, IngestError> {
        if start > end {
            return Err(IngestError::InvalidConfig(format!(
                "date range start {start} is after end {end}"
            )));
        }
        Ok(Self { start, end })
    }

    pub fn contains(&self, t: DateTime<Utc>) -> bool {
        self.start <= t && t <= self.end
    }
}

/// Ingestion settings. Defaults mirror the standard pipeline: both
/// engagement counts at least 10, no excluded categories, no date window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestConfig {
    pub min_rt: u64,
    pub min_like: u64,
    pub excluded_categories: BTreeSet<CategoryId>,
    pub url_rules: UrlRules,
    pub date_range: Option<DateRange>,
}

impl Default for IngestConfig {
    fn default() -> Self {
        Self {
            min_rt: 10,
            min_like: 10,
            excluded_categories: BTreeSet::new(),
            url_rules: UrlRules::V1,
            date_range: None,
        }
    }
}

/// Normalize a URL under the `v1` rules: lowercase scheme and host, strip
/// default ports and the fragment, drop one trailing slash from the path,
/// keep the query string. Only absolute, host-based URLs are accepted.
pub fn normalize_url(raw: &str) -> Result<String, IngestError> {
    let parsed = Url::parse(raw.trim()).map_err(|_| IngestError::UnparseableUrl(raw.to_owned()))?;
    if parsed.cannot_be_a_base() {
        return Err(IngestError::UnparseableUrl(raw.to_owned()));
    }
    let host = parsed
        .host_str()
        .ok_or_else(|| IngestError::UnparseableUrl(raw.to_owned()))?;

    let mut out = String::with_capacity(raw.len());
    out.push_str(parsed.scheme());
    out.push_str("://");
    if !parsed.username().is_empty() {
        out.push_str(parsed.username());
        if let Some(password) = parsed.password() {
            out.push(':');
            out.push_str(password);
        }
        out.push('@');
    }
    out.push_str(host);
    // `Url::port` is None when the port equals the scheme default.
    if let Some(port) = parsed.port() {
        out.push(':');
        out.push_str(&port.to_string());
    }
    let path = parsed.path().strip_suffix('/').unwrap_or(parsed.path());
    out.push_str(path);
    if let Some(query) = parsed.query() {
        out.push('?');
        out.push_str(query);
    }
    Ok(out)
}

/// URL index over the article set. Multiple articles may share a URL; all of
/// them match.
#[derive(Debug, Default)]
pub struct ArticleUrlIndex {
    by_url: HashMap<String, Vec<(ArticleId, CategoryId)>>,
}

impl ArticleUrlIndex {
    pub fn build(articles: &[Article]) -> Self {
        let mut by_url: HashMap<String, Vec<(ArticleId, CategoryId)>> = HashMap::new();
        for article in articles {
            by_url
                .entry(article.url.clone())
                .or_default()
                .push((article.id.clone(), article.category.clone()));
        }
        Self { by_url }
    }

    fn lookup(&self, url: &str) -> &[(ArticleId, CategoryId)] {
        self.by_url.get(url).map(Vec::as_slice).unwrap_or(&[])
    }
}

/// Accumulates matched pairs while tweets stream by, resolving duplicate
/// (tweet, article) records to the one with the latest `created_at` (the
/// later input record wins a timestamp tie).
#[derive(Debug, Default)]
pub struct PairAccumulator {
    pairs: HashMap<(TweetId, ArticleId), ReferencePair>,
}

impl PairAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    /// Match one tweet against the index. Returns true if at least one pair
    /// was produced or refreshed.
    pub fn observe(&mut self, tweet: &TweetRecord, index: &ArticleUrlIndex) -> bool {
        let mut matched = false;
        for url in &tweet.urls {
            for (article_id, category) in index.lookup(url) {
                matched = true;
                let key = (tweet.id.clone(), article_id.clone());
                let pair = ReferencePair {
                    tweet_id: tweet.id.clone(),
                    article_id: article_id.clone(),
                    rt_count: tweet.rt_count,
                    like_count: tweet.like_count,
                    created_at: tweet.created_at,
                    category: category.clone(),
                };
                match self.pairs.entry(key) {
                    Entry::Vacant(slot) => {
                        slot.insert(pair);
                    }
                    Entry::Occupied(mut slot) => {
                        if pair.created_at >= slot.get().created_at {
                            slot.insert(pair);
                        }
                    }
                }
            }
        }
        matched
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Drain into a deterministic ordering: (tweet_id, article_id) ascending.
    pub fn into_sorted_pairs(self) -> Vec<ReferencePair> {
        let mut pairs: Vec<ReferencePair> = self.pairs.into_values().collect();
        pairs.sort_by(|a, b| {
            (&a.tweet_id, &a.article_id).cmp(&(&b.tweet_id, &b.article_id))
        });
        pairs
    }
}

/// Join tweets to articles by URL. One pair per (tweet, article) whose URL
/// sets intersect; a tweet citing k matching articles yields k pairs.
/// URLs on both sides must already be normalized.
pub fn match_references(articles: &[Article], tweets: &[TweetRecord]) -> Vec<ReferencePair> {
    let index = ArticleUrlIndex::build(articles);
    let mut acc = PairAccumulator::new();
    for tweet in tweets {
        acc.observe(tweet, &index);
    }
    acc.into_sorted_pairs()
}

/// Keep exactly the pairs passing the engagement thresholds, category
/// exclusions, and date window. Order-preserving.
pub fn filter_pairs(mut pairs: Vec<ReferencePair>, cfg: &IngestConfig) -> Vec<ReferencePair> {
    pairs.retain(|p| {
        p.rt_count >= cfg.min_rt
            && p.like_count >= cfg.min_like
            && !cfg.excluded_categories.contains(&p.category)
            && cfg.date_range.is_none_or(|r| r.contains(p.created_at))
    });
    pairs
}

/// Roll filtered pairs up into one engagement record per distinct article,
/// ordered by article id.
pub fn aggregate_article_engagement(pairs: &[ReferencePair]) -> Vec<ArticleEngagement> {
    let mut sums: HashMap<&ArticleId, (u64, u64, &CategoryId)> = HashMap::new();
    for pair in pairs {
        let slot = sums
            .entry(&pair.article_id)
            .or_insert((0, 0, &pair.category));
        slot.0 += pair.rt_count;
        slot.1 += pair.like_count;
    }
    let mut engagements: Vec<ArticleEngagement> = sums
        .into_iter()
        .map(|(article_id, (n_rt, n_like, category))| ArticleEngagement {
            article_id: article_id.clone(),
            category: category.clone(),
            n_rt,
            n_like,
            dominance: classify_dominance(n_rt, n_like),
        })
        .collect();
    engagements.sort_by(|a, b| a.article_id.cmp(&b.article_id));
    engagements
}

/// What happened during one ingest run.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub articles_parsed: u64,
    /// Article records skipped because their URL failed normalization.
    pub articles_skipped_unparseable_url: u64,
    pub tweets_parsed: u64,
    /// Tweet URLs dropped because they failed normalization (the record
    /// itself continues with its remaining URLs).
    pub tweet_urls_unparseable: u64,
    /// Tweet records that produced no pair.
    pub tweets_unmatched: u64,
    /// Distinct (tweet, article) pairs after deduplication, before the
    /// engagement filter.
    pub pairs_matched: u64,
    /// Duplicate (tweet, article) records collapsed by deduplication.
    pub duplicate_pair_records: u64,
    /// Pairs removed by the engagement/category/date filter.
    pub pairs_filtered_out: u64,
    pub pairs_kept: u64,
    /// Articles whose summed counts tie; retained in storage, excluded from
    /// dominance queries.
    pub ties: u64,
    pub articles_engaged: u64,
}

impl std::fmt::Display for IngestReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "articles: {} parsed, {} skipped (unparseable url)",
            self.articles_parsed, self.articles_skipped_unparseable_url
        )?;
        writeln!(
            f,
            "tweets: {} parsed, {} unmatched, {} unparseable urls dropped",
            self.tweets_parsed, self.tweets_unmatched, self.tweet_urls_unparseable
        )?;
        writeln!(
            f,
            "pairs: {} matched ({} duplicate records collapsed), {} filtered out, {} kept",
            self.pairs_matched,
            self.duplicate_pair_records,
            self.pairs_filtered_out,
            self.pairs_kept
        )?;
        write!(
            f,
            "articles engaged: {} ({} ties excluded from dominance queries)",
            self.articles_engaged, self.ties
        )
    }
}

/// Everything an ingest run produces.
#[derive(Debug)]
pub struct IngestOutput {
    pub pairs: Vec<ReferencePair>,
    pub engagements: Vec<ArticleEngagement>,
    pub report: IngestReport,
}

#[derive(Deserialize)]
struct RawArticle {
    id: String,
    url: String,
    title: String,
    category: String,
    #[serde(with = "crate::corpus::ts_rfc3339")]
    published_at: DateTime<Utc>,
}

#[derive(Deserialize)]
struct RawTweet {
    id: String,
    #[serde(with = "crate::corpus::ts_rfc3339")]
    created_at: DateTime<Utc>,
    rt_count: u64,
    like_count: u64,
    urls: Vec<String>,
}

fn open(path: &Path) -> Result<BufReader<File>, IngestError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|source| IngestError::Io {
            path: path.display().to_string(),
            source,
        })
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> IngestError {
    IngestError::Parse {
        path: path.display().to_string(),
        line,
        msg: msg.into(),
    }
}

/// Read and validate an articles file. Records whose URL fails normalization
/// are skipped and counted; anything else invalid (malformed JSON, unknown
/// category, empty title, duplicate id) is a hard error naming the line.
pub fn read_articles(
    path: &Path,
    categories: &CategorySet,
) -> Result<(Vec<Article>, IngestReport), IngestError> {
    let reader = open(path)?;
    let mut articles = Vec::new();
    let mut seen_ids: HashMap<ArticleId, usize> = HashMap::new();
    let mut report = IngestReport::default();

    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| parse_err(path, lineno, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawArticle =
            serde_json::from_str(&line).map_err(|e| parse_err(path, lineno, e.to_string()))?;

        let title: String = raw.title.nfc().collect();
        if title.trim().is_empty() {
            return Err(parse_err(path, lineno, "article title is empty"));
        }
        let category = CategoryId::new(raw.category);
        if !categories.contains(&category) {
            return Err(parse_err(
                path,
                lineno,
                format!("unknown category {:?}", category.as_str()),
            ));
        }
        let url = match normalize_url(&raw.url) {
            Ok(url) => url,
            Err(IngestError::UnparseableUrl(_)) => {
                report.articles_skipped_unparseable_url += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let id = ArticleId::new(raw.id);
        if let Some(first) = seen_ids.insert(id.clone(), lineno) {
            return Err(parse_err(
                path,
                lineno,
                format!("duplicate article id {:?} (first seen on line {first})", id.as_str()),
            ));
        }
        report.articles_parsed += 1;
        articles.push(Article {
            id,
            url,
            title,
            category,
            published_at: raw.published_at.trunc_subsecs(0),
        });
    }
    Ok((articles, report))
}

/// Run the full ingest pipeline over an articles file and a tweets file.
///
/// The article index is built first, then tweets stream through the matcher
/// one line at a time; results are deterministic for identical inputs.
pub fn ingest_files(
    articles_path: &Path,
    tweets_path: &Path,
    cfg: &IngestConfig,
    categories: &CategorySet,
) -> Result<IngestOutput, IngestError> {
    let (articles, mut report) = read_articles(articles_path, categories)?;
    let index = ArticleUrlIndex::build(&articles);

    let reader = open(tweets_path)?;
    let mut acc = PairAccumulator::new();
    let mut duplicate_records = 0u64;
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| parse_err(tweets_path, lineno, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawTweet = serde_json::from_str(&line)
            .map_err(|e| parse_err(tweets_path, lineno, e.to_string()))?;
        report.tweets_parsed += 1;

        let mut urls = Vec::with_capacity(raw.urls.len());
        for raw_url in &raw.urls {
            match normalize_url(raw_url) {
                Ok(url) => urls.push(url),
                Err(IngestError::UnparseableUrl(_)) => report.tweet_urls_unparseable += 1,
                Err(e) => return Err(e),
            }
        }
        let tweet = TweetRecord {
            id: TweetId::new(raw.id),
            created_at: raw.created_at,
            rt_count: raw.rt_count,
            like_count: raw.like_count,
            urls,
        };
        let before = acc.len();
        let matched = acc.observe(&tweet, &index);
        if !matched {
            report.tweets_unmatched += 1;
        } else {
            // Matches that did not grow the map refreshed existing pairs.
            let grown = acc.len() - before;
            let matched_urls = tweet
                .urls
                .iter()
                .map(|u| index.lookup(u).len() as u64)
                .sum::<u64>();
            duplicate_records += matched_urls.saturating_sub(grown as u64);
        }
    }

    let pairs = acc.into_sorted_pairs();
    report.pairs_matched = pairs.len() as u64;
    report.duplicate_pair_records = duplicate_records;

    let kept = filter_pairs(pairs, cfg);
    report.pairs_kept = kept.len() as u64;
    report.pairs_filtered_out = report.pairs_matched - report.pairs_kept;

    let engagements = aggregate_article_engagement(&kept);
    report.articles_engaged = engagements.len() as u64;
    report.ties = engagements
        .iter()
        .filter(|e| e.dominance == crate::corpus::Dominance::Tie)
        .count() as u64;

    Ok(IngestOutput {
        pairs: kept,
        engagements,
        report,
    })
}
