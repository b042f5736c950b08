//! Dominance-partitioned corpora and the queries that run over them:
//! top-word extraction per metric, Dice comparison of the two dominance
//! vocabularies, and weekly trend buckets.
//!
//! Bags are produced by the caller (see [`crate::tokenize`]) and passed in
//! by article id; all queries here are read-only over immutable corpora.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use chrono::{DateTime, Duration, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{
    ActionKind, ArticleEngagement, ArticleId, BagOfWords, CategoryId, ContingencyTable, Dominance,
    ReferencePair, TokenMultiset,
};
use crate::ingest::aggregate_article_engagement;
use crate::metrics::{
    count_scores, expected_dif_scores_filtered, tfidf_scores, DirectionFilter, MetricsError,
    WordScore,
};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("articles without bags: {}", format_ids(.0))]
    MissingBag(Vec<ArticleId>),
    #[error("dominance corpus is empty")]
    EmptyCorpus,
    #[error("query has no time bucket configured")]
    MissingTimeBucket,
    #[error("time bucket width must be positive")]
    InvalidBucketWidth,
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

fn format_ids(ids: &[ArticleId]) -> String {
    let mut out = String::new();
    for (i, id) in ids.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str(id.as_str());
    }
    out
}

/// Which word-scoring metric a query runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Count,
    TfIdf,
    ExpectedDif,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Count, Metric::TfIdf, Metric::ExpectedDif];

    /// Token used in file names and CLI flags.
    pub fn slug(&self) -> &'static str {
        match self {
            Metric::Count => "count",
            Metric::TfIdf => "tfidf",
            Metric::ExpectedDif => "expected-dif",
        }
    }
}

/// Half-open time buckets `[origin + i*width, origin + (i+1)*width)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimeBucketSpec {
    pub origin: DateTime<Utc>,
    pub width: Duration,
}

impl TimeBucketSpec {
    pub fn new(origin: DateTime<Utc>, width: Duration) -> Result<Self, AnalysisError> {
        if width <= Duration::zero() {
            return Err(AnalysisError::InvalidBucketWidth);
        }
        Ok(Self { origin, width })
    }

    pub fn weekly(origin: DateTime<Utc>) -> Self {
        Self {
            origin,
            width: Duration::days(7),
        }
    }

    /// Bucket index of a timestamp; negative for timestamps before origin.
    pub fn index_of(&self, t: DateTime<Utc>) -> i64 {
        (t - self.origin)
            .num_seconds()
            .div_euclid(self.width.num_seconds())
    }

    pub fn start_of(&self, index: i64) -> DateTime<Utc> {
        self.origin + Duration::seconds(self.width.num_seconds() * index)
    }
}

/// One extraction request.
#[derive(Debug, Clone)]
pub struct AnalysisQuery {
    pub action: ActionKind,
    pub metric: Metric,
    pub category: CategoryId,
    pub top_k: usize,
    pub time_bucket: Option<TimeBucketSpec>,
    /// Direction filter for the expected-dif metric; ignored by the others.
    pub direction: DirectionFilter,
    /// Words below this summed occurrence count are dropped from the table.
    pub min_word_total: u64,
}

impl AnalysisQuery {
    pub fn new(action: ActionKind, metric: Metric, category: CategoryId) -> Self {
        Self {
            action,
            metric,
            category,
            top_k: 20,
            time_bucket: None,
            direction: DirectionFilter::OverOnly,
            min_word_total: 1,
        }
    }

    pub fn top_k(mut self, k: usize) -> Self {
        self.top_k = k;
        self
    }

    pub fn bucketed(mut self, spec: TimeBucketSpec) -> Self {
        self.time_bucket = Some(spec);
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
struct CategoryCell {
    articles: Vec<ArticleId>,
    word_counts: TokenMultiset,
}

/// Per-category article lists and summed bags for one dominance side.
/// Tie articles never enter a corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct DominanceCorpus {
    action: ActionKind,
    cells: BTreeMap<CategoryId, CategoryCell>,
}

impl DominanceCorpus {
    pub fn action(&self) -> ActionKind {
        self.action
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn categories(&self) -> impl Iterator<Item = &CategoryId> {
        self.cells.keys()
    }

    pub fn has_category(&self, category: &CategoryId) -> bool {
        self.cells.contains_key(category)
    }

    pub fn articles(&self, category: &CategoryId) -> Option<&[ArticleId]> {
        self.cells.get(category).map(|c| c.articles.as_slice())
    }

    pub fn word_counts(&self, category: &CategoryId) -> Option<&TokenMultiset> {
        self.cells.get(category).map(|c| &c.word_counts)
    }

    /// Total word occurrences across every category, with multiplicity.
    pub fn total_occurrences(&self) -> u64 {
        self.cells
            .values()
            .map(|c| c.word_counts.values().sum::<u64>())
            .sum()
    }

    fn rows(&self) -> BTreeMap<CategoryId, TokenMultiset> {
        self.cells
            .iter()
            .map(|(c, cell)| (c.clone(), cell.word_counts.clone()))
            .collect()
    }
}

/// Partition engagements by dominance for one action: keep the articles on
/// that side, drop ties, group by category, and sum bags per category.
///
/// Every engagement's article must have a bag (an empty bag is fine);
/// missing bags are a data-integrity error listing the offending ids.
pub fn build_dominance_corpus(
    engagements: &[ArticleEngagement],
    bags: &HashMap<ArticleId, BagOfWords>,
    action: ActionKind,
) -> Result<DominanceCorpus, AnalysisError> {
    let missing: Vec<ArticleId> = engagements
        .iter()
        .filter(|e| !bags.contains_key(&e.article_id))
        .map(|e| e.article_id.clone())
        .collect();
    if !missing.is_empty() {
        let mut missing = missing;
        missing.sort();
        missing.dedup();
        return Err(AnalysisError::MissingBag(missing));
    }

    let wanted = match action {
        ActionKind::Rt => Dominance::RtDominant,
        ActionKind::Like => Dominance::LikeDominant,
    };
    let mut cells: BTreeMap<CategoryId, CategoryCell> = BTreeMap::new();
    for engagement in engagements {
        if engagement.dominance != wanted {
            continue;
        }
        let cell = cells.entry(engagement.category.clone()).or_default();
        cell.articles.push(engagement.article_id.clone());
        for (word, &n) in &bags[&engagement.article_id].tokens {
            *cell.word_counts.entry(word.clone()).or_insert(0) += n;
        }
    }
    for cell in cells.values_mut() {
        cell.articles.sort();
    }
    Ok(DominanceCorpus { action, cells })
}

/// Both dominance sides built from the same engagement set.
#[derive(Debug, Clone)]
pub struct ActionCorpora {
    pub rt: DominanceCorpus,
    pub like: DominanceCorpus,
}

impl ActionCorpora {
    pub fn build(
        engagements: &[ArticleEngagement],
        bags: &HashMap<ArticleId, BagOfWords>,
    ) -> Result<Self, AnalysisError> {
        Ok(Self {
            rt: build_dominance_corpus(engagements, bags, ActionKind::Rt)?,
            like: build_dominance_corpus(engagements, bags, ActionKind::Like)?,
        })
    }

    pub fn get(&self, action: ActionKind) -> &DominanceCorpus {
        match action {
            ActionKind::Rt => &self.rt,
            ActionKind::Like => &self.like,
        }
    }
}

/// Build the word-by-category table for one corpus. The expected-frequency
/// denominators span every category of the action, so there is exactly one
/// table per (action, bucket).
pub fn build_contingency_table(
    corpus: &DominanceCorpus,
    min_word_total: u64,
) -> Result<ContingencyTable, AnalysisError> {
    if corpus.is_empty() {
        return Err(AnalysisError::EmptyCorpus);
    }
    Ok(ContingencyTable::build(
        corpus.action(),
        &corpus.rows(),
        min_word_total,
    ))
}

/// Identifies the time bucket a scored list belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BucketInfo {
    pub index: u64,
    #[serde(with = "crate::corpus::ts_rfc3339")]
    pub start: DateTime<Utc>,
}

/// A ranked word list for one (category, action, metric, bucket) query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredWordList {
    pub category: CategoryId,
    pub action: ActionKind,
    pub metric: Metric,
    pub bucket: Option<BucketInfo>,
    pub entries: Vec<WordScore>,
}

impl ScoredWordList {
    pub fn words(&self) -> BTreeSet<String> {
        self.entries.iter().map(|e| e.word.clone()).collect()
    }
}

/// Score and truncate the top words for one query. An empty corpus yields an
/// empty list; a category absent from a non-empty corpus is an error.
pub fn extract_top_words(
    query: &AnalysisQuery,
    corpora: &ActionCorpora,
) -> Result<ScoredWordList, AnalysisError> {
    let corpus = corpora.get(query.action);
    let mut list = ScoredWordList {
        category: query.category.clone(),
        action: query.action,
        metric: query.metric,
        bucket: None,
        entries: Vec::new(),
    };
    if corpus.is_empty() {
        return Ok(list);
    }
    let table = build_contingency_table(corpus, query.min_word_total)?;
    let mut entries = match query.metric {
        Metric::Count => count_scores(&table, &query.category)?,
        Metric::TfIdf => tfidf_scores(&table, &query.category)?,
        Metric::ExpectedDif => {
            expected_dif_scores_filtered(&table, &query.category, query.direction)?
        }
    };
    entries.truncate(query.top_k);
    list.entries = entries;
    Ok(list)
}

/// Dice coefficient of two word sets: `2|x ∩ y| / (|x| + |y|)`, defined as 0
/// when both sets are empty.
pub fn dice_coefficient<T: Ord>(x: &BTreeSet<T>, y: &BTreeSet<T>) -> f64 {
    if x.is_empty() && y.is_empty() {
        return 0.0;
    }
    let intersection = x.intersection(y).count();
    2.0 * intersection as f64 / (x.len() + y.len()) as f64
}

/// Similarity of a category's top-k vocabularies on the two dominance sides.
pub fn dominance_similarity(
    corpora: &ActionCorpora,
    category: &CategoryId,
    k: usize,
    metric: Metric,
) -> Result<f64, AnalysisError> {
    let rt_query = AnalysisQuery::new(ActionKind::Rt, metric, category.clone()).top_k(k);
    let mut like_query = rt_query.clone();
    like_query.action = ActionKind::Like;

    let rt_words = extract_top_words(&rt_query, corpora)?.words();
    let like_words = extract_top_words(&like_query, corpora)?.words();
    Ok(dice_coefficient(&rt_words, &like_words))
}

/// Weekly trend extraction output.
#[derive(Debug, Clone, PartialEq)]
pub struct TrendReport {
    /// One list per bucket, dense from the first to the last non-empty
    /// bucket. Buckets without data (or without the queried category) carry
    /// empty entries.
    pub buckets: Vec<ScoredWordList>,
    /// Pairs before the bucket origin, excluded from every bucket.
    pub out_of_range: u64,
}

/// Assign pairs to time buckets and rerun the whole dominance/table/scoring
/// pipeline inside each bucket independently; marginals never leak across
/// buckets.
pub fn weekly_trend(
    query: &AnalysisQuery,
    pairs: &[ReferencePair],
    bags: &HashMap<ArticleId, BagOfWords>,
) -> Result<TrendReport, AnalysisError> {
    let spec = query.time_bucket.ok_or(AnalysisError::MissingTimeBucket)?;

    let mut by_bucket: BTreeMap<i64, Vec<ReferencePair>> = BTreeMap::new();
    let mut out_of_range = 0u64;
    for pair in pairs {
        let index = spec.index_of(pair.created_at);
        if index < 0 {
            out_of_range += 1;
            continue;
        }
        by_bucket.entry(index).or_default().push(pair.clone());
    }

    let mut report = TrendReport {
        buckets: Vec::new(),
        out_of_range,
    };
    let (Some(&first), Some(&last)) = (
        by_bucket.keys().next(),
        by_bucket.keys().next_back(),
    ) else {
        return Ok(report);
    };

    for index in first..=last {
        let bucket_info = BucketInfo {
            index: index as u64,
            start: spec.start_of(index),
        };
        let mut list = ScoredWordList {
            category: query.category.clone(),
            action: query.action,
            metric: query.metric,
            bucket: Some(bucket_info),
            entries: Vec::new(),
        };
        if let Some(bucket_pairs) = by_bucket.get(&index) {
            let engagements = aggregate_article_engagement(bucket_pairs);
            let corpora = ActionCorpora::build(&engagements, bags)?;
            let corpus = corpora.get(query.action);
            if corpus.has_category(&query.category) {
                let mut inner = query.clone();
                inner.time_bucket = None;
                list.entries = extract_top_words(&inner, &corpora)?.entries;
            }
        }
        report.buckets.push(list);
    }
    Ok(report)
}

/// Reweight bags so each article's title counts once per referencing tweet
/// instead of once per article. The returned map keeps an entry for every
/// input bag; articles without pairs keep weight zero bags.
pub fn weight_bags_by_pair_count(
    bags: &HashMap<ArticleId, BagOfWords>,
    pairs: &[ReferencePair],
) -> HashMap<ArticleId, BagOfWords> {
    let mut pair_counts: HashMap<&ArticleId, u64> = HashMap::new();
    for pair in pairs {
        *pair_counts.entry(&pair.article_id).or_insert(0) += 1;
    }
    bags.iter()
        .map(|(id, bag)| {
            let weight = pair_counts.get(id).copied().unwrap_or(0);
            let tokens: TokenMultiset = bag
                .tokens
                .iter()
                .map(|(word, &n)| (word.clone(), n * weight))
                .filter(|(_, n)| *n > 0)
                .collect();
            (id.clone(), BagOfWords::new(id.clone(), tokens))
        })
        .collect()
}
