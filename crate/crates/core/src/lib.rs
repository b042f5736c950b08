#![forbid(unsafe_code)]
//! Contrastive keyword scoring for news-sharing engagement corpora.
//!
//! The pipeline joins tweets to news articles by URL, splits articles into
//! retweet-dominant and Like-dominant sets per category, and ranks title
//! words by how far their observed counts sit from their expected
//! frequencies (a chi-square cell contribution), against raw-count and
//! tf-idf baselines. Category-level engagement ratios, Dice comparison of
//! the two dominance vocabularies, and weekly trend buckets round out the
//! analysis surface.
//!
//! Modules follow the pipeline order:
//!
//! * [`corpus`] — shared domain types and the contingency table.
//! * [`ingest`] — file reading, URL normalization, the URL join, the
//!   engagement filter, and per-article aggregation.
//! * [`tokenize`] — pluggable title tokenization.
//! * [`metrics`] — the word-scoring metrics and descriptive statistics.
//! * [`analysis`] — dominance corpora, top-word extraction, Dice similarity,
//!   weekly trends.
//! * [`snapshot`] — the deterministic ingest/analyze file seam.

pub mod analysis;
pub mod corpus;
pub mod ingest;
pub mod metrics;
pub mod snapshot;
pub mod tokenize;

pub use analysis::{
    build_contingency_table, build_dominance_corpus, dice_coefficient, dominance_similarity,
    extract_top_words, weekly_trend, ActionCorpora, AnalysisError, AnalysisQuery, DominanceCorpus,
    Metric, ScoredWordList, TimeBucketSpec,
};
pub use corpus::{
    classify_dominance, ActionKind, Article, ArticleEngagement, ArticleId, BagOfWords, CategoryId,
    CategorySet, ContingencyTable, Dominance, ReferencePair, TokenMultiset, TweetId, TweetRecord,
};
pub use ingest::{
    aggregate_article_engagement, filter_pairs, ingest_files, match_references, normalize_url,
    IngestConfig, IngestError, IngestOutput, IngestReport,
};
pub use metrics::{
    count_scores, descriptive_stats, expected_dif_scores, expected_dif_scores_filtered,
    expected_frequency, rt_like_ratio, tfidf_scores, CategoryStats, Direction, DirectionFilter,
    MetricsError, WordScore,
};
pub use snapshot::{read_snapshot, write_snapshot, Snapshot, SnapshotError};
pub use tokenize::{TokenClass, TokenizeError, Tokenizer, TokenizerKind, TokenizerSpec};
