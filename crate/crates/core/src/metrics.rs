//! Word-scoring metrics and category-level engagement statistics.
//!
//! Three metrics rank the words of one category row of a
//! [`ContingencyTable`]:
//!
//! * **count** — the raw occurrence count, the naive baseline.
//! * **tf-idf** — each (category, action) group is one pseudo-document;
//!   `tf(w) = count / row_total`, `idf(w) = ln((1 + D) / (1 + df(w))) + 1`
//!   with `D` the number of categories and `df(w)` the number of categories
//!   where the word occurs. A fixed, documented baseline rather than a
//!   reproduction target.
//! * **expected-dif** — the chi-square cell contribution
//!   `(T - E)^2 / E`, where `E = col_total * row_total / grand_total` is the
//!   word's expected frequency in the row. Over-represented cells are what
//!   make a word characteristic, so the default ranking keeps only
//!   `Direction::Over`; the unfiltered list is available for audits.
//!
//! Category-level statistics use the two-middle-mean median convention
//! throughout: the median of an even-length sequence is the mean of the two
//! middle order statistics, and quartiles are medians of the lower/upper
//! halves (excluding the middle element when the length is odd).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{CategoryId, ContingencyTable};

/// Absolute tolerance under which observed and expected counts are
/// considered equal.
pub const EXACT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("unknown category: {0}")]
    UnknownCategory(CategoryId),
    #[error("unknown word: {0:?}")]
    UnknownWord(String),
    #[error("contingency table has a zero grand total")]
    ZeroGrandTotal,
    #[error("empty input sequence")]
    EmptyInput,
    #[error("median Like count is zero; RT_Like is undefined")]
    ZeroMedianLike,
}

/// Sign of `observed - expected`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Over,
    Under,
    Exact,
}

/// One scored word. For the count and tf-idf metrics `expected` has no
/// meaning of its own and is reported equal to `observed` with
/// `Direction::Exact`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordScore {
    pub word: String,
    pub score: f64,
    pub observed: u64,
    pub expected: f64,
    pub direction: Direction,
}

/// Whether expected-dif rankings keep only over-represented words (the
/// default) or every cell with a positive expected frequency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectionFilter {
    OverOnly,
    All,
}

fn direction_of(observed: f64, expected: f64) -> Direction {
    let diff = observed - expected;
    if diff.abs() <= EXACT_TOLERANCE {
        Direction::Exact
    } else if diff > 0.0 {
        Direction::Over
    } else {
        Direction::Under
    }
}

/// Descending score, ties broken lexicographically by word.
fn sort_scores(scores: &mut [WordScore]) {
    scores.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| a.word.cmp(&b.word))
    });
}

fn category_row(
    table: &ContingencyTable,
    category: &CategoryId,
) -> Result<usize, MetricsError> {
    table
        .category_pos(category)
        .ok_or_else(|| MetricsError::UnknownCategory(category.clone()))
}

/// Raw occurrence counts for one category, highest first. Words absent from
/// the category are not emitted.
pub fn count_scores(
    table: &ContingencyTable,
    category: &CategoryId,
) -> Result<Vec<WordScore>, MetricsError> {
    let row = category_row(table, category)?;
    let mut scores: Vec<WordScore> = (0..table.n_words())
        .filter_map(|col| {
            let observed = table.count(row, col);
            (observed > 0).then(|| WordScore {
                word: table.words()[col].clone(),
                score: observed as f64,
                observed,
                expected: observed as f64,
                direction: Direction::Exact,
            })
        })
        .collect();
    sort_scores(&mut scores);
    Ok(scores)
}

/// Smoothed tf-idf over category pseudo-documents. An empty category row
/// yields an empty list.
pub fn tfidf_scores(
    table: &ContingencyTable,
    category: &CategoryId,
) -> Result<Vec<WordScore>, MetricsError> {
    let row = category_row(table, category)?;
    let row_total = table.row_total(row);
    if row_total == 0 {
        return Ok(Vec::new());
    }
    let n_categories = table.n_categories() as f64;

    let mut scores: Vec<WordScore> = Vec::new();
    for col in 0..table.n_words() {
        let observed = table.count(row, col);
        if observed == 0 {
            continue;
        }
        let df = (0..table.n_categories())
            .filter(|&r| table.count(r, col) > 0)
            .count() as f64;
        let tf = observed as f64 / row_total as f64;
        let idf = ((1.0 + n_categories) / (1.0 + df)).ln() + 1.0;
        scores.push(WordScore {
            word: table.words()[col].clone(),
            score: tf * idf,
            observed,
            expected: observed as f64,
            direction: Direction::Exact,
        });
    }
    sort_scores(&mut scores);
    Ok(scores)
}

/// Expected frequency of `word` in `category`:
/// `col_total(word) * row_total(category) / grand_total`.
pub fn expected_frequency(
    table: &ContingencyTable,
    category: &CategoryId,
    word: &str,
) -> Result<f64, MetricsError> {
    let row = category_row(table, category)?;
    let col = table
        .word_pos(word)
        .ok_or_else(|| MetricsError::UnknownWord(word.to_owned()))?;
    if table.grand_total() == 0 {
        return Err(MetricsError::ZeroGrandTotal);
    }
    Ok(table.col_total(col) as f64 * table.row_total(row) as f64 / table.grand_total() as f64)
}

/// Expected-dif scores for one category with the default over-represented
/// filter. See [`expected_dif_scores_filtered`].
pub fn expected_dif_scores(
    table: &ContingencyTable,
    category: &CategoryId,
) -> Result<Vec<WordScore>, MetricsError> {
    expected_dif_scores_filtered(table, category, DirectionFilter::OverOnly)
}

/// Expected-dif scores for one category.
///
/// For every word with `E > 0` the score is `(T - E)^2 / E`. Words with
/// `E = 0` are omitted: a zero expected frequency forces a zero observed
/// count, and such vacuous cells must not pad rankings. With
/// [`DirectionFilter::OverOnly`], under-represented and exactly-expected
/// words are dropped from the ranking as well.
pub fn expected_dif_scores_filtered(
    table: &ContingencyTable,
    category: &CategoryId,
    filter: DirectionFilter,
) -> Result<Vec<WordScore>, MetricsError> {
    let row = category_row(table, category)?;
    if table.grand_total() == 0 {
        return Err(MetricsError::ZeroGrandTotal);
    }
    let row_total = table.row_total(row) as f64;
    let grand = table.grand_total() as f64;

    let mut scores: Vec<WordScore> = Vec::new();
    for col in 0..table.n_words() {
        let expected = table.col_total(col) as f64 * row_total / grand;
        if expected <= 0.0 {
            continue;
        }
        let observed = table.count(row, col);
        let diff = observed as f64 - expected;
        let direction = direction_of(observed as f64, expected);
        if matches!(filter, DirectionFilter::OverOnly) && direction != Direction::Over {
            continue;
        }
        scores.push(WordScore {
            word: table.words()[col].clone(),
            score: diff * diff / expected,
            observed,
            expected,
            direction,
        });
    }
    sort_scores(&mut scores);
    Ok(scores)
}

/// Median under the two-middle-mean convention. `values` need not be sorted.
pub fn median(values: &[u64]) -> Result<f64, MetricsError> {
    if values.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    Ok(median_of_sorted(&sorted))
}

fn median_of_sorted(sorted: &[u64]) -> f64 {
    let n = sorted.len();
    let mid = n / 2;
    if n % 2 == 1 {
        sorted[mid] as f64
    } else {
        (sorted[mid - 1] as f64 + sorted[mid] as f64) / 2.0
    }
}

/// Ratio of median RT count to median Like count over a set of tweets.
///
/// Greater than 1.0 means the set is easily retweeted; smaller than 1.0
/// means it is easily Liked.
pub fn rt_like_ratio(rt_values: &[u64], like_values: &[u64]) -> Result<f64, MetricsError> {
    let median_rt = median(rt_values)?;
    let median_like = median(like_values)?;
    if median_like <= 0.0 {
        return Err(MetricsError::ZeroMedianLike);
    }
    Ok(median_rt / median_like)
}

/// Quartiles plus maximum of a count sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quartiles {
    pub q25: f64,
    pub q50: f64,
    pub q75: f64,
    pub max: u64,
}

/// Summary statistics of a count sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DescriptiveStats {
    pub mean: f64,
    /// Sample standard deviation, `n - 1` denominator. Zero for a single
    /// observation.
    pub std: f64,
    pub quartiles: Quartiles,
}

/// Mean, sample standard deviation, quartiles, and maximum.
///
/// Quartiles are medians of the lower/upper halves of the sorted data,
/// excluding the middle element when the length is odd.
pub fn descriptive_stats(values: &[u64]) -> Result<DescriptiveStats, MetricsError> {
    if values.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    let n = sorted.len();

    let mean = sorted.iter().map(|&v| v as f64).sum::<f64>() / n as f64;
    let std = if n > 1 {
        let ss: f64 = sorted.iter().map(|&v| (v as f64 - mean).powi(2)).sum();
        (ss / (n - 1) as f64).sqrt()
    } else {
        0.0
    };

    let q50 = median_of_sorted(&sorted);
    let lower = &sorted[..n / 2];
    let upper = if n % 2 == 1 {
        &sorted[n / 2 + 1..]
    } else {
        &sorted[n / 2..]
    };
    let q25 = if lower.is_empty() { q50 } else { median_of_sorted(lower) };
    let q75 = if upper.is_empty() { q50 } else { median_of_sorted(upper) };

    Ok(DescriptiveStats {
        mean,
        std,
        quartiles: Quartiles {
            q25,
            q50,
            q75,
            max: sorted[n - 1],
        },
    })
}

/// Engagement statistics for one category (or for the whole corpus, in the
/// `Total` row of the stats report).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryStats {
    pub category: CategoryId,
    pub n_pairs: u64,
    pub median_rt: f64,
    pub median_like: f64,
    /// `median_rt / median_like`; NaN when the Like median is zero.
    pub rt_like: f64,
    pub mean_rt: f64,
    pub mean_like: f64,
    pub std_rt: f64,
    pub std_like: f64,
    pub quartiles_rt: Quartiles,
    pub quartiles_like: Quartiles,
}

impl CategoryStats {
    /// Compute the stats row for one (category, RT counts, Like counts)
    /// triple. The two count slices must come from the same pair set and so
    /// have the same length.
    pub fn compute(
        category: CategoryId,
        rt_values: &[u64],
        like_values: &[u64],
    ) -> Result<Self, MetricsError> {
        if rt_values.is_empty() || rt_values.len() != like_values.len() {
            return Err(MetricsError::EmptyInput);
        }
        let rt = descriptive_stats(rt_values)?;
        let like = descriptive_stats(like_values)?;
        let rt_like = if like.quartiles.q50 > 0.0 {
            rt.quartiles.q50 / like.quartiles.q50
        } else {
            f64::NAN
        };
        Ok(Self {
            category,
            n_pairs: rt_values.len() as u64,
            median_rt: rt.quartiles.q50,
            median_like: like.quartiles.q50,
            rt_like,
            mean_rt: rt.mean,
            mean_like: like.mean,
            std_rt: rt.std,
            std_like: like.std,
            quartiles_rt: rt.quartiles,
            quartiles_like: like.quartiles,
        })
    }
}
