//! Seeded randomized cross-checks against independently implemented oracles.
//!
//! Each oracle recomputes the contract by a different route (nested loops,
//! linear scans, direct index arithmetic) so a shared bug in the
//! implementation path cannot hide.

use std::collections::BTreeMap;

use chrono::{DateTime, Duration, TimeZone, Utc};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use keyness::corpus::{
    ActionKind, Article, ArticleId, CategoryId, ContingencyTable, ReferencePair, TokenMultiset,
    TweetId, TweetRecord,
};
use keyness::ingest::match_references;
use keyness::metrics::{
    descriptive_stats, expected_dif_scores_filtered, DirectionFilter,
};
use keyness::tokenize::{Tokenizer, TokenizerSpec};

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= tol * a.abs().max(b.abs())
}

// ---------------------------------------------------------------------------
// Contingency table totals
// ---------------------------------------------------------------------------

#[test]
fn randomized_tables_have_consistent_totals() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let n_cats = rng.gen_range(1..=6);
        let n_words = rng.gen_range(1..=15);
        let mut rows: BTreeMap<CategoryId, TokenMultiset> = BTreeMap::new();
        for c in 0..n_cats {
            let counts: TokenMultiset = (0..n_words)
                .map(|w| (format!("w{w:02}"), rng.gen_range(0..20)))
                .collect();
            rows.insert(format!("c{c}").into(), counts);
        }
        let table = ContingencyTable::build(ActionKind::Rt, &rows, 0);
        assert!(table.totals_consistent());
    }
}

// ---------------------------------------------------------------------------
// URL join vs nested-loop oracle
// ---------------------------------------------------------------------------

fn oracle_join(
    articles: &[Article],
    tweets: &[TweetRecord],
) -> BTreeMap<(TweetId, ArticleId), ReferencePair> {
    let mut best: BTreeMap<(TweetId, ArticleId), (usize, ReferencePair)> = BTreeMap::new();
    for (record_idx, tweet) in tweets.iter().enumerate() {
        for article in articles {
            if !tweet.urls.iter().any(|u| u == &article.url) {
                continue;
            }
            let pair = ReferencePair {
                tweet_id: tweet.id.clone(),
                article_id: article.id.clone(),
                rt_count: tweet.rt_count,
                like_count: tweet.like_count,
                created_at: tweet.created_at,
                category: article.category.clone(),
            };
            let key = (tweet.id.clone(), article.id.clone());
            match best.get(&key) {
                None => {
                    best.insert(key, (record_idx, pair));
                }
                Some((prev_idx, prev)) => {
                    let newer = pair.created_at > prev.created_at
                        || (pair.created_at == prev.created_at && record_idx > *prev_idx);
                    if newer {
                        best.insert(key, (record_idx, pair));
                    }
                }
            }
        }
    }
    best.into_iter().map(|(k, (_, p))| (k, p)).collect()
}

#[test]
fn join_matches_nested_loop_oracle_on_random_corpora() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for round in 0..40 {
        let n_articles = rng.gen_range(1..=50);
        let n_urls = rng.gen_range(1..=30);
        let articles: Vec<Article> = (0..n_articles)
            .map(|i| Article {
                id: format!("a{i}").into(),
                url: format!("http://news.test/{}", rng.gen_range(0..n_urls)),
                title: format!("title {i}"),
                category: format!("c{}", rng.gen_range(0..4)).into(),
                published_at: Utc.with_ymd_and_hms(2017, 1, 1, 0, 0, 0).unwrap(),
            })
            .collect();

        let n_tweets = rng.gen_range(0..=200);
        let tweets: Vec<TweetRecord> = (0..n_tweets)
            .map(|_| {
                // A small id pool makes duplicate records common.
                let id = format!("t{}", rng.gen_range(0..n_tweets.max(1)));
                let n_tweet_urls = rng.gen_range(0..=3);
                let urls = (0..n_tweet_urls)
                    .map(|_| {
                        if rng.gen_bool(0.8) {
                            format!("http://news.test/{}", rng.gen_range(0..n_urls + 5))
                        } else {
                            "http://elsewhere.test/x".to_owned()
                        }
                    })
                    .collect();
                TweetRecord {
                    id: id.into(),
                    created_at: Utc.with_ymd_and_hms(2017, 1, 1, 0, 0, 0).unwrap()
                        + Duration::seconds(rng.gen_range(0..100_000)),
                    rt_count: rng.gen_range(0..300),
                    like_count: rng.gen_range(0..300),
                    urls,
                }
            })
            .collect();

        let got: BTreeMap<(TweetId, ArticleId), ReferencePair> = match_references(
            &articles, &tweets,
        )
        .into_iter()
        .map(|p| ((p.tweet_id.clone(), p.article_id.clone()), p))
        .collect();
        let expected = oracle_join(&articles, &tweets);
        assert_eq!(got, expected, "round {round}");
    }
}

// ---------------------------------------------------------------------------
// Expected-dif vs brute-force Pearson chi-square
// ---------------------------------------------------------------------------

fn oracle_chi_square(cells: &[Vec<u64>]) -> f64 {
    let n_rows = cells.len();
    let n_cols = cells[0].len();
    let mut row_totals = vec![0.0f64; n_rows];
    let mut col_totals = vec![0.0f64; n_cols];
    let mut grand = 0.0f64;
    for (r, row) in cells.iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            row_totals[r] += v as f64;
            col_totals[c] += v as f64;
            grand += v as f64;
        }
    }
    let mut statistic = 0.0;
    for (r, row) in cells.iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            let expected = row_totals[r] * col_totals[c] / grand;
            if expected > 0.0 {
                let diff = v as f64 - expected;
                statistic += diff * diff / expected;
            }
        }
    }
    statistic
}

fn random_cells(rng: &mut ChaCha8Rng, max_cats: usize, max_words: usize) -> Vec<Vec<u64>> {
    let n_cats = rng.gen_range(1..=max_cats);
    let n_words = rng.gen_range(1..=max_words);
    loop {
        let cells: Vec<Vec<u64>> = (0..n_cats)
            .map(|_| {
                // Occasional all-zero rows exercise the E = 0 paths.
                if rng.gen_bool(0.05) {
                    vec![0; n_words]
                } else {
                    (0..n_words).map(|_| rng.gen_range(0..=50)).collect()
                }
            })
            .collect();
        if cells.iter().flatten().any(|&v| v > 0) {
            return cells;
        }
    }
}

fn table_from_cells(cells: &[Vec<u64>]) -> ContingencyTable {
    let rows: BTreeMap<CategoryId, TokenMultiset> = cells
        .iter()
        .enumerate()
        .map(|(r, row)| {
            let counts: TokenMultiset = row
                .iter()
                .enumerate()
                .map(|(w, &n)| (format!("w{w:03}"), n))
                .collect();
            (CategoryId::new(format!("c{r:02}")), counts)
        })
        .collect();
    ContingencyTable::build(ActionKind::Rt, &rows, 0)
}

fn summed_expected_dif(table: &ContingencyTable) -> f64 {
    table
        .categories()
        .iter()
        .map(|category| {
            expected_dif_scores_filtered(table, category, DirectionFilter::All)
                .unwrap()
                .iter()
                .map(|s| s.score)
                .sum::<f64>()
        })
        .sum()
}

#[test]
fn expected_dif_cells_sum_to_pearson_chi_square() {
    let mut rng = ChaCha8Rng::seed_from_u64(37);
    for round in 0..60 {
        let cells = random_cells(&mut rng, 8, 40);
        let table = table_from_cells(&cells);
        let total = summed_expected_dif(&table);
        let oracle = oracle_chi_square(&cells);
        assert!(
            rel_close(total, oracle, 1e-9),
            "round {round}: {total} vs {oracle}"
        );
    }
}

#[test]
fn expected_dif_scales_linearly_with_cell_counts() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..20 {
        let cells = random_cells(&mut rng, 6, 25);
        let table = table_from_cells(&cells);
        let category = table.categories()[0].clone();
        let base = expected_dif_scores_filtered(&table, &category, DirectionFilter::All).unwrap();
        for k in [2u64, 7, 100] {
            let scaled =
                expected_dif_scores_filtered(&table.scaled(k), &category, DirectionFilter::All)
                    .unwrap();
            assert_eq!(base.len(), scaled.len());
            for (b, s) in base.iter().zip(&scaled) {
                assert_eq!(b.word, s.word, "ranking order changed at k={k}");
                assert!(
                    rel_close(b.score * k as f64, s.score, 1e-9),
                    "{} * {k} vs {}",
                    b.score,
                    s.score
                );
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Descriptive statistics vs sort-based index oracle
// ---------------------------------------------------------------------------

fn oracle_quantiles(values: &[u64]) -> (f64, f64, f64) {
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    let pick = |slice: &[u64]| -> f64 {
        let n = slice.len();
        if n % 2 == 1 {
            slice[n / 2] as f64
        } else {
            (slice[n / 2 - 1] as f64 + slice[n / 2] as f64) / 2.0
        }
    };
    let n = sorted.len();
    let q50 = pick(&sorted);
    let (lower, upper): (&[u64], &[u64]) = if n % 2 == 1 {
        (&sorted[..n / 2], &sorted[n / 2 + 1..])
    } else {
        (&sorted[..n / 2], &sorted[n / 2..])
    };
    let q25 = if lower.is_empty() { q50 } else { pick(lower) };
    let q75 = if upper.is_empty() { q50 } else { pick(upper) };
    (q25, q50, q75)
}

#[test]
fn descriptive_stats_match_sort_based_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(53);
    for _ in 0..300 {
        let n = rng.gen_range(1..=60);
        let values: Vec<u64> = (0..n).map(|_| rng.gen_range(0..1000)).collect();
        let stats = descriptive_stats(&values).unwrap();
        let (q25, q50, q75) = oracle_quantiles(&values);
        assert_eq!(stats.quartiles.q25, q25);
        assert_eq!(stats.quartiles.q50, q50);
        assert_eq!(stats.quartiles.q75, q75);
        assert_eq!(stats.quartiles.max, *values.iter().max().unwrap());

        let mean = values.iter().map(|&v| v as f64).sum::<f64>() / values.len() as f64;
        assert!(rel_close(stats.mean, mean, 1e-12));
    }
}

// ---------------------------------------------------------------------------
// Longest-match segmentation vs linear-scan oracle
// ---------------------------------------------------------------------------

/// Greedy segmentation by scanning the whole dictionary at every position,
/// comparing character prefixes directly.
fn oracle_segment(title: &str, dict: &[String]) -> Vec<(String, bool)> {
    let chars: Vec<char> = title.chars().collect();
    let mut out = Vec::new();
    let mut pos = 0;
    while pos < chars.len() {
        let mut best: Option<&String> = None;
        for word in dict {
            let wchars: Vec<char> = word.chars().collect();
            if pos + wchars.len() <= chars.len() && chars[pos..pos + wchars.len()] == wchars[..] {
                let better = best.is_none_or(|b| b.chars().count() < wchars.len());
                if better {
                    best = Some(word);
                }
            }
        }
        match best {
            Some(word) => {
                out.push((word.clone(), false));
                pos += word.chars().count();
            }
            None => {
                out.push((chars[pos].to_string(), true));
                pos += 1;
            }
        }
    }
    out
}

#[test]
fn dictionary_segmentation_matches_oracle_on_short_strings() {
    let mut rng = ChaCha8Rng::seed_from_u64(67);
    let alphabet = ['a', 'b', 'c', 'd'];
    for round in 0..500 {
        let dict_size = rng.gen_range(1..=10);
        let dict: Vec<String> = (0..dict_size)
            .map(|_| {
                let len = rng.gen_range(1..=3);
                (0..len).map(|_| alphabet[rng.gen_range(0..4)]).collect()
            })
            .collect();
        let title: String = {
            let len = rng.gen_range(0..=8);
            (0..len).map(|_| alphabet[rng.gen_range(0..4)]).collect()
        };

        let expected_tokens = oracle_segment(&title, &dict);
        let mut expected = TokenMultiset::new();
        for (token, _) in &expected_tokens {
            *expected.entry(token.clone()).or_insert(0) += 1;
        }

        let tokenizer = Tokenizer::new(TokenizerSpec::dictionary(dict.clone())).unwrap();
        let got = tokenizer.tokenize_title(&title);
        assert_eq!(got, expected, "round {round}: title {title:?} dict {dict:?}");

        // Longest-match property: no emitted dictionary token extends
        // rightward to a longer dictionary word at the same offset.
        let chars: Vec<char> = title.chars().collect();
        let mut pos = 0;
        for (token, unknown) in &expected_tokens {
            let token_len = token.chars().count();
            if !unknown {
                for word in &dict {
                    let wchars: Vec<char> = word.chars().collect();
                    if wchars.len() > token_len
                        && pos + wchars.len() <= chars.len()
                        && chars[pos..pos + wchars.len()] == wchars[..]
                    {
                        panic!("token {token:?} at {pos} extendable to {word:?} in {title:?}");
                    }
                }
            }
            pos += token_len;
        }
    }
}

// ---------------------------------------------------------------------------
// Timestamp edge: bucket arithmetic around the origin
// ---------------------------------------------------------------------------

#[test]
fn bucket_index_matches_direct_division() {
    use keyness::analysis::TimeBucketSpec;
    let origin: DateTime<Utc> = Utc.with_ymd_and_hms(2017, 1, 1, 0, 0, 0).unwrap();
    let spec = TimeBucketSpec::weekly(origin);
    let week = 7 * 24 * 3600i64;
    let mut rng = ChaCha8Rng::seed_from_u64(71);
    for _ in 0..500 {
        let offset = rng.gen_range(-3 * week..10 * week);
        let idx = spec.index_of(origin + Duration::seconds(offset));
        let expected = offset.div_euclid(week);
        assert_eq!(idx, expected);
    }
}
