//! Report serialization: TSV and JSON-lines writers with atomic file
//! replacement.
//!
//! TSV floats carry six significant digits so golden files stay stable;
//! JSON lines keep full precision.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

use keyness::analysis::ScoredWordList;
use keyness::metrics::{CategoryStats, Direction};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Tsv,
    Jsonl,
}

impl OutputFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            OutputFormat::Tsv => "tsv",
            OutputFormat::Jsonl => "jsonl",
        }
    }
}

/// Six significant digits, plain decimal notation.
pub fn fmt_sig6(x: f64) -> String {
    if x.is_nan() {
        return "NaN".to_owned();
    }
    if x == 0.0 {
        return "0.00000".to_owned();
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (5 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

fn direction_label(d: Direction) -> &'static str {
    match d {
        Direction::Over => "over",
        Direction::Under => "under",
        Direction::Exact => "exact",
    }
}

/// Write via a temp file in the same directory, then rename into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("cannot create temp file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.persist(path)
        .with_context(|| format!("cannot replace {}", path.display()))?;
    Ok(())
}

/// Replace anything outside `[A-Za-z0-9_-]` so names stay filesystem-safe.
pub fn file_slug(s: &str) -> String {
    s.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

#[derive(Serialize)]
struct WordRow<'a> {
    rank: usize,
    word: &'a str,
    score: f64,
    observed: u64,
    expected: f64,
    direction: &'static str,
}

pub fn render_word_list(list: &ScoredWordList, format: OutputFormat) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    match format {
        OutputFormat::Tsv => {
            let mut text = String::from("rank\tword\tscore\tobserved\texpected\tdirection\n");
            for (i, entry) in list.entries.iter().enumerate() {
                writeln!(
                    text,
                    "{}\t{}\t{}\t{}\t{}\t{}",
                    i + 1,
                    entry.word,
                    fmt_sig6(entry.score),
                    entry.observed,
                    fmt_sig6(entry.expected),
                    direction_label(entry.direction)
                )?;
            }
            out.extend_from_slice(text.as_bytes());
        }
        OutputFormat::Jsonl => {
            for (i, entry) in list.entries.iter().enumerate() {
                let row = WordRow {
                    rank: i + 1,
                    word: &entry.word,
                    score: entry.score,
                    observed: entry.observed,
                    expected: entry.expected,
                    direction: direction_label(entry.direction),
                };
                serde_json::to_writer(&mut out, &row)?;
                out.push(b'\n');
            }
        }
    }
    Ok(out)
}

pub const STATS_COLUMNS: &str = "category\tn_pairs\tmedian_rt\tmedian_like\trt_like\t\
     mean_rt\tstd_rt\tq25_rt\tq50_rt\tq75_rt\tmax_rt\t\
     mean_like\tstd_like\tq25_like\tq50_like\tq75_like\tmax_like";

#[derive(Serialize)]
struct StatsRow<'a> {
    category: &'a str,
    n_pairs: u64,
    median_rt: f64,
    median_like: f64,
    rt_like: f64,
    mean_rt: f64,
    std_rt: f64,
    q25_rt: f64,
    q50_rt: f64,
    q75_rt: f64,
    max_rt: u64,
    mean_like: f64,
    std_like: f64,
    q25_like: f64,
    q50_like: f64,
    q75_like: f64,
    max_like: u64,
}

impl<'a> StatsRow<'a> {
    fn from_stats(stats: &'a CategoryStats) -> Self {
        Self {
            category: stats.category.as_str(),
            n_pairs: stats.n_pairs,
            median_rt: stats.median_rt,
            median_like: stats.median_like,
            rt_like: stats.rt_like,
            mean_rt: stats.mean_rt,
            std_rt: stats.std_rt,
            q25_rt: stats.quartiles_rt.q25,
            q50_rt: stats.quartiles_rt.q50,
            q75_rt: stats.quartiles_rt.q75,
            max_rt: stats.quartiles_rt.max,
            mean_like: stats.mean_like,
            std_like: stats.std_like,
            q25_like: stats.quartiles_like.q25,
            q50_like: stats.quartiles_like.q50,
            q75_like: stats.quartiles_like.q75,
            max_like: stats.quartiles_like.max,
        }
    }
}

pub fn render_stats(rows: &[CategoryStats], format: OutputFormat) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    match format {
        OutputFormat::Tsv => {
            let mut text = String::from(STATS_COLUMNS);
            text.push('\n');
            for stats in rows {
                let r = StatsRow::from_stats(stats);
                writeln!(
                    text,
                    "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                    r.category,
                    r.n_pairs,
                    fmt_sig6(r.median_rt),
                    fmt_sig6(r.median_like),
                    fmt_sig6(r.rt_like),
                    fmt_sig6(r.mean_rt),
                    fmt_sig6(r.std_rt),
                    fmt_sig6(r.q25_rt),
                    fmt_sig6(r.q50_rt),
                    fmt_sig6(r.q75_rt),
                    r.max_rt,
                    fmt_sig6(r.mean_like),
                    fmt_sig6(r.std_like),
                    fmt_sig6(r.q25_like),
                    fmt_sig6(r.q50_like),
                    fmt_sig6(r.q75_like),
                    r.max_like
                )?;
            }
            out.extend_from_slice(text.as_bytes());
        }
        OutputFormat::Jsonl => {
            for stats in rows {
                serde_json::to_writer(&mut out, &StatsRow::from_stats(stats))?;
                out.push(b'\n');
            }
        }
    }
    Ok(out)
}

#[derive(Serialize)]
pub struct DiceRow {
    pub category: String,
    pub k: usize,
    pub metric: &'static str,
    pub dice: f64,
}

pub fn render_dice(rows: &[DiceRow], format: OutputFormat) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    match format {
        OutputFormat::Tsv => {
            let mut text = String::from("category\tk\tmetric\tdice\n");
            for row in rows {
                writeln!(
                    text,
                    "{}\t{}\t{}\t{}",
                    row.category,
                    row.k,
                    row.metric,
                    fmt_sig6(row.dice)
                )?;
            }
            out.extend_from_slice(text.as_bytes());
        }
        OutputFormat::Jsonl => {
            for row in rows {
                serde_json::to_writer(&mut out, row)?;
                out.push(b'\n');
            }
        }
    }
    Ok(out)
}
