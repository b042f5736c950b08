//! The five subcommands: ingest, stats, extract, dice, trend.

use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use chrono::{DateTime, Utc};

use keyness::analysis::{
    dominance_similarity, extract_top_words, weekly_trend, weight_bags_by_pair_count,
    ActionCorpora, AnalysisQuery, Metric, ScoredWordList, TimeBucketSpec,
};
use keyness::corpus::{
    ActionKind, ArticleId, BagOfWords, CategoryId, CategorySet,
};
use keyness::ingest::{ingest_files, read_articles, DateRange, IngestConfig};
use keyness::metrics::{CategoryStats, DirectionFilter};
use keyness::snapshot::{read_snapshot, write_snapshot, Snapshot};
use keyness::tokenize::{
    filter_pretokenized, parse_pretokenized, read_stopwords, Tokenizer, TokenizerKind,
    TokenizerSpec,
};

use crate::config::{
    parse_timestamp, pick, pick_opt, require, resolve_drop_classes, resolve_requested,
    resolve_universe, ActionChoice, DirectionChoice, FileConfig, FormatChoice, MetricChoice,
    TokenizerChoice, WeightingChoice,
};
use crate::output::{
    file_slug, render_dice, render_stats, render_word_list, write_atomic, DiceRow, OutputFormat,
};

// ---------------------------------------------------------------------------
// Flag groups
// ---------------------------------------------------------------------------

#[derive(Debug, clap::Args)]
pub struct IoArgs {
    /// Snapshot file produced by `keyness ingest`.
    #[arg(long)]
    pub snapshot: Option<PathBuf>,
    /// Articles file; needed to tokenize titles unless the tokenizer is
    /// `external`.
    #[arg(long)]
    pub articles: Option<PathBuf>,
    /// Directory receiving output files (created if absent).
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Output file format.
    #[arg(long, value_enum)]
    pub format: Option<FormatChoice>,
    /// Category universe as a comma-separated list (defaults to the built-in
    /// twelve-category news set).
    #[arg(long, value_delimiter = ',')]
    pub category_set: Vec<String>,
}

#[derive(Debug, clap::Args)]
pub struct TokenArgs {
    /// Tokenizer for article titles.
    #[arg(long, value_enum)]
    pub tokenizer: Option<TokenizerChoice>,
    /// Word list for the dictionary tokenizer (one word per line).
    #[arg(long)]
    pub dictionary: Option<PathBuf>,
    /// Pre-tokenized titles for the external tokenizer
    /// (`article_id TAB token token/Class ...`).
    #[arg(long)]
    pub pretokenized: Option<PathBuf>,
    /// Stopword list, one word per line.
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
    /// Token class to drop (repeatable): symbol, numeral, unknown, stopword,
    /// or none. Default: symbol and unknown.
    #[arg(long = "drop-class")]
    pub drop_classes: Vec<String>,
}

#[derive(Debug, clap::Args)]
pub struct QueryArgs {
    /// Scoring metric.
    #[arg(long, value_enum)]
    pub metric: Option<MetricChoice>,
    /// Which engagement action(s) to analyze.
    #[arg(long, value_enum)]
    pub action: Option<ActionChoice>,
    /// Category to analyze (repeatable); default is every category present.
    #[arg(long = "category")]
    pub categories: Vec<String>,
    /// List length per query.
    #[arg(long)]
    pub top_k: Option<usize>,
    /// Drop words whose summed occurrence count is below this.
    #[arg(long)]
    pub min_word_total: Option<u64>,
    /// Keep only over-represented words (expected-dif) or the full list.
    #[arg(long, value_enum)]
    pub direction: Option<DirectionChoice>,
    /// Count each title once per article or once per referencing tweet.
    #[arg(long, value_enum)]
    pub weighting: Option<WeightingChoice>,
}

#[derive(Debug, clap::Args)]
pub struct IngestArgs {
    /// Articles file, one JSON record per line.
    #[arg(long)]
    pub articles: Option<PathBuf>,
    /// Tweets file, one JSON record per line.
    #[arg(long)]
    pub tweets: Option<PathBuf>,
    /// Snapshot file to write.
    #[arg(long)]
    pub snapshot: Option<PathBuf>,
    /// Optional JSON ingest report file.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Minimum retweet count (inclusive).
    #[arg(long)]
    pub min_rt: Option<u64>,
    /// Minimum Like count (inclusive).
    #[arg(long)]
    pub min_like: Option<u64>,
    /// Category to exclude from the snapshot (repeatable).
    #[arg(long = "exclude-category")]
    pub exclude_categories: Vec<String>,
    /// Keep only tweets created at or after this RFC 3339 timestamp.
    #[arg(long)]
    pub date_start: Option<String>,
    /// Keep only tweets created at or before this RFC 3339 timestamp.
    #[arg(long)]
    pub date_end: Option<String>,
    /// Category universe as a comma-separated list.
    #[arg(long, value_delimiter = ',')]
    pub category_set: Vec<String>,
}

#[derive(Debug, clap::Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub snapshot: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<FormatChoice>,
}

#[derive(Debug, clap::Args)]
pub struct ExtractArgs {
    #[command(flatten)]
    pub io: IoArgs,
    #[command(flatten)]
    pub tokens: TokenArgs,
    #[command(flatten)]
    pub query: QueryArgs,
}

#[derive(Debug, clap::Args)]
pub struct DiceArgs {
    #[command(flatten)]
    pub io: IoArgs,
    #[command(flatten)]
    pub tokens: TokenArgs,
    #[command(flatten)]
    pub query: QueryArgs,
    /// Vocabulary size compared per side.
    #[arg(long, short = 'k')]
    pub dice_k: Option<usize>,
}

#[derive(Debug, clap::Args)]
pub struct TrendArgs {
    #[command(flatten)]
    pub io: IoArgs,
    #[command(flatten)]
    pub tokens: TokenArgs,
    #[command(flatten)]
    pub query: QueryArgs,
    /// Bucket width in days.
    #[arg(long)]
    pub bucket_days: Option<i64>,
    /// Bucket origin as RFC 3339; default is the earliest pair timestamp.
    #[arg(long)]
    pub origin: Option<String>,
}

// ---------------------------------------------------------------------------
// Shared helpers
// ---------------------------------------------------------------------------

fn read_snapshot_file(path: &Path) -> Result<Snapshot> {
    let file =
        File::open(path).with_context(|| format!("cannot open snapshot {}", path.display()))?;
    read_snapshot(BufReader::new(file))
        .with_context(|| format!("cannot read snapshot {}", path.display()))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("cannot create output directory {}", dir.display()))
}

fn open_words(path: &Path) -> Result<BTreeSet<String>> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    read_stopwords(BufReader::new(file))
        .with_context(|| format!("cannot read {}", path.display()))
}

struct TokenizerSettings {
    choice: TokenizerChoice,
    dictionary: Option<PathBuf>,
    pretokenized: Option<PathBuf>,
    stopwords: Option<PathBuf>,
    drop_classes: BTreeSet<keyness::tokenize::TokenClass>,
}

impl TokenizerSettings {
    fn resolve(args: &TokenArgs, file: &FileConfig) -> Result<Self> {
        Ok(Self {
            choice: pick(args.tokenizer, file.tokenizer, TokenizerChoice::Whitespace),
            dictionary: pick_opt(args.dictionary.clone(), file.dictionary.clone()),
            pretokenized: pick_opt(args.pretokenized.clone(), file.pretokenized.clone()),
            stopwords: pick_opt(args.stopwords.clone(), file.stopwords.clone()),
            drop_classes: resolve_drop_classes(&args.drop_classes, file.drop_classes.as_deref())?,
        })
    }

    fn spec(&self, kind: TokenizerKind) -> Result<TokenizerSpec> {
        let mut spec = TokenizerSpec {
            kind,
            dictionary: None,
            drop_classes: self.drop_classes.clone(),
            stopword_list: None,
        };
        if let Some(path) = &self.stopwords {
            spec.stopword_list = Some(open_words(path)?);
        }
        if kind == TokenizerKind::DictionaryLongestMatch {
            let path = require(self.dictionary.as_ref(), "dictionary file")?;
            spec.dictionary = Some(open_words(path)?);
        }
        Ok(spec)
    }

    /// Build bags for every article the tokenizer source knows about.
    fn build_bags(
        &self,
        articles: Option<&Path>,
        universe: &CategorySet,
    ) -> Result<HashMap<ArticleId, BagOfWords>> {
        match self.choice {
            TokenizerChoice::Whitespace | TokenizerChoice::Dictionary => {
                let kind = match self.choice {
                    TokenizerChoice::Whitespace => TokenizerKind::Whitespace,
                    _ => TokenizerKind::DictionaryLongestMatch,
                };
                let articles_path =
                    require(articles, "articles file (required by this tokenizer)")?;
                let tokenizer = Tokenizer::new(self.spec(kind)?)?;
                let (articles, _) = read_articles(articles_path, universe)?;
                Ok(articles
                    .into_iter()
                    .map(|a| {
                        let tokens = tokenizer.tokenize_title(&a.title);
                        (a.id.clone(), BagOfWords::new(a.id, tokens))
                    })
                    .collect())
            }
            TokenizerChoice::External => {
                let path = require(self.pretokenized.as_ref(), "pretokenized file")?;
                let spec = self.spec(TokenizerKind::External)?;
                let file = File::open(path)
                    .with_context(|| format!("cannot open {}", path.display()))?;
                let parsed = parse_pretokenized(BufReader::new(file))
                    .with_context(|| format!("cannot parse {}", path.display()))?;
                Ok(parsed
                    .into_iter()
                    .map(|(id, tokens)| {
                        let bag = filter_pretokenized(&tokens, &spec);
                        (id.clone(), BagOfWords::new(id, bag))
                    })
                    .collect())
            }
        }
    }
}

struct QuerySettings {
    metrics: Vec<Metric>,
    actions: Vec<ActionKind>,
    requested: Vec<CategoryId>,
    top_k: usize,
    min_word_total: u64,
    direction: DirectionFilter,
    weighting: WeightingChoice,
}

impl QuerySettings {
    fn resolve(args: &QueryArgs, file: &FileConfig, universe: &CategorySet) -> Result<Self> {
        Ok(Self {
            metrics: pick(args.metric, file.metric, MetricChoice::ExpectedDif).metrics(),
            actions: pick(args.action, file.action, ActionChoice::Both).actions(),
            requested: resolve_requested(
                &args.categories,
                file.requested_categories.as_deref(),
                universe,
            )?,
            top_k: pick(args.top_k, file.top_k, 20).max(1),
            min_word_total: pick(args.min_word_total, file.min_word_total, 1),
            direction: pick(args.direction, file.direction, DirectionChoice::Over).into(),
            weighting: pick(args.weighting, file.weighting, WeightingChoice::PerArticle),
        })
    }

    fn query(&self, action: ActionKind, metric: Metric, category: CategoryId) -> AnalysisQuery {
        let mut query = AnalysisQuery::new(action, metric, category).top_k(self.top_k);
        query.min_word_total = self.min_word_total;
        query.direction = self.direction;
        query
    }
}

struct AnalysisContext {
    snapshot: Snapshot,
    bags: HashMap<ArticleId, BagOfWords>,
    corpora: ActionCorpora,
    out_dir: PathBuf,
    format: OutputFormat,
    settings: QuerySettings,
}

impl AnalysisContext {
    fn prepare(io: &IoArgs, tokens: &TokenArgs, query: &QueryArgs, file: &FileConfig) -> Result<Self> {
        let snapshot_path = require(
            pick_opt(io.snapshot.clone(), file.snapshot.clone()),
            "snapshot",
        )?;
        let out_dir = require(pick_opt(io.out_dir.clone(), file.out_dir.clone()), "out-dir")?;
        let format = match pick(io.format, file.format, FormatChoice::Tsv) {
            FormatChoice::Tsv => OutputFormat::Tsv,
            FormatChoice::Jsonl => OutputFormat::Jsonl,
        };
        let universe = resolve_universe(
            (!io.category_set.is_empty()).then(|| io.category_set.clone()),
            file.categories.clone(),
        )?;
        let settings = QuerySettings::resolve(query, file, &universe)?;

        let snapshot = read_snapshot_file(&snapshot_path)?;
        let tokenizer = TokenizerSettings::resolve(tokens, file)?;
        let articles_path = pick_opt(io.articles.clone(), file.articles.clone());
        let mut bags = tokenizer.build_bags(articles_path.as_deref(), &universe)?;
        if settings.weighting == WeightingChoice::PerTweet {
            bags = weight_bags_by_pair_count(&bags, &snapshot.pairs);
        }
        let corpora = ActionCorpora::build(&snapshot.engagements, &bags)?;
        Ok(Self {
            snapshot,
            bags,
            corpora,
            out_dir,
            format,
            settings,
        })
    }

    /// Requested categories, or every category present on at least one side.
    fn target_categories(&self) -> Vec<CategoryId> {
        if !self.settings.requested.is_empty() {
            return self.settings.requested.clone();
        }
        let mut all: BTreeSet<CategoryId> = self.corpora.rt.categories().cloned().collect();
        all.extend(self.corpora.like.categories().cloned());
        all.into_iter().collect()
    }
}

// ---------------------------------------------------------------------------
// ingest
// ---------------------------------------------------------------------------

pub fn cmd_ingest(args: IngestArgs, file: FileConfig) -> Result<()> {
    let articles = require(pick_opt(args.articles, file.articles.clone()), "articles")?;
    let tweets = require(pick_opt(args.tweets, file.tweets.clone()), "tweets")?;
    let snapshot_path = require(pick_opt(args.snapshot, file.snapshot.clone()), "snapshot")?;
    let report_path = pick_opt(args.report, file.report.clone());
    let universe = resolve_universe(
        (!args.category_set.is_empty()).then_some(args.category_set),
        file.categories.clone(),
    )?;

    let mut cfg = IngestConfig {
        min_rt: pick(args.min_rt, file.min_rt, 10),
        min_like: pick(args.min_like, file.min_like, 10),
        ..Default::default()
    };
    let excluded = if !args.exclude_categories.is_empty() {
        args.exclude_categories
    } else {
        file.exclude_categories.clone().unwrap_or_default()
    };
    cfg.excluded_categories = excluded.into_iter().map(CategoryId::new).collect();

    let start = pick_opt(args.date_start, file.date_start.clone())
        .map(|s| parse_timestamp(&s, "date-start"))
        .transpose()?;
    let end = pick_opt(args.date_end, file.date_end.clone())
        .map(|s| parse_timestamp(&s, "date-end"))
        .transpose()?;
    cfg.date_range = match (start, end) {
        (Some(start), Some(end)) => Some(DateRange::new(start, end)?),
        (None, None) => None,
        _ => bail!("date-start and date-end must be given together"),
    };

    let out = ingest_files(&articles, &tweets, &cfg, &universe)?;
    eprintln!("{}", out.report);

    let snapshot = Snapshot::new(out.pairs, out.engagements);
    let mut buf = Vec::new();
    write_snapshot(&mut buf, &snapshot)?;
    if let Some(parent) = snapshot_path.parent().filter(|p| !p.as_os_str().is_empty()) {
        ensure_dir(parent)?;
    }
    write_atomic(&snapshot_path, &buf)?;
    eprintln!("snapshot: {}", snapshot_path.display());

    if let Some(report_path) = report_path {
        let mut json = serde_json::to_vec_pretty(&out.report)?;
        json.push(b'\n');
        if let Some(parent) = report_path.parent().filter(|p| !p.as_os_str().is_empty()) {
            ensure_dir(parent)?;
        }
        write_atomic(&report_path, &json)?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// stats
// ---------------------------------------------------------------------------

pub fn cmd_stats(args: StatsArgs, file: FileConfig) -> Result<()> {
    let snapshot_path = require(pick_opt(args.snapshot, file.snapshot.clone()), "snapshot")?;
    let out_dir = require(pick_opt(args.out_dir, file.out_dir.clone()), "out-dir")?;
    let format = match pick(args.format, file.format, FormatChoice::Tsv) {
        FormatChoice::Tsv => OutputFormat::Tsv,
        FormatChoice::Jsonl => OutputFormat::Jsonl,
    };

    let snapshot = read_snapshot_file(&snapshot_path)?;
    let mut grouped: std::collections::BTreeMap<CategoryId, (Vec<u64>, Vec<u64>)> =
        std::collections::BTreeMap::new();
    let mut all_rt = Vec::with_capacity(snapshot.pairs.len());
    let mut all_like = Vec::with_capacity(snapshot.pairs.len());
    for pair in &snapshot.pairs {
        let slot = grouped.entry(pair.category.clone()).or_default();
        slot.0.push(pair.rt_count);
        slot.1.push(pair.like_count);
        all_rt.push(pair.rt_count);
        all_like.push(pair.like_count);
    }

    let mut rows = Vec::with_capacity(grouped.len() + 1);
    for (category, (rt, like)) in &grouped {
        rows.push(CategoryStats::compute(category.clone(), rt, like)?);
    }
    if !all_rt.is_empty() {
        rows.push(CategoryStats::compute("Total".into(), &all_rt, &all_like)?);
    }

    ensure_dir(&out_dir)?;
    let path = out_dir.join(format!("stats.{}", format.extension()));
    write_atomic(&path, &render_stats(&rows, format)?)?;
    eprintln!(
        "stats: {} categories, {} pairs -> {}",
        grouped.len(),
        snapshot.pairs.len(),
        path.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// extract
// ---------------------------------------------------------------------------

pub fn cmd_extract(args: ExtractArgs, file: FileConfig) -> Result<()> {
    let ctx = AnalysisContext::prepare(&args.io, &args.tokens, &args.query, &file)?;
    ensure_dir(&ctx.out_dir)?;

    let mut written = 0usize;
    for category in ctx.target_categories() {
        for &action in &ctx.settings.actions {
            for &metric in &ctx.settings.metrics {
                let list = if ctx.corpora.get(action).has_category(&category) {
                    extract_top_words(
                        &ctx.settings.query(action, metric, category.clone()),
                        &ctx.corpora,
                    )?
                } else {
                    ScoredWordList {
                        category: category.clone(),
                        action,
                        metric,
                        bucket: None,
                        entries: Vec::new(),
                    }
                };
                let name = format!(
                    "extract_{}_{}_{}.{}",
                    file_slug(category.as_str()),
                    action.slug(),
                    metric.slug(),
                    ctx.format.extension()
                );
                write_atomic(&ctx.out_dir.join(name), &render_word_list(&list, ctx.format)?)?;
                written += 1;
            }
        }
    }
    eprintln!("extract: wrote {written} file(s) to {}", ctx.out_dir.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// dice
// ---------------------------------------------------------------------------

pub fn cmd_dice(args: DiceArgs, file: FileConfig) -> Result<()> {
    let k = pick(args.dice_k, file.dice_k, 100).max(1);
    let ctx = AnalysisContext::prepare(&args.io, &args.tokens, &args.query, &file)?;
    if ctx.settings.metrics.len() != 1 {
        bail!("dice compares vocabularies under a single metric; pick one with --metric");
    }
    let metric = ctx.settings.metrics[0];
    ensure_dir(&ctx.out_dir)?;

    let categories = if ctx.settings.requested.is_empty() {
        // Default: categories with articles on both dominance sides.
        ctx.corpora
            .rt
            .categories()
            .filter(|c| ctx.corpora.like.has_category(c))
            .cloned()
            .collect()
    } else {
        ctx.settings.requested.clone()
    };

    let mut rows = Vec::with_capacity(categories.len());
    for category in categories {
        let dice = dominance_similarity(&ctx.corpora, &category, k, metric)?;
        rows.push(DiceRow {
            category: category.as_str().to_owned(),
            k,
            metric: metric.slug(),
            dice,
        });
    }

    let path = ctx.out_dir.join(format!("dice.{}", ctx.format.extension()));
    write_atomic(&path, &render_dice(&rows, ctx.format)?)?;
    eprintln!("dice: {} categories -> {}", rows.len(), path.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// trend
// ---------------------------------------------------------------------------

pub fn cmd_trend(args: TrendArgs, file: FileConfig) -> Result<()> {
    let bucket_days = pick(args.bucket_days, file.bucket_days, 7);
    if bucket_days < 1 {
        bail!("bucket-days must be at least 1");
    }
    let origin_flag = pick_opt(args.origin.clone(), file.origin.clone())
        .map(|s| parse_timestamp(&s, "origin"))
        .transpose()?;

    let ctx = AnalysisContext::prepare(&args.io, &args.tokens, &args.query, &file)?;
    ensure_dir(&ctx.out_dir)?;

    let origin: Option<DateTime<Utc>> =
        origin_flag.or_else(|| ctx.snapshot.pairs.iter().map(|p| p.created_at).min());
    let Some(origin) = origin else {
        eprintln!("trend: snapshot has no pairs; nothing to do");
        return Ok(());
    };
    let spec = TimeBucketSpec::new(origin, chrono::Duration::days(bucket_days))?;

    let mut written = 0usize;
    let mut out_of_range = 0u64;
    for category in ctx.target_categories() {
        for &action in &ctx.settings.actions {
            for &metric in &ctx.settings.metrics {
                let mut query = ctx.settings.query(action, metric, category.clone());
                query.time_bucket = Some(spec);
                let trend = weekly_trend(&query, &ctx.snapshot.pairs, &ctx.bags)?;
                out_of_range = trend.out_of_range;
                for list in &trend.buckets {
                    let bucket = list.bucket.expect("trend lists carry bucket info");
                    let name = format!(
                        "trend_{}_{}_{}_b{}_{}.{}",
                        file_slug(category.as_str()),
                        action.slug(),
                        metric.slug(),
                        bucket.index,
                        bucket.start.format("%Y-%m-%d"),
                        ctx.format.extension()
                    );
                    write_atomic(&ctx.out_dir.join(name), &render_word_list(list, ctx.format)?)?;
                    written += 1;
                }
            }
        }
    }
    if out_of_range > 0 {
        eprintln!("trend: {out_of_range} pair(s) before the origin were excluded");
    }
    eprintln!("trend: wrote {written} file(s) to {}", ctx.out_dir.display());
    Ok(())
}
