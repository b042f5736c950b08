//! End-to-end tests driving the `keyness` binary on the bundled fixture and
//! on small synthetic corpora.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Output;

use chrono::{TimeZone, Utc};

use keyness::corpus::{ArticleEngagement, ReferencePair};
use keyness::snapshot::{read_snapshot, write_snapshot, Snapshot};

fn keyness_bin(args: &[&str]) -> Output {
    std::process::Command::new(env!("CARGO_BIN_EXE_keyness"))
        .args(args)
        .output()
        .expect("binary should run")
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn stderr_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn ingest_fixture(dir: &Path) -> PathBuf {
    let snapshot = dir.join("snapshot.jsonl");
    let output = keyness_bin(&[
        "ingest",
        "--articles",
        path_str(&fixture("articles.jsonl")),
        "--tweets",
        path_str(&fixture("tweets.jsonl")),
        "--snapshot",
        path_str(&snapshot),
        "--report",
        path_str(&dir.join("report.json")),
    ]);
    assert!(output.status.success(), "ingest failed: {}", stderr_of(&output));
    snapshot
}

#[test]
fn ingest_fixture_produces_the_known_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let snapshot_path = ingest_fixture(dir.path());

    let snapshot =
        read_snapshot(std::io::BufReader::new(fs::File::open(&snapshot_path).unwrap())).unwrap();
    assert_eq!(snapshot.pairs.len(), 11);
    assert_eq!(snapshot.engagements.len(), 7);

    // The duplicate t01 record resolves to the later snapshot (35, 22).
    let t01 = snapshot
        .pairs
        .iter()
        .find(|p| p.tweet_id.as_str() == "t01")
        .unwrap();
    assert_eq!((t01.rt_count, t01.like_count), (35, 22));
    assert_eq!(t01.created_at, Utc.with_ymd_and_hms(2017, 1, 5, 9, 0, 0).unwrap());

    let by_id = |id: &str| {
        snapshot
            .engagements
            .iter()
            .find(|e| e.article_id.as_str() == id)
    };
    let a1 = by_id("a1").unwrap();
    assert_eq!((a1.n_rt, a1.n_like), (50, 62));
    assert_eq!(a1.dominance, keyness::corpus::Dominance::LikeDominant);
    let a3 = by_id("a3").unwrap();
    assert_eq!(a3.dominance, keyness::corpus::Dominance::RtDominant);
    let a4 = by_id("a4").unwrap();
    assert_eq!(a4.dominance, keyness::corpus::Dominance::Tie);
    assert!(by_id("a8").is_none(), "a8 has no surviving pairs");

    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["articles_parsed"], 8);
    assert_eq!(report["tweets_parsed"], 20);
    assert_eq!(report["tweets_unmatched"], 3);
    assert_eq!(report["tweet_urls_unparseable"], 1);
    assert_eq!(report["pairs_matched"], 17);
    assert_eq!(report["pairs_filtered_out"], 6);
    assert_eq!(report["pairs_kept"], 11);
    assert_eq!(report["ties"], 1);
}

#[test]
fn empty_tweets_file_gives_empty_snapshot_and_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    let tweets = dir.path().join("tweets.jsonl");
    fs::write(&tweets, "").unwrap();
    let snapshot_path = dir.path().join("snapshot.jsonl");
    let output = keyness_bin(&[
        "ingest",
        "--articles",
        path_str(&fixture("articles.jsonl")),
        "--tweets",
        path_str(&tweets),
        "--snapshot",
        path_str(&snapshot_path),
    ]);
    assert!(output.status.success());
    assert!(stderr_of(&output).contains("0 kept"));

    let snapshot =
        read_snapshot(std::io::BufReader::new(fs::File::open(&snapshot_path).unwrap())).unwrap();
    assert!(snapshot.pairs.is_empty());
}

#[test]
fn malformed_line_fails_naming_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let tweets = dir.path().join("tweets.jsonl");
    let good = r#"{"id":"t1","created_at":"2017-01-02T00:00:00Z","rt_count":20,"like_count":20,"urls":[]}"#;
    fs::write(&tweets, format!("{good}\n{good}\nnot json at all\n")).unwrap();
    let output = keyness_bin(&[
        "ingest",
        "--articles",
        path_str(&fixture("articles.jsonl")),
        "--tweets",
        path_str(&tweets),
        "--snapshot",
        path_str(&dir.path().join("snapshot.jsonl")),
    ]);
    assert!(!output.status.success());
    let stderr = stderr_of(&output);
    assert!(stderr.contains(":3"), "stderr should name line 3: {stderr}");
}

#[test]
fn missing_input_file_fails_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let output = keyness_bin(&[
        "ingest",
        "--articles",
        "/nonexistent/articles.jsonl",
        "--tweets",
        path_str(&fixture("tweets.jsonl")),
        "--snapshot",
        path_str(&dir.path().join("s.jsonl")),
    ]);
    assert!(!output.status.success());
    assert!(stderr_of(&output).contains("articles.jsonl"));
}

#[test]
fn stats_reports_fixture_categories() {
    let dir = tempfile::tempdir().unwrap();
    let snapshot = ingest_fixture(dir.path());
    let out_dir = dir.path().join("out");
    let output = keyness_bin(&[
        "stats",
        "--snapshot",
        path_str(&snapshot),
        "--out-dir",
        path_str(&out_dir),
    ]);
    assert!(output.status.success(), "{}", stderr_of(&output));

    let stats = fs::read_to_string(out_dir.join("stats.tsv")).unwrap();
    let mut lines = stats.lines();
    assert!(lines.next().unwrap().starts_with("category\tn_pairs\tmedian_rt"));
    // economy pairs: (50, 10) and (10, 10) → medians 30 / 10, ratio 3.
    assert!(
        stats.contains("economy\t2\t30.0000\t10.0000\t3.00000"),
        "unexpected stats: {stats}"
    );
    // Total over all 11 pairs: medians 15 / 22.
    assert!(
        stats.contains("Total\t11\t15.0000\t22.0000\t0.681818"),
        "unexpected stats: {stats}"
    );
}

#[test]
fn extract_writes_one_file_per_query_and_header_only_for_absent_category() {
    let dir = tempfile::tempdir().unwrap();
    let snapshot = ingest_fixture(dir.path());
    let out_dir = dir.path().join("out");
    let output = keyness_bin(&[
        "extract",
        "--snapshot",
        path_str(&snapshot),
        "--articles",
        path_str(&fixture("articles.jsonl")),
        "--out-dir",
        path_str(&out_dir),
        "--metric",
        "all",
        "--category",
        "economy",
        "--category",
        "world",
    ]);
    assert!(output.status.success(), "{}", stderr_of(&output));

    // economy is RT-dominant only; its Like-side files carry just the header.
    let rt_count = fs::read_to_string(out_dir.join("extract_economy_rt_count.tsv")).unwrap();
    assert!(rt_count.lines().count() > 1);
    assert!(rt_count.starts_with("rank\tword\tscore\tobserved\texpected\tdirection\n"));
    let like_count = fs::read_to_string(out_dir.join("extract_economy_like_count.tsv")).unwrap();
    assert_eq!(like_count.lines().count(), 1);

    // "world" is a valid category with no fixture articles at all.
    let world =
        fs::read_to_string(out_dir.join("extract_world_rt_expected-dif.tsv")).unwrap();
    assert_eq!(world.lines().count(), 1);

    // 2 categories x 2 actions x 3 metrics.
    assert_eq!(fs::read_dir(&out_dir).unwrap().count(), 12);
}

#[test]
fn extract_rejects_categories_outside_the_universe() {
    let dir = tempfile::tempdir().unwrap();
    let snapshot = ingest_fixture(dir.path());
    let output = keyness_bin(&[
        "extract",
        "--snapshot",
        path_str(&snapshot),
        "--articles",
        path_str(&fixture("articles.jsonl")),
        "--out-dir",
        path_str(&dir.path().join("out")),
        "--category",
        "bogus",
    ]);
    assert!(!output.status.success());
    assert!(stderr_of(&output).contains("bogus"));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("run1");
    let second = dir.path().join("run2");
    fs::create_dir_all(&first).unwrap();
    fs::create_dir_all(&second).unwrap();

    for run in [&first, &second] {
        let snapshot = run.join("snapshot.jsonl");
        let output = keyness_bin(&[
            "ingest",
            "--articles",
            path_str(&fixture("articles.jsonl")),
            "--tweets",
            path_str(&fixture("tweets.jsonl")),
            "--snapshot",
            path_str(&snapshot),
            "--report",
            path_str(&run.join("report.json")),
        ]);
        assert!(output.status.success());
        let output = keyness_bin(&[
            "extract",
            "--snapshot",
            path_str(&snapshot),
            "--articles",
            path_str(&fixture("articles.jsonl")),
            "--out-dir",
            path_str(&run.join("out")),
            "--metric",
            "all",
        ]);
        assert!(output.status.success(), "{}", stderr_of(&output));
    }

    assert_eq!(
        fs::read(first.join("snapshot.jsonl")).unwrap(),
        fs::read(second.join("snapshot.jsonl")).unwrap()
    );
    assert_eq!(
        fs::read(first.join("report.json")).unwrap(),
        fs::read(second.join("report.json")).unwrap()
    );
    let mut names: Vec<String> = fs::read_dir(first.join("out"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert!(!names.is_empty());
    for name in names {
        assert_eq!(
            fs::read(first.join("out").join(&name)).unwrap(),
            fs::read(second.join("out").join(&name)).unwrap(),
            "{name} differs between runs"
        );
    }
}

// ---------------------------------------------------------------------------
// Synthetic snapshots for dice / trend / planted-word checks
// ---------------------------------------------------------------------------

fn write_lines(path: &Path, lines: &[String]) {
    fs::write(path, lines.join("\n") + "\n").unwrap();
}

fn article_line(id: &str, category: &str, title: &str) -> String {
    format!(
        r#"{{"id":"{id}","url":"http://n.test/{id}","title":"{title}","category":"{category}","published_at":"2017-01-01T00:00:00Z"}}"#
    )
}

fn synthetic_pair(tweet: &str, article: &str, category: &str, rt: u64, like: u64, day: u32) -> ReferencePair {
    ReferencePair {
        tweet_id: tweet.into(),
        article_id: article.into(),
        rt_count: rt,
        like_count: like,
        created_at: Utc.with_ymd_and_hms(2017, 1, day, 12, 0, 0).unwrap(),
        category: category.into(),
    }
}

fn write_synthetic_snapshot(path: &Path, pairs: Vec<ReferencePair>) {
    let engagements = keyness::ingest::aggregate_article_engagement(&pairs);
    let snapshot = Snapshot::new(pairs, engagements);
    let mut buf = Vec::new();
    write_snapshot(&mut buf, &snapshot).unwrap();
    fs::write(path, buf).unwrap();
}

#[test]
fn dice_reports_identical_and_disjoint_vocabularies() {
    let dir = tempfile::tempdir().unwrap();

    // cat_same: both sides share one vocabulary. cat_diff: disjoint.
    let articles: Vec<String> = vec![
        article_line("s_rt", "cat_same", "shared words here"),
        article_line("s_like", "cat_same", "shared words here"),
        article_line("d_rt", "cat_diff", "unrelated things"),
        article_line("d_like", "cat_diff", "different matters"),
    ];
    let articles_path = dir.path().join("articles.jsonl");
    write_lines(&articles_path, &articles);

    let pairs = vec![
        synthetic_pair("t1", "s_rt", "cat_same", 90, 10, 2),
        synthetic_pair("t2", "s_like", "cat_same", 10, 90, 2),
        synthetic_pair("t3", "d_rt", "cat_diff", 90, 10, 2),
        synthetic_pair("t4", "d_like", "cat_diff", 10, 90, 2),
    ];
    let snapshot_path = dir.path().join("snapshot.jsonl");
    write_synthetic_snapshot(&snapshot_path, pairs);

    let out_dir = dir.path().join("out");
    let output = keyness_bin(&[
        "dice",
        "--snapshot",
        path_str(&snapshot_path),
        "--articles",
        path_str(&articles_path),
        "--out-dir",
        path_str(&out_dir),
        "--category-set",
        "cat_same,cat_diff",
        "--metric",
        "count",
    ]);
    assert!(output.status.success(), "{}", stderr_of(&output));

    let dice = fs::read_to_string(out_dir.join("dice.tsv")).unwrap();
    assert!(dice.contains("cat_same\t100\tcount\t1.00000"), "{dice}");
    assert!(dice.contains("cat_diff\t100\tcount\t0.00000"), "{dice}");
}

#[test]
fn planted_word_tops_expected_dif_but_not_count() {
    let dir = tempfile::tempdir().unwrap();

    // Every title shares "all all zfill"; cat_a's RT-dominant articles also
    // carry "planted" half of the time.
    let mut articles = Vec::new();
    let mut pairs = Vec::new();
    for (c, category) in ["cat_a", "cat_b", "cat_c"].iter().enumerate() {
        for i in 0..20 {
            let rt_id = format!("{category}_rt{i}");
            let title = if *category == "cat_a" && i < 10 {
                "all all zfill planted"
            } else {
                "all all zfill"
            };
            articles.push(article_line(&rt_id, category, title));
            pairs.push(synthetic_pair(
                &format!("t_rt_{c}_{i}"),
                &rt_id,
                category,
                100,
                10,
                2,
            ));

            let like_id = format!("{category}_like{i}");
            articles.push(article_line(&like_id, category, "all all zfill"));
            pairs.push(synthetic_pair(
                &format!("t_like_{c}_{i}"),
                &like_id,
                category,
                10,
                100,
                2,
            ));
        }
    }
    let articles_path = dir.path().join("articles.jsonl");
    write_lines(&articles_path, &articles);
    let snapshot_path = dir.path().join("snapshot.jsonl");
    write_synthetic_snapshot(&snapshot_path, pairs);

    let out_dir = dir.path().join("out");
    let output = keyness_bin(&[
        "extract",
        "--snapshot",
        path_str(&snapshot_path),
        "--articles",
        path_str(&articles_path),
        "--out-dir",
        path_str(&out_dir),
        "--category-set",
        "cat_a,cat_b,cat_c",
        "--category",
        "cat_a",
        "--action",
        "rt",
        "--metric",
        "all",
    ]);
    assert!(output.status.success(), "{}", stderr_of(&output));

    let proposed =
        fs::read_to_string(out_dir.join("extract_cat_a_rt_expected-dif.tsv")).unwrap();
    let first_row = proposed.lines().nth(1).unwrap();
    assert!(first_row.starts_with("1\tplanted\t"), "{proposed}");

    let count = fs::read_to_string(out_dir.join("extract_cat_a_rt_count.tsv")).unwrap();
    let first_row = count.lines().nth(1).unwrap();
    assert!(first_row.starts_with("1\tall\t"), "{count}");
}

#[test]
fn single_week_trend_matches_extract_rows() {
    let dir = tempfile::tempdir().unwrap();
    let articles: Vec<String> = vec![
        article_line("x1", "cat_a", "alpha beta"),
        article_line("x2", "cat_a", "alpha gamma"),
        article_line("x3", "cat_b", "delta beta"),
        article_line("x4", "cat_b", "delta gamma"),
    ];
    let articles_path = dir.path().join("articles.jsonl");
    write_lines(&articles_path, &articles);

    let pairs = vec![
        synthetic_pair("t1", "x1", "cat_a", 80, 10, 2),
        synthetic_pair("t2", "x2", "cat_a", 10, 80, 3),
        synthetic_pair("t3", "x3", "cat_b", 70, 15, 4),
        synthetic_pair("t4", "x4", "cat_b", 15, 70, 5),
    ];
    let snapshot_path = dir.path().join("snapshot.jsonl");
    write_synthetic_snapshot(&snapshot_path, pairs);

    let common: &[&str] = &[
        "--snapshot",
        path_str(&snapshot_path),
        "--articles",
        path_str(&articles_path),
        "--category-set",
        "cat_a,cat_b",
        "--metric",
        "expected-dif",
        "--action",
        "rt",
        "--category",
        "cat_a",
    ];

    let extract_dir = dir.path().join("extract");
    let mut args = vec!["extract"];
    args.extend_from_slice(common);
    args.extend_from_slice(&["--out-dir", path_str(&extract_dir)]);
    assert!(keyness_bin(&args).status.success());

    let trend_dir = dir.path().join("trend");
    let mut args = vec!["trend"];
    args.extend_from_slice(common);
    args.extend_from_slice(&["--out-dir", path_str(&trend_dir)]);
    assert!(keyness_bin(&args).status.success());

    let extract_rows =
        fs::read_to_string(extract_dir.join("extract_cat_a_rt_expected-dif.tsv")).unwrap();
    let trend_rows = fs::read_to_string(
        trend_dir.join("trend_cat_a_rt_expected-dif_b0_2017-01-02.tsv"),
    )
    .unwrap();
    assert_eq!(extract_rows, trend_rows);
    assert_eq!(fs::read_dir(&trend_dir).unwrap().count(), 1);
}

#[test]
fn config_file_values_are_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("keyness.toml");
    fs::write(
        &config_path,
        format!(
            "articles = {:?}\ntweets = {:?}\nmin_rt = 1000\nmin_like = 1000\n",
            fixture("articles.jsonl"),
            fixture("tweets.jsonl"),
        ),
    )
    .unwrap();

    // Config alone: thresholds of 1000 keep nothing.
    let strict = dir.path().join("strict.jsonl");
    let output = keyness_bin(&[
        "ingest",
        "--config",
        path_str(&config_path),
        "--snapshot",
        path_str(&strict),
    ]);
    assert!(output.status.success(), "{}", stderr_of(&output));
    let snapshot = read_snapshot(std::io::BufReader::new(fs::File::open(&strict).unwrap())).unwrap();
    assert!(snapshot.pairs.is_empty());

    // Flags override the file thresholds.
    let loose = dir.path().join("loose.jsonl");
    let output = keyness_bin(&[
        "ingest",
        "--config",
        path_str(&config_path),
        "--snapshot",
        path_str(&loose),
        "--min-rt",
        "10",
        "--min-like",
        "10",
    ]);
    assert!(output.status.success());
    let snapshot = read_snapshot(std::io::BufReader::new(fs::File::open(&loose).unwrap())).unwrap();
    assert_eq!(snapshot.pairs.len(), 11);
}

#[test]
fn snapshot_roundtrip_preserves_engagements() {
    let dir = tempfile::tempdir().unwrap();
    let pairs = vec![
        synthetic_pair("t1", "a", "economy", 30, 20, 2),
        synthetic_pair("t2", "a", "economy", 15, 40, 3),
    ];
    let engagements = keyness::ingest::aggregate_article_engagement(&pairs);
    let original = Snapshot::new(pairs, engagements.clone());

    let path = dir.path().join("snap.jsonl");
    let mut buf = Vec::new();
    write_snapshot(&mut buf, &original).unwrap();
    fs::write(&path, &buf).unwrap();

    let restored = read_snapshot(std::io::BufReader::new(fs::File::open(&path).unwrap())).unwrap();
    assert_eq!(restored, original);
    let expected: Vec<ArticleEngagement> = engagements;
    assert_eq!(restored.engagements, expected);
}
