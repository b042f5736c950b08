//! The ingest/analyze seam: a line-delimited snapshot of reference pairs and
//! article engagements. Ingest once, analyze many times.
//!
//! The file is JSON lines tagged by `kind`. The first line is a `meta`
//! record carrying the format version; `pair` and `engagement` records
//! follow, each group sorted, so identical inputs always serialize to
//! identical bytes.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{ArticleEngagement, ReferencePair};

pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("snapshot i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("snapshot line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("snapshot does not start with a meta record")]
    MissingMeta,
    #[error("unsupported snapshot version {0}")]
    UnsupportedVersion(u32),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum Record {
    Meta { version: u32 },
    Pair(ReferencePair),
    Engagement(ArticleEngagement),
}

/// An ingest result in snapshot order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Snapshot {
    pub pairs: Vec<ReferencePair>,
    pub engagements: Vec<ArticleEngagement>,
}

impl Snapshot {
    /// Take ownership of pairs and engagements, sorting both into snapshot
    /// order: pairs by (tweet, article), engagements by article.
    pub fn new(mut pairs: Vec<ReferencePair>, mut engagements: Vec<ArticleEngagement>) -> Self {
        pairs.sort_by(|a, b| (&a.tweet_id, &a.article_id).cmp(&(&b.tweet_id, &b.article_id)));
        engagements.sort_by(|a, b| a.article_id.cmp(&b.article_id));
        Self { pairs, engagements }
    }
}

pub fn write_snapshot<W: Write>(mut w: W, snapshot: &Snapshot) -> Result<(), SnapshotError> {
    let meta = Record::Meta {
        version: SNAPSHOT_VERSION,
    };
    serde_json::to_writer(&mut w, &meta).map_err(std::io::Error::from)?;
    w.write_all(b"\n")?;
    for pair in &snapshot.pairs {
        serde_json::to_writer(&mut w, &Record::Pair(pair.clone())).map_err(std::io::Error::from)?;
        w.write_all(b"\n")?;
    }
    for engagement in &snapshot.engagements {
        serde_json::to_writer(&mut w, &Record::Engagement(engagement.clone()))
            .map_err(std::io::Error::from)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_snapshot<R: BufRead>(reader: R) -> Result<Snapshot, SnapshotError> {
    let mut snapshot = Snapshot::default();
    let mut saw_meta = false;
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: Record =
            serde_json::from_str(&line).map_err(|e| SnapshotError::Parse {
                line: lineno,
                msg: e.to_string(),
            })?;
        match record {
            Record::Meta { version } => {
                if version != SNAPSHOT_VERSION {
                    return Err(SnapshotError::UnsupportedVersion(version));
                }
                saw_meta = true;
            }
            Record::Pair(pair) => {
                if !saw_meta {
                    return Err(SnapshotError::MissingMeta);
                }
                snapshot.pairs.push(pair);
            }
            Record::Engagement(engagement) => {
                if !saw_meta {
                    return Err(SnapshotError::MissingMeta);
                }
                snapshot.engagements.push(engagement);
            }
        }
    }
    if !saw_meta {
        return Err(SnapshotError::MissingMeta);
    }
    Ok(snapshot)
}
