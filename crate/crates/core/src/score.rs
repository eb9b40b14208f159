//! Data model, ingestion, and validation for labeled comparison scores.
//!
//! A comparison score is either *genuine* (both samples belong to the same
//! identity) or *impostor* (they do not), and carries the demographic group
//! key of the subject it was computed for. Scores arrive precomputed; this
//! module only parses, validates, and partitions them.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Whether a comparison was made between samples of the same identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Genuine,
    Impostor,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Genuine => "genuine",
            Kind::Impostor => "impostor",
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Score orientation: do larger values mean "more similar" or "less similar"?
///
/// Polarity decides which end of each distribution holds the errors: under
/// `Similarity`, genuine errors (false non-matches) sit at low scores and
/// impostor errors (false matches) at high scores; under `Distance` the two
/// sides swap. It is always an explicit input — inferring it from score
/// ranges silently flips error sides.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Similarity,
    Distance,
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Polarity::Similarity => "similarity",
            Polarity::Distance => "distance",
        })
    }
}

/// Which end of a distribution holds the errors for a given kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorSide {
    Low,
    High,
}

/// The error side of a (kind, polarity) pair.
///
/// Genuine errors are rejections: low similarity or high distance. Impostor
/// errors are acceptances: high similarity or low distance.
pub fn error_side(kind: Kind, polarity: Polarity) -> ErrorSide {
    match (kind, polarity) {
        (Kind::Genuine, Polarity::Similarity) => ErrorSide::Low,
        (Kind::Impostor, Polarity::Similarity) => ErrorSide::High,
        (Kind::Genuine, Polarity::Distance) => ErrorSide::High,
        (Kind::Impostor, Polarity::Distance) => ErrorSide::Low,
    }
}

/// One labeled comparison score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub score: f64,
    pub kind: Kind,
    pub group: String,
}

impl ScoreRecord {
    /// Builds a record, rejecting non-finite scores and empty group keys.
    pub fn new(score: f64, kind: Kind, group: impl Into<String>) -> Result<Self> {
        let group = group.into();
        if !score.is_finite() {
            return Err(Error::NonFiniteScore { line: 0 });
        }
        if group.is_empty() {
            return Err(Error::EmptyGroup);
        }
        Ok(ScoreRecord { score, kind, group })
    }
}

/// Per-group record counts, split by kind.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellCounts {
    pub genuine: usize,
    pub impostor: usize,
}

/// A validated, immutable collection of comparison records.
///
/// Group keys are case-sensitive opaque strings; groups are disjoint by
/// construction because each record carries exactly one key. Record order is
/// preserved from ingestion.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreSet {
    records: Vec<ScoreRecord>,
    polarity: Polarity,
    counts: BTreeMap<String, CellCounts>,
}

impl ScoreSet {
    /// Wraps records into a set, checking per-record invariants.
    pub fn new(records: Vec<ScoreRecord>, polarity: Polarity) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::EmptyFile);
        }
        let mut counts: BTreeMap<String, CellCounts> = BTreeMap::new();
        for r in &records {
            if !r.score.is_finite() {
                return Err(Error::NonFiniteScore { line: 0 });
            }
            if r.group.is_empty() {
                return Err(Error::EmptyGroup);
            }
            let cell = counts.entry(r.group.clone()).or_default();
            match r.kind {
                Kind::Genuine => cell.genuine += 1,
                Kind::Impostor => cell.impostor += 1,
            }
        }
        Ok(ScoreSet {
            records,
            polarity,
            counts,
        })
    }

    pub fn records(&self) -> &[ScoreRecord] {
        &self.records
    }

    pub fn polarity(&self) -> Polarity {
        self.polarity
    }

    /// Number of distinct demographic groups.
    pub fn group_count(&self) -> usize {
        self.counts.len()
    }

    /// Group keys in sorted order.
    pub fn groups(&self) -> Vec<&str> {
        self.counts.keys().map(String::as_str).collect()
    }

    /// Per-group genuine/impostor counts, keyed by group.
    pub fn cell_counts(&self) -> &BTreeMap<String, CellCounts> {
        &self.counts
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// All scores of one kind, pooled across groups, in record order.
    pub fn pooled(&self, kind: Kind) -> Vec<f64> {
        self.records
            .iter()
            .filter(|r| r.kind == kind)
            .map(|r| r.score)
            .collect()
    }

    /// All scores of both kinds, pooled across groups, in record order.
    pub fn all_scores(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.score).collect()
    }

    /// Splits the records of one kind by group key.
    ///
    /// The result has exactly one entry per group present in the set; the
    /// per-group lists preserve record order, are pairwise disjoint, and
    /// jointly exhaust the records of that kind.
    pub fn partition(&self, kind: Kind) -> BTreeMap<String, Vec<f64>> {
        let mut out: BTreeMap<String, Vec<f64>> = self
            .counts
            .keys()
            .map(|g| (g.clone(), Vec::new()))
            .collect();
        for r in &self.records {
            if r.kind == kind {
                out.get_mut(&r.group).expect("group known").push(r.score);
            }
        }
        out
    }

    /// Scores of one group and kind, in record order.
    pub fn group_scores(&self, group: &str, kind: Kind) -> Vec<f64> {
        self.records
            .iter()
            .filter(|r| r.kind == kind && r.group == group)
            .map(|r| r.score)
            .collect()
    }
}

/// Ingestion knobs. `trim` strips surrounding whitespace from fields.
#[derive(Debug, Clone, Copy)]
pub struct IngestOptions {
    pub trim: bool,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions { trim: true }
    }
}

/// Expected CSV header columns, in order.
pub const CSV_HEADER: &str = "score,kind,group";

fn parse_kind(raw: &str, line: u64) -> Result<Kind> {
    match raw {
        "genuine" => Ok(Kind::Genuine),
        "impostor" => Ok(Kind::Impostor),
        other => Err(Error::UnknownKind {
            line,
            value: other.to_string(),
        }),
    }
}

/// Reads comparison scores from a CSV file with header `score,kind,group`.
///
/// Extra columns are ignored; `kind` must be the lowercase literal `genuine`
/// or `impostor`; the decimal separator is `.`. Row order is preserved.
pub fn ingest_csv(path: impl AsRef<Path>, polarity: Polarity) -> Result<ScoreSet> {
    ingest_csv_with(path, polarity, IngestOptions::default())
}

pub fn ingest_csv_with(
    path: impl AsRef<Path>,
    polarity: Polarity,
    options: IngestOptions,
) -> Result<ScoreSet> {
    let file = std::fs::File::open(path.as_ref())?;
    ingest_csv_reader(file, polarity, options)
}

/// CSV ingestion from any reader; see [`ingest_csv`].
pub fn ingest_csv_reader(
    reader: impl Read,
    polarity: Polarity,
    options: IngestOptions,
) -> Result<ScoreSet> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(if options.trim {
            csv::Trim::All
        } else {
            csv::Trim::None
        })
        .from_reader(reader);

    let headers = rdr.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let (score_col, kind_col, group_col) = match (col("score"), col("kind"), col("group")) {
        (Some(s), Some(k), Some(g)) => (s, k, g),
        _ => {
            return Err(Error::MalformedRow {
                line: 1,
                reason: format!("header must contain columns `{CSV_HEADER}`, got {headers:?}"),
            })
        }
    };

    let mut records = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let field = |idx: usize, name: &str| {
            row.get(idx).ok_or_else(|| Error::MalformedRow {
                line,
                reason: format!("missing `{name}` field"),
            })
        };
        let raw_score = field(score_col, "score")?;
        let score: f64 = raw_score.parse().map_err(|_| Error::MalformedRow {
            line,
            reason: format!("cannot parse score {raw_score:?}"),
        })?;
        if !score.is_finite() {
            return Err(Error::NonFiniteScore { line });
        }
        let kind = parse_kind(field(kind_col, "kind")?, line)?;
        let group = field(group_col, "group")?;
        if group.is_empty() {
            return Err(Error::MalformedRow {
                line,
                reason: "empty group key".into(),
            });
        }
        records.push(ScoreRecord {
            score,
            kind,
            group: group.to_string(),
        });
    }
    ScoreSet::new(records, polarity)
}

/// JSON mirror of the CSV schema: an array of `{score, kind, group}` objects.
pub fn ingest_json(path: impl AsRef<Path>, polarity: Polarity) -> Result<ScoreSet> {
    let data = std::fs::read_to_string(path.as_ref())?;
    let records: Vec<ScoreRecord> = serde_json::from_str(&data)?;
    for (i, r) in records.iter().enumerate() {
        if !r.score.is_finite() {
            return Err(Error::NonFiniteScore {
                line: i as u64 + 1,
            });
        }
        if r.group.is_empty() {
            return Err(Error::MalformedRow {
                line: i as u64 + 1,
                reason: "empty group key".into(),
            });
        }
    }
    ScoreSet::new(records, polarity)
}

/// One finding from [`validate_for_fairness`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "flag", rename_all = "snake_case")]
pub enum ValidationFlag {
    /// Fewer than two groups: fairness over groups is undefined.
    TooFewGroups { k: usize },
    /// A (group, kind) cell holds no records at all.
    EmptyCell { group: String, kind: Kind },
    /// A (group, kind) cell holds fewer than `min` records.
    LowCell {
        group: String,
        kind: Kind,
        count: usize,
        min: usize,
    },
}

impl fmt::Display for ValidationFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationFlag::TooFewGroups { k } => {
                write!(f, "K={k} < 2: fairness undefined")
            }
            ValidationFlag::EmptyCell { group, kind } => {
                write!(f, "group {group:?} has no {kind} records")
            }
            ValidationFlag::LowCell {
                group,
                kind,
                count,
                min,
            } => write!(
                f,
                "group {group:?} has only {count} {kind} records (minimum {min})"
            ),
        }
    }
}

/// Outcome of a fairness-readiness check. Never mutates the set; callers
/// decide whether to abort on flags.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub k: usize,
    pub min_per_cell: usize,
    pub cells: BTreeMap<String, CellCounts>,
    pub flags: Vec<ValidationFlag>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.flags.is_empty()
    }
}

/// Default minimum records per (group, kind) cell. Below this, a 5% tail
/// holds fewer than three samples and divergences are noise-dominated.
pub const DEFAULT_MIN_PER_CELL: usize = 50;

/// Reports per-group genuine/impostor counts and flags cells below
/// `min_per_cell` as well as group counts below two.
pub fn validate_for_fairness(set: &ScoreSet, min_per_cell: usize) -> ValidationReport {
    let cells = set.cell_counts().clone();
    let mut flags = Vec::new();
    let k = cells.len();
    if k < 2 {
        flags.push(ValidationFlag::TooFewGroups { k });
    }
    for (group, cell) in &cells {
        for (kind, count) in [(Kind::Genuine, cell.genuine), (Kind::Impostor, cell.impostor)] {
            if count == 0 {
                flags.push(ValidationFlag::EmptyCell {
                    group: group.clone(),
                    kind,
                });
            } else if count < min_per_cell {
                flags.push(ValidationFlag::LowCell {
                    group: group.clone(),
                    kind,
                    count,
                    min: min_per_cell,
                });
            }
        }
    }
    ValidationReport {
        k,
        min_per_cell,
        cells,
        flags,
    }
}
