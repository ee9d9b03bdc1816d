//! Transaction log parsing, repeated-visit deduplication, main-item selection and
//! construction of the indicator dataset.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use chrono::{Datelike, NaiveDate};
use thiserror::Error;

use crate::dataset::{DatasetError, IndicatorDataset};

/// Subscriber classification.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Status {
    /// First subscription this year.
    New = 0,
    /// Renewed last year's subscription.
    Renewal = 1,
    /// Subscribed at some point, but not last year.
    Old = 2,
}

impl Status {
    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Status::New),
            1 => Some(Status::Renewal),
            2 => Some(Status::Old),
            _ => None,
        }
    }

    pub fn code(self) -> u8 {
        self as u8
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransactionRecord {
    pub subject_id: String,
    pub item_code: String,
    pub date: NaiveDate,
    pub status: Status,
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("line {line}: malformed row: {message}")]
    Malformed { line: u64, message: String },
    #[error("missing column {0:?} in header")]
    MissingColumn(String),
    #[error("line {line}: unknown status value {value:?} (expected 0, 1 or 2)")]
    BadStatus { line: u64, value: String },
    #[error("line {line}: cannot parse date {value:?} (expected YYYY-MM-DD)")]
    BadDate { line: u64, value: String },
    #[error("line {line}: date {date} outside analysis year {year}")]
    DateOutsideYear { line: u64, date: NaiveDate, year: i32 },
    #[error("line {line}: empty {field}")]
    EmptyField { line: u64, field: &'static str },
    #[error("line {line}: subject {subject:?} has status {found}, but status {expected} was given earlier")]
    InconsistentStatus { line: u64, subject: String, expected: u8, found: u8 },
    #[error("visit count table is empty")]
    EmptyCounts,
    #[error("percentile {0} outside [0, 1]")]
    BadPercentile(f64),
    #[error("no items selected")]
    EmptyItemSet,
    #[error("item {0:?} does not occur in the log")]
    UnknownItem(String),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A validated visit log. Every subject carries a single status.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TransactionLog {
    records: Vec<TransactionRecord>,
    item_universe: BTreeSet<String>,
    statuses: BTreeMap<String, Status>,
}

impl TransactionLog {
    /// Validates status consistency; line numbers in errors are 1-based record indices
    /// offset by the header line.
    pub fn new(records: Vec<TransactionRecord>) -> Result<Self, IngestError> {
        let mut log = TransactionLog::default();
        for (i, rec) in records.into_iter().enumerate() {
            log.push(rec, i as u64 + 2)?;
        }
        Ok(log)
    }

    fn push(&mut self, rec: TransactionRecord, line: u64) -> Result<(), IngestError> {
        match self.statuses.get(&rec.subject_id) {
            Some(&s) if s != rec.status => {
                return Err(IngestError::InconsistentStatus {
                    line,
                    subject: rec.subject_id,
                    expected: s.code(),
                    found: rec.status.code(),
                })
            }
            Some(_) => {}
            None => {
                self.statuses.insert(rec.subject_id.clone(), rec.status);
            }
        }
        if !self.item_universe.contains(&rec.item_code) {
            self.item_universe.insert(rec.item_code.clone());
        }
        self.records.push(rec);
        Ok(())
    }

    pub fn records(&self) -> &[TransactionRecord] {
        &self.records
    }

    pub fn item_universe(&self) -> &BTreeSet<String> {
        &self.item_universe
    }

    pub fn n_subjects(&self) -> usize {
        self.statuses.len()
    }

    pub fn status_of(&self, subject: &str) -> Option<Status> {
        self.statuses.get(subject).copied()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Column mapping for [`parse_transactions`].
#[derive(Clone, Debug)]
pub struct CsvSchema {
    pub subject: String,
    pub item: String,
    pub date: String,
    pub status: String,
    pub delimiter: u8,
    /// When set, every date must fall inside this calendar year.
    pub year: Option<i32>,
}

impl Default for CsvSchema {
    fn default() -> Self {
        Self {
            subject: "subject_id".into(),
            item: "item_code".into(),
            date: "date".into(),
            status: "status".into(),
            delimiter: b',',
            year: None,
        }
    }
}

pub const DATE_FORMAT: &str = "%Y-%m-%d";

/// Parses a delimited visit log with a header row.
pub fn parse_transactions<R: Read>(input: R, schema: &CsvSchema) -> Result<TransactionLog, IngestError> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(schema.delimiter)
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(input);

    let headers = reader.headers()?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| IngestError::MissingColumn(name.to_string()))
    };
    let (c_subject, c_item, c_date, c_status) =
        (column(&schema.subject)?, column(&schema.item)?, column(&schema.date)?, column(&schema.status)?);

    let mut log = TransactionLog::default();
    let mut record = csv::StringRecord::new();
    loop {
        let more = reader.read_record(&mut record).map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            IngestError::Malformed { line, message: e.to_string() }
        })?;
        if !more {
            break;
        }
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let field = |idx: usize, name: &'static str| -> Result<&str, IngestError> {
            match record.get(idx) {
                Some("") => Err(IngestError::EmptyField { line, field: name }),
                Some(v) => Ok(v),
                None => Err(IngestError::Malformed { line, message: format!("missing {name}") }),
            }
        };
        let subject = field(c_subject, "subject_id")?;
        let item = field(c_item, "item_code")?;
        let date_raw = field(c_date, "date")?;
        let status_raw = field(c_status, "status")?;

        let status = status_raw
            .parse::<u8>()
            .ok()
            .and_then(Status::from_code)
            .ok_or_else(|| IngestError::BadStatus { line, value: status_raw.to_string() })?;
        let date = NaiveDate::parse_from_str(date_raw, DATE_FORMAT)
            .map_err(|_| IngestError::BadDate { line, value: date_raw.to_string() })?;
        if let Some(year) = schema.year {
            if date.year() != year {
                return Err(IngestError::DateOutsideYear { line, date, year });
            }
        }
        log.push(
            TransactionRecord {
                subject_id: subject.to_string(),
                item_code: item.to_string(),
                date,
                status,
            },
            line,
        )?;
    }
    Ok(log)
}

/// Writes a log in the same schema [`parse_transactions`] reads with the default mapping.
pub fn write_transactions<W: Write>(log: &TransactionLog, out: W) -> Result<(), IngestError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["subject_id", "item_code", "date", "status"])?;
    for r in log.records() {
        let date = r.date.format(DATE_FORMAT).to_string();
        let status = r.status.code().to_string();
        w.write_record([r.subject_id.as_str(), r.item_code.as_str(), date.as_str(), status.as_str()])?;
    }
    w.flush()?;
    Ok(())
}

/// subject -> item -> date of the first visit.
pub type Deduplicated = BTreeMap<String, BTreeMap<String, NaiveDate>>;

/// Collapses repeated visits, keeping the earliest date of each (subject, item) pair.
pub fn deduplicate(log: &TransactionLog) -> Deduplicated {
    let mut out: Deduplicated = BTreeMap::new();
    for r in log.records() {
        out.entry(r.subject_id.clone())
            .or_default()
            .entry(r.item_code.clone())
            .and_modify(|d| {
                if r.date < *d {
                    *d = r.date;
                }
            })
            .or_insert(r.date);
    }
    out
}

/// Number of distinct subjects that visited each item.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VisitCountTable {
    pub counts: BTreeMap<String, u64>,
}

impl VisitCountTable {
    pub fn from_dedup(dedup: &Deduplicated) -> Self {
        let mut counts = BTreeMap::new();
        for items in dedup.values() {
            for item in items.keys() {
                *counts.entry(item.clone()).or_insert(0) += 1;
            }
        }
        Self { counts }
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    /// Deduplicated visit total restricted to `items`.
    pub fn total_over(&self, items: &BTreeSet<String>) -> u64 {
        items.iter().filter_map(|i| self.counts.get(i)).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

/// Nearest-rank percentile: the `ceil(p * k)`-th smallest of `k` values (the minimum for `p = 0`).
pub fn nearest_rank(sorted: &[u64], percentile: f64) -> u64 {
    let k = sorted.len();
    // the small slack keeps exact products such as 0.7 * 10 from rounding up a rank
    let rank = ((percentile * k as f64) - 1e-9).ceil().max(1.0) as usize;
    sorted[rank.min(k) - 1]
}

/// Items whose visit count is strictly greater than the nearest-rank percentile of all counts.
pub fn select_main_items(counts: &VisitCountTable, percentile: f64) -> Result<BTreeSet<String>, IngestError> {
    if counts.is_empty() {
        return Err(IngestError::EmptyCounts);
    }
    if !(0.0..=1.0).contains(&percentile) {
        return Err(IngestError::BadPercentile(percentile));
    }
    let mut sorted: Vec<u64> = counts.counts.values().copied().collect();
    sorted.sort_unstable();
    let cut = nearest_rank(&sorted, percentile);
    Ok(counts
        .counts
        .iter()
        .filter(|(_, &c)| c > cut)
        .map(|(k, _)| k.clone())
        .collect())
}

/// One row per distinct subject (sorted by id), one column per selected item (sorted by code).
/// Subjects who visited none of the items keep an all-zero row.
pub fn build_indicator_dataset(
    log: &TransactionLog,
    items: &BTreeSet<String>,
    include_status: bool,
) -> Result<IndicatorDataset, IngestError> {
    if items.is_empty() {
        return Err(IngestError::EmptyItemSet);
    }
    if let Some(missing) = items.iter().find(|i| !log.item_universe().contains(*i)) {
        return Err(IngestError::UnknownItem(missing.clone()));
    }
    let dedup = deduplicate(log);
    let names: Vec<String> = items.iter().cloned().collect();
    let n_rows = dedup.len();
    let mut columns = vec![vec![0u8; n_rows]; names.len()];
    let mut status = Vec::with_capacity(if include_status { n_rows } else { 0 });
    for (row, (subject, visited)) in dedup.iter().enumerate() {
        for (col, name) in names.iter().enumerate() {
            if visited.contains_key(name) {
                columns[col][row] = 1;
            }
        }
        if include_status {
            status.push(log.status_of(subject).map(Status::code).unwrap_or(0));
        }
    }
    let status = include_status.then_some(status);
    Ok(IndicatorDataset::from_columns(names, columns, status, n_rows)?)
}
