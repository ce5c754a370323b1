//! CSV ingestion of observed admissions and mobility indicators, and export
//! of simulated series and per-node status histories.
//!
//! All files are UTF-8 CSV with a header row and ISO-8601 dates.
//!
//! | file            | columns                                     |
//! |-----------------|---------------------------------------------|
//! | observed        | `date,h`                                    |
//! | indicator       | `date,indicator` or `date,<region>,...`     |
//! | time series     | `date,s,e,i,r,a,h,new_h,beta`               |
//! | beta series     | `date,beta,loss,iterations`                 |
//! | node history    | `node,region,day,zone,status`               |
//!
//! Node histories are run-length: one zone-0 row per node with its initial
//! status, then one row per status change. `zone` is 1 (residence hours) or
//! 2 (working hours, which also carries the end-of-day progression).

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::{Duration, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::epidemic::{DailyCounts, Status, StatusEvent};
use crate::inference::BetaSeries;
use crate::topology::{Indicator, MetroTopology};
use crate::{Error, Result};

const DATE_FORMAT: &str = "%Y-%m-%d";

/// What to do with dates missing from the interior of a series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FillPolicy {
    #[default]
    Error,
    Zero,
}

/// Daily new hospitalized counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObservedSeries {
    pub start: NaiveDate,
    pub values: Vec<u64>,
}

impl ObservedSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn date(&self, index: usize) -> NaiveDate {
        self.start + Duration::days(index as i64)
    }
}

/// Daily commuter volume relative to the pre-outbreak baseline, either one
/// column for all regions or one column per region.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorSeries {
    pub start: NaiveDate,
    /// Column names when per-region.
    pub regions: Option<Vec<String>>,
    pub values: Vec<Indicator>,
}

impl IndicatorSeries {
    pub fn constant(start: NaiveDate, days: usize, value: f64) -> Self {
        Self {
            start,
            regions: None,
            values: vec![Indicator::Uniform(value); days],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

fn parse_error(path: &Path, line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

struct DatedRow {
    line: u64,
    date: NaiveDate,
    fields: Vec<String>,
}

/// Reads a `date,...` CSV, returning the non-date header names and rows
/// sorted by date, with duplicates rejected.
fn read_dated(path: &Path) -> Result<(Vec<String>, Vec<DatedRow>)> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let header = reader.headers().map_err(csv_err(path))?.clone();
    if header.len() < 2 || !header[0].eq_ignore_ascii_case("date") {
        return Err(parse_error(path, 1, "expected a header starting with `date` and at least one value column"));
    }
    let columns: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_error(path, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != header.len() {
            return Err(parse_error(path, line, format!("expected {} fields, found {}", header.len(), record.len())));
        }
        let date = NaiveDate::parse_from_str(&record[0], DATE_FORMAT)
            .map_err(|e| parse_error(path, line, format!("bad date `{}`: {e}", &record[0])))?;
        rows.push(DatedRow {
            line,
            date,
            fields: record.iter().skip(1).map(str::to_string).collect(),
        });
    }
    rows.sort_by_key(|r| r.date);
    for pair in rows.windows(2) {
        if pair[0].date == pair[1].date {
            return Err(Error::DuplicateDate {
                path: path.to_path_buf(),
                date: pair[1].date,
            });
        }
    }
    Ok((columns, rows))
}

/// Expands sorted dated values into a gap-free vector.
fn fill_gaps<T: Clone>(
    path: &Path,
    rows: Vec<(NaiveDate, T)>,
    policy: FillPolicy,
    zero: T,
) -> Result<(NaiveDate, Vec<T>)> {
    let Some(&(start, _)) = rows.first() else {
        return Err(parse_error(path, 2, "series has no rows"));
    };
    let mut values = Vec::with_capacity(rows.len());
    let mut expected = start;
    for (date, value) in rows {
        while expected < date {
            match policy {
                FillPolicy::Error => {
                    return Err(Error::MissingDate {
                        path: path.to_path_buf(),
                        date: expected,
                    })
                }
                FillPolicy::Zero => values.push(zero.clone()),
            }
            expected += Duration::days(1);
        }
        values.push(value);
        expected += Duration::days(1);
    }
    Ok((start, values))
}

/// Loads `date,h` daily admissions.
pub fn load_observed(path: impl AsRef<Path>, fill: FillPolicy) -> Result<ObservedSeries> {
    let path = path.as_ref();
    let (columns, rows) = read_dated(path)?;
    if columns.len() != 1 {
        return Err(parse_error(path, 1, "expected exactly two columns: date,h"));
    }
    let mut parsed = Vec::with_capacity(rows.len());
    for row in rows {
        let raw = &row.fields[0];
        let value: i64 = raw
            .parse()
            .map_err(|_| parse_error(path, row.line, format!("count `{raw}` is not an integer")))?;
        if value < 0 {
            return Err(parse_error(path, row.line, format!("negative count {value}")));
        }
        parsed.push((row.date, value as u64));
    }
    let (start, values) = fill_gaps(path, parsed, fill, 0)?;
    Ok(ObservedSeries { start, values })
}

/// Loads a daily indicator, one column (all regions) or one per region.
pub fn load_indicator(path: impl AsRef<Path>) -> Result<IndicatorSeries> {
    let path = path.as_ref();
    let (columns, rows) = read_dated(path)?;
    let mut parsed = Vec::with_capacity(rows.len());
    for row in rows {
        let mut values = Vec::with_capacity(row.fields.len());
        for raw in &row.fields {
            let v: f64 = raw
                .parse()
                .map_err(|_| parse_error(path, row.line, format!("indicator `{raw}` is not a number")))?;
            if !v.is_finite() || v < 0.0 {
                return Err(parse_error(path, row.line, format!("indicator {v} must be finite and >= 0")));
            }
            if v > 2.0 {
                log::warn!("{}:{}: indicator {v} outside [0, 2]", path.display(), row.line);
            }
            values.push(v);
        }
        let ind = if values.len() == 1 {
            Indicator::Uniform(values[0])
        } else {
            Indicator::PerRegion(values)
        };
        parsed.push((row.date, ind));
    }
    let (start, values) = fill_gaps(path, parsed, FillPolicy::Error, Indicator::Uniform(0.0))?;
    Ok(IndicatorSeries {
        start,
        regions: (columns.len() > 1).then_some(columns),
        values,
    })
}

/// Indicator values for exactly the observed date span.
pub fn align(observed: &ObservedSeries, indicator: &IndicatorSeries) -> Result<Vec<Indicator>> {
    if observed.start != indicator.start || observed.len() != indicator.len() {
        let span = |start: NaiveDate, len: usize| {
            format!("{start}..{}", start + Duration::days(len as i64 - 1))
        };
        return Err(Error::DateMismatch {
            left: format!("observed {}", span(observed.start, observed.len())),
            right: format!("indicator {}", span(indicator.start, indicator.len())),
        });
    }
    Ok(indicator.values.clone())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(io_err(path))
}

fn date_str(start: NaiveDate, offset: usize) -> String {
    (start + Duration::days(offset as i64)).format(DATE_FORMAT).to_string()
}

pub fn export_observed(series: &ObservedSeries, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = create(path)?;
    let write = |out: &mut BufWriter<File>| -> std::io::Result<()> {
        writeln!(out, "date,h")?;
        for (i, v) in series.values.iter().enumerate() {
            writeln!(out, "{},{v}", date_str(series.start, i))?;
        }
        out.flush()
    };
    write(&mut out).map_err(io_err(path))
}

pub fn export_indicator(series: &IndicatorSeries, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = create(path)?;
    let write = |out: &mut BufWriter<File>| -> std::io::Result<()> {
        match &series.regions {
            Some(names) => writeln!(out, "date,{}", names.join(","))?,
            None => writeln!(out, "date,indicator")?,
        }
        for (i, v) in series.values.iter().enumerate() {
            let cells = match v {
                Indicator::Uniform(x) => x.to_string(),
                Indicator::PerRegion(xs) => xs.iter().map(f64::to_string).collect::<Vec<_>>().join(","),
            };
            writeln!(out, "{},{cells}", date_str(series.start, i))?;
        }
        out.flush()
    };
    write(&mut out).map_err(io_err(path))
}

pub const TIMESERIES_HEADER: &str = "date,s,e,i,r,a,h,new_h,beta";

/// Writes one row per simulated day; `counts[d]` is dated `start + d`.
pub fn export_timeseries(counts: &[DailyCounts], betas: &[f64], start: NaiveDate, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if betas.len() != counts.len() {
        return Err(Error::param(
            "beta",
            format!("{} beta values for {} days", betas.len(), counts.len()),
        ));
    }
    let mut out = create(path)?;
    let write = |out: &mut BufWriter<File>| -> std::io::Result<()> {
        writeln!(out, "{TIMESERIES_HEADER}")?;
        for (d, (c, b)) in counts.iter().zip(betas).enumerate() {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                date_str(start, d),
                c.s,
                c.e,
                c.i,
                c.r,
                c.a,
                c.h,
                c.new_h,
                b
            )?;
        }
        out.flush()
    };
    write(&mut out).map_err(io_err(path))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct TimeseriesRow {
    date: String,
    s: u64,
    e: u64,
    i: u64,
    r: u64,
    a: u64,
    h: u64,
    new_h: u64,
    beta: f64,
}

/// Re-imports an exported time series. `new_e` is not part of the format
/// and reads back as 0; `day` is the row index.
pub fn load_timeseries(path: impl AsRef<Path>) -> Result<(NaiveDate, Vec<DailyCounts>, Vec<f64>)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(io_err(path))?;
    let mut reader = csv::Reader::from_reader(file);
    let mut counts = Vec::new();
    let mut betas = Vec::new();
    let mut start = None;
    for (d, row) in reader.deserialize::<TimeseriesRow>().enumerate() {
        let row = row.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_error(path, line, e.to_string())
        })?;
        let date = NaiveDate::parse_from_str(&row.date, DATE_FORMAT)
            .map_err(|e| parse_error(path, d as u64 + 2, e.to_string()))?;
        let first = *start.get_or_insert(date);
        if date != first + Duration::days(d as i64) {
            return Err(parse_error(path, d as u64 + 2, "rows are not consecutive days"));
        }
        counts.push(DailyCounts {
            day: d as u32,
            s: row.s,
            e: row.e,
            i: row.i,
            r: row.r,
            a: row.a,
            h: row.h,
            new_e: 0,
            new_h: row.new_h,
        });
        betas.push(row.beta);
    }
    let start = start.ok_or_else(|| parse_error(path, 2, "no rows"))?;
    Ok((start, counts, betas))
}

/// `date,beta,loss,iterations`.
pub fn export_beta_series(series: &BetaSeries, start: NaiveDate, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = create(path)?;
    let write = |out: &mut BufWriter<File>| -> std::io::Result<()> {
        writeln!(out, "date,beta,loss,iterations")?;
        for (d, est) in series.days.iter().enumerate() {
            writeln!(out, "{},{},{},{}", date_str(start, d), est.beta, est.loss, est.iterations)?;
        }
        out.flush()
    };
    write(&mut out).map_err(io_err(path))
}

/// Reads the `beta` column of a dated CSV (e.g. an exported beta series).
pub fn load_beta_column(path: impl AsRef<Path>) -> Result<(NaiveDate, Vec<f64>)> {
    let path = path.as_ref();
    let (columns, rows) = read_dated(path)?;
    let col = columns
        .iter()
        .position(|c| c.eq_ignore_ascii_case("beta"))
        .ok_or_else(|| parse_error(path, 1, "no `beta` column"))?;
    let mut parsed = Vec::with_capacity(rows.len());
    for row in rows {
        let raw = &row.fields[col];
        let v: f64 = raw
            .parse()
            .map_err(|_| parse_error(path, row.line, format!("beta `{raw}` is not a number")))?;
        if !(0.0..=1.0).contains(&v) {
            return Err(parse_error(path, row.line, format!("beta {v} outside [0, 1]")));
        }
        parsed.push((row.date, v));
    }
    fill_gaps(path, parsed, FillPolicy::Error, 0.0)
}

/// One row of the run-length node history.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeHistoryRecord {
    pub node: u32,
    pub region: String,
    pub day: u32,
    pub zone: u8,
    pub status: char,
}

/// Attaches region names to recorded status events.
pub fn node_history_records(events: &[StatusEvent], topology: &MetroTopology) -> Vec<NodeHistoryRecord> {
    events
        .iter()
        .map(|e| NodeHistoryRecord {
            node: e.node,
            region: topology.regions()[topology.locate(e.node).0].name.clone(),
            day: e.day,
            zone: e.zone,
            status: e.status.code(),
        })
        .collect()
}

fn record_status(r: &NodeHistoryRecord) -> Result<Status> {
    Status::from_code(r.status).ok_or_else(|| Error::History(format!("node {}: unknown status `{}`", r.node, r.status)))
}

/// Checks that every node starts with one zone-0 record and then only
/// follows legal transitions in (day, zone) order.
pub fn validate_node_history(records: &[NodeHistoryRecord]) -> Result<()> {
    let mut by_node: BTreeMap<u32, Vec<&NodeHistoryRecord>> = BTreeMap::new();
    for r in records {
        if r.zone > 2 {
            return Err(Error::History(format!("node {}: zone {} not in 0..=2", r.node, r.zone)));
        }
        by_node.entry(r.node).or_default().push(r);
    }
    for (node, mut rows) in by_node {
        rows.sort_by_key(|r| (r.day, r.zone));
        if rows[0].zone != 0 || rows[1..].iter().any(|r| r.zone == 0) {
            return Err(Error::History(format!("node {node}: needs exactly one initial (zone 0) record, listed first")));
        }
        let mut current = record_status(rows[0])?;
        for pair in rows.windows(2) {
            if (pair[0].day, pair[0].zone) == (pair[1].day, pair[1].zone) {
                return Err(Error::History(format!("node {node}: two records for day {} zone {}", pair[1].day, pair[1].zone)));
            }
            let next = record_status(pair[1])?;
            if !Status::is_legal_transition(current, next) {
                return Err(Error::IllegalTransition {
                    node,
                    day: pair[1].day,
                    from: current,
                    to: next,
                });
            }
            current = next;
        }
    }
    Ok(())
}

/// Validates and writes `node,region,day,zone,status`.
pub fn export_node_history(records: &[NodeHistoryRecord], path: impl AsRef<Path>) -> Result<()> {
    validate_node_history(records)?;
    let path = path.as_ref();
    let file = File::create(path).map_err(io_err(path))?;
    let mut writer = csv::Writer::from_writer(BufWriter::new(file));
    for r in records {
        writer.serialize(r).map_err(csv_err(path))?;
    }
    writer.flush().map_err(io_err(path))
}

pub fn load_node_history(path: impl AsRef<Path>) -> Result<Vec<NodeHistoryRecord>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(io_err(path))?;
    let mut reader = csv::Reader::from_reader(file);
    reader
        .deserialize()
        .map(|r| {
            r.map_err(|e: csv::Error| {
                let line = e.position().map_or(0, |p| p.line());
                parse_error(path, line, e.to_string())
            })
        })
        .collect()
}

/// End-of-day class totals `[S, E, I, R, A, H]` for `days` days starting at
/// `first_day`, rebuilt from a run-length history.
pub fn reconstruct_counts(records: &[NodeHistoryRecord], first_day: u32, days: usize) -> Result<Vec<[u64; 6]>> {
    let mut sorted: Vec<&NodeHistoryRecord> = records.iter().collect();
    sorted.sort_by_key(|r| (r.day, r.zone));
    let mut status: BTreeMap<u32, Status> = BTreeMap::new();
    let mut counts = [0u64; 6];
    let mut out = Vec::with_capacity(days);
    let mut idx = 0;
    while idx < sorted.len() && sorted[idx].zone == 0 {
        let s = record_status(sorted[idx])?;
        if status.insert(sorted[idx].node, s).is_some() {
            return Err(Error::History(format!("node {}: duplicate initial record", sorted[idx].node)));
        }
        counts[s as usize] += 1;
        idx += 1;
    }
    for day in first_day..first_day + days as u32 {
        while idx < sorted.len() && sorted[idx].day <= day {
            let r = sorted[idx];
            let next = record_status(r)?;
            let prev = status
                .insert(r.node, next)
                .ok_or_else(|| Error::History(format!("node {} changes before its initial record", r.node)))?;
            counts[prev as usize] -= 1;
            counts[next as usize] += 1;
            idx += 1;
        }
        out.push(counts);
    }
    Ok(out)
}

/// Output file locations for a run directory.
#[derive(Debug, Clone)]
pub struct RunPaths {
    pub dir: PathBuf,
}

impl RunPaths {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        Ok(Self { dir })
    }

    pub fn file(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }
}
