//! Histogram tables: `label,group,<midpoint>,…` with one row per observation.

use std::collections::HashSet;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use clrspline_core::clr::HistogramSample;
use clrspline_core::Error as CoreError;

use crate::error::{CliError, Result};

/// One labelled row of numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub label: String,
    pub group: String,
    pub values: Vec<f64>,
}

/// A numeric table sharing one set of midpoint columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub midpoints: Vec<f64>,
    pub rows: Vec<Record>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetRow {
    pub label: String,
    pub group: String,
    pub sample: HistogramSample,
}

/// Validated histograms: positive proportions summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub midpoints: Vec<f64>,
    pub rows: Vec<DatasetRow>,
}

fn parse_error(source_name: &str, message: String) -> CliError {
    CliError::Parse { source_name: source_name.to_string(), message }
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

/// Read a table with a `label,group` prefix and numeric midpoint headers.
pub fn parse_table_reader<R: Read>(reader: R, source_name: &str) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).trim(csv::Trim::All).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| parse_error(source_name, format!("header: {e}")))?
        .clone();
    if headers.len() < 3 {
        return Err(parse_error(
            source_name,
            format!("header needs label, group and at least one midpoint, got {} columns", headers.len()),
        ));
    }
    if !headers[0].eq_ignore_ascii_case("label") || !headers[1].eq_ignore_ascii_case("group") {
        return Err(parse_error(
            source_name,
            format!("header must start with `label,group`, got `{},{}`", &headers[0], &headers[1]),
        ));
    }
    let mut midpoints = Vec::with_capacity(headers.len() - 2);
    for (j, h) in headers.iter().enumerate().skip(2) {
        match h.parse::<f64>() {
            Ok(v) if v.is_finite() => midpoints.push(v),
            _ => {
                return Err(parse_error(
                    source_name,
                    format!("line 1, column {}: midpoint header `{h}` is not a number", j + 1),
                ))
            }
        }
    }

    let mut rows = Vec::new();
    let mut seen = HashSet::new();
    for result in rdr.records() {
        let record = result.map_err(|e| parse_error(source_name, e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        if record.len() != headers.len() {
            return Err(parse_error(
                source_name,
                format!("line {line}: expected {} columns, found {}", headers.len(), record.len()),
            ));
        }
        let label = record[0].to_string();
        if label.is_empty() {
            return Err(parse_error(source_name, format!("line {line}: empty label")));
        }
        if !seen.insert(label.clone()) {
            return Err(parse_error(source_name, format!("line {line}: duplicate label `{label}`")));
        }
        let mut values = Vec::with_capacity(midpoints.len());
        for (j, cell) in record.iter().enumerate().skip(2) {
            match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => values.push(v),
                _ => {
                    return Err(parse_error(
                        source_name,
                        format!("line {line}, column {}: `{cell}` is not a finite number", j + 1),
                    ))
                }
            }
        }
        rows.push(Record { label, group: record[1].to_string(), values });
    }
    Ok(Table { midpoints, rows })
}

pub fn parse_table(path: &Path) -> Result<Table> {
    parse_table_reader(open(path)?, &path.display().to_string())
}

impl Dataset {
    /// Check every row as a histogram. Errors name the data row (1-based) and column.
    pub fn from_table(table: Table, source_name: &str) -> Result<Self> {
        let mut rows = Vec::with_capacity(table.rows.len());
        for (i, rec) in table.rows.into_iter().enumerate() {
            let row = i + 1;
            let sample = HistogramSample::new(table.midpoints.clone(), rec.values).map_err(|e| {
                let message = match e {
                    CoreError::NonPositive { index, value } => format!(
                        "row {row} (`{}`), column {} (class {}): proportion {value} is not positive; \
                         zero counts must be imputed (model-based replacement) before the clr transform",
                        rec.label,
                        index + 3,
                        table.midpoints[index]
                    ),
                    other => format!("row {row} (`{}`): {other}", rec.label),
                };
                parse_error(source_name, message)
            })?;
            rows.push(DatasetRow { label: rec.label, group: rec.group, sample });
        }
        Ok(Self { midpoints: table.midpoints, rows })
    }

    pub fn to_table(&self) -> Table {
        Table {
            midpoints: self.midpoints.clone(),
            rows: self
                .rows
                .iter()
                .map(|r| Record {
                    label: r.label.clone(),
                    group: r.group.clone(),
                    values: r.sample.proportions().to_vec(),
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

pub fn parse_histogram_reader<R: Read>(reader: R, source_name: &str) -> Result<Dataset> {
    Dataset::from_table(parse_table_reader(reader, source_name)?, source_name)
}

pub fn parse_histogram_csv(path: &Path) -> Result<Dataset> {
    parse_histogram_reader(open(path)?, &path.display().to_string())
}

/// Write `table` with values formatted by `fmt`. Midpoint headers use the shortest exact form.
pub fn write_table<W: Write>(out: W, table: &Table, fmt: impl Fn(f64) -> String) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    let mut header = vec!["label".to_string(), "group".to_string()];
    header.extend(table.midpoints.iter().map(|m| m.to_string()));
    write_record(&mut wtr, &header)?;
    for rec in &table.rows {
        let mut fields = vec![rec.label.clone(), rec.group.clone()];
        fields.extend(rec.values.iter().map(|v| fmt(*v)));
        write_record(&mut wtr, &fields)?;
    }
    wtr.flush().map_err(|e| CliError::Output(e.to_string()))
}

pub(crate) fn write_record<W: Write>(wtr: &mut csv::Writer<W>, fields: &[String]) -> Result<()> {
    wtr.write_record(fields)
        .map_err(|e| CliError::Output(e.to_string()))
}

/// Read a coefficient table: `label,group,b_…` columns, anything after the last `b_`
/// column (objective, integral, …) ignored. Re-reads the output of `fit` as well as
/// hand-made tables.
pub fn parse_coefficients_reader<R: Read>(reader: R, source_name: &str) -> Result<Vec<Record>> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).trim(csv::Trim::All).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| parse_error(source_name, format!("header: {e}")))?
        .clone();
    let count = headers.iter().skip(2).take_while(|h| h.starts_with("b_")).count();
    if headers.len() < 3 || count == 0 {
        return Err(parse_error(source_name, "header must be `label,group,b_…`".into()));
    }
    let mut rows = Vec::new();
    let mut seen = HashSet::new();
    for result in rdr.records() {
        let record = result.map_err(|e| parse_error(source_name, e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        if record.len() < count + 2 {
            return Err(parse_error(
                source_name,
                format!("line {line}: expected at least {} columns, found {}", count + 2, record.len()),
            ));
        }
        let label = record[0].to_string();
        if !seen.insert(label.clone()) {
            return Err(parse_error(source_name, format!("line {line}: duplicate label `{label}`")));
        }
        let values = (2..count + 2)
            .map(|j| {
                record[j].parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| {
                    parse_error(
                        source_name,
                        format!("line {line}, column {}: `{}` is not a finite number", j + 1, &record[j]),
                    )
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(Record { label, group: record[1].to_string(), values });
    }
    Ok(rows)
}

pub fn parse_coefficients(path: &Path) -> Result<Vec<Record>> {
    parse_coefficients_reader(open(path)?, &path.display().to_string())
}
