//! CSV dataset reading and writing.
//!
//! The accepted grammar is deliberately narrow: rectangular rows of decimal
//! reals, an optional final label column restricted to the lowercase words
//! `normal` / `anomaly`, and an optional single header row. Anything else is
//! a parse error rather than a silently coerced value.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{ExposeError, Result};
use crate::model::Label;
use crate::streamgen::LabeledInstance;

/// Parsed CSV dataset: numeric rows plus labels when a label column exists.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub rows: Vec<Vec<f64>>,
    pub labels: Option<Vec<Label>>,
}

impl Dataset {
    pub fn dimension(&self) -> usize {
        self.rows.first().map(|r| r.len()).unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Pairs rows with labels; errors when the label column is absent.
    pub fn labeled(&self) -> Result<Vec<(Vec<f64>, Label)>> {
        let labels = self
            .labels
            .as_ref()
            .ok_or_else(|| ExposeError::Parse("dataset has no label column".into()))?;
        Ok(self.rows.iter().cloned().zip(labels.iter().copied()).collect())
    }
}

enum ParsedRow {
    Unlabeled(Vec<f64>),
    Labeled(Vec<f64>, Label),
}

fn parse_field(field: &str, line: usize) -> Result<f64> {
    let v: f64 = field.trim().parse().map_err(|_| {
        ExposeError::Parse(format!("line {line}: {field:?} is not a decimal number"))
    })?;
    if !v.is_finite() {
        return Err(ExposeError::Parse(format!(
            "line {line}: non-finite value {field:?}"
        )));
    }
    Ok(v)
}

fn parse_row(line: &str, number: usize) -> Result<ParsedRow> {
    let fields: Vec<&str> = line.split(',').collect();
    let last = fields.last().expect("split yields at least one field").trim();
    if let Ok(label) = last.parse::<Label>() {
        if fields.len() < 2 {
            return Err(ExposeError::Parse(format!(
                "line {number}: label column without any values"
            )));
        }
        let values = fields[..fields.len() - 1]
            .iter()
            .map(|f| parse_field(f, number))
            .collect::<Result<Vec<f64>>>()?;
        return Ok(ParsedRow::Labeled(values, label));
    }
    let values = fields
        .iter()
        .map(|f| parse_field(f, number))
        .collect::<Result<Vec<f64>>>()?;
    Ok(ParsedRow::Unlabeled(values))
}

/// Parses CSV text into a dataset.
pub fn parse_csv(text: &str) -> Result<Dataset> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut labels: Vec<Label> = Vec::new();
    let mut saw_labeled = false;
    let mut saw_unlabeled = false;

    for (idx, raw_line) in text.lines().enumerate() {
        let line = raw_line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let number = idx + 1;
        let parsed = match parse_row(line, number) {
            Ok(p) => p,
            // A single leading unparsable row is the header.
            Err(e) => {
                if rows.is_empty() && !saw_labeled && number == 1 {
                    continue;
                }
                return Err(e);
            }
        };
        match parsed {
            ParsedRow::Unlabeled(values) => {
                saw_unlabeled = true;
                rows.push(values);
            }
            ParsedRow::Labeled(values, label) => {
                saw_labeled = true;
                rows.push(values);
                labels.push(label);
            }
        }
        if saw_labeled && saw_unlabeled {
            return Err(ExposeError::Parse(format!(
                "line {number}: mix of labeled and unlabeled rows"
            )));
        }
        let d = rows[0].len();
        let row_len = rows.last().expect("just pushed").len();
        if row_len != d {
            return Err(ExposeError::Parse(format!(
                "line {number}: expected {d} values, got {row_len}"
            )));
        }
    }
    if rows.is_empty() {
        return Err(ExposeError::Empty("dataset"));
    }
    Ok(Dataset {
        rows,
        labels: saw_labeled.then_some(labels),
    })
}

pub fn read_csv(path: &Path) -> Result<Dataset> {
    parse_csv(&fs::read_to_string(path)?)
}

/// Renders a generated stream in the dataset CSV format, label column last.
pub fn stream_to_csv(stream: &[LabeledInstance]) -> String {
    let mut out = String::new();
    for instance in stream {
        for v in &instance.values {
            let _ = write!(out, "{v},");
        }
        let _ = writeln!(out, "{}", instance.label);
    }
    out
}

/// Parses an m x k metric matrix with an optional header row of algorithm
/// names; labels are not allowed here.
#[allow(clippy::type_complexity)]
pub fn parse_metric_matrix(text: &str) -> Result<(Vec<Vec<f64>>, Option<Vec<String>>)> {
    let mut names: Option<Vec<String>> = None;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line = raw_line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let number = idx + 1;
        let fields: Vec<&str> = line.split(',').collect();
        let parsed: std::result::Result<Vec<f64>, _> =
            fields.iter().map(|f| parse_field(f, number)).collect();
        match parsed {
            Ok(values) => {
                if let Some(first) = rows.first() {
                    if values.len() != first.len() {
                        return Err(ExposeError::Parse(format!(
                            "line {number}: expected {} values, got {}",
                            first.len(),
                            values.len()
                        )));
                    }
                }
                rows.push(values);
            }
            Err(e) => {
                if rows.is_empty() && names.is_none() && number == 1 {
                    names = Some(fields.iter().map(|f| f.trim().to_string()).collect());
                } else {
                    return Err(e);
                }
            }
        }
    }
    if rows.is_empty() {
        return Err(ExposeError::Empty("metric matrix"));
    }
    if let Some(names) = &names {
        if names.len() != rows[0].len() {
            return Err(ExposeError::Parse(format!(
                "header has {} names but rows have {} columns",
                names.len(),
                rows[0].len()
            )));
        }
    }
    Ok((rows, names))
}
