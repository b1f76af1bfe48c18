//! Plain numeric tables: 9-significant-digit CSV/JSON output and a CSV reader
//! that reports the offending line and column.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Token written in place of a value at the model pole.
pub const POLE_TOKEN: &str = "inf-pole";
/// Token written where a quantity is undefined below its threshold.
pub const BELOW_THRESHOLD_TOKEN: &str = "below-threshold";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Value(f64),
    Marker(Marker),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Marker {
    #[serde(rename = "inf-pole")]
    Pole,
    #[serde(rename = "below-threshold")]
    BelowThreshold,
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Cell::Value(v) => format_sig9(*v),
            Cell::Marker(Marker::Pole) => POLE_TOKEN.to_string(),
            Cell::Marker(Marker::BelowThreshold) => BELOW_THRESHOLD_TOKEN.to_string(),
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        match text.trim() {
            POLE_TOKEN => Some(Cell::Marker(Marker::Pole)),
            BELOW_THRESHOLD_TOKEN => Some(Cell::Marker(Marker::BelowThreshold)),
            t => t.parse().ok().map(Cell::Value),
        }
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            Cell::Value(v) => Some(*v),
            Cell::Marker(_) => None,
        }
    }
}

/// Decimal notation with 9 significant digits.
pub fn format_sig9(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.8e}");
    let exponent: i32 = sci
        .rsplit('e')
        .next()
        .and_then(|e| e.parse().ok())
        .unwrap_or(0);
    let decimals = (8 - exponent).max(0) as usize;
    // re-round at the decimal position; the mantissa is already 9 digits
    let rounded: f64 = sci.parse().unwrap_or(v);
    format!("{rounded:.decimals$}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    /// Parses a table written by [`Table::to_csv`].
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().unwrap_or_default();
        let columns: Vec<String> = header.split(',').map(str::to_string).collect();
        let mut table = Table {
            columns,
            rows: Vec::new(),
        };
        for (idx, line) in lines.enumerate() {
            let row = line
                .split(',')
                .enumerate()
                .map(|(c, cell)| {
                    Cell::parse(cell).ok_or_else(|| Error::Parse {
                        path: "<table>".into(),
                        line: idx as u64 + 2,
                        column: table.columns.get(c).cloned().unwrap_or_default(),
                        message: format!("cannot parse `{cell}`"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            table.rows.push(row);
        }
        Ok(table)
    }

    /// JSON view with every number rounded to 9 significant digits.
    pub fn to_json_value(&self) -> serde_json::Value {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|row| {
                serde_json::Value::Array(
                    row.iter()
                        .map(|cell| match cell {
                            Cell::Value(v) => rounded_json(*v),
                            Cell::Marker(_) => serde_json::Value::String(cell.render()),
                        })
                        .collect(),
                )
            })
            .collect();
        serde_json::json!({ "columns": self.columns, "rows": rows })
    }
}

pub(crate) fn rounded_json(v: f64) -> serde_json::Value {
    let text = format_sig9(v);
    text.parse::<f64>()
        .ok()
        .and_then(serde_json::Number::from_f64)
        .map(serde_json::Value::Number)
        .unwrap_or(serde_json::Value::Null)
}

/// Reads a numeric CSV with a header. `required` columns must be present in
/// order; `optional` columns may follow. Missing optional columns read `None`.
pub fn read_numeric_csv(
    text: &str,
    path: &Path,
    required: &[&str],
    optional: &[&str],
) -> Result<Vec<Vec<Option<f64>>>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    let parse_err = |line: u64, column: &str, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        column: column.to_string(),
        message,
    };
    for (k, name) in required.iter().enumerate() {
        if headers.get(k) != Some(*name) {
            return Err(parse_err(
                1,
                name,
                format!("expected header `{}`", required.join(",")),
            ));
        }
    }
    let mut names: Vec<&str> = required.to_vec();
    for (k, name) in optional.iter().enumerate() {
        match headers.get(required.len() + k) {
            Some(h) if h == *name => names.push(name),
            Some(h) => return Err(parse_err(1, h, format!("unexpected column `{h}`"))),
            None => break,
        }
    }
    if headers.len() > names.len() {
        let extra = headers.get(names.len()).unwrap_or_default();
        return Err(parse_err(1, extra, format!("unexpected column `{extra}`")));
    }

    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            parse_err(line, "", e.to_string())
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != names.len() {
            let column = names.get(record.len()).copied().unwrap_or("");
            return Err(parse_err(
                line,
                column,
                format!("expected {} fields, found {}", names.len(), record.len()),
            ));
        }
        let mut row = Vec::with_capacity(required.len() + optional.len());
        for (field, name) in record.iter().zip(&names) {
            let value: f64 = field
                .parse()
                .map_err(|_| parse_err(line, name, format!("`{field}` is not a number")))?;
            if !value.is_finite() {
                return Err(parse_err(line, name, format!("`{field}` is not finite")));
            }
            row.push(Some(value));
        }
        row.resize(required.len() + optional.len(), None);
        rows.push(row);
    }
    Ok(rows)
}
