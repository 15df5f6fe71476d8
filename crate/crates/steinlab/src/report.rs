//! Experiment reports with deterministic, diff-able emission: CSV with a
//! `# key=value` comment header, or a single JSON document carrying the same
//! fields. Floats are printed with 17 significant digits so doubles
//! round-trip byte-identically.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

/// Pass/fail judgement of an experiment against its tolerances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    NotApplicable,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::NotApplicable => "not-applicable",
        }
    }
}

/// One cell of a result row.
#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}
impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}
impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}
impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}
impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

fn format_cell(cell: &Cell) -> String {
    match cell {
        Cell::Int(v) => v.to_string(),
        Cell::Float(v) => format!("{v:.16e}"),
        Cell::Bool(v) => v.to_string(),
        Cell::Text(v) => v.clone(),
    }
}

/// A named experiment run: parameters, per-row records with a fixed column
/// schema, the tolerances applied, and the overall verdict.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub name: String,
    pub version: String,
    pub parameters: BTreeMap<String, String>,
    pub tolerances: BTreeMap<String, f64>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub verdict: Verdict,
}

impl ExperimentReport {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            parameters: BTreeMap::new(),
            tolerances: BTreeMap::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            verdict: Verdict::NotApplicable,
        }
    }

    pub fn set_parameter(&mut self, key: &str, value: impl ToString) {
        self.parameters.insert(key.to_string(), value.to_string());
    }

    pub fn set_tolerance(&mut self, key: &str, value: f64) {
        self.tolerances.insert(key.to_string(), value);
    }

    pub fn push_row(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width mismatch");
        self.rows.push(row);
    }

    /// CSV: `# key=value` comment lines (name, version, parameters,
    /// tolerances, verdict), one header row, then the data rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# experiment={}", self.name);
        let _ = writeln!(out, "# version={}", self.version);
        for (k, v) in &self.parameters {
            let _ = writeln!(out, "# {k}={v}");
        }
        for (k, v) in &self.tolerances {
            let _ = writeln!(out, "# tol_{k}={v:e}");
        }
        let _ = writeln!(out, "# verdict={}", self.verdict.as_str());
        let _ = writeln!(out, "{}", self.columns.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(format_cell).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    /// The same report as a single JSON document.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ExperimentReport {
        let mut r = ExperimentReport::new("demo", &["k", "value", "ok"]);
        r.set_parameter("k_max", 2);
        r.set_tolerance("rel", 1e-10);
        r.push_row(vec![1i64.into(), 0.5f64.into(), true.into()]);
        r.push_row(vec![2i64.into(), (1.0 / 3.0).into(), false.into()]);
        r.verdict = Verdict::Fail;
        r
    }

    #[test]
    fn csv_shape() {
        let csv = sample().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert!(lines[0].starts_with("# experiment=demo"));
        assert!(lines.iter().any(|l| *l == "# k_max=2"));
        assert!(lines.iter().any(|l| *l == "# verdict=fail"));
        assert!(lines.contains(&"k,value,ok"));
        assert!(lines.contains(&"1,5.0000000000000000e-1,true"));
    }

    #[test]
    fn float_cells_round_trip() {
        let v = 0.1234567890123456789_f64;
        let text = format_cell(&Cell::Float(v));
        let back: f64 = text.parse().unwrap();
        assert_eq!(v, back);
    }

    #[test]
    fn deterministic_output() {
        assert_eq!(sample().to_csv(), sample().to_csv());
        assert_eq!(sample().to_json(), sample().to_json());
    }

    #[test]
    fn json_contains_verdict() {
        let json = sample().to_json();
        assert!(json.contains("\"verdict\": \"fail\""));
        assert!(json.contains("\"columns\""));
    }

    #[test]
    #[should_panic(expected = "row width mismatch")]
    fn row_width_checked() {
        let mut r = ExperimentReport::new("demo", &["a", "b"]);
        r.push_row(vec![1i64.into()]);
    }
}
