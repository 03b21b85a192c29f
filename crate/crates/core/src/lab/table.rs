//! Result tables: a fixed column schema, CSV rows and a JSON sidecar.

use std::fmt;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};

pub const DRMS_COLUMNS: [&str; 8] = [
    "theta0",
    "m",
    "eps",
    "sigma_m",
    "drms_analytic",
    "drms_mc",
    "mc_stderr",
    "n",
];
/// Side table of a d_rms sweep: measured nonlinearity bias per point.
pub const DRMS_BIAS_COLUMNS: [&str; 5] = ["theta0", "m", "eps", "lambda_residual_rms", "bias_bound"];
pub const LAMBDA_COLUMNS: [&str; 6] = ["theta0", "m", "sample_id", "lam_t1", "lam_t2", "lam_t3"];
pub const CONVERGENCE_COLUMNS: [&str; 4] = ["realization_id", "eps", "residual_norm", "order"];

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
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
impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v as i64)
    }
}
impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            // 17 significant digits round-trip every binary64
            Cell::Float(v) => write!(f, "{v:.16e}"),
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Text(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl ResultTable {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the schema");
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric column by name; text cells read as NaN.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.column_index(name)?;
        Some(
            self.rows
                .iter()
                .map(|r| match &r[k] {
                    Cell::Float(v) => *v,
                    Cell::Int(v) => *v as f64,
                    Cell::Text(_) => f64::NAN,
                })
                .collect(),
        )
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv_string()?).map_err(|e| Error::io(path, e))
    }

    /// Read a table back; integer-looking cells become `Int`, others `Float`,
    /// anything unparsable `Text`.
    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let columns = r.headers()?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            rows.push(
                rec?.iter()
                    .map(|s| {
                        if let Ok(i) = s.parse::<i64>() {
                            Cell::Int(i)
                        } else if let Ok(v) = s.parse::<f64>() {
                            Cell::Float(v)
                        } else {
                            Cell::Text(s.to_string())
                        }
                    })
                    .collect(),
            );
        }
        let name = path.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
        Ok(Self { name, columns, rows })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Complete,
    /// Aborted by an error; the tables hold the rows finished before it.
    Partial,
}

/// JSON sidecar written next to the CSV tables of one run.
#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub experiment: String,
    pub status: RunStatus,
    pub seed: u64,
    pub version: &'static str,
    pub unix_time: u64,
    pub tables: Vec<String>,
    pub config: Value,
    pub summary: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Metadata {
    pub fn new(experiment: &str, seed: u64, config: Value) -> Self {
        Self {
            experiment: experiment.to_string(),
            status: RunStatus::Complete,
            seed,
            version: env!("CARGO_PKG_VERSION"),
            unix_time: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
            tables: Vec::new(),
            config,
            summary: Value::Null,
            error: None,
        }
    }
}

/// Write every table as `<stem>_<table>.csv` (or `<stem>.csv` for a single
/// table named like the stem) and the sidecar as `<stem>.json`.
pub fn write_outputs(dir: &Path, stem: &str, tables: &[ResultTable], meta: &mut Metadata) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut paths = Vec::new();
    meta.tables.clear();
    for t in tables {
        let file = if t.name == stem {
            format!("{stem}.csv")
        } else {
            format!("{stem}_{}.csv", t.name)
        };
        let path = dir.join(&file);
        t.write_csv(&path)?;
        meta.tables.push(file);
        paths.push(path);
    }
    let side = dir.join(format!("{stem}.json"));
    let text = serde_json::to_string_pretty(meta)?;
    std::fs::write(&side, text + "\n").map_err(|e| Error::io(&side, e))?;
    paths.push(side);
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn floats_round_trip(vals in proptest::collection::vec(proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO, 1..20)) {
            let dir = tempfile::tempdir().unwrap();
            let mut t = ResultTable::new("t", &["x"]);
            for v in &vals {
                t.push(vec![Cell::Float(*v)]);
            }
            let p = dir.path().join("t.csv");
            t.write_csv(&p).unwrap();
            let back = ResultTable::read_csv(&p).unwrap();
            let col = back.column("x").unwrap();
            for (a, b) in vals.iter().zip(&col) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }

    #[test]
    fn header_and_quoting() {
        let mut t = ResultTable::new("t", &["a", "b"]);
        t.push(vec![Cell::Int(3), Cell::Text("x,y".into())]);
        assert_eq!(t.to_csv_string().unwrap(), "a,b\n3,\"x,y\"\n");
    }
}
