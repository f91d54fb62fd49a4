use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

/// One table cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Null,
    Bool(bool),
    Int(i64),
    Float(f64),
    Text(String),
}

impl Cell {
    fn to_csv(&self) -> String {
        match self {
            Cell::Null => String::new(),
            Cell::Bool(b) => b.to_string(),
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) => format_float(*x),
            Cell::Text(s) => s.clone(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Cell::Int(i) => Some(i as f64),
            Cell::Float(x) => Some(x),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Cell::Text(s) => Some(s),
            _ => None,
        }
    }
}

/// Shortest representation that parses back to the same value, switching to exponent
/// notation for very large or small magnitudes.
fn format_float(x: f64) -> String {
    format!("{x:?}")
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        if x.is_finite() {
            Cell::Float(x)
        } else {
            Cell::Null
        }
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(x: Option<T>) -> Self {
        x.map_or(Cell::Null, Into::into)
    }
}

/// Tabular result of one experiment together with everything needed to reproduce it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub seed: u64,
    pub version: String,
    /// Full configuration echo.
    pub config: Value,
    /// Derived summary values such as detected transitions.
    pub metadata: serde_json::Map<String, Value>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl ExperimentReport {
    pub fn new(experiment: &str, seed: u64, config: Value, columns: &[&str]) -> Self {
        ExperimentReport {
            experiment: experiment.to_string(),
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            metadata: serde_json::Map::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::invalid(format!(
                "row has {} cells, table has {} columns",
                row.len(),
                self.columns.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn set_meta(&mut self, key: &str, value: impl Serialize) -> Result<()> {
        self.metadata.insert(key.to_string(), serde_json::to_value(value)?);
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Values of a numeric column; non-numeric cells are skipped.
    pub fn numbers(&self, name: &str) -> Vec<f64> {
        let Some(i) = self.column(name) else { return Vec::new() };
        self.rows.iter().filter_map(|r| r[i].as_f64()).collect()
    }

    /// Rows whose text column `name` equals `value`.
    pub fn rows_where<'a>(&'a self, name: &str, value: &'a str) -> impl Iterator<Item = &'a Vec<Cell>> + 'a {
        let i = self.column(name);
        self.rows
            .iter()
            .filter(move |r| i.is_some_and(|i| r[i].as_str() == Some(value)))
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::to_csv))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::invalid(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::invalid(e.to_string()))
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(src: &str) -> Result<Self> {
        Ok(serde_json::from_str(src)?)
    }
}

/// Writes `<experiment>.csv` and `<experiment>.json` under `dir`, creating it if needed.
pub fn emit_report(report: &ExperimentReport, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let csv_path = dir.join(format!("{}.csv", report.experiment));
    let json_path = dir.join(format!("{}.json", report.experiment));
    fs::write(&csv_path, report.to_csv()?).map_err(|e| Error::io(&csv_path, e))?;
    fs::write(&json_path, report.to_json()?).map_err(|e| Error::io(&json_path, e))?;
    Ok(vec![csv_path, json_path])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ExperimentReport {
        let mut r = ExperimentReport::new("demo", 7, serde_json::json!({"k": 1}), &["seed", "name", "x", "n", "ok", "gap"]);
        r.push(vec![Cell::Int(7), "a,b".into(), 0.1.into(), 3usize.into(), true.into(), f64::NAN.into()])
            .unwrap();
        r.push(vec![Cell::Int(7), "c".into(), 2.0.into(), 4usize.into(), false.into(), 1e-30.into()])
            .unwrap();
        r.set_meta("transition_beta", 0.1).unwrap();
        r
    }

    #[test]
    fn empty_report_is_header_only() {
        let r = ExperimentReport::new("e", 1, Value::Null, &["seed", "x"]);
        assert_eq!(r.to_csv().unwrap(), "seed,x\n");
    }

    #[test]
    fn csv_layout() {
        let csv = sample().to_csv().unwrap();
        assert_eq!(csv, "seed,name,x,n,ok,gap\n7,\"a,b\",0.1,3,true,\n7,c,2.0,4,false,1e-30\n");
    }

    #[test]
    fn json_round_trip() {
        let r = sample();
        let back = ExperimentReport::from_json(&r.to_json().unwrap()).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.numbers("x"), vec![0.1, 2.0]);
        assert_eq!(back.rows_where("name", "c").count(), 1);
    }

    #[test]
    fn row_width_is_checked() {
        let mut r = ExperimentReport::new("e", 1, Value::Null, &["a"]);
        assert!(r.push(vec![]).is_err());
    }

    #[test]
    fn emit_is_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let r = sample();
        let paths = emit_report(&r, dir.path()).unwrap();
        let first: Vec<Vec<u8>> = paths.iter().map(|p| fs::read(p).unwrap()).collect();
        emit_report(&r, dir.path()).unwrap();
        let second: Vec<Vec<u8>> = paths.iter().map(|p| fs::read(p).unwrap()).collect();
        assert_eq!(first, second);
        assert!(paths[0].ends_with("demo.csv"));
    }

    #[test]
    fn io_errors_name_the_path() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, "x").unwrap();
        let err = emit_report(&sample(), &blocker.join("sub")).unwrap_err();
        assert!(err.to_string().contains("file"), "{err}");
    }
}
