//! Tables, the files they are written to, and the manifest that lists them.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    /// CSV rendering; doubles use `{:.16e}` so a value round-trips exactly.
    pub fn render(&self) -> String {
        match self {
            Cell::Float(x) if x.is_nan() => "nan".into(),
            Cell::Float(x) if x.is_infinite() => if *x > 0.0 { "inf" } else { "-inf" }.into(),
            Cell::Float(x) => format!("{x:.16e}"),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Float(x) => Some(*x),
            Cell::Int(i) => Some(*i as f64),
            Cell::Text(s) => s.parse().ok(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<u32> for Cell {
    fn from(x: u32) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<i32> for Cell {
    fn from(x: i32) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

/// A header row and data rows of equal width.
#[derive(Clone, Debug)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row width does not match the header");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> CliResult<usize> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Plot(format!("missing column {name:?} (have {})", self.header.join(", "))))
    }

    pub fn floats(&self, name: &str) -> CliResult<Vec<f64>> {
        let c = self.column(name)?;
        self.rows
            .iter()
            .map(|r| {
                r[c].as_f64()
                    .ok_or_else(|| CliError::Plot(format!("column {name:?} holds non-numeric {:?}", r[c].render())))
            })
            .collect()
    }

    pub fn texts(&self, name: &str) -> CliResult<Vec<String>> {
        let c = self.column(name)?;
        Ok(self.rows.iter().map(|r| r[c].render()).collect())
    }

    pub fn write_csv(&self, path: &Path) -> CliResult<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_path(path)?;
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.flush().map_err(|e| CliError::io(path, e))?;
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FileRecord {
    /// Path relative to the output directory.
    pub path: String,
    pub kind: String,
    pub description: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct TaskRecord {
    pub task: String,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

/// The single writer of a run: every file goes through here so the
/// manifest can list it.
#[derive(Debug)]
pub struct Output {
    pub dir: PathBuf,
    pub files: Vec<FileRecord>,
    pub tasks: Vec<TaskRecord>,
    pub notes: Vec<String>,
    pub summary: serde_json::Map<String, Value>,
}

impl Output {
    pub fn create(dir: &Path) -> CliResult<Self> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
            tasks: Vec::new(),
            notes: Vec::new(),
            summary: serde_json::Map::new(),
        })
    }

    fn record(&mut self, name: &str, kind: &str, description: &str) {
        self.files.retain(|f| f.path != name);
        self.files.push(FileRecord {
            path: name.to_string(),
            kind: kind.to_string(),
            description: description.to_string(),
        });
    }

    pub fn table(&mut self, name: &str, table: &Table, description: &str) -> CliResult<()> {
        table.write_csv(&self.dir.join(name))?;
        self.record(name, "csv", description);
        Ok(())
    }

    pub fn text(&mut self, name: &str, kind: &str, content: &str, description: &str) -> CliResult<()> {
        let path = self.dir.join(name);
        fs::write(&path, content).map_err(|e| CliError::io(&path, e))?;
        self.record(name, kind, description);
        Ok(())
    }

    pub fn json(&mut self, name: &str, value: &Value, description: &str) -> CliResult<()> {
        let text = serde_json::to_string_pretty(value)? + "\n";
        self.text(name, "json", &text, description)
    }

    pub fn task_ok(&mut self, task: impl Into<String>) {
        self.tasks.push(TaskRecord {
            task: task.into(),
            status: "ok".into(),
            message: None,
        });
    }

    pub fn task_failed(&mut self, task: impl Into<String>, message: impl Into<String>) {
        let task = task.into();
        let message = message.into();
        log::warn!("{task} failed: {message}");
        self.tasks.push(TaskRecord {
            task,
            status: "failed".into(),
            message: Some(message),
        });
    }

    pub fn failed_tasks(&self) -> usize {
        self.tasks.iter().filter(|t| t.status != "ok").count()
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }
}

/// Manifest of one run. Keys come out sorted because the document is
/// rendered through `serde_json::Value`.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub artifact: &'static str,
    pub artifact_version: &'static str,
    pub subcommand: String,
    pub status: String,
    pub started: String,
    pub finished: String,
    pub workers: usize,
    pub config: Value,
    pub resolved_config: Value,
    pub tasks: Vec<TaskRecord>,
    pub files: Vec<FileRecord>,
    pub notes: Vec<String>,
    pub summary: Value,
    pub error: Value,
}

pub const MANIFEST_NAME: &str = "manifest.json";

impl Manifest {
    pub fn render(&self) -> CliResult<String> {
        let value = serde_json::to_value(self)?;
        Ok(serde_json::to_string_pretty(&value)? + "\n")
    }

    pub fn write(&self, dir: &Path) -> CliResult<()> {
        let path = dir.join(MANIFEST_NAME);
        fs::write(&path, self.render()?).map_err(|e| CliError::io(&path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_cells_round_trip() {
        for x in [0.1, -3.0e-300, 1.0 / 3.0, 12345.678] {
            let text = Cell::Float(x).render();
            assert_eq!(text.parse::<f64>().unwrap(), x);
        }
        assert_eq!(Cell::Float(f64::INFINITY).render(), "inf");
    }

    #[test]
    fn csv_dialect() {
        let dir = tempfile::tempdir().unwrap();
        let mut t = Table::new(&["a", "b"]);
        t.push(vec![1u32.into(), 0.5.into()]);
        t.push(vec!["x,y".into(), 2.0.into()]);
        let p = dir.path().join("t.csv");
        t.write_csv(&p).unwrap();
        let text = std::fs::read_to_string(p).unwrap();
        assert_eq!(text, "a,b\n1,5.0000000000000000e-1\n\"x,y\",2.0000000000000000e0\n");
    }

    #[test]
    fn manifest_keys_are_sorted() {
        let m = Manifest {
            artifact: "esqpt-lab",
            artifact_version: "0",
            subcommand: "ced".into(),
            status: "ok".into(),
            started: "t0".into(),
            finished: "t1".into(),
            workers: 1,
            config: serde_json::json!({"zeta": 1, "alpha": 2}),
            resolved_config: Value::Null,
            tasks: vec![],
            files: vec![],
            notes: vec![],
            summary: Value::Null,
            error: Value::Null,
        };
        let text = m.render().unwrap();
        let keys: Vec<usize> = ["\"artifact\"", "\"config\"", "\"error\"", "\"files\"", "\"status\"", "\"workers\""]
            .iter()
            .map(|k| text.find(k).unwrap())
            .collect();
        assert!(keys.windows(2).all(|w| w[0] < w[1]));
        assert!(text.find("\"alpha\"").unwrap() < text.find("\"zeta\"").unwrap());
    }
}
