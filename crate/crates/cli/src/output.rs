//! Self-describing CSV tables.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Flag(bool),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Flag(x)
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            // Shortest round-trip representation: deterministic and exact.
            Cell::Num(x) => format!("{x}"),
            Cell::Int(x) => x.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Flag(b) => b.to_string(),
        }
    }
}

/// A table plus the `#` header block describing it.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub description: String,
    /// `(name, unit)`; unit is empty for dimensionless columns.
    pub columns: Vec<(String, String)>,
    pub notes: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, description: &str, columns: &[(&str, &str)]) -> Self {
        Self {
            name: name.to_string(),
            description: description.to_string(),
            columns: columns
                .iter()
                .map(|(n, u)| (n.to_string(), u.to_string()))
                .collect(),
            notes: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(
            row.len(),
            self.columns.len(),
            "row width does not match table `{}`",
            self.name
        );
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|(n, _)| n == name)
    }

    /// Numeric values of a column (non-numeric cells are skipped).
    pub fn numbers(&self, name: &str) -> Vec<f64> {
        let Some(k) = self.column(name) else {
            return Vec::new();
        };
        self.rows
            .iter()
            .filter_map(|r| match r[k] {
                Cell::Num(x) => Some(x),
                Cell::Int(x) => Some(x as f64),
                _ => None,
            })
            .collect()
    }

    pub fn render(&self, context: &RunContext) -> Result<String> {
        let mut out = String::new();
        writeln!(out, "# nhbs {} / {}", context.command, self.name)?;
        writeln!(out, "# {}", self.description)?;
        writeln!(out, "# seed: {}", context.seed)?;
        writeln!(
            out,
            "# units: frequencies are f/2pi in MHz, times in ns, phases in rad"
        )?;
        for (name, unit) in &self.columns {
            if unit.is_empty() {
                writeln!(out, "# column {name}")?;
            } else {
                writeln!(out, "# column {name} [{unit}]")?;
            }
        }
        for n in &self.notes {
            writeln!(out, "# note: {n}")?;
        }
        writeln!(out, "# resolved configuration:")?;
        for line in context.config_toml.lines() {
            writeln!(out, "#   {line}")?;
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.columns.iter().map(|c| c.0.as_str()))?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        out.push_str(&String::from_utf8(w.into_inner().context("flushing CSV")?)?);
        Ok(out)
    }
}

/// Information shared by every table of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunContext {
    pub command: String,
    pub seed: u64,
    pub config_toml: String,
}

/// The output directory must already exist.
pub fn check_out_dir(dir: &Path) -> Result<()> {
    if !dir.is_dir() {
        bail!("output directory {} does not exist", dir.display());
    }
    Ok(())
}

pub fn write_tables(dir: &Path, tables: &[Table], context: &RunContext) -> Result<Vec<PathBuf>> {
    check_out_dir(dir)?;
    tables
        .iter()
        .map(|t| {
            let path = dir.join(format!("{}.csv", t.name));
            std::fs::write(&path, t.render(context)?)
                .with_context(|| format!("writing {}", path.display()))?;
            Ok(path)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_then_rows() {
        let mut t = Table::new("demo", "a demo table", &[("x", "ns"), ("label", "")]);
        t.push(vec![0.5.into(), "a,b".into()]);
        t.note("one note");
        let ctx = RunContext {
            command: "run".into(),
            seed: 7,
            config_toml: "[grid]\nn_z = 3\n".into(),
        };
        let s = t.render(&ctx).unwrap();
        let body: Vec<&str> = s.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(body, vec!["x,label", "0.5,\"a,b\""]);
        assert!(s.contains("# column x [ns]"));
        assert!(s.contains("#   n_z = 3"));
        assert_eq!(t.numbers("x"), vec![0.5]);
    }

    #[test]
    fn missing_directory_is_an_error() {
        assert!(check_out_dir(Path::new("/definitely/not/here")).is_err());
    }
}
