//! Report documents with a provenance header, rendered as JSON or CSV.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL: &str = env!("CARGO_PKG_NAME");
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i128),
    Float(f64),
    Text(String),
    Bool(bool),
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Float(v) => write!(f, "{v}"),
            Cell::Text(v) => f.write_str(v),
            Cell::Bool(v) => write!(f, "{v}"),
        }
    }
}

macro_rules! cell_from {
    ($($t:ty => $v:ident),*) => {
        $(impl From<$t> for Cell {
            fn from(x: $t) -> Self {
                Cell::$v(x.into())
            }
        })*
    };
}
cell_from!(f64 => Float, String => Text, &str => Text, bool => Bool, u32 => Int, u64 => Int, i64 => Int);

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i128)
    }
}

impl From<u128> for Cell {
    fn from(x: u128) -> Self {
        Cell::Int(x as i128)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub schema_version: u32,
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: Option<u64>,
    pub config: BTreeMap<String, String>,
}

/// Names the formula behind a bound column.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundColumn {
    pub column: String,
    pub name: String,
    pub formula: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// An asserted inequality `lhs <= rhs`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub inequality: String,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    pub inputs: String,
}

impl Check {
    pub fn le(name: &str, inequality: &str, lhs: f64, rhs: f64, inputs: String) -> Self {
        Check {
            name: name.into(),
            inequality: inequality.into(),
            lhs,
            rhs,
            holds: lhs <= rhs,
            inputs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub provenance: Provenance,
    pub bounds: Vec<BoundColumn>,
    pub tables: Vec<Table>,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub protocols: Vec<serde_json::Value>,
}

impl Report {
    pub fn new(command: &str, seed: Option<u64>, config: BTreeMap<String, String>) -> Self {
        Report {
            provenance: Provenance {
                schema_version: SCHEMA_VERSION,
                tool: TOOL.into(),
                version: VERSION.into(),
                command: command.into(),
                seed,
                config,
            },
            bounds: Vec::new(),
            tables: Vec::new(),
            checks: Vec::new(),
            protocols: Vec::new(),
        }
    }

    pub fn bound(&mut self, column: &str, name: &str, formula: &str) {
        self.bounds.push(BoundColumn {
            column: column.into(),
            name: name.into(),
            formula: formula.into(),
        });
    }

    pub fn violations(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.holds)
    }

    pub fn all_hold(&self) -> bool {
        self.violations().next().is_none()
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
                s.push('\n');
                s
            }
            Format::Csv => self.to_csv(),
        }
    }

    /// Commented header lines, then one CSV block per table (checks last).
    pub fn to_csv(&self) -> String {
        let p = &self.provenance;
        let mut out = String::new();
        let _ = writeln!(out, "# schema_version: {}", p.schema_version);
        let _ = writeln!(out, "# tool: {} {}", p.tool, p.version);
        let _ = writeln!(out, "# command: {}", p.command);
        match p.seed {
            Some(s) => {
                let _ = writeln!(out, "# seed: {s}");
            }
            None => out.push_str("# seed: none\n"),
        }
        for (k, v) in &p.config {
            let _ = writeln!(out, "# config {k}: {v}");
        }
        for b in &self.bounds {
            let _ = writeln!(out, "# bound {}: {} = {}", b.column, b.name, b.formula);
        }
        let mut checks = Table::new("checks", &["name", "inequality", "lhs", "rhs", "holds", "inputs"]);
        for c in &self.checks {
            checks.push(vec![
                c.name.clone().into(),
                c.inequality.clone().into(),
                c.lhs.into(),
                c.rhs.into(),
                c.holds.into(),
                c.inputs.clone().into(),
            ]);
        }
        let tables = self.tables.iter().chain((!self.checks.is_empty()).then_some(&checks));
        for (i, t) in tables.enumerate() {
            if i > 0 {
                out.push('\n');
            }
            let _ = writeln!(out, "# table: {}", t.name);
            out.push_str(&table_csv(t));
        }
        out
    }
}

fn table_csv(t: &Table) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&t.columns).expect("in-memory write");
    for row in &t.rows {
        w.write_record(row.iter().map(|c| c.to_string())).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let mut r = Report::new("demo", Some(7), BTreeMap::from([("d".into(), "2".into())]));
        r.bound("bound", "shift", "2/sqrt(n+1)");
        let mut t = Table::new("rows", &["lambda", "multiplicity"]);
        t.push(vec![0.375.into(), 2usize.into()]);
        t.push(vec![0.0.into(), 4usize.into()]);
        r.tables.push(t);
        r.checks.push(Check::le("c", "a <= b", 1.0, 2.0, "x=1".into()));
        r
    }

    #[test]
    fn csv_has_header_and_rows() {
        let csv = sample().to_csv();
        assert!(csv.starts_with("# schema_version: 1\n# tool: embezzle-lab"));
        assert!(csv.contains("# seed: 7\n# config d: 2\n# bound bound: shift = 2/sqrt(n+1)\n"));
        assert!(csv.contains("lambda,multiplicity\n0.375,2\n0,4\n"));
        assert!(csv.contains("c,a <= b,1,2,true,x=1\n"));
    }

    #[test]
    fn json_round_trips_through_serde() {
        let r = sample();
        let v: serde_json::Value = serde_json::from_str(&r.render(Format::Json)).unwrap();
        assert_eq!(v["provenance"]["schema_version"], 1);
        assert_eq!(v["tables"][0]["rows"][0][0], 0.375);
        assert!(r.all_hold());
    }
}
