//! Table emission and re-parsing. Every subcommand produces one `Table`:
//! the effective run configuration, a header row, data rows, and named
//! cross-check outcomes. CSV puts the configuration in `# key = value`
//! comment lines above the header; JSON nests it as `{config, rows, checks}`.
//! Both forms re-parse losslessly, which the tests rely on.

use std::fmt::Write as _;

use serde_json::{json, Map, Value};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    UInt(u64),
    /// Arbitrary-precision integer, carried as its decimal string.
    Big(String),
    Float(f64),
    Text(String),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::UInt(v) => v.to_string(),
            Cell::Big(s) => s.clone(),
            // `{}` on f64 prints the shortest string that parses back to
            // the same bits, so CSV round trips exactly
            Cell::Float(v) => format!("{v}"),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::UInt(v) => json!(v),
            Cell::Big(s) => json!(s),
            Cell::Float(v) => json!(v),
            Cell::Text(s) => json!(s),
            Cell::Empty => Value::Null,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub config: Vec<(String, String)>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub checks: Vec<(&'static str, bool)>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Table {
        Table {
            config: Vec::new(),
            columns,
            rows: Vec::new(),
            checks: Vec::new(),
        }
    }

    pub fn config(&mut self, key: &str, value: impl ToString) {
        self.config.push((key.to_string(), value.to_string()));
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn check(&mut self, name: &'static str, ok: bool) {
        self.checks.push((name, ok));
    }

    pub fn failed_checks(&self) -> Vec<&'static str> {
        self.checks
            .iter()
            .filter(|(_, ok)| !ok)
            .map(|(name, _)| *name)
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (key, value) in &self.config {
            writeln!(out, "# {key} = {value}").unwrap();
        }
        for (name, ok) in &self.checks {
            writeln!(
                out,
                "# check {name} = {}",
                if *ok { "pass" } else { "FAIL" }
            )
            .unwrap();
        }
        writeln!(out, "{}", self.columns.join(",")).unwrap();
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            writeln!(out, "{}", cells.join(",")).unwrap();
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let mut config = Map::new();
        for (key, value) in &self.config {
            config.insert(key.clone(), json!(value));
        }
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut object = Map::new();
                for (name, cell) in self.columns.iter().zip(row) {
                    object.insert((*name).to_string(), cell.json());
                }
                Value::Object(object)
            })
            .collect();
        let mut checks = Map::new();
        for (name, ok) in &self.checks {
            checks.insert((*name).to_string(), json!(ok));
        }
        json!({ "config": config, "rows": rows, "checks": checks })
    }

    pub fn render(&self, json: bool) -> String {
        if json {
            let mut s = serde_json::to_string_pretty(&self.to_json()).expect("serializable");
            s.push('\n');
            s
        } else {
            self.to_csv()
        }
    }
}

/// A CSV table read back: configuration pairs, column names, and rows of
/// raw cell strings.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedCsv {
    pub config: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

pub fn parse_csv(text: &str) -> Result<ParsedCsv, String> {
    let mut config = Vec::new();
    let mut columns = None;
    let mut rows = Vec::new();
    for line in text.lines() {
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((key, value)) = comment.split_once('=') {
                config.push((key.trim().to_string(), value.trim().to_string()));
            }
            continue;
        }
        let cells: Vec<String> = line.split(',').map(str::to_string).collect();
        match &columns {
            None => columns = Some(cells),
            Some(header) => {
                if cells.len() != header.len() {
                    return Err(format!(
                        "row has {} cells, header has {}",
                        cells.len(),
                        header.len()
                    ));
                }
                rows.push(cells);
            }
        }
    }
    Ok(ParsedCsv {
        config,
        columns: columns.ok_or("missing header row")?,
        rows,
    })
}
