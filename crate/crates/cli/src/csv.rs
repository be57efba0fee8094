//! Deterministic CSV emission.
//!
//! Line 1 is `# ionghz <version> command=<cmd> key=value ...` with every
//! effective config key in sorted order; line 2 holds the column headers.
//! Probabilities carry 9 significant digits, other numbers the shortest text
//! that parses back to the same `f64`.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Probability(f64),
    Number(f64),
    Integer(i64),
    Text(String),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Probability(x) => significant(*x, 9),
            Cell::Number(x) => format!("{x:?}"),
            Cell::Integer(k) => k.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

/// Fixed-point rendering of `x` with `digits` significant digits.
pub fn significant(x: f64, digits: i32) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let exponent = x.abs().log10().floor() as i32;
    let decimals = (digits - 1 - exponent).max(0) as usize;
    format!("{x:.decimals$}")
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(headers: impl IntoIterator<Item = impl Into<String>>) -> Self {
        Table { headers: headers.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }
}

pub fn metadata_line(command: &str, effective: &BTreeMap<String, String>) -> String {
    let mut line = format!("# ionghz {VERSION} command={command}");
    for (k, v) in effective {
        line.push_str(&format!(" {k}={v}"));
    }
    line
}

pub fn render(metadata: &str, table: &Table) -> String {
    let mut out = String::new();
    out.push_str(metadata);
    out.push('\n');
    out.push_str(&table.headers.join(","));
    out.push('\n');
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(Cell::render).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Writes to `path`, or to stdout when `path` is `None`. Returns the number of
/// bytes written.
pub fn emit_csv(metadata: &str, table: &Table, path: Option<&Path>) -> io::Result<usize> {
    let text = render(metadata, table);
    match path {
        Some(p) => fs::write(p, &text)?,
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(text.len())
}

/// Metadata pairs, headers and rows of a rendered file.
pub type Parsed = (BTreeMap<String, String>, Vec<String>, Vec<Vec<String>>);

pub fn parse(text: &str) -> Option<Parsed> {
    let mut lines = text.split('\n');
    let meta = lines.next()?.strip_prefix("# ")?;
    let pairs = meta.split(' ').filter_map(|kv| kv.split_once('=')).map(|(k, v)| (k.to_string(), v.to_string()));
    let headers = lines.next()?.split(',').map(str::to_string).collect();
    let rows = lines.filter(|l| !l.is_empty()).map(|l| l.split(',').map(str::to_string).collect()).collect();
    Some((pairs.collect(), headers, rows))
}
