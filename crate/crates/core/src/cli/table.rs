use std::fmt::Write as _;

use serde_json::{json, Map, Value};

/// Significant digits written for every floating-point cell.
pub const SIGNIFICANT_DIGITS: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Bool(bool),
    Text(String),
    Missing,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
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
        Cell::Text(v.to_owned())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Missing, Cell::Num)
    }
}

/// Formats `x` with [`SIGNIFICANT_DIGITS`] significant digits, `%g` style.
///
/// Fixed notation for decimal exponents in `[-5, 12)`, scientific otherwise;
/// trailing zeros are dropped and `-0` prints as `0`.
pub fn format_sig(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let p = SIGNIFICANT_DIGITS;
    // the exponent after rounding, read off the scientific rendering
    let sci = format!("{:.*e}", p - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..p as i32).contains(&exp) {
        let decimals = (p as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        let m = trim_zeros(mantissa.to_owned());
        format!("{m}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    let t = s.trim_end_matches('0').trim_end_matches('.');
    if t == "-0" {
        "0".into()
    } else {
        t.to_owned()
    }
}

/// Rows of a sweep with named columns.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(columns: &[S]) -> Self {
        Self { columns: columns.iter().map(|c| c.as_ref().to_owned()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric values of one column; non-numeric cells are skipped.
    pub fn numbers(&self, name: &str) -> Vec<f64> {
        let Some(i) = self.column_index(name) else { return Vec::new() };
        self.rows
            .iter()
            .filter_map(|r| match r[i] {
                Cell::Num(v) => Some(v),
                Cell::Int(v) => Some(v as f64),
                _ => None,
            })
            .collect()
    }

    /// Comma-separated, LF line endings, header always present.
    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(csv_cell).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    /// `{"meta": meta, "rows": [{column: value, ...}, ...]}`
    pub fn to_json(&self, meta: Value) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = Map::new();
                for (c, v) in self.columns.iter().zip(row) {
                    obj.insert(c.clone(), json_cell(v));
                }
                Value::Object(obj)
            })
            .collect();
        let mut s = serde_json::to_string_pretty(&json!({ "meta": meta, "rows": rows }))
            .expect("table values are always serializable");
        s.push('\n');
        s
    }
}

fn csv_cell(c: &Cell) -> String {
    match c {
        Cell::Num(v) => format_sig(*v),
        Cell::Int(v) => v.to_string(),
        Cell::Bool(v) => v.to_string(),
        Cell::Text(t) if t.contains([',', '"', '\n']) => format!("\"{}\"", t.replace('"', "\"\"")),
        Cell::Text(t) => t.clone(),
        Cell::Missing => String::new(),
    }
}

fn json_cell(c: &Cell) -> Value {
    match c {
        // round through the CSV rendering so both formats carry the same digits
        Cell::Num(v) if v.is_finite() => format_sig(*v).parse::<f64>().map(Value::from).unwrap_or(Value::Null),
        Cell::Num(_) | Cell::Missing => Value::Null,
        Cell::Int(v) => Value::from(*v),
        Cell::Bool(v) => Value::from(*v),
        Cell::Text(t) => Value::from(t.as_str()),
    }
}
