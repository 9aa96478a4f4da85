//! Deterministic CSV and JSON output.
//!
//! Floats are written with 17 significant digits in scientific notation.
//! CSV files start with `#` lines carrying the resolved scenario, so every
//! file is self-describing; nothing time-dependent is ever written.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::{json, Value};

use crate::dynamics::Trajectory;
use crate::propagation::PropagationResult;
use crate::response::ResponseResult;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
    Bool(bool),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Float(x) => format_float(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => {
                format!("\"{}\"", s.replace('"', "\"\""))
            }
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Float(x) => json!(x),
            Cell::Int(i) => json!(i),
            Cell::Text(s) => json!(s),
            Cell::Bool(b) => json!(b),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }
}

/// Metadata lines (`key = value` text such as a serialized scenario) as `#` comments, then the table.
pub fn write_csv<W: Write>(mut w: W, metadata: &str, table: &Table) -> io::Result<()> {
    for line in metadata.lines() {
        writeln!(w, "# {line}")?;
    }
    writeln!(w, "{}", table.columns.join(","))?;
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(Cell::csv).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}

pub fn table_json(table: &Table) -> Value {
    let rows: Vec<Value> = table
        .rows
        .iter()
        .map(|r| {
            Value::Object(
                table
                    .columns
                    .iter()
                    .cloned()
                    .zip(r.iter().map(Cell::json))
                    .collect(),
            )
        })
        .collect();
    Value::Array(rows)
}

/// `{"metadata": ..., "data": ...}`, pretty-printed with a trailing newline.
pub fn write_json<W: Write, M: Serialize, D: Serialize>(
    mut w: W,
    metadata: &M,
    data: &D,
) -> io::Result<()> {
    let doc = json!({ "metadata": metadata, "data": data });
    serde_json::to_writer_pretty(&mut w, &doc)?;
    writeln!(w)
}

pub const RESPONSE_COLUMNS: &[&str] = &[
    "parameter",
    "re_alpha_a",
    "im_alpha_a",
    "re_alpha_b",
    "im_alpha_b",
    "ratio_a",
    "ratio_b",
    "v_g_a",
    "v_g_b",
    "method",
    "doppler_averaged",
];

/// One response row; absent fields and missing group velocities are written as 0.
pub fn response_row(parameter: f64, r: &ResponseResult) -> Vec<Cell> {
    let (a, b) = (r.alpha_a.value(), r.alpha_b.value());
    let ratio = |re: f64, im: f64| if im == 0.0 { 0.0 } else { re / im };
    let method = match serde_json::to_value(r.method) {
        Ok(Value::String(s)) => s,
        _ => String::new(),
    };
    vec![
        parameter.into(),
        a.re.into(),
        a.im.into(),
        b.re.into(),
        b.im.into(),
        ratio(a.re, a.im).into(),
        ratio(b.re, b.im).into(),
        r.group_velocity_a.unwrap_or(0.0).into(),
        r.group_velocity_b.unwrap_or(0.0).into(),
        Cell::Text(method),
        r.doppler_averaged.into(),
    ]
}

pub fn trajectory_table(tr: &Trajectory) -> Table {
    let mut t = Table::new(&[
        "t", "re_a1", "im_a1", "re_a2", "im_a2", "re_a3", "im_a3", "re_a4", "im_a4", "re_a5",
        "im_a5", "re_a6", "im_a6", "norm",
    ]);
    for s in &tr.states {
        let mut row: Vec<Cell> = vec![s.time.into()];
        for a in s.amplitudes {
            row.push(a.re.into());
            row.push(a.im.into());
        }
        row.push(s.norm_sqr().into());
        t.push(row);
    }
    t
}

/// Grid dump of every recorded slice: z, ξ, |E_a|, arg E_a, |E_b|, arg E_b.
pub fn propagation_table(r: &PropagationResult) -> Table {
    let mut t = Table::new(&["z", "xi", "abs_e_a", "arg_e_a", "abs_e_b", "arg_e_b"]);
    for s in &r.snapshots {
        for (k, &xi) in r.times.iter().enumerate() {
            t.push(vec![
                s.z.into(),
                xi.into(),
                s.e_a[k].norm().into(),
                s.e_a[k].arg().into(),
                s.e_b[k].norm().into(),
                s.e_b[k].arg().into(),
            ]);
        }
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_seventeen_digits() {
        assert_eq!(format_float(0.1), "1.0000000000000001e-1");
        assert_eq!(format_float(-2.5e10), "-2.5000000000000000e10");
        let x = 1.0 / 3.0;
        assert_eq!(format_float(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn csv_has_header_and_rows() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec![1.0.into(), "x".into()]);
        let mut out = Vec::new();
        write_csv(&mut out, "name = demo\nrun = steady", &t).unwrap();
        let s = String::from_utf8(out).unwrap();
        assert_eq!(
            s,
            "# name = demo\n# run = steady\na,b\n1.0000000000000000e0,x\n"
        );
    }

    #[test]
    fn text_with_separators_is_quoted() {
        assert_eq!(Cell::from("a, \"b\"").csv(), "\"a, \"\"b\"\"\"");
        assert_eq!(Cell::from("plain").csv(), "plain");
    }

    #[test]
    fn json_rows_are_keyed_by_column() {
        let mut t = Table::new(&["a", "flag"]);
        t.push(vec![2.0.into(), true.into()]);
        assert_eq!(table_json(&t), json!([{ "a": 2.0, "flag": true }]));
    }
}
