//! Tabular output in CSV, JSON lines or an aligned text table.

use std::io::Write;

use clap::ValueEnum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    JsonLines,
    Pretty,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Flag(bool),
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
        Cell::Flag(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
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

/// Twelve significant digits, '.' as decimal separator, no grouping.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..15).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{x:.11e}")
    }
}

impl Cell {
    pub fn text(&self) -> String {
        match self {
            Cell::Num(x) => fmt_num(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Flag(b) => b.to_string(),
            Cell::Missing => String::new(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Cell::Num(x) if x.is_finite() => serde_json::Value::from(*x),
            Cell::Num(_) | Cell::Missing => serde_json::Value::Null,
            Cell::Int(i) => serde_json::Value::from(*i),
            Cell::Text(s) => serde_json::Value::from(s.as_str()),
            Cell::Flag(b) => serde_json::Value::from(*b),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write(&self, format: Format, out: &mut dyn Write) -> std::io::Result<()> {
        match format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(out);
                w.write_record(&self.columns)?;
                for row in &self.rows {
                    w.write_record(row.iter().map(Cell::text))?;
                }
                w.flush()
            }
            Format::JsonLines => {
                for row in &self.rows {
                    let obj: serde_json::Map<String, serde_json::Value> = self
                        .columns
                        .iter()
                        .zip(row)
                        .map(|(c, v)| (c.to_string(), v.json()))
                        .collect();
                    writeln!(out, "{}", serde_json::Value::Object(obj))?;
                }
                Ok(())
            }
            Format::Pretty => {
                let cells: Vec<Vec<String>> = self
                    .rows
                    .iter()
                    .map(|r| r.iter().map(|c| if *c == Cell::Missing { "-".into() } else { c.text() }).collect())
                    .collect();
                let widths: Vec<usize> = (0..self.columns.len())
                    .map(|j| cells.iter().map(|r| r[j].len()).chain([self.columns[j].len()]).max().unwrap_or(0))
                    .collect();
                let line = |items: Vec<&str>| -> String {
                    items
                        .iter()
                        .zip(&widths)
                        .map(|(s, w)| format!("{s:>w$}"))
                        .collect::<Vec<_>>()
                        .join("  ")
                };
                writeln!(out, "{}", line(self.columns.clone()))?;
                let rules: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
                writeln!(out, "{}", line(rules.iter().map(String::as_str).collect()))?;
                for r in &cells {
                    writeln!(out, "{}", line(r.iter().map(String::as_str).collect()))?;
                }
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_num(1.0), "1");
        assert_eq!(fmt_num(16.0), "16");
        assert_eq!(fmt_num(0.30470400000000004), "0.304704");
        assert_eq!(fmt_num(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_num(-2.0 / 3.0 * 1e3), "-666.666666667");
        assert_eq!(fmt_num(1.5e-9), "1.50000000000e-9");
        assert_eq!(fmt_num(0.0), "0");
        for x in [std::f64::consts::PI * 1e7, 6.605013725122437, 1e-4 / 7.0] {
            let back: f64 = fmt_num(x).parse().unwrap();
            assert!((back - x).abs() <= 1e-11 * x.abs());
        }
    }

    #[test]
    fn formats_agree() {
        let mut t = Table::new(&["a", "b", "c"]);
        t.push(vec![Cell::Num(0.1 + 0.2), Cell::Text("x,y".into()), Cell::Missing]);
        let mut csv_out = Vec::new();
        t.write(Format::Csv, &mut csv_out).unwrap();
        assert_eq!(String::from_utf8(csv_out).unwrap(), "a,b,c\n0.3,\"x,y\",\n");
        let mut pretty = Vec::new();
        t.write(Format::Pretty, &mut pretty).unwrap();
        assert!(String::from_utf8(pretty).unwrap().contains("0.3"));
        let mut jl = Vec::new();
        t.write(Format::JsonLines, &mut jl).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&jl).unwrap();
        assert_eq!(v["c"], serde_json::Value::Null);
    }
}
