use std::io::Write;

use anyhow::Result;
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Real(f64),
    Count(u64),
}

impl Cell {
    /// Shortest text that parses back to the same value. Plain notation
    /// in the comfortable range, exponent notation outside it.
    fn text(&self) -> String {
        match *self {
            Cell::Count(n) => n.to_string(),
            Cell::Real(x) if x == 0.0 || (1e-4..1e15).contains(&x.abs()) || !x.is_finite() => format!("{x}"),
            Cell::Real(x) => format!("{x:e}"),
        }
    }

    fn json(&self) -> Value {
        match *self {
            Cell::Count(n) => Value::from(n),
            Cell::Real(x) => Value::from(x),
        }
    }
}

/// Column names plus rows; written either as CSV with one header row or as
/// one JSON object per line.
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// Emitted as a `#` line before the CSV header, or as a
    /// `{"comment": …}` record in JSON mode.
    pub comment: Option<String>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
            comment: None,
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write_csv(&self, out: &mut dyn Write) -> Result<()> {
        if let Some(c) = &self.comment {
            writeln!(out, "# {c}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::text))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json(&self, out: &mut dyn Write) -> Result<()> {
        if let Some(c) = &self.comment {
            writeln!(out, "{}", serde_json::json!({ "comment": c }))?;
        }
        for row in &self.rows {
            let record: Map<String, Value> = self
                .columns
                .iter()
                .zip(row)
                .map(|(k, v)| (k.to_string(), v.json()))
                .collect();
            writeln!(out, "{}", Value::Object(record))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.0, 1.0, -0.1, 1e-300, 6.02e23, std::f64::consts::PI, 1e15, 9.99e-5] {
            let t = Cell::Real(x).text();
            assert_eq!(t.parse::<f64>().unwrap(), x, "{t}");
        }
        assert_eq!(Cell::Real(1e300).text(), "1e300");
    }

    #[test]
    fn csv_layout() {
        let mut t = Table::new(&["x", "re"]);
        t.push(vec![Cell::Real(0.5), Cell::Real(-2.0)]);
        t.comment = Some("note".into());
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "# note\nx,re\n0.5,-2\n");
    }
}
