//! Result tables and their CSV/JSON rendering.

use std::cmp::Ordering;

/// A single cell. Floats are printed with 17 significant digits.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u64),
    Float(f64),
    Bool(bool),
    Text(String),
    Empty,
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

fn float_text(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(x) => float_text(*x),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(x) if x.is_finite() => float_text(*x),
            Cell::Float(_) | Cell::Empty => "null".into(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => serde_json::to_string(s).expect("strings serialize"),
        }
    }
}

/// Ordering key of a row: instance index, exponent, then a tiebreak.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RowKey {
    pub instance: u64,
    pub p: f64,
    pub extra: u64,
}

impl RowKey {
    pub fn new(instance: u64, p: f64) -> Self {
        Self {
            instance,
            p,
            extra: 0,
        }
    }

    fn cmp(&self, other: &Self) -> Ordering {
        self.instance
            .cmp(&other.instance)
            .then(self.p.total_cmp(&other.p))
            .then(self.extra.cmp(&other.extra))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    columns: Vec<&'static str>,
    rows: Vec<(RowKey, Vec<Cell>)>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, key: RowKey, cells: Vec<Cell>) {
        assert_eq!(cells.len(), self.columns.len(), "row width");
        self.rows.push((key, cells));
    }

    pub fn columns(&self) -> &[&'static str] {
        &self.columns
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Cell `column` of row `row`, after sorting.
    pub fn cell(&self, row: usize, column: &str) -> Option<&Cell> {
        let j = self.columns.iter().position(|c| *c == column)?;
        self.rows.get(row).map(|(_, cells)| &cells[j])
    }

    pub fn sort(&mut self) {
        self.rows.sort_by(|a, b| a.0.cmp(&b.0));
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for (_, cells) in &self.rows {
            w.write_record(cells.iter().map(Cell::csv))
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 output")
    }

    /// An array of objects, one per row, keys in column order.
    pub fn to_json(&self) -> String {
        let mut out = String::from("[\n");
        for (i, (_, cells)) in self.rows.iter().enumerate() {
            out.push_str("  {");
            for (j, (name, cell)) in self.columns.iter().zip(cells).enumerate() {
                if j > 0 {
                    out.push_str(", ");
                }
                out.push_str(&format!("\"{name}\": {}", cell.json()));
            }
            out.push('}');
            if i + 1 < self.rows.len() {
                out.push(',');
            }
            out.push('\n');
        }
        out.push_str("]\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, 2f64.sqrt(), 1e-300, 12345.678] {
            assert_eq!(float_text(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn rows_sort_by_instance_then_p() {
        let mut t = Table::new(&["instance", "p"]);
        for (i, p) in [(1u64, 3.0), (0, 4.0), (0, 2.5), (1, 2.5)] {
            t.push(RowKey::new(i, p), vec![i.into(), p.into()]);
        }
        t.sort();
        let order: Vec<(u64, f64)> = (0..4)
            .map(|r| match (t.cell(r, "instance"), t.cell(r, "p")) {
                (Some(Cell::Int(i)), Some(Cell::Float(p))) => (*i, *p),
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(order, vec![(0, 2.5), (0, 4.0), (1, 2.5), (1, 3.0)]);
    }

    #[test]
    fn json_is_valid() {
        let mut t = Table::new(&["a", "b", "c"]);
        t.push(
            RowKey::new(0, 1.0),
            vec![1.5.into(), Cell::Empty, "x\"y".into()],
        );
        t.push(
            RowKey::new(1, 1.0),
            vec![f64::NAN.into(), true.into(), 3usize.into()],
        );
        let v: serde_json::Value = serde_json::from_str(&t.to_json()).unwrap();
        assert_eq!(v[0]["a"], 1.5);
        assert!(v[1]["a"].is_null());
        assert_eq!(v[0]["c"], "x\"y");
    }
}
