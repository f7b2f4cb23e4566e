//! In-memory result tables and their CSV rendering.
//!
//! CSV layout: `#`-prefixed metadata lines (key: value), one header line, then
//! data rows, all LF-terminated. Floats are written with 17 significant
//! digits so parsing them back reproduces the exact bit pattern; identical
//! tables therefore serialize to identical bytes.

/// One cell.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Int(i64),
    UInt(u64),
    Float(f64),
    Text(String),
}

/// Render a float with 17 significant digits; round-trips exactly.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".to_string() } else { "-inf".to_string() }
    } else {
        format!("{x:.16e}")
    }
}

impl std::fmt::Display for Value {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::UInt(v) => write!(f, "{v}"),
            Value::Float(v) => f.write_str(&format_float(*v)),
            Value::Text(v) => f.write_str(v),
        }
    }
}

impl Value {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Int(v) => Some(*v as f64),
            Value::UInt(v) => Some(*v as f64),
            Value::Float(v) => Some(*v),
            Value::Text(_) => None,
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            Value::Text(v) => Some(v),
            _ => None,
        }
    }
}

/// A result table: ordered metadata, a column header, and rows.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub metadata: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            metadata: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl std::fmt::Display) {
        self.metadata.push((key.to_string(), value.to_string()));
    }

    pub fn push_row(&mut self, row: Vec<Value>) {
        assert_eq!(
            row.len(),
            self.columns.len(),
            "row width {} does not match {} columns",
            row.len(),
            self.columns.len()
        );
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Cell accessor by column name; panics on unknown columns (test and
    /// plotting convenience).
    pub fn cell(&self, row: usize, column: &str) -> &Value {
        let idx = self
            .column_index(column)
            .unwrap_or_else(|| panic!("no column named '{column}'"));
        &self.rows[row][idx]
    }

    pub fn float(&self, row: usize, column: &str) -> f64 {
        self.cell(row, column)
            .as_f64()
            .unwrap_or_else(|| panic!("column '{column}' is not numeric"))
    }

    pub fn meta_value(&self, key: &str) -> Option<&str> {
        self.metadata
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            out.push_str("# ");
            out.push_str(k);
            out.push_str(": ");
            out.push_str(v);
            out.push('\n');
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting_roundtrips() {
        for &x in &[
            0.0,
            -0.0,
            1.0,
            std::f64::consts::PI,
            1e-300,
            -2.5e17,
            f64::MIN_POSITIVE,
            55.0 / 955.0,
        ] {
            let s = format_float(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{x} -> {s} -> {back}");
        }
        assert_eq!(format_float(f64::INFINITY), "inf");
        assert_eq!(format_float(f64::NEG_INFINITY), "-inf");
        assert_eq!(format_float(f64::NAN), "nan");
    }

    #[test]
    fn csv_layout() {
        let mut t = Table::new(&["trial", "value", "tag"]);
        t.meta("experiment", "demo");
        t.meta("seed", 7);
        t.push_row(vec![
            Value::UInt(0),
            Value::Float(0.5),
            Value::Text("a;b".into()),
        ]);
        let csv = t.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "# experiment: demo");
        assert_eq!(lines[1], "# seed: 7");
        assert_eq!(lines[2], "trial,value,tag");
        assert_eq!(lines[3], "0,5.0000000000000000e-1,a;b");
        assert!(csv.ends_with('\n'));
    }

    #[test]
    fn accessors() {
        let mut t = Table::new(&["a", "b"]);
        t.push_row(vec![Value::Int(-3), Value::Float(2.5)]);
        assert_eq!(t.float(0, "a"), -3.0);
        assert_eq!(t.float(0, "b"), 2.5);
        assert_eq!(t.column_index("b"), Some(1));
        assert_eq!(t.column_index("z"), None);
    }

    #[test]
    #[should_panic(expected = "row width")]
    fn row_width_is_enforced() {
        let mut t = Table::new(&["a", "b"]);
        t.push_row(vec![Value::Int(1)]);
    }
}
