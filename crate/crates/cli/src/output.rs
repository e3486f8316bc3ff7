//! CSV emission: fixed column order, header row, comma separation, floats at
//! 17 significant digits so every value round-trips bit-exactly. Data goes
//! to the output file only; progress and summaries belong on stderr.

use std::fmt;
use std::io::Write;
use std::path::Path;

/// One CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    U(u64),
    I(i64),
    F(f64),
    S(String),
    B(bool),
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::U(v) => write!(f, "{v}"),
            Field::I(v) => write!(f, "{v}"),
            Field::F(v) => f.write_str(&format_f64(*v)),
            Field::S(v) => f.write_str(v),
            Field::B(v) => write!(f, "{v}"),
        }
    }
}

/// 17 significant digits: lossless decimal form of an f64.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// A finished experiment: a header and data rows in fixed order.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Field>>,
}

impl ExperimentResult {
    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            debug_assert_eq!(row.len(), self.header.len(), "row width must match header");
            let cells: Vec<String> = row.iter().map(|f| f.to_string()).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> std::io::Result<()> {
        let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
        file.write_all(self.to_csv_string().as_bytes())?;
        file.flush()
    }
}
