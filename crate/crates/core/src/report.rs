//! Deterministic text output: fixed float format and column order.

use std::fmt::Write as _;

/// Scientific notation with nine significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.8e}")
}

/// Linear ratio to dB.
pub fn to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Small CSV builder; every row ends with `\n`.
#[derive(Debug, Default, Clone)]
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn with_header(columns: &[&str]) -> Self {
        let mut csv = Csv::default();
        csv.text.push_str(&columns.join(","));
        csv.text.push('\n');
        csv
    }

    /// Appends a row of leading text fields followed by formatted floats.
    pub fn row(&mut self, labels: &[String], values: &[f64]) {
        let mut first = true;
        for l in labels {
            if !first {
                self.text.push(',');
            }
            self.text.push_str(l);
            first = false;
        }
        for v in values {
            if !first {
                self.text.push(',');
            }
            let _ = write!(self.text, "{}", fmt_f64(*v));
            first = false;
        }
        self.text.push('\n');
    }

    pub fn finish(self) -> String {
        self.text
    }
}
