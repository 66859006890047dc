//! Result rows and their JSON / CSV emission.

use std::io::Write;

use anticyclo_core::CoefficientValue;
use serde::Serialize;

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// Significant digits kept for every emitted float.
pub const FLOAT_DIGITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            _ => Err(CliError::Config(format!("unknown format `{s}` (json or csv)"))),
        }
    }
}

/// Round to [`FLOAT_DIGITS`] significant digits so output is stable across
/// summation orders.
pub fn fixed(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return if x == 0.0 { 0.0 } else { x };
    }
    let r: f64 = format!("{:.*e}", FLOAT_DIGITS - 1, x).parse().unwrap();
    if r == 0.0 { 0.0 } else { r }
}

/// One line of output. The first ten columns are the sweep coordinates and
/// the value; the rest say what was checked.
#[derive(Debug, Clone, Default, Serialize, PartialEq)]
pub struct Row {
    pub q: Option<u64>,
    pub kind: Option<String>,
    #[serde(rename = "n_T")]
    pub n_t: Option<i64>,
    pub n_chi: Option<u32>,
    pub alpha: Option<String>,
    pub s: Option<String>,
    pub value_re: Option<f64>,
    pub value_im: Option<f64>,
    pub exceptional: Option<bool>,
    pub symbolic_deps: String,
    pub quantity: String,
    pub chi_uniformizer: Option<i64>,
    pub reference_re: Option<f64>,
    pub reference_im: Option<f64>,
    pub pass: bool,
    pub note: String,
}

impl Row {
    pub fn new(quantity: impl Into<String>) -> Self {
        Self { quantity: quantity.into(), pass: true, ..Self::default() }
    }

    pub fn value(mut self, v: &CoefficientValue) -> Self {
        let z = v.to_complex();
        self.value_re = Some(fixed(z.re));
        self.value_im = Some(fixed(z.im));
        self
    }

    pub fn real(mut self, x: f64) -> Self {
        self.value_re = Some(fixed(x));
        self.value_im = Some(0.0);
        self
    }

    pub fn reference(mut self, v: &CoefficientValue) -> Self {
        let z = v.to_complex();
        self.reference_re = Some(fixed(z.re));
        self.reference_im = Some(fixed(z.im));
        self
    }

    pub fn check(mut self, ok: bool) -> Self {
        self.pass &= ok;
        self
    }

    pub fn note(mut self, n: impl Into<String>) -> Self {
        self.note = n.into();
        self
    }

    pub fn fail(self, n: impl Into<String>) -> Self {
        self.check(false).note(n)
    }

    fn sort_key(&self) -> impl Ord + '_ {
        (&self.quantity, self.q, &self.kind, self.n_t, self.n_chi, self.chi_uniformizer, &self.alpha)
    }
}

/// Sort rows by configuration key; rows sharing a key keep their order.
pub fn sort_rows(rows: &mut [Row]) {
    rows.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
}

#[derive(Serialize)]
struct JsonRow<'a> {
    schema_version: u32,
    subcommand: &'a str,
    #[serde(flatten)]
    row: &'a Row,
}

pub fn write_rows(out: &mut dyn Write, format: Format, subcommand: &str, rows: &[Row]) -> Result<(), CliError> {
    match format {
        Format::Json => {
            for row in rows {
                serde_json::to_writer(&mut *out, &JsonRow { schema_version: SCHEMA_VERSION, subcommand, row })
                    .map_err(|e| CliError::Io(e.to_string()))?;
                writeln!(out).map_err(|e| CliError::Io(e.to_string()))?;
            }
        }
        Format::Csv => {
            let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(&mut *out);
            w.write_record(HEADER).map_err(|e| CliError::Io(e.to_string()))?;
            for row in rows {
                w.serialize(row).map_err(|e| CliError::Io(e.to_string()))?;
            }
            w.flush().map_err(|e| CliError::Io(e.to_string()))?;
        }
    }
    Ok(())
}

/// Written explicitly so an empty table still carries its header.
pub const HEADER: [&str; 16] = [
    "q",
    "kind",
    "n_T",
    "n_chi",
    "alpha",
    "s",
    "value_re",
    "value_im",
    "exceptional",
    "symbolic_deps",
    "quantity",
    "chi_uniformizer",
    "reference_re",
    "reference_im",
    "pass",
    "note",
];

/// Machine-readable record of the failing rows.
pub fn failure_record(subcommand: &str, rows: &[Row]) -> serde_json::Value {
    let failed: Vec<&Row> = rows.iter().filter(|r| !r.pass).collect();
    serde_json::json!({
        "schema_version": SCHEMA_VERSION,
        "subcommand": subcommand,
        "failures": failed.len(),
        "rows": failed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_is_stable() {
        assert_eq!(fixed(0.1 + 0.2), 0.3);
        assert_eq!(fixed(-0.0), 0.0);
        assert_eq!(fixed(1.0 / 3.0), 0.333333333333);
    }

    #[test]
    fn csv_header_and_row() {
        let mut buf = Vec::new();
        let r = Row { q: Some(3), kind: Some("split".into()), ..Row::new("I_T") }.real(0.5);
        write_rows(&mut buf, Format::Csv, "x", &[r]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), HEADER.join(","));
        assert!(lines.next().unwrap().starts_with("3,split,,,,,0.5,0.0,,,I_T"));
    }
}
