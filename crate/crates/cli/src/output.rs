use std::io::Write;
use std::path::Path;

use charpoly_core::LogSigned;
use serde::Serialize;

use crate::config::Format;
use crate::error::CliError;

/// Version of the output schema, written into every row.
pub const SPEC_VERSION: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Mc,
    Quadrature,
    Asymptotic,
}

/// One computed point.
///
/// `std_error` is absolute for `D`-type quantities and relative for `F`.
/// `reference_error` is filled by convergence studies only.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyRow {
    pub spec_version: &'static str,
    pub quantity: String,
    pub n: Option<usize>,
    pub p: Option<f64>,
    pub lambda0: Option<f64>,
    pub x1: Option<f64>,
    pub x2: Option<f64>,
    pub x_extra: String,
    pub method: Method,
    /// Plain value when it is representable as a finite `f64`.
    pub value: Option<f64>,
    pub value_log: Option<f64>,
    pub value_sign: Option<f64>,
    pub std_error: Option<f64>,
    pub imag_residual: Option<f64>,
    pub regime: String,
    pub seed: Option<u64>,
    pub reference_error: Option<f64>,
    pub wall_time: Option<f64>,
}

impl StudyRow {
    pub fn new(quantity: &str, method: Method) -> Self {
        Self {
            spec_version: SPEC_VERSION,
            quantity: quantity.into(),
            n: None,
            p: None,
            lambda0: None,
            x1: None,
            x2: None,
            x_extra: String::new(),
            method,
            value: None,
            value_log: None,
            value_sign: None,
            std_error: None,
            imag_residual: None,
            regime: String::new(),
            seed: None,
            reference_error: None,
            wall_time: None,
        }
    }

    pub fn offsets(mut self, x: &[f64]) -> Self {
        self.x1 = x.first().copied();
        self.x2 = x.get(1).copied();
        self.x_extra = x.iter().skip(2).map(f64::to_string).collect::<Vec<_>>().join(";");
        self
    }

    pub fn point(mut self, n: Option<usize>, p: Option<f64>, lambda0: Option<f64>) -> Self {
        self.n = n;
        self.p = p;
        self.lambda0 = lambda0;
        self
    }

    pub fn value(mut self, v: f64) -> Self {
        self.value = v.is_finite().then_some(v);
        self.value_log = Some(v.abs().ln());
        self.value_sign = Some(if v < 0.0 { -1.0 } else { 1.0 });
        self
    }

    pub fn log_signed(mut self, v: &LogSigned) -> Self {
        self.value_log = Some(v.log_magnitude);
        self.value_sign = Some(v.sign());
        self.value = Some(v.to_real()).filter(|r| r.is_finite());
        self
    }

    pub fn regime(mut self, r: impl Into<String>) -> Self {
        self.regime = r.into();
        self
    }

    /// The value as a plain number, if present.
    pub fn plain(&self) -> Option<f64> {
        Some(self.value_sign? * self.value_log?.exp())
    }
}

/// One line of a verification report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyRow {
    pub spec_version: &'static str,
    pub suite: String,
    pub check: String,
    pub samples: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl VerifyRow {
    pub fn new(suite: &str, check: impl Into<String>, samples: usize, max_residual: f64, tolerance: f64) -> Self {
        Self {
            spec_version: SPEC_VERSION,
            suite: suite.into(),
            check: check.into(),
            samples,
            max_residual,
            tolerance,
            passed: max_residual <= tolerance,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum Rows {
    Study(Vec<StudyRow>),
    Verify(Vec<VerifyRow>),
}

/// Everything a subcommand produces.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub spec_version: &'static str,
    pub command: &'static str,
    pub config: serde_json::Value,
    pub rows: Rows,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary: Option<serde_json::Value>,
    /// Nonzero when some computation failed or a check did not pass.
    #[serde(skip)]
    pub failures: usize,
}

impl Report {
    pub fn render(&self, format: Format) -> Result<Vec<u8>, CliError> {
        match format {
            Format::Json => {
                let mut buf = serde_json::to_vec_pretty(self)?;
                buf.push(b'\n');
                Ok(buf)
            }
            Format::Csv => {
                let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
                match &self.rows {
                    Rows::Study(rows) => rows.iter().try_for_each(|r| w.serialize(r))?,
                    Rows::Verify(rows) => rows.iter().try_for_each(|r| w.serialize(r))?,
                }
                if self.rows_is_empty() {
                    write_header(&mut w, &self.rows)?;
                }
                w.into_inner().map_err(|e| CliError::Io(e.into_error()))
            }
        }
    }

    fn rows_is_empty(&self) -> bool {
        match &self.rows {
            Rows::Study(r) => r.is_empty(),
            Rows::Verify(r) => r.is_empty(),
        }
    }

    pub fn write(&self, format: Format, out: Option<&Path>) -> Result<(), CliError> {
        let bytes = self.render(format)?;
        match out {
            Some(path) => std::fs::write(path, bytes)?,
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout.write_all(&bytes)?;
                stdout.flush()?;
            }
        }
        Ok(())
    }
}

fn write_header(w: &mut csv::Writer<Vec<u8>>, rows: &Rows) -> Result<(), CliError> {
    let header: &[&str] = match rows {
        Rows::Study(_) => &[
            "spec_version",
            "quantity",
            "n",
            "p",
            "lambda0",
            "x1",
            "x2",
            "x_extra",
            "method",
            "value",
            "value_log",
            "value_sign",
            "std_error",
            "imag_residual",
            "regime",
            "seed",
            "reference_error",
            "wall_time",
        ],
        Rows::Verify(_) => &["spec_version", "suite", "check", "samples", "max_residual", "tolerance", "passed"],
    };
    w.write_record(header)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(rows: Rows) -> Report {
        Report { spec_version: SPEC_VERSION, command: "test", config: serde_json::Value::Null, rows, summary: None, failures: 0 }
    }

    #[test]
    fn csv_header_and_optional_cells() {
        let row = StudyRow::new("d2", Method::Quadrature).point(Some(8), Some(2.0), Some(0.0)).offsets(&[1.0, -1.0, 0.5]).value(-0.25);
        let text = String::from_utf8(report(Rows::Study(vec![row.clone()])).render(Format::Csv).unwrap()).unwrap();
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with("spec_version,quantity,n,p,lambda0,x1,x2,x_extra,method"));
        let cells: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(cells[0], SPEC_VERSION);
        assert_eq!(cells[7], "0.5");
        assert_eq!(cells[8], "quadrature");
        assert_eq!(cells[9], "-0.25");
        assert_eq!(cells[11], "-1.0");
        assert_eq!(cells[17], "");
        assert!(!text.contains('\r'));
        assert!((row.plain().unwrap() + 0.25).abs() < 1e-15);
    }

    #[test]
    fn empty_reports_keep_the_header() {
        let text = String::from_utf8(report(Rows::Verify(vec![])).render(Format::Csv).unwrap()).unwrap();
        assert_eq!(text, "spec_version,suite,check,samples,max_residual,tolerance,passed\n");
    }

    #[test]
    fn verify_rows_compare_against_tolerance() {
        assert!(VerifyRow::new("s", "c", 1, 1e-13, 1e-12).passed);
        assert!(!VerifyRow::new("s", "c", 1, f64::NAN, 1e-12).passed);
    }
}
