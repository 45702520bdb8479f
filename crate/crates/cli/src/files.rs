//! Device spec and state files.
//!
//! Both are JSON documents. Complex numbers are `[re, im]` pairs, matrices
//! are row-major lists of rows, and every float is written with 17
//! significant digits so files round-trip bit-for-bit.
//!
//! ```json
//! {
//!   "dim": 2,
//!   "kraus": [
//!     [
//!       [[1.0000000000000000e0, 0.0000000000000000e0], [0.0000000000000000e0, 0.0000000000000000e0]],
//!       [[0.0000000000000000e0, 0.0000000000000000e0], [0.0000000000000000e0, 0.0000000000000000e0]]
//!     ],
//!     ...
//!   ],
//!   "labels": ["0", "1"],
//!   "tolerance": 1.0000000000000000e-10
//! }
//! ```

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use num_complex::Complex64;
use qmeter::{CMatrix, Measurement, QuantumState};
use serde::{Deserialize, Serialize};
use serde_json::ser::Formatter;

use crate::error::CliError;

/// Environment variable overriding the default completeness tolerance.
pub const TOLERANCE_ENV: &str = "QMETER_DEFAULT_TOLERANCE";

pub type ComplexPair = [f64; 2];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceSpecFile {
    pub dim: usize,
    pub kraus: Vec<Vec<Vec<ComplexPair>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub amplitudes: Vec<ComplexPair>,
}

pub fn to_pairs(v: &[Complex64]) -> Vec<ComplexPair> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

pub fn from_pairs(v: &[ComplexPair]) -> Vec<Complex64> {
    v.iter().map(|p| Complex64::new(p[0], p[1])).collect()
}

impl DeviceSpecFile {
    pub fn from_measurement(m: &Measurement) -> Self {
        let kraus = m
            .kraus_ops()
            .iter()
            .map(|k| (0..k.rows()).map(|i| to_pairs(k.row(i))).collect())
            .collect();
        Self {
            dim: m.dim(),
            kraus,
            labels: m.labels().map(<[String]>::to_vec),
            tolerance: None,
        }
    }

    /// Kraus matrices, after checking every one is `dim × dim`.
    pub fn matrices(&self) -> Result<Vec<CMatrix>, CliError> {
        let d = self.dim;
        if d == 0 {
            return Err(CliError::Parse("`dim` must be positive".into()));
        }
        if self.kraus.is_empty() {
            return Err(CliError::Parse("`kraus` must list at least one matrix".into()));
        }
        self.kraus
            .iter()
            .enumerate()
            .map(|(s, rows)| {
                if rows.len() != d {
                    return Err(CliError::Parse(format!(
                        "kraus[{s}] has {} rows, expected {d}",
                        rows.len()
                    )));
                }
                let mut data = Vec::with_capacity(d * d);
                for (i, row) in rows.iter().enumerate() {
                    if row.len() != d {
                        return Err(CliError::Parse(format!(
                            "kraus[{s}] row {i} has {} entries, expected {d}",
                            row.len()
                        )));
                    }
                    data.extend(from_pairs(row));
                }
                CMatrix::from_vec(d, d, data).map_err(|e| CliError::Parse(format!("kraus[{s}]: {e}")))
            })
            .collect()
    }

    /// Completeness tolerance: explicit override, then the file, then
    /// [`TOLERANCE_ENV`], then the library default.
    pub fn effective_tolerance(&self, explicit: Option<f64>) -> Result<f64, CliError> {
        if let Some(t) = explicit.or(self.tolerance) {
            return check_tolerance(t);
        }
        default_tolerance()
    }

    pub fn to_measurement(&self, explicit_tolerance: Option<f64>) -> Result<Measurement, CliError> {
        let tolerance = self.effective_tolerance(explicit_tolerance)?;
        let m = Measurement::validate(self.matrices()?, self.dim, tolerance)?;
        Ok(match &self.labels {
            Some(labels) => m.with_labels(labels.clone())?,
            None => m,
        })
    }
}

fn check_tolerance(t: f64) -> Result<f64, CliError> {
    if t.is_finite() && t >= 0.0 {
        Ok(t)
    } else {
        Err(CliError::Domain(format!("tolerance {t} must be finite and non-negative")))
    }
}

pub fn default_tolerance() -> Result<f64, CliError> {
    match std::env::var(TOLERANCE_ENV) {
        Ok(raw) => {
            let t: f64 = raw
                .trim()
                .parse()
                .map_err(|_| CliError::Parse(format!("{TOLERANCE_ENV}=`{raw}` is not a number")))?;
            check_tolerance(t)
        }
        Err(_) => Ok(qmeter::measurement::DEFAULT_COMPLETENESS_TOL),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

/// Parses JSON, reporting line and column on failure.
pub fn parse_json<T: for<'de> Deserialize<'de>>(text: &str, origin: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| {
        CliError::Parse(format!(
            "{origin}: line {}, column {}: {e}",
            e.line(),
            e.column()
        ))
    })
}

pub fn load_spec(path: &Path) -> Result<DeviceSpecFile, CliError> {
    parse_json(&read(path)?, &path.display().to_string())
}

pub fn load_state(path: &Path) -> Result<QuantumState, CliError> {
    let file: StateFile = parse_json(&read(path)?, &path.display().to_string())?;
    Ok(QuantumState::new(from_pairs(&file.amplitudes))?)
}

/// Serializes with [`SpecFormatter`], newline-terminated.
pub fn to_json_string<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SpecFormatter::new(3));
    value.serialize(&mut ser).expect("serializing plain data cannot fail");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

pub fn write_json<T: Serialize>(value: &T, out: &mut dyn Write) -> io::Result<()> {
    out.write_all(to_json_string(value).as_bytes())
}

/// JSON formatter: floats with 17 significant digits, containers broken
/// over lines down to a fixed nesting depth and inline below it.
pub struct SpecFormatter {
    pretty_depth: usize,
    has_value: Vec<bool>,
}

impl SpecFormatter {
    pub fn new(pretty_depth: usize) -> Self {
        Self {
            pretty_depth,
            has_value: Vec::new(),
        }
    }

    fn depth(&self) -> usize {
        self.has_value.len()
    }

    fn pretty(&self) -> bool {
        self.depth() <= self.pretty_depth
    }

    fn indent<W: ?Sized + Write>(writer: &mut W, depth: usize) -> io::Result<()> {
        writer.write_all(b"\n")?;
        for _ in 0..depth {
            writer.write_all(b"  ")?;
        }
        Ok(())
    }

    fn open<W: ?Sized + Write>(&mut self, writer: &mut W, bracket: &[u8]) -> io::Result<()> {
        self.has_value.push(false);
        writer.write_all(bracket)
    }

    fn close<W: ?Sized + Write>(&mut self, writer: &mut W, bracket: &[u8]) -> io::Result<()> {
        let pretty = self.pretty();
        let had = self.has_value.pop().unwrap_or(false);
        if pretty && had {
            Self::indent(writer, self.depth())?;
        }
        writer.write_all(bracket)
    }

    fn element<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        if !first {
            writer.write_all(b",")?;
        }
        if self.pretty() {
            Self::indent(writer, self.depth())?;
        } else if !first {
            writer.write_all(b" ")?;
        }
        if let Some(h) = self.has_value.last_mut() {
            *h = true;
        }
        Ok(())
    }
}

impl Formatter for SpecFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        write!(writer, "{value:.8e}")
    }

    fn begin_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.open(writer, b"[")
    }

    fn end_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.close(writer, b"]")
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.element(writer, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, _writer: &mut W) -> io::Result<()> {
        Ok(())
    }

    fn begin_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.open(writer, b"{")
    }

    fn end_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.close(writer, b"}")
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.element(writer, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        writer.write_all(b": ")
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, _writer: &mut W) -> io::Result<()> {
        Ok(())
    }
}
