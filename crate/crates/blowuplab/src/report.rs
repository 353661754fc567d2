//! JSON reports. Every float is written with 17 significant digits, and
//! non-finite values become `null`.

use std::io::{self, Write};
use std::path::Path;

use blowuplab_core::certificates::{CertificateReport, Constants};
use blowuplab_core::scenarios::GaussianScenario;
use blowuplab_core::solver::{RunStats, SolverConfig, Termination};
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::error::{CliError, CliResult};

/// Scientific notation with 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Pretty printer that writes floats in [`fmt_f64`] form.
#[derive(Default)]
pub struct Fixed17<'a>(PrettyFormatter<'a>);

impl Formatter for Fixed17<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        w.write_all(fmt_f64(v).as_bytes())
    }
    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(v))
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_writer<W: Write, T: Serialize + ?Sized>(w: W, value: &T) -> serde_json::Result<()> {
    let mut ser = serde_json::Serializer::with_formatter(w, Fixed17::default());
    value.serialize(&mut ser)
}

pub fn to_string<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    to_writer(&mut buf, value).expect("in-memory serialization");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json writes UTF-8")
}

pub fn save<T: Serialize + ?Sized>(path: &Path, value: &T) -> CliResult<()> {
    std::fs::write(path, to_string(value)).map_err(|e| CliError::write(path, e))
}

/// Everything `simulate` knows about a run besides the samples.
#[derive(Debug, Serialize)]
pub struct RunMetadata {
    pub version: &'static str,
    /// The configuration as given, before defaults and flags were applied.
    pub config: serde_json::Value,
    /// Command-line flags applied on top of the configuration.
    pub overrides: crate::config::Overrides,
    pub scenario: GaussianScenario,
    pub solver: SolverConfig,
    pub termination: Termination,
    pub samples: usize,
    pub stats: RunStats,
    pub constants: Constants,
}

/// Certificate report lines for humans: status, name, sides and context.
pub fn summary_line(r: &CertificateReport) -> String {
    let status = if !r.is_gating() {
        match r.outcome {
            blowuplab_core::certificates::Outcome::Checked => "info",
            _ => "skip",
        }
    } else if r.pass {
        "pass"
    } else {
        "FAIL"
    };
    format!(
        "{status:4} {:32} lhs={} rhs={} {}",
        r.name,
        fmt_f64(r.lhs),
        fmt_f64(r.rhs),
        r.context
    )
}
