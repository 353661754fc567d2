//! Trajectory CSV: one row per sample in the functionals column order.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use blowuplab_core::functionals::{column_count, column_names};
use blowuplab_core::EnergyBreakdown;

use crate::error::{CliError, CliResult};
use crate::report::fmt_f64;

pub fn write_csv<W: Write>(w: W, samples: &[EnergyBreakdown]) -> csv::Result<()> {
    let n = samples.first().map_or(3, EnergyBreakdown::n_dim);
    let mut out = csv::Writer::from_writer(w);
    out.write_record(column_names(n))?;
    for b in samples {
        out.write_record(b.columns().into_iter().map(fmt_f64))?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a trajectory, inferring `n` from the header; any deviation from the
/// schema is an input error.
pub fn read_csv<R: Read>(r: R) -> CliResult<Vec<EnergyBreakdown>> {
    let schema = |msg: String| CliError::Input(format!("trajectory schema: {msg}"));
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| schema(e.to_string()))?
        .iter()
        .map(|s| s.trim().to_string())
        .collect();
    let n = (1..=16)
        .find(|&n| column_count(n) == header.len())
        .ok_or_else(|| schema(format!("{} columns match no dimension", header.len())))?;
    let expected = column_names(n);
    if header != expected {
        return Err(schema(format!(
            "header {header:?} differs from {expected:?}"
        )));
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| schema(e.to_string()))?;
        let v = rec
            .iter()
            .enumerate()
            .map(|(j, s)| {
                s.trim().parse::<f64>().map_err(|_| {
                    schema(format!(
                        "row {} column {}: '{s}' is not a number",
                        i + 1,
                        expected[j]
                    ))
                })
            })
            .collect::<CliResult<Vec<f64>>>()?;
        rows.push(EnergyBreakdown::from_columns(n, &v).map_err(|e| schema(e.to_string()))?);
    }
    Ok(rows)
}

pub fn save(path: &Path, samples: &[EnergyBreakdown]) -> CliResult<()> {
    let f = File::create(path).map_err(|e| CliError::write(path, e))?;
    write_csv(std::io::BufWriter::new(f), samples)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

pub fn load(path: &Path) -> CliResult<Vec<EnergyBreakdown>> {
    let f = File::open(path).map_err(|e| CliError::read(path, e))?;
    read_csv(std::io::BufReader::new(f))
}
