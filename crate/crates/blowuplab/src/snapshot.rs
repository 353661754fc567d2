//! MHDS binary snapshots: magic `MHDS`, then little-endian `u32` version, `n_dim`
//! and points per axis, `f64` half extent, the five parameters `A, gamma, mu,
//! lambda, nu`, the time, and the fields `rho, u_1..u_n, H_1..H_n` in row-major
//! node order.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use blowuplab_core::{make_grid, Mode, Params, State};

use crate::error::{CliError, CliResult};

pub const MAGIC: [u8; 4] = *b"MHDS";
pub const VERSION: u32 = 1;

/// Largest node count accepted when reading, to reject corrupt headers early.
const MAX_NODES: u64 = 1 << 28;

pub fn write_snapshot<W: Write>(w: &mut W, state: &State) -> io::Result<()> {
    let g = &state.grid;
    let p = &state.params;
    w.write_all(&MAGIC)?;
    for v in [VERSION, g.n_dim() as u32, g.points() as u32] {
        w.write_all(&v.to_le_bytes())?;
    }
    for v in [g.half_extent(), p.a, p.gamma, p.mu, p.lambda, p.nu, state.t] {
        w.write_all(&v.to_le_bytes())?;
    }
    let fields = std::iter::once(&state.rho).chain(&state.u).chain(&state.h);
    for f in fields {
        for v in f {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> io::Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> io::Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

fn read_field<R: Read>(r: &mut R, len: usize) -> io::Result<Vec<f64>> {
    let mut bytes = vec![0u8; len * 8];
    r.read_exact(&mut bytes)?;
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

/// Reads a snapshot; the format carries no mode, so the caller supplies it.
pub fn read_snapshot<R: Read>(r: &mut R, mode: Mode) -> CliResult<State> {
    let bad = |e: io::Error| CliError::Input(format!("truncated snapshot: {e}"));
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(bad)?;
    if magic != MAGIC {
        return Err(CliError::Input(format!("bad snapshot magic {magic:?}")));
    }
    let version = read_u32(r).map_err(bad)?;
    if version != VERSION {
        return Err(CliError::Input(format!(
            "unsupported snapshot version {version}"
        )));
    }
    let n = read_u32(r).map_err(bad)? as usize;
    let points = read_u32(r).map_err(bad)? as usize;
    let nodes = (points as u64)
        .checked_pow(n as u32)
        .filter(|&v| v <= MAX_NODES);
    let Some(nodes) = nodes else {
        return Err(CliError::Input(format!(
            "snapshot size {points}^{n} out of range"
        )));
    };
    let mut head = [0.0; 7];
    for v in &mut head {
        *v = read_f64(r).map_err(bad)?;
    }
    let [half_extent, a, gamma, mu, lambda, nu, t] = head;
    let grid = make_grid(n, half_extent, points)?;
    let len = nodes as usize;
    let rho = read_field(r, len).map_err(bad)?;
    let u = (0..n)
        .map(|_| read_field(r, len))
        .collect::<io::Result<Vec<_>>>()
        .map_err(bad)?;
    let h = (0..n)
        .map(|_| read_field(r, len))
        .collect::<io::Result<Vec<_>>>()
        .map_err(bad)?;
    let mut rest = [0u8; 1];
    if r.read(&mut rest).map_err(bad)? != 0 {
        return Err(CliError::Input(
            "trailing bytes after snapshot fields".into(),
        ));
    }
    let params = Params {
        a,
        gamma,
        mu,
        lambda,
        nu,
    };
    Ok(State::new(grid, mode, params, t, rho, u, h)?)
}

pub fn save(path: &Path, state: &State) -> CliResult<()> {
    let f = File::create(path).map_err(|e| CliError::write(path, e))?;
    let mut w = BufWriter::new(f);
    write_snapshot(&mut w, state)
        .and_then(|_| w.flush())
        .map_err(|e| CliError::write(path, e))
}

pub fn load(path: &Path, mode: Mode) -> CliResult<State> {
    let f = File::open(path).map_err(|e| CliError::read(path, e))?;
    read_snapshot(&mut BufReader::new(f), mode)
}
