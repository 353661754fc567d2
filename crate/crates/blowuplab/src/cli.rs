use std::path::PathBuf;

use blowuplab_core::certificates::Tolerances;
use blowuplab_core::Mode;
use clap::{Args, Parser, Subcommand};

use crate::config::Overrides;
use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(
    name = "blowuplab",
    version,
    about = "Barotropic MHD and Navier–Stokes energy-functional lab"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate a scenario and write the trajectory CSV and run metadata.
    Simulate(Common),
    /// Run the certificate suite over a trajectory CSV.
    Check(CheckArgs),
    /// Print the constants of the energy bounds with their formulas.
    Constants(ConstantsArgs),
    /// Quadrature convergence studies against the closed forms.
    Oracle(OracleArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Run configuration JSON.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Library scenario, used when no config is given.
    #[arg(long, value_name = "NAME", conflicts_with = "config")]
    pub scenario: Option<String>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long, value_parser = parse_mode, value_name = "mhd|ns")]
    pub mode: Option<Mode>,
    #[arg(long = "n-dim", value_name = "K")]
    pub n_dim: Option<usize>,
    /// Points per axis.
    #[arg(long, value_name = "N")]
    pub grid: Option<usize>,
    #[arg(long, value_name = "X")]
    pub gamma: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// Trajectory CSV written by `simulate`.
    pub trajectory: PathBuf,
    #[command(flatten)]
    pub common: Common,
    /// Tolerance override, `exact=TOL` or `truncation=TOL`; repeatable.
    #[arg(
        long = "tolerance-class",
        value_name = "CLASS=TOL",
        value_delimiter = ','
    )]
    pub tolerance_class: Vec<String>,
}

#[derive(Debug, Args)]
pub struct ConstantsArgs {
    #[command(flatten)]
    pub common: Common,
    /// Mass.
    #[arg(long)]
    pub m: Option<f64>,
    /// Momentum magnitude |P|.
    #[arg(long)]
    pub p: Option<f64>,
    /// Initial total energy.
    #[arg(long)]
    pub e0: Option<f64>,
    #[arg(long)]
    pub g0: Option<f64>,
    #[arg(long)]
    pub f0: Option<f64>,
    #[arg(long)]
    pub q0: Option<f64>,
    /// Pressure coefficient A.
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub common: Common,
    /// Points per axis of the refinement levels.
    #[arg(long, value_delimiter = ',', default_values_t = [24usize, 32, 48])]
    pub levels: Vec<usize>,
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    match s {
        "mhd" => Ok(Mode::Mhd),
        "ns" => Ok(Mode::Ns),
        _ => Err(format!("expected mhd or ns, got '{s}'")),
    }
}

impl Common {
    pub fn overrides(&self) -> Overrides {
        Overrides {
            mode: self.mode,
            n_dim: self.n_dim,
            grid: self.grid,
            gamma: self.gamma,
        }
    }
}

/// Applies `class=tol` overrides to the default tolerances.
pub fn tolerances(entries: &[String]) -> CliResult<Tolerances> {
    let mut tol = Tolerances::default();
    for entry in entries {
        let bad = || CliError::Input(format!("tolerance override '{entry}' is not CLASS=TOL"));
        let (class, value) = entry.split_once('=').ok_or_else(bad)?;
        let v: f64 = value.trim().parse().map_err(|_| bad())?;
        if !(v > 0.0 && v.is_finite()) {
            return Err(CliError::Input(format!(
                "tolerance must be positive, got {v}"
            )));
        }
        match class.trim() {
            "exact" | "exact-to-roundoff" => tol.exact = v,
            "truncation" | "truncation-error" => tol.truncation = v,
            other => {
                return Err(CliError::Input(format!(
                    "unknown tolerance class '{other}', expected exact or truncation"
                )))
            }
        }
    }
    Ok(tol)
}
