//! Run configuration: a scenario by name or inline, partial overrides of its
//! grid, parameters and solver settings, and output paths.

use std::path::{Path, PathBuf};

use blowuplab_core::scenarios::{default_solver, scenario, GaussianScenario, MagneticSpec};
use blowuplab_core::solver::SolverConfig;
use blowuplab_core::Mode;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default)]
    pub csv_path: Option<PathBuf>,
    #[serde(default)]
    pub json_path: Option<PathBuf>,
    #[serde(default)]
    pub snapshot_dir: Option<PathBuf>,
}

/// `grid`, `params` and `solver` may name any subset of their fields; the rest
/// come from the scenario and its default solver settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// A library name, or a full scenario object.
    pub scenario: Value,
    #[serde(default)]
    pub grid: Option<Value>,
    #[serde(default)]
    pub params: Option<Value>,
    #[serde(default)]
    pub solver: Option<Value>,
    #[serde(default)]
    pub outputs: Outputs,
}

/// Command-line flags that take precedence over the configuration.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Overrides {
    pub mode: Option<Mode>,
    pub n_dim: Option<usize>,
    pub grid: Option<usize>,
    pub gamma: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Resolved {
    pub scenario: GaussianScenario,
    pub solver: SolverConfig,
    pub csv_path: PathBuf,
    pub json_path: PathBuf,
    pub snapshot_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn named(name: &str) -> Self {
        RunConfig {
            scenario: Value::String(name.into()),
            grid: None,
            params: None,
            solver: None,
            outputs: Outputs::default(),
        }
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::read(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::read(path, e))
    }

    /// Scenario with the grid and parameter overrides and the flags applied.
    pub fn scenario(&self, flags: &Overrides) -> CliResult<GaussianScenario> {
        let mut scn = match &self.scenario {
            Value::String(name) => scenario(name)?,
            v @ Value::Object(_) => serde_json::from_value(v.clone())
                .map_err(|e| CliError::Input(format!("inline scenario: {e}")))?,
            other => {
                return Err(CliError::Input(format!(
                    "scenario must be a name or an object, got {other}"
                )))
            }
        };
        if let Some(g) = &self.grid {
            scn.grid = merge("grid", &scn.grid, g)?;
        }
        if let Some(p) = &self.params {
            scn.params = merge("params", &scn.params, p)?;
        }
        if let Some(mode) = flags.mode {
            scn.mode = mode;
            if mode == Mode::Ns {
                scn.magnetic = MagneticSpec::Zero;
            }
        }
        if let Some(n) = flags.n_dim {
            scn.grid.n_dim = n;
            scn.velocity.resize(n, 0.0);
        }
        if let Some(np) = flags.grid {
            scn.grid.points_per_axis = np;
        }
        if let Some(gamma) = flags.gamma {
            scn.params.gamma = gamma;
        }
        scn.validate()?;
        Ok(scn)
    }

    /// Solver settings for `scn`; the scenario decides the mode.
    pub fn solver(&self, scn: &GaussianScenario) -> CliResult<SolverConfig> {
        let base = default_solver(scn);
        let mut cfg = match &self.solver {
            Some(s) => merge("solver", &base, s)?,
            None => base,
        };
        cfg.mode = scn.mode;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Resolves everything and makes sure the output locations exist. Relative
    /// output paths are taken inside `out_dir`.
    pub fn resolve(&self, flags: &Overrides, out_dir: &Path) -> CliResult<Resolved> {
        let scenario = self.scenario(flags)?;
        let solver = self.solver(&scenario)?;
        let o = &self.outputs;
        let place = |p: &Option<PathBuf>, default: &str| {
            out_dir.join(p.as_deref().unwrap_or(Path::new(default)))
        };
        let csv_path = place(&o.csv_path, "trajectory.csv");
        let json_path = place(&o.json_path, "run.json");
        let snapshot_dir = o.snapshot_dir.as_ref().map(|d| out_dir.join(d));
        let dirs = [
            csv_path.parent(),
            json_path.parent(),
            snapshot_dir.as_deref(),
        ];
        for d in dirs
            .into_iter()
            .flatten()
            .filter(|d| !d.as_os_str().is_empty())
        {
            std::fs::create_dir_all(d)
                .map_err(|e| CliError::Input(format!("{}: {e}", d.display())))?;
        }
        Ok(Resolved {
            scenario,
            solver,
            csv_path,
            json_path,
            snapshot_dir,
        })
    }
}

/// Replaces the fields of `base` named in `patch`; unknown names are errors.
fn merge<T: Serialize + serde::de::DeserializeOwned>(
    what: &str,
    base: &T,
    patch: &Value,
) -> CliResult<T> {
    let Value::Object(patch) = patch else {
        return Err(CliError::Input(format!("{what} must be an object")));
    };
    let mut v = serde_json::to_value(base).map_err(|e| CliError::Input(format!("{what}: {e}")))?;
    let obj = v.as_object_mut().expect("structs serialize to objects");
    for (k, val) in patch {
        if !obj.contains_key(k) {
            let known: Vec<&str> = obj.keys().map(String::as_str).collect();
            return Err(CliError::Input(format!(
                "{what}: unknown field '{k}', expected one of {known:?}"
            )));
        }
        obj.insert(k.clone(), val.clone());
    }
    serde_json::from_value(v).map_err(|e| CliError::Input(format!("{what}: {e}")))
}
