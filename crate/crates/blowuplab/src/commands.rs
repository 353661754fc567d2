//! The four subcommands. Each returns the exit status or an error that maps to one.

use std::io::Write;
use std::path::PathBuf;

use blowuplab_core::certificates::{
    certify, constant_c1, constant_c2, constant_cgn, constant_k, constant_k1_n, constant_k2,
    constant_sigma, energy_exponent, inertia_upper_coefficient, lifespan_bound,
    trajectory_constants, CertificateReport,
};
use blowuplab_core::scenarios::{convergence_study, ConvergenceStudy, Functional};
use blowuplab_core::solver::{run_observed, Termination};
use blowuplab_core::{energy_breakdown, Mode, Result as CoreResult};
use serde::Serialize;

use crate::cli::{tolerances, CheckArgs, Common, ConstantsArgs, OracleArgs};
use crate::config::RunConfig;
use crate::error::{CliError, CliResult, Status};
use crate::report::{self, fmt_f64, summary_line, RunMetadata};
use crate::{parallel, snapshot, table};

fn run_config(c: &Common, fallback: Option<&str>) -> CliResult<RunConfig> {
    match (&c.config, &c.scenario, fallback) {
        (Some(path), _, _) => RunConfig::load(path),
        (None, Some(name), _) => Ok(RunConfig::named(name)),
        (None, None, Some(name)) => Ok(RunConfig::named(name)),
        (None, None, None) => Err(CliError::Input(
            "give --config PATH or --scenario NAME".into(),
        )),
    }
}

fn out_dir(c: &Common) -> PathBuf {
    c.out.clone().unwrap_or_else(|| PathBuf::from("."))
}

fn stdout_line(s: &str) -> CliResult<()> {
    writeln!(std::io::stdout().lock(), "{s}").map_err(|e| CliError::Runtime(format!("stdout: {e}")))
}

/// Writes `value` as JSON to `out/name` when an output directory was given,
/// otherwise to stdout.
fn emit_json<T: Serialize + ?Sized>(
    c: &Common,
    name: &str,
    value: &T,
) -> CliResult<Option<PathBuf>> {
    match &c.out {
        Some(dir) => {
            std::fs::create_dir_all(dir)
                .map_err(|e| CliError::Input(format!("{}: {e}", dir.display())))?;
            let path = dir.join(name);
            report::save(&path, value)?;
            Ok(Some(path))
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(report::to_string(value).as_bytes())
                .map_err(|e| CliError::Runtime(format!("stdout: {e}")))?;
            Ok(None)
        }
    }
}

pub fn simulate(c: &Common) -> CliResult<Status> {
    let cfg = run_config(c, None)?;
    let flags = c.overrides();
    let r = cfg.resolve(&flags, &out_dir(c))?;
    let initial = r.scenario.initial_state(r.solver.stencil)?;
    let mut snap_err = None;
    let mut k = 0usize;
    let traj = run_observed(&initial, &r.solver, |st| {
        if let (Some(dir), None) = (&r.snapshot_dir, &snap_err) {
            if let Err(e) = snapshot::save(&dir.join(format!("snapshot_{k:06}.mhds")), st) {
                snap_err = Some(e);
            }
        }
        k += 1;
    })?;
    if let Some(e) = snap_err {
        return Err(e);
    }
    table::save(&r.csv_path, &traj.samples)?;
    let meta = RunMetadata {
        version: env!("CARGO_PKG_VERSION"),
        config: serde_json::to_value(&cfg).map_err(|e| CliError::Runtime(e.to_string()))?,
        overrides: flags,
        scenario: r.scenario.clone(),
        solver: r.solver.clone(),
        termination: traj.termination,
        samples: traj.samples.len(),
        stats: traj.stats.clone(),
        constants: trajectory_constants(&traj.samples, &traj.params),
    };
    report::save(&r.json_path, &meta)?;
    let s = &traj.stats;
    stdout_line(&format!(
        "scenario {}: {} steps to t={}, {} samples, mass drift {:.3e}, momentum drift {:.3e}",
        r.scenario.name,
        s.steps,
        fmt_f64(s.final_time),
        traj.samples.len(),
        s.mass_drift,
        s.momentum_drift
    ))?;
    for f in &s.flags {
        stdout_line(&format!("flag: {f}"))?;
    }
    stdout_line(&format!(
        "wrote {} and {}",
        r.csv_path.display(),
        r.json_path.display()
    ))?;
    if traj.termination == Termination::ReachedTEnd {
        Ok(Status::Pass)
    } else {
        let why = s.message.as_deref().unwrap_or("no detail");
        eprintln!(
            "run stopped early ({:?}) at t={}: {why}",
            traj.termination,
            fmt_f64(s.final_time)
        );
        Ok(Status::RuntimeError)
    }
}

pub fn check(a: &CheckArgs) -> CliResult<Status> {
    let tol = tolerances(&a.tolerance_class)?;
    let samples = table::load(&a.trajectory)?;
    let cfg = run_config(&a.common, None)?;
    let scn = cfg.scenario(&a.common.overrides())?;
    if samples.first().is_some_and(|b| b.n_dim() != scn.grid.n_dim) {
        return Err(CliError::Input(format!(
            "trajectory has n = {} but the scenario has n = {}",
            samples[0].n_dim(),
            scn.grid.n_dim
        )));
    }
    let reports = certify(&samples, &scn.params, &tol)?;
    let written = emit_json(&a.common, "certificates.json", &reports)?;
    let lines: Vec<String> = reports.iter().map(summary_line).collect();
    // keep stdout pure JSON when the report goes there
    if written.is_some() {
        for l in &lines {
            stdout_line(l)?;
        }
    } else {
        for l in &lines {
            eprintln!("{l}");
        }
    }
    let failed: Vec<&CertificateReport> = reports.iter().filter(|r| r.failed()).collect();
    if failed.is_empty() {
        Ok(Status::Pass)
    } else {
        let names: Vec<&str> = failed.iter().map(|r| r.name.as_str()).collect();
        eprintln!("failed: {}", names.join(", "));
        Ok(Status::CertificateFailure)
    }
}

/// One printed constant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantLine {
    pub name: &'static str,
    pub value: Option<f64>,
    pub formula: &'static str,
    pub error: Option<String>,
}

/// Inputs of the constants; missing entries make the constants that need them fail.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConstantInputs {
    pub n: usize,
    pub m: Option<f64>,
    pub p: Option<f64>,
    pub e0: Option<f64>,
    pub g0: Option<f64>,
    pub f0: Option<f64>,
    pub q0: Option<f64>,
    pub a: Option<f64>,
    pub gamma: Option<f64>,
    pub mu: Option<f64>,
    pub lambda: Option<f64>,
}

fn need(name: &str, v: Option<f64>) -> Result<f64, String> {
    v.ok_or_else(|| format!("{name} not given"))
}

pub fn constant_lines(x: &ConstantInputs) -> Vec<ConstantLine> {
    let n = x.n;
    let core = |r: CoreResult<f64>| r.map_err(|e| e.to_string());
    let k1 = (|| {
        core(constant_k1_n(
            need("m", x.m)?,
            need("A", x.a)?,
            need("gamma", x.gamma)?,
            n,
        ))
    })();
    let k2 = core(constant_k2(n));
    let k = (|| core(constant_k(need("|P|", x.p)?, k1.clone()?, k2.clone()?)))();
    let cgn = (|| core(constant_cgn(need("gamma", x.gamma)?, n)))();
    let c1 = (|| {
        core(constant_c1(
            need("A", x.a)?,
            need("gamma", x.gamma)?,
            n,
            need("m", x.m)?,
        ))
    })();
    let c2 = (|| {
        if n != 3 {
            return Err(format!("stated for n = 3, got n = {n}"));
        }
        core(constant_c2(
            need("gamma", x.gamma)?,
            need("Q0", x.q0)?,
            need("G0", x.g0)?,
        ))
    })();
    let sigma = (|| {
        core(constant_sigma(
            need("mu", x.mu)?,
            need("lambda", x.lambda)?,
            n,
        ))
    })();
    let kappa = (|| {
        let g = need("gamma", x.gamma)?;
        if g > 1.0 {
            Ok(energy_exponent(g, n))
        } else {
            Err(format!("gamma must exceed 1, got {g}"))
        }
    })();
    let t_star = (|| {
        core(lifespan_bound(
            need("E0", x.e0)?,
            sigma.clone()?,
            k.clone()?,
            need("gamma", x.gamma)?,
            n,
        ))
    })();
    let g_upper = (|| {
        let (g, e0) = (need("gamma", x.gamma)?, need("E0", x.e0)?);
        need("F0", x.f0)?;
        need("G0", x.g0)?;
        Ok(inertia_upper_coefficient(g, n) * e0)
    })();
    let line = |name, formula, r: Result<f64, String>| {
        let (value, error) = match r {
            Ok(v) => (Some(v), None),
            Err(e) => (None, Some(e)),
        };
        ConstantLine {
            name,
            value,
            formula,
            error,
        }
    };
    vec![
        line(
            "K1",
            "m^((n+2)/(2n)) ((gamma-1)/(m A))^((n-2)/(2n(gamma-1))), gamma >= 2n/(n+2)",
            k1,
        ),
        line("K2", "(Gamma(n)/Gamma(n/2))^(2/n) / (pi n (n-2))", k2),
        line("K", "|P|^2 / (K1^2 K2)", k),
        line(
            "C_gamma_n",
            "b^(n(gamma-1)/D) + b^(-2 gamma/D), b = 2 gamma/(n(gamma-1)), D = (n+2) gamma - n",
            cgn,
        ),
        line("C1", "A/(gamma-1) (m / C_gamma_n)^((gamma(n+2)-n)/2)", c1),
        line(
            "C2",
            "Q0 G0^((3 gamma-5)/2) / 4 for gamma <= 4/3, Q0 / (4 sqrt(G0)) above",
            c2,
        ),
        line(
            "sigma",
            "mu if mu + lambda >= 0, else (n+1) mu + n lambda",
            sigma,
        ),
        line("kappa", "(n-2)/(n(gamma-1))", kappa),
        line("T_star", "E0^(1+kappa) / (sigma K)", t_star),
        line(
            "G_upper_t2",
            "c E0 in G(t) <= c E0 t^2 + F0 t + G0, c = max(1, n(gamma-1)/2)",
            g_upper,
        ),
    ]
}

pub fn constants(a: &ConstantsArgs) -> CliResult<Status> {
    let c = &a.common;
    let mut x = ConstantInputs {
        n: c.n_dim.unwrap_or(3),
        gamma: c.gamma,
        ..ConstantInputs::default()
    };
    if c.config.is_some() || c.scenario.is_some() {
        let scn = run_config(c, None)?.scenario(&c.overrides())?;
        let b = energy_breakdown(&scn.initial_state(Default::default())?)?;
        let p = scn.params;
        x = ConstantInputs {
            n: scn.grid.n_dim,
            m: Some(b.m),
            p: Some(b.momentum_norm()),
            e0: Some(b.e_total),
            g0: Some(b.g),
            f0: Some(b.f),
            q0: Some(b.q),
            a: Some(p.a),
            gamma: Some(p.gamma),
            mu: Some(p.mu),
            lambda: Some(p.lambda),
        };
    } else if c.mode == Some(Mode::Mhd) && x.n != 3 {
        return Err(CliError::Input(format!(
            "mhd mode needs n = 3, got {}",
            x.n
        )));
    }
    let set = |slot: &mut Option<f64>, v: Option<f64>| {
        if v.is_some() {
            *slot = v;
        }
    };
    set(&mut x.m, a.m);
    set(&mut x.p, a.p);
    set(&mut x.e0, a.e0);
    set(&mut x.g0, a.g0);
    set(&mut x.f0, a.f0);
    set(&mut x.q0, a.q0);
    set(&mut x.a, a.a);
    set(&mut x.mu, a.mu);
    set(&mut x.lambda, a.lambda);
    let lines = constant_lines(&x);
    let mut out = String::new();
    for l in &lines {
        match (&l.value, &l.error) {
            (Some(v), _) => out.push_str(&format!(
                "{:17} = {:24}  {}\n",
                l.name,
                fmt_f64(*v),
                l.formula
            )),
            (None, Some(e)) => {
                out.push_str(&format!("{:17} error: {e}  [{}]\n", l.name, l.formula))
            }
            (None, None) => unreachable!(),
        }
    }
    print!("{out}");
    if let Some(dir) = &c.out {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::Input(format!("{}: {e}", dir.display())))?;
        report::save(&dir.join("constants.json"), &lines)?;
    }
    if lines.iter().any(|l| l.error.is_some()) {
        Ok(Status::InputError)
    } else {
        Ok(Status::Pass)
    }
}

/// True when every level agrees with the closed form to roundoff.
pub fn at_roundoff(s: &ConvergenceStudy) -> bool {
    s.levels
        .iter()
        .all(|l| l.error <= 1e-13 * l.reference.abs().max(l.value.abs()))
}

/// Gate for a study: errors sit at roundoff or fall monotonically at order 2 or better.
pub fn study_passes(s: &ConvergenceStudy) -> bool {
    at_roundoff(s) || (s.monotone && s.order.is_some_and(|o| o >= 2.0))
}

pub fn oracle(a: &OracleArgs) -> CliResult<Status> {
    let c = &a.common;
    let scn = run_config(c, Some("gaussian-reference"))?.scenario(&c.overrides())?;
    if a.levels.len() < 3 {
        return Err(CliError::Input(format!(
            "need at least 3 levels, got {:?}",
            a.levels
        )));
    }
    let studies =
        parallel::map_ordered(&Functional::ALL, |f| convergence_study(&scn, *f, &a.levels))?
            .into_iter()
            .collect::<CoreResult<Vec<_>>>()?;
    let written = emit_json(c, "oracle.json", &studies)?;
    let mut lines = Vec::new();
    for s in &studies {
        let finest = s.levels.last().expect("at least 3 levels");
        lines.push(format!(
            "{} {:4} value={} box={} whole-space={} order={} pairwise={:?}",
            if study_passes(s) { "pass" } else { "FAIL" },
            s.functional.name(),
            fmt_f64(finest.value),
            fmt_f64(finest.reference),
            fmt_f64(s.whole_space),
            if at_roundoff(s) {
                "roundoff".into()
            } else {
                s.order.map_or("none".into(), |o| format!("{o:.4}"))
            },
            s.pairwise
                .iter()
                .map(|o| format!("{o:.4}"))
                .collect::<Vec<_>>(),
        ));
    }
    for l in &lines {
        if written.is_some() {
            stdout_line(l)?;
        } else {
            eprintln!("{l}");
        }
    }
    Ok(if studies.iter().all(study_passes) {
        Status::Pass
    } else {
        Status::CertificateFailure
    })
}

/// Dispatches a parsed command line.
pub fn dispatch(cmd: &crate::cli::Command) -> CliResult<Status> {
    use crate::cli::Command::*;
    match cmd {
        Simulate(c) => simulate(c),
        Check(a) => check(a),
        Constants(a) => constants(a),
        Oracle(a) => oracle(a),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(gamma: f64, n: usize) -> ConstantInputs {
        ConstantInputs {
            n,
            m: Some(1.0),
            p: Some(1.0),
            e0: Some(2.0),
            g0: Some(1.0),
            f0: Some(0.0),
            q0: Some(1.0),
            a: Some(1.0),
            gamma: Some(gamma),
            mu: Some(1.0),
            lambda: Some(0.0),
        }
    }

    fn value(lines: &[ConstantLine], name: &str) -> Option<f64> {
        lines.iter().find(|l| l.name == name).unwrap().value
    }

    #[test]
    fn unit_normalization() {
        let l = constant_lines(&unit(2.0, 3));
        assert_eq!(value(&l, "K1"), Some(1.0));
        let (sigma, k) = (value(&l, "sigma").unwrap(), value(&l, "K").unwrap());
        let t = value(&l, "T_star").unwrap();
        assert!((t - 2f64.powf(4.0 / 3.0) / (sigma * k)).abs() <= 1e-15 * t);
        assert!(l.iter().all(|x| x.error.is_none()));
    }

    #[test]
    fn failures_are_isolated() {
        let l = constant_lines(&unit(1.1, 3));
        let k1 = l.iter().find(|x| x.name == "K1").unwrap();
        assert!(
            k1.error.as_deref().unwrap().contains("6/5")
                || k1.error.as_deref().unwrap().contains("2n/(n+2)")
        );
        assert!(value(&l, "K").is_none() && value(&l, "T_star").is_none());
        for name in ["K2", "C_gamma_n", "C1", "C2", "sigma", "kappa"] {
            assert!(value(&l, name).is_some(), "{name}");
        }
    }

    #[test]
    fn four_dimensions_use_the_general_exponent() {
        let g = 1.5;
        let l = constant_lines(&unit(g, 4));
        assert_eq!(value(&l, "kappa"), Some(2.0 / (4.0 * 0.5)));
        let t = value(&l, "T_star").unwrap();
        let expect = 2f64.powf(1.0 + 2.0 / (4.0 * (g - 1.0)))
            / (value(&l, "sigma").unwrap() * value(&l, "K").unwrap());
        assert!((t - expect).abs() <= 1e-15 * expect);
        assert!(l.iter().find(|x| x.name == "C2").unwrap().error.is_some());
    }

    #[test]
    fn missing_inputs_name_themselves() {
        let l = constant_lines(&ConstantInputs {
            n: 3,
            gamma: Some(2.0),
            ..Default::default()
        });
        assert_eq!(
            l.iter().find(|x| x.name == "K1").unwrap().error.as_deref(),
            Some("m not given")
        );
        assert!(value(&l, "K2").is_some() && value(&l, "C_gamma_n").is_some());
    }
}
