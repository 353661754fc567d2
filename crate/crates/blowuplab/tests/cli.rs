use std::path::Path;
use std::process::Command;

use blowuplab::{snapshot, table};
use blowuplab_core::Mode;
use serde_json::Value;

struct Out {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run(args: &[&str], env: &[(&str, &str)]) -> Out {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_blowuplab"));
    cmd.args(args).env_remove("BLOWUPLAB_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    let o = cmd.output().expect("binary runs");
    Out {
        code: o.status.code().expect("exit code"),
        stdout: String::from_utf8(o.stdout).unwrap(),
        stderr: String::from_utf8(o.stderr).unwrap(),
    }
}

fn blowuplab(args: &[&str]) -> Out {
    run(args, &[])
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn equilibrium_rows_are_constant() {
    let dir = tempfile::tempdir().unwrap();
    let o = blowuplab(&[
        "simulate",
        "--scenario",
        "equilibrium",
        "--out",
        s(dir.path()),
    ]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let rows = table::load(&dir.path().join("trajectory.csv")).unwrap();
    assert!(rows.len() > 2);
    for r in &rows[1..] {
        let mut a = r.columns();
        let mut b = rows[0].columns();
        a[0] = 0.0;
        b[0] = 0.0;
        assert_eq!(a, b, "row at t={}", r.t);
    }
}

#[test]
fn default_mhd_run_samples_every_sample_every_steps() {
    let dir = tempfile::tempdir().unwrap();
    let o = blowuplab(&[
        "simulate",
        "--scenario",
        "gaussian-mhd",
        "--out",
        s(dir.path()),
    ]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let meta = json(&dir.path().join("run.json"));
    assert_eq!(meta["termination"], "reached-t_end");
    let steps = meta["stats"]["steps"].as_u64().unwrap();
    let every = meta["solver"]["sample_every"].as_u64().unwrap();
    let rows = table::load(&dir.path().join("trajectory.csv")).unwrap();
    assert_eq!(rows.len() as u64, steps / every + 1);
    assert_eq!(meta["samples"].as_u64().unwrap(), rows.len() as u64);

    let chk = dir.path().join("check");
    let o = blowuplab(&[
        "check",
        s(&dir.path().join("trajectory.csv")),
        "--scenario",
        "gaussian-mhd",
        "--out",
        s(&chk),
    ]);
    assert_eq!(o.code, 0, "{}\n{}", o.stdout, o.stderr);
    let reports = json(&chk.join("certificates.json"));
    let reports = reports.as_array().unwrap();
    assert!(reports.len() >= 15);
    for r in reports {
        for key in [
            "name",
            "lhs",
            "rhs",
            "slack",
            "pass",
            "tolerance_class",
            "context",
        ] {
            assert!(r.get(key).is_some(), "missing {key} in {r}");
        }
    }
    let gradient = reports
        .iter()
        .find(|r| r["name"] == "gradient-lower-bound")
        .unwrap();
    assert_eq!(gradient["outcome"], "checked");
    assert_eq!(gradient["pass"], true);

    // energy that grows after the first sample must trip the monotonicity check
    let text = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    let mut rows = table::read_csv(text.as_bytes()).unwrap();
    for (k, r) in rows.iter_mut().enumerate() {
        r.e_total += 0.01 * k as f64;
    }
    let bad = dir.path().join("corrupt.csv");
    table::save(&bad, &rows).unwrap();
    let o = blowuplab(&["check", s(&bad), "--scenario", "gaussian-mhd"]);
    assert_eq!(o.code, 1, "{}", o.stderr);
    let reports: Value = serde_json::from_str(&o.stdout).unwrap();
    let mono = reports
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["name"] == "energy-monotonicity")
        .unwrap();
    assert_eq!(mono["pass"], false);
    assert!(o.stderr.contains("failed: ") && o.stderr.contains("energy-monotonicity"));
}

#[test]
fn zero_momentum_skips_gradient_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let o = blowuplab(&[
        "simulate",
        "--scenario",
        "gaussian-rest",
        "--out",
        s(dir.path()),
    ]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let csv = dir.path().join("trajectory.csv");
    let o = blowuplab(&["check", s(&csv), "--scenario", "gaussian-rest"]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let reports: Value = serde_json::from_str(&o.stdout).unwrap();
    for name in [
        "holder-momentum",
        "holder-jensen-momentum",
        "sobolev-embedding",
        "gradient-lower-bound",
    ] {
        let r = reports
            .as_array()
            .unwrap()
            .iter()
            .find(|r| r["name"] == name)
            .unwrap();
        assert_eq!(r["outcome"], "skipped", "{name}");
        assert!(r["context"].as_str().unwrap().contains("momentum is zero"));
        assert!(r["lhs"].is_null());
    }
}

#[test]
fn input_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"scenario\": ").unwrap();
    assert_eq!(blowuplab(&["simulate", "--config", s(&bad)]).code, 2);
    std::fs::write(&bad, r#"{"scenario": "no-such-scenario"}"#).unwrap();
    assert_eq!(blowuplab(&["simulate", "--config", s(&bad)]).code, 2);
    assert_eq!(blowuplab(&["simulate"]).code, 2);
    assert_eq!(
        blowuplab(&["simulate", "--scenario", "gaussian-mhd", "--n-dim", "2"]).code,
        2
    );
    assert_eq!(blowuplab(&["simulate", "--mode", "euler"]).code, 2);
    let csv = dir.path().join("t.csv");
    std::fs::write(&csv, "t,m,P1,P2,P3,E\n0,1,0,0,0,1\n").unwrap();
    assert_eq!(
        blowuplab(&["check", s(&csv), "--scenario", "gaussian-mhd"]).code,
        2
    );
    assert_eq!(
        blowuplab(&[
            "check",
            s(&dir.path().join("missing.csv")),
            "--scenario",
            "gaussian-mhd"
        ])
        .code,
        2
    );
    let o = run(
        &["oracle", "--levels", "8,12,16"],
        &[("BLOWUPLAB_THREADS", "zero")],
    );
    assert_eq!(o.code, 2);
    assert!(o.stderr.contains("BLOWUPLAB_THREADS"));
}

#[test]
fn constants_examples() {
    let unit = [
        "--m", "1", "--a", "1", "--p", "1", "--e0", "2", "--g0", "1", "--f0", "0", "--q0", "1",
        "--mu", "1", "--lambda", "0",
    ];
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["constants", "--gamma", "2", "--out", s(dir.path())];
    args.extend(unit);
    let o = blowuplab(&args);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let lines = json(&dir.path().join("constants.json"));
    let value = |name: &str| {
        lines
            .as_array()
            .unwrap()
            .iter()
            .find(|l| l["name"] == name)
            .unwrap()["value"]
            .as_f64()
    };
    assert_eq!(value("K1"), Some(1.0));
    let t_star = value("T_star").unwrap();
    let expect = 2f64.powf(4.0 / 3.0) / (value("sigma").unwrap() * value("K").unwrap());
    assert!((t_star - expect).abs() <= 1e-15 * expect);
    assert!(o.stdout.contains("1.9796263300525"), "{}", o.stdout);

    let mut args = vec!["constants", "--gamma", "1.1"];
    args.extend(unit);
    let o = blowuplab(&args);
    assert_eq!(o.code, 2);
    let k1 = o.stdout.lines().find(|l| l.starts_with("K1 ")).unwrap();
    assert!(k1.contains("error"), "{k1}");
    for name in ["K2 ", "C_gamma_n ", "C1 ", "sigma "] {
        let l = o.stdout.lines().find(|l| l.starts_with(name)).unwrap();
        assert!(!l.contains("error"), "{l}");
    }

    let mut args = vec![
        "constants",
        "--gamma",
        "1.5",
        "--n-dim",
        "4",
        "--mode",
        "ns",
    ];
    args.extend(unit);
    let o = blowuplab(&args);
    let kappa = o.stdout.lines().find(|l| l.starts_with("kappa ")).unwrap();
    assert!(kappa.contains("1.0000000000000000e0"), "{kappa}");
    let t = o.stdout.lines().find(|l| l.starts_with("T_star ")).unwrap();
    assert!(!t.contains("error"), "{t}");

    let o = blowuplab(&["constants", "--scenario", "gaussian-mhd"]);
    assert_eq!(o.code, 0, "{}", o.stdout);
}

#[test]
fn oracle_reports_every_functional() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &["oracle", "--out", s(dir.path())],
        &[("BLOWUPLAB_THREADS", "2")],
    );
    assert!(o.code == 0 || o.code == 1, "{}", o.stderr);
    let studies = json(&dir.path().join("oracle.json"));
    let studies = studies.as_array().unwrap();
    assert_eq!(studies.len(), 6);
    let mass = &studies[0];
    assert_eq!(mass["functional"], "mass");
    let m = mass["levels"][2]["value"].as_f64().unwrap();
    assert!((m - 15.7496).abs() < 1e-4, "{m}");
    let all_pass = studies.iter().all(|s| {
        let roundoff = s["levels"].as_array().unwrap().iter().all(|l| {
            let scale = l["reference"]
                .as_f64()
                .unwrap()
                .abs()
                .max(l["value"].as_f64().unwrap().abs());
            l["error"].as_f64().unwrap() <= 1e-13 * scale
        });
        roundoff || (s["monotone"] == true && s["order"].as_f64().is_some_and(|o| o >= 2.0))
    });
    assert_eq!(o.code, if all_pass { 0 } else { 1 });
}

#[test]
fn snapshots_round_trip_through_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"scenario": "gaussian-mhd",
            "solver": {"t_end": 0.04, "sample_every": 2},
            "outputs": {"csv_path": "traj/out.csv", "json_path": "meta.json", "snapshot_dir": "snaps"}}"#,
    )
    .unwrap();
    let o = blowuplab(&["simulate", "--config", s(&cfg), "--out", s(dir.path())]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let rows = table::load(&dir.path().join("traj/out.csv")).unwrap();
    assert_eq!(rows.len(), 3);
    for (k, row) in rows.iter().enumerate() {
        let st = snapshot::load(
            &dir.path().join(format!("snaps/snapshot_{k:06}.mhds")),
            Mode::Mhd,
        )
        .unwrap();
        assert_eq!(st.t, row.t);
        let b = blowuplab_core::energy_breakdown(&st).unwrap();
        assert_eq!(b.m.to_bits(), row.m.to_bits());
    }
    let meta = json(&dir.path().join("meta.json"));
    assert_eq!(meta["config"]["outputs"]["snapshot_dir"], "snaps");
}

#[test]
fn runtime_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    // a fixed step far above the stability limit
    std::fs::write(
        &cfg,
        r#"{"scenario": "gaussian-mhd", "grid": {"points_per_axis": 16}, "solver": {"t_end": 1.0, "dt_policy": {"fixed": 0.5}}}"#,
    )
    .unwrap();
    let o = blowuplab(&["simulate", "--config", s(&cfg), "--out", s(dir.path())]);
    assert_eq!(o.code, 3, "{}", o.stderr);
    assert!(o.stderr.contains("CflCollapse"), "{}", o.stderr);
    assert_eq!(
        json(&dir.path().join("run.json"))["termination"],
        "cfl-collapse"
    );
}

#[test]
fn repeated_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = blowuplab(&[
            "simulate",
            "--scenario",
            "gaussian-ns-soft",
            "--out",
            s(d.path()),
        ]);
        assert_eq!(o.code, 0, "{}", o.stderr);
    }
    for f in ["trajectory.csv", "run.json"] {
        assert_eq!(
            std::fs::read(a.path().join(f)).unwrap(),
            std::fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
}
