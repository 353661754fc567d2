use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::constants::*;
use super::{worst, CertificateReport, Outcome, ToleranceClass, Tolerances};
use crate::error::{Error, Result};
use crate::functionals::{holder_exponents, EnergyBreakdown};
use crate::math::{log2, powf};
use crate::state::Params;

use ToleranceClass::{Asymptotic, ExactToRoundoff, TruncationError};

/// Boundary mass below this fraction of the total keeps whole-space identities valid.
pub const CONTAMINATION_LIMIT: f64 = 1e-8;

/// Relative size of sample-level roundoff used to floor derivative scales.
const ROUNDOFF: f64 = 1e-11;

fn at(t: f64) -> String {
    format!("t={t:.17e}")
}

/// Three-point derivative of `f` at interior sample `k` on a possibly uneven time grid.
pub fn time_derivative<F: Fn(&EnergyBreakdown) -> f64>(
    s: &[EnergyBreakdown],
    k: usize,
    f: F,
) -> f64 {
    derivative_span(s, k, 1, &f).0
}

/// Derivative at `k` from samples `k - j`, `k`, `k + j`, with the product of the two
/// spacings, which sets the leading error term.
fn derivative_span<F: Fn(&EnergyBreakdown) -> f64>(
    s: &[EnergyBreakdown],
    k: usize,
    j: usize,
    f: &F,
) -> (f64, f64) {
    let (t0, t1, t2) = (s[k - j].t, s[k].t, s[k + j].t);
    let h1 = t1 - t0;
    let h2 = t2 - t1;
    let (y0, y1, y2) = (f(&s[k - j]), f(&s[k]), f(&s[k + j]));
    let d = -h2 / (h1 * (h1 + h2)) * y0 + (h2 - h1) / (h1 * h2) * y1 + h1 / (h2 * (h1 + h2)) * y2;
    (d, h1 * h2)
}

/// How sampled time derivatives are formed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Differencing {
    /// Three-point differences, error of order (sample spacing)^2.
    Central,
    /// Central differences over one and two spacings combined so the squared-spacing
    /// term cancels; needs two samples on each side.
    Extrapolated,
}

impl Differencing {
    /// Sample indices where a derivative is available.
    pub fn interior(self, len: usize) -> core::ops::Range<usize> {
        match self {
            Differencing::Extrapolated if len >= 5 => 2..len - 2,
            _ => 1..len.saturating_sub(1),
        }
    }

    pub fn derivative<F: Fn(&EnergyBreakdown) -> f64>(
        self,
        s: &[EnergyBreakdown],
        k: usize,
        f: F,
    ) -> f64 {
        let (d1, p1) = derivative_span(s, k, 1, &f);
        if self == Differencing::Central || k < 2 || k + 2 >= s.len() {
            return d1;
        }
        let (d2, p2) = derivative_span(s, k, 2, &f);
        (p2 * d1 - p1 * d2) / (p2 - p1)
    }
}

fn min_step(s: &[EnergyBreakdown]) -> f64 {
    s.windows(2)
        .map(|w| w[1].t - w[0].t)
        .fold(f64::INFINITY, f64::min)
}

/// `|P|`, Hölder, Jensen and Sobolev steps and the composed lower bound on
/// `int |Du|^2` for one sample.
pub fn check_momentum_gradient_bound(
    b: &EnergyBreakdown,
    params: &Params,
    tol: &Tolerances,
) -> Vec<CertificateReport> {
    const NAMES: [(&str, ToleranceClass); 4] = [
        ("holder-momentum", ExactToRoundoff),
        ("holder-jensen-momentum", ExactToRoundoff),
        ("sobolev-embedding", TruncationError),
        ("gradient-lower-bound", TruncationError),
    ];
    let skip = |reason: String| -> Vec<CertificateReport> {
        NAMES
            .iter()
            .map(|(n, c)| CertificateReport::skipped(n, *c, reason.clone()))
            .collect()
    };
    let n = b.n_dim();
    let p = b.momentum_norm();
    if n < 3 {
        return skip(format!("dimension {n} < 3"));
    }
    if !(p > 0.0) {
        return skip("momentum is zero".into());
    }
    if !(b.e_i > 0.0) {
        return skip("internal energy is zero".into());
    }
    let consts = constant_k1_n(b.m, params.a, params.gamma, n)
        .and_then(|k1| Ok((k1, constant_k2(n)?)))
        .and_then(|(k1, k2)| Ok((k1, k2, constant_k(p, k1, k2)?)));
    let (k1, k2, k) = match consts {
        Ok(c) => c,
        Err(e) => return skip(format!("{e}")),
    };
    let (qr, qu) = holder_exponents(n);
    let nf = n as f64;
    let u_norm = powf(b.u_l6, 1.0 / qu);
    let ctx = at(b.t);
    vec![
        CertificateReport::le(
            NAMES[0].0,
            p,
            powf(b.rho_l65, 1.0 / qr) * u_norm,
            ExactToRoundoff,
            0.0,
            tol,
            ctx.clone(),
        ),
        CertificateReport::le(
            NAMES[1].0,
            p,
            k1 * powf(b.e_i, (nf - 2.0) / (2.0 * nf * (params.gamma - 1.0))) * u_norm,
            ExactToRoundoff,
            0.0,
            tol,
            ctx.clone(),
        ),
        CertificateReport::le(
            NAMES[2].0,
            powf(b.u_l6, 2.0 / qu),
            k2 * b.grad_u_sq,
            TruncationError,
            0.0,
            tol,
            ctx.clone(),
        ),
        CertificateReport::le(
            NAMES[3].0,
            k * powf(b.e_i, -energy_exponent(params.gamma, n)),
            b.grad_u_sq,
            TruncationError,
            0.0,
            tol,
            ctx,
        ),
    ]
}

/// Residual sample of a time identity: time, residual, natural scale.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Residual {
    pub t: f64,
    pub value: f64,
    pub scale: f64,
}

/// `dE/dt + dissipation` at interior samples.
pub fn energy_identity_residuals(s: &[EnergyBreakdown], d: Differencing) -> Vec<Residual> {
    d.interior(s.len())
        .map(|k| {
            let de = d.derivative(s, k, |b| b.e_total);
            Residual {
                t: s[k].t,
                value: de + s[k].dissipation,
                scale: de.abs().max(s[k].dissipation),
            }
        })
        .collect()
}

/// `G' - F` at interior samples.
pub fn inertia_identity_residuals(s: &[EnergyBreakdown], d: Differencing) -> Vec<Residual> {
    d.interior(s.len())
        .map(|k| {
            let dg = d.derivative(s, k, |b| b.g);
            Residual {
                t: s[k].t,
                value: dg - s[k].f,
                scale: dg.abs().max(s[k].f.abs()),
            }
        })
        .collect()
}

/// `F' - (2 E_k + E_m + n (gamma - 1) E_i)` at interior samples.
pub fn virial_identity_residuals(
    s: &[EnergyBreakdown],
    gamma: f64,
    d: Differencing,
) -> Vec<Residual> {
    d.interior(s.len())
        .map(|k| {
            let b = &s[k];
            let df = d.derivative(s, k, |b| b.f);
            let r = 2.0 * b.e_k + b.e_m + b.n_dim() as f64 * (gamma - 1.0) * b.e_i;
            Residual {
                t: b.t,
                value: df - r,
                scale: df.abs().max(r.abs()),
            }
        })
        .collect()
}

/// Observed order of a residual family between two runs whose time steps differ
/// by `ratio`, comparing max norms over the sample times the runs share.
pub fn convergence_order(coarse: &[Residual], fine: &[Residual], ratio: f64) -> Option<f64> {
    let mut ec: f64 = 0.0;
    let mut ef: f64 = 0.0;
    let mut shared = 0;
    for c in coarse {
        let tol = 1e-9 * c.t.abs().max(1.0);
        if let Some(f) = fine.iter().find(|f| (f.t - c.t).abs() <= tol) {
            ec = ec.max(c.value.abs());
            ef = ef.max(f.value.abs());
            shared += 1;
        }
    }
    if shared == 0 || !(ef > 0.0) {
        return None;
    }
    Some(log2(ec / ef) / log2(ratio))
}

/// Observed order from three runs with time steps `dt`, `dt/ratio`, `dt/ratio^2`:
/// `log(|r1 - r2| / |r2 - r3|) / log(ratio)` over shared sample times, which cancels
/// any part of the residual that does not depend on the time step.
pub fn richardson_order(
    r1: &[Residual],
    r2: &[Residual],
    r3: &[Residual],
    ratio: f64,
) -> Option<f64> {
    let find = |rs: &[Residual], t: f64| {
        let tol = 1e-9 * t.abs().max(1.0);
        rs.iter().find(|r| (r.t - t).abs() <= tol).map(|r| r.value)
    };
    let mut d12: f64 = 0.0;
    let mut d23: f64 = 0.0;
    let mut shared = 0;
    for a in r1 {
        if let (Some(b), Some(c)) = (find(r2, a.t), find(r3, a.t)) {
            d12 = d12.max((a.value - b).abs());
            d23 = d23.max((b - c).abs());
            shared += 1;
        }
    }
    if shared == 0 || !(d23 > 0.0) {
        return None;
    }
    Some(log2(d12 / d23) / log2(ratio))
}

fn residual_report(
    name: &str,
    res: &[Residual],
    floor: f64,
    tol: &Tolerances,
    outcome: Outcome,
) -> CertificateReport {
    let reports = res
        .iter()
        .map(|r| {
            let mut rep = CertificateReport::le(
                name,
                r.value.abs(),
                0.0,
                TruncationError,
                r.scale.max(floor),
                tol,
                at(r.t),
            );
            rep.outcome = outcome;
            rep
        })
        .collect();
    worst(reports).unwrap_or_else(|| {
        CertificateReport::skipped(name, TruncationError, "no interior samples".into())
    })
}

/// Energy monotonicity, the dissipation identity, and the dissipation lower bound.
pub fn check_energy_dissipation(
    s: &[EnergyBreakdown],
    params: &Params,
    tol: &Tolerances,
) -> Result<Vec<CertificateReport>> {
    if s.len() < 3 {
        return Err(Error::Precondition(format!(
            "energy checks need at least 3 samples, got {}",
            s.len()
        )));
    }
    let e0 = s[0].e_total;
    let mono = s
        .windows(2)
        .map(|w| {
            CertificateReport::le(
                "energy-monotonicity",
                w[1].e_total,
                w[0].e_total + 1e-10 * e0,
                ExactToRoundoff,
                0.0,
                tol,
                at(w[1].t),
            )
        })
        .collect();
    let floor = ROUNDOFF * e0.abs() / min_step(s);
    let identity = residual_report(
        "energy-identity",
        &energy_identity_residuals(s, Differencing::Extrapolated),
        floor,
        tol,
        Outcome::Checked,
    );
    let n = s[0].n_dim();
    let bound = match constant_sigma(params.mu, params.lambda, n) {
        Ok(sigma) => worst(
            Differencing::Extrapolated
                .interior(s.len())
                .map(|k| {
                    let de = Differencing::Extrapolated.derivative(s, k, |b| b.e_total);
                    let rhs = -params.nu * s[k].curl_h_sq - sigma * s[k].grad_u_sq;
                    CertificateReport::le(
                        "energy-dissipation-bound",
                        de,
                        rhs,
                        TruncationError,
                        floor,
                        tol,
                        at(s[k].t),
                    )
                })
                .collect(),
        )
        .unwrap(),
        Err(e) => {
            CertificateReport::skipped("energy-dissipation-bound", TruncationError, format!("{e}"))
        }
    };
    Ok(vec![worst(mono).unwrap(), identity, bound])
}

/// `G' = F` and `F' = 2 E_k + E_m + n (gamma - 1) E_i`.
pub fn check_moment_identities(
    s: &[EnergyBreakdown],
    params: &Params,
    tol: &Tolerances,
) -> Vec<CertificateReport> {
    let names = ["inertia-identity", "virial-identity"];
    if s.len() < 3 {
        return names
            .iter()
            .map(|n| CertificateReport::skipped(n, TruncationError, "fewer than 3 samples".into()))
            .collect();
    }
    let contaminated = s
        .iter()
        .any(|b| b.boundary_mass >= CONTAMINATION_LIMIT * b.m);
    let outcome = if contaminated {
        Outcome::InvalidDomainTruncation
    } else {
        Outcome::Checked
    };
    let dt = min_step(s);
    let gmax = s.iter().map(|b| b.g.abs()).fold(0.0, f64::max);
    let fmax = s.iter().map(|b| b.f.abs()).fold(0.0, f64::max);
    let emax = s.iter().map(|b| b.e_total.abs()).fold(0.0, f64::max);
    let mut out = vec![
        residual_report(
            names[0],
            &inertia_identity_residuals(s, Differencing::Extrapolated),
            ROUNDOFF * gmax / dt,
            tol,
            outcome,
        ),
        residual_report(
            names[1],
            &virial_identity_residuals(s, params.gamma, Differencing::Extrapolated),
            ROUNDOFF * fmax.max(emax) / dt,
            tol,
            outcome,
        ),
    ];
    if contaminated {
        for r in &mut out {
            r.context = format!(
                "{}; boundary mass above {CONTAMINATION_LIMIT:e} of total",
                r.context
            );
        }
    }
    out
}

/// `|P|^2 t^2 / (2m) + F0 t + G0 <= G(t) <= c E0 t^2 + F0 t + G0`, with `t`
/// measured from the first sample.
pub fn check_inertia_bounds(
    s: &[EnergyBreakdown],
    params: &Params,
    tol: &Tolerances,
) -> Vec<CertificateReport> {
    let Some(first) = s.first() else {
        return vec![
            CertificateReport::skipped(
                "inertia-lower-bound",
                TruncationError,
                "empty trajectory".into(),
            ),
            CertificateReport::skipped(
                "inertia-upper-bound",
                TruncationError,
                "empty trajectory".into(),
            ),
        ];
    };
    let (t0, g0, f0, e0, m) = (first.t, first.g, first.f, first.e_total, first.m);
    let p2 = first.momentum_norm() * first.momentum_norm();
    let c = inertia_upper_coefficient(params.gamma, first.n_dim());
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    for b in s {
        let tau = b.t - t0;
        let base = f0 * tau + g0;
        let lo = if m > 0.0 {
            p2 / (2.0 * m) * tau * tau + base
        } else {
            base
        };
        lower.push(CertificateReport::le(
            "inertia-lower-bound",
            lo,
            b.g,
            TruncationError,
            0.0,
            tol,
            at(b.t),
        ));
        upper.push(CertificateReport::le(
            "inertia-upper-bound",
            b.g,
            c * e0 * tau * tau + base,
            TruncationError,
            0.0,
            tol,
            at(b.t),
        ));
    }
    vec![worst(lower).unwrap(), worst(upper).unwrap()]
}

/// Index of the first sample after which `G` increases strictly to the end.
pub fn tail_onset(s: &[EnergyBreakdown]) -> Option<usize> {
    if s.len() < 2 {
        return None;
    }
    let mut k = s.len() - 1;
    while k > 0 && s[k - 1].g < s[k].g {
        k -= 1;
    }
    (k < s.len() - 1).then_some(k)
}

/// Positivity of `Q`, `E_i + E_m <= Q / (4G)`, and the logarithmic slope bound
/// where `G` grows. Three-dimensional statements.
pub fn check_q_chain(
    s: &[EnergyBreakdown],
    params: &Params,
    tol: &Tolerances,
) -> Vec<CertificateReport> {
    let names = [
        ("q-positive", ExactToRoundoff),
        ("q-energy-bound", ExactToRoundoff),
        ("q-slope", TruncationError),
    ];
    let skip_all = |reason: &str| {
        names
            .iter()
            .map(|(n, c)| CertificateReport::skipped(n, *c, reason.into()))
            .collect::<Vec<_>>()
    };
    if s.is_empty() {
        return skip_all("empty trajectory");
    }
    if s[0].n_dim() != 3 {
        return skip_all("stated for n = 3");
    }
    if !s.iter().any(|b| b.e_i > 0.0) {
        return skip_all("internal energy vanishes identically");
    }
    if s.iter().any(|b| !(b.g > 0.0)) {
        return skip_all("moment of inertia vanishes");
    }
    let positive = worst(
        s.iter()
            .map(|b| {
                CertificateReport::le("q-positive", 0.0, b.q, ExactToRoundoff, 0.0, tol, at(b.t))
            })
            .collect(),
    )
    .unwrap();
    let bound = worst(
        s.iter()
            .map(|b| {
                CertificateReport::le(
                    "q-energy-bound",
                    b.e_i + b.e_m,
                    b.q / (4.0 * b.g),
                    ExactToRoundoff,
                    0.0,
                    tol,
                    at(b.t),
                )
            })
            .collect(),
    )
    .unwrap();
    let slope = q_slope(params.gamma);
    let d = Differencing::Extrapolated;
    let slopes: Vec<_> = d
        .interior(s.len())
        .filter_map(|k| {
            let dg = d.derivative(s, k, |b| b.g);
            (dg > 0.0).then(|| {
                let dq = d.derivative(s, k, |b| b.q);
                CertificateReport::le(
                    "q-slope",
                    dq / s[k].q,
                    slope * dg / s[k].g,
                    TruncationError,
                    0.0,
                    tol,
                    format!("{}, slope {slope}", at(s[k].t)),
                )
            })
        })
        .collect();
    let slope_rep = worst(slopes).unwrap_or_else(|| {
        CertificateReport::not_run(
            "q-slope",
            TruncationError,
            Outcome::AsymptoticNotReached,
            "G never increasing".into(),
        )
    });
    vec![positive, bound, slope_rep]
}

/// Lower bound `C1 (2G)^(-n(gamma-1)/2) <= E_i + E_m`, the weighted norm of the
/// interpolation inequality being `int |x|^2 rho = 2G`.
pub fn energy_lower_bound(
    b: &EnergyBreakdown,
    params: &Params,
    tol: &Tolerances,
) -> CertificateReport {
    let n = b.n_dim();
    match constant_c1(params.a, params.gamma, n, b.m) {
        Ok(c1) if b.g > 0.0 => CertificateReport::le(
            "energy-lower-bound",
            c1 * powf(2.0 * b.g, -(n as f64) * (params.gamma - 1.0) / 2.0),
            b.e_i + b.e_m,
            TruncationError,
            0.0,
            tol,
            at(b.t),
        ),
        Ok(_) => CertificateReport::skipped("energy-lower-bound", TruncationError, "G = 0".into()),
        Err(e) => CertificateReport::skipped("energy-lower-bound", TruncationError, format!("{e}")),
    }
}

/// The same lower bound written with `G` in place of `2G`, i.e.
/// `C1 G^(-3(gamma-1)/2) <= E_i + E_m`.
pub fn energy_lower_bound_printed(
    b: &EnergyBreakdown,
    params: &Params,
    tol: &Tolerances,
) -> CertificateReport {
    match constant_c1(params.a, params.gamma, 3, b.m) {
        Ok(c1) if b.g > 0.0 && b.n_dim() == 3 => CertificateReport::le(
            "energy-lower-bound-printed",
            c1 * powf(b.g, -3.0 * (params.gamma - 1.0) / 2.0),
            b.e_i + b.e_m,
            TruncationError,
            0.0,
            tol,
            at(b.t),
        ),
        Ok(_) => CertificateReport::skipped(
            "energy-lower-bound-printed",
            TruncationError,
            "needs n = 3 and G > 0".into(),
        ),
        Err(e) => CertificateReport::skipped(
            "energy-lower-bound-printed",
            TruncationError,
            format!("{e}"),
        ),
    }
}

/// `C2` anchored at the tail onset, with the onset index.
pub fn tail_c2(s: &[EnergyBreakdown], gamma: f64) -> Option<(usize, f64)> {
    let k0 = tail_onset(s)?;
    let c2 = constant_c2(gamma, s[k0].q, s[k0].g).ok()?;
    Some((k0, c2))
}

/// Lower bound at every sample, upper bound `E_i + E_m <= C2 G^(-beta)` on the tail.
pub fn check_energy_bounds(
    s: &[EnergyBreakdown],
    params: &Params,
    tol: &Tolerances,
) -> Vec<CertificateReport> {
    let lower = worst(
        s.iter()
            .map(|b| energy_lower_bound(b, params, tol))
            .collect(),
    )
    .unwrap_or_else(|| {
        CertificateReport::skipped(
            "energy-lower-bound",
            TruncationError,
            "empty trajectory".into(),
        )
    });
    let upper = if s.first().map(|b| b.n_dim()) != Some(3) {
        CertificateReport::skipped(
            "energy-upper-bound",
            TruncationError,
            "stated for n = 3".into(),
        )
    } else {
        match tail_c2(s, params.gamma) {
            None => CertificateReport::not_run(
                "energy-upper-bound",
                TruncationError,
                Outcome::AsymptoticNotReached,
                "G' > 0 never persists to the end of the run".into(),
            ),
            Some((k0, c2)) => {
                let beta = upper_bound_exponent(params.gamma);
                worst(
                    s[k0..]
                        .iter()
                        .map(|b| {
                            CertificateReport::le(
                                "energy-upper-bound",
                                b.e_i + b.e_m,
                                c2 * powf(b.g, -beta),
                                TruncationError,
                                0.0,
                                tol,
                                format!("{}, tail from t={:.17e}, C2={c2:.17e}", at(b.t), s[k0].t),
                            )
                        })
                        .collect(),
                )
                .unwrap()
            }
        }
    };
    vec![lower, upper]
}

/// Constants evaluated at the first sample of a trajectory.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Constants {
    pub k1: Option<f64>,
    pub k2: Option<f64>,
    pub k: Option<f64>,
    pub c_gn: Option<f64>,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub sigma: Option<f64>,
    pub l_env: Option<f64>,
    pub envelope_exponent: Option<f64>,
    pub t_star: Option<f64>,
}

pub fn trajectory_constants(s: &[EnergyBreakdown], params: &Params) -> Constants {
    let b = &s[0];
    let n = b.n_dim();
    let k1 = constant_k1_n(b.m, params.a, params.gamma, n).ok();
    let k2 = constant_k2(n).ok();
    let k = match (k1, k2) {
        (Some(k1), Some(k2)) => constant_k(b.momentum_norm(), k1, k2).ok(),
        _ => None,
    };
    let sigma = constant_sigma(params.mu, params.lambda, n).ok();
    let c2 = if n == 3 {
        tail_c2(s, params.gamma).map(|(_, c)| c)
    } else {
        None
    };
    let env = match (sigma, k, c2) {
        (Some(sg), Some(k), Some(c2)) => {
            decay_envelope_constant(sg, k, c2, b.momentum_norm(), b.m, params.gamma, n).ok()
        }
        _ => None,
    };
    let t_star = match (sigma, k) {
        (Some(sg), Some(k)) => lifespan_bound(b.e_total, sg, k, params.gamma, n).ok(),
        _ => None,
    };
    Constants {
        k1,
        k2,
        k,
        c_gn: constant_cgn(params.gamma, n).ok(),
        c1: constant_c1(params.a, params.gamma, n, b.m).ok(),
        c2,
        sigma,
        l_env: env.map(|e| e.l),
        envelope_exponent: env.map(|e| e.exponent),
        t_star,
    }
}

/// Late-time decay envelope `dE/dt <= -L t^p` on the tail, and the comparison of
/// the energy bound it implies with the linear bound at the last sample.
pub fn decay_envelope(
    s: &[EnergyBreakdown],
    params: &Params,
    tol: &Tolerances,
) -> Vec<CertificateReport> {
    let names = ["decay-envelope", "envelope-vs-linear-bound"];
    let skip = |outcome: Outcome, reason: String| {
        names
            .iter()
            .map(|n| CertificateReport::not_run(n, Asymptotic, outcome, reason.clone()))
            .collect::<Vec<_>>()
    };
    if s.len() < 3 {
        return skip(Outcome::Skipped, "fewer than 3 samples".into());
    }
    let b0 = &s[0];
    let n = b0.n_dim();
    if n != 3 {
        return skip(Outcome::Skipped, "stated for n = 3".into());
    }
    if !(b0.e_i > 0.0) {
        return skip(Outcome::Skipped, "internal energy is zero".into());
    }
    if !(b0.momentum_norm() > 0.0) {
        return skip(Outcome::Skipped, "momentum is zero".into());
    }
    // |F| <= 2 sqrt(G E_k), so this scale separates a sign from roundoff
    if b0.f < -1e-12 * 2.0 * crate::math::sqrt(b0.g * b0.e_k) {
        return skip(
            Outcome::Skipped,
            "initial radial momentum is negative".into(),
        );
    }
    let c = trajectory_constants(s, params);
    let Some((k0, _)) = tail_c2(s, params.gamma) else {
        return skip(
            Outcome::AsymptoticNotReached,
            "G' > 0 never persists to the end of the run".into(),
        );
    };
    let (Some(l), Some(p), Some(sigma), Some(k)) = (c.l_env, c.envelope_exponent, c.sigma, c.k)
    else {
        return skip(Outcome::Skipped, "constants unavailable".into());
    };
    let t0 = b0.t;
    let start = k0.max(1);
    let tail: Vec<_> = (start..s.len() - 1)
        .map(|j| {
            let de = Differencing::Extrapolated.derivative(s, j, |b| b.e_total);
            let tau = s[j].t - t0;
            CertificateReport::le(
                names[0],
                de,
                -l * powf(tau, p),
                Asymptotic,
                0.0,
                tol,
                format!("{}, L={l:.17e}, p={p}", at(s[j].t)),
            )
        })
        .collect();
    // trend: the envelope must hold over the last half of the tail
    let half = tail.len() / 2;
    let env = worst(tail[half..].to_vec()).unwrap_or_else(|| {
        CertificateReport::not_run(
            names[0],
            Asymptotic,
            Outcome::AsymptoticNotReached,
            "tail too short".into(),
        )
    });
    let last = &s[s.len() - 1];
    let tau = last.t - t0;
    let tk = s[k0].t - t0;
    let kappa = energy_exponent(params.gamma, n);
    let envelope_bound = s[k0].e_total - l * (powf(tau, p + 1.0) - powf(tk, p + 1.0)) / (p + 1.0);
    let linear_bound = b0.e_total - sigma * k * powf(b0.e_total, -kappa) * tau;
    let cmp = CertificateReport::le(
        names[1],
        envelope_bound,
        linear_bound,
        Asymptotic,
        0.0,
        tol,
        at(last.t),
    );
    vec![env, cmp]
}

/// Reached time against the lifespan bound: a smooth run on the whole space
/// cannot outlive `T*`.
pub fn lifespan_report(
    s: &[EnergyBreakdown],
    params: &Params,
    tol: &Tolerances,
) -> CertificateReport {
    let c = trajectory_constants(s, params);
    match c.t_star {
        Some(ts) => {
            let reached = s[s.len() - 1].t - s[0].t;
            CertificateReport::le(
                "lifespan-bound",
                reached,
                ts,
                Asymptotic,
                0.0,
                tol,
                format!("T*={ts:.17e}"),
            )
        }
        None => CertificateReport::skipped(
            "lifespan-bound",
            Asymptotic,
            "needs nonzero momentum, n >= 3 and gamma >= 2n/(n+2)".into(),
        ),
    }
}

/// Runs every certificate over a trajectory.
pub fn certify(
    s: &[EnergyBreakdown],
    params: &Params,
    tol: &Tolerances,
) -> Result<Vec<CertificateReport>> {
    if s.len() < 3 {
        return Err(Error::Precondition(format!(
            "trajectory needs at least 3 samples, got {}",
            s.len()
        )));
    }
    if s.windows(2).any(|w| !(w[1].t > w[0].t)) {
        return Err(Error::Precondition(
            "sample times must increase strictly".into(),
        ));
    }
    let n = s[0].n_dim();
    if s.iter().any(|b| b.n_dim() != n) {
        return Err(Error::Precondition("samples disagree on dimension".into()));
    }
    let mut out = Vec::new();
    let per_sample: Vec<Vec<CertificateReport>> = s
        .iter()
        .map(|b| check_momentum_gradient_bound(b, params, tol))
        .collect();
    for i in 0..per_sample[0].len() {
        out.push(worst(per_sample.iter().map(|r| r[i].clone()).collect()).unwrap());
    }
    out.extend(check_energy_dissipation(s, params, tol)?);
    out.extend(check_moment_identities(s, params, tol));
    out.extend(check_inertia_bounds(s, params, tol));
    out.extend(check_q_chain(s, params, tol));
    out.extend(check_energy_bounds(s, params, tol));
    out.extend(decay_envelope(s, params, tol));
    out.push(lifespan_report(s, params, tol));
    Ok(out)
}
