//! Gaussian initial data with closed-form functionals, and the named scenario library.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::functionals::{energy_breakdown, holder_exponents, EnergyBreakdown};
use crate::grid::{Grid, StencilOrder};
use crate::math::{exp, ln, powf, sqrt};
use crate::solver::{cfl_dt, DtPolicy, SolverConfig};
use crate::state::{Mode, Params, State};

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GridSpec {
    pub n_dim: usize,
    pub half_extent: f64,
    pub points_per_axis: usize,
}

impl GridSpec {
    pub fn build(&self) -> Result<Grid> {
        Grid::new(self.n_dim, self.half_extent, self.points_per_axis)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum DensityProfile {
    #[default]
    Gaussian,
    /// `rho = rho_bar` everywhere; the equilibrium control.
    Uniform,
}

#[derive(Clone, Copy, Debug, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum VelocityProfile {
    /// `u = U` on the whole box. Finite energy only because the box is bounded.
    #[default]
    Uniform,
    /// `u = U exp(-|x|^2 / (2 width^2))`.
    Localized { width: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum MagneticSpec {
    #[default]
    Zero,
    /// `H = curl_h (0, 0, amplitude exp(-|x|^2 / (2 width^2)))`, taken with the
    /// discrete curl so the discrete divergence vanishes to roundoff.
    Potential { amplitude: f64, width: f64 },
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GaussianScenario {
    pub name: String,
    #[cfg_attr(feature = "serde", serde(default))]
    pub density: DensityProfile,
    pub rho_bar: f64,
    pub s: f64,
    #[cfg_attr(feature = "serde", serde(rename = "U"))]
    pub velocity: Vec<f64>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub velocity_profile: VelocityProfile,
    #[cfg_attr(feature = "serde", serde(default))]
    pub magnetic: MagneticSpec,
    pub grid: GridSpec,
    pub params: Params,
    pub mode: Mode,
}

impl GaussianScenario {
    pub fn validate(&self) -> Result<()> {
        let g = &self.grid;
        if !(self.rho_bar > 0.0) || !self.rho_bar.is_finite() {
            return Err(Error::Params(format!(
                "rho_bar must be positive, got {}",
                self.rho_bar
            )));
        }
        if self.density == DensityProfile::Gaussian
            && !(self.s > 0.0 && self.s <= g.half_extent / 5.0)
        {
            return Err(Error::Params(format!(
                "width s = {} must lie in (0, L/5] with L = {}",
                self.s, g.half_extent
            )));
        }
        if self.velocity.len() != g.n_dim || self.velocity.iter().any(|v| !v.is_finite()) {
            return Err(Error::Params(format!(
                "U needs {} finite components, got {:?}",
                g.n_dim, self.velocity
            )));
        }
        if let VelocityProfile::Localized { width } = self.velocity_profile {
            if !(width > 0.0) || !width.is_finite() {
                return Err(Error::Params(format!(
                    "velocity width must be positive, got {width}"
                )));
            }
        }
        if let MagneticSpec::Potential { amplitude, width } = self.magnetic {
            if self.mode != Mode::Mhd {
                return Err(Error::Params("a magnetic profile needs mhd mode".into()));
            }
            if !amplitude.is_finite() || !(width > 0.0) || !width.is_finite() {
                return Err(Error::Params(
                    "magnetic amplitude must be finite and width positive".into(),
                ));
            }
        }
        if self.mode == Mode::Mhd && g.n_dim != 3 {
            return Err(Error::Params(format!(
                "mhd mode needs n = 3, got {}",
                g.n_dim
            )));
        }
        self.params.validate(g.n_dim)
    }

    pub fn momentum_is_zero(&self) -> bool {
        self.velocity.iter().all(|v| *v == 0.0)
    }

    /// Initial state on the scenario grid; `order` is the stencil used for the
    /// magnetic curl.
    pub fn initial_state(&self, order: StencilOrder) -> Result<State> {
        self.validate()?;
        let grid = self.grid.build()?;
        let n = grid.n_dim();
        let (rb, s) = (self.rho_bar, self.s);
        let rho = match self.density {
            DensityProfile::Gaussian => grid.sample(|x| rb * exp(-r2(x) / (2.0 * s * s))),
            DensityProfile::Uniform => vec![rb; grid.len()],
        };
        let u = (0..n)
            .map(|a| {
                let ua = self.velocity[a];
                match self.velocity_profile {
                    VelocityProfile::Uniform => vec![ua; grid.len()],
                    VelocityProfile::Localized { width } => {
                        grid.sample(|x| ua * exp(-r2(x) / (2.0 * width * width)))
                    }
                }
            })
            .collect();
        let h = match self.magnetic {
            MagneticSpec::Zero => vec![vec![0.0; grid.len()]; n],
            MagneticSpec::Potential { amplitude, width } => {
                let az = grid.sample(|x| amplitude * exp(-r2(x) / (2.0 * width * width)));
                let pot = vec![vec![0.0; grid.len()], vec![0.0; grid.len()], az];
                grid.curl(&pot, order)?
            }
        };
        State::new(grid, self.mode, self.params, 0.0, rho, u, h)
    }
}

fn r2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// `int exp(-x^2 / (2 var)) x^(2k)` over `[-l, l]`, or over the line when `l` is `None`.
fn moment_1d(var: f64, k: u32, l: Option<f64>) -> f64 {
    let sd = sqrt(var);
    let full = sqrt(2.0 * PI) * sd;
    let i0 = match l {
        None => full,
        Some(l) => full * libm::erf(l / (sqrt(2.0) * sd)),
    };
    match (k, l) {
        (0, _) => i0,
        (1, None) => var * i0,
        (1, Some(l)) => var * i0 - 2.0 * l * var * exp(-l * l / (2.0 * var)),
        _ => unreachable!(),
    }
}

/// Functionals of a uniform-velocity, field-free Gaussian over `R^n`
/// (`box_half_extent = None`) or over `[-L, L]^n`.
fn closed_form(scn: &GaussianScenario, box_half_extent: Option<f64>) -> Result<EnergyBreakdown> {
    scn.validate()?;
    if scn.magnetic != MagneticSpec::Zero {
        return Err(Error::Precondition(
            "closed forms exist only for H = 0".into(),
        ));
    }
    if scn.velocity_profile != VelocityProfile::Uniform {
        return Err(Error::Precondition(
            "closed forms exist only for uniform velocity".into(),
        ));
    }
    if scn.density != DensityProfile::Gaussian {
        return Err(Error::Precondition(
            "closed forms exist only for Gaussian density".into(),
        ));
    }
    let n = scn.grid.n_dim;
    let nf = n as f64;
    let (rb, s2) = (scn.rho_bar, scn.s * scn.s);
    let prm = &scn.params;
    let gamma = prm.gamma;
    let l = box_half_extent;
    let i0 = moment_1d(s2, 0, l);
    let i2 = moment_1d(s2, 1, l);
    let pw = |x: f64, k: usize| (0..k).fold(1.0, |acc, _| acc * x);
    let m = rb * pw(i0, n);
    let p: Vec<f64> = scn.velocity.iter().map(|u| m * u).collect();
    let u2: f64 = scn.velocity.iter().map(|u| u * u).sum();
    let e_k = 0.5 * m * u2;
    let g = 0.5 * rb * nf * i2 * pw(i0, n - 1);
    let rho_pow = |q: f64| powf(rb, q) * pw(moment_1d(s2 / q, 0, l), n);
    let e_i = prm.a / (gamma - 1.0) * rho_pow(gamma);
    let (pl, pu) = holder_exponents(n);
    let volume = pw(2.0 * scn.grid.half_extent, n);
    Ok(EnergyBreakdown {
        t: 0.0,
        m,
        p,
        e_k,
        e_m: 0.0,
        e_i,
        e_total: e_k + e_i,
        g,
        f: 0.0,
        q: 4.0 * g * (e_k + e_i),
        grad_u_sq: 0.0,
        curl_h_sq: 0.0,
        u_l6: powf(u2, 0.5 * pu) * volume,
        rho_l65: rho_pow(pl),
        rho_lgamma: rho_pow(gamma),
        div_h_sq: 0.0,
        dissipation: 0.0,
        boundary_mass: 0.0,
    })
}

/// Closed-form functionals at `t = 0` over `R^n`. `u_L6` is the box value since a
/// constant velocity is not integrable on `R^n`; `boundary_mass` is zero.
pub fn gaussian_reference(scn: &GaussianScenario) -> Result<EnergyBreakdown> {
    closed_form(scn, None)
}

/// The same closed forms restricted to the box `[-L, L]^n`.
pub fn gaussian_reference_box(scn: &GaussianScenario) -> Result<EnergyBreakdown> {
    closed_form(scn, Some(scn.grid.half_extent))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Functional {
    Mass,
    /// First momentum component.
    Momentum,
    KineticEnergy,
    InternalEnergy,
    Inertia,
    Virial,
}

impl Functional {
    pub const ALL: [Functional; 6] = [
        Functional::Mass,
        Functional::Momentum,
        Functional::KineticEnergy,
        Functional::InternalEnergy,
        Functional::Inertia,
        Functional::Virial,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Functional::Mass => "m",
            Functional::Momentum => "P1",
            Functional::KineticEnergy => "E_k",
            Functional::InternalEnergy => "E_i",
            Functional::Inertia => "G",
            Functional::Virial => "F",
        }
    }

    pub fn of(self, b: &EnergyBreakdown) -> f64 {
        match self {
            Functional::Mass => b.m,
            Functional::Momentum => b.p[0],
            Functional::KineticEnergy => b.e_k,
            Functional::InternalEnergy => b.e_i,
            Functional::Inertia => b.g,
            Functional::Virial => b.f,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Level {
    pub points_per_axis: usize,
    pub spacing: f64,
    pub value: f64,
    /// Closed form over the box.
    pub reference: f64,
    /// `|value - reference|`.
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConvergenceStudy {
    pub functional: Functional,
    pub levels: Vec<Level>,
    /// Closed form over `R^n`.
    pub whole_space: f64,
    /// Least-squares slope of `log error` against `log h`; `None` when some error is zero.
    pub order: Option<f64>,
    /// Orders between consecutive levels.
    pub pairwise: Vec<f64>,
    /// Errors shrink strictly with `h`.
    pub monotone: bool,
}

/// Quadrature error of `functional` against the box closed form over the
/// refinement `levels` (points per axis).
pub fn convergence_study(
    scn: &GaussianScenario,
    functional: Functional,
    levels: &[usize],
) -> Result<ConvergenceStudy> {
    if levels.len() < 3 {
        return Err(Error::Precondition(format!(
            "need at least 3 levels, got {}",
            levels.len()
        )));
    }
    let whole = functional.of(&gaussian_reference(scn)?);
    let reference = functional.of(&gaussian_reference_box(scn)?);
    let mut out = Vec::with_capacity(levels.len());
    for &np in levels {
        let mut s = scn.clone();
        s.grid.points_per_axis = np;
        let st = s.initial_state(StencilOrder::Fourth)?;
        let value = functional.of(&energy_breakdown(&st)?);
        out.push(Level {
            points_per_axis: np,
            spacing: st.grid.spacing(),
            value,
            reference,
            error: (value - reference).abs(),
        });
    }
    out.sort_by(|a, b| b.spacing.total_cmp(&a.spacing));
    let monotone = out.windows(2).all(|w| w[1].error < w[0].error);
    let pairwise = out
        .windows(2)
        .map(|w| ln(w[0].error / w[1].error) / ln(w[0].spacing / w[1].spacing))
        .collect();
    let order = if out.iter().all(|l| l.error > 0.0) {
        let pts: Vec<(f64, f64)> = out.iter().map(|l| (ln(l.spacing), ln(l.error))).collect();
        let k = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        Some(sxy / sxx)
    } else {
        None
    };
    Ok(ConvergenceStudy {
        functional,
        levels: out,
        whole_space: whole,
        order,
        pairwise,
        monotone,
    })
}

fn physical(gamma: f64) -> Params {
    Params {
        a: 1.0,
        gamma,
        mu: 1e-3,
        lambda: 0.0,
        nu: 1e-3,
    }
}

fn simulation_grid() -> GridSpec {
    GridSpec {
        n_dim: 3,
        half_extent: 6.0,
        points_per_axis: 40,
    }
}

fn simulated(
    name: &str,
    gamma: f64,
    mode: Mode,
    velocity: [f64; 3],
    magnetic: MagneticSpec,
) -> GaussianScenario {
    GaussianScenario {
        name: name.to_string(),
        density: DensityProfile::Gaussian,
        rho_bar: 1.0,
        s: 0.8,
        velocity: velocity.to_vec(),
        velocity_profile: VelocityProfile::Localized { width: 1.0 },
        magnetic,
        grid: simulation_grid(),
        params: physical(gamma),
        mode,
    }
}

/// Solver settings the library scenarios are tuned for: fixed steps well inside
/// the stability limit, and a horizon that ends before the expanding front
/// steepens. Soft pressure laws accelerate the near-vacuum tail, whose velocity
/// gradients the weighted viscosity leaves undamped, so their horizon is shorter.
pub fn default_solver(scn: &GaussianScenario) -> SolverConfig {
    const DT: f64 = 0.01;
    let soft = scn.params.gamma <= 4.0 / 3.0;
    let mut cfg = SolverConfig {
        mode: scn.mode,
        dt_policy: DtPolicy::Cfl,
        t_end: if soft { 0.2 } else { 0.6 },
        sample_every: if soft { 2 } else { 10 },
        vacuum_scale: 2e-3,
        ..SolverConfig::default()
    };
    let stable = scn
        .initial_state(cfg.stencil)
        .and_then(|st| cfl_dt(&st, cfg.cfl_number, &cfg))
        .is_ok_and(|limit| limit >= DT);
    if stable {
        cfg.dt_policy = DtPolicy::Fixed(DT);
    }
    cfg
}

/// Names accepted by [`scenario`].
pub const LIBRARY: [&str; 7] = [
    "equilibrium",
    "gaussian-reference",
    "gaussian-mhd",
    "gaussian-mhd-soft",
    "gaussian-ns",
    "gaussian-ns-soft",
    "gaussian-rest",
];

/// Named scenario from the library.
pub fn scenario(name: &str) -> Result<GaussianScenario> {
    let field = MagneticSpec::Potential {
        amplitude: 0.3,
        width: 0.8,
    };
    let push = [0.5, 0.0, 0.0];
    Ok(match name {
        "equilibrium" => GaussianScenario {
            name: name.to_string(),
            density: DensityProfile::Uniform,
            rho_bar: 1.0,
            s: 1.0,
            velocity: vec![0.0; 3],
            velocity_profile: VelocityProfile::Uniform,
            magnetic: MagneticSpec::Zero,
            grid: GridSpec {
                n_dim: 3,
                half_extent: 1.0,
                points_per_axis: 16,
            },
            params: physical(2.0),
            mode: Mode::Mhd,
        },
        "gaussian-reference" => GaussianScenario {
            name: name.to_string(),
            density: DensityProfile::Gaussian,
            rho_bar: 1.0,
            s: 1.0,
            velocity: vec![1.0, 0.0, 0.0],
            velocity_profile: VelocityProfile::Uniform,
            magnetic: MagneticSpec::Zero,
            grid: GridSpec {
                n_dim: 3,
                half_extent: 6.0,
                points_per_axis: 48,
            },
            params: Params {
                a: 1.0,
                gamma: 2.0,
                mu: 1.0,
                lambda: 0.0,
                nu: 0.0,
            },
            mode: Mode::Ns,
        },
        "gaussian-mhd" => simulated(name, 2.0, Mode::Mhd, push, field),
        "gaussian-mhd-soft" => simulated(name, 1.25, Mode::Mhd, push, field),
        "gaussian-ns" => simulated(name, 2.0, Mode::Ns, push, MagneticSpec::Zero),
        "gaussian-ns-soft" => simulated(name, 1.25, Mode::Ns, push, MagneticSpec::Zero),
        "gaussian-rest" => simulated(name, 2.0, Mode::Mhd, [0.0; 3], field),
        _ => {
            return Err(Error::Params(format!(
                "unknown scenario '{name}'; known: {}",
                LIBRARY.join(", ")
            )))
        }
    })
}

pub fn library() -> Vec<GaussianScenario> {
    LIBRARY
        .iter()
        .map(|n| scenario(n).expect("library names resolve"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference() -> GaussianScenario {
        scenario("gaussian-reference").unwrap()
    }

    #[test]
    fn reference_example_values() {
        let r = gaussian_reference(&reference()).unwrap();
        let m = (2.0 * PI).powf(1.5);
        assert!((r.m - m).abs() < 1e-12 * m);
        assert!((r.m - 15.7496).abs() < 1e-4);
        assert_eq!(r.p, vec![r.m, 0.0, 0.0]);
        assert!((r.e_k - 7.8748).abs() < 1e-4);
        assert!((r.g - 23.6245).abs() < 1e-4);
        assert_eq!(r.f, 0.0);
        assert!((r.e_i - PI.powf(1.5)).abs() < 1e-12 * r.e_i);
    }

    #[test]
    fn rest_and_scaling() {
        let mut s = reference();
        s.velocity = vec![0.0; 3];
        let r = gaussian_reference(&s).unwrap();
        assert_eq!(r.e_k, 0.0);
        assert!(r.p.iter().all(|p| *p == 0.0));
        let m1 = r.m;
        s.s = 1.2;
        let m2 = gaussian_reference(&s).unwrap().m;
        assert!((m2 / m1 - 1.2f64.powi(3)).abs() < 1e-12);
    }

    #[test]
    fn closed_form_rejects_fields() {
        let mut s = reference();
        s.mode = Mode::Mhd;
        s.magnetic = MagneticSpec::Potential {
            amplitude: 1.0,
            width: 1.0,
        };
        assert!(gaussian_reference(&s).is_err());
    }

    #[test]
    fn validation() {
        let mut s = reference();
        s.s = 1.3;
        assert!(s.validate().is_err());
        let mut s = reference();
        s.velocity = vec![1.0];
        assert!(s.validate().is_err());
        let mut s = reference();
        s.magnetic = MagneticSpec::Potential {
            amplitude: 1.0,
            width: 1.0,
        };
        assert!(s.validate().is_err());
        assert!(scenario("nope").is_err());
    }

    #[test]
    fn library_covers_required_cases() {
        let lib = library();
        let p_nonzero =
            |s: &&GaussianScenario| !s.momentum_is_zero() && s.density == DensityProfile::Gaussian;
        assert!(lib.iter().filter(p_nonzero).any(|s| s.mode == Mode::Mhd));
        assert!(lib
            .iter()
            .filter(p_nonzero)
            .any(|s| s.mode == Mode::Ns && s.grid.n_dim == 3));
        assert!(lib.iter().any(|s| s.params.gamma <= 4.0 / 3.0));
        assert!(lib.iter().any(|s| s.params.gamma > 4.0 / 3.0));
        assert!(lib
            .iter()
            .any(|s| s.momentum_is_zero() && s.density == DensityProfile::Gaussian));
        for s in &lib {
            s.validate().unwrap();
        }
    }

    #[test]
    fn potential_field_is_discretely_solenoidal() {
        let s = scenario("gaussian-mhd").unwrap();
        for order in [StencilOrder::Second, StencilOrder::Fourth] {
            let st = s.initial_state(order).unwrap();
            let div = st.grid.divergence(&st.h, order).unwrap();
            let hmax = st.h.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
            assert!(div
                .iter()
                .all(|d| d.abs() < 1e-13 * hmax / st.grid.spacing()));
            assert!(st.h[2].iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn quadrature_matches_closed_form() {
        let st = reference().initial_state(StencilOrder::Fourth).unwrap();
        let b = energy_breakdown(&st).unwrap();
        let r = gaussian_reference(&reference()).unwrap();
        for (got, want) in [
            (b.m, r.m),
            (b.p[0], r.p[0]),
            (b.e_k, r.e_k),
            (b.e_i, r.e_i),
            (b.g, r.g),
        ] {
            assert!((got - want).abs() < 1e-6 * want, "{got} vs {want}");
        }
        assert!((b.rho_l65 - r.rho_l65).abs() < 1e-6 * r.rho_l65);
        assert!((b.rho_lgamma - r.rho_lgamma).abs() < 1e-6 * r.rho_lgamma);
        assert!((b.u_l6 - r.u_l6).abs() < 1e-12 * r.u_l6);
    }

    #[test]
    fn box_errors_follow_the_endpoint_expansion() {
        // rectangle sums of a non-periodic Gaussian miss the box integral by the
        // Euler-Maclaurin endpoint terms in the odd derivative jumps of f at +-L
        let scn = reference();
        let c = convergence_study(&scn, Functional::Mass, &[24, 32, 48]).unwrap();
        assert!(c.monotone);
        let l: f64 = 6.0;
        let f = (-l * l / 2.0).exp();
        let l3 = l * l * l;
        let (d1, d3) = (-2.0 * l * f, 2.0 * (3.0 * l - l3) * f);
        let d5 = -2.0 * (l3 * l * l - 10.0 * l3 + 15.0 * l) * f;
        let i0 = (2.0 * PI).sqrt() * libm::erf(l / 2f64.sqrt());
        for lv in &c.levels {
            let h = lv.spacing;
            let line = i0 + h * h / 12.0 * d1 - h.powi(4) / 720.0 * d3 + h.powi(6) / 30240.0 * d5;
            let predicted = line.powi(3) - i0.powi(3);
            assert!(
                (lv.value - lv.reference - predicted).abs() < 0.01 * predicted.abs(),
                "{lv:?} {predicted}"
            );
        }
        // the two terms have opposite signs, so the measured order sits just below 2
        let order = c.order.unwrap();
        assert!(order > 1.8 && order < 2.0, "{order}");
        assert!(((c.levels[0].reference - c.whole_space) / c.whole_space).abs() < 1e-8);
        assert!(convergence_study(&scn, Functional::Mass, &[24, 32]).is_err());
    }

    #[test]
    fn functional_errors_shrink() {
        let mut s = reference();
        s.params.gamma = 1.4;
        for f in [
            Functional::InternalEnergy,
            Functional::Inertia,
            Functional::KineticEnergy,
        ] {
            let c = convergence_study(&s, f, &[24, 32, 48]).unwrap();
            assert!(c.monotone, "{c:?}");
            assert!(
                c.levels.iter().all(|l| l.error < 1e-7 * l.reference),
                "{c:?}"
            );
        }
    }

    #[test]
    fn virial_is_the_unpaired_face_term() {
        // x_i = -L + i h leaves the face at -L unpaired, so F = -h L rho(L) (line sum)^(n-1) U_1
        for (s, np) in [(1.0, 24usize), (1.0, 48), (0.8, 24), (0.8, 48)] {
            let mut scn = reference();
            scn.s = s;
            scn.grid.points_per_axis = np;
            let st = scn.initial_state(StencilOrder::Fourth).unwrap();
            let f = energy_breakdown(&st).unwrap().f;
            let h = st.grid.spacing();
            let line: f64 = st
                .grid
                .coordinates()
                .iter()
                .map(|x| (-x * x / (2.0 * s * s)).exp() * h)
                .sum();
            let face = -h * 6.0 * (-36.0 / (2.0 * s * s)).exp() * line * line;
            assert!((f - face).abs() < 1e-12, "{f} vs {face}");
            if s <= 0.8 {
                assert!(f.abs() < 1e-10);
            }
        }
    }
}
