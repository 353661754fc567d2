//! Method-of-lines solver in conservative variables `(rho, rho u, H)`.
//!
//! Spatial terms are built so that the semi-discrete system conserves mass and
//! momentum exactly and dissipates total energy at exactly the discrete
//! dissipation rate:
//!
//! * convective and pressure fluxes use two-point flux differencing with the
//!   density mean `[p]/[h]` (`h` the enthalpy), arithmetic means elsewhere;
//! * the viscous stress is `w(rho) T(Du)` with `w = rho^2/(rho^2+eps^2)`, which
//!   switches viscosity off in near-vacuum so explicit stepping stays stable;
//! * the Lorentz force is `(curl H) x H` and the induction equation is advanced in
//!   curl form, keeping the discrete `div H` at its initial value.
//!
//! Time stepping is classical RK4.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::functionals::{
    energy_breakdown_with, lorentz_form_discrepancy, viscous_weight, Diagnostics, EnergyBreakdown,
};
use crate::grid::{Grid, StencilOrder};
use crate::math::{expm1, ln_1p, sqrt};
use crate::state::{Mode, Params, State};

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum DtPolicy {
    /// Constant step; the run stops with `cfl-collapse` if it exceeds the stability limit.
    Fixed(f64),
    /// `cfl_number` times the stability limit, recomputed every step.
    Cfl,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct SolverConfig {
    pub mode: Mode,
    pub dt_policy: DtPolicy,
    pub cfl_number: f64,
    pub t_end: f64,
    pub sample_every: usize,
    /// Velocity is recovered only where `rho > density_floor`; mass at or below it
    /// is monitored, never clamped.
    pub density_floor: f64,
    pub stencil: StencilOrder,
    /// Density scale `eps` of the viscous weight.
    pub vacuum_scale: f64,
    /// Smallest admissible step under the CFL policy.
    pub min_dt: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            mode: Mode::Mhd,
            dt_policy: DtPolicy::Cfl,
            cfl_number: 0.4,
            t_end: 1.0,
            sample_every: 10,
            density_floor: 0.0,
            stencil: StencilOrder::Fourth,
            vacuum_scale: 0.0,
            min_dt: 1e-10,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return Err(Error::Params(format!(
                "t_end must be positive, got {}",
                self.t_end
            )));
        }
        if !(self.cfl_number > 0.0 && self.cfl_number < 1.0) {
            return Err(Error::Params(format!(
                "cfl_number must lie in (0, 1), got {}",
                self.cfl_number
            )));
        }
        if self.sample_every == 0 {
            return Err(Error::Params("sample_every must be at least 1".into()));
        }
        if !(self.density_floor >= 0.0) || !(self.vacuum_scale >= 0.0) {
            return Err(Error::Params(
                "density_floor and vacuum_scale must be non-negative".into(),
            ));
        }
        if let DtPolicy::Fixed(dt) = self.dt_policy {
            if !(dt > 0.0) || !dt.is_finite() {
                return Err(Error::Params(format!(
                    "fixed dt must be positive, got {dt}"
                )));
            }
            let steps = self.t_end / dt;
            if (steps - libm::round(steps)).abs() > 1e-9 * steps.max(1.0) {
                return Err(Error::Params(format!(
                    "t_end = {} is not a multiple of dt = {dt}",
                    self.t_end
                )));
            }
        }
        Ok(())
    }

    pub fn diagnostics(&self) -> Diagnostics {
        Diagnostics {
            order: self.stencil,
            vacuum_scale: self.vacuum_scale,
        }
    }

    /// Number of steps under the fixed policy.
    pub fn fixed_steps(&self) -> Option<usize> {
        match self.dt_policy {
            DtPolicy::Fixed(dt) => Some(libm::round(self.t_end / dt) as usize),
            DtPolicy::Cfl => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Termination {
    #[cfg_attr(feature = "serde", serde(rename = "reached-t_end"))]
    ReachedTEnd,
    NanDetected,
    VacuumDetected,
    CflCollapse,
}

/// Monitors accumulated over a run.
#[derive(Clone, Debug, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RunStats {
    pub steps: usize,
    pub final_time: f64,
    pub min_dt: f64,
    pub max_dt: f64,
    /// `max |m(t) - m(0)| / m(0)`.
    pub mass_drift: f64,
    /// `max |P(t) - P(0)|` relative to `|P(0)|`, or to `sqrt(2 m E_k)` when `P(0) = 0`.
    pub momentum_drift: f64,
    /// `max ||div H|| / ||DH||`.
    pub div_h_drift: f64,
    /// Largest relative gap between the two Lorentz force forms.
    pub lorentz_form_discrepancy: f64,
    /// Largest second-difference energy fraction of density and momentum.
    pub resolution_fraction: f64,
    /// Largest boundary mass relative to total mass.
    pub contamination: f64,
    pub flags: Vec<String>,
    pub message: Option<String>,
}

/// Time-ordered functionals of a run plus its configuration and outcome.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Trajectory {
    pub samples: Vec<EnergyBreakdown>,
    pub config: SolverConfig,
    pub params: Params,
    pub termination: Termination,
    pub stats: RunStats,
}

/// Time derivative of the conservative variables.
#[derive(Clone, Debug, PartialEq)]
pub struct Derivative {
    pub rho: Vec<f64>,
    pub mom: Vec<Vec<f64>>,
    pub mag: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
struct Conserved {
    rho: Vec<f64>,
    mom: Vec<Vec<f64>>,
    mag: Vec<Vec<f64>>,
}

impl Conserved {
    fn from_state(s: &State, mode: Mode) -> Self {
        let mom =
            s.u.iter()
                .map(|c| c.iter().zip(&s.rho).map(|(u, r)| r * u).collect())
                .collect();
        let mag = if mode == Mode::Mhd {
            s.h.clone()
        } else {
            Vec::new()
        };
        Conserved {
            rho: s.rho.clone(),
            mom,
            mag,
        }
    }

    fn axpy_from(&mut self, base: &Conserved, a: f64, d: &Derivative) {
        fn go(out: &mut [f64], x: &[f64], a: f64, y: &[f64]) {
            for ((o, x), y) in out.iter_mut().zip(x).zip(y) {
                *o = x + a * y;
            }
        }
        go(&mut self.rho, &base.rho, a, &d.rho);
        for (c, o) in self.mom.iter_mut().enumerate() {
            go(o, &base.mom[c], a, &d.mom[c]);
        }
        for (c, o) in self.mag.iter_mut().enumerate() {
            go(o, &base.mag[c], a, &d.mag[c]);
        }
    }
}

/// Density mean `[p]/[h]` that makes the two-point fluxes energy consistent;
/// symmetric in its arguments bit for bit.
#[inline]
pub fn density_mean(a: f64, b: f64, gamma: f64) -> f64 {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    if gamma == 2.0 {
        return 0.5 * (lo + hi);
    }
    if hi == lo {
        return lo;
    }
    // t = ln(hi/lo); mean = (gamma-1)/gamma hi (1 - e^{-gamma t}) / (1 - e^{-(gamma-1) t})
    let t = -ln_1p((lo - hi) / hi);
    (gamma - 1.0) / gamma * hi * expm1(-gamma * t) / expm1(-(gamma - 1.0) * t)
}

/// Scratch buffers reused across right-hand-side evaluations.
struct Workspace {
    u: Vec<Vec<f64>>,
    p: Vec<f64>,
    w: Vec<f64>,
    jac: Vec<Vec<Vec<f64>>>,
    fr: Vec<f64>,
    fm: Vec<Vec<f64>>,
    tmp: Vec<f64>,
    dtmp: Vec<f64>,
    j: Vec<Vec<f64>>,
    e: Vec<Vec<f64>>,
}

impl Workspace {
    fn new(grid: &Grid, mode: Mode) -> Self {
        let n = grid.n_dim();
        let len = grid.len();
        let f = || vec![0.0; len];
        let m3 = if mode == Mode::Mhd { 3 } else { 0 };
        Workspace {
            u: vec![f(); n],
            p: f(),
            w: f(),
            jac: vec![vec![f(); n]; n],
            fr: f(),
            fm: vec![f(); n],
            tmp: f(),
            dtmp: f(),
            j: vec![f(); m3],
            e: vec![f(); m3],
        }
    }
}

/// Calls `f(row, plus_row, minus_row, run)` for every run of `run` contiguous
/// nodes along `axis`, where the rows are shifted by `+off` and `-off`.
#[inline]
fn for_each_row<F: FnMut(usize, usize, usize, usize)>(
    grid: &Grid,
    axis: usize,
    off: usize,
    mut f: F,
) {
    let n = grid.points();
    let s = grid.stride(axis);
    let block = n * s;
    for base in (0..grid.len()).step_by(block) {
        for i in 0..n {
            let p = if i + off >= n { i + off - n } else { i + off };
            let m = if i < off { i + n - off } else { i - off };
            f(base + i * s, base + p * s, base + m * s, s);
        }
    }
}

struct Rhs<'a> {
    grid: &'a Grid,
    params: Params,
    mode: Mode,
    order: StencilOrder,
    floor: f64,
    eps: f64,
}

impl Rhs<'_> {
    fn eval(&self, c: &Conserved, ws: &mut Workspace, out: &mut Derivative) -> Result<()> {
        let grid = self.grid;
        let n = grid.n_dim();
        let len = grid.len();
        let prm = &self.params;
        let inv_h = 1.0 / grid.spacing();

        for k in 0..len {
            let r = c.rho[k];
            if !(r >= 0.0) || !r.is_finite() {
                return Err(Error::Numerical(format!("density {r} at node {k}")));
            }
            for a in 0..n {
                ws.u[a][k] = if r > self.floor { c.mom[a][k] / r } else { 0.0 };
            }
            ws.p[k] = prm.pressure(r);
            ws.w[k] = viscous_weight(r, self.eps);
        }
        out.rho.iter_mut().for_each(|x| *x = 0.0);
        out.mom.iter_mut().flatten().for_each(|x| *x = 0.0);

        // convective and pressure fluxes
        let gamma = prm.gamma;
        for axis in 0..n {
            for &(off, coef) in self.order.coefficients() {
                let (fr, fm, u, p, rho) = (&mut ws.fr, &mut ws.fm, &ws.u, &ws.p, &c.rho);
                for_each_row(grid, axis, off, |row, prow, _, s| {
                    for k in 0..s {
                        let (i, q) = (row + k, prow + k);
                        let rm = density_mean(rho[i], rho[q], gamma);
                        let f = rm * 0.5 * (u[axis][i] + u[axis][q]);
                        fr[i] = f;
                        for (d, fmd) in fm.iter_mut().enumerate() {
                            fmd[i] = f * 0.5 * (u[d][i] + u[d][q]);
                        }
                        fm[axis][i] += 0.5 * (p[i] + p[q]);
                    }
                });
                let a = 2.0 * coef * inv_h;
                let (fr, fm) = (&ws.fr, &ws.fm);
                let (drho, dmom) = (&mut out.rho, &mut out.mom);
                for_each_row(grid, axis, off, |row, _, mrow, s| {
                    for k in 0..s {
                        let (i, q) = (row + k, mrow + k);
                        drho[i] -= a * (fr[i] - fr[q]);
                        for (d, dm) in dmom.iter_mut().enumerate() {
                            dm[i] -= a * (fm[d][i] - fm[d][q]);
                        }
                    }
                });
            }
        }

        // viscous stress w T(Du), T symmetric
        for i in 0..n {
            for j in 0..n {
                grid.derivative_unchecked(&ws.u[j], i, self.order, &mut ws.jac[i][j]);
            }
        }
        for i in 0..n {
            for j in i..n {
                for k in 0..len {
                    let mut t = prm.mu * (ws.jac[i][j][k] + ws.jac[j][i][k]);
                    if i == j {
                        let div: f64 = (0..n).map(|d| ws.jac[d][d][k]).sum();
                        t += prm.lambda * div;
                    }
                    ws.tmp[k] = ws.w[k] * t;
                }
                grid.derivative_unchecked(&ws.tmp, i, self.order, &mut ws.dtmp);
                out.mom[j]
                    .iter_mut()
                    .zip(&ws.dtmp)
                    .for_each(|(o, d)| *o += d);
                if i != j {
                    grid.derivative_unchecked(&ws.tmp, j, self.order, &mut ws.dtmp);
                    out.mom[i]
                        .iter_mut()
                        .zip(&ws.dtmp)
                        .for_each(|(o, d)| *o += d);
                }
            }
        }

        if self.mode == Mode::Mhd {
            let h = &c.mag;
            grid.curl_unchecked(h, self.order, &mut ws.j, &mut ws.tmp);
            for k in 0..len {
                let (j0, j1, j2) = (ws.j[0][k], ws.j[1][k], ws.j[2][k]);
                let (h0, h1, h2) = (h[0][k], h[1][k], h[2][k]);
                out.mom[0][k] += j1 * h2 - j2 * h1;
                out.mom[1][k] += j2 * h0 - j0 * h2;
                out.mom[2][k] += j0 * h1 - j1 * h0;
                let (u0, u1, u2) = (ws.u[0][k], ws.u[1][k], ws.u[2][k]);
                ws.e[0][k] = u1 * h2 - u2 * h1 - prm.nu * j0;
                ws.e[1][k] = u2 * h0 - u0 * h2 - prm.nu * j1;
                ws.e[2][k] = u0 * h1 - u1 * h0 - prm.nu * j2;
            }
            grid.curl_unchecked(&ws.e, self.order, &mut out.mag, &mut ws.tmp);
        }

        let bad = out
            .rho
            .iter()
            .chain(out.mom.iter().flatten())
            .chain(out.mag.iter().flatten());
        if bad.clone().any(|x| !x.is_finite()) {
            return Err(Error::Numerical("non-finite time derivative".into()));
        }
        Ok(())
    }
}

fn zero_derivative(grid: &Grid, mode: Mode) -> Derivative {
    let len = grid.len();
    Derivative {
        rho: vec![0.0; len],
        mom: vec![vec![0.0; len]; grid.n_dim()],
        mag: vec![vec![0.0; len]; if mode == Mode::Mhd { 3 } else { 0 }],
    }
}

/// Time derivative of `(rho, rho u, H)` at `state` under the state's own mode.
pub fn rhs(state: &State, stencil: StencilOrder, vacuum_scale: f64) -> Result<Derivative> {
    state.validate()?;
    let op = Rhs {
        grid: &state.grid,
        params: state.params,
        mode: state.mode,
        order: stencil,
        floor: 0.0,
        eps: vacuum_scale,
    };
    let c = Conserved::from_state(state, state.mode);
    let mut ws = Workspace::new(&state.grid, state.mode);
    let mut out = zero_derivative(&state.grid, state.mode);
    op.eval(&c, &mut ws, &mut out)?;
    Ok(out)
}

/// Stable step size: `cfl` times the minimum of the wave limit
/// `h / max(|u| + c + v_A)` and the diffusion limit `h^2 / (2n max(nu_visc, nu))`,
/// with `nu_visc = w(rho) (2 mu + lambda) / rho`.
pub fn cfl_dt(state: &State, cfl_number: f64, config: &SolverConfig) -> Result<f64> {
    let c = Conserved::from_state(state, state.mode);
    cfl_dt_conserved(
        &state.grid,
        &state.params,
        &c,
        cfl_number,
        config.density_floor,
        config.vacuum_scale,
    )
}

fn cfl_dt_conserved(
    grid: &Grid,
    prm: &Params,
    c: &Conserved,
    cfl: f64,
    floor: f64,
    eps: f64,
) -> Result<f64> {
    let n = grid.n_dim();
    let mut speed: f64 = 0.0;
    let mut visc: f64 = 0.0;
    let mut any = false;
    for k in 0..c.rho.len() {
        let r = c.rho[k];
        if !(r > floor) {
            continue;
        }
        any = true;
        let m2: f64 = (0..n).map(|a| c.mom[a][k] * c.mom[a][k]).sum();
        let h2: f64 = c.mag.iter().map(|h| h[k] * h[k]).sum();
        speed = speed.max(sqrt(m2) / r + prm.sound_speed(r) + sqrt(h2 / r));
        visc = visc.max(viscous_weight(r, eps) * (2.0 * prm.mu + prm.lambda) / r);
    }
    if !any {
        return Err(Error::Numerical("no node with positive density".into()));
    }
    let h = grid.spacing();
    let mut dt = f64::INFINITY;
    if speed > 0.0 {
        dt = dt.min(h / speed);
    }
    let diff = if c.mag.is_empty() {
        visc
    } else {
        visc.max(prm.nu)
    };
    if diff > 0.0 {
        dt = dt.min(h * h / (2.0 * n as f64 * diff));
    }
    if !dt.is_finite() {
        return Err(Error::Numerical("no finite stability limit".into()));
    }
    Ok(cfl * dt)
}

/// Explicit RK4 integrator holding its scratch space.
pub struct Stepper<'a> {
    op: Rhs<'a>,
    ws: Workspace,
    k: [Derivative; 4],
    stage: Conserved,
    state: Conserved,
    t: f64,
}

impl<'a> Stepper<'a> {
    pub fn new(initial: &'a State, config: &SolverConfig) -> Result<Self> {
        config.validate()?;
        let mut probe = initial.clone();
        probe.mode = config.mode;
        probe.validate()?;
        let op = Rhs {
            grid: &initial.grid,
            params: initial.params,
            mode: config.mode,
            order: config.stencil,
            floor: config.density_floor,
            eps: config.vacuum_scale,
        };
        let state = Conserved::from_state(initial, config.mode);
        let z = zero_derivative(&initial.grid, config.mode);
        Ok(Stepper {
            op,
            ws: Workspace::new(&initial.grid, config.mode),
            k: [z.clone(), z.clone(), z.clone(), z],
            stage: state.clone(),
            state,
            t: initial.t,
        })
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    /// Stability limit times `cfl`.
    pub fn cfl_dt(&self, cfl: f64) -> Result<f64> {
        cfl_dt_conserved(
            self.op.grid,
            &self.op.params,
            &self.state,
            cfl,
            self.op.floor,
            self.op.eps,
        )
    }

    /// One RK4 step of size `dt`; the state is left untouched on error.
    pub fn step(&mut self, dt: f64) -> Result<()> {
        let [k1, k2, k3, k4] = &mut self.k;
        self.op.eval(&self.state, &mut self.ws, k1)?;
        self.stage.axpy_from(&self.state, 0.5 * dt, k1);
        self.op.eval(&self.stage, &mut self.ws, k2)?;
        self.stage.axpy_from(&self.state, 0.5 * dt, k2);
        self.op.eval(&self.stage, &mut self.ws, k3)?;
        self.stage.axpy_from(&self.state, dt, k3);
        self.op.eval(&self.stage, &mut self.ws, k4)?;
        let w = dt / 6.0;
        let upd =
            |x: &mut f64, a: f64, b: f64, c: f64, d: f64| *x += w * (a + 2.0 * b + 2.0 * c + d);
        for i in 0..self.state.rho.len() {
            upd(
                &mut self.state.rho[i],
                k1.rho[i],
                k2.rho[i],
                k3.rho[i],
                k4.rho[i],
            );
        }
        for c in 0..self.state.mom.len() {
            for i in 0..self.state.rho.len() {
                upd(
                    &mut self.state.mom[c][i],
                    k1.mom[c][i],
                    k2.mom[c][i],
                    k3.mom[c][i],
                    k4.mom[c][i],
                );
            }
        }
        for c in 0..self.state.mag.len() {
            for i in 0..self.state.rho.len() {
                upd(
                    &mut self.state.mag[c][i],
                    k1.mag[c][i],
                    k2.mag[c][i],
                    k3.mag[c][i],
                    k4.mag[c][i],
                );
            }
        }
        self.t += dt;
        Ok(())
    }

    /// Current primitive state.
    pub fn state(&self) -> State {
        let grid = self.op.grid.clone();
        let n = grid.n_dim();
        let len = grid.len();
        let c = &self.state;
        let u = (0..n)
            .map(|a| {
                (0..len)
                    .map(|k| {
                        if c.rho[k] > self.op.floor {
                            c.mom[a][k] / c.rho[k]
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect();
        let h = if c.mag.is_empty() {
            vec![vec![0.0; len]; n]
        } else {
            c.mag.clone()
        };
        State {
            grid,
            mode: self.op.mode,
            params: self.op.params,
            t: self.t,
            rho: c.rho.clone(),
            u,
            h,
        }
    }

    /// Mass held by nodes at or below the density floor, and whether any density is negative.
    fn vacuum(&self) -> (f64, bool) {
        let c = &self.state;
        let neg = c.rho.iter().any(|r| *r < 0.0);
        let m = self.op.grid.integrate_with(|k| {
            if c.rho[k] <= self.op.floor {
                c.rho[k].abs()
            } else {
                0.0
            }
        });
        (m, neg)
    }

    fn resolution_fraction(&self) -> f64 {
        let c = &self.state;
        core::iter::once(&c.rho)
            .chain(c.mom.iter())
            .map(|f| second_difference_fraction(self.op.grid, f))
            .fold(0.0, f64::max)
    }
}

/// Share of a field's fluctuation energy carried by its second differences,
/// `sum_a |delta_a^2 f|^2 / (16 n sum |f - mean|^2)`; 0 for constant fields and at
/// most 1 (reached by the grid-scale mode).
pub fn second_difference_fraction(grid: &Grid, f: &[f64]) -> f64 {
    let mean = f.iter().sum::<f64>() / f.len() as f64;
    let energy: f64 = f.iter().map(|x| (x - mean) * (x - mean)).sum();
    if !(energy > 0.0) {
        return 0.0;
    }
    let mut d2 = 0.0;
    for axis in 0..grid.n_dim() {
        for_each_row(grid, axis, 1, |row, prow, mrow, s| {
            for k in 0..s {
                let v = f[prow + k] - 2.0 * f[row + k] + f[mrow + k];
                d2 += v * v;
            }
        });
    }
    d2 / (16.0 * grid.n_dim() as f64 * energy)
}

/// Integrates to `t_end` under `config`, calling `observe` on every sampled state.
pub fn run_observed<O: FnMut(&State)>(
    initial: &State,
    config: &SolverConfig,
    mut observe: O,
) -> Result<Trajectory> {
    let mut stepper = Stepper::new(initial, config)?;
    let diag = config.diagnostics();
    let mut samples = Vec::new();
    let mut stats = RunStats {
        min_dt: f64::INFINITY,
        ..RunStats::default()
    };
    let first = stepper.state();
    let b0 = energy_breakdown_with(&first, &diag)?;
    let p_scale = {
        let p = b0.momentum_norm();
        if p > 0.0 {
            p
        } else {
            let s = sqrt(2.0 * b0.m * b0.e_k);
            if s > 0.0 {
                s
            } else {
                1.0
            }
        }
    };
    let mut record =
        |st: &State, b: &EnergyBreakdown, stats: &mut RunStats, res: f64| -> Result<()> {
            if b0.m > 0.0 {
                stats.mass_drift = stats.mass_drift.max((b.m - b0.m).abs() / b0.m);
                stats.contamination = stats.contamination.max(b.boundary_mass / b.m);
            }
            let dp = sqrt(b.p.iter().zip(&b0.p).map(|(a, c)| (a - c) * (a - c)).sum());
            stats.momentum_drift = stats.momentum_drift.max(dp / p_scale);
            if st.mode == Mode::Mhd {
                let total = b.curl_h_sq + b.div_h_sq;
                if total > 0.0 {
                    stats.div_h_drift = stats.div_h_drift.max(sqrt(b.div_h_sq / total));
                }
                stats.lorentz_form_discrepancy = stats
                    .lorentz_form_discrepancy
                    .max(lorentz_form_discrepancy(st, config.stencil)?);
            }
            stats.resolution_fraction = stats.resolution_fraction.max(res);
            observe(st);
            Ok(())
        };
    record(&first, &b0, &mut stats, stepper.resolution_fraction())?;
    samples.push(b0.clone());

    let fixed = config.fixed_steps();
    let mut steps = 0usize;
    let termination = loop {
        let done = match fixed {
            Some(total) => steps >= total,
            None => stepper.time() >= config.t_end * (1.0 - 1e-14),
        };
        if done {
            break Termination::ReachedTEnd;
        }
        let limit = match stepper.cfl_dt(1.0) {
            Ok(l) => l,
            Err(e) => {
                stats.message = Some(format!("{e}"));
                break Termination::VacuumDetected;
            }
        };
        let dt = match config.dt_policy {
            DtPolicy::Fixed(dt) => {
                if dt > limit {
                    stats.message = Some(format!(
                        "dt {dt} exceeds stability limit {limit} at t = {}",
                        stepper.time()
                    ));
                    break Termination::CflCollapse;
                }
                dt
            }
            DtPolicy::Cfl => {
                let dt = (config.cfl_number * limit).min(config.t_end - stepper.time());
                if dt < config.min_dt {
                    stats.message =
                        Some(format!("step {dt} below min_dt at t = {}", stepper.time()));
                    break Termination::CflCollapse;
                }
                dt
            }
        };
        if let Err(e) = stepper.step(dt) {
            stats.message = Some(format!("{e}"));
            break match e {
                Error::Numerical(ref m) if m.starts_with("density") => Termination::VacuumDetected,
                _ => Termination::NanDetected,
            };
        }
        if fixed.is_some() {
            // keep sample times exact multiples of dt
            stepper.t = initial.t + (steps + 1) as f64 * dt;
        }
        steps += 1;
        stats.min_dt = stats.min_dt.min(dt);
        stats.max_dt = stats.max_dt.max(dt);
        let (vac, neg) = stepper.vacuum();
        if neg {
            stats.message = Some(format!("negative density at t = {}", stepper.time()));
            break Termination::VacuumDetected;
        }
        if vac > 1e-6 * b0.m {
            stats.message = Some(format!(
                "mass {vac} at or below the density floor at t = {}",
                stepper.time()
            ));
            break Termination::VacuumDetected;
        }
        if steps % config.sample_every == 0 {
            let st = stepper.state();
            match energy_breakdown_with(&st, &diag) {
                Ok(b) => {
                    record(&st, &b, &mut stats, stepper.resolution_fraction())?;
                    samples.push(b);
                }
                Err(e) => {
                    stats.message = Some(format!("{e}"));
                    break Termination::NanDetected;
                }
            }
        }
    };
    stats.steps = steps;
    stats.final_time = stepper.time();
    if !stats.min_dt.is_finite() {
        stats.min_dt = 0.0;
    }
    if stats.div_h_drift > 1e-6 {
        stats.flags.push(format!(
            "div H drift {:.3e} exceeds 1e-6",
            stats.div_h_drift
        ));
    }
    if stats.resolution_fraction > 1e-2 {
        stats.flags.push(format!(
            "resolution fraction {:.3e} exceeds 1e-2",
            stats.resolution_fraction
        ));
    }
    if stats.contamination >= crate::certificates::CONTAMINATION_LIMIT {
        stats.flags.push(format!(
            "boundary contamination {:.3e} reached 1e-8",
            stats.contamination
        ));
    }
    Ok(Trajectory {
        samples,
        config: config.clone(),
        params: initial.params,
        termination,
        stats,
    })
}

pub fn run(initial: &State, config: &SolverConfig) -> Result<Trajectory> {
    run_observed(initial, config, |_| {})
}

/// One RK4 step from a primitive state.
pub fn step_rk4(state: &State, dt: f64, config: &SolverConfig) -> Result<State> {
    let mut cfg = config.clone();
    cfg.mode = state.mode;
    cfg.dt_policy = DtPolicy::Fixed(dt);
    cfg.t_end = dt;
    let mut st = Stepper::new(state, &cfg)?;
    let limit = st.cfl_dt(1.0)?;
    if !(dt > 0.0) || dt > limit {
        return Err(Error::Precondition(format!("dt {dt} outside (0, {limit}]")));
    }
    st.step(dt)?;
    Ok(st.state())
}
