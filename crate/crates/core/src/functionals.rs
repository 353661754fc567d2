//! Integral functionals of a state: conserved quantities, energies, moments and
//! the norms entering the inequality certificates.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::{Grid, StencilOrder};
use crate::math::{powf, Sum};
use crate::state::{Mode, State};

/// Every scalar functional of a state at one instant.
///
/// `u_L6` and `rho_L65` hold the Hölder pair `int |u|^q` and `int rho^q'` with
/// `q = 2n/(n-2)`, `q' = 2n/(n+2)`; for `n = 3` these are `int |u|^6` and
/// `int rho^(6/5)`. For `n < 3` the three-dimensional exponents are used.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EnergyBreakdown {
    pub t: f64,
    pub m: f64,
    #[cfg_attr(feature = "serde", serde(rename = "P"))]
    pub p: Vec<f64>,
    #[cfg_attr(feature = "serde", serde(rename = "E_k"))]
    pub e_k: f64,
    #[cfg_attr(feature = "serde", serde(rename = "E_m"))]
    pub e_m: f64,
    #[cfg_attr(feature = "serde", serde(rename = "E_i"))]
    pub e_i: f64,
    #[cfg_attr(feature = "serde", serde(rename = "E_total"))]
    pub e_total: f64,
    #[cfg_attr(feature = "serde", serde(rename = "G"))]
    pub g: f64,
    #[cfg_attr(feature = "serde", serde(rename = "F"))]
    pub f: f64,
    #[cfg_attr(feature = "serde", serde(rename = "Q"))]
    pub q: f64,
    pub grad_u_sq: f64,
    #[cfg_attr(feature = "serde", serde(rename = "curl_H_sq"))]
    pub curl_h_sq: f64,
    #[cfg_attr(feature = "serde", serde(rename = "u_L6"))]
    pub u_l6: f64,
    #[cfg_attr(feature = "serde", serde(rename = "rho_L65"))]
    pub rho_l65: f64,
    #[cfg_attr(feature = "serde", serde(rename = "rho_Lgamma"))]
    pub rho_lgamma: f64,
    #[cfg_attr(feature = "serde", serde(rename = "div_H_sq"))]
    pub div_h_sq: f64,
    pub dissipation: f64,
    pub boundary_mass: f64,
}

impl EnergyBreakdown {
    pub fn n_dim(&self) -> usize {
        self.p.len()
    }

    pub fn momentum_norm(&self) -> f64 {
        crate::math::sqrt(self.p.iter().map(|x| x * x).sum())
    }

    /// Scalar columns in the CSV order, momentum expanded in place.
    pub fn columns(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(18 + self.p.len());
        v.push(self.t);
        v.push(self.m);
        v.extend_from_slice(&self.p);
        v.extend_from_slice(&[
            self.e_k,
            self.e_m,
            self.e_i,
            self.e_total,
            self.g,
            self.f,
            self.q,
            self.grad_u_sq,
            self.curl_h_sq,
            self.u_l6,
            self.rho_l65,
            self.rho_lgamma,
            self.div_h_sq,
            self.dissipation,
            self.boundary_mass,
        ]);
        v
    }

    /// Inverse of [`EnergyBreakdown::columns`].
    pub fn from_columns(n_dim: usize, v: &[f64]) -> Result<Self> {
        if v.len() != column_count(n_dim) {
            return Err(Error::Field(format!(
                "expected {} columns for n = {n_dim}, got {}",
                column_count(n_dim),
                v.len()
            )));
        }
        let r = &v[2 + n_dim..];
        Ok(EnergyBreakdown {
            t: v[0],
            m: v[1],
            p: v[2..2 + n_dim].to_vec(),
            e_k: r[0],
            e_m: r[1],
            e_i: r[2],
            e_total: r[3],
            g: r[4],
            f: r[5],
            q: r[6],
            grad_u_sq: r[7],
            curl_h_sq: r[8],
            u_l6: r[9],
            rho_l65: r[10],
            rho_lgamma: r[11],
            div_h_sq: r[12],
            dissipation: r[13],
            boundary_mass: r[14],
        })
    }
}

pub fn column_count(n_dim: usize) -> usize {
    17 + n_dim
}

/// Column names in CSV order.
pub fn column_names(n_dim: usize) -> Vec<alloc::string::String> {
    let mut v: Vec<alloc::string::String> = vec!["t".into(), "m".into()];
    v.extend((1..=n_dim).map(|i| format!("P{i}")));
    for s in [
        "E_k",
        "E_m",
        "E_i",
        "E_total",
        "G",
        "F",
        "Q",
        "grad_u_sq",
        "curl_H_sq",
        "u_L6",
        "rho_L65",
        "rho_Lgamma",
        "div_H_sq",
        "dissipation",
        "boundary_mass",
    ] {
        v.push(s.into());
    }
    v
}

/// Exponents `(q', q)` of the Hölder pair used for `rho` and `u`.
pub fn holder_exponents(n_dim: usize) -> (f64, f64) {
    if n_dim >= 3 {
        let n = n_dim as f64;
        (2.0 * n / (n + 2.0), 2.0 * n / (n - 2.0))
    } else {
        (6.0 / 5.0, 6.0)
    }
}

/// Options shared by every derivative-based diagnostic.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Diagnostics {
    pub order: StencilOrder,
    /// Density scale `eps` of the viscous weight `rho^2 / (rho^2 + eps^2)`; zero
    /// gives the unweighted stress.
    pub vacuum_scale: f64,
}

impl Default for Diagnostics {
    fn default() -> Self {
        Diagnostics {
            order: StencilOrder::Fourth,
            vacuum_scale: 0.0,
        }
    }
}

/// Weight multiplying the viscous stress at density `rho`.
#[inline]
pub fn viscous_weight(rho: f64, eps: f64) -> f64 {
    if eps == 0.0 {
        1.0
    } else {
        let r2 = rho * rho;
        r2 / (r2 + eps * eps)
    }
}

pub fn mass(state: &State) -> f64 {
    state.grid.integrate_unchecked(&state.rho)
}

pub fn momentum(state: &State) -> Vec<f64> {
    state
        .u
        .iter()
        .map(|c| state.grid.integrate_with(|i| state.rho[i] * c[i]))
        .collect()
}

pub fn energy_breakdown(state: &State) -> Result<EnergyBreakdown> {
    energy_breakdown_with(state, &Diagnostics::default())
}

/// Velocity Jacobian `J[i][j] = D_i u_j`.
pub fn velocity_jacobian(grid: &Grid, u: &[Vec<f64>], order: StencilOrder) -> Vec<Vec<Vec<f64>>> {
    let n = grid.n_dim();
    let mut jac = vec![vec![vec![0.0; grid.len()]; n]; n];
    for (i, row) in jac.iter_mut().enumerate() {
        for (j, d) in row.iter_mut().enumerate() {
            grid.derivative_unchecked(&u[j], i, order, d);
        }
    }
    jac
}

/// Pointwise stress contraction `(mu/2) sum (D_i u_j + D_j u_i)^2 + lambda (div u)^2`.
#[inline]
pub(crate) fn stress_contraction(jac: &[Vec<Vec<f64>>], k: usize, mu: f64, lambda: f64) -> f64 {
    let n = jac.len();
    let mut sym = 0.0;
    let mut div = 0.0;
    for i in 0..n {
        div += jac[i][i][k];
        for j in 0..n {
            let e = jac[i][j][k] + jac[j][i][k];
            sym += e * e;
        }
    }
    0.5 * mu * sym + lambda * div * div
}

pub fn energy_breakdown_with(state: &State, diag: &Diagnostics) -> Result<EnergyBreakdown> {
    state.validate()?;
    let grid = &state.grid;
    let n = grid.n_dim();
    let len = grid.len();
    let prm = &state.params;
    let rho = &state.rho;
    let u = &state.u;
    let hf = &state.h;
    let w = grid.weight();
    let (q_rho, q_u) = holder_exponents(n);

    let m = mass(state);
    let p = momentum(state);

    let mut e_k = Sum::new();
    let mut e_m = Sum::new();
    let mut e_i = Sum::new();
    let mut g = Sum::new();
    let mut f = Sum::new();
    let mut u_l6 = Sum::new();
    let mut rho_l65 = Sum::new();
    let mut rho_lg = Sum::new();
    let mut bmass = Sum::new();
    let width = diag.order.half_width();
    let mut x = vec![0.0; n];
    for k in 0..len {
        grid.position(k, &mut x);
        let r = rho[k];
        let mut u2 = 0.0;
        let mut h2 = 0.0;
        let mut ux = 0.0;
        let mut r2 = 0.0;
        for a in 0..n {
            u2 += u[a][k] * u[a][k];
            h2 += hf[a][k] * hf[a][k];
            ux += u[a][k] * x[a];
            r2 += x[a] * x[a];
        }
        e_k.add(0.5 * r * u2);
        e_m.add(0.5 * h2);
        let rg = powf(r, prm.gamma);
        rho_lg.add(rg);
        e_i.add(rg);
        g.add(0.5 * r * r2);
        f.add(r * ux);
        u_l6.add(powf(u2, 0.5 * q_u));
        rho_l65.add(powf(r, q_rho));
        if grid.near_boundary(k, width) {
            bmass.add(r);
        }
    }

    let jac = velocity_jacobian(grid, u, diag.order);
    let mut grad_sq = Sum::new();
    let mut visc = Sum::new();
    for k in 0..len {
        for row in &jac {
            for d in row {
                grad_sq.add(d[k] * d[k]);
            }
        }
        visc.add(
            viscous_weight(rho[k], diag.vacuum_scale)
                * stress_contraction(&jac, k, prm.mu, prm.lambda),
        );
    }
    drop(jac);

    let (curl_sq, div_sq) = if state.mode == Mode::Mhd {
        let mut tmp = vec![0.0; len];
        let mut j = vec![vec![0.0; len]; 3];
        grid.curl_unchecked(hf, diag.order, &mut j, &mut tmp);
        let c = grid.integrate_with(|k| j[0][k] * j[0][k] + j[1][k] * j[1][k] + j[2][k] * j[2][k]);
        let d = grid.divergence(hf, diag.order)?;
        (c, grid.integrate_with(|k| d[k] * d[k]))
    } else {
        (0.0, 0.0)
    };

    let e_k = e_k.value() * w;
    let e_m = e_m.value() * w;
    let e_i = e_i.value() * w * prm.a / (prm.gamma - 1.0);
    let e_total = e_k + e_m + e_i;
    let g = g.value() * w;
    let f = f.value() * w;
    let b = EnergyBreakdown {
        t: state.t,
        m,
        p,
        e_k,
        e_m,
        e_i,
        e_total,
        g,
        f,
        q: 4.0 * g * e_total - f * f,
        grad_u_sq: grad_sq.value() * w,
        curl_h_sq: curl_sq,
        u_l6: u_l6.value() * w,
        rho_l65: rho_l65.value() * w,
        rho_lgamma: rho_lg.value() * w,
        div_h_sq: div_sq,
        dissipation: prm.nu * curl_sq + visc.value() * w,
        boundary_mass: bmass.value() * w,
    };
    if b.columns().iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical(format!(
            "non-finite functional at t = {}",
            state.t
        )));
    }
    Ok(b)
}

/// `E = nu curl H - u x H`.
pub fn electric_field(state: &State, order: StencilOrder) -> Result<Vec<Vec<f64>>> {
    let mut e = state.grid.curl(&state.h, order)?;
    let (u, h) = (&state.u, &state.h);
    for k in 0..state.grid.len() {
        let uxh = cross(u, h, k);
        for c in 0..3 {
            e[c][k] = state.params.nu * e[c][k] - uxh[c];
        }
    }
    Ok(e)
}

#[inline]
pub(crate) fn cross(a: &[Vec<f64>], b: &[Vec<f64>], k: usize) -> [f64; 3] {
    [
        a[1][k] * b[2][k] - a[2][k] * b[1][k],
        a[2][k] * b[0][k] - a[0][k] * b[2][k],
        a[0][k] * b[1][k] - a[1][k] * b[0][k],
    ]
}

/// Lorentz force `(curl H) x H`.
pub fn lorentz_force(grid: &Grid, h: &[Vec<f64>], order: StencilOrder) -> Result<Vec<Vec<f64>>> {
    let j = grid.curl(h, order)?;
    let mut out = vec![vec![0.0; grid.len()]; 3];
    for k in 0..grid.len() {
        let f = cross(&j, h, k);
        for c in 0..3 {
            out[c][k] = f[c];
        }
    }
    Ok(out)
}

/// Lorentz force in divergence form `Div(H (x) H - |H|^2 I / 2)`.
pub fn lorentz_force_divergence_form(
    grid: &Grid,
    h: &[Vec<f64>],
    order: StencilOrder,
) -> Result<Vec<Vec<f64>>> {
    if grid.n_dim() != 3 {
        return Err(Error::Field("Lorentz force needs n = 3".into()));
    }
    grid.check_vector(h, 3)?;
    let len = grid.len();
    let mut out = vec![vec![0.0; len]; 3];
    let mut flux = vec![0.0; len];
    let mut d = vec![0.0; len];
    for c in 0..3 {
        for a in 0..3 {
            for k in 0..len {
                let h2 = h[0][k] * h[0][k] + h[1][k] * h[1][k] + h[2][k] * h[2][k];
                flux[k] = h[a][k] * h[c][k] - if a == c { 0.5 * h2 } else { 0.0 };
            }
            grid.derivative_unchecked(&flux, a, order, &mut d);
            out[c].iter_mut().zip(&d).for_each(|(o, v)| *o += v);
        }
    }
    Ok(out)
}

/// Relative L2 discrepancy between the two Lorentz force forms.
pub fn lorentz_form_discrepancy(state: &State, order: StencilOrder) -> Result<f64> {
    let a = lorentz_force(&state.grid, &state.h, order)?;
    let b = lorentz_force_divergence_form(&state.grid, &state.h, order)?;
    let mut num = Sum::new();
    let mut den = Sum::new();
    for c in 0..3 {
        for k in 0..state.grid.len() {
            let d = a[c][k] - b[c][k];
            num.add(d * d);
            den.add(a[c][k] * a[c][k]);
        }
    }
    let den = den.value();
    Ok(if den > 0.0 {
        crate::math::sqrt(num.value() / den)
    } else {
        0.0
    })
}

/// `(int |Du|^2, int (div u)^2)` for the dissipation decomposition.
pub fn gradient_and_divergence_norms(state: &State, order: StencilOrder) -> (f64, f64) {
    let jac = velocity_jacobian(&state.grid, &state.u, order);
    let n = jac.len();
    let g = state
        .grid
        .integrate_with(|k| jac.iter().flatten().map(|d| d[k] * d[k]).sum::<f64>());
    let d = state.grid.integrate_with(|k| {
        let s: f64 = (0..n).map(|i| jac[i][i][k]).sum();
        s * s
    });
    (g, d)
}
