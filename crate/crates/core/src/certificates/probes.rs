//! Sharpness probe for the Sobolev constant.

use crate::error::Result;
use crate::grid::{make_grid, StencilOrder};
use crate::math::{powf, sqrt};

use super::constants::constant_k2;

/// Both sides of `||v||_6^2 <= K2 ||grad v||_2^2` for one probe field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbeLevel {
    pub points: usize,
    /// Scale of the extremal in units of the grid spacing.
    pub scale: f64,
    pub lhs: f64,
    pub rhs: f64,
}

impl ProbeLevel {
    pub fn ratio(&self) -> f64 {
        self.lhs / self.rhs
    }
}

/// Extremal profile `(1 + |x|^2 / l^2)^(-1/2)` on `[-L, L)^3`, lowered by its value at
/// radius `L` and cut at zero so that it fits the box. The truncation costs a share
/// of the ratio proportional to `l / L`, so refinement takes `l` as a fixed multiple
/// of the spacing.
pub fn talenti_probe(
    half_extent: f64,
    points: usize,
    scale_in_cells: f64,
    order: StencilOrder,
) -> Result<ProbeLevel> {
    let grid = make_grid(3, half_extent, points)?;
    let l = scale_in_cells * grid.spacing();
    let profile = |r2: f64| 1.0 / sqrt(1.0 + r2 / (l * l));
    let edge = profile(half_extent * half_extent);
    let v = grid.sample(|x| {
        let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        (profile(r2) - edge).max(0.0)
    });
    let grad = grid.gradient(&v, order)?;
    let dirichlet = grid.integrate_with(|k| grad.iter().map(|g| g[k] * g[k]).sum());
    let l6 = grid.integrate_with(|k| {
        let c = v[k] * v[k] * v[k];
        c * c
    });
    Ok(ProbeLevel {
        points,
        scale: scale_in_cells,
        lhs: powf(l6, 1.0 / 3.0),
        rhs: constant_k2(3)? * dirichlet,
    })
}

/// Limit of the probe ratio as `l / L -> 0`, from two levels whose `l / L` differ by
/// `ratio`, assuming the deficit is linear in `l / L`.
pub fn extrapolated_ratio(coarse: &ProbeLevel, fine: &ProbeLevel, ratio: f64) -> f64 {
    (ratio * fine.ratio() - coarse.ratio()) / (ratio - 1.0)
}
