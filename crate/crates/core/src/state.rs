//! Physical parameters and sampled states.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::math::{powf, sqrt};

/// Coefficients of the barotropic system: pressure `p = A rho^gamma`, Newtonian
/// viscosities `mu`, `lambda`, and magnetic diffusivity `nu`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Params {
    #[cfg_attr(feature = "serde", serde(rename = "A"))]
    pub a: f64,
    pub gamma: f64,
    pub mu: f64,
    pub lambda: f64,
    pub nu: f64,
}

impl Params {
    pub fn validate(&self, n_dim: usize) -> Result<()> {
        let all = [self.a, self.gamma, self.mu, self.lambda, self.nu];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(Error::Params("non-finite coefficient".into()));
        }
        if !(self.a > 0.0) {
            return Err(Error::Params(format!("A must be positive, got {}", self.a)));
        }
        if !(self.gamma > 1.0) {
            return Err(Error::Params(format!(
                "gamma must exceed 1, got {}",
                self.gamma
            )));
        }
        if !(self.mu > 0.0) {
            return Err(Error::Params(format!(
                "mu must be positive, got {}",
                self.mu
            )));
        }
        if !(self.lambda + 2.0 * self.mu / n_dim as f64 > 0.0) {
            return Err(Error::Params(format!(
                "lambda + 2 mu / n must be positive, got lambda = {}, mu = {}",
                self.lambda, self.mu
            )));
        }
        if !(self.nu >= 0.0) {
            return Err(Error::Params(format!(
                "nu must be non-negative, got {}",
                self.nu
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn pressure(&self, rho: f64) -> f64 {
        self.a * powf(rho, self.gamma)
    }

    #[inline]
    pub fn sound_speed(&self, rho: f64) -> f64 {
        sqrt(self.a * self.gamma * powf(rho, self.gamma - 1.0))
    }

    /// Internal energy density `A rho^gamma / (gamma - 1)`.
    #[inline]
    pub fn internal_energy_density(&self, rho: f64) -> f64 {
        self.pressure(rho) / (self.gamma - 1.0)
    }
}

/// Which system is being solved.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Mode {
    /// Magnetohydrodynamics, `n = 3`.
    Mhd,
    /// Navier–Stokes, magnetic field identically zero, any `n`.
    Ns,
}

/// Density, velocity and magnetic field on a grid at time `t`.
///
/// `h` always has `n` components; in Navier–Stokes mode it must vanish.
#[derive(Clone, Debug, PartialEq)]
pub struct State {
    pub grid: Grid,
    pub mode: Mode,
    pub params: Params,
    pub t: f64,
    pub rho: Vec<f64>,
    pub u: Vec<Vec<f64>>,
    pub h: Vec<Vec<f64>>,
}

impl State {
    pub fn new(
        grid: Grid,
        mode: Mode,
        params: Params,
        t: f64,
        rho: Vec<f64>,
        u: Vec<Vec<f64>>,
        h: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let s = State {
            grid,
            mode,
            params,
            t,
            rho,
            u,
            h,
        };
        s.validate()?;
        Ok(s)
    }

    /// Density `rho`, zero velocity and zero magnetic field.
    pub fn at_rest(grid: Grid, mode: Mode, params: Params, rho: Vec<f64>) -> Result<Self> {
        let n = grid.n_dim();
        let len = grid.len();
        Self::new(
            grid,
            mode,
            params,
            0.0,
            rho,
            vec![vec![0.0; len]; n],
            vec![vec![0.0; len]; n],
        )
    }

    pub fn n_dim(&self) -> usize {
        self.grid.n_dim()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.grid.n_dim();
        self.params.validate(n)?;
        self.grid.check_len(&self.rho)?;
        self.grid.check_vector(&self.u, n)?;
        self.grid.check_vector(&self.h, n)?;
        if !self.t.is_finite() {
            return Err(Error::Field("time is not finite".into()));
        }
        if let Some(i) = self.rho.iter().position(|r| !(*r >= 0.0) || !r.is_finite()) {
            return Err(Error::Field(format!(
                "density must be finite and non-negative, node {i} has {}",
                self.rho[i]
            )));
        }
        let finite = |v: &[Vec<f64>]| v.iter().flatten().all(|x| x.is_finite());
        if !finite(&self.u) || !finite(&self.h) {
            return Err(Error::Field("velocity or magnetic field not finite".into()));
        }
        match self.mode {
            Mode::Mhd if n != 3 => Err(Error::Field(format!("MHD mode needs n = 3, got {n}"))),
            Mode::Ns if self.h.iter().flatten().any(|&x| x != 0.0) => {
                Err(Error::Field("Navier-Stokes mode needs H = 0".into()))
            }
            _ => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    fn params() -> Params {
        Params {
            a: 1.0,
            gamma: 2.0,
            mu: 0.1,
            lambda: 0.0,
            nu: 0.1,
        }
    }

    #[test]
    fn parameter_ranges() {
        assert!(params().validate(3).is_ok());
        assert!(Params {
            mu: 0.0,
            ..params()
        }
        .validate(3)
        .is_err());
        assert!(Params {
            gamma: 1.0,
            ..params()
        }
        .validate(3)
        .is_err());
        assert!(Params { a: 0.0, ..params() }.validate(3).is_err());
        assert!(Params {
            nu: -1.0,
            ..params()
        }
        .validate(3)
        .is_err());
        // lambda + 2 mu / n > 0 depends on n
        let p = Params {
            mu: 1.0,
            lambda: -0.6,
            ..params()
        };
        assert!(p.validate(3).is_ok());
        assert!(p.validate(4).is_err());
    }

    #[test]
    fn state_validation() {
        let g = make_grid(3, 1.0, 8).unwrap();
        let len = g.len();
        assert!(State::at_rest(g.clone(), Mode::Mhd, params(), vec![1.0; len]).is_ok());
        let mut rho = vec![1.0; len];
        rho[3] = -1e-3;
        assert!(State::at_rest(g.clone(), Mode::Mhd, params(), rho).is_err());
        let g2 = make_grid(2, 1.0, 8).unwrap();
        assert!(State::at_rest(g2.clone(), Mode::Mhd, params(), vec![1.0; 64]).is_err());
        assert!(State::at_rest(g2, Mode::Ns, params(), vec![1.0; 64]).is_ok());
        let mut s = State::at_rest(g, Mode::Ns, params(), vec![1.0; len]).unwrap();
        s.h[0][0] = 1.0;
        assert!(s.validate().is_err());
    }
}
