//! Numerical core for barotropic compressible MHD and Navier–Stokes on a periodic box.
//!
//! The crate is `no_std` (it only needs `alloc`). It provides the grid and difference
//! operators, the integral functionals of a state, the inequality certificates and
//! constants, an energy-consistent method-of-lines solver, and the Gaussian scenario
//! library with its closed-form reference values.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod certificates;
pub mod error;
pub mod functionals;
pub mod grid;
pub mod math;
pub mod scenarios;
pub mod solver;
pub mod state;

pub use error::{Error, Result};
pub use functionals::{energy_breakdown, EnergyBreakdown};
pub use grid::{make_grid, Grid, StencilOrder};
pub use state::{Mode, Params, State};
