//! Periodic box discretization, central-difference operators and quadrature.
//!
//! Nodes are stored in row-major order with axis 0 slowest. The coordinate of
//! index `i` along any axis is exactly `-L + i*h`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{powi, Sum};

/// Order of the periodic central-difference stencil.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum StencilOrder {
    #[cfg_attr(feature = "serde", serde(rename = "2"))]
    Second,
    #[default]
    #[cfg_attr(feature = "serde", serde(rename = "4"))]
    Fourth,
}

const SECOND: [(usize, f64); 1] = [(1, 0.5)];
const FOURTH: [(usize, f64); 2] = [(1, 2.0 / 3.0), (2, -1.0 / 12.0)];

impl StencilOrder {
    /// Offsets and weights `c_j` of `(Df)_i = sum_j c_j (f_{i+j} - f_{i-j}) / h`.
    pub fn coefficients(self) -> &'static [(usize, f64)] {
        match self {
            StencilOrder::Second => &SECOND,
            StencilOrder::Fourth => &FOURTH,
        }
    }

    pub fn half_width(self) -> usize {
        match self {
            StencilOrder::Second => 1,
            StencilOrder::Fourth => 2,
        }
    }

    pub fn order(self) -> u32 {
        match self {
            StencilOrder::Second => 2,
            StencilOrder::Fourth => 4,
        }
    }

    pub fn from_order(order: u32) -> Result<Self> {
        match order {
            2 => Ok(StencilOrder::Second),
            4 => Ok(StencilOrder::Fourth),
            o => Err(Error::Grid(format!(
                "stencil order must be 2 or 4, got {o}"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    n_dim: usize,
    half_extent: f64,
    points: usize,
    spacing: f64,
    len: usize,
}

/// Builds the grid on `[-L, L)^n` with `N` points per axis.
pub fn make_grid(n_dim: usize, half_extent: f64, points_per_axis: usize) -> Result<Grid> {
    Grid::new(n_dim, half_extent, points_per_axis)
}

impl Grid {
    pub fn new(n_dim: usize, half_extent: f64, points: usize) -> Result<Self> {
        if n_dim == 0 {
            return Err(Error::Grid("n_dim must be at least 1".into()));
        }
        if points < 8 || points % 2 != 0 {
            return Err(Error::Grid(format!(
                "points per axis must be even and >= 8, got {points}"
            )));
        }
        if !(half_extent > 0.0) || !half_extent.is_finite() {
            return Err(Error::Grid(format!(
                "half extent must be positive and finite, got {half_extent}"
            )));
        }
        let len = (0..n_dim)
            .try_fold(1usize, |acc, _| acc.checked_mul(points))
            .ok_or_else(|| Error::Grid("node count overflows".into()))?;
        Ok(Grid {
            n_dim,
            half_extent,
            points,
            spacing: 2.0 * half_extent / points as f64,
            len,
        })
    }

    pub fn n_dim(&self) -> usize {
        self.n_dim
    }

    pub fn half_extent(&self) -> f64 {
        self.half_extent
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Total number of nodes, `N^n`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Quadrature weight `h^n` carried by every node.
    pub fn weight(&self) -> f64 {
        powi(self.spacing, self.n_dim as i32)
    }

    pub fn coordinate(&self, i: usize) -> f64 {
        -self.half_extent + i as f64 * self.spacing
    }

    pub fn coordinates(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.coordinate(i)).collect()
    }

    /// Distance in the flat index between neighbours along `axis`.
    pub fn stride(&self, axis: usize) -> usize {
        powi_usize(self.points, self.n_dim - 1 - axis)
    }

    /// Per-axis index of node `idx` along `axis`.
    #[inline]
    pub fn axis_index(&self, idx: usize, axis: usize) -> usize {
        (idx / self.stride(axis)) % self.points
    }

    pub fn position(&self, idx: usize, out: &mut [f64]) {
        let mut rem = idx;
        for a in (0..self.n_dim).rev() {
            out[a] = self.coordinate(rem % self.points);
            rem /= self.points;
        }
    }

    /// `|x|^2` at node `idx`.
    pub fn radius_sq(&self, idx: usize) -> f64 {
        let mut rem = idx;
        let mut r2 = 0.0;
        for _ in 0..self.n_dim {
            let x = self.coordinate(rem % self.points);
            r2 += x * x;
            rem /= self.points;
        }
        r2
    }

    /// True if the node lies within `width` nodes of a face of the box.
    pub fn near_boundary(&self, idx: usize, width: usize) -> bool {
        let mut rem = idx;
        for _ in 0..self.n_dim {
            let i = rem % self.points;
            if i < width || i + width >= self.points {
                return true;
            }
            rem /= self.points;
        }
        false
    }

    /// Samples `f(x)` at every node.
    pub fn sample<F: FnMut(&[f64]) -> f64>(&self, mut f: F) -> Vec<f64> {
        let mut x = vec![0.0; self.n_dim];
        (0..self.len)
            .map(|idx| {
                self.position(idx, &mut x);
                f(&x)
            })
            .collect()
    }

    pub fn check_len(&self, field: &[f64]) -> Result<()> {
        if field.len() != self.len {
            return Err(Error::Field(format!(
                "field has {} nodes, grid has {}",
                field.len(),
                self.len
            )));
        }
        Ok(())
    }

    pub fn check_vector(&self, v: &[Vec<f64>], comps: usize) -> Result<()> {
        if v.len() != comps {
            return Err(Error::Field(format!(
                "vector field has {} components, expected {comps}",
                v.len()
            )));
        }
        v.iter().try_for_each(|c| self.check_len(c))
    }

    /// Quadrature `sum_i f_i h^n`.
    pub fn integrate(&self, field: &[f64]) -> Result<f64> {
        self.check_len(field)?;
        Ok(self.integrate_unchecked(field))
    }

    pub(crate) fn integrate_unchecked(&self, field: &[f64]) -> f64 {
        let mut s = Sum::new();
        for &f in field {
            s.add(f);
        }
        s.value() * self.weight()
    }

    /// Quadrature of `g(i)` over all nodes without materializing the integrand.
    pub fn integrate_with<F: FnMut(usize) -> f64>(&self, mut g: F) -> f64 {
        let mut s = Sum::new();
        for i in 0..self.len {
            s.add(g(i));
        }
        s.value() * self.weight()
    }

    /// Central difference along `axis` written into `out`.
    pub fn derivative_into(
        &self,
        field: &[f64],
        axis: usize,
        order: StencilOrder,
        out: &mut [f64],
    ) -> Result<()> {
        self.check_len(field)?;
        self.check_len(out)?;
        if axis >= self.n_dim {
            return Err(Error::Field(format!("axis {axis} out of range")));
        }
        self.derivative_unchecked(field, axis, order, out);
        Ok(())
    }

    pub(crate) fn derivative_unchecked(
        &self,
        field: &[f64],
        axis: usize,
        order: StencilOrder,
        out: &mut [f64],
    ) {
        let n = self.points;
        let s = self.stride(axis);
        let block = n * s;
        let inv_h = 1.0 / self.spacing;
        let coeffs = order.coefficients();
        if s == 1 {
            for (src, dst) in field.chunks_exact(n).zip(out.chunks_exact_mut(n)) {
                for (i, d) in dst.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    for &(j, c) in coeffs {
                        let p = if i + j >= n { i + j - n } else { i + j };
                        let m = if i < j { i + n - j } else { i - j };
                        acc += c * (src[p] - src[m]);
                    }
                    *d = acc * inv_h;
                }
            }
            return;
        }
        for base in (0..self.len).step_by(block) {
            for i in 0..n {
                let row = base + i * s;
                let dst = &mut out[row..row + s];
                dst.iter_mut().for_each(|d| *d = 0.0);
                for &(j, c) in coeffs {
                    let p = base + ((i + j) % n) * s;
                    let m = base + ((i + n - j) % n) * s;
                    let cp = c * inv_h;
                    for k in 0..s {
                        dst[k] += cp * (field[p + k] - field[m + k]);
                    }
                }
            }
        }
    }

    pub fn derivative(&self, field: &[f64], axis: usize, order: StencilOrder) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.len];
        self.derivative_into(field, axis, order, &mut out)?;
        Ok(out)
    }

    pub fn gradient(&self, field: &[f64], order: StencilOrder) -> Result<Vec<Vec<f64>>> {
        (0..self.n_dim)
            .map(|a| self.derivative(field, a, order))
            .collect()
    }

    pub fn divergence(&self, v: &[Vec<f64>], order: StencilOrder) -> Result<Vec<f64>> {
        self.check_vector(v, self.n_dim)?;
        let mut out = vec![0.0; self.len];
        let mut tmp = vec![0.0; self.len];
        for (a, comp) in v.iter().enumerate() {
            self.derivative_unchecked(comp, a, order, &mut tmp);
            out.iter_mut().zip(&tmp).for_each(|(o, t)| *o += t);
        }
        Ok(out)
    }

    /// Discrete curl; only defined for `n = 3`.
    pub fn curl(&self, v: &[Vec<f64>], order: StencilOrder) -> Result<Vec<Vec<f64>>> {
        if self.n_dim != 3 {
            return Err(Error::Field(format!(
                "curl needs n = 3, grid has n = {}",
                self.n_dim
            )));
        }
        self.check_vector(v, 3)?;
        let mut out = vec![vec![0.0; self.len]; 3];
        let mut tmp = vec![0.0; self.len];
        self.curl_unchecked(v, order, &mut out, &mut tmp);
        Ok(out)
    }

    pub(crate) fn curl_unchecked(
        &self,
        v: &[Vec<f64>],
        order: StencilOrder,
        out: &mut [Vec<f64>],
        tmp: &mut [f64],
    ) {
        // (curl v)_k = D_{k+1} v_{k+2} - D_{k+2} v_{k+1}
        for k in 0..3 {
            let a = (k + 1) % 3;
            let b = (k + 2) % 3;
            self.derivative_unchecked(&v[b], a, order, &mut out[k]);
            self.derivative_unchecked(&v[a], b, order, tmp);
            out[k].iter_mut().zip(tmp.iter()).for_each(|(o, t)| *o -= t);
        }
    }
}

fn powi_usize(b: usize, e: usize) -> usize {
    (0..e).fold(1, |acc, _| acc * b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn construction_examples() {
        let g = make_grid(3, 1.0, 8).unwrap();
        assert_eq!(g.spacing(), 0.25);
        assert!((g.weight() * g.len() as f64 - 8.0).abs() < 1e-12);
        let g = make_grid(3, 6.0, 48).unwrap();
        assert_eq!(g.spacing(), 0.25);
        assert!((g.integrate(&vec![1.0; g.len()]).unwrap() - 1728.0).abs() < 1e-9);
        assert!(make_grid(2, 1.0, 7).is_err());
        assert!(make_grid(2, 1.0, 6).is_err());
        assert!(make_grid(3, 0.0, 8).is_err());
        assert!(make_grid(3, -1.0, 8).is_err());
    }

    #[test]
    fn coordinates_are_exact_offsets() {
        let g = make_grid(2, 3.0, 12).unwrap();
        for i in 0..12 {
            assert_eq!(g.coordinate(i), -3.0 + i as f64 * 0.5);
        }
        let mut x = [0.0; 2];
        g.position(12 + 5, &mut x);
        assert_eq!(x, [-2.5, -0.5]);
        assert_eq!(g.axis_index(17, 0), 1);
        assert_eq!(g.axis_index(17, 1), 5);
    }

    #[test]
    fn constant_field_has_zero_derivatives() {
        let g = make_grid(3, 1.0, 8).unwrap();
        let f = vec![3.5; g.len()];
        for order in [StencilOrder::Second, StencilOrder::Fourth] {
            for d in g.gradient(&f, order).unwrap() {
                assert!(d.iter().all(|&x| x == 0.0));
            }
        }
    }

    fn max_err_sine(points: usize, order: StencilOrder) -> f64 {
        let l = 1.0;
        let g = make_grid(3, l, points).unwrap();
        let f = g.sample(|x| (PI * x[0] / l).sin());
        let d = g.derivative(&f, 0, order).unwrap();
        let exact = g.sample(|x| PI / l * (PI * x[0] / l).cos());
        d.iter()
            .zip(&exact)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn derivative_converges_at_stencil_order() {
        for order in [StencilOrder::Second, StencilOrder::Fourth] {
            let e1 = max_err_sine(16, order);
            let e2 = max_err_sine(32, order);
            let rate = (e1 / e2).log2();
            assert!(
                (rate - order.order() as f64).abs() < 0.3,
                "order {order:?}: rate {rate}"
            );
        }
    }

    #[test]
    fn curl_of_shear_matches_analytic() {
        let l = 1.0;
        let mut errs = Vec::new();
        for n in [16, 32] {
            let g = make_grid(3, l, n).unwrap();
            let v = vec![
                g.sample(|x| (PI * x[1] / l).sin()),
                vec![0.0; g.len()],
                vec![0.0; g.len()],
            ];
            let c = g.curl(&v, StencilOrder::Fourth).unwrap();
            assert!(c[0].iter().chain(&c[1]).all(|&x| x == 0.0));
            let exact = g.sample(|x| -PI / l * (PI * x[1] / l).cos());
            errs.push(
                c[2].iter()
                    .zip(&exact)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max),
            );
        }
        let rate = (errs[0] / errs[1]).log2();
        assert!((rate - 4.0).abs() < 0.3, "rate {rate}");
    }

    #[test]
    fn curl_rejects_other_dimensions() {
        let g = make_grid(2, 1.0, 8).unwrap();
        let v = vec![vec![0.0; g.len()]; 2];
        assert!(g.curl(&v, StencilOrder::Fourth).is_err());
    }

    #[test]
    fn size_mismatch_is_reported() {
        let g = make_grid(3, 1.0, 8).unwrap();
        assert!(g.integrate(&[1.0; 10]).is_err());
        assert!(g.gradient(&[1.0; 10], StencilOrder::Second).is_err());
        assert!(g
            .divergence(&[vec![0.0; g.len()]], StencilOrder::Second)
            .is_err());
    }

    #[test]
    fn gaussian_integral() {
        let g = make_grid(3, 6.0, 48).unwrap();
        let f = g.sample(|x| (-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / 2.0).exp());
        let exact = (2.0 * PI).powf(1.5);
        assert!((g.integrate(&f).unwrap() / exact - 1.0).abs() < 1e-6);
        assert!((exact - 15.7496).abs() < 1e-4);
    }

    #[test]
    fn boundary_strip() {
        let g = make_grid(2, 1.0, 8).unwrap();
        let count = (0..g.len()).filter(|&i| g.near_boundary(i, 2)).count();
        assert_eq!(count, 64 - 16);
    }
}
