//! Closed-form constants of the blow-up argument.

use alloc::format;

use crate::error::{Error, Result};
use crate::math::{powf, sqrt, tgamma};

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Precondition(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

fn dimension(n: usize) -> Result<()> {
    if n >= 3 {
        Ok(())
    } else {
        Err(Error::Precondition(format!(
            "dimension must be at least 3, got {n}"
        )))
    }
}

/// Exponent `(n-2)/(n(gamma-1))` of the internal energy in the gradient bound.
pub fn energy_exponent(gamma: f64, n: usize) -> f64 {
    let n = n as f64;
    (n - 2.0) / (n * (gamma - 1.0))
}

/// Hölder–Jensen constant in three dimensions:
/// `K1 = m^(5/6) ((gamma-1)/(m A))^(1/(6(gamma-1)))`.
pub fn constant_k1(m: f64, a: f64, gamma: f64) -> Result<f64> {
    positive("m", m)?;
    positive("A", a)?;
    if !(gamma >= 6.0 / 5.0) {
        return Err(Error::Precondition(format!(
            "Jensen step needs gamma >= 6/5, got {gamma}"
        )));
    }
    Ok(powf(m, 5.0 / 6.0) * powf((gamma - 1.0) / (m * a), 1.0 / (6.0 * (gamma - 1.0))))
}

/// Hölder–Jensen constant in `n` dimensions:
/// `K1 = m^((n+2)/(2n)) ((gamma-1)/(m A))^((n-2)/(2n(gamma-1)))`, valid for
/// `gamma >= 2n/(n+2)`.
pub fn constant_k1_n(m: f64, a: f64, gamma: f64, n: usize) -> Result<f64> {
    dimension(n)?;
    positive("m", m)?;
    positive("A", a)?;
    let nf = n as f64;
    if !(gamma >= 2.0 * nf / (nf + 2.0)) {
        return Err(Error::Precondition(format!(
            "Jensen step needs gamma >= 2n/(n+2) = {}, got {gamma}",
            2.0 * nf / (nf + 2.0)
        )));
    }
    Ok(powf(m, (nf + 2.0) / (2.0 * nf))
        * powf(
            (gamma - 1.0) / (m * a),
            (nf - 2.0) / (2.0 * nf * (gamma - 1.0)),
        ))
}

/// Sharp constant of `||u||_{2n/(n-2)}^2 <= K2 ||Du||_2^2` on R^n:
/// `K2 = (Gamma(n)/Gamma(n/2))^(2/n) / (pi n (n-2))`.
pub fn constant_k2(n: usize) -> Result<f64> {
    dimension(n)?;
    let nf = n as f64;
    Ok(powf(tgamma(nf) / tgamma(nf / 2.0), 2.0 / nf) / (core::f64::consts::PI * nf * (nf - 2.0)))
}

/// `K = |P|^2 / (K1^2 K2)`.
pub fn constant_k(p_norm: f64, k1: f64, k2: f64) -> Result<f64> {
    if !(p_norm > 0.0) {
        return Err(Error::Precondition("momentum must be nonzero".into()));
    }
    positive("K1", k1)?;
    positive("K2", k2)?;
    Ok(p_norm * p_norm / (k1 * k1 * k2))
}

/// Interpolation constant with base `b = 2 gamma / (n (gamma-1))`:
/// `C = b^(n(gamma-1)/D) + b^(-2 gamma/D)`, `D = (n+2) gamma - n`.
pub fn constant_cgn(gamma: f64, n: usize) -> Result<f64> {
    dimension(n)?;
    if !(gamma > 1.0) {
        return Err(Error::Precondition(format!(
            "gamma must exceed 1, got {gamma}"
        )));
    }
    let nf = n as f64;
    let b = 2.0 * gamma / (nf * (gamma - 1.0));
    let d = (nf + 2.0) * gamma - nf;
    Ok(powf(b, nf * (gamma - 1.0) / d) + powf(b, -2.0 * gamma / d))
}

/// `C1 = A/(gamma-1) (m / C_{gamma,n})^((gamma(n+2)-n)/2)`.
pub fn constant_c1(a: f64, gamma: f64, n: usize, m: f64) -> Result<f64> {
    positive("A", a)?;
    positive("m", m)?;
    let c = constant_cgn(gamma, n)?;
    let nf = n as f64;
    Ok(a / (gamma - 1.0) * powf(m / c, (gamma * (nf + 2.0) - nf) / 2.0))
}

/// Upper-bound constant anchored at `(Q0, G0)`: `Q0 G0^((3 gamma - 5)/2) / 4`
/// for `gamma <= 4/3`, `Q0 / (4 sqrt(G0))` above.
pub fn constant_c2(gamma: f64, q0: f64, g0: f64) -> Result<f64> {
    positive("Q0", q0)?;
    positive("G0", g0)?;
    if !(gamma > 1.0) {
        return Err(Error::Precondition(format!(
            "gamma must exceed 1, got {gamma}"
        )));
    }
    Ok(if gamma <= 4.0 / 3.0 {
        0.25 * q0 * powf(g0, (3.0 * gamma - 5.0) / 2.0)
    } else {
        q0 / (4.0 * sqrt(g0))
    })
}

/// Exponent `beta` in `E_i + E_m <= C2 G^(-beta)`.
pub fn upper_bound_exponent(gamma: f64) -> f64 {
    if gamma <= 4.0 / 3.0 {
        3.0 * (gamma - 1.0) / 2.0
    } else {
        0.5
    }
}

/// Slope `s` in `d log Q / dt <= s d log G / dt`.
pub fn q_slope(gamma: f64) -> f64 {
    if gamma <= 4.0 / 3.0 {
        (5.0 - 3.0 * gamma) / 2.0
    } else {
        0.5
    }
}

/// Coefficient `c` in `G(t) <= c E(0) t^2 + F(0) t + G(0)`; for `n = 3` it is 1
/// up to `gamma = 5/3` and `3(gamma-1)/2` above.
pub fn inertia_upper_coefficient(gamma: f64, n: usize) -> f64 {
    let k = n as f64 * (gamma - 1.0);
    if k <= 2.0 {
        1.0
    } else {
        k / 2.0
    }
}

/// Largest `sigma` with `dissipation >= sigma int |Du|^2`: `min(mu, (n+1) mu + n lambda)`.
pub fn constant_sigma(mu: f64, lambda: f64, n: usize) -> Result<f64> {
    positive("mu", mu)?;
    let nf = n as f64;
    if !(lambda + 2.0 * mu / nf > 0.0) {
        return Err(Error::Precondition(format!(
            "lambda + 2 mu / n must be positive, got {}",
            lambda + 2.0 * mu / nf
        )));
    }
    Ok(if mu + lambda >= 0.0 {
        mu
    } else {
        (nf + 1.0) * mu + nf * lambda
    })
}

/// Time at which `E(0) - sigma K E(0)^(-kappa) t` reaches zero,
/// `T* = E0^(1+kappa) / (sigma K)` with `kappa = (n-2)/(n(gamma-1))`.
pub fn lifespan_bound(e0: f64, sigma: f64, k: f64, gamma: f64, n: usize) -> Result<f64> {
    positive("E0", e0)?;
    positive("sigma", sigma)?;
    if !(k > 0.0) {
        return Err(Error::Precondition(
            "K must be positive (momentum must be nonzero)".into(),
        ));
    }
    dimension(n)?;
    if !(gamma > 1.0) {
        return Err(Error::Precondition(format!(
            "gamma must exceed 1, got {gamma}"
        )));
    }
    Ok(powf(e0, 1.0 + energy_exponent(gamma, n)) / (sigma * k))
}

/// Envelope `E'(t) <= -L t^p` following from the dissipation bound, the gradient
/// lower bound, the upper energy bound and `G(t) >= |P|^2 t^2 / (2m)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayEnvelope {
    pub l: f64,
    pub exponent: f64,
    /// Power of `G` in the intermediate bound `E' <= -sigma K C2^(-kappa) G^e`.
    pub g_exponent: f64,
}

pub fn decay_envelope_constant(
    sigma: f64,
    k: f64,
    c2: f64,
    p_norm: f64,
    m: f64,
    gamma: f64,
    n: usize,
) -> Result<DecayEnvelope> {
    positive("sigma", sigma)?;
    positive("K", k)?;
    positive("C2", c2)?;
    positive("|P|", p_norm)?;
    positive("m", m)?;
    let kappa = energy_exponent(gamma, n);
    let e = kappa * upper_bound_exponent(gamma);
    let l = sigma * k * powf(c2, -kappa) * powf(p_norm * p_norm / (2.0 * m), e);
    Ok(DecayEnvelope {
        l,
        exponent: 2.0 * e,
        g_exponent: e,
    })
}
