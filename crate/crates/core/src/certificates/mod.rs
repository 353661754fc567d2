//! Inequality and identity certificates over single states and trajectories,
//! the constants they use, and the lifespan bound.

mod checks;
pub mod constants;
mod probes;

use alloc::string::String;
use alloc::vec::Vec;

pub use checks::*;
pub use constants::*;
pub use probes::*;

/// How strictly a check is judged.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum ToleranceClass {
    /// Finite-sum inequalities that hold up to floating point roundoff.
    ExactToRoundoff,
    /// Continuum statements that hold up to discretization error.
    TruncationError,
    /// Trend statements about the late-time tail; never gating.
    Asymptotic,
}

/// Whether a check actually ran.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Outcome {
    Checked,
    /// Hypotheses not met; the reason is in `context`.
    Skipped,
    /// Mass reached the box boundary, so whole-space identities do not apply.
    InvalidDomainTruncation,
    /// The tail condition was never met on the trajectory.
    AsymptoticNotReached,
}

/// Relative tolerances per class.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Tolerances {
    pub exact: f64,
    pub truncation: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            exact: 1e-12,
            truncation: 1e-2,
        }
    }
}

impl Tolerances {
    pub fn of(&self, class: ToleranceClass) -> f64 {
        match class {
            ToleranceClass::ExactToRoundoff => self.exact,
            ToleranceClass::TruncationError | ToleranceClass::Asymptotic => self.truncation,
        }
    }
}

/// One checked inequality `lhs <= rhs`, with `slack = rhs - lhs`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CertificateReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub pass: bool,
    pub tolerance_class: ToleranceClass,
    pub context: String,
    pub outcome: Outcome,
}

impl CertificateReport {
    /// `lhs <= rhs` judged against `tol * scale`, where `scale` is at least
    /// `max(|lhs|, |rhs|)`.
    pub fn le(
        name: &str,
        lhs: f64,
        rhs: f64,
        class: ToleranceClass,
        scale: f64,
        tol: &Tolerances,
        context: String,
    ) -> Self {
        let slack = rhs - lhs;
        let scale = scale.max(lhs.abs()).max(rhs.abs());
        let pass = slack.is_finite() && slack >= -tol.of(class) * scale;
        CertificateReport {
            name: name.into(),
            lhs,
            rhs,
            slack,
            pass,
            tolerance_class: class,
            context,
            outcome: Outcome::Checked,
        }
    }

    pub fn not_run(name: &str, class: ToleranceClass, outcome: Outcome, reason: String) -> Self {
        CertificateReport {
            name: name.into(),
            lhs: f64::NAN,
            rhs: f64::NAN,
            slack: f64::NAN,
            pass: true,
            tolerance_class: class,
            context: reason,
            outcome,
        }
    }

    pub fn skipped(name: &str, class: ToleranceClass, reason: String) -> Self {
        Self::not_run(name, class, Outcome::Skipped, reason)
    }

    /// Slack relative to the larger side, used to pick the worst sample of a family.
    fn margin(&self) -> f64 {
        let scale = self.lhs.abs().max(self.rhs.abs());
        if scale > 0.0 {
            self.slack / scale
        } else if self.slack >= 0.0 {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        }
    }

    /// True if this report decides the exit status.
    pub fn is_gating(&self) -> bool {
        self.outcome == Outcome::Checked && self.tolerance_class != ToleranceClass::Asymptotic
    }

    pub fn failed(&self) -> bool {
        self.is_gating() && !self.pass
    }
}

/// Keeps the report with the smallest relative slack; a failing report is
/// always preferred over a passing one.
pub(crate) fn worst(reports: Vec<CertificateReport>) -> Option<CertificateReport> {
    let count = reports.len();
    let mut best: Option<CertificateReport> = None;
    for r in reports {
        let replace = match &best {
            None => true,
            Some(b) => (!r.pass && b.pass) || (r.pass == b.pass && r.margin() < b.margin()),
        };
        if replace {
            best = Some(r);
        }
    }
    best.map(|mut r| {
        if count > 1 {
            r.context = alloc::format!("{} (worst of {count})", r.context);
        }
        r
    })
}
