//! Per-point losses with their convex conjugates.
//!
//! Classification losses assume labels in {−1, +1}; least squares accepts any
//! real target. Each loss is (1/μ)-smooth, which makes its conjugate
//! μ-strongly convex on its domain.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Clamping margin keeping the logistic entropy terms finite.
pub const LOGISTIC_DOMAIN_MARGIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LossKind {
    /// ½·max(0, 1 − y·u)²: the smooth SVM loss.
    SquaredSmoothHinge,
    /// ln(1 + exp(−y·u)).
    Logistic,
    /// ½·(u − y)².
    LeastSquares,
}

impl LossKind {
    /// ℓ(u) for prediction u and target y.
    pub fn evaluate(&self, u: f64, y: f64) -> f64 {
        match self {
            LossKind::SquaredSmoothHinge => {
                let m = (1.0 - y * u).max(0.0);
                0.5 * m * m
            }
            LossKind::Logistic => {
                // Stable ln(1+e^{-yu}) for both signs of the exponent.
                let t = -y * u;
                if t > 0.0 {
                    t + (-t).exp().ln_1p()
                } else {
                    t.exp().ln_1p()
                }
            }
            LossKind::LeastSquares => 0.5 * (u - y) * (u - y),
        }
    }

    /// dℓ/du.
    pub fn gradient(&self, u: f64, y: f64) -> f64 {
        match self {
            LossKind::SquaredSmoothHinge => -y * (1.0 - y * u).max(0.0),
            LossKind::Logistic => -y / (1.0 + (y * u).exp()),
            LossKind::LeastSquares => u - y,
        }
    }

    /// Smoothness constant 1/μ (Lipschitz constant of the gradient).
    pub fn smoothness(&self) -> f64 {
        match self {
            LossKind::SquaredSmoothHinge | LossKind::LeastSquares => 1.0,
            LossKind::Logistic => 0.25,
        }
    }

    /// ℓ*(−a), the conjugate evaluated at the negated dual variable.
    pub fn conjugate_neg(&self, a: f64, y: f64) -> Result<f64> {
        match self {
            LossKind::SquaredSmoothHinge => {
                let b = a * y;
                if b < 0.0 {
                    return Err(Error::ConjugateDomain(format!(
                        "squared hinge requires a·y >= 0, got {b}"
                    )));
                }
                Ok(0.5 * a * a - a * y)
            }
            LossKind::Logistic => {
                let b = a * y;
                if !(-1e-15..=1.0 + 1e-15).contains(&b) {
                    return Err(Error::ConjugateDomain(format!(
                        "logistic requires a·y in [0,1], got {b}"
                    )));
                }
                let b = b.clamp(0.0, 1.0);
                let xlx = |x: f64| if x <= 0.0 { 0.0 } else { x * x.ln() };
                Ok(xlx(b) + xlx(1.0 - b))
            }
            LossKind::LeastSquares => Ok(0.5 * a * a - a * y),
        }
    }

    /// Project a dual coordinate into the conjugate domain.
    pub fn clamp_dual(&self, a: f64, y: f64) -> f64 {
        match self {
            LossKind::SquaredSmoothHinge => {
                if a * y < 0.0 {
                    0.0
                } else {
                    a
                }
            }
            LossKind::Logistic => {
                let b = (a * y).clamp(LOGISTIC_DOMAIN_MARGIN, 1.0 - LOGISTIC_DOMAIN_MARGIN);
                b * y // y ∈ {−1,+1} so b·y maps back to a
            }
            LossKind::LeastSquares => a,
        }
    }
}
