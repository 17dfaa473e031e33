//! Symmetric, degree-one homogeneous functions of principal curvatures.
//!
//! A [`SpeedFunction`] is built from a small catalog (elementary symmetric
//! roots, their quotients, power means) closed under positive combinations,
//! weighted geometric means and the duality `f_*(x) = 1/f(1/x)`. Every
//! function evaluates its value, gradient and Hessian analytically through
//! [`SpeedFunction::derivs`].
//!
//! The testers in [`checks`] turn the structural inequalities satisfied by
//! concave and inverse-concave functions into signed margins: a margin below
//! zero (beyond roundoff) is a witness that the inequality fails.

pub mod checks;
pub mod elementary;
mod parse;
mod sampler;
mod speed;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub use sampler::RandomSampler;
pub use speed::{SpeedFunction, SpeedKind, Traits};

/// Slack allowed on every inequality margin that should be nonnegative.
pub const MARGIN_SLACK: f64 = 1e-10;

/// Relative gap below which two curvatures are treated as equal when a
/// divided difference of gradient entries is needed.
///
/// The symmetric limit is accurate to second order in the gap while the
/// quotient loses `ε/gap` to cancellation; the crossover sits near `ε^{1/3}`.
pub const DEGENERATE_GAP: f64 = 1e-5;

/// A point of the open positive cone `Γ₊ ⊂ ℝⁿ`, `n ≥ 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureVector(Vec<f64>);

impl CurvatureVector {
    pub fn new(kappa: Vec<f64>) -> Result<Self> {
        if kappa.len() < 2 {
            return Err(Error::Dimension {
                expected: 2,
                got: kappa.len(),
            });
        }
        if let Some((index, &value)) = kappa
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v > 0.0))
        {
            return Err(Error::Domain { index, value });
        }
        Ok(Self(kappa))
    }

    /// `(c, ..., c)`.
    pub fn isotropic(n: usize, c: f64) -> Result<Self> {
        Self::new(vec![c; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::MIN, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::MAX, f64::min)
    }

    /// Index of the smallest entry; the lowest index wins ties.
    pub fn argmin(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.0.iter().enumerate() {
            if v < self.0[best] {
                best = i;
            }
        }
        best
    }

    pub fn scaled(&self, k: f64) -> Result<Self> {
        Self::new(self.0.iter().map(|v| v * k).collect())
    }

    /// Entrywise reciprocal, the principal radii.
    pub fn reciprocal(&self) -> Self {
        Self(self.0.iter().map(|v| 1.0 / v).collect())
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl TryFrom<Vec<f64>> for CurvatureVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl TryFrom<&[f64]> for CurvatureVector {
    type Error = Error;

    fn try_from(v: &[f64]) -> Result<Self> {
        Self::new(v.to_vec())
    }
}

/// Value, gradient `ḟⁱ` and Hessian `f̈ⁱʲ` of a speed function at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivBundle {
    pub value: f64,
    pub grad: DVector<f64>,
    pub hess: DMatrix<f64>,
}

impl DerivBundle {
    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    /// `(ḟᵏ − ḟˡ)/(κₖ − κₗ)`, replaced by its symmetric limit
    /// `(f̈ᵏᵏ + f̈ˡˡ)/2 − f̈ᵏˡ` when the two curvatures are within
    /// [`DEGENERATE_GAP`] of each other relative to the larger of the two.
    pub fn divided_difference(&self, kappa: &[f64], k: usize, l: usize) -> f64 {
        let scale = kappa[k].max(kappa[l]);
        let gap = kappa[k] - kappa[l];
        if gap.abs() < DEGENERATE_GAP * scale {
            0.5 * (self.hess[(k, k)] + self.hess[(l, l)]) - self.hess[(k, l)]
        } else {
            (self.grad[k] - self.grad[l]) / gap
        }
    }

    /// Gradient and Hessian of `log f`.
    pub fn log_derivatives(&self) -> (DVector<f64>, DMatrix<f64>) {
        let g = &self.grad / self.value;
        let h = &self.hess / self.value - &g * g.transpose();
        (g, h)
    }
}
