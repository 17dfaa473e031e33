//! Self-similar solutions and contracting flows.
//!
//! * [`residual`]: the discrete self-similar equation `F^α + C − ⟨X, ν⟩`
//!   (Euclidean) or `F^α − ḡ(λ∂_r, ν)` (hemisphere) at every node;
//! * [`solve_shrinker`]: damped Newton iteration on the support function;
//! * [`slice_radius`]: the radius of the self-similar slice in the hemisphere;
//! * [`run_flow`]: explicit, rescaled integration of `∂s/∂t = −F^α`.

mod flow;
mod init;
mod newton;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hypersurface::{Ambient, DiscreteHypersurface};
use crate::symfun::SpeedFunction;

pub use flow::{run_flow, FlowConfig, FlowRecord, FlowStop, FlowTrace, Normalization};
pub use init::{legendre, Perturbation};
pub use newton::{solve_shrinker, IterationRecord, NewtonReport, StopReason};

/// The self-similar equation `F^α + C = ⟨X, ν⟩` and the numerical controls
/// for solving it.
#[derive(Debug, Clone)]
pub struct ShrinkerProblem {
    pub f: SpeedFunction,
    pub alpha: f64,
    pub ambient: Ambient,
    /// Offset `C ≤ 0`; zero gives the plain self-similar equation.
    pub offset: f64,
    /// Number of grid intervals.
    pub grid: usize,
    /// Sup-norm residual at which Newton stops.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Line-search halvings before a Newton step is abandoned.
    pub max_halvings: usize,
}

impl ShrinkerProblem {
    pub fn new(f: SpeedFunction, alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha >= 1.0) {
            return Err(Error::Construction(format!("alpha must be >= 1, got {alpha}")));
        }
        Ok(Self {
            f,
            alpha,
            ambient: Ambient::Euclidean,
            offset: 0.0,
            grid: 128,
            tolerance: 1e-11,
            max_iterations: 60,
            max_halvings: 20,
        })
    }

    pub fn with_offset(mut self, offset: f64) -> Result<Self> {
        if !(offset.is_finite() && offset <= 0.0) {
            return Err(Error::Construction(format!("offset C must be <= 0, got {offset}")));
        }
        self.offset = offset;
        Ok(self)
    }

    pub fn with_ambient(mut self, ambient: Ambient) -> Self {
        self.ambient = ambient;
        self
    }

    pub fn with_grid(mut self, m: usize) -> Self {
        self.grid = m;
        self
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tolerance = tol;
        self
    }

    pub fn with_max_iterations(mut self, iterations: usize) -> Self {
        self.max_iterations = iterations;
        self
    }

    /// Radius `r*` of the round self-similar sphere: `(f(1,…,1)/r)^α = r − C`.
    pub fn sphere_radius(&self) -> f64 {
        sphere_radius(self.f.normalization(), self.alpha, self.offset)
    }
}

/// Root of `(c/r)^α = r − offset` for `c > 0`, `α ≥ 1`, `offset ≤ 0`.
///
/// The left side decreases and the right side increases in `r`, so the root
/// is unique. Safeguarded Newton in `r` starting from the `offset = 0` root.
pub fn sphere_radius(c: f64, alpha: f64, offset: f64) -> f64 {
    let g = |r: f64| (c / r).powf(alpha) - r + offset;
    let dg = |r: f64| -alpha * (c / r).powf(alpha) / r - 1.0;
    let mut lo = f64::MIN_POSITIVE;
    let mut hi = c.powf(alpha / (alpha + 1.0)).max(c);
    while g(hi) > 0.0 {
        hi *= 2.0;
    }
    let mut r = c.powf(alpha / (alpha + 1.0));
    for _ in 0..200 {
        let v = g(r);
        if v == 0.0 {
            return r;
        }
        if v > 0.0 {
            lo = r;
        } else {
            hi = r;
        }
        let mut next = r - v / dg(r);
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - r).abs() <= 1e-16 * r {
            return next;
        }
        r = next;
    }
    r
}

/// Radius `r₀ ∈ (0, π/2)` of the slice solving `(f(1,…,1) cot r₀)^α = sin r₀`,
/// by bisection.
pub fn slice_radius(f: &SpeedFunction, alpha: f64) -> Result<f64> {
    if !(alpha.is_finite() && alpha >= 1.0) {
        return Err(Error::Construction(format!("alpha must be >= 1, got {alpha}")));
    }
    let c = f.normalization();
    // Strictly decreasing on (0, π/2): +∞ at 0, −1 at π/2.
    let g = |r: f64| (c / r.tan()).powf(alpha) - r.sin();
    let (mut lo, mut hi) = (0.0f64, std::f64::consts::FRAC_PI_2);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Self-similar residual at every node:
/// `F^α + C − ⟨X, ν⟩` in Euclidean space, `F^α − ḡ(λ∂_r, ν)` otherwise.
pub fn residual<H: DiscreteHypersurface>(surface: &H, problem: &ShrinkerProblem) -> Result<Vec<f64>> {
    if surface.ambient() != problem.ambient {
        return Err(Error::Ambient(format!(
            "surface lives in {:?} but the problem in {:?}",
            surface.ambient(),
            problem.ambient
        )));
    }
    let offset = if problem.ambient == Ambient::Euclidean {
        problem.offset
    } else {
        0.0
    };
    surface
        .curvatures()
        .iter()
        .zip(surface.pairing())
        .map(|(kappa, p)| Ok(problem.f.eval(kappa)?.powf(problem.alpha) + offset - p))
        .collect()
}

pub fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Summary of a body's distance from roundness.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Roundness {
    pub kappa_min: f64,
    pub kappa_max: f64,
}

impl Roundness {
    pub fn of<H: DiscreteHypersurface>(surface: &H) -> Self {
        let mut out = Roundness {
            kappa_min: f64::INFINITY,
            kappa_max: 0.0,
        };
        for k in surface.curvatures() {
            out.kappa_min = out.kappa_min.min(k.min());
            out.kappa_max = out.kappa_max.max(k.max());
        }
        out
    }

    /// `κ_max / κ_min`, equal to the ratio of extreme principal radii.
    pub fn ratio(&self) -> f64 {
        self.kappa_max / self.kappa_min
    }
}
