//! Discrete axisymmetric convex hypersurfaces.
//!
//! Two representations share one angular grid ([`CosineGrid`]):
//!
//! * [`AxiConvexBody`]: a convex body in `ℝⁿ⁺¹` given by its support function
//!   `s(θ)`, where `θ` is the angle between the outward normal and the axis;
//! * [`AxiRadialGraph`]: a radial graph `r(θ)` over `𝕊ⁿ` in a warped product
//!   `dr² + λ(r)² σ`, used for the hemisphere.
//!
//! Both expose per-node principal curvatures (one meridian curvature followed
//! by `n − 1` equal rotational curvatures), the pairing that appears on the
//! right-hand side of the self-similar equation, and the potential `Φ`.

mod grid;
mod profile;
mod radial;
mod support;

use serde::{Deserialize, Serialize};

use crate::symfun::CurvatureVector;

pub use grid::CosineGrid;
pub use profile::{ProfileData, Representation};
pub use radial::AxiRadialGraph;
pub use support::AxiConvexBody;

/// Space form written as a warped product `[0, r̄) × 𝕊ⁿ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ambient {
    Euclidean,
    Hemisphere,
    Hyperbolic,
}

impl Ambient {
    /// Warping function `λ(r)`.
    pub fn lambda(self, r: f64) -> f64 {
        match self {
            Ambient::Euclidean => r,
            Ambient::Hemisphere => r.sin(),
            Ambient::Hyperbolic => r.sinh(),
        }
    }

    pub fn lambda_prime(self, r: f64) -> f64 {
        match self {
            Ambient::Euclidean => 1.0,
            Ambient::Hemisphere => r.cos(),
            Ambient::Hyperbolic => r.cosh(),
        }
    }

    /// `Φ(r) = ∫₀ʳ λ`.
    pub fn phi(self, r: f64) -> f64 {
        match self {
            Ambient::Euclidean => 0.5 * r * r,
            // 1 − cos r, written to avoid cancellation for small r
            Ambient::Hemisphere => 2.0 * (0.5 * r).sin().powi(2),
            Ambient::Hyperbolic => 2.0 * (0.5 * r).sinh().powi(2),
        }
    }

    /// Sectional curvature.
    pub fn epsilon(self) -> f64 {
        match self {
            Ambient::Euclidean => 0.0,
            Ambient::Hemisphere => 1.0,
            Ambient::Hyperbolic => -1.0,
        }
    }

    /// Upper end `r̄` of the radial coordinate.
    pub fn max_radius(self) -> f64 {
        match self {
            Ambient::Hemisphere => std::f64::consts::FRAC_PI_2,
            _ => f64::INFINITY,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Ambient::Euclidean => "euclid",
            Ambient::Hemisphere => "hemisphere",
            Ambient::Hyperbolic => "hyperbolic",
        }
    }
}

impl std::str::FromStr for Ambient {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "euclid" | "euclidean" => Ok(Ambient::Euclidean),
            "hemisphere" => Ok(Ambient::Hemisphere),
            "hyperbolic" => Ok(Ambient::Hyperbolic),
            other => Err(format!("unknown ambient {other:?}")),
        }
    }
}

/// Per-node geometric data of a discrete hypersurface.
pub trait DiscreteHypersurface {
    /// `n`, the hypersurface dimension.
    fn dim(&self) -> usize;
    fn ambient(&self) -> Ambient;
    fn theta(&self) -> &[f64];
    /// Principal curvatures `(κ_meridian, κ_rot, ..., κ_rot)` at each node.
    fn curvatures(&self) -> Vec<CurvatureVector>;
    /// `⟨X, ν⟩` in Euclidean space, `ḡ(λ∂_r, ν)` in a warped product.
    fn pairing(&self) -> Vec<f64>;
    /// `Φ` at each node.
    fn phi(&self) -> Vec<f64>;
}

fn curvature_vector(n: usize, meridian: f64, rotational: f64) -> CurvatureVector {
    let mut v = Vec::with_capacity(n);
    v.push(meridian);
    v.extend(std::iter::repeat_n(rotational, n - 1));
    CurvatureVector::new(v).expect("convexity was checked on construction")
}
