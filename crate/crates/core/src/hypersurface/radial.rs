use std::sync::Arc;

use nalgebra::DVector;

use super::{curvature_vector, Ambient, CosineGrid, DiscreteHypersurface};
use crate::error::{Error, Result};
use crate::symfun::CurvatureVector;

/// Axisymmetric radial graph `{(r(θ), θ, ω)}` over `𝕊ⁿ` in the warped
/// product `dr² + λ(r)²(dθ² + sin²θ g_{𝕊ⁿ⁻¹})`, with outward normal
/// `ν = (∂_r − r'λ⁻² ∂_θ)/v` and `v = √(1 + r'²/λ²)`.
///
/// Principal curvatures:
///
/// ```text
/// κ_meridian = (λλ' + 2λ'r'²/λ − r'') / (v³λ²)
/// κ_rot      = (λ' − (r'/sin θ)·cos θ/λ) / (λv)
/// ```
#[derive(Debug, Clone)]
pub struct AxiRadialGraph {
    n: usize,
    ambient: Ambient,
    grid: Arc<CosineGrid>,
    r: DVector<f64>,
    dr: DVector<f64>,
    slope: DVector<f64>,
    kappa_meridian: DVector<f64>,
    kappa_rot: DVector<f64>,
}

impl AxiRadialGraph {
    pub fn new(n: usize, ambient: Ambient, radii: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::Construction(format!("dimension n = {n} must be at least 2")));
        }
        if radii.len() < 5 {
            return Err(Error::Construction("a profile needs at least 5 nodes".into()));
        }
        let grid = CosineGrid::get(radii.len() - 1);
        Self::on_grid(n, ambient, grid, DVector::from_vec(radii))
    }

    /// Radial graph in the open upper hemisphere; requires `0 < r < π/2`.
    pub fn hemisphere(n: usize, radii: Vec<f64>) -> Result<Self> {
        Self::new(n, Ambient::Hemisphere, radii)
    }

    pub fn from_fn(n: usize, ambient: Ambient, m: usize, profile: impl Fn(f64) -> f64) -> Result<Self> {
        let grid = CosineGrid::get(m);
        let r = DVector::from_iterator(grid.len(), grid.theta().iter().map(|&t| profile(t)));
        Self::on_grid(n, ambient, grid, r)
    }

    /// The slice `{r₀} × 𝕊ⁿ`.
    pub fn slice(n: usize, ambient: Ambient, m: usize, r0: f64) -> Result<Self> {
        Self::from_fn(n, ambient, m, |_| r0)
    }

    fn on_grid(n: usize, ambient: Ambient, grid: Arc<CosineGrid>, r: DVector<f64>) -> Result<Self> {
        let rmax = ambient.max_radius();
        if let Some((index, &value)) = r
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v > 0.0 && **v < rmax))
        {
            return Err(Error::Domain { index, value });
        }
        let (dr, ddr, d_over_sin) = grid.differentiate(&r);
        let np = r.len();
        let mut slope = DVector::zeros(np);
        let mut kappa_meridian = DVector::zeros(np);
        let mut kappa_rot = DVector::zeros(np);
        for j in 0..np {
            let lam = ambient.lambda(r[j]);
            let lp = ambient.lambda_prime(r[j]);
            let d = dr[j];
            let v = (1.0 + d * d / (lam * lam)).sqrt();
            slope[j] = v;
            kappa_meridian[j] = (lam * lp + 2.0 * lp * d * d / lam - ddr[j]) / (v.powi(3) * lam * lam);
            kappa_rot[j] = (lp - d_over_sin[j] * grid.cos_theta()[j] / lam) / (lam * v);
            let (k1, k2) = (kappa_meridian[j], kappa_rot[j]);
            if !(k1.is_finite() && k2.is_finite() && k1 > 0.0 && k2 > 0.0) {
                return Err(Error::Convexity {
                    node: j,
                    theta: grid.theta()[j],
                    r1: 1.0 / k1,
                    r2: 1.0 / k2,
                });
            }
        }
        Ok(Self {
            n,
            ambient,
            grid,
            r,
            dr,
            slope,
            kappa_meridian,
            kappa_rot,
        })
    }

    pub fn grid(&self) -> &Arc<CosineGrid> {
        &self.grid
    }

    pub fn radius(&self) -> &DVector<f64> {
        &self.r
    }

    pub fn radius_derivative(&self) -> &DVector<f64> {
        &self.dr
    }

    /// `v = √(1 + r'²/λ²)`.
    pub fn slope(&self) -> &DVector<f64> {
        &self.slope
    }
}

impl DiscreteHypersurface for AxiRadialGraph {
    fn dim(&self) -> usize {
        self.n
    }

    fn ambient(&self) -> Ambient {
        self.ambient
    }

    fn theta(&self) -> &[f64] {
        self.grid.theta()
    }

    fn curvatures(&self) -> Vec<CurvatureVector> {
        (0..self.r.len())
            .map(|j| curvature_vector(self.n, self.kappa_meridian[j], self.kappa_rot[j]))
            .collect()
    }

    fn pairing(&self) -> Vec<f64> {
        (0..self.r.len())
            .map(|j| self.ambient.lambda(self.r[j]) / self.slope[j])
            .collect()
    }

    fn phi(&self) -> Vec<f64> {
        self.r.iter().map(|&r| self.ambient.phi(r)).collect()
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::FRAC_PI_4;

    use super::*;
    use crate::hypersurface::AxiConvexBody;

    #[test]
    fn quarter_slice() {
        let g = AxiRadialGraph::slice(3, Ambient::Hemisphere, 64, FRAC_PI_4).unwrap();
        for k in g.curvatures() {
            assert!(k.as_slice().iter().all(|v| (v - 1.0).abs() < 1e-15));
        }
        assert!(g
            .pairing()
            .iter()
            .all(|p| (p - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15));
    }

    #[test]
    fn generic_slice() {
        let r0 = 0.37;
        let g = AxiRadialGraph::slice(4, Ambient::Hemisphere, 128, r0).unwrap();
        for k in g.curvatures() {
            assert!(k.as_slice().iter().all(|v| (v - 1.0 / r0.tan()).abs() < 1e-12));
        }
        assert!(g.pairing().iter().all(|p| (p - r0.sin()).abs() < 1e-12));
    }

    #[test]
    fn hemisphere_range_is_enforced() {
        assert!(AxiRadialGraph::slice(2, Ambient::Hemisphere, 16, 1.6).is_err());
        assert!(AxiRadialGraph::slice(2, Ambient::Euclidean, 16, 1.6).is_ok());
    }

    // A Euclidean sphere of radius 1 centred at height c on the axis, seen from
    // the origin, is both a radial graph and a support-function body.
    #[test]
    fn euclidean_polar_graph_agrees_with_support_form() {
        let c = 0.3;
        let radial = |t: f64| c * t.cos() + (1.0 - c * c * t.sin().powi(2)).sqrt();
        let g = AxiRadialGraph::from_fn(3, Ambient::Euclidean, 64, radial).unwrap();
        for k in g.curvatures() {
            assert!(k.as_slice().iter().all(|v| (v - 1.0).abs() < 1e-10));
        }
        let b = AxiConvexBody::from_fn(3, 64, |t| 1.0 + c * t.cos()).unwrap();
        for k in b.curvatures() {
            assert!(k.as_slice().iter().all(|v| (v - 1.0).abs() < 1e-11));
        }
    }
}
