use std::sync::Arc;

use nalgebra::DVector;

use super::{curvature_vector, Ambient, CosineGrid, DiscreteHypersurface};
use crate::error::{Error, Result};
use crate::symfun::CurvatureVector;

/// Axisymmetric strictly convex body in `ℝⁿ⁺¹` stored as its support function
/// at the normal angles `θ_j = jπ/m`.
///
/// The principal radii are `r₁ = s'' + s` (meridian) and `r₂ = s' cot θ + s`
/// (rotational, multiplicity `n − 1`); at the poles `r₂ = r₁`.
#[derive(Debug, Clone)]
pub struct AxiConvexBody {
    n: usize,
    grid: Arc<CosineGrid>,
    s: DVector<f64>,
    ds: DVector<f64>,
    r1: DVector<f64>,
    r2: DVector<f64>,
}

impl AxiConvexBody {
    /// Builds a body from support values at the `m + 1` grid nodes.
    pub fn new(n: usize, support: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::Construction(format!("dimension n = {n} must be at least 2")));
        }
        if support.len() < 5 {
            return Err(Error::Construction("a profile needs at least 5 nodes".into()));
        }
        let grid = CosineGrid::get(support.len() - 1);
        Self::on_grid(n, grid, DVector::from_vec(support))
    }

    pub(crate) fn on_grid(n: usize, grid: Arc<CosineGrid>, s: DVector<f64>) -> Result<Self> {
        let (ds, dds, d_over_sin) = grid.differentiate(&s);
        let r1 = &dds + &s;
        let r2 = d_over_sin.component_mul(grid.cos_theta()) + &s;
        for j in 0..s.len() {
            let ok = r1[j].is_finite() && r2[j].is_finite() && r1[j] > 0.0 && r2[j] > 0.0;
            if !ok {
                return Err(Error::Convexity {
                    node: j,
                    theta: grid.theta()[j],
                    r1: r1[j],
                    r2: r2[j],
                });
            }
        }
        Ok(Self { n, grid, s, ds, r1, r2 })
    }

    /// Samples `s = profile(θ)` on a grid with `m` intervals.
    pub fn from_fn(n: usize, m: usize, profile: impl Fn(f64) -> f64) -> Result<Self> {
        let grid = CosineGrid::get(m);
        let s = DVector::from_iterator(grid.len(), grid.theta().iter().map(|&t| profile(t)));
        Self::on_grid(n, grid, s)
    }

    /// Round sphere of radius `radius` centred at the origin.
    pub fn sphere(n: usize, m: usize, radius: f64) -> Result<Self> {
        Self::from_fn(n, m, |_| radius)
    }

    /// Same shape scaled by `factor` about the origin.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::on_grid(self.n, self.grid.clone(), &self.s * factor)
    }

    pub fn with_support(&self, s: DVector<f64>) -> Result<Self> {
        Self::on_grid(self.n, self.grid.clone(), s)
    }

    pub fn grid(&self) -> &Arc<CosineGrid> {
        &self.grid
    }

    pub fn support(&self) -> &DVector<f64> {
        &self.s
    }

    pub fn support_derivative(&self) -> &DVector<f64> {
        &self.ds
    }

    /// `(r₁, r₂)` at every node.
    pub fn radii(&self) -> (&DVector<f64>, &DVector<f64>) {
        (&self.r1, &self.r2)
    }

    /// `|X|² = s² + s'²`.
    pub fn position_norm_sq(&self) -> Vec<f64> {
        self.s.iter().zip(self.ds.iter()).map(|(s, d)| s * s + d * d).collect()
    }

    /// Meridian point `(x, z)` with outward normal `(sin θ, cos θ)`.
    pub fn position(&self) -> Vec<[f64; 2]> {
        self.grid
            .theta()
            .iter()
            .enumerate()
            .map(|(j, &t)| {
                let (s, d) = (self.s[j], self.ds[j]);
                [s * t.sin() + d * t.cos(), s * t.cos() - d * t.sin()]
            })
            .collect()
    }

    /// Largest over smallest principal radius over all nodes.
    pub fn anisotropy(&self) -> f64 {
        let max = self.r1.max().max(self.r2.max());
        let min = self.r1.min().min(self.r2.min());
        max / min
    }
}

impl DiscreteHypersurface for AxiConvexBody {
    fn dim(&self) -> usize {
        self.n
    }

    fn ambient(&self) -> Ambient {
        Ambient::Euclidean
    }

    fn theta(&self) -> &[f64] {
        self.grid.theta()
    }

    fn curvatures(&self) -> Vec<CurvatureVector> {
        (0..self.s.len())
            .map(|j| curvature_vector(self.n, 1.0 / self.r1[j], 1.0 / self.r2[j]))
            .collect()
    }

    fn pairing(&self) -> Vec<f64> {
        self.s.iter().copied().collect()
    }

    fn phi(&self) -> Vec<f64> {
        self.position_norm_sq().into_iter().map(|v| 0.5 * v).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p2(t: f64) -> f64 {
        0.5 * (3.0 * t.cos().powi(2) - 1.0)
    }

    #[test]
    fn sphere_is_exactly_isotropic() {
        let b = AxiConvexBody::sphere(3, 256, 1.7).unwrap();
        for k in b.curvatures() {
            for v in k.as_slice() {
                assert!((v - 1.0 / 1.7).abs() <= 1e-12);
            }
        }
        assert!(b.phi().iter().all(|p| (p - 0.5 * 1.7 * 1.7).abs() < 1e-12));
        assert!(b.pairing().iter().all(|p| *p == 1.7));
    }

    #[test]
    fn ellipse_meridian_matches_closed_form() {
        let (a, c) = (1.5_f64, 0.8_f64);
        let h = |t: f64| (a * a * t.cos().powi(2) + c * c * t.sin().powi(2)).sqrt();
        let b = AxiConvexBody::from_fn(2, 128, h).unwrap();
        for (j, k) in b.curvatures().iter().enumerate() {
            let t = b.theta()[j];
            let hv = h(t);
            assert!((k.as_slice()[0] - hv.powi(3) / (a * a * c * c)).abs() < 1e-8, "meridian at {j}");
            assert!((k.as_slice()[1] - hv / (c * c)).abs() < 1e-8, "rotational at {j}");
        }
    }

    #[test]
    fn refinement_agreement_for_p2_profile() {
        let coarse = AxiConvexBody::from_fn(3, 64, |t| 1.0 + 0.1 * p2(t)).unwrap();
        let fine = AxiConvexBody::from_fn(3, 256, |t| 1.0 + 0.1 * p2(t)).unwrap();
        let kc = coarse.curvatures();
        let kf = fine.curvatures();
        for j in 0..kc.len() {
            for i in 0..3 {
                assert!((kc[j].as_slice()[i] - kf[4 * j].as_slice()[i]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn reconstruction_and_translation() {
        let base = |t: f64| 1.0 + 0.1 * p2(t);
        let b = AxiConvexBody::from_fn(3, 128, base).unwrap();
        let x = b.position();
        for (j, v) in b.position_norm_sq().iter().enumerate() {
            assert!((v - (x[j][0].powi(2) + x[j][1].powi(2))).abs() < 1e-10);
        }
        let shifted = AxiConvexBody::from_fn(3, 128, |t| base(t) + 0.2 * t.cos()).unwrap();
        let y = shifted.position();
        for j in 0..x.len() {
            assert!((y[j][0] - x[j][0]).abs() < 1e-10);
            assert!((y[j][1] - x[j][1] - 0.2).abs() < 1e-10);
        }
    }

    #[test]
    fn non_convex_profile_is_rejected() {
        let err = AxiConvexBody::from_fn(3, 64, |t| 1.0 + 0.9 * (4.0 * t).cos()).unwrap_err();
        assert!(matches!(err, Error::Convexity { .. }));
    }
}
