use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, DVector};

/// Uniform nodes `θ_j = jπ/m`, `j = 0..=m`, with Fourier-cosine (DCT-I)
/// differentiation matrices for profiles that extend evenly across both
/// poles.
#[derive(Debug)]
pub struct CosineGrid {
    m: usize,
    theta: Vec<f64>,
    d1: DMatrix<f64>,
    d2: DMatrix<f64>,
    d1_over_sin: DMatrix<f64>,
    cos: DVector<f64>,
}

impl CosineGrid {
    /// Shared grid for `m` intervals.
    pub fn get(m: usize) -> Arc<CosineGrid> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<CosineGrid>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        let mut map = cache.lock().expect("grid cache poisoned");
        map.entry(m).or_insert_with(|| Arc::new(CosineGrid::build(m))).clone()
    }

    fn build(m: usize) -> Self {
        assert!(m >= 4, "grid needs at least 4 intervals");
        let np = m + 1;
        let h = PI / m as f64;
        let theta: Vec<f64> = (0..np).map(|j| j as f64 * h).collect();
        let c = |k: usize| if k == 0 || k == m { 0.5 } else { 1.0 };
        // Analysis: a_k = (2/m) Σ_j c_j s_j cos(k θ_j); synthesis s = Σ_k c_k a_k cos(k θ).
        let analysis = DMatrix::from_fn(np, np, |k, j| 2.0 / m as f64 * c(j) * ((k * j) as f64 * h).cos());
        let syn_d1 = DMatrix::from_fn(np, np, |j, k| -c(k) * k as f64 * (k as f64 * theta[j]).sin());
        let syn_d2 = DMatrix::from_fn(np, np, |j, k| -c(k) * (k * k) as f64 * ((k * j) as f64 * h).cos());
        // s'/sin θ: sin(kθ)/sin θ is the Chebyshev U_{k-1}(cos θ), with values
        // k and (-1)^{k-1} k at the poles.
        let syn_ds = DMatrix::from_fn(np, np, |j, k| {
            let kf = k as f64;
            let ratio = if j == 0 {
                kf
            } else if j == m {
                if k % 2 == 1 { kf } else { -kf }
            } else {
                (kf * theta[j]).sin() / theta[j].sin()
            };
            -c(k) * kf * ratio
        });
        let mut d1 = syn_d1 * &analysis;
        let mut d2 = syn_d2 * &analysis;
        let mut d1_over_sin = syn_ds * &analysis;
        for d in [&mut d1, &mut d2, &mut d1_over_sin] {
            zero_row_sums(d);
        }
        // Exact zeros at the poles for the first derivative.
        d1.row_mut(0).fill(0.0);
        d1.row_mut(m).fill(0.0);
        let cos = DVector::from_iterator(np, theta.iter().map(|t| t.cos()));
        Self {
            m,
            theta,
            d1,
            d2,
            d1_over_sin,
            cos,
        }
    }

    pub fn intervals(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.m + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn cos_theta(&self) -> &DVector<f64> {
        &self.cos
    }

    /// First derivative in θ.
    pub fn d1(&self) -> &DMatrix<f64> {
        &self.d1
    }

    /// Second derivative in θ.
    pub fn d2(&self) -> &DMatrix<f64> {
        &self.d2
    }

    /// `u ↦ u'/sin θ`, continuous at the poles where it equals `±u''`.
    pub fn d1_over_sin(&self) -> &DMatrix<f64> {
        &self.d1_over_sin
    }

    /// `(u', u'', u'/sin θ)` at the nodes.
    ///
    /// The first nodal value is subtracted before differentiating, so constant
    /// profiles have derivatives that are exactly zero and nearly constant
    /// ones lose no accuracy to their mean.
    pub fn differentiate(&self, u: &DVector<f64>) -> (DVector<f64>, DVector<f64>, DVector<f64>) {
        let shifted = u.add_scalar(-u[0]);
        (&self.d1 * &shifted, &self.d2 * &shifted, &self.d1_over_sin * &shifted)
    }

    /// Trapezoid weights; spectrally accurate for even periodic integrands.
    pub fn trapezoid(&self) -> DVector<f64> {
        let h = PI / self.m as f64;
        DVector::from_fn(self.len(), |j, _| if j == 0 || j == self.m { 0.5 * h } else { h })
    }
}

/// Puts the negative off-diagonal row sum on the diagonal so each row
/// annihilates constants.
fn zero_row_sums(d: &mut DMatrix<f64>) {
    for i in 0..d.nrows() {
        let off: f64 = (0..d.ncols()).filter(|&j| j != i).map(|j| d[(i, j)]).sum();
        d[(i, i)] = -off;
    }
}
