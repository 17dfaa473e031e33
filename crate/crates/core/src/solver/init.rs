use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hypersurface::AxiConvexBody;

/// Legendre polynomial `P_l(x)` by the three-term recurrence.
pub fn legendre(l: usize, x: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, x);
    if l == 0 {
        return p0;
    }
    for k in 1..l {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Relative zonal perturbation `s = r (1 + Σ_l c_l P_l(cos θ))`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Perturbation {
    /// `(l, c_l)` pairs.
    pub modes: Vec<(usize, f64)>,
}

impl Perturbation {
    pub fn single(l: usize, amplitude: f64) -> Self {
        Self {
            modes: vec![(l, amplitude)],
        }
    }

    /// Random combination of the modes `lo..=hi` whose sup norm is drawn
    /// uniformly from `[amplitude/3, amplitude]`.
    pub fn random(seed: u64, modes: std::ops::RangeInclusive<usize>, amplitude: f64) -> Result<Self> {
        if !(amplitude.is_finite() && amplitude > 0.0) {
            return Err(Error::Construction(format!("amplitude must be positive, got {amplitude}")));
        }
        if modes.is_empty() {
            return Err(Error::Construction("empty mode range".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw: Vec<(usize, f64)> = modes.map(|l| (l, rng.random_range(-1.0..=1.0))).collect();
        let target = rng.random_range(amplitude / 3.0..=amplitude);
        let p = Self { modes: raw };
        let size = p.sup_norm();
        Ok(p.scaled(target / size))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            modes: self.modes.iter().map(|&(l, c)| (l, c * factor)).collect(),
        }
    }

    pub fn eval(&self, theta: f64) -> f64 {
        let x = theta.cos();
        self.modes.iter().map(|&(l, c)| c * legendre(l, x)).sum()
    }

    /// Sup norm over `[0, π]`, sampled finely.
    pub fn sup_norm(&self) -> f64 {
        (0..=2048)
            .map(|j| self.eval(j as f64 * std::f64::consts::PI / 2048.0).abs())
            .fold(0.0, f64::max)
    }

    /// The perturbed sphere of radius `radius`; the perturbation is shrunk by
    /// `0.8` until the result is convex. Returns the body and the perturbation
    /// actually applied.
    pub fn apply(&self, n: usize, m: usize, radius: f64) -> Result<(AxiConvexBody, Perturbation)> {
        let mut p = self.clone();
        let mut last = None;
        for _ in 0..60 {
            match AxiConvexBody::from_fn(n, m, |t| radius * (1.0 + p.eval(t))) {
                Ok(body) => return Ok((body, p)),
                Err(e) => last = Some(e),
            }
            p = p.scaled(0.8);
        }
        Err(last.expect("at least one attempt"))
    }
}
