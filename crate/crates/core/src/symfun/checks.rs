//! Signed margins for the structural inequalities of speed functions.
//!
//! Each tester returns a number that is nonnegative (up to
//! [`MARGIN_SLACK`](super::MARGIN_SLACK)) whenever the corresponding
//! inequality holds at the given point. Which inequalities a function is
//! *expected* to satisfy is recorded in its [`Traits`](super::Traits).

use serde::Serialize;

use super::{CurvatureVector, DerivBundle, RandomSampler, SpeedFunction};
use crate::error::{Error, Result};

fn check_direction(kappa: &CurvatureVector, y: &[f64]) -> Result<()> {
    if y.len() != kappa.dim() {
        return Err(Error::Dimension {
            expected: kappa.dim(),
            got: y.len(),
        });
    }
    Ok(())
}

/// Worst-case summary of the positivity, monotonicity and homogeneity
/// requirements over a batch of samples.
#[derive(Debug, Clone, Serialize)]
pub struct StructureReport {
    pub samples: usize,
    /// Smallest `f(κ)` seen.
    pub min_value: f64,
    /// Smallest gradient entry `ḟⁱ` seen.
    pub min_grad: f64,
    /// Largest `|f(kκ) − k f(κ)| / f(kκ)`.
    pub max_homogeneity_defect: f64,
    /// Largest `|Σ ḟⁱκᵢ − f| / f`.
    pub max_euler_defect: f64,
}

impl StructureReport {
    pub fn passed(&self) -> bool {
        self.min_value > 0.0
            && self.min_grad > 0.0
            && self.max_homogeneity_defect < 1e-12
            && self.max_euler_defect < 1e-10
    }
}

pub fn structural_conditions(f: &SpeedFunction, sampler: &mut RandomSampler, samples: usize) -> Result<StructureReport> {
    let mut report = StructureReport {
        samples,
        min_value: f64::INFINITY,
        min_grad: f64::INFINITY,
        max_homogeneity_defect: 0.0,
        max_euler_defect: 0.0,
    };
    for _ in 0..samples {
        let kappa = sampler.kappa();
        let k = sampler.log_uniform();
        let d = f.derivs(&kappa)?;
        let scaled = f.eval(&kappa.scaled(k)?)?;
        report.min_value = report.min_value.min(d.value);
        report.min_grad = report.min_grad.min(d.grad.min());
        report.max_homogeneity_defect = report
            .max_homogeneity_defect
            .max((scaled - k * d.value).abs() / scaled);
        let euler: f64 = d.grad.iter().zip(kappa.as_slice()).map(|(g, x)| g * x).sum();
        report.max_euler_defect = report.max_euler_defect.max((euler - d.value).abs() / d.value);
    }
    Ok(report)
}

/// `Σᵢ (1/κᵢ) ∂ᵢlog f yᵢ² + Σᵢⱼ ∂ᵢⱼlog f yᵢyⱼ`.
pub fn log_convexity(f: &SpeedFunction, kappa: &CurvatureVector, y: &[f64]) -> Result<f64> {
    check_direction(kappa, y)?;
    let d = f.derivs(kappa)?;
    let (g, h) = d.log_derivatives();
    let x = kappa.as_slice();
    let n = x.len();
    let mut margin = 0.0;
    for i in 0..n {
        margin += g[i] / x[i] * y[i] * y[i];
        for j in 0..n {
            margin += h[(i, j)] * y[i] * y[j];
        }
    }
    Ok(margin)
}

/// `Σ f̈ᵏˡyₖyₗ + 2Σ (ḟᵏ/κₖ) yₖ² − 2 f⁻¹ (Σ ḟᵏyₖ)²`, nonnegative for every `y`
/// exactly when `f` is inverse concave.
pub fn inverse_concavity(f: &SpeedFunction, kappa: &CurvatureVector, y: &[f64]) -> Result<f64> {
    check_direction(kappa, y)?;
    let d = f.derivs(kappa)?;
    Ok(inverse_concavity_from(&d, kappa.as_slice(), y))
}

pub(crate) fn inverse_concavity_from(d: &DerivBundle, x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let mut quad = 0.0;
    let mut lin = 0.0;
    let mut weighted = 0.0;
    for k in 0..n {
        lin += d.grad[k] * y[k];
        weighted += d.grad[k] / x[k] * y[k] * y[k];
        for l in 0..n {
            quad += d.hess[(k, l)] * y[k] * y[l];
        }
    }
    quad + 2.0 * weighted - 2.0 * lin * lin / d.value
}

/// Worst pairwise values of
/// `(ḟᵏ−ḟˡ)/(κₖ−κₗ) + ḟᵏ/κₗ + ḟˡ/κₖ` and `(ḟᵏκₖ² − ḟˡκₗ²)(κₖ − κₗ)`.
pub fn pairwise_ic(f: &SpeedFunction, kappa: &CurvatureVector) -> Result<(f64, f64)> {
    let d = f.derivs(kappa)?;
    let x = kappa.as_slice();
    let n = x.len();
    let mut first = f64::INFINITY;
    let mut second = f64::INFINITY;
    for k in 0..n {
        for l in (k + 1)..n {
            let dd = d.divided_difference(x, k, l);
            first = first.min(dd + d.grad[k] / x[l] + d.grad[l] / x[k]);
            second = second.min((d.grad[k] * x[k] * x[k] - d.grad[l] * x[l] * x[l]) * (x[k] - x[l]));
        }
    }
    Ok((first, second))
}

/// `Σ ḟᵏκₖ² − f² / f(1,…,1)`.
pub fn ic_lower_bound(f: &SpeedFunction, kappa: &CurvatureVector) -> Result<f64> {
    let d = f.derivs(kappa)?;
    let x = kappa.as_slice();
    let s: f64 = (0..x.len()).map(|k| d.grad[k] * x[k] * x[k]).sum();
    Ok(s - d.value * d.value / f.normalization())
}

/// `(Σ ḟⁱ − f(1,…,1), f(1,…,1)/n · Σ κᵢ − f)`.
pub fn concave_bounds(f: &SpeedFunction, kappa: &CurvatureVector) -> Result<(f64, f64)> {
    let d = f.derivs(kappa)?;
    let c = f.normalization();
    let n = kappa.dim() as f64;
    let trace: f64 = kappa.as_slice().iter().sum();
    Ok((d.grad.sum() - c, c / n * trace - d.value))
}

/// Worst pairwise value of `(ḟᵏκₖ − ḟˡκₗ)(κₖ − κₗ)`.
pub fn fk_kappa_monotone(f: &SpeedFunction, kappa: &CurvatureVector) -> Result<f64> {
    let d = f.derivs(kappa)?;
    let x = kappa.as_slice();
    let n = x.len();
    let mut worst = f64::INFINITY;
    for k in 0..n {
        for l in (k + 1)..n {
            worst = worst.min((d.grad[k] * x[k] - d.grad[l] * x[l]) * (x[k] - x[l]));
        }
    }
    Ok(worst)
}

/// The most negative margin found by a seeded random search, with its witness.
#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    pub kappa: Vec<f64>,
    pub y: Vec<f64>,
    pub margin: f64,
}

/// Samples `samples` points `(κ, y)` and keeps the one with the smallest
/// margin.
pub fn worst_sample<M>(sampler: &mut RandomSampler, samples: usize, mut margin: M) -> Result<Witness>
where
    M: FnMut(&CurvatureVector, &[f64]) -> Result<f64>,
{
    let mut worst = Witness {
        kappa: Vec::new(),
        y: Vec::new(),
        margin: f64::INFINITY,
    };
    for _ in 0..samples {
        let kappa = sampler.kappa();
        let y = sampler.direction();
        let m = margin(&kappa, &y)?;
        if m < worst.margin {
            worst = Witness {
                kappa: kappa.as_slice().to_vec(),
                y,
                margin: m,
            };
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cv(v: &[f64]) -> CurvatureVector {
        CurvatureVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn geometric_mean_saturates_log_convexity() {
        let f = SpeedFunction::elem_mean_root(4, 4).unwrap();
        let mut s = RandomSampler::new(4, 3);
        for _ in 0..500 {
            let m = log_convexity(&f, &s.kappa(), &s.direction()).unwrap();
            assert!(m.abs() < 1e-9, "{m}");
        }
    }

    #[test]
    fn linear_case_cauchy_schwarz_equality() {
        let f = SpeedFunction::power_mean(3, 1.0).unwrap();
        let m = inverse_concavity(&f, &cv(&[1.0, 1.0, 1.0]), &[1.0, 1.0, 1.0]).unwrap();
        assert!(m.abs() < 1e-14);
        let m = inverse_concavity(&f, &cv(&[1.0, 2.0, 3.0]), &[1.0, -1.0, 0.5]).unwrap();
        let expected = 2.0 * (1.0 + 0.5 + 0.25 / 3.0) - 2.0 * 0.25 / 6.0;
        assert!((m - expected).abs() < 1e-13);
    }

    #[test]
    fn ic_lower_bound_linear_pair() {
        let f = SpeedFunction::power_mean(2, 1.0).unwrap();
        let m = ic_lower_bound(&f, &cv(&[1.0, 2.0])).unwrap();
        assert!((m - 0.5).abs() < 1e-14);
    }

    #[test]
    fn concave_bounds_geometric_mean_hand_expansion() {
        let f = SpeedFunction::elem_mean_root(2, 2).unwrap();
        let (a, b) = concave_bounds(&f, &cv(&[1.0, 4.0])).unwrap();
        assert!((a - 0.25).abs() < 1e-14, "Σḟ = 1.25");
        assert!((b - 0.5).abs() < 1e-14);
        let h1 = SpeedFunction::power_mean(3, 1.0).unwrap();
        let (a, b) = concave_bounds(&h1, &cv(&[0.3, 2.0, 7.0])).unwrap();
        assert!(a.abs() < 1e-14 && b.abs() < 1e-14);
    }

    #[test]
    fn pairwise_ic_repeated_entries_are_finite() {
        let f = SpeedFunction::quotient(3, 2, 1).unwrap();
        let (a, b) = pairwise_ic(&f, &cv(&[2.0, 2.0, 5.0])).unwrap();
        assert!(a.is_finite() && b.is_finite());
        assert!(a >= -1e-10 && b >= -1e-10);
    }

    #[test]
    fn pairwise_second_margin_for_linear() {
        let f = SpeedFunction::power_mean(2, 1.0).unwrap();
        let (_, b) = pairwise_ic(&f, &cv(&[1.0, 3.0])).unwrap();
        assert_eq!(b, (1.0 - 9.0) * (1.0 - 3.0));
    }

    #[test]
    fn fk_kappa_isotropic_is_zero() {
        let f = SpeedFunction::elem_mean_root(3, 2).unwrap();
        assert!(fk_kappa_monotone(&f, &cv(&[2.0, 2.0, 2.0])).unwrap().abs() < 1e-15);
        let g = SpeedFunction::elem_mean_root(3, 3).unwrap();
        assert!(fk_kappa_monotone(&g, &cv(&[0.2, 2.0, 9.0])).unwrap().abs() < 1e-13);
    }

    #[test]
    fn structural_conditions_for_the_mean() {
        let f = SpeedFunction::power_mean(3, 1.0).unwrap();
        let mut s = RandomSampler::new(3, 11);
        let r = structural_conditions(&f, &mut s, 200).unwrap();
        assert_eq!(r.min_grad, 1.0);
        assert!(r.passed());
    }

    #[test]
    fn direction_length_is_checked() {
        let f = SpeedFunction::power_mean(3, 1.0).unwrap();
        assert!(log_convexity(&f, &cv(&[1.0, 2.0, 3.0]), &[1.0]).is_err());
    }
}
