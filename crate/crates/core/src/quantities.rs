//! Pointwise maximum-principle quantities on discrete hypersurfaces.
//!
//! With `b = h⁻¹` (eigenvalues `μᵢ = 1/κᵢ`) and `G(b) = |b|²/tr b`:
//!
//! ```text
//! Z = F^α G − (α−1)/α · Φ
//! W = F^α / κ_min − (α−1)/α · Φ
//! T = F^α b − (α−1)/α · Φ g − β g
//! ```
//!
//! `β*`, the smallest `β` with `T ≤ 0` everywhere, equals `max W`; the two
//! are computed along independent routes so they can be compared.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hypersurface::{Ambient, DiscreteHypersurface};
use crate::symfun::elementary::elementary_symmetric;
use crate::symfun::{CurvatureVector, SpeedFunction};

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha.is_finite() && alpha >= 1.0) {
        return Err(Error::Construction(format!("alpha must be >= 1, got {alpha}")));
    }
    Ok(())
}

fn phi_coefficient(alpha: f64) -> f64 {
    (alpha - 1.0) / alpha
}

/// `G = Σκᵢ⁻² / Σκᵢ⁻¹`.
pub fn g_value(kappa: &CurvatureVector) -> f64 {
    let (sq, tr) = kappa
        .as_slice()
        .iter()
        .fold((0.0, 0.0), |(sq, tr), k| (sq + 1.0 / (k * k), tr + 1.0 / k));
    sq / tr
}

/// `σ₁(b) − 2σ₂(b)/σ₁(b)`, the same number as [`g_value`] written as a
/// difference of a linear and a concave function of `b`.
pub fn g_decomposition(kappa: &CurvatureVector) -> f64 {
    let mu = kappa.reciprocal();
    let sigma = elementary_symmetric(mu.as_slice());
    sigma[1] - 2.0 * sigma[2] / sigma[1]
}

/// Diagonal partials `∂G/∂bⁱⁱ = (2μᵢ tr b − |b|²)/(tr b)²` in the eigenbasis.
pub fn g_partials(kappa: &CurvatureVector) -> Vec<f64> {
    let mu: Vec<f64> = kappa.as_slice().iter().map(|k| 1.0 / k).collect();
    let tr: f64 = mu.iter().sum();
    let sq: f64 = mu.iter().map(|m| m * m).sum();
    mu.iter().map(|m| (2.0 * m * tr - sq) / (tr * tr)).collect()
}

/// `F G − Σ ḟⁱ`, computed directly and through the pairwise sum
/// `(1/tr b) Σ_{i>j} κᵢ⁻²κⱼ⁻² (ḟⁱκᵢ² − ḟʲκⱼ²)(κᵢ − κⱼ)`.
pub fn fg_minus_trace(kappa: &CurvatureVector, f: &SpeedFunction) -> Result<(f64, f64)> {
    let d = f.derivs(kappa)?;
    let x = kappa.as_slice();
    let direct = d.value * g_value(kappa) - d.grad.sum();
    let tr_b: f64 = x.iter().map(|k| 1.0 / k).sum();
    let mut pairwise = 0.0;
    for i in 0..x.len() {
        for j in 0..i {
            let a = d.grad[i] * x[i] * x[i] - d.grad[j] * x[j] * x[j];
            pairwise += a * (x[i] - x[j]) / (x[i] * x[i] * x[j] * x[j]);
        }
    }
    Ok((direct, pairwise / tr_b))
}

/// The zeroth-order part `L₁` of the operator applied to `Z`:
///
/// ```text
/// λ'(α−1)F^{α−1}(FG − Σḟⁱ) + (α−1)F^{2α}(1 − Σᵢ∂G/∂bⁱⁱ)
///   + ε α F^{2α−1}(F Σⱼ ∂G/∂bʲʲ μⱼ² − G Σᵢ ḟⁱ)
/// ```
///
/// evaluated at the radial coordinate `r` of `ambient`. Only `ε ∈ {0, 1}` is
/// accepted.
pub fn l1_margin(kappa: &CurvatureVector, f: &SpeedFunction, alpha: f64, ambient: Ambient, r: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if ambient == Ambient::Hyperbolic {
        return Err(Error::Ambient("L1 is only defined for epsilon = 0 or 1".into()));
    }
    let d = f.derivs(kappa)?;
    let big_f = d.value;
    let g = g_value(kappa);
    let gp = g_partials(kappa);
    let trace_fdot = d.grad.sum();
    let mu_term: f64 = gp
        .iter()
        .zip(kappa.as_slice())
        .map(|(p, k)| p / (k * k))
        .sum();
    let lp = ambient.lambda_prime(r);
    let first = lp * (alpha - 1.0) * big_f.powf(alpha - 1.0) * (big_f * g - trace_fdot);
    let second = (alpha - 1.0) * big_f.powf(2.0 * alpha) * (1.0 - gp.iter().sum::<f64>());
    let third = ambient.epsilon() * alpha * big_f.powf(2.0 * alpha - 1.0) * (big_f * mu_term - g * trace_fdot);
    Ok(first + second + third)
}

/// `f(κ)G(κ) − 1` for `f` normalised to one at the unit vector.
pub fn normalized_z_margin(kappa: &CurvatureVector, f: &SpeedFunction) -> Result<f64> {
    let value = f.eval(kappa)? / f.normalization();
    Ok(value * g_value(kappa) - 1.0)
}

/// The same margin written as `g(μ)/f_*(μ) − 1` with `μ = 1/κ`,
/// `g(μ) = Σμᵢ²/Σμᵢ` and `f_*` the normalised dual.
pub fn normalized_z_margin_dual(kappa: &CurvatureVector, f: &SpeedFunction) -> Result<f64> {
    let mu = kappa.reciprocal();
    let dual = SpeedFunction::dual(f.normalized());
    let m = mu.as_slice();
    let g = m.iter().map(|v| v * v).sum::<f64>() / m.iter().sum::<f64>();
    Ok(g / dual.eval(&mu)? - 1.0)
}

/// Metadata recorded with every field.
#[derive(Debug, Clone, Serialize)]
pub struct FieldMeta {
    pub quantity: String,
    pub f: String,
    pub alpha: f64,
    pub ambient: Ambient,
}

/// One value per grid node.
#[derive(Debug, Clone, Serialize)]
pub struct QuantityField {
    pub meta: FieldMeta,
    pub values: Vec<f64>,
}

impl QuantityField {
    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Node of the maximum; the first one wins ties.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (j, v) in self.values.iter().enumerate() {
            if *v > self.values[best] {
                best = j;
            }
        }
        best
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn std_dev(&self) -> f64 {
        let mean = self.mean();
        let var = self.values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / self.values.len() as f64;
        var.sqrt()
    }
}

fn field<H, Q>(surface: &H, f: &SpeedFunction, alpha: f64, name: &str, mut per_node: Q) -> Result<QuantityField>
where
    H: DiscreteHypersurface,
    Q: FnMut(&CurvatureVector, f64, f64) -> f64,
{
    check_alpha(alpha)?;
    let c = phi_coefficient(alpha);
    let phi = surface.phi();
    let values = surface
        .curvatures()
        .iter()
        .zip(&phi)
        .map(|(kappa, p)| Ok(per_node(kappa, f.eval(kappa)?.powf(alpha), c * p)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(QuantityField {
        meta: FieldMeta {
            quantity: name.to_string(),
            f: f.to_string(),
            alpha,
            ambient: surface.ambient(),
        },
        values,
    })
}

/// `Z = F^α G − (α−1)/α Φ` at every node.
pub fn z_field<H: DiscreteHypersurface>(surface: &H, f: &SpeedFunction, alpha: f64) -> Result<QuantityField> {
    field(surface, f, alpha, "Z", |kappa, fa, cphi| fa * g_value(kappa) - cphi)
}

/// `W = F^α/κ_min − (α−1)/α Φ` at every node.
pub fn w_field<H: DiscreteHypersurface>(surface: &H, f: &SpeedFunction, alpha: f64) -> Result<QuantityField> {
    field(surface, f, alpha, "W", |kappa, fa, cphi| fa / kappa.min() - cphi)
}

/// Where `W` peaks, and how far from umbilic the surface is there.
#[derive(Debug, Clone, Serialize)]
pub struct WMaxDiagnostics {
    pub node: usize,
    pub theta: f64,
    pub value: f64,
    /// `κ_max/κ_min` at the node.
    pub anisotropy: f64,
}

pub fn w_max_diagnostics<H: DiscreteHypersurface>(surface: &H, w: &QuantityField) -> WMaxDiagnostics {
    let node = w.argmax();
    let kappa = &surface.curvatures()[node];
    WMaxDiagnostics {
        node,
        theta: surface.theta()[node],
        value: w.values[node],
        anisotropy: kappa.max() / kappa.min(),
    }
}

/// The normalising constant `β*` of the tensor `T` and where it is attained.
#[derive(Debug, Clone, Serialize)]
pub struct TNormalization {
    pub beta_star: f64,
    pub node: usize,
    /// Principal direction index at `node`; the lowest index wins ties.
    pub direction: usize,
}

/// `β* = max over nodes and principal directions of F^α/κᵢ − (α−1)/α Φ`,
/// scanned direction by direction.
pub fn t_normalization<H: DiscreteHypersurface>(surface: &H, f: &SpeedFunction, alpha: f64) -> Result<TNormalization> {
    check_alpha(alpha)?;
    let c = phi_coefficient(alpha);
    let phi = surface.phi();
    let mut best = TNormalization {
        beta_star: f64::NEG_INFINITY,
        node: 0,
        direction: 0,
    };
    for (j, kappa) in surface.curvatures().iter().enumerate() {
        let fa = f.eval(kappa)?.powf(alpha);
        for (i, k) in kappa.as_slice().iter().enumerate() {
            let v = fa / k - c * phi[j];
            if v > best.beta_star {
                best = TNormalization {
                    beta_star: v,
                    node: j,
                    direction: i,
                };
            }
        }
    }
    Ok(best)
}

/// Per-node rows of a quantity dump.
#[derive(Debug, Clone)]
pub struct QuantityTable {
    pub theta: Vec<f64>,
    pub kappa: Vec<CurvatureVector>,
    pub speed: Vec<f64>,
    pub z: QuantityField,
    pub w: QuantityField,
    /// Largest eigenvalue of `T` at `β = β*`, i.e. `W − β*`.
    pub t_max: Vec<f64>,
    pub beta: TNormalization,
}

impl QuantityTable {
    pub fn evaluate<H: DiscreteHypersurface>(surface: &H, f: &SpeedFunction, alpha: f64) -> Result<Self> {
        let z = z_field(surface, f, alpha)?;
        let w = w_field(surface, f, alpha)?;
        let beta = t_normalization(surface, f, alpha)?;
        let kappa = surface.curvatures();
        let speed = kappa.iter().map(|k| f.eval(k)).collect::<Result<Vec<_>>>()?;
        let t_max = w.values.iter().map(|v| v - beta.beta_star).collect();
        Ok(Self {
            theta: surface.theta().to_vec(),
            kappa,
            speed,
            z,
            w,
            t_max,
            beta,
        })
    }

    /// CSV with a commented header. `header` lines are written first, each
    /// prefixed with `# `; the footer compares `β*` with `max W`.
    pub fn to_csv(&self, header: &[String]) -> String {
        let mut out = String::new();
        for h in header {
            let _ = writeln!(out, "# {h}");
        }
        let n = self.kappa.first().map_or(0, |k| k.dim());
        out.push_str("theta");
        for i in 1..=n {
            let _ = write!(out, ",kappa_{i}");
        }
        out.push_str(",F,Z,W,Tmax\n");
        for j in 0..self.theta.len() {
            let _ = write!(out, "{}", self.theta[j]);
            for k in self.kappa[j].as_slice() {
                let _ = write!(out, ",{k}");
            }
            let _ = writeln!(
                out,
                ",{},{},{},{}",
                self.speed[j], self.z.values[j], self.w.values[j], self.t_max[j]
            );
        }
        let w_max = self.w.max();
        let _ = writeln!(
            out,
            "# beta_star={} max_W={} difference={:e} node={} direction={}",
            self.beta.beta_star,
            w_max,
            (self.beta.beta_star - w_max).abs(),
            self.beta.node,
            self.beta.direction
        );
        out
    }
}
