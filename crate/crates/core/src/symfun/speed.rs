use std::fmt;

use nalgebra::{DMatrix, DVector};

use super::elementary::{binomial, elementary_symmetric, sigma_with_derivatives};
use super::{CurvatureVector, DerivBundle};
use crate::error::{Error, Result};

/// Building blocks of the speed-function catalog.
#[derive(Debug, Clone, PartialEq)]
pub enum SpeedKind {
    /// `E_k^{1/k}` with `E_k = σ_k / C(n, k)`.
    ElemMeanRoot { k: usize },
    /// `(E_k / E_l)^{1/(k-l)}`, `0 ≤ l < k ≤ n`.
    Quotient { k: usize, l: usize },
    /// `H_r = (Σ κᵢ^r)^{1/r}`, `r ≠ 0`.
    PowerMean { r: f64 },
    /// `Σ wᵢ fᵢ` with positive weights.
    ConvexCombo(Vec<(f64, SpeedFunction)>),
    /// `Π fᵢ^{wᵢ}` with positive weights summing to one.
    GeoMean(Vec<(f64, SpeedFunction)>),
    /// `f_*(x) = 1 / f(1/x₁, ..., 1/xₙ)`.
    Dual(Box<SpeedFunction>),
}

/// Structural properties a catalog member is known to have on `Γ₊`.
///
/// `log_exp_convex` is convexity of `x ↦ log f(eˣ)`, which is equivalent to
/// the quadratic-form condition tested by
/// [`checks::log_convexity`](super::checks::log_convexity). `log_exp_concave` is the
/// reverse property; it is tracked because duality swaps the two.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Traits {
    pub concave: bool,
    pub inverse_concave: bool,
    pub log_exp_convex: bool,
    pub log_exp_concave: bool,
}

impl Traits {
    fn all(parts: &[(f64, SpeedFunction)]) -> Self {
        let every = |p: fn(&Traits) -> bool| parts.iter().all(|(_, f)| p(&f.traits));
        Self {
            concave: every(|t| t.concave),
            inverse_concave: every(|t| t.inverse_concave),
            log_exp_convex: every(|t| t.log_exp_convex),
            log_exp_concave: every(|t| t.log_exp_concave),
        }
    }

    fn dual(self) -> Self {
        Self {
            concave: self.inverse_concave,
            inverse_concave: self.concave,
            log_exp_convex: self.log_exp_concave,
            log_exp_concave: self.log_exp_convex,
        }
    }
}

/// A symmetric speed function of `n` principal curvatures, positive,
/// increasing in each argument and homogeneous of degree one on `Γ₊`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeedFunction {
    kind: SpeedKind,
    n: usize,
    normalization: f64,
    traits: Traits,
}

type LogJet = (f64, DVector<f64>, DMatrix<f64>);

impl SpeedFunction {
    fn build(kind: SpeedKind, n: usize, traits: Traits) -> Self {
        let mut f = Self {
            kind,
            n,
            normalization: f64::NAN,
            traits,
        };
        f.normalization = f.value_at(&vec![1.0; n]);
        f
    }

    fn check_dim(n: usize) -> Result<()> {
        if n < 2 {
            return Err(Error::Construction(format!("dimension n = {n} must be at least 2")));
        }
        Ok(())
    }

    /// `E_k^{1/k}`.
    pub fn elem_mean_root(n: usize, k: usize) -> Result<Self> {
        Self::check_dim(n)?;
        if k == 0 || k > n {
            return Err(Error::Construction(format!("ek_root needs 1 <= k <= n, got k = {k}, n = {n}")));
        }
        let traits = Traits {
            concave: true,
            inverse_concave: true,
            log_exp_convex: true,
            log_exp_concave: k == n,
        };
        Ok(Self::build(SpeedKind::ElemMeanRoot { k }, n, traits))
    }

    /// `(E_k/E_l)^{1/(k-l)}`.
    pub fn quotient(n: usize, k: usize, l: usize) -> Result<Self> {
        Self::check_dim(n)?;
        if l >= k || k > n {
            return Err(Error::Construction(format!(
                "quotient needs 0 <= l < k <= n, got k = {k}, l = {l}, n = {n}"
            )));
        }
        let traits = Traits {
            concave: true,
            inverse_concave: true,
            log_exp_convex: l == 0,
            log_exp_concave: k == n,
        };
        Ok(Self::build(SpeedKind::Quotient { k, l }, n, traits))
    }

    /// `H_r = (Σ κᵢ^r)^{1/r}`.
    pub fn power_mean(n: usize, r: f64) -> Result<Self> {
        Self::check_dim(n)?;
        if !r.is_finite() || r == 0.0 {
            return Err(Error::Construction(format!("power_mean exponent must be finite and nonzero, got {r}")));
        }
        let traits = Traits {
            concave: r <= 1.0,
            inverse_concave: r >= -1.0,
            log_exp_convex: r > 0.0,
            log_exp_concave: r < 0.0,
        };
        Ok(Self::build(SpeedKind::PowerMean { r }, n, traits))
    }

    fn check_parts(parts: &[(f64, SpeedFunction)], what: &str) -> Result<usize> {
        let Some((_, first)) = parts.first() else {
            return Err(Error::Construction(format!("{what} needs at least one part")));
        };
        let n = first.n;
        for (w, f) in parts {
            if !(w.is_finite() && *w > 0.0) {
                return Err(Error::Construction(format!("{what} weights must be positive, got {w}")));
            }
            if f.n != n {
                return Err(Error::Dimension { expected: n, got: f.n });
            }
        }
        Ok(n)
    }

    /// `Σ wᵢ fᵢ` with positive weights (not required to sum to one).
    pub fn combo(parts: Vec<(f64, SpeedFunction)>) -> Result<Self> {
        let n = Self::check_parts(&parts, "combo")?;
        let mut traits = Traits::all(&parts);
        traits.log_exp_concave = parts.len() == 1 && parts[0].1.traits.log_exp_concave;
        Ok(Self::build(SpeedKind::ConvexCombo(parts), n, traits))
    }

    /// `Π fᵢ^{wᵢ}`; weights must sum to one so the result stays homogeneous of degree one.
    pub fn geomean(parts: Vec<(f64, SpeedFunction)>) -> Result<Self> {
        let n = Self::check_parts(&parts, "geomean")?;
        let total: f64 = parts.iter().map(|(w, _)| w).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Construction(format!("geomean weights must sum to 1, got {total}")));
        }
        let traits = Traits::all(&parts);
        Ok(Self::build(SpeedKind::GeoMean(parts), n, traits))
    }

    /// The dual function `f_*(x) = 1/f(1/x)`.
    pub fn dual(inner: SpeedFunction) -> Self {
        let n = inner.n;
        let traits = inner.traits.dual();
        Self::build(SpeedKind::Dual(Box::new(inner)), n, traits)
    }

    /// `c·f` for `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::combo(vec![(c, self.clone())])
    }

    /// `f / f(1, ..., 1)`, so that the result is one at the unit vector.
    pub fn normalized(&self) -> Self {
        Self::combo(vec![(1.0 / self.normalization, self.clone())]).expect("normalization is positive")
    }

    /// A representative list for dimension `n`: every `E_k^{1/k}`, every
    /// quotient with `l ≥ 1`, power means for `r ∈ {−2, −1, −1/2, 1/2, 1, 2}`,
    /// one combination, one geometric mean and three duals.
    pub fn catalog(n: usize) -> Result<Vec<Self>> {
        let mut out = Vec::new();
        for k in 1..=n {
            out.push(Self::elem_mean_root(n, k)?);
        }
        for k in 2..=n {
            for l in 1..k {
                out.push(Self::quotient(n, k, l)?);
            }
        }
        for r in [-2.0, -1.0, -0.5, 0.5, 1.0, 2.0] {
            out.push(Self::power_mean(n, r)?);
        }
        out.push(Self::combo(vec![
            (0.3, Self::elem_mean_root(n, 2)?),
            (0.7, Self::power_mean(n, -1.0)?),
        ])?);
        out.push(Self::geomean(vec![
            (0.5, Self::quotient(n, 2, 1)?),
            (0.5, Self::power_mean(n, 1.0)?),
        ])?);
        out.push(Self::dual(Self::elem_mean_root(n, 2)?));
        out.push(Self::dual(Self::quotient(n, 2, 1)?));
        out.push(Self::dual(Self::power_mean(n, 0.5)?));
        Ok(out)
    }

    pub fn kind(&self) -> &SpeedKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// `f(1, ..., 1)`.
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    pub fn traits(&self) -> Traits {
        self.traits
    }

    fn check_point(&self, kappa: &CurvatureVector) -> Result<()> {
        if kappa.dim() != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                got: kappa.dim(),
            });
        }
        Ok(())
    }

    /// `f(κ)`.
    pub fn eval(&self, kappa: &CurvatureVector) -> Result<f64> {
        self.check_point(kappa)?;
        Ok(self.value_at(kappa.as_slice()))
    }

    /// Value, gradient and Hessian at `κ`.
    pub fn derivs(&self, kappa: &CurvatureVector) -> Result<DerivBundle> {
        self.check_point(kappa)?;
        let x = kappa.as_slice();
        let mut bundle = self.jet(x);
        bundle.value = self.value_at(x);
        bundle.hess = (&bundle.hess + bundle.hess.transpose()) * 0.5;
        Ok(bundle)
    }

    /// Value-only evaluation on a slice that the caller has already checked.
    pub(crate) fn value_at(&self, x: &[f64]) -> f64 {
        match &self.kind {
            SpeedKind::ElemMeanRoot { k } => {
                let e = elementary_symmetric(x)[*k] / binomial(x.len(), *k);
                e.powf(1.0 / *k as f64)
            }
            SpeedKind::Quotient { k, l } => {
                let sigma = elementary_symmetric(x);
                let n = x.len();
                let ek = sigma[*k] / binomial(n, *k);
                let el = sigma[*l] / binomial(n, *l);
                (ek / el).powf(1.0 / (k - l) as f64)
            }
            SpeedKind::PowerMean { r } => x.iter().map(|v| v.powf(*r)).sum::<f64>().powf(1.0 / r),
            SpeedKind::ConvexCombo(parts) => parts.iter().map(|(w, f)| w * f.value_at(x)).sum(),
            SpeedKind::GeoMean(parts) => parts
                .iter()
                .map(|(w, f)| w * f.value_at(x).ln())
                .sum::<f64>()
                .exp(),
            SpeedKind::Dual(inner) => {
                let y: Vec<f64> = x.iter().map(|v| 1.0 / v).collect();
                1.0 / inner.value_at(&y)
            }
        }
    }

    fn jet(&self, x: &[f64]) -> DerivBundle {
        match &self.kind {
            SpeedKind::ConvexCombo(parts) => {
                let n = x.len();
                let mut out = DerivBundle {
                    value: 0.0,
                    grad: DVector::zeros(n),
                    hess: DMatrix::zeros(n, n),
                };
                for (w, f) in parts {
                    let b = f.jet(x);
                    out.value += w * b.value;
                    out.grad += b.grad * *w;
                    out.hess += b.hess * *w;
                }
                out
            }
            SpeedKind::PowerMean { r } => {
                // ḟⁱ = (κᵢ/f)^{r-1}, f̈ⁱʲ = (r-1)/f·(δᵢⱼ(κᵢ/f)^{r-2} − ḟⁱḟʲ)
                let n = x.len();
                let value = self.value_at(x);
                let grad = DVector::from_iterator(n, x.iter().map(|v| (v / value).powf(r - 1.0)));
                let mut hess = -(&grad * grad.transpose());
                for i in 0..n {
                    hess[(i, i)] += (x[i] / value).powf(r - 2.0);
                }
                hess *= (r - 1.0) / value;
                DerivBundle { value, grad, hess }
            }
            _ => {
                let (l, gl, hl) = self.log_jet(x);
                let value = l.exp();
                let hess = (&hl + &gl * gl.transpose()) * value;
                DerivBundle {
                    value,
                    grad: gl * value,
                    hess,
                }
            }
        }
    }

    /// `log f` with its gradient and Hessian.
    fn log_jet(&self, x: &[f64]) -> LogJet {
        let n = x.len();
        match &self.kind {
            SpeedKind::ElemMeanRoot { k } => {
                let (l, g, h) = log_sigma_jet(x, *k);
                let kf = *k as f64;
                (l / kf, g / kf, h / kf)
            }
            SpeedKind::Quotient { k, l } => {
                let (lk, gk, hk) = log_sigma_jet(x, *k);
                let (ll, gl, hl) = log_sigma_jet(x, *l);
                let d = (k - l) as f64;
                ((lk - ll) / d, (gk - gl) / d, (hk - hl) / d)
            }
            SpeedKind::PowerMean { r } => {
                let s: f64 = x.iter().map(|v| v.powf(*r)).sum();
                let p = DVector::from_iterator(n, x.iter().map(|v| v.powf(r - 1.0) / s));
                let mut h = -(&p * p.transpose()) * *r;
                for i in 0..n {
                    h[(i, i)] += (r - 1.0) * x[i].powf(r - 2.0) / s;
                }
                (s.ln() / r, p, h)
            }
            SpeedKind::GeoMean(parts) => {
                let mut l = 0.0;
                let mut g = DVector::zeros(n);
                let mut h = DMatrix::zeros(n, n);
                for (w, f) in parts {
                    let (lf, gf, hf) = f.log_jet(x);
                    l += w * lf;
                    g += gf * *w;
                    h += hf * *w;
                }
                (l, g, h)
            }
            SpeedKind::Dual(inner) => {
                let y: Vec<f64> = x.iter().map(|v| 1.0 / v).collect();
                let (lf, gf, hf) = inner.log_jet(&y);
                let g = DVector::from_fn(n, |i, _| gf[i] * y[i] * y[i]);
                let h = DMatrix::from_fn(n, n, |i, j| {
                    let mut v = -y[i] * y[i] * y[j] * y[j] * hf[(i, j)];
                    if i == j {
                        v -= 2.0 * y[i] * y[i] * y[i] * gf[i];
                    }
                    v
                });
                (-lf, g, h)
            }
            SpeedKind::ConvexCombo(_) => {
                let b = self.jet(x);
                let (g, h) = b.log_derivatives();
                (b.value.ln(), g, h)
            }
        }
    }
}

/// `log E_k` (up to the binomial constant, which is included) and its derivatives.
fn log_sigma_jet(x: &[f64], k: usize) -> LogJet {
    let n = x.len();
    if k == 0 {
        return (0.0, DVector::zeros(n), DMatrix::zeros(n, n));
    }
    let (s, g, h) = sigma_with_derivatives(x, k);
    let g = DVector::from_vec(g) / s;
    let h = DMatrix::from_fn(n, n, |i, j| h[i][j] / s) - &g * g.transpose();
    ((s / binomial(n, k)).ln(), g, h)
}

fn is_leaf(f: &SpeedFunction) -> bool {
    matches!(
        f.kind,
        SpeedKind::ElemMeanRoot { .. } | SpeedKind::Quotient { .. } | SpeedKind::PowerMean { .. }
    )
}

fn write_part(out: &mut fmt::Formatter<'_>, w: f64, f: &SpeedFunction) -> fmt::Result {
    if is_leaf(f) {
        write!(out, "{w}*{f}")
    } else {
        write!(out, "{w}*({f})")
    }
}

/// Renders the spec-string form accepted by [`SpeedFunction::parse`].
impl fmt::Display for SpeedFunction {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            SpeedKind::ElemMeanRoot { k } => write!(out, "ek_root:{k}"),
            SpeedKind::Quotient { k, l } => write!(out, "quotient:{k},{l}"),
            SpeedKind::PowerMean { r } => write!(out, "power_mean:{r}"),
            SpeedKind::ConvexCombo(parts) | SpeedKind::GeoMean(parts) => {
                let (head, sep) = if matches!(self.kind, SpeedKind::ConvexCombo(_)) {
                    ("combo:", '+')
                } else {
                    ("geomean:", ',')
                };
                out.write_str(head)?;
                for (i, (w, f)) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(out, "{sep}")?;
                    }
                    write_part(out, *w, f)?;
                }
                Ok(())
            }
            SpeedKind::Dual(inner) => write!(out, "dual:{inner}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cv(v: &[f64]) -> CurvatureVector {
        CurvatureVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn unit_vector_values() {
        for k in 1..=3 {
            let f = SpeedFunction::elem_mean_root(3, k).unwrap();
            assert!((f.normalization() - 1.0).abs() < 1e-15);
        }
        let h = SpeedFunction::power_mean(4, 2.0).unwrap();
        assert!((h.normalization() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn sigma2_through_a_scaled_root() {
        // σ₂ = 3·E₂ for n = 3, so (E₂)^{1/2} at (1,2,3) is sqrt(11/3).
        let f = SpeedFunction::elem_mean_root(3, 2).unwrap();
        let v = f.eval(&cv(&[1.0, 2.0, 3.0])).unwrap();
        assert!((v * v * 3.0 - 11.0).abs() < 1e-13);
    }

    #[test]
    fn invalid_constructions() {
        assert!(SpeedFunction::quotient(3, 1, 1).is_err());
        assert!(SpeedFunction::quotient(3, 1, 2).is_err());
        assert!(SpeedFunction::quotient(3, 4, 1).is_err());
        assert!(SpeedFunction::elem_mean_root(3, 0).is_err());
        assert!(SpeedFunction::elem_mean_root(1, 1).is_err());
        assert!(SpeedFunction::power_mean(3, 0.0).is_err());
        let a = SpeedFunction::elem_mean_root(3, 1).unwrap();
        let b = SpeedFunction::elem_mean_root(2, 1).unwrap();
        assert!(SpeedFunction::combo(vec![(0.5, a.clone()), (0.5, b)]).is_err());
        assert!(SpeedFunction::geomean(vec![(0.5, a.clone()), (0.4, a.clone())]).is_err());
        assert!(SpeedFunction::combo(vec![(-1.0, a)]).is_err());
    }

    #[test]
    fn wrong_dimension_is_rejected() {
        let f = SpeedFunction::elem_mean_root(3, 2).unwrap();
        assert!(matches!(
            f.eval(&cv(&[1.0, 2.0])),
            Err(Error::Dimension { expected: 3, got: 2 })
        ));
    }

    #[test]
    fn dual_swaps_traits() {
        let h = SpeedFunction::power_mean(3, -2.0).unwrap();
        assert!(!h.traits().inverse_concave);
        assert!(h.traits().concave);
        let d = SpeedFunction::dual(h);
        assert!(d.traits().inverse_concave);
        assert!(!d.traits().concave);
        assert!(d.traits().log_exp_convex);
    }

    #[test]
    fn normalized_is_one_at_unit_vector() {
        let f = SpeedFunction::power_mean(5, 0.5).unwrap().normalized();
        assert!((f.normalization() - 1.0).abs() < 1e-14);
    }
}
