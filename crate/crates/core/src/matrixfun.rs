//! Speed functions lifted to symmetric matrices.
//!
//! `F(A) = f(κ(A))` where `κ(A)` are the eigenvalues of `A`. In an eigenbasis
//! of `A` the first derivative is `diag(ḟⁱ)` and the second derivative in a
//! direction `B` is
//!
//! ```text
//! Σᵢₖ f̈ⁱᵏ BᵢᵢBₖₖ + 2 Σ_{i>k} (ḟⁱ − ḟᵏ)/(κᵢ − κₖ) Bᵢₖ²
//! ```
//!
//! with the divided difference replaced by its limit at (nearly) repeated
//! eigenvalues.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::symfun::{CurvatureVector, DerivBundle, SpeedFunction};

/// Relative tolerance for the symmetry check on construction.
const SYMMETRY_TOL: f64 = 1e-14;

/// Eigenvalues ascending, eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub values: DVector<f64>,
    pub vectors: DMatrix<f64>,
}

/// A real symmetric matrix with a lazily computed, cached spectrum.
#[derive(Debug)]
pub struct SymMatrix {
    entries: DMatrix<f64>,
    spectrum: OnceLock<Spectrum>,
}

impl Clone for SymMatrix {
    fn clone(&self) -> Self {
        Self {
            entries: self.entries.clone(),
            spectrum: self.spectrum.clone(),
        }
    }
}

impl SymMatrix {
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::Dimension {
                expected: entries.nrows(),
                got: entries.ncols(),
            });
        }
        let scale = entries.amax().max(f64::MIN_POSITIVE);
        let asym = (&entries - entries.transpose()).amax();
        if asym > SYMMETRY_TOL * scale {
            return Err(Error::Construction(format!("matrix is not symmetric (defect {asym:e})")));
        }
        // Store the exact symmetric part.
        let entries = (&entries + entries.transpose()) * 0.5;
        Ok(Self {
            entries,
            spectrum: OnceLock::new(),
        })
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(d))).expect("diagonal is symmetric")
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![1.0; n])
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// Spectral data, computed on first use.
    ///
    /// Eigenvalues are sorted ascending; each eigenvector is signed so that its
    /// largest-magnitude entry is positive.
    pub fn spectrum(&self) -> &Spectrum {
        self.spectrum.get_or_init(|| {
            let eig = SymmetricEigen::new(self.entries.clone());
            let n = self.dim();
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
            let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
            let mut vectors = DMatrix::zeros(n, n);
            for (col, &i) in order.iter().enumerate() {
                let mut v = eig.eigenvectors.column(i).into_owned();
                let pivot = v.iamax();
                if v[pivot] < 0.0 {
                    v = -v;
                }
                vectors.set_column(col, &v);
            }
            Spectrum { values, vectors }
        })
    }

    /// Eigenvalues as a curvature vector; fails if any is not strictly positive.
    pub fn curvatures(&self) -> Result<CurvatureVector> {
        CurvatureVector::new(self.spectrum().values.iter().copied().collect())
    }

    pub fn inverse(&self) -> Result<SymMatrix> {
        let s = self.spectrum();
        if let Some((index, &value)) = s.values.iter().enumerate().find(|(_, v)| **v <= 0.0) {
            return Err(Error::Domain { index, value });
        }
        let inv = &s.vectors * DMatrix::from_diagonal(&s.values.map(|v| 1.0 / v)) * s.vectors.transpose();
        SymMatrix::new((&inv + inv.transpose()) * 0.5)
    }

    /// `A + t·B`.
    pub fn add_scaled(&self, t: f64, b: &SymMatrix) -> SymMatrix {
        SymMatrix::new(&self.entries + &b.entries * t).expect("sum of symmetric matrices")
    }

    /// Frobenius pairing `⟨A, B⟩ = tr(AB)`.
    pub fn dot(&self, other: &SymMatrix) -> f64 {
        self.entries.dot(&other.entries)
    }
}

fn derivs_at(f: &SpeedFunction, a: &SymMatrix) -> Result<(CurvatureVector, DerivBundle)> {
    let kappa = a.curvatures()?;
    let d = f.derivs(&kappa)?;
    Ok((kappa, d))
}

/// `F(A) = f(κ(A))`.
pub fn f_of(f: &SpeedFunction, a: &SymMatrix) -> Result<f64> {
    f.eval(&a.curvatures()?)
}

/// `Ḟ(A)`, the gradient of `F` with respect to the matrix entries.
pub fn d_f(f: &SpeedFunction, a: &SymMatrix) -> Result<SymMatrix> {
    let (_, d) = derivs_at(f, a)?;
    let q = &a.spectrum().vectors;
    let m = q * DMatrix::from_diagonal(&d.grad) * q.transpose();
    SymMatrix::new((&m + m.transpose()) * 0.5)
}

/// `d²/dt² F(A + tB)` at `t = 0`.
pub fn d2f_action(f: &SpeedFunction, a: &SymMatrix, b: &SymMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::Dimension {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    let (kappa, d) = derivs_at(f, a)?;
    let q = &a.spectrum().vectors;
    let bt = q.transpose() * b.entries() * q;
    let x = kappa.as_slice();
    let n = x.len();
    let mut total = 0.0;
    for i in 0..n {
        for k in 0..n {
            total += d.hess[(i, k)] * bt[(i, i)] * bt[(k, k)];
        }
        for k in 0..i {
            total += 2.0 * d.divided_difference(x, i, k) * bt[(i, k)] * bt[(i, k)];
        }
    }
    Ok(total)
}

/// Matrix form of the inverse-concavity inequality:
/// `D²F(A)[B,B] + 2 tr(Ḟ B A⁻¹ B) − 2 F⁻¹ ⟨Ḟ, B⟩²`.
pub fn inverse_concavity_margin(f: &SpeedFunction, a: &SymMatrix, b: &SymMatrix) -> Result<f64> {
    let second = d2f_action(f, a, b)?;
    let df = d_f(f, a)?;
    let value = f_of(f, a)?;
    let a_inv = a.inverse()?;
    let cross = (df.entries() * b.entries() * a_inv.entries() * b.entries()).trace();
    let lin = df.dot(b);
    Ok(second + 2.0 * cross - 2.0 * lin * lin / value)
}
