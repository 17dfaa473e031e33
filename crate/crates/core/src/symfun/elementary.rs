//! Elementary symmetric polynomials and their partial derivatives.
//!
//! All values come from the one-variable-at-a-time recurrence
//! `σ_k(x_1..x_m) = σ_k(x_1..x_{m-1}) + x_m σ_{k-1}(x_1..x_{m-1})`,
//! which only adds products of positive numbers on the positive cone and
//! therefore never cancels.

/// Returns `[σ_0, σ_1, ..., σ_n]` of `x`.
pub fn elementary_symmetric(x: &[f64]) -> Vec<f64> {
    elementary_symmetric_skipping(x, &[])
}

/// Elementary symmetric polynomials of `x` with the entries at `skip` removed.
///
/// The result always has length `x.len() + 1`; the top entries that cannot be
/// formed from the remaining variables are zero.
pub fn elementary_symmetric_skipping(x: &[f64], skip: &[usize]) -> Vec<f64> {
    let mut sigma = vec![0.0; x.len() + 1];
    sigma[0] = 1.0;
    let mut used = 0;
    for (i, &xi) in x.iter().enumerate() {
        if skip.contains(&i) {
            continue;
        }
        used += 1;
        for k in (1..=used).rev() {
            sigma[k] += xi * sigma[k - 1];
        }
    }
    sigma
}

/// `σ_k`, its gradient and its Hessian at `x`.
///
/// `∂σ_k/∂x_i = σ_{k-1}(x | i)` and `∂²σ_k/∂x_i∂x_j = σ_{k-2}(x | i, j)` for
/// `i ≠ j`; the diagonal of the Hessian vanishes because `σ_k` is affine in
/// each variable.
pub fn sigma_with_derivatives(x: &[f64], k: usize) -> (f64, Vec<f64>, Vec<Vec<f64>>) {
    let n = x.len();
    let value = elementary_symmetric(x)[k];
    let mut grad = vec![0.0; n];
    let mut hess = vec![vec![0.0; n]; n];
    if k == 0 {
        return (value, grad, hess);
    }
    for i in 0..n {
        grad[i] = elementary_symmetric_skipping(x, &[i])[k - 1];
        if k >= 2 {
            for j in (i + 1)..n {
                let h = elementary_symmetric_skipping(x, &[i, j])[k - 2];
                hess[i][j] = h;
                hess[j][i] = h;
            }
        }
    }
    (value, grad, hess)
}

/// Binomial coefficient as a float; exact for the small sizes used here.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

/// Normalised elementary symmetric mean `E_k = σ_k / C(n, k)`.
pub fn elementary_mean(x: &[f64], k: usize) -> f64 {
    elementary_symmetric(x)[k] / binomial(x.len(), k)
}
