use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::{residual, sup_norm, ShrinkerProblem};
use crate::error::{Error, Result};
use crate::hypersurface::{Ambient, AxiConvexBody, DiscreteHypersurface};

/// One line of the Newton log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterationRecord {
    pub iter: usize,
    pub residual_sup: f64,
    /// `κ_max / κ_min − 1` over the whole body.
    pub anisotropy: f64,
    /// Mean support value.
    pub scale: f64,
    /// Accepted line-search step length; zero for the initial record.
    pub step: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    MaxIterations,
    LineSearch,
}

#[derive(Debug, Clone, Serialize)]
pub struct NewtonReport {
    pub stop: StopReason,
    pub iterations: usize,
    pub residual_sup: f64,
    pub records: Vec<IterationRecord>,
    /// `max r_{k+1}/r_k²` over iterations that start below `1e-3`; bounded
    /// when convergence is quadratic.
    pub quadratic_constant: Option<f64>,
}

impl NewtonReport {
    pub fn converged(&self) -> bool {
        self.stop == StopReason::Converged
    }

    /// JSON lines, one per record.
    pub fn to_jsonl(&self) -> String {
        self.records
            .iter()
            .map(|r| serde_json::to_string(r).expect("records serialize") + "\n")
            .collect()
    }
}

fn record(iter: usize, body: &AxiConvexBody, res: f64, step: f64) -> IterationRecord {
    IterationRecord {
        iter,
        residual_sup: res,
        anisotropy: body.anisotropy() - 1.0,
        scale: body.support().mean(),
        step,
    }
}

/// Jacobian of `s ↦ F(κ(s))^α + C − s` on the support grid.
fn jacobian(body: &AxiConvexBody, problem: &ShrinkerProblem) -> Result<DMatrix<f64>> {
    let grid = body.grid();
    let (r1, r2) = body.radii();
    let np = grid.len();
    let mut jac = DMatrix::zeros(np, np);
    for (j, kappa) in body.curvatures().iter().enumerate() {
        let d = problem.f.derivs(kappa)?;
        let outer = problem.alpha * d.value.powf(problem.alpha - 1.0);
        let df_dr1 = -d.grad[0] / (r1[j] * r1[j]);
        let df_dr2 = -d.grad.iter().skip(1).sum::<f64>() / (r2[j] * r2[j]);
        let a = outer * df_dr1;
        let b = outer * df_dr2 * grid.cos_theta()[j];
        jac.set_row(j, &(grid.d2().row(j) * a + grid.d1_over_sin().row(j) * b));
        jac[(j, j)] += outer * (df_dr1 + df_dr2) - 1.0;
    }
    Ok(jac)
}

/// Damped Newton iteration for `F^α + C = s` starting from `initial`.
///
/// Each step solves the linearized system exactly and halves the step until
/// the trial body is convex and its sup-norm residual decreases. Returns the
/// last accepted body and the iteration log; failure to converge is reported
/// in [`NewtonReport::stop`], not as an error.
pub fn solve_shrinker(problem: &ShrinkerProblem, initial: &AxiConvexBody) -> Result<(AxiConvexBody, NewtonReport)> {
    if problem.ambient != Ambient::Euclidean {
        return Err(Error::Ambient(
            "Newton iteration works on Euclidean support functions".into(),
        ));
    }
    if initial.dim() != problem.f.dim() {
        return Err(Error::Dimension {
            expected: problem.f.dim(),
            got: initial.dim(),
        });
    }
    let mut body = initial.clone();
    let mut res = DVector::from_vec(residual(&body, problem)?);
    let mut res_sup = sup_norm(res.as_slice());
    let mut records = vec![record(0, &body, res_sup, 0.0)];
    let mut stop = StopReason::MaxIterations;
    for iter in 1..=problem.max_iterations {
        if res_sup <= problem.tolerance {
            stop = StopReason::Converged;
            break;
        }
        let jac = jacobian(&body, problem)?;
        let Some(delta) = jac.lu().solve(&(-&res)) else {
            stop = StopReason::LineSearch;
            break;
        };
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=problem.max_halvings {
            if let Ok(trial) = body.with_support(body.support() + &delta * t) {
                let trial_res = residual(&trial, problem)?;
                let trial_sup = sup_norm(&trial_res);
                if trial_sup < res_sup {
                    accepted = Some((trial, trial_res, trial_sup));
                    break;
                }
            }
            t *= 0.5;
        }
        let Some((trial, trial_res, trial_sup)) = accepted else {
            stop = StopReason::LineSearch;
            break;
        };
        body = trial;
        res = DVector::from_vec(trial_res);
        res_sup = trial_sup;
        records.push(record(iter, &body, res_sup, t));
    }
    if res_sup <= problem.tolerance {
        stop = StopReason::Converged;
    }
    let quadratic_constant = records
        .windows(2)
        .filter(|w| w[0].residual_sup < 1e-3 && w[1].residual_sup > 1e3 * problem.tolerance)
        .map(|w| w[1].residual_sup / (w[0].residual_sup * w[0].residual_sup))
        .reduce(f64::max);
    let report = NewtonReport {
        stop,
        iterations: records.len() - 1,
        residual_sup: res_sup,
        records,
        quadratic_constant,
    };
    Ok((body, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symfun::SpeedFunction;

    fn finite_difference_jacobian(body: &AxiConvexBody, problem: &ShrinkerProblem) -> DMatrix<f64> {
        let np = body.support().len();
        let h = 1e-6;
        DMatrix::from_fn(np, np, |j, k| {
            let mut e = DVector::zeros(np);
            e[k] = h;
            let plus = residual(&body.with_support(body.support() + &e).unwrap(), problem).unwrap();
            let minus = residual(&body.with_support(body.support() - &e).unwrap(), problem).unwrap();
            (plus[j] - minus[j]) / (2.0 * h)
        })
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let f = SpeedFunction::quotient(3, 2, 1).unwrap();
        let problem = ShrinkerProblem::new(f, 2.0).unwrap();
        let body = AxiConvexBody::from_fn(3, 16, |t| 1.0 + 0.1 * (2.0 * t).cos() + 0.05 * t.cos().powi(3)).unwrap();
        let exact = jacobian(&body, &problem).unwrap();
        let fd = finite_difference_jacobian(&body, &problem);
        let scale = exact.amax();
        assert!((exact - fd).amax() < 1e-6 * scale);
    }

    #[test]
    fn converges_to_round_sphere() {
        let f = SpeedFunction::elem_mean_root(3, 2).unwrap();
        let problem = ShrinkerProblem::new(f, 1.5).unwrap().with_grid(32);
        let r_star = problem.sphere_radius();
        let start = AxiConvexBody::from_fn(3, 32, |t| r_star * (1.0 + 0.1 * (3.0 * t.cos().powi(2) - 1.0))).unwrap();
        let (body, report) = solve_shrinker(&problem, &start).unwrap();
        assert!(report.converged(), "{report:?}");
        assert!(body.support().iter().all(|s| (s - r_star).abs() < 1e-9));
        assert!(report.iterations < 15);
        assert!(report.to_jsonl().lines().count() == report.records.len());
    }
}
