use nalgebra::DVector;
use serde::Serialize;

use super::{Roundness, ShrinkerProblem};
use crate::error::{Error, Result};
use crate::hypersurface::{Ambient, AxiConvexBody, DiscreteHypersurface};

/// Size functional held fixed by the rescaling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Smallest support value, a proxy for the inner radius.
    MinSupport,
    /// Mean support value over `𝕊ⁿ`, half the mean width.
    MeanWidth,
}

impl std::str::FromStr for Normalization {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "min-support" | "inner" => Ok(Normalization::MinSupport),
            "mean-width" | "width" => Ok(Normalization::MeanWidth),
            other => Err(format!("unknown normalization {other:?}")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct FlowConfig {
    /// Fraction of the explicit stability bound used as the step.
    pub cfl: f64,
    pub normalization: Normalization,
    /// Stop once `κ_max/κ_min` falls to this value.
    pub stop_roundness: Option<f64>,
    pub max_steps: usize,
    pub max_halvings: usize,
    /// Ratio `max F / min F` treated as a blow-up.
    pub blowup_ratio: f64,
    /// Record every this many steps; the first and last steps are always
    /// recorded.
    pub record_every: usize,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            cfl: 0.2,
            normalization: Normalization::MinSupport,
            stop_roundness: Some(1.001),
            max_steps: 200_000,
            max_halvings: 20,
            blowup_ratio: 1e6,
            record_every: 100,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlowRecord {
    pub iter: usize,
    /// Physical time of the unnormalized flow.
    pub time: f64,
    /// Normalized time.
    pub tau: f64,
    /// Physical size divided by the normalized size.
    pub scale: f64,
    /// Relative oscillation of `F^α/s`; zero exactly on a self-similar body.
    pub residual_sup: f64,
    /// `κ_max / κ_min − 1`.
    pub anisotropy: f64,
    pub speed_min: f64,
    pub speed_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowStop {
    Round,
    MaxSteps,
}

#[derive(Debug, Clone)]
pub struct FlowTrace {
    pub records: Vec<FlowRecord>,
    /// Final normalized body.
    pub body: AxiConvexBody,
    pub stop: FlowStop,
    pub steps: usize,
}

impl FlowTrace {
    pub fn last(&self) -> &FlowRecord {
        self.records.last().expect("at least the initial record")
    }

    pub fn to_jsonl(&self) -> String {
        self.records
            .iter()
            .map(|r| serde_json::to_string(r).expect("records serialize") + "\n")
            .collect()
    }
}

fn sphere_weights(body: &AxiConvexBody) -> DVector<f64> {
    let grid = body.grid();
    let n = body.dim() as i32;
    let mut w = grid.trapezoid();
    for (j, t) in grid.theta().iter().enumerate() {
        w[j] *= t.sin().powi(n - 1);
    }
    w
}

fn size(body: &AxiConvexBody, normalization: Normalization) -> f64 {
    match normalization {
        Normalization::MinSupport => body.support().min(),
        Normalization::MeanWidth => {
            let w = sphere_weights(body);
            w.dot(body.support()) / w.sum()
        }
    }
}

/// Removes the first zonal harmonic, which moves the Steiner point to the origin.
fn recentred(body: &AxiConvexBody) -> Result<AxiConvexBody> {
    let w = sphere_weights(body);
    let cos = body.grid().cos_theta();
    let p = w.dot(&body.support().component_mul(cos)) / w.dot(&cos.component_mul(cos));
    body.with_support(body.support() - cos * p)
}

fn speeds(body: &AxiConvexBody, problem: &ShrinkerProblem) -> Result<DVector<f64>> {
    let kappas = body.curvatures();
    let mut v = DVector::zeros(kappas.len());
    for (j, k) in kappas.iter().enumerate() {
        v[j] = problem.f.eval(k)?.powf(problem.alpha);
    }
    Ok(v)
}

/// Explicit stability bound for `∂s/∂τ = −F^α`, from the leading
/// coefficients of the linearization and the `m²` growth of the spectral
/// second derivative.
fn stable_step(body: &AxiConvexBody, problem: &ShrinkerProblem) -> Result<f64> {
    let (r1, r2) = body.radii();
    let m = body.grid().intervals() as f64;
    let mut worst: f64 = 0.0;
    for (j, kappa) in body.curvatures().iter().enumerate() {
        let d = problem.f.derivs(kappa)?;
        let outer = problem.alpha * d.value.powf(problem.alpha - 1.0);
        let a1 = d.grad[0] / (r1[j] * r1[j]);
        let a2 = d.grad.iter().skip(1).sum::<f64>() / (r2[j] * r2[j]);
        worst = worst.max(outer * (a1 + a2) * m * m);
    }
    Ok(1.0 / worst)
}

fn record(iter: usize, time: f64, tau: f64, scale: f64, body: &AxiConvexBody, v: &DVector<f64>) -> FlowRecord {
    let ratio = v.component_div(body.support());
    let mean = ratio.mean();
    FlowRecord {
        iter,
        time,
        tau,
        scale,
        residual_sup: (ratio.max() - ratio.min()) / mean,
        anisotropy: Roundness::of(body).ratio() - 1.0,
        speed_min: v.min(),
        speed_max: v.max(),
    }
}

fn rk4(body: &AxiConvexBody, problem: &ShrinkerProblem, v0: &DVector<f64>, dt: f64) -> Result<AxiConvexBody> {
    let s = body.support();
    let k1 = -v0;
    let b2 = body.with_support(s + &k1 * (0.5 * dt))?;
    let k2 = -speeds(&b2, problem)?;
    let b3 = body.with_support(s + &k2 * (0.5 * dt))?;
    let k3 = -speeds(&b3, problem)?;
    let b4 = body.with_support(s + &k3 * dt)?;
    let k4 = -speeds(&b4, problem)?;
    body.with_support(s + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0))
}

/// Integrates `∂s/∂t = −F^α` with classical Runge–Kutta, rescaling after
/// every step so that the chosen size functional keeps its initial value and
/// recentring at the Steiner point.
///
/// The normalized body evolves by the unscaled equation for a step `Δτ`; with
/// the accumulated scale `σ` this is a physical step `Δt = σ^{α+1} Δτ`.
pub fn run_flow(problem: &ShrinkerProblem, initial: &AxiConvexBody, config: &FlowConfig) -> Result<FlowTrace> {
    if problem.ambient != Ambient::Euclidean {
        return Err(Error::Ambient("flows run on Euclidean support functions".into()));
    }
    if initial.dim() != problem.f.dim() {
        return Err(Error::Dimension {
            expected: problem.f.dim(),
            got: initial.dim(),
        });
    }
    let target = size(initial, config.normalization);
    let mut body = initial.clone();
    let mut scale = 1.0;
    let (mut time, mut tau) = (0.0, 0.0);
    let mut v = speeds(&body, problem)?;
    let mut records = vec![record(0, time, tau, scale, &body, &v)];
    let mut stop = FlowStop::MaxSteps;
    let mut steps = 0;
    let round_enough = |b: &AxiConvexBody| config.stop_roundness.is_some_and(|tol| Roundness::of(b).ratio() <= tol);
    if round_enough(&body) {
        stop = FlowStop::Round;
    }
    while stop == FlowStop::MaxSteps && steps < config.max_steps {
        let mut dt = config.cfl * stable_step(&body, problem)?;
        let mut next = None;
        for halvings in 0..=config.max_halvings {
            match rk4(&body, problem, &v, dt) {
                Ok(b) => {
                    next = Some(b);
                    break;
                }
                Err(Error::Convexity { .. }) if halvings < config.max_halvings => dt *= 0.5,
                Err(Error::Convexity { node, theta, r1, r2 }) => {
                    return Err(Error::StepRejected {
                        halvings,
                        reason: format!("convexity lost at node {node} (theta {theta}, r1 {r1}, r2 {r2})"),
                    })
                }
                Err(e) => return Err(e),
            }
        }
        let moved = recentred(&next.expect("loop returns or sets"))?;
        let q = target / size(&moved, config.normalization);
        body = moved.scaled(q)?;
        time += scale.powf(problem.alpha + 1.0) * dt;
        tau += dt;
        scale /= q;
        steps += 1;
        v = speeds(&body, problem)?;
        let ratio = v.max() / v.min();
        if !(ratio <= config.blowup_ratio) {
            return Err(Error::BlowUp { ratio });
        }
        if round_enough(&body) {
            stop = FlowStop::Round;
        }
        if stop == FlowStop::Round || steps % config.record_every.max(1) == 0 || steps == config.max_steps {
            records.push(record(steps, time, tau, scale, &body, &v));
        }
    }
    Ok(FlowTrace {
        records,
        body,
        stop,
        steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symfun::SpeedFunction;

    #[test]
    fn sphere_follows_homothetic_law() {
        let f = SpeedFunction::elem_mean_root(3, 2).unwrap();
        let alpha = 2.0;
        let problem = ShrinkerProblem::new(f, alpha).unwrap();
        let r0 = 1.3_f64;
        let body = AxiConvexBody::sphere(3, 16, r0).unwrap();
        let config = FlowConfig {
            stop_roundness: None,
            max_steps: 400,
            record_every: 50,
            ..FlowConfig::default()
        };
        let trace = run_flow(&problem, &body, &config).unwrap();
        let extinction = r0.powf(alpha + 1.0) / (alpha + 1.0);
        for rec in &trace.records {
            let expected = ((alpha + 1.0) * (extinction - rec.time)).powf(1.0 / (alpha + 1.0));
            assert!((rec.scale * r0 - expected).abs() < 1e-9, "{rec:?}");
        }
        assert_eq!(trace.stop, FlowStop::MaxSteps);
    }

    #[test]
    fn recentring_removes_translation() {
        let body = AxiConvexBody::from_fn(3, 32, |t| 1.0 + 0.2 * t.cos()).unwrap();
        let c = recentred(&body).unwrap();
        assert!(c.support().iter().all(|s| (s - 1.0).abs() < 1e-12));
    }
}
