//! Sampled inequality battery for a speed function.
//!
//! Every inequality is evaluated at seeded random points and its worst margin
//! kept, divided by the margin's natural scale so that one slack works for
//! all of them. Whether an inequality is *declared* to hold comes from the
//! function's [`Traits`](crate::symfun::Traits); monotonicity, homogeneity and
//! inverse concavity are always required.

use serde::Serialize;

use crate::error::Result;
use crate::hypersurface::Ambient;
use crate::quantities::{l1_margin, normalized_z_margin};
use crate::symfun::checks::{
    concave_bounds, log_convexity, fk_kappa_monotone, ic_lower_bound, inverse_concavity, pairwise_ic,
};
use crate::symfun::{CurvatureVector, RandomSampler, SpeedFunction, MARGIN_SLACK};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Inequality {
    Positivity,
    Monotonicity,
    Homogeneity,
    ConcaveTrace,
    ConcaveMean,
    InverseConcavity,
    PairwiseQuotient,
    PairwiseWeighted,
    InverseConcaveLowerBound,
    LogConvexity,
    WeightedMonotone,
    NormalizedZ,
    L1,
}

impl Inequality {
    pub const ALL: [Inequality; 13] = [
        Inequality::Positivity,
        Inequality::Monotonicity,
        Inequality::Homogeneity,
        Inequality::ConcaveTrace,
        Inequality::ConcaveMean,
        Inequality::InverseConcavity,
        Inequality::PairwiseQuotient,
        Inequality::PairwiseWeighted,
        Inequality::InverseConcaveLowerBound,
        Inequality::LogConvexity,
        Inequality::WeightedMonotone,
        Inequality::NormalizedZ,
        Inequality::L1,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Inequality::Positivity => "positivity",
            Inequality::Monotonicity => "monotonicity",
            Inequality::Homogeneity => "homogeneity",
            Inequality::ConcaveTrace => "concave_trace",
            Inequality::ConcaveMean => "concave_mean",
            Inequality::InverseConcavity => "inverse_concavity",
            Inequality::PairwiseQuotient => "pairwise_quotient",
            Inequality::PairwiseWeighted => "pairwise_weighted",
            Inequality::InverseConcaveLowerBound => "ic_lower_bound",
            Inequality::LogConvexity => "log_convexity",
            Inequality::WeightedMonotone => "weighted_monotone",
            Inequality::NormalizedZ => "normalized_z",
            Inequality::L1 => "l1",
        }
    }

    /// Whether `f` is expected to satisfy this inequality.
    pub fn declared(self, f: &SpeedFunction) -> bool {
        let t = f.traits();
        match self {
            Inequality::Positivity | Inequality::Monotonicity | Inequality::Homogeneity => true,
            Inequality::InverseConcavity => true,
            Inequality::ConcaveTrace | Inequality::ConcaveMean => t.concave,
            Inequality::PairwiseQuotient
            | Inequality::PairwiseWeighted
            | Inequality::InverseConcaveLowerBound
            | Inequality::NormalizedZ
            | Inequality::L1 => t.inverse_concave,
            Inequality::LogConvexity | Inequality::WeightedMonotone => t.log_exp_convex,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    ViolatedExpected,
    HoldsUndeclared,
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::ViolatedExpected => "violated (expected)",
            Status::HoldsUndeclared => "holds (undeclared)",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BatteryRow {
    pub inequality: Inequality,
    pub declared: bool,
    pub samples: usize,
    /// Smallest scaled margin.
    pub worst: f64,
    pub kappa: Vec<f64>,
    pub y: Vec<f64>,
    pub status: Status,
}

/// Settings for [`run_battery`].
#[derive(Debug, Clone, Copy)]
pub struct BatteryConfig {
    pub samples: usize,
    pub seed: u64,
    pub alpha: f64,
    pub ambient: Ambient,
    pub slack: f64,
}

impl Default for BatteryConfig {
    fn default() -> Self {
        Self {
            samples: 10_000,
            seed: 0,
            alpha: 2.0,
            ambient: Ambient::Euclidean,
            slack: MARGIN_SLACK,
        }
    }
}

fn sq(y: &[f64]) -> f64 {
    y.iter().map(|v| v * v).sum()
}

fn margin(
    q: Inequality,
    f: &SpeedFunction,
    kappa: &CurvatureVector,
    y: &[f64],
    aux: (f64, f64),
    cfg: &BatteryConfig,
) -> Result<f64> {
    let value = f.eval(kappa)?;
    let (kmin, kmax) = (kappa.min(), kappa.max());
    Ok(match q {
        Inequality::Positivity => value / kmax,
        Inequality::Monotonicity => f.derivs(kappa)?.grad.min() * kmax / value,
        Inequality::Homogeneity => {
            let scaled = f.eval(&kappa.scaled(aux.0)?)?;
            -(scaled - aux.0 * value).abs() / scaled
        }
        Inequality::ConcaveTrace => concave_bounds(f, kappa)?.0 / f.normalization(),
        Inequality::ConcaveMean => concave_bounds(f, kappa)?.1 / value,
        Inequality::InverseConcavity => inverse_concavity(f, kappa, y)? * kmin / (value * sq(y)),
        Inequality::PairwiseQuotient => pairwise_ic(f, kappa)?.0 * kmin / value,
        Inequality::PairwiseWeighted => pairwise_ic(f, kappa)?.1 / (value * kmax * kmax),
        Inequality::InverseConcaveLowerBound => ic_lower_bound(f, kappa)? / (value * kmax),
        Inequality::LogConvexity => log_convexity(f, kappa, y)? * kmin * kmin / sq(y),
        Inequality::WeightedMonotone => fk_kappa_monotone(f, kappa)? / (value * kmax),
        Inequality::NormalizedZ => normalized_z_margin(kappa, &f.normalized())?,
        Inequality::L1 => {
            let fa = value.powf(cfg.alpha);
            l1_margin(kappa, f, cfg.alpha, cfg.ambient, aux.1)? / (fa * fa + fa)
        }
    })
}

/// Worst scaled margin of every inequality over `cfg.samples` seeded points.
///
/// Each inequality draws from its own sampler seeded with `cfg.seed`, so a
/// witness can be reproduced from the seed alone.
pub fn run_battery(f: &SpeedFunction, cfg: &BatteryConfig) -> Result<Vec<BatteryRow>> {
    let n = f.dim();
    let mut rows = Vec::new();
    for q in Inequality::ALL {
        let mut sampler = RandomSampler::new(n, cfg.seed);
        let mut row = BatteryRow {
            inequality: q,
            declared: q.declared(f),
            samples: cfg.samples,
            worst: f64::INFINITY,
            kappa: Vec::new(),
            y: Vec::new(),
            status: Status::Pass,
        };
        for _ in 0..cfg.samples {
            let kappa = sampler.kappa();
            let y = sampler.direction();
            let k = sampler.log_uniform();
            let r = sampler.unit() * (std::f64::consts::FRAC_PI_2 - 1e-3) + 5e-4;
            let m = margin(q, f, &kappa, &y, (k, r), cfg)?;
            if m < row.worst {
                row.worst = m;
                row.kappa = kappa.as_slice().to_vec();
                row.y = y;
            }
        }
        let holds = row.worst >= -cfg.slack;
        row.status = match (row.declared, holds) {
            (true, true) => Status::Pass,
            (true, false) => Status::Fail,
            (false, false) => Status::ViolatedExpected,
            (false, true) => Status::HoldsUndeclared,
        };
        rows.push(row);
    }
    Ok(rows)
}
