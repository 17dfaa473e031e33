use std::f64::consts::PI;

use shrink_core::hypersurface::{Ambient, AxiConvexBody, AxiRadialGraph};
use shrink_core::solver::{
    residual, run_flow, slice_radius, solve_shrinker, sup_norm, FlowConfig, FlowStop, Normalization, Perturbation,
    ShrinkerProblem, StopReason,
};
use shrink_core::symfun::SpeedFunction;

fn bisect(g: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let up = g(lo) > 0.0;
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if (g(mid) > 0.0) == up {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn sphere_radius_agrees_with_bisection_including_offsets() {
    for c in [0.5, 1.0, 3.0] {
        for alpha in [1.0, 1.5, 4.0] {
            for offset in [0.0, -0.2, -2.0] {
                let f = SpeedFunction::elem_mean_root(3, 2).unwrap().scaled(c).unwrap();
                let p = ShrinkerProblem::new(f, alpha).unwrap().with_offset(offset).unwrap();
                let oracle = bisect(|r| (c / r).powf(alpha) - r + offset, 1e-6, 1e3);
                assert!((p.sphere_radius() - oracle).abs() < 1e-13 * oracle);
            }
        }
    }
}

#[test]
fn wrong_radius_gives_one_signed_residual() {
    let f = SpeedFunction::quotient(3, 2, 1).unwrap();
    let p = ShrinkerProblem::new(f, 2.0).unwrap();
    let big = AxiConvexBody::sphere(3, 32, 2.0 * p.sphere_radius()).unwrap();
    assert!(residual(&big, &p).unwrap().iter().all(|r| *r < 0.0));
    let small = AxiConvexBody::sphere(3, 32, 0.5 * p.sphere_radius()).unwrap();
    assert!(residual(&small, &p).unwrap().iter().all(|r| *r > 0.0));
}

#[test]
fn slice_radius_examples() {
    let unit = SpeedFunction::elem_mean_root(3, 2).unwrap();
    let r1 = slice_radius(&unit, 1.0).unwrap();
    assert!((r1.cos() - (5f64.sqrt() - 1.0) / 2.0).abs() < 1e-12);
    let mut previous = r1;
    for alpha in [2.0, 4.0, 8.0] {
        let r = slice_radius(&unit, alpha).unwrap();
        assert!(r < previous && r > PI / 4.0, "alpha {alpha}: {r}");
        previous = r;
    }
    assert!((slice_radius(&unit, 400.0).unwrap() - PI / 4.0).abs() < 1e-3);
    let doubled = unit.scaled(2.0).unwrap();
    let r2 = slice_radius(&doubled, 1.0).unwrap();
    assert!((2.0 / r2.tan() - r2.sin()).abs() < 1e-12);
    let graph = AxiRadialGraph::slice(4, Ambient::Hemisphere, 64, slice_radius(&SpeedFunction::elem_mean_root(4, 3).unwrap(), 2.0).unwrap()).unwrap();
    let p = ShrinkerProblem::new(SpeedFunction::elem_mean_root(4, 3).unwrap(), 2.0)
        .unwrap()
        .with_ambient(Ambient::Hemisphere);
    assert!(sup_norm(&residual(&graph, &p).unwrap()) < 1e-14);
}

#[test]
fn newton_from_the_exact_sphere_takes_no_steps() {
    let f = SpeedFunction::power_mean(3, -1.0).unwrap();
    let p = ShrinkerProblem::new(f, 3.0).unwrap().with_grid(32);
    let start = AxiConvexBody::sphere(3, 32, p.sphere_radius()).unwrap();
    let (_, report) = solve_shrinker(&p, &start).unwrap();
    assert_eq!(report.stop, StopReason::Converged);
    assert_eq!(report.iterations, 0);
}

#[test]
fn p2_example_and_quadratic_tail() {
    let f = SpeedFunction::quotient(3, 2, 1).unwrap();
    let p = ShrinkerProblem::new(f, 2.0).unwrap();
    let r_star = p.sphere_radius();
    let (start, applied) = Perturbation::single(2, 0.2).apply(3, p.grid, r_star).unwrap();
    assert_eq!(applied, Perturbation::single(2, 0.2));
    let (body, report) = solve_shrinker(&p, &start).unwrap();
    assert!(report.converged());
    assert!(body.support().iter().all(|s| (s - r_star).abs() <= 1e-8));
    assert!(body.anisotropy() - 1.0 <= 1e-8);
    let tail: Vec<f64> = report
        .records
        .iter()
        .map(|r| r.residual_sup)
        .skip_while(|r| *r >= 1e-3)
        .collect();
    assert!(tail.windows(2).all(|w| w[1] < w[0]));
    assert!(report.quadratic_constant.is_some());
}

#[test]
fn alpha_one_with_inverse_concave_speed_also_rounds() {
    for spec in ["quotient:3,1", "power_mean:-1", "ek_root:2"] {
        let f = SpeedFunction::parse(spec, 3).unwrap();
        let p = ShrinkerProblem::new(f, 1.0).unwrap().with_grid(64);
        let r_star = p.sphere_radius();
        let (start, _) = Perturbation::random(3, 2..=6, 0.3).unwrap().apply(3, 64, r_star).unwrap();
        let (body, report) = solve_shrinker(&p, &start).unwrap();
        assert!(report.converged(), "{spec}");
        assert!(body.support().iter().all(|s| (s - r_star).abs() <= 1e-8), "{spec}");
    }
}

#[test]
fn negative_offset_solutions_are_round() {
    let f = SpeedFunction::elem_mean_root(3, 2).unwrap();
    let p = ShrinkerProblem::new(f, 2.0).unwrap().with_offset(-0.4).unwrap().with_grid(48);
    let r_star = bisect(|r| (1.0 / r).powf(2.0) - r - 0.4, 1e-6, 1e3);
    let (start, _) = Perturbation::single(4, 0.15).apply(3, 48, r_star).unwrap();
    let (body, report) = solve_shrinker(&p, &start).unwrap();
    assert!(report.converged());
    assert!(body.support().iter().all(|s| (s - r_star).abs() <= 1e-9));
}

#[test]
fn grid_independence_of_the_solution() {
    let f = SpeedFunction::quotient(3, 2, 1).unwrap();
    let mean = |m: usize| {
        let p = ShrinkerProblem::new(f.clone(), 2.0).unwrap().with_grid(m);
        let (start, _) = Perturbation::single(2, 0.2).apply(3, m, 1.0).unwrap();
        let (body, report) = solve_shrinker(&p, &start).unwrap();
        assert!(report.converged());
        body.support().mean()
    };
    assert!((mean(128) - mean(512)).abs() < 1e-9);
}

#[test]
fn newton_rejects_other_ambients() {
    let f = SpeedFunction::elem_mean_root(3, 2).unwrap();
    let p = ShrinkerProblem::new(f, 2.0).unwrap().with_ambient(Ambient::Hemisphere);
    let b = AxiConvexBody::sphere(3, 16, 1.0).unwrap();
    assert!(solve_shrinker(&p, &b).is_err());
    assert!(run_flow(&p, &b, &FlowConfig::default()).is_err());
}

#[test]
fn flow_rounds_a_p2_body_monotonically() {
    let f = SpeedFunction::elem_mean_root(3, 2).unwrap();
    let p = ShrinkerProblem::new(f, 2.0).unwrap();
    let (start, _) = Perturbation::single(2, 0.3).apply(3, 24, 1.0).unwrap();
    for normalization in [Normalization::MinSupport, Normalization::MeanWidth] {
        let config = FlowConfig {
            normalization,
            record_every: 50,
            ..FlowConfig::default()
        };
        let trace = run_flow(&p, &start, &config).unwrap();
        assert_eq!(trace.stop, FlowStop::Round);
        assert!(trace.last().anisotropy <= 1e-3);
        assert!(trace.records.windows(2).all(|w| w[1].anisotropy <= w[0].anisotropy));
        assert!(trace.records.windows(2).all(|w| w[1].time > w[0].time && w[1].scale < w[0].scale));
        assert_eq!(trace.to_jsonl().lines().count(), trace.records.len());
    }
}

#[test]
fn flow_is_deterministic() {
    let f = SpeedFunction::power_mean(3, -1.0).unwrap();
    let p = ShrinkerProblem::new(f, 1.5).unwrap();
    let (start, _) = Perturbation::random(5, 2..=6, 0.2).unwrap().apply(3, 16, 1.0).unwrap();
    let config = FlowConfig {
        max_steps: 300,
        stop_roundness: None,
        record_every: 10,
        ..FlowConfig::default()
    };
    let a = run_flow(&p, &start, &config).unwrap().to_jsonl();
    let b = run_flow(&p, &start, &config).unwrap().to_jsonl();
    assert_eq!(a, b);
}
