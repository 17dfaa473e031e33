use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use shrink_core::battery::{run_battery, BatteryConfig, Status};
use shrink_core::hypersurface::{
    Ambient, AxiConvexBody, AxiRadialGraph, DiscreteHypersurface, ProfileData, Representation,
};
use shrink_core::quantities::QuantityTable;
use shrink_core::solver::{
    residual, run_flow, slice_radius, solve_shrinker, sup_norm, FlowConfig, FlowStop, Normalization, Perturbation,
    ShrinkerProblem,
};
use shrink_core::symfun::SpeedFunction;

use crate::config::{Command, RunConfig, SweepPlan};
use crate::error::{CliError, ErrorKind};
use crate::svg::{Plot, Series};

/// Short per-run summary, used for stdout and the sweep table.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Summary {
    pub status: String,
    pub iterations: usize,
    pub residual_sup: f64,
    pub anisotropy: f64,
}

/// Result of a run that got far enough to write its artifacts.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub lines: Vec<String>,
    pub summary: Summary,
    /// Set when the run completed but missed its target.
    pub failure: Option<CliError>,
}

fn write(dir: &Path, name: &str, content: &str) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::new(ErrorKind::Io, format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, content).map_err(|e| CliError::new(ErrorKind::Io, format!("cannot write {}: {e}", path.display())))
}

fn comment_header(cfg: &RunConfig) -> String {
    cfg.header_lines().iter().map(|l| format!("# {l}\n")).collect()
}

fn jsonl(cfg: &RunConfig, body: &str) -> String {
    let head = json!({ "config": cfg }).to_string();
    format!("{head}\n{body}")
}

fn json_doc(cfg: &RunConfig, value: serde_json::Value) -> String {
    let mut doc = serde_json::Map::new();
    doc.insert("config".into(), serde_json::to_value(cfg).expect("config serializes"));
    if let serde_json::Value::Object(map) = value {
        doc.extend(map);
    }
    serde_json::to_string_pretty(&serde_json::Value::Object(doc)).expect("json serializes") + "\n"
}

fn speed(cfg: &RunConfig) -> Result<SpeedFunction, CliError> {
    Ok(SpeedFunction::parse(&cfg.fn_spec, cfg.n)?)
}

fn ambient(cfg: &RunConfig) -> Ambient {
    if cfg.ambient == "hemisphere" {
        Ambient::Hemisphere
    } else {
        Ambient::Euclidean
    }
}

fn require_euclid(cfg: &RunConfig) -> Result<(), CliError> {
    if cfg.ambient != "euclid" {
        return Err(CliError::config(format!(
            "{} works on Euclidean bodies only; use `slice` for the hemisphere",
            cfg.command.name()
        )));
    }
    Ok(())
}

fn perturbation(cfg: &RunConfig) -> Result<Perturbation, CliError> {
    Ok(match cfg.mode_modes()? {
        Some(l) => Perturbation::single(l, cfg.perturb),
        None => Perturbation::random(cfg.seed, 2..=6, cfg.perturb)?,
    })
}

fn read_profile(path: &str) -> Result<ProfileData, CliError> {
    ProfileData::read(Path::new(path)).map_err(|e| CliError::config(format!("{path}: {e}")))
}

/// Starting body: the `body` file if given, otherwise a perturbed sphere.
/// The grid and dimension of a loaded body overwrite the config.
fn initial_body(cfg: &mut RunConfig, radius: f64) -> Result<(AxiConvexBody, Option<Perturbation>), CliError> {
    match &cfg.body {
        Some(path) => {
            let data = read_profile(path)?;
            let body = data.to_body().map_err(|e| CliError::config(format!("{path}: {e}")))?;
            cfg.grid = data.intervals();
            cfg.n = data.n;
            Ok((body, None))
        }
        None => {
            let (body, applied) = perturbation(cfg)?.apply(cfg.n, cfg.grid, radius)?;
            Ok((body, Some(applied)))
        }
    }
}

fn problem(cfg: &RunConfig) -> Result<ShrinkerProblem, CliError> {
    Ok(ShrinkerProblem::new(speed(cfg)?, cfg.alpha)?
        .with_offset(cfg.offset)?
        .with_grid(cfg.grid))
}

fn meridian(body: &AxiConvexBody) -> Vec<(f64, f64)> {
    body.position().iter().map(|p| (p[0], p[1])).collect()
}

fn graph_meridian(graph: &AxiRadialGraph) -> Vec<(f64, f64)> {
    graph
        .theta()
        .iter()
        .zip(graph.radius().iter())
        .map(|(t, r)| (r * t.sin(), r * t.cos()))
        .collect()
}

fn profile_plot(cfg: &RunConfig, title: &str, series: Vec<Series>) -> String {
    Plot {
        title: title.into(),
        x_label: "x".into(),
        y_label: "z".into(),
        equal_aspect: true,
        header: cfg.header_lines(),
        series,
        ..Default::default()
    }
    .render()
}

fn fmt_vec(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

pub fn check_fn(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let f = speed(cfg)?;
    let rows = run_battery(
        &f,
        &BatteryConfig {
            samples: cfg.samples,
            seed: cfg.seed,
            alpha: cfg.alpha,
            ambient: ambient(cfg),
            slack: cfg.tol,
        },
    )?;
    let mut csv = comment_header(cfg);
    csv.push_str("inequality,declared,status,samples,worst_margin,witness_kappa,witness_y\n");
    let mut lines = vec![format!("{f} (n = {}, {} samples, seed {})", cfg.n, cfg.samples, cfg.seed)];
    for r in &rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{:e},{},{}",
            r.inequality.name(),
            r.declared,
            r.status.label(),
            r.samples,
            r.worst,
            fmt_vec(&r.kappa),
            fmt_vec(&r.y)
        );
        lines.push(format!("  {:<20} {:<20} {:>12.4e}", r.inequality.name(), r.status.label(), r.worst));
    }
    let out = cfg.out_dir();
    write(&out, "margins.csv", &csv)?;
    let witnesses: Vec<_> = rows
        .iter()
        .filter(|r| matches!(r.status, Status::Fail | Status::ViolatedExpected))
        .collect();
    write(&out, "witnesses.json", &json_doc(cfg, json!({ "witnesses": witnesses })))?;
    let failed: Vec<_> = rows.iter().filter(|r| r.status == Status::Fail).collect();
    let worst = rows.iter().map(|r| r.worst).fold(f64::INFINITY, f64::min);
    let failure = (!failed.is_empty()).then(|| {
        let first = failed[0];
        CliError::new(
            ErrorKind::CheckFailed,
            format!(
                "{} declared inequalit{} failed; {} margin {:e} at kappa [{}]",
                failed.len(),
                if failed.len() == 1 { "y" } else { "ies" },
                first.inequality.name(),
                first.worst,
                fmt_vec(&first.kappa)
            ),
        )
    });
    Ok(Outcome {
        lines,
        summary: Summary {
            status: if failure.is_some() { "fail" } else { "pass" }.into(),
            iterations: cfg.samples,
            residual_sup: worst,
            anisotropy: 0.0,
        },
        failure,
    })
}

pub fn solve(cfg: &mut RunConfig) -> Result<Outcome, CliError> {
    require_euclid(cfg)?;
    let r_star = problem(cfg)?.sphere_radius();
    let (start, applied) = initial_body(cfg, r_star)?;
    let p = problem(cfg)?.with_tolerance(cfg.tol);
    let (body, report) = solve_shrinker(&p, &start)?;
    let deviation = body.support().iter().map(|s| (s - r_star).abs()).fold(0.0, f64::max);
    let anisotropy = body.anisotropy() - 1.0;
    let out = cfg.out_dir();
    write(&out, "solve.jsonl", &jsonl(cfg, &report.to_jsonl()))?;
    let mut comments = cfg.header_lines();
    comments.push(format!("residual_sup={}", report.residual_sup));
    write(&out, "final.profile", &ProfileData::from_body(&body).with_comments(comments).to_text())?;
    write(
        &out,
        "solve.json",
        &json_doc(
            cfg,
            json!({
                "stop": report.stop,
                "iterations": report.iterations,
                "residual_sup": report.residual_sup,
                "quadratic_constant": report.quadratic_constant,
                "anisotropy": anisotropy,
                "sphere_radius": r_star,
                "max_deviation_from_sphere": deviation,
                "perturbation": applied.as_ref().map(|p| &p.modes),
            }),
        ),
    )?;
    write(
        &out,
        "profile.svg",
        &profile_plot(
            cfg,
            "meridian profile",
            vec![Series::new("initial", meridian(&start)).dashed(), Series::new("solution", meridian(&body))],
        ),
    )?;
    let residuals: Vec<(f64, f64)> = report.records.iter().map(|r| (r.iter as f64, r.residual_sup)).collect();
    write(
        &out,
        "residual.svg",
        &Plot {
            title: "Newton residual".into(),
            x_label: "iteration".into(),
            y_label: "sup |residual|".into(),
            log_y: true,
            header: cfg.header_lines(),
            series: vec![Series::new("residual", residuals)],
            ..Default::default()
        }
        .render(),
    )?;
    let lines = vec![
        format!("stop = {:?}", report.stop).to_lowercase(),
        format!("iterations = {}", report.iterations),
        format!("residual = {:e}", report.residual_sup),
        format!("anisotropy = {anisotropy:e}"),
        format!("sphere radius = {r_star}"),
        format!("max deviation from sphere = {deviation:e}"),
    ];
    let failure = (!report.converged()).then(|| {
        CliError::new(
            ErrorKind::NonConvergence,
            format!(
                "Newton stopped ({:?}) after {} iterations with residual {:e}",
                report.stop, report.iterations, report.residual_sup
            ),
        )
    });
    Ok(Outcome {
        lines,
        summary: Summary {
            status: if report.converged() { "converged" } else { "not_converged" }.into(),
            iterations: report.iterations,
            residual_sup: report.residual_sup,
            anisotropy,
        },
        failure,
    })
}

pub fn flow(cfg: &mut RunConfig) -> Result<Outcome, CliError> {
    require_euclid(cfg)?;
    let (start, _) = initial_body(cfg, 1.0)?;
    let p = problem(cfg)?;
    let config = FlowConfig {
        normalization: cfg.normalization.parse::<Normalization>().map_err(CliError::config)?,
        stop_roundness: Some(1.0 + cfg.tol),
        max_steps: cfg.max_steps,
        ..FlowConfig::default()
    };
    let trace = run_flow(&p, &start, &config)?;
    let last = *trace.last();
    let out = cfg.out_dir();
    write(&out, "flow.jsonl", &jsonl(cfg, &trace.to_jsonl()))?;
    let mut comments = cfg.header_lines();
    comments.push(format!("steps={} tau={} anisotropy={}", trace.steps, last.tau, last.anisotropy));
    write(&out, "final.profile", &ProfileData::from_body(&trace.body).with_comments(comments).to_text())?;
    let scale = start.support().min() / trace.body.support().min();
    write(
        &out,
        "profile.svg",
        &profile_plot(
            cfg,
            "normalized meridian profile",
            vec![
                Series::new("initial", meridian(&start.scaled(1.0 / scale)?)).dashed(),
                Series::new("final", meridian(&trace.body)),
            ],
        ),
    )?;
    let roundness: Vec<(f64, f64)> = trace.records.iter().map(|r| (r.tau, r.anisotropy)).collect();
    let residuals: Vec<(f64, f64)> = trace.records.iter().map(|r| (r.tau, r.residual_sup)).collect();
    write(
        &out,
        "roundness.svg",
        &Plot {
            title: "roundness along the normalized flow".into(),
            x_label: "normalized time".into(),
            y_label: "kappa_max / kappa_min - 1".into(),
            log_y: true,
            header: cfg.header_lines(),
            series: vec![
                Series::new("anisotropy", roundness),
                Series::new("oscillation of F^a/s", residuals).dashed(),
            ],
            ..Default::default()
        }
        .render(),
    )?;
    let lines = vec![
        format!("stop = {}", serde_json::to_value(trace.stop).expect("stop serializes").as_str().unwrap_or("")),
        format!("steps = {}", trace.steps),
        format!("tau = {}", last.tau),
        format!("time = {}", last.time),
        format!("anisotropy = {:e}", last.anisotropy),
        format!("residual = {:e}", last.residual_sup),
    ];
    let failure = (trace.stop == FlowStop::MaxSteps).then(|| {
        CliError::new(
            ErrorKind::NonConvergence,
            format!(
                "flow reached {} steps with anisotropy {:e} above the target {:e}",
                trace.steps, last.anisotropy, cfg.tol
            ),
        )
    });
    Ok(Outcome {
        lines,
        summary: Summary {
            status: if failure.is_none() { "round" } else { "max_steps" }.into(),
            iterations: trace.steps,
            residual_sup: last.residual_sup,
            anisotropy: last.anisotropy,
        },
        failure,
    })
}

pub fn slice(cfg: &RunConfig) -> Result<Outcome, CliError> {
    if cfg.ambient != "hemisphere" {
        return Err(CliError::config("slice works in the hemisphere only"));
    }
    let f = speed(cfg)?;
    let r0 = slice_radius(&f, cfg.alpha)?;
    let graph = AxiRadialGraph::slice(cfg.n, Ambient::Hemisphere, cfg.grid, r0)?;
    let p = ShrinkerProblem::new(f.clone(), cfg.alpha)?.with_ambient(Ambient::Hemisphere);
    let res = sup_norm(&residual(&graph, &p)?);
    let c = f.normalization();
    let substitution = (c / r0.tan()).powf(cfg.alpha) - r0.sin();
    let out = cfg.out_dir();
    write(&out, "slice.profile", &ProfileData::from_graph(&graph)?.with_comments(cfg.header_lines()).to_text())?;
    write(
        &out,
        "slice.json",
        &json_doc(
            cfg,
            json!({
                "r0": r0,
                "cos_r0": r0.cos(),
                "substitution_residual": substitution,
                "residual_sup": res,
            }),
        ),
    )?;
    write(
        &out,
        "profile.svg",
        &profile_plot(cfg, "slice in geodesic polar coordinates", vec![Series::new("slice", graph_meridian(&graph))]),
    )?;
    let lines = vec![
        format!("r0 = {r0}"),
        format!("cos r0 = {}", r0.cos()),
        format!("substitution residual = {substitution:e}"),
        format!("residual on grid = {res:e}"),
    ];
    let failure = (res > cfg.tol).then(|| {
        CliError::new(
            ErrorKind::NonConvergence,
            format!("slice residual {res:e} exceeds tolerance {:e}", cfg.tol),
        )
    });
    Ok(Outcome {
        lines,
        summary: Summary {
            status: if failure.is_none() { "ok" } else { "residual" }.into(),
            iterations: 0,
            residual_sup: res,
            anisotropy: 0.0,
        },
        failure,
    })
}

enum Surface {
    Body(AxiConvexBody),
    Graph(AxiRadialGraph),
}

pub fn quantities(cfg: &mut RunConfig) -> Result<Outcome, CliError> {
    let surface = match cfg.body.clone() {
        Some(path) => {
            let data = read_profile(&path)?;
            cfg.n = data.n;
            cfg.grid = data.intervals();
            match data.representation {
                Representation::SupportEuclid => {
                    cfg.ambient = "euclid".into();
                    Surface::Body(data.to_body()?)
                }
                Representation::RadialHemisphere => {
                    cfg.ambient = "hemisphere".into();
                    Surface::Graph(data.to_graph()?)
                }
            }
        }
        None if cfg.ambient == "hemisphere" => {
            let r0 = slice_radius(&speed(cfg)?, cfg.alpha)?;
            Surface::Graph(AxiRadialGraph::slice(cfg.n, Ambient::Hemisphere, cfg.grid, r0)?)
        }
        None => {
            let r_star = problem(cfg)?.sphere_radius();
            Surface::Body(initial_body(cfg, r_star)?.0)
        }
    };
    let f = speed(cfg)?;
    let (table, curve) = match &surface {
        Surface::Body(b) => (QuantityTable::evaluate(b, &f, cfg.alpha)?, meridian(b)),
        Surface::Graph(g) => (QuantityTable::evaluate(g, &f, cfg.alpha)?, graph_meridian(g)),
    };
    let out = cfg.out_dir();
    write(&out, "quantities.csv", &table.to_csv(&cfg.header_lines()))?;
    let theta = &table.theta;
    let field = |v: &[f64]| theta.iter().copied().zip(v.iter().copied()).collect::<Vec<_>>();
    let beta = table.beta.beta_star;
    write(
        &out,
        "fields.svg",
        &Plot {
            title: "maximum-principle quantities".into(),
            x_label: "theta".into(),
            y_label: "value".into(),
            header: cfg.header_lines(),
            series: vec![
                Series::new("Z", field(&table.z.values)),
                Series::new("W", field(&table.w.values)),
                Series::new("beta*", vec![(theta[0], beta), (theta[theta.len() - 1], beta)]).dashed(),
            ],
            ..Default::default()
        }
        .render(),
    )?;
    write(&out, "profile.svg", &profile_plot(cfg, "meridian profile", vec![Series::new("body", curve)]))?;
    let w_max = table.w.max();
    let lines = vec![
        format!("beta* = {beta}"),
        format!("max W = {w_max}"),
        format!("|beta* - max W| = {:e}", (beta - w_max).abs()),
        format!("Z range = [{}, {}]", table.z.min(), table.z.max()),
    ];
    Ok(Outcome {
        lines,
        summary: Summary {
            status: "ok".into(),
            iterations: 0,
            residual_sup: (beta - w_max).abs(),
            anisotropy: 0.0,
        },
        failure: None,
    })
}

/// Runs one non-sweep command.
pub fn run(cfg: &mut RunConfig) -> Result<Outcome, CliError> {
    match cfg.command {
        Command::CheckFn => check_fn(cfg),
        Command::Solve => solve(cfg),
        Command::Flow => flow(cfg),
        Command::Slice => slice(cfg),
        Command::Quantities => quantities(cfg),
        Command::Sweep => Err(CliError::config("nested sweeps are not supported")),
    }
}

pub fn sweep(base: &RunConfig, plan: &SweepPlan, jobs: Vec<RunConfig>) -> Result<Outcome, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(base.jobs)
        .build()
        .map_err(|e| CliError::new(ErrorKind::Io, format!("cannot start thread pool: {e}")))?;
    let results: Vec<(RunConfig, Result<Outcome, CliError>)> = pool.install(|| {
        jobs.into_par_iter()
            .map(|mut cfg| {
                let result = run(&mut cfg);
                if let Err(e) | Ok(Outcome { failure: Some(e), .. }) = &result {
                    let _ = write(Path::new(&cfg.out), "error.json", &(e.to_json() + "\n"));
                }
                (cfg, result)
            })
            .collect()
    });
    let mut csv = comment_header(base);
    let _ = writeln!(csv, "# task={}", plan.task.name());
    csv.push_str("job,fn,n,alpha,seed,status,iterations,residual_sup,anisotropy,out\n");
    let mut lines = Vec::new();
    let mut worst_code = 0;
    let mut failed = 0;
    for (index, (cfg, result)) in results.iter().enumerate() {
        let summary = match result {
            Ok(o) => o.summary.clone(),
            Err(e) => Summary {
                status: format!("error:{}", serde_json::to_value(e.kind).expect("kind serializes").as_str().unwrap_or("")),
                ..Summary::default()
            },
        };
        let code = match result {
            Ok(o) => o.failure.as_ref().map_or(0, |e| e.exit_code),
            Err(e) => e.exit_code,
        };
        if code != 0 {
            failed += 1;
            worst_code = worst_code.max(code);
        }
        let _ = writeln!(
            csv,
            "{index},\"{}\",{},{},{},{},{},{:e},{:e},{}",
            cfg.fn_spec, cfg.n, cfg.alpha, cfg.seed, summary.status, summary.iterations, summary.residual_sup,
            summary.anisotropy, cfg.out
        );
        lines.push(format!(
            "job {index:04} {} n={} alpha={} seed={}: {} ({} iterations, residual {:e})",
            cfg.fn_spec, cfg.n, cfg.alpha, cfg.seed, summary.status, summary.iterations, summary.residual_sup
        ));
    }
    write(&base.out_dir().join("sweep"), "summary.csv", &csv)?;
    let failure = (failed > 0).then(|| {
        let kind = if worst_code == 2 { ErrorKind::Config } else { ErrorKind::NonConvergence };
        CliError::new(kind, format!("{failed} of {} sweep jobs failed", results.len()))
    });
    Ok(Outcome {
        lines,
        summary: Summary {
            status: if failure.is_none() { "ok" } else { "failed" }.into(),
            iterations: results.len(),
            ..Summary::default()
        },
        failure,
    })
}
