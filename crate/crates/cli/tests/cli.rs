use std::path::Path;
use std::process::{Command, Output};

fn shrink(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shrink"))
        .current_dir(dir)
        .env_remove("SHRINK_OUT")
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn error_json(o: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&o.stderr);
    serde_json::from_str(text.trim()).unwrap_or_else(|e| panic!("stderr is not JSON ({e}): {text}"))
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn check_fn_flags_the_quotient_witness_as_expected() {
    let dir = tempfile::tempdir().unwrap();
    let o = shrink(dir.path(), &["check-fn", "--fn", "quotient:2,1", "--n", "3", "--samples", "10000", "--seed", "42"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = read(&dir.path().join("out"), "margins.csv");
    assert!(csv.starts_with("# command=check-fn\n# fn=quotient:2,1\n"));
    let row = csv.lines().find(|l| l.starts_with("log_convexity,")).unwrap();
    assert!(row.contains(",violated (expected),"));
    let worst: f64 = row.split(',').nth(4).unwrap().parse().unwrap();
    assert!(worst < -1e-6);
    let witnesses: serde_json::Value = serde_json::from_str(&read(&dir.path().join("out"), "witnesses.json")).unwrap();
    assert_eq!(witnesses["config"]["seed"], 42);
    assert!(witnesses["witnesses"]
        .as_array()
        .unwrap()
        .iter()
        .any(|w| w["inequality"] == "log_convexity" && w["kappa"].as_array().unwrap().len() == 3));
}

#[test]
fn check_fn_fails_steep_power_mean() {
    let dir = tempfile::tempdir().unwrap();
    let o = shrink(dir.path(), &["check-fn", "--fn", "power_mean:-2", "--n", "2"]);
    assert_eq!(o.status.code(), Some(1));
    let err = error_json(&o);
    assert_eq!(err["error"]["kind"], "check_failed");
    assert!(err["error"]["message"].as_str().unwrap().contains("inverse_concavity"));
    let witnesses = read(&dir.path().join("out"), "witnesses.json");
    assert!(witnesses.contains("\"status\": \"fail\""));
}

#[test]
fn check_fn_passes_ek_root() {
    let dir = tempfile::tempdir().unwrap();
    let o = shrink(dir.path(), &["check-fn", "--fn", "ek_root:2", "--n", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let csv = read(&dir.path().join("out"), "margins.csv");
    for line in csv.lines().filter(|l| !l.starts_with('#')).skip(1) {
        let worst: f64 = line.split(',').nth(4).unwrap().parse().unwrap();
        assert!(worst >= -1e-10, "{line}");
    }
}

#[test]
fn slice_prints_the_golden_radius() {
    let dir = tempfile::tempdir().unwrap();
    let o = shrink(dir.path(), &["slice", "--fn", "ek_root:2", "--alpha", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let r0: f64 = text.lines().next().unwrap().strip_prefix("r0 = ").unwrap().parse().unwrap();
    assert!((r0 - ((5f64.sqrt() - 1.0) / 2.0).acos()).abs() < 1e-10);
    assert!(text.contains("substitution residual = "));
    let profile = read(&dir.path().join("out"), "slice.profile");
    assert!(profile.starts_with("radial-hemisphere n=3\n# command=slice\n"));
}

#[test]
fn slice_rejects_euclidean_ambient() {
    let dir = tempfile::tempdir().unwrap();
    let o = shrink(dir.path(), &["slice", "--ambient", "euclid"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_json(&o)["error"]["kind"], "config");
}

#[test]
fn solve_example_then_quantities_on_the_result() {
    let dir = tempfile::tempdir().unwrap();
    let o = shrink(
        dir.path(),
        &["solve", "--fn", "quotient:2,1", "--alpha", "2", "--n", "3", "--perturb", "0.2", "--mode", "p2", "--seed", "7"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let out = dir.path().join("out");
    let report: serde_json::Value = serde_json::from_str(&read(&out, "solve.json")).unwrap();
    assert_eq!(report["stop"], "converged");
    assert!(report["anisotropy"].as_f64().unwrap() <= 1e-8);
    assert_eq!(report["config"]["mode"], "p2");
    let trace = read(&out, "solve.jsonl");
    let first: serde_json::Value = serde_json::from_str(trace.lines().next().unwrap()).unwrap();
    assert_eq!(first["config"]["fn"], "quotient:2,1");
    assert!(trace.lines().skip(1).all(|l| serde_json::from_str::<serde_json::Value>(l).unwrap()["residual_sup"].is_number()));
    for svg in ["profile.svg", "residual.svg"] {
        let s = read(&out, svg);
        assert!(s.starts_with("<svg") && s.contains("<polyline") && s.contains("fn=quotient:2,1"));
    }

    let q = shrink(dir.path(), &["quantities", "--body", "out/final.profile", "--fn", "ek_root:2", "--alpha", "2", "--out", "q"]);
    assert_eq!(q.status.code(), Some(0), "{}", String::from_utf8_lossy(&q.stderr));
    let csv = read(&dir.path().join("q"), "quantities.csv");
    assert!(csv.contains("# body=out/final.profile"));
    assert!(csv.contains("theta,kappa_1,kappa_2,kappa_3,F,Z,W,Tmax"));
    let footer = csv.lines().last().unwrap();
    assert!(footer.starts_with("# beta_star="));
    assert!(read(&dir.path().join("q"), "fields.svg").contains("beta*"));
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["flow", "--fn", "power_mean:-1", "--alpha", "1.5", "--grid", "16", "--seed", "3", "--max-steps", "400"];
    let snapshot = |dir: &Path| -> Vec<(String, Vec<u8>)> {
        let mut files: Vec<_> = std::fs::read_dir(dir.join("out"))
            .unwrap()
            .map(|e| e.unwrap().path())
            .collect();
        files.sort();
        files
            .into_iter()
            .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
            .collect()
    };
    let first = shrink(dir.path(), &args);
    assert_eq!(first.status.code(), Some(1));
    let a = snapshot(dir.path());
    let second = shrink(dir.path(), &args);
    assert_eq!(second.status.code(), Some(1));
    let b = snapshot(dir.path());
    assert_eq!(a.len(), 4);
    assert_eq!(a, b);
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(error_json(&first)["error"]["kind"], "non_convergence");
}

#[test]
fn flow_rounds_and_writes_roundness_plot() {
    let dir = tempfile::tempdir().unwrap();
    let o = shrink(dir.path(), &["flow", "--fn", "ek_root:2", "--grid", "16", "--perturb", "0.2", "--mode", "p2", "--tol", "1e-2"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let out = dir.path().join("out");
    assert!(stdout(&o).starts_with("stop = round"));
    let svg = read(&out, "roundness.svg");
    assert!(svg.contains("kappa_max / kappa_min - 1"));
    assert_eq!(svg.matches("<polyline").count(), 2);
    let profile = read(&out, "final.profile");
    assert!(profile.starts_with("support-euclid n=3\n# command=flow\n"));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("base.toml"), "fn = \"quotient:2,1\"\nn = 4\nsamples = 200\nseed = 5\n").unwrap();
    let o = shrink(dir.path(), &["check-fn", "--config", "base.toml", "--n", "3", "--out", "c"]);
    assert_eq!(o.status.code(), Some(0));
    let csv = read(&dir.path().join("c"), "margins.csv");
    assert!(csv.contains("# fn=quotient:2,1\n# n=3\n"));
    assert!(csv.contains("# seed=5\n# samples=200\n"));
}

#[test]
fn environment_sets_the_default_output_root() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_shrink"))
        .current_dir(dir.path())
        .env("SHRINK_OUT", "from-env")
        .args(["slice"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(dir.path().join("from-env/slice.json").exists());
    let o = Command::new(env!("CARGO_BIN_EXE_shrink"))
        .current_dir(dir.path())
        .env("SHRINK_OUT", "from-env")
        .args(["slice", "--out", "flag"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(dir.path().join("flag/slice.json").exists());
}

#[test]
fn configuration_errors_exit_two_with_json() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.toml"), "colour = 3\n").unwrap();
    let cases: &[&[&str]] = &[
        &["check-fn", "--fn", "bogus:1"],
        &["solve", "--no-such-flag"],
        &["solve", "--alpha", "0.5"],
        &["solve", "--ambient", "hemisphere"],
        &["solve", "--mode", "q7"],
        &["solve", "--fn", "ek_root:2", "--fn", "ek_root:1"],
        &["flow", "--offset", "0.3"],
        &["quantities", "--body", "missing.profile"],
        &["check-fn", "--config", "bad.toml"],
        &["check-fn", "--ambient", "torus"],
        &["sweep", "--task", "slice"],
    ];
    for args in cases {
        let o = shrink(dir.path(), args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        let err = error_json(&o);
        assert_eq!(err["error"]["kind"], "config", "{args:?}");
        assert_eq!(err["error"]["exit_code"], 2);
    }
    assert!(!dir.path().join("out").exists());
}

#[test]
fn sweep_jobs_own_their_directories_and_match_serial_runs() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("sweep.toml"),
        "grid = 32\n[sweep]\nfns = [\"quotient:2,1\", \"power_mean:-1\"]\nalphas = [1.5, 3.0]\nseeds = [1, 2]\n",
    )
    .unwrap();
    let parallel = shrink(dir.path(), &["sweep", "--config", "sweep.toml", "--jobs", "4", "--out", "p"]);
    assert_eq!(parallel.status.code(), Some(0), "{}", String::from_utf8_lossy(&parallel.stderr));
    let serial = shrink(dir.path(), &["sweep", "--config", "sweep.toml", "--jobs", "1", "--out", "s"]);
    assert_eq!(serial.status.code(), Some(0));
    let summary = read(&dir.path().join("p/sweep"), "summary.csv");
    assert_eq!(summary.lines().filter(|l| l.contains("converged")).count(), 8);
    for job in 0..8 {
        let name = format!("job-{job:04}");
        let a = read(&dir.path().join("p/sweep").join(&name), "solve.jsonl");
        let b = read(&dir.path().join("s/sweep").join(&name), "solve.jsonl");
        assert_eq!(a.lines().skip(1).collect::<Vec<_>>(), b.lines().skip(1).collect::<Vec<_>>());
        assert!(a.lines().next().unwrap().contains(&format!("p/sweep/{name}")));
    }
    assert_eq!(
        stdout(&parallel),
        stdout(&serial),
        "job lines are reported in grid order"
    );
    let single = shrink(
        dir.path(),
        &["solve", "--fn", "power_mean:-1", "--alpha", "3", "--seed", "2", "--grid", "32", "--out", "one"],
    );
    assert_eq!(single.status.code(), Some(0));
    let a = read(&dir.path().join("one"), "solve.jsonl");
    let b = read(&dir.path().join("p/sweep/job-0007"), "solve.jsonl");
    assert_eq!(a.lines().skip(1).collect::<Vec<_>>(), b.lines().skip(1).collect::<Vec<_>>());
}

#[test]
fn failing_sweep_jobs_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let o = shrink(
        dir.path(),
        &["sweep", "--task", "flow", "--fn", "ek_root:2", "--seed", "1", "--seed", "2", "--grid", "12", "--max-steps", "5", "--jobs", "2"],
    );
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(error_json(&o)["error"]["kind"], "non_convergence");
    let root = dir.path().join("out/sweep");
    assert!(read(&root, "summary.csv").lines().filter(|l| l.contains(",max_steps,")).count() == 2);
    assert!(read(&root.join("job-0001"), "error.json").contains("non_convergence"));
}
