use std::path::PathBuf;
use std::process::{Command, Output};

use tunnelnav_cli::scenario::Scenario;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tunnelnav"))
}

fn scenario(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn kv(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
        .parse()
        .unwrap()
}

#[test]
fn audit_reports_torus_constants() {
    let cfg = scenario("torus.toml");
    let o = run(&["audit", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!((kv(&text, "delta_tau") - 1.6).abs() < 1e-6);
    assert!((kv(&text, "delta_kappa") - 0.2).abs() < 1e-6);
    assert!(text.lines().all(|l| l.contains(" = ")));
}

#[test]
fn sine_scaling_suite_line() {
    let o = run(&["verify", "--suite", "lemma2", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "lemma2: PASS (100000 cases)\n");
}

#[test]
fn unknown_scenario_key_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(scenario("torus.toml")).unwrap();
    let path = dir.path().join("typo.toml");
    std::fs::write(
        &path,
        text.replace("d_star = 0.25", "d_star = 0.25\nd_stra = 0.25"),
    )
    .unwrap();
    let o = run(&["audit", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("d_stra"));
}

#[test]
fn bad_arguments_exit_2() {
    assert_eq!(run(&["audit"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        run(&["audit", "--config", "/no/such/file.toml"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["verify", "--suite", "nonsense"]).status.code(),
        Some(2)
    );
}

#[test]
fn failed_audit_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(scenario("torus.toml")).unwrap();
    let path = dir.path().join("wide.toml");
    // A clearance band wider than the tube's curvature radius allows.
    std::fs::write(&path, text.replace("d_plus = 0.4", "d_plus = 0.6")).unwrap();
    let o = run(&["audit", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("passed = false"));
}

#[test]
fn cylinder_sweep_is_exact() {
    let cfg = scenario("cylinder.toml");
    let o = run(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--alphas",
        "0.4,0.2,0.1,0.05,0.025",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("alpha,max_exactness,wellposed_rate"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 5);
    for r in rows {
        assert!(r[1] <= 1e-6, "{r:?}");
        assert_eq!(r[2], 1.0);
    }
}

#[test]
fn scan_emits_one_row_per_ray() {
    let cfg = scenario("torus.toml");
    let o = run(&[
        "scan",
        "--config",
        cfg.to_str().unwrap(),
        "--point",
        "2.2,0,0",
        "--alpha",
        "0.1",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("phi,distance,x,limit_y"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 64);
    for r in rows {
        let v: Vec<f64> = r.split(',').map(|x| x.parse().unwrap()).collect();
        // Close to its small-angle limit at this cone angle.
        assert!((v[2] - v[3]).abs() < 2e-3, "{r}");
    }
}

#[test]
fn outputs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenario("torus.toml");
    let mut outs = Vec::new();
    for k in 0..2 {
        let path = dir.path().join(format!("est{k}.csv"));
        let o = run(&[
            "estimate",
            "--config",
            cfg.to_str().unwrap(),
            "--seed",
            "11",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
        outs.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(outs[0], outs[1]);
    let text = String::from_utf8(outs.remove(0)).unwrap();
    assert!(text.starts_with("x,y,z,phi0,phi_pi,phi_star,exactness,well_posed\n"));
    assert_eq!(text.lines().count(), 9);
}

#[test]
fn seed_changes_sample_points() {
    let cfg = scenario("torus.toml");
    let a = run(&["estimate", "--config", cfg.to_str().unwrap(), "--seed", "1"]);
    let b = run(&["estimate", "--config", cfg.to_str().unwrap(), "--seed", "2"]);
    assert_ne!(stdout(&a), stdout(&b));
}

#[test]
fn open_cylinder_simulation_reaches_the_end() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("log.csv");
    let cfg = scenario("open_cylinder.toml");
    let o = run(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let report = stdout(&o);
    assert!(report.contains("solved = true"));
    assert!(report.contains("end_reached = true"));
    let log = std::fs::read_to_string(&csv).unwrap();
    assert!(log.starts_with("t,x,y,z,d,b,phi_star,exactness,well_posed\n"));
    assert!(log.lines().count() > 100);
}

#[test]
fn shipped_scenarios_round_trip() {
    for name in ["torus.toml", "cylinder.toml", "open_cylinder.toml"] {
        let sc = Scenario::load(&scenario(name)).unwrap();
        assert_eq!(Scenario::parse(&sc.to_toml()).unwrap(), sc, "{name}");
    }
}
