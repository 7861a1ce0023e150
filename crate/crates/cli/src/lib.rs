//! Command-line driver: loads a scenario, dispatches one subcommand and
//! writes reports or CSV with 17 significant digits.

pub mod scenario;
pub mod verify;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use tunnelnav_core::report::{csv_row, fmt_num, kv_line};
use tunnelnav_core::sensor::{limit_depth, scaled_depth_profile, scan_at};
use tunnelnav_core::{
    alpha_sweep, evaluate_solve, exactness, mdpbe, project, run_scenario, TunnelError, Vec3,
};

use scenario::{Prepared, Scenario};

#[derive(Debug, Parser)]
#[command(
    name = "tunnelnav",
    version,
    about = "Tunnel geometry audits, cone scans, direction estimates and simulations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Scenario file (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Brute-force dense-grid projection.
    #[arg(long)]
    oracle: bool,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the audit grid resolution.
    #[arg(long)]
    grid: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Regularity audit; prints one `name = value` line per constant.
    Audit {
        #[command(flatten)]
        common: Common,
    },
    /// Cone scan at one point: `phi,distance,x,limit_y`.
    Scan {
        #[command(flatten)]
        common: Common,
        /// Scan origin `x,y,z`; defaults to the scenario start.
        #[arg(long, value_parser = parse_point)]
        point: Option<Vec3>,
        /// Cone half-angle; defaults to the estimator angle.
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Direction estimate per sample point.
    Estimate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = parse_point)]
        point: Vec<Vec3>,
    },
    /// Estimator quality over a list of cone angles.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated cone angles.
        #[arg(long, value_delimiter = ',')]
        alphas: Vec<f64>,
    },
    /// Closed-loop run from the scenario start.
    Simulate {
        #[command(flatten)]
        common: Common,
    },
    /// Seeded property suites.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Suite name, repeatable; all suites when omitted.
        #[arg(long)]
        suite: Vec<String>,
    },
}

fn parse_point(s: &str) -> Result<Vec3, String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [x, y, z] => Ok(Vec3::new(x, y, z)),
        _ => Err(format!("expected x,y,z, got {s:?}")),
    }
}

/// Default scenario for `verify` without `--config`: the reference torus.
pub const DEFAULT_SCENARIO: &str = r#"
[tunnel]
kind = "torus"
major = 2.0
minor = 0.5

[zone]
d_minus = 0.1
d_plus = 0.4
d_star = 0.25
delta_s = 0.0

[run]
clearance = 0.3
"#;

enum Failure {
    Config(String),
    Check(String),
}

impl From<TunnelError> for Failure {
    fn from(e: TunnelError) -> Self {
        Failure::Check(e.to_string())
    }
}

/// Runs the CLI on `argv` (program name first) and returns the exit code:
/// 0 on success, 1 on a failed check or runtime error, 2 on bad arguments
/// or an unreadable scenario.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(Failure::Check(msg)) => {
            eprintln!("error: {msg}");
            1
        }
    }
}

fn load(common: &Common, fallback: Option<&str>) -> Result<Scenario, Failure> {
    match (&common.config, fallback) {
        (Some(path), _) => Scenario::load(path).map_err(Failure::Config),
        (None, Some(text)) => Scenario::parse(text).map_err(Failure::Config),
        (None, None) => Err(Failure::Config("--config <path> is required".into())),
    }
}

fn prepare(common: &Common, fallback: Option<&str>) -> Result<Prepared, Failure> {
    let sc = load(common, fallback)?;
    sc.prepare(common.grid, common.oracle)
        .map_err(|e| Failure::Config(e.to_string()))
}

fn seed(common: &Common, prep: &Prepared) -> u64 {
    common.seed.unwrap_or(prep.scenario.seed)
}

/// Writes to `--out`, the scenario's output path, or stdout.
fn emit(common: &Common, prep: &Prepared, text: &str) -> Result<(), Failure> {
    let target = common.out.as_deref().or(prep.scenario.output.as_deref());
    write_text(target, text)
}

fn write_text(target: Option<&Path>, text: &str) -> Result<(), Failure> {
    match target {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::Check(format!("{}: {e}", path.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Failure::Check(e.to_string()))
        }
    }
}

fn dispatch(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Audit { common } => audit(&common),
        Command::Scan {
            common,
            point,
            alpha,
        } => scan_cmd(&common, point, alpha),
        Command::Estimate { common, point } => estimate(&common, point),
        Command::Sweep { common, alphas } => sweep(&common, alphas),
        Command::Simulate { common } => simulate(&common),
        Command::Verify { common, suite } => verify_cmd(&common, suite),
    }
}

fn audit(common: &Common) -> Result<(), Failure> {
    let prep = prepare(common, None)?;
    let mut text = String::new();
    for (name, value) in prep.constants().entries() {
        writeln!(text, "{}", kv_line(name, value)).unwrap();
    }
    writeln!(text, "passed = {}", prep.audit.passed()).unwrap();
    emit(common, &prep, &text)?;
    if prep.audit.passed() {
        Ok(())
    } else {
        for f in &prep.audit.failures {
            eprintln!("{f}");
        }
        Err(Failure::Check(format!(
            "audit failed with {} violations",
            prep.audit.failures.len()
        )))
    }
}

fn start_point(prep: &Prepared) -> Option<Vec3> {
    prep.scenario.run.start.map(|p| Vec3::new(p[0], p[1], p[2]))
}

fn scan_cmd(common: &Common, point: Option<Vec3>, alpha: Option<f64>) -> Result<(), Failure> {
    let prep = prepare(common, None)?;
    let r = point
        .or_else(|| start_point(&prep))
        .ok_or_else(|| Failure::Config("scan needs --point or run.start".into()))?;
    let alpha = alpha.unwrap_or(prep.sensor.alpha_e);
    let cfg = prep.sensor.with_alpha(alpha);
    cfg.validate()?;
    let foot = project(&prep.tunnel, &r, &cfg.projection)?;
    let scan = scan_at(&prep.tunnel, &r, foot, alpha, &cfg)?;
    let d = scan.clearance();
    let mut text = String::from("phi,distance,x,limit_y\n");
    for (s, dist) in scaled_depth_profile(&scan, cfg.patch_radius_eta)
        .iter()
        .zip(&scan.distances)
    {
        let y = limit_depth(&scan.frame, d, s.phi);
        writeln!(
            text,
            "{}",
            csv_row(&[s.phi, dist.unwrap_or(f64::NAN), s.x, y])
        )
        .unwrap();
    }
    emit(common, &prep, &text)
}

fn estimate(common: &Common, points: Vec<Vec3>) -> Result<(), Failure> {
    let prep = prepare(common, None)?;
    let points = if points.is_empty() {
        prep.scenario
            .sample_points(&prep.tunnel, seed(common, &prep))?
    } else {
        points
    };
    let floor = Some(prep.constants().discrepancy_floor());
    let mut text = String::from("x,y,z,phi0,phi_pi,phi_star,exactness,well_posed\n");
    let mut failed = 0;
    for r in &points {
        let mut row = vec![r.x, r.y, r.z];
        match mdpbe(&prep.tunnel, r, &prep.sensor) {
            Ok(est) => {
                let ex = exactness(&prep.tunnel, &est, floor)?.angle;
                row.extend([
                    est.phi_zero.unwrap_or(f64::NAN),
                    est.phi_pi.unwrap_or(f64::NAN),
                    est.phi_star,
                    ex,
                    if est.well_posed { 1.0 } else { 0.0 },
                ]);
            }
            Err(e) => {
                eprintln!(
                    "estimate at ({}, {}, {}): {e}",
                    fmt_num(r.x),
                    fmt_num(r.y),
                    fmt_num(r.z)
                );
                failed += 1;
                row.extend([f64::NAN, f64::NAN, f64::NAN, f64::NAN, 0.0]);
            }
        }
        writeln!(text, "{}", csv_row(&row)).unwrap();
    }
    emit(common, &prep, &text)?;
    if failed == 0 {
        Ok(())
    } else {
        Err(Failure::Check(format!(
            "estimator failed at {failed} of {} points",
            points.len()
        )))
    }
}

fn sweep(common: &Common, alphas: Vec<f64>) -> Result<(), Failure> {
    let prep = prepare(common, None)?;
    let alphas = if alphas.is_empty() {
        prep.scenario.run.alphas.clone()
    } else {
        alphas
    };
    if alphas.is_empty() {
        return Err(Failure::Config("sweep needs --alphas or run.alphas".into()));
    }
    for &a in &alphas {
        prep.sensor
            .with_alpha(a)
            .validate()
            .map_err(|e| Failure::Config(e.to_string()))?;
    }
    let points = prep
        .scenario
        .sample_points(&prep.tunnel, seed(common, &prep))?;
    let rows = alpha_sweep(&prep.tunnel, &points, &alphas, &prep.sensor);
    let mut text = String::from("alpha,max_exactness,wellposed_rate\n");
    for r in &rows {
        writeln!(
            text,
            "{}",
            csv_row(&[r.alpha, r.max_exactness, r.wellposed_rate])
        )
        .unwrap();
    }
    emit(common, &prep, &text)
}

fn simulate(common: &Common) -> Result<(), Failure> {
    let prep = prepare(common, None)?;
    let start =
        start_point(&prep).ok_or_else(|| Failure::Config("simulate needs run.start".into()))?;
    let log = run_scenario(
        &prep.tunnel,
        prep.constants(),
        &prep.controller,
        &prep.sensor,
        &start,
    );
    let report = evaluate_solve(&log, &prep.tunnel, &prep.controller);

    let mut csv = String::from("t,x,y,z,d,b,phi_star,exactness,well_posed\n");
    for r in &log.rows {
        let p = r.position;
        let wp = if r.well_posed { 1.0 } else { 0.0 };
        writeln!(
            csv,
            "{}",
            csv_row(&[r.t, p.x, p.y, p.z, r.d, r.b, r.phi_star, r.exactness, wp])
        )
        .unwrap();
    }
    let mut kv = String::new();
    writeln!(kv, "solved = {}", report.solved).unwrap();
    for (name, v) in [
        ("t0", report.t0),
        ("direction_sign", report.direction_sign),
        ("min_abs_bdot", report.min_abs_bdot),
        ("v_b_required", report.v_b_required),
        ("final_d_error", report.final_d_error),
    ] {
        writeln!(kv, "{}", kv_line(name, v)).unwrap();
    }
    writeln!(kv, "d_monotone = {}", report.d_monotone).unwrap();
    writeln!(kv, "end_reached = {}", report.end_reached).unwrap();
    writeln!(kv, "positive_clearance = {}", report.positive_clearance).unwrap();
    if let Some(e) = &log.error {
        writeln!(kv, "stopped = {:?}", e.to_string()).unwrap();
    }

    // With an output file the CSV goes there and the report to stdout;
    // otherwise both go to stdout, separated by a blank line.
    match common.out.as_deref().or(prep.scenario.output.as_deref()) {
        Some(path) => {
            write_text(Some(path), &csv)?;
            write_text(None, &kv)?;
        }
        None => write_text(None, &format!("{csv}\n{kv}"))?,
    }
    if report.solved {
        Ok(())
    } else {
        Err(Failure::Check("run did not solve the tunnel".into()))
    }
}

fn verify_cmd(common: &Common, suites: Vec<String>) -> Result<(), Failure> {
    let names: Vec<String> = if suites.is_empty() {
        verify::SUITES.iter().map(|s| s.to_string()).collect()
    } else {
        suites
    };
    if let Some(bad) = names.iter().find(|n| !verify::SUITES.contains(&n.as_str())) {
        return Err(Failure::Config(format!(
            "unknown suite {bad:?}; known suites: {}",
            verify::SUITES.join(", ")
        )));
    }
    let prep = prepare(common, Some(DEFAULT_SCENARIO))?;
    let seed = seed(common, &prep);
    let mut text = String::new();
    let mut failed = 0;
    for name in &names {
        let outcome = verify::run_suite(name, &prep, seed).expect("suite name checked above");
        if !outcome.passed() {
            failed += 1;
        }
        writeln!(text, "{}", outcome.line()).unwrap();
    }
    write_text(common.out.as_deref(), &text)?;
    if failed == 0 {
        Ok(())
    } else {
        Err(Failure::Check(format!(
            "{failed} of {} suites failed",
            names.len()
        )))
    }
}
