//! `cshadow`: config-driven central shadowing experiments.
//!
//! Exit codes: 0 certified / clean, 1 uncertified, 2 invalid input.

mod config;
mod svg;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use central_shadow::shadow::{
    central_shadow_with, derive_constants, plaque_probe, probe_seed_radius, reduction_power, ReportFiles,
    ShadowOptions,
};
use central_shadow::{ShadowError, SystemModel};
use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use config::ExperimentConfig;

#[derive(Parser)]
#[command(name = "cshadow", version, about = "Central shadowing experiments on toral models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the hyperbolicity data and derived constants as JSON
    Constants(RunArgs),
    /// Shadow one pseudotrajectory and write input / output CSV and a report
    Shadow(RunArgs),
    /// Shadow over a list of d values and fit the log-log slope
    Sweep(RunArgs),
    /// Compare central pseudotrajectories from several stable seeds
    Probe(RunArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    /// Experiment config (JSON)
    #[arg(long)]
    config: PathBuf,
    /// Output directory
    #[arg(long, default_value = "cshadow-out")]
    out: PathBuf,
    /// Leave the generation time out of the SVG plot
    #[arg(long)]
    no_timestamp: bool,
}

enum Failure {
    Invalid(ShadowError),
    Io(String),
}

impl From<ShadowError> for Failure {
    fn from(e: ShadowError) -> Self {
        Failure::Invalid(e)
    }
}

type Outcome = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = match &cli.command {
        Command::Constants(a) => cmd_constants(a),
        Command::Shadow(a) => cmd_shadow(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Probe(a) => cmd_probe(a),
    };
    match run {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Invalid(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn load(args: &RunArgs) -> Result<(ExperimentConfig, SystemModel), Failure> {
    let cfg = ExperimentConfig::load(&args.config)?;
    let sys = cfg.build_system()?;
    Ok((cfg, sys))
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::Io(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("finite fields");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct Dims {
    stable: usize,
    center: usize,
    unstable: usize,
}

#[derive(Serialize)]
struct ConstantsReport<'a> {
    kind: central_shadow::SystemKind,
    dims: Dims,
    note: Option<&'static str>,
    /// iterate of the map the construction runs on
    power: u32,
    hyperbolicity: &'a central_shadow::HyperbolicityData,
    constants: central_shadow::ShadowConstants,
    /// largest `d` accepted for the original step
    admissible_d: f64,
}

fn cmd_constants(args: &RunArgs) -> Outcome {
    let (cfg, sys) = load(args)?;
    let power = reduction_power(&sys)?;
    let psys = sys.system_power(power)?;
    let constants = derive_constants(psys.hyperbolicity(), psys.sup_df(), cfg.mu_hint())?;
    let r = sys.sup_df();
    let growth: f64 = (0..power).map(|i| r.powi(i as i32)).sum();
    let (s, c, u) = sys.dims();
    let report = ConstantsReport {
        kind: sys.kind(),
        dims: Dims {
            stable: s,
            center: c,
            unstable: u,
        },
        note: (c == 0).then_some("center dimension 0: shadowing orbits are true orbits"),
        power,
        hyperbolicity: psys.hyperbolicity(),
        constants,
        admissible_d: constants.d0 / growth,
    };
    print!("{}", to_json(&report));
    Ok(0)
}

fn cmd_shadow(args: &RunArgs) -> Outcome {
    let (cfg, sys) = load(args)?;
    let t = cfg.trajectory()?;
    let traj = t.generate(&sys, t.single_d()?)?;
    let opts = ShadowOptions {
        mu_hint: cfg.mu_hint(),
    };
    let r = central_shadow_with(&sys, &traj, &opts)?;
    let files = ReportFiles {
        input_csv: "input.csv".into(),
        output_csv: "output.csv".into(),
    };
    write(&args.out, &files.input_csv, &traj.to_csv_string())?;
    write(&args.out, &files.output_csv, &r.y.to_csv_string())?;
    let mut report = r.report_json(&files);
    report.push('\n');
    write(&args.out, "report.json", &report)?;
    println!(
        "d = {:e}, sup_dist = {:e} (bound {:e}), max central jump {:e}, certified: {}",
        r.d,
        r.sup_dist,
        r.lipschitz * r.d,
        r.max_central_jump,
        r.certified
    );
    for line in &r.diagnostics {
        println!("  {line}");
    }
    Ok(if r.certified { 0 } else { 1 })
}

#[derive(Debug, Clone, Serialize)]
struct SweepRow {
    d: f64,
    sup_dist: f64,
    max_central_jump: f64,
    certified: bool,
    lipschitz: f64,
}

#[derive(Serialize)]
struct SweepSummary<'a> {
    slope: Option<f64>,
    fitted_rows: usize,
    rows: &'a [SweepRow],
}

/// Least-squares slope of `log y` against `log x`; `None` with fewer than
/// two distinct points.
fn loglog_slope(pts: &[(f64, f64)]) -> Option<f64> {
    let logs: Vec<(f64, f64)> = pts
        .iter()
        .filter(|p| p.0 > 0.0 && p.1 > 0.0)
        .map(|p| (p.0.ln(), p.1.ln()))
        .collect();
    if logs.len() < 2 {
        return None;
    }
    let m = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / m;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from("d,sup_dist,max_central_jump,certified\n");
    for r in rows {
        s.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{}\n",
            r.d, r.sup_dist, r.max_central_jump, r.certified
        ));
    }
    s
}

fn cmd_sweep(args: &RunArgs) -> Outcome {
    let (cfg, sys) = load(args)?;
    let t = cfg.trajectory()?;
    let ds = t.sweep_ds()?;
    let opts = ShadowOptions {
        mu_hint: cfg.mu_hint(),
    };
    let rows = ds
        .par_iter()
        .map(|&d| {
            let traj = t.generate(&sys, t.level_for(d, sys.dim()))?;
            let r = central_shadow_with(&sys, &traj, &opts)?;
            Ok(SweepRow {
                d: traj.d(),
                sup_dist: r.sup_dist,
                max_central_jump: r.max_central_jump,
                certified: r.certified,
                lipschitz: r.lipschitz,
            })
        })
        .collect::<Vec<Result<SweepRow, ShadowError>>>()
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;

    let fit: Vec<(f64, f64)> = rows.iter().filter(|r| r.certified).map(|r| (r.d, r.sup_dist)).collect();
    let slope = loglog_slope(&fit);
    write(&args.out, "sweep.csv", &sweep_csv(&rows))?;
    let summary = SweepSummary {
        slope,
        fitted_rows: fit.len(),
        rows: &rows,
    };
    write(&args.out, "sweep.json", &to_json(&summary))?;

    let measured: Vec<(f64, f64)> = rows.iter().map(|r| (r.d, r.sup_dist)).collect();
    let bound: Vec<(f64, f64)> = rows.iter().map(|r| (r.d, r.lipschitz * r.d)).collect();
    let title = match slope {
        Some(s) => format!("sup distance vs d, fitted slope {s:.4}"),
        None => "sup distance vs d".to_string(),
    };
    let stamp = (!args.no_timestamp).then(|| {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |t| t.as_secs())
    });
    let plot = svg::loglog(
        &title,
        "d",
        "sup_dist",
        &[
            svg::Series {
                label: "sup_dist",
                color: "steelblue",
                dashed: false,
                points: &measured,
            },
            svg::Series {
                label: "Lipschitz bound",
                color: "firebrick",
                dashed: true,
                points: &bound,
            },
        ],
        stamp,
    );
    write(&args.out, "sweep.svg", &plot)?;

    for r in &rows {
        println!(
            "d = {:e}: sup_dist = {:e}, certified: {}",
            r.d, r.sup_dist, r.certified
        );
    }
    match slope {
        Some(s) => println!("log-log slope {s:.6} over {} certified rows", fit.len()),
        None => println!("log-log slope undefined: fewer than two certified rows with positive sup_dist"),
    }
    Ok(if rows.iter().all(|r| r.certified) { 0 } else { 1 })
}

fn cmd_probe(args: &RunArgs) -> Outcome {
    let (cfg, sys) = load(args)?;
    let t = cfg.trajectory()?;
    let traj = t.generate(&sys, t.single_d()?)?;
    let radius = probe_seed_radius(&sys, &traj)?;
    let seeds = cfg.seeds(radius)?;
    let report = plaque_probe(&sys, &traj, &seeds)?;
    write(&args.out, "probe.json", &to_json(&report))?;
    for p in &report.pairs {
        let dist = p.dist.iter().cloned().fold(0.0, f64::max);
        let res = p.residual.iter().cloned().fold(0.0, f64::max);
        let last = p.dist.last().copied().unwrap_or(0.0);
        println!(
            "seeds {} / {}: max distance {dist:e}, final distance {last:e}, max central residual {res:e}",
            p.a, p.b
        );
    }
    Ok(if report.lemma1_violations == 0 { 0 } else { 1 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(f64, f64)> = [1e-6, 1e-5, 1e-4, 1e-3].iter().map(|&d| (d, 3.0 * d)).collect();
        assert!((loglog_slope(&pts).unwrap() - 1.0).abs() < 1e-12);
        let sq: Vec<(f64, f64)> = pts.iter().map(|p| (p.0, p.0 * p.0)).collect();
        assert!((loglog_slope(&sq).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(loglog_slope(&pts[..1]), None);
    }

    #[test]
    fn sweep_csv_rows() {
        let rows = [SweepRow {
            d: 1e-4,
            sup_dist: 0.5,
            max_central_jump: 0.0,
            certified: true,
            lipschitz: 35.0,
        }];
        let s = sweep_csv(&rows);
        assert_eq!(
            s,
            "d,sup_dist,max_central_jump,certified\n1.0000000000000000e-4,5.0000000000000000e-1,0.0000000000000000e0,true\n"
        );
    }
}
