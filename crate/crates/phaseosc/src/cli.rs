//! Command-line front end.
//!
//! Exit codes: 0 success, 1 configuration error, 2 solver error, 3 theorem
//! falsified (a generic model produced a nonnegative exponent), 4 failed
//! verification checks.

use crate::density::{solve_density, DensityGrid};
use crate::dynamics::{pullback, simulate_ensemble, NoiseCoupling};
use crate::error::{Error, Result};
use crate::lyapunov::{
    interval_contributions, lyapunov_flux_form, lyapunov_monte_carlo, lyapunov_quadrature,
    LyapunovEstimate,
};
use crate::model::{NoiseClass, OscillatorModel};
use crate::noise::NoiseStream;
use crate::output;
use clap::{Args, Parser, Subcommand};
use serde_json::{Map, Value};
use std::f64::consts::TAU;
use std::path::PathBuf;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;
pub const EXIT_FALSIFIED: i32 = 3;
pub const EXIT_VERIFY_FAILED: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "phaseosc",
    about = "Stationary densities, Lyapunov exponents, and noise-induced synchronization for stochastic phase oscillators",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the stationary density, estimate the Lyapunov exponent by every
    /// applicable method, and write density.csv plus summary.json.
    Analyze(AnalyzeArgs),
    /// Run the common-noise ensemble and the pullback experiment; write
    /// trajectory.csv plus pullback.json.
    Simulate(SimulateArgs),
    /// Rescale the noise coupling over a list of sigmas and run the analysis
    /// pipeline for each; write sweep.csv.
    Sweep(SweepArgs),
    /// Run the built-in verification suite and print a pass/fail table.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Model definition file (JSON).
    #[arg(long)]
    pub model: PathBuf,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Density grid size.
    #[arg(long, default_value_t = 4096)]
    pub n: usize,
    /// Base RNG seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Time step for the Monte Carlo estimator.
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    /// Monte Carlo paths.
    #[arg(long, default_value_t = 64)]
    pub mc_paths: usize,
    /// Monte Carlo horizon per path.
    #[arg(long, default_value_t = 2000.0)]
    pub mc_horizon: f64,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Model definition file (JSON).
    #[arg(long)]
    pub model: PathBuf,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Ensemble members, spread uniformly over the circle.
    #[arg(long, default_value_t = 16)]
    pub members: usize,
    /// Simulation horizon.
    #[arg(long, default_value_t = 500.0)]
    pub horizon: f64,
    /// Time step.
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    /// Base RNG seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Steps between trajectory snapshots.
    #[arg(long, default_value_t = 100)]
    pub stride: usize,
    /// Pullback release depths (comma-separated, increasing).
    #[arg(long, value_delimiter = ',', default_values_t = vec![50.0, 100.0, 200.0])]
    pub depths: Vec<f64>,
    /// Give each member an independent noise stream (control experiment;
    /// synchronization must not occur).
    #[arg(long)]
    pub independent_noise: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Model definition file (JSON); its sigma is replaced by each sweep value.
    #[arg(long)]
    pub model: PathBuf,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Noise multipliers (comma-separated, all >= 0).
    #[arg(long, value_delimiter = ',', required = true)]
    pub sigmas: Vec<f64>,
    /// Density grid size.
    #[arg(long, default_value_t = 4096)]
    pub n: usize,
    /// Base RNG seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Time step for the Monte Carlo estimator.
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    /// Monte Carlo paths per sigma.
    #[arg(long, default_value_t = 32)]
    pub mc_paths: usize,
    /// Monte Carlo horizon per path.
    #[arg(long, default_value_t = 1000.0)]
    pub mc_horizon: f64,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Print per-check timing and tolerance margins.
    #[arg(long)]
    pub verbose: bool,
}

pub fn run(cli: Cli) -> i32 {
    let outcome = match cli.command {
        Command::Analyze(args) => cmd_analyze(&args),
        Command::Simulate(args) => cmd_simulate(&args),
        Command::Sweep(args) => cmd_sweep(&args),
        Command::Verify(args) => Ok(cmd_verify(&args)),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::InvalidModel(_)
        | Error::InvalidParams(_)
        | Error::InvalidInput(_)
        | Error::InvalidTimes(_)
        | Error::InvalidHorizon(_)
        | Error::Io(_)
        | Error::Json(_) => EXIT_CONFIG,
        _ => EXIT_SOLVER,
    }
}

/// Everything the analysis pipeline produces for one model, with reasons for
/// whatever is unavailable. The JSON schema is stable: every field is always
/// present, unavailable estimators are null alongside a reason string.
struct Analysis {
    report: crate::model::GenericityReport,
    density: Option<DensityGrid>,
    density_reason: Option<String>,
    lambda_quadrature: Option<LyapunovEstimate>,
    lambda_flux: Option<LyapunovEstimate>,
    lambda_flux_reason: Option<String>,
    lambda_mc: LyapunovEstimate,
    intervals: Option<crate::lyapunov::IntervalContributions>,
    warnings: Vec<String>,
}

fn analyze_model(
    m: &OscillatorModel,
    n: usize,
    seed: u64,
    mc_paths: usize,
    mc_horizon: f64,
    dt: f64,
) -> Result<Analysis> {
    let report = m.check_genericity();
    let mut warnings = Vec::new();
    if !report.h1_holds {
        warnings.push(
            "coupling is constant (H1 fails): the negativity theorem makes no claim".to_string(),
        );
    }
    if !report.h2_holds {
        warnings.push(
            "coupling has a non-transversal zero (H2 fails): the negativity theorem makes no claim"
                .to_string(),
        );
    }

    let (density, density_reason) = if report.h2_holds {
        (Some(solve_density(m, n)?), None)
    } else {
        (
            None,
            Some("density solver requires transversal zeros (H2)".to_string()),
        )
    };

    let lambda_quadrature = match &density {
        Some(d) => Some(lyapunov_quadrature(m, d)?),
        None => None,
    };
    let (lambda_flux, lambda_flux_reason) = match &density {
        Some(d) if d.case == NoiseClass::NonVanishing => {
            (Some(lyapunov_flux_form(m, d)?), None)
        }
        Some(_) => (
            None,
            Some("flux-form estimator is undefined when the coupling vanishes".to_string()),
        ),
        None => (
            None,
            Some("no solved density available".to_string()),
        ),
    };
    let lambda_mc = lyapunov_monte_carlo(m, seed, mc_paths, mc_horizon, dt)?;
    let intervals = match &density {
        Some(d) => Some(interval_contributions(m, d)?),
        None => None,
    };
    Ok(Analysis {
        report,
        density,
        density_reason,
        lambda_quadrature,
        lambda_flux,
        lambda_flux_reason,
        lambda_mc,
        intervals,
        warnings,
    })
}

fn estimate_value(e: &Option<LyapunovEstimate>) -> Value {
    match e {
        Some(est) => {
            let mut m = Map::new();
            m.insert("value".into(), output::json_f64(est.value));
            m.insert("stderr".into(), output::json_f64(est.stderr));
            Value::Object(m)
        }
        None => Value::Null,
    }
}

fn summary_json(m: &OscillatorModel, a: &Analysis, n: usize, seed: u64) -> Value {
    let mut s = Map::new();
    s.insert("model".into(), output::model_to_value(m));
    s.insert("n".into(), Value::from(n as u64));
    s.insert("seed".into(), Value::from(seed));
    s.insert("generic".into(), Value::from(a.report.is_generic()));
    s.insert("h1".into(), Value::from(a.report.h1_holds));
    s.insert("h2".into(), Value::from(a.report.h2_holds));
    s.insert(
        "zeros".into(),
        Value::Array(
            a.report
                .zero_set
                .zeros
                .iter()
                .map(|z| {
                    let mut zm = Map::new();
                    zm.insert("phi".into(), output::json_f64(z.phi));
                    zm.insert("slope".into(), output::json_f64(z.slope));
                    Value::Object(zm)
                })
                .collect(),
        ),
    );
    s.insert(
        "case".into(),
        match &a.density {
            Some(d) => Value::String(
                match d.case {
                    NoiseClass::NonVanishing => "non_vanishing",
                    NoiseClass::Vanishing => "vanishing",
                }
                .to_string(),
            ),
            None => Value::Null,
        },
    );
    s.insert(
        "density_c".into(),
        a.density.as_ref().map_or(Value::Null, |d| output::json_f64(d.c)),
    );
    s.insert(
        "density_residual".into(),
        a.density
            .as_ref()
            .map_or(Value::Null, |d| output::json_f64(d.residual)),
    );
    s.insert(
        "density_reason".into(),
        a.density_reason
            .as_ref()
            .map_or(Value::Null, |r| Value::String(r.clone())),
    );
    s.insert("lambda_quadrature".into(), estimate_value(&a.lambda_quadrature));
    s.insert(
        "lambda_quadrature_reason".into(),
        if a.lambda_quadrature.is_some() {
            Value::Null
        } else {
            Value::String("no solved density available".into())
        },
    );
    s.insert("lambda_flux".into(), estimate_value(&a.lambda_flux));
    s.insert(
        "lambda_flux_reason".into(),
        a.lambda_flux_reason
            .as_ref()
            .map_or(Value::Null, |r| Value::String(r.clone())),
    );
    s.insert(
        "lambda_mc".into(),
        estimate_value(&Some(a.lambda_mc.clone())),
    );
    s.insert(
        "intervals".into(),
        match &a.intervals {
            Some(ic) => Value::Array(
                ic.intervals
                    .iter()
                    .map(|iv| {
                        let mut im = Map::new();
                        im.insert("lo".into(), output::json_f64(iv.lo));
                        im.insert("hi".into(), output::json_f64(iv.hi));
                        im.insert("I".into(), output::json_f64(iv.i));
                        Value::Object(im)
                    })
                    .collect(),
            ),
            None => Value::Null,
        },
    );
    s.insert(
        "intervals_sum_check".into(),
        a.intervals
            .as_ref()
            .map_or(Value::Null, |ic| output::json_f64(ic.sum_check)),
    );
    s.insert(
        "warnings".into(),
        Value::Array(a.warnings.iter().map(|w| Value::String(w.clone())).collect()),
    );
    Value::Object(s)
}

pub fn cmd_analyze(args: &AnalyzeArgs) -> Result<i32> {
    let m = output::load_model(&args.model)?;
    std::fs::create_dir_all(&args.out)?;
    let a = analyze_model(&m, args.n, args.seed, args.mc_paths, args.mc_horizon, args.dt)?;
    for w in &a.warnings {
        eprintln!("warning: {w}");
    }
    if let Some(d) = &a.density {
        std::fs::write(args.out.join("density.csv"), output::density_csv(d))?;
    }
    output::write_json(&args.out.join("summary.json"), &summary_json(&m, &a, args.n, args.seed))?;
    if let Some(q) = &a.lambda_quadrature {
        println!(
            "lambda_quadrature = {:.9}{}",
            q.value,
            if a.report.is_generic() { "" } else { " (model not generic; negativity not claimed)" }
        );
        if a.report.is_generic() && q.value >= 0.0 {
            eprintln!(
                "error: generic model produced lambda = {} >= 0; the negativity theorem is falsified",
                q.value
            );
            return Ok(EXIT_FALSIFIED);
        }
    } else {
        println!("lambda_quadrature unavailable; lambda_mc = {:.6} +/- {:.6}", a.lambda_mc.value, a.lambda_mc.stderr);
    }
    Ok(EXIT_OK)
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<i32> {
    let m = output::load_model(&args.model)?;
    if args.members < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least 2 members, got {}",
            args.members
        )));
    }
    std::fs::create_dir_all(&args.out)?;
    let stream = NoiseStream::new(args.seed, args.dt);
    let x0s: Vec<f64> = (0..args.members)
        .map(|i| TAU * i as f64 / args.members as f64)
        .collect();
    let snap_dt = args.dt * args.stride as f64;
    let n_snaps = (args.horizon / snap_dt).floor() as usize;
    let times: Vec<f64> = (0..=n_snaps).map(|i| i as f64 * snap_dt).collect();
    let coupling = if args.independent_noise {
        NoiseCoupling::Independent
    } else {
        NoiseCoupling::Common
    };
    let snaps = simulate_ensemble(&m, &stream, &x0s, args.horizon, &times, coupling)?;
    std::fs::write(args.out.join("trajectory.csv"), output::trajectory_csv(&snaps))?;

    let pb_inits = [0.0, TAU / 4.0, TAU / 2.0, 3.0 * TAU / 4.0];
    let samples = pullback(&m, &stream.substream(u64::MAX), &pb_inits, &args.depths)?;
    let mut root = Map::new();
    root.insert(
        "depths".into(),
        Value::Array(
            samples
                .iter()
                .map(|s| {
                    let mut sm = Map::new();
                    sm.insert("depth".into(), output::json_f64(s.depth));
                    sm.insert(
                        "endpoints".into(),
                        Value::Array(s.endpoints.iter().map(|&e| output::json_f64(e)).collect()),
                    );
                    sm.insert("spread".into(), output::json_f64(s.spread));
                    Value::Object(sm)
                })
                .collect(),
        ),
    );
    root.insert(
        "initial_points".into(),
        Value::Array(pb_inits.iter().map(|&x| output::json_f64(x)).collect()),
    );
    root.insert("seed".into(), Value::from(args.seed));
    root.insert(
        "noise".into(),
        Value::String(
            if args.independent_noise {
                "independent"
            } else {
                "common"
            }
            .to_string(),
        ),
    );
    output::write_json(&args.out.join("pullback.json"), &Value::Object(root))?;

    let final_d = snaps.last().map_or(f64::NAN, |s| s.max_pairwise_dist);
    println!("final max pairwise distance = {final_d:.6e}");
    Ok(EXIT_OK)
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<i32> {
    let m = output::load_model(&args.model)?;
    if args.sigmas.is_empty() {
        return Err(Error::InvalidInput("sweep needs at least one sigma".into()));
    }
    if args.sigmas.iter().any(|&s| s.is_nan() || s < 0.0) {
        return Err(Error::InvalidInput("sigmas must all be >= 0".into()));
    }
    std::fs::create_dir_all(&args.out)?;
    let mut csv = String::from(output::sweep_csv_header());
    for &sigma in &args.sigmas {
        let ms = m.with_sigma(sigma)?;
        let a = analyze_model(&ms, args.n, args.seed, args.mc_paths, args.mc_horizon, args.dt)?;
        let quad = a
            .lambda_quadrature
            .as_ref()
            .map(|e| e.value.to_string())
            .unwrap_or_default();
        let c = a
            .density
            .as_ref()
            .map(|d| d.c.to_string())
            .unwrap_or_default();
        csv.push_str(&format!(
            "{sigma},{quad},{},{},{c},{}\n",
            a.lambda_mc.value,
            a.lambda_mc.stderr,
            a.report.is_generic()
        ));
    }
    std::fs::write(args.out.join("sweep.csv"), csv)?;
    println!("swept {} sigma values", args.sigmas.len());
    Ok(EXIT_OK)
}

pub fn cmd_verify(args: &VerifyArgs) -> i32 {
    let results = crate::verify::run_all();
    let width = results.iter().map(|r| r.name.len()).max().unwrap_or(0);
    let mut failed = Vec::new();
    for r in &results {
        let status = if r.passed { "PASS" } else { "FAIL" };
        if args.verbose {
            println!(
                "{status}  {:<width$}  {:>8.2}s  {}",
                r.name, r.seconds, r.detail
            );
        } else {
            println!("{status}  {}", r.name);
        }
        if !r.passed {
            failed.push(r);
        }
    }
    println!(
        "{} of {} checks passed",
        results.len() - failed.len(),
        results.len()
    );
    if failed.is_empty() {
        EXIT_OK
    } else {
        for r in &failed {
            eprintln!("failed: {}: {}", r.name, r.detail);
        }
        EXIT_VERIFY_FAILED
    }
}
