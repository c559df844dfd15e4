use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hrla::diagnostics::{kl_decay_profile, BlockLaw};
use hrla::harness::{self, presets, ExperimentConfig, InitSpec, SamplerKind};
use hrla::optimizer::{global_optimize, required_sample_count, theory_constants, BoundsRequest};
use hrla::potentials::PotentialSpec;
use hrla::samplers::run_chain;
use hrla::{HrlaParams, Result};

#[derive(Parser)]
#[command(name = "hrla", version, about = "Global optimization by sampling Gibbs measures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a benchmark protocol and write curves.csv, probabilities.csv and summary.csv.
    Experiment(ExperimentArgs),
    /// Sample N chains and return the best final point.
    Optimize(OptimizeArgs),
    /// Exact KL profile of the sampler on a quadratic potential.
    ValidateGaussian(GaussianArgs),
    /// Sample count and inverse temperature needed for an (ε, δ) guarantee.
    Bounds(BoundsArgs),
}

#[derive(Args)]
struct ExperimentArgs {
    /// Config file of `key = value` lines.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    /// Built-in protocol: table1, figure2, comparison, table2, table3.
    #[arg(long)]
    preset: Option<String>,
    /// Override a config key, e.g. `--set h=0.001`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct OptimizeArgs {
    #[arg(long, default_value = "rastrigin")]
    potential: String,
    #[arg(long, default_value_t = 10)]
    d: usize,
    /// Curvature of the quadratic potential.
    #[arg(long, default_value_t = 1.0)]
    curvature: f64,
    #[arg(long)]
    a: f64,
    #[arg(long)]
    h: f64,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value = "hrla")]
    sampler: String,
    /// `gaussian <mean> <variance>` or `dirac <point>`.
    #[arg(long, default_value = "gaussian 3 10")]
    init: String,
}

#[derive(Args)]
struct GaussianArgs {
    #[arg(long, default_value_t = 4.0)]
    a: f64,
    #[arg(long, default_value_t = 10.0)]
    b: f64,
    #[arg(long)]
    h: f64,
    #[arg(long)]
    k: usize,
    /// Curvature μ of U(x) = μ‖x‖²/2.
    #[arg(long, default_value_t = 1.0)]
    curvature: f64,
    #[arg(long, default_value_t = 1)]
    d: usize,
    /// Initial position law N(mean, var) per coordinate; momentum starts at its Gibbs law.
    #[arg(long, default_value_t = 3.0)]
    init_mean: f64,
    #[arg(long, default_value_t = 10.0)]
    init_var: f64,
    /// Path of kl_profile.csv.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long)]
    eps: f64,
    #[arg(long)]
    delta: f64,
    /// Concentration constant.
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    /// Smoothness constant of ∇U.
    #[arg(long, default_value_t = 1.0)]
    l: f64,
    #[arg(long, default_value_t = 1.0)]
    a0: f64,
    /// Log-Sobolev constant; enables the step-size and iteration schedule.
    #[arg(long)]
    rho: Option<f64>,
    /// Inverse temperature for the schedule (defaults to the computed minimum).
    #[arg(long)]
    a: Option<f64>,
    #[arg(long, default_value_t = 10)]
    d: usize,
    /// Initial KL divergence to the extended Gibbs law.
    #[arg(long, default_value_t = 1.0)]
    kl0: f64,
}

fn experiment(args: ExperimentArgs) -> Result<()> {
    let mut overrides = args.overrides;
    if let Some(w) = args.workers {
        overrides.push(format!("workers={w}"));
    }
    let cfg = match (&args.config, &args.preset) {
        (Some(path), _) => ExperimentConfig::load_with_overrides(path, &overrides)?,
        (None, Some(name)) => {
            let text = presets::by_name(name)?.to_string();
            ExperimentConfig::parse_with_overrides(&text, &overrides)?
        }
        (None, None) => unreachable!("clap requires one of --config and --preset"),
    };
    let out = harness::run_experiment(&cfg)?;
    harness::write_outputs(&args.out, &out)?;
    let s = &out.summary;
    println!(
        "{} {} h={} a={} M={} N={} K={}: avg {:.4} median {:.4} sd {:.4} ({} gradient evaluations)",
        cfg.potential, s.sampler, s.h, s.a_final, s.m, s.n, s.k, s.stats.avg, s.stats.median, s.stats.sd,
        out.gradient_evaluations
    );
    println!("wrote {}", args.out.display());
    Ok(())
}

fn optimize(args: OptimizeArgs) -> Result<()> {
    let spec = PotentialSpec::from_name(&args.potential, args.d, args.curvature)?;
    let potential = spec.build()?;
    let sampler: SamplerKind = args.sampler.parse()?;
    let params = sampler.params(args.a, args.h)?;
    let init = args.init.parse::<InitSpec>()?.resolve(args.d)?;
    let oracle = |_, stream| run_chain(&params, potential.as_ref(), &init, args.k, stream, None).map(|r| r.final_state.x);
    let outcome = global_optimize(oracle, potential.as_ref(), args.n, args.seed, 0)?;
    println!("best sample {} of {}", outcome.best_index, args.n);
    println!("U = {}", outcome.best_value);
    let point: Vec<String> = outcome.best_point.iter().map(|v| format!("{v:.6}")).collect();
    println!("x = [{}]", point.join(", "));
    Ok(())
}

fn validate_gaussian(args: GaussianArgs) -> Result<()> {
    let params = HrlaParams::full(1.0, 1.0, args.a / args.b, args.a, args.b, 1.0 / args.a, 1.0 / args.b, args.h)?;
    let init = BlockLaw::new([args.init_mean, 0.0], [[args.init_var, 0.0], [0.0, 1.0 / args.b]]);
    let profile = kl_decay_profile(&params, args.curvature, args.k, &init, args.d)?;
    println!("KL(0) = {:.6e}", profile.kl[0]);
    println!("KL({}) = {:.6e}", args.k, profile.terminal());
    println!("floor = {:.6e}", profile.floor);
    match (profile.log_rate, profile.r_squared) {
        (Some(rate), Some(r2)) => println!(
            "pre-floor segment: {} iterations, log-KL slope {:.6e} per iteration, R² {:.6}",
            profile.pre_floor_len, rate, r2
        ),
        _ => println!("pre-floor segment too short to fit ({} iterations)", profile.pre_floor_len),
    }
    if let Some(path) = args.out {
        harness::write_kl_profile(&path, &profile)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn bounds(args: BoundsArgs) -> Result<()> {
    let req = BoundsRequest {
        epsilon: args.eps,
        delta: args.delta,
        concentration: args.c,
        smoothness: args.l,
        a0: args.a0,
        log_sobolev: args.rho,
    };
    let b = required_sample_count(&req)?;
    println!("N_min = {}", b.n_min);
    println!("a_min = {}", b.a_min);
    if let Some(rho) = args.rho {
        let a = args.a.unwrap_or(b.a_min);
        let params = HrlaParams::from_inverse_temperature(a, 1.0)?;
        let tc = theory_constants(&params, rho, args.l, args.d)?;
        let target = args.eps * args.eps / 18.0;
        let sched = tc.kl_schedule(target, args.kl0)?;
        println!("theta = {:.6e}  h_max = {:.6e}", tc.theta, tc.h_max);
        println!("for KL <= {target:.6e} at a = {a}: h = {:.6e}, K = {}", sched.h, sched.iterations);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Experiment(a) => experiment(a),
        Command::Optimize(a) => optimize(a),
        Command::ValidateGaussian(a) => validate_gaussian(a),
        Command::Bounds(a) => bounds(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::FAILURE
        }
    }
}
