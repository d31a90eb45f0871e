use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use mcdf_core::check::{run_checks, Scale};
use mcdf_core::config::RunConfig;
use mcdf_core::report::{sweep_table, ResultDocument};
use mcdf_core::run::{solve, sweep};
use mcdf_core::Error;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

/// Finite-basis MCDF laboratory: min-max solves, light-speed sweeps, invariant checks.
#[derive(Parser)]
#[command(name = "mcdf", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve at one light speed and write a result document.
    Solve {
        #[command(flatten)]
        run: RunArgs,
        /// Start from a previous result document instead of the MCHF reference.
        #[arg(long, value_name = "RESULT_JSON")]
        warm_start: Option<PathBuf>,
    },
    /// Solve for increasing light speeds and write the limit diagnostics.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Run the invariant suite on random data.
    Check {
        #[arg(long, default_value = "small", value_parser = ["tiny", "small", "default"])]
        scale: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the report as JSON into this directory.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
        /// Scale the mean-field Coulomb kernel by 1 + EPS (self-test of the suite).
        #[arg(long, value_name = "EPS", hide = true)]
        inject_fault: Option<f64>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, value_name = "TOML")]
    config: PathBuf,
    /// Output directory (overrides `output.directory`).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for the MCHF multi-start (results do not depend on it).
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

/// Failure classes mapped to exit codes.
enum Failure {
    /// configuration, infeasible floor, unreadable input, unwritable output
    Input(anyhow::Error),
    /// no convergence, subcritical light speed, failed certification
    Numerical(anyhow::Error),
}

impl Failure {
    fn from_core(e: Error) -> Self {
        match e {
            Error::Config { .. } | Error::InfeasibleFloor { .. } | Error::DimensionGuard { .. } | Error::InvalidBasis(_) | Error::Io(_) | Error::Json(_) | Error::Csv(_) => Failure::Input(e.into()),
            _ => Failure::Numerical(e.into()),
        }
    }
}

fn load(run: &RunArgs) -> Result<(RunConfig, PathBuf), Failure> {
    let mut cfg = RunConfig::from_path(&run.config).map_err(Failure::from_core)?;
    if let Some(seed) = run.seed {
        cfg.seed = seed;
    }
    if run.threads == 0 {
        return Err(Failure::Input(anyhow::anyhow!("--threads must be at least 1")));
    }
    cfg.mchf.threads = run.threads;
    let dir = run.out.clone().unwrap_or_else(|| PathBuf::from(&cfg.output.directory));
    ensure_writable(&dir).map_err(Failure::Input)?;
    Ok((cfg, dir))
}

/// Fails before any computation if results could not be written.
fn ensure_writable(dir: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create output directory {}", dir.display()))?;
    let probe = dir.join(".mcdf-write-probe");
    std::fs::write(&probe, b"").with_context(|| format!("output directory {} is not writable", dir.display()))?;
    std::fs::remove_file(&probe).ok();
    Ok(())
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display())).map_err(Failure::Input)
}

fn run_solve(run: &RunArgs, warm: Option<&Path>) -> Result<(), Failure> {
    let (cfg, dir) = load(run)?;
    let warm = match warm {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display())).map_err(Failure::Input)?;
            Some(ResultDocument::from_json(&text).map_err(Failure::from_core)?)
        }
        None => None,
    };
    let out = solve(&cfg, warm.as_ref()).map_err(Failure::from_core)?;
    let doc = &out.document;
    let path = dir.join(&cfg.output.result);
    write(&path, &doc.to_json())?;
    let s = &doc.solution;
    println!("c                 {}", s.light_speed);
    println!("I^K (MCHF)        {:.12}", doc.reference.energy);
    println!("E - Nc^2          {:.12}", s.energy_shifted);
    println!("E                 {:.12}", s.energy.total);
    println!("min_occ / gamma   {:.6e} / {:.6e}", s.min_occ, s.gamma_floor);
    println!("df1 / df2         {:.3e} / {:.3e}", s.residual_df1, s.residual_df2);
    println!("iterations        {} outer, {} inner", s.iterations, s.inner_iterations);
    for c in doc.certificate.checks.iter().filter(|c| !c.passed) {
        println!("FAILED CHECK      {} = {:.3e} (threshold {:?})", c.name, c.value, c.threshold);
    }
    println!("certified         {}", doc.certificate.passed);
    println!("result            {}", path.display());
    if doc.certificate.passed {
        Ok(())
    } else {
        Err(Failure::Numerical(anyhow::anyhow!("solution failed certification")))
    }
}

fn run_sweep(run: &RunArgs) -> Result<(), Failure> {
    let (cfg, dir) = load(run)?;
    let out = sweep(&cfg).map_err(Failure::from_core)?;
    let doc = &out.document;
    write(&dir.join(&cfg.output.table), &sweep_table(&doc.records).map_err(Failure::from_core)?)?;
    write(&dir.join(&cfg.output.summary), &doc.to_json())?;
    println!("{:>10} {:>18} {:>12} {:>12} {:>12} {:>10} {:>9}", "c", "E-Nc^2-I^K", "|X|", "kin.bal.", "lambda_band", "min_occ", "certified");
    for (r, e) in doc.records.iter().zip(&doc.errors) {
        println!(
            "{:>10} {:>18.6e} {:>12.4e} {:>12.4e} {:>12.4e} {:>10.3e} {:>9}",
            r.c, r.gap_to_ik, r.small_component_norm, r.kinetic_balance_residual, r.lambda_band, r.min_occ, r.certified
        );
        if let Some(e) = e {
            println!("           error: {e}");
        }
    }
    let s = &doc.summary;
    println!("slopes: gap {:.3}, |X| {:.3}, kinetic balance {:.3}", s.gap_slope, s.small_component_slope, s.kinetic_balance_slope);
    println!("occupations above gamma at large c: {}", doc.persistence.persistent);
    println!("certified {}/{}", s.certified, s.points);
    if 2 * s.certified >= s.points {
        Ok(())
    } else {
        Err(Failure::Numerical(anyhow::anyhow!("fewer than half of the sweep points were certified")))
    }
}

fn run_check(scale: &str, seed: u64, out: Option<&Path>, fault: Option<f64>) -> Result<(), Failure> {
    let scale: Scale = scale.parse().map_err(Failure::from_core)?;
    if let Some(dir) = out {
        ensure_writable(dir).map_err(Failure::Input)?;
    }
    let report = run_checks(scale, seed, fault).map_err(Failure::from_core)?;
    for r in &report.results {
        println!("{} {:<42} {:.3e}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.value);
    }
    if let Some(dir) = out {
        write(&dir.join("check.json"), &report.to_json())?;
    }
    if report.passed {
        Ok(())
    } else {
        Err(Failure::Numerical(anyhow::anyhow!("{} invariant(s) failed", report.failures().count())))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let result = match &cli.command {
        Command::Solve { run, warm_start } => run_solve(run, warm_start.as_deref()),
        Command::Sweep { run } => run_sweep(run),
        Command::Check { scale, seed, out, inject_fault } => run_check(scale, *seed, out.as_deref(), *inject_fault),
    };
    eprintln!("wall time {:.3} s", start.elapsed().as_secs_f64());
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}
