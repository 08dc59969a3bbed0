use std::path::PathBuf;
use std::process::ExitCode;

use blowuplab::harness::{execute, parse_values, seed_override, sweep, HarnessConfig, HarnessError};
use clap::{Parser, Subcommand};

/// Fixed-point Lagrangian ODE experiments: blowup criteria and conjugate points.
#[derive(Parser)]
#[command(name = "blowuplab", version)]
struct Cli {
    /// Relative tolerance applied to every scenario.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Worker threads for scenario-level parallelism.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every scenario of a config file.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Repeat every scenario over values of one numeric parameter.
    Sweep {
        config: PathBuf,
        /// Dotted scenario path (`swirl.b0`) or alias (`H`, `a`).
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long)]
        values: String,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load(path: &PathBuf, tol: Option<f64>) -> Result<HarnessConfig, HarnessError> {
    let mut cfg = HarnessConfig::load(path)?;
    if let Some(seed) = seed_override()? {
        cfg.seed = seed;
    }
    if let Some(t) = tol {
        if !(t > 0.0 && t < 1.0) {
            return Err(HarnessError::Config(format!("--tol {t} must lie in (0, 1)")));
        }
        cfg.override_tol(t);
        cfg.validate()?;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { config, out } => load(config, cli.tol).and_then(|cfg| {
            let sum = execute(&cfg, out, cli.jobs)?;
            for r in &sum.runs {
                println!("{} {}", if r.pass { "PASS" } else { "FAIL" }, r.name);
                for f in &r.expectation_failures {
                    println!("    {f}");
                }
            }
            println!("{}/{} PASS", sum.passed, sum.total);
            Ok(if sum.all_pass() { 0 } else { 1 })
        }),
        Command::Sweep {
            config,
            param,
            values,
            out,
        } => load(config, cli.tol).and_then(|cfg| {
            let vals = parse_values(values)?;
            let (_, rows) = sweep(&cfg, param, &vals, out, cli.jobs)?;
            for r in &rows {
                println!("{} {}={} {}", r.run, r.parameter, r.value, r.outcome);
            }
            Ok(0)
        }),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
