use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use stoqlab_cli::config::Scenario;
use stoqlab_cli::scenario::load_config;
use stoqlab_cli::{parse_config_with, run_scenario, ExitStatus};

#[derive(Parser, Debug)]
#[command(name = "stoqlab", version, about = "Stochastic quantum mechanics and SED numerical laboratory")]
struct Cli {
    /// eigen, evolve, fields, nelson, brownian, sed, zpf-check, balance or verify
    scenario: String,
    /// Flat dotted-key config file; defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Ensembles 10x smaller, statistical tolerances widened by sqrt(10).
    #[arg(long)]
    fast: bool,
    /// Output directory (overrides `output_dir` in the config).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("STOQLAB_THREADS") else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| format!("STOQLAB_THREADS must be a non-negative integer (got {raw:?})"))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn exit(status: ExitStatus) -> ExitCode {
    ExitCode::from(status.code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Some(scenario) = Scenario::from_name(&cli.scenario) else {
        let names: Vec<&str> = Scenario::ALL.iter().map(|s| s.name()).collect();
        eprintln!("unknown scenario `{}`; use one of {}", cli.scenario, names.join(", "));
        return exit(ExitStatus::InvalidInput);
    };
    if let Err(e) = configure_threads() {
        eprintln!("{e}");
        return exit(ExitStatus::InvalidInput);
    }
    let parsed = match &cli.config {
        Some(path) => load_config(path, scenario),
        None => parse_config_with("", Some(scenario)),
    };
    let mut cfg = match parsed {
        Ok(cfg) => cfg,
        Err(errors) => {
            eprintln!("invalid config:\n{errors}");
            return exit(ExitStatus::InvalidInput);
        }
    };
    if let Some(out) = cli.out {
        cfg.output_dir = out;
    }
    if cli.fast {
        cfg.apply_fast();
    }
    let outcome = run_scenario(&cfg);
    for line in &outcome.lines {
        println!("{line}");
    }
    if let Some(err) = &outcome.manifest.error {
        eprintln!("error: {err}");
    }
    for flag in &outcome.manifest.flags {
        eprintln!("flag: {flag}");
    }
    println!(
        "stoqlab {}: {:?} (exit {}), artifacts in {}",
        scenario,
        outcome.status,
        outcome.status.code(),
        cfg.output_dir.display()
    );
    exit(outcome.status)
}
