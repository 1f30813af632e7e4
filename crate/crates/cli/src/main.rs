use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;

use scsec_cli::{load_config, parse_schemes, run_sweep, write_outputs, ExperimentConfig, SweepResult};

/// Ergodic secrecy-rate sweeps for semantic-communication-assisted transmission.
#[derive(Debug, Parser)]
#[command(name = "scsec", version)]
struct Args {
    /// TOML experiment configuration; defaults apply to anything left out.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output_dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Fading seed (overrides `channel.seed`).
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated schemes: sc_optimal, sc_sca, bit_an, bit_only.
    #[arg(long)]
    schemes: Option<String>,
    /// Only report errors.
    #[arg(long)]
    quiet: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(args: &Args) -> anyhow::Result<()> {
    let mut cfg = match &args.config {
        Some(path) => load_config(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(out) = &args.out {
        cfg.output_dir = out.clone();
    }
    if let Some(seed) = args.seed {
        cfg.channel.seed = seed;
    }
    if let Some(list) = &args.schemes {
        cfg.schemes = parse_schemes(list)?;
    }
    cfg.validate()?;

    let result = run_sweep(&cfg)?;
    let written = write_outputs(&result, &cfg, &cfg.output_dir)
        .with_context(|| format!("writing results to {}", cfg.output_dir.display()))?;
    if !args.quiet {
        print_summary(&result);
        println!("wrote {} files to {}", written.len(), cfg.output_dir.display());
    }
    Ok(())
}

fn print_summary(result: &SweepResult) {
    println!(
        "{:<11} {:>3} {:>9} {:>11} {:>10} {:>10} {:>7} {:>6}",
        "scheme", "K", "P_avg(W)", "rate", "power(W)", "gap", "p=0", "iters"
    );
    for c in &result.cells {
        let r = &c.row;
        let gap = r.duality_gap.map(|g| format!("{g:.2e}")).unwrap_or_else(|| "-".into());
        let iters = c.sca.as_ref().map(|t| t.iterations.to_string()).unwrap_or_else(|| "-".into());
        println!(
            "{:<11} {:>3} {:>9} {:>11.6} {:>10.6} {:>10} {:>6.1}% {:>6}",
            r.scheme.tag(),
            r.k,
            r.p_bar,
            r.ergodic_rate,
            r.avg_power,
            gap,
            100.0 * c.zero_power_fraction,
            iters
        );
    }
    // States left at zero power still earn the semantic floor a1 * rho / K:
    // the receiver "recovers" a1 of the meaning without any signal.
    let floor_states: f64 = result.cells.iter().filter(|c| c.row.scheme.is_semantic()).map(|c| c.zero_power_fraction).sum();
    if floor_states > 0.0 {
        println!("note: zero-power states of the semantic schemes are credited the similarity floor a1 * rho / K");
    }
}
