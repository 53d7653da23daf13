use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use wglab::config::SCENARIOS;
use wglab::{run_scenario, ExperimentConfig};

/// Runs one named experiment and writes CSV/SVG artifacts plus `summary.json`.
///
/// Exit status: 0 when every check passes, 1 when a check fails, 2 on
/// configuration or IO errors.
#[derive(Parser, Debug)]
#[command(name = "wglab", version)]
struct Cli {
    /// One of: admissibility-scan, cluster-report, resonance-census,
    /// divisor-ledger, effective-run, full-vs-effective, nls-run,
    /// scattering-compare, dispersive-check.
    scenario: String,
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a configuration key, e.g. `--set radius=32`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if !SCENARIOS.contains(&cli.scenario.as_str()) {
        eprintln!("error: unknown scenario `{}`; expected one of {}", cli.scenario, SCENARIOS.join(", "));
        return ExitCode::from(2);
    }
    let cfg = match ExperimentConfig::load(&cli.scenario, cli.config.as_deref(), &cli.overrides) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match run_scenario(&cfg, &cli.out) {
        Ok(summary) => {
            for c in &summary.checks {
                let measured = c.measured.map_or("n/a".to_string(), |m| format!("{m:.6e}"));
                println!("{:<4} {:<32} {:>14}  {}", if c.pass { "ok" } else { "FAIL" }, c.id, measured, c.bound);
            }
            if summary.all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
