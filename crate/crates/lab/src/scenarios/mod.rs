//! Named experiments. Each writes its artifacts into the output directory
//! and returns a [`Summary`] with explicit pass/fail per check.

mod dynamics;
mod lattice;
mod pde;

use std::path::Path;

use crate::config::{ExperimentConfig, FixtureMode};
use crate::error::{LabError, LabResult};
use crate::formats::{Check, Fixture, Summary};

pub use dynamics::{effective_setup, EffectiveSetup};

/// Runs the configured scenario, writes `summary.json` and applies the
/// fixture mode.
pub fn run_scenario(cfg: &ExperimentConfig, out: &Path) -> LabResult<Summary> {
    cfg.validate()?;
    std::fs::create_dir_all(out)?;
    let mut summary = match cfg.scenario.as_str() {
        "admissibility-scan" => lattice::admissibility_scan(cfg, out)?,
        "cluster-report" => lattice::cluster_report(cfg, out)?,
        "resonance-census" => lattice::resonance_census(cfg, out)?,
        "divisor-ledger" => lattice::divisor_ledger(cfg, out)?,
        "effective-run" => dynamics::effective_run(cfg, out)?,
        "full-vs-effective" => dynamics::full_vs_effective(cfg, out)?,
        "nls-run" => pde::nls_run(cfg, out)?,
        "scattering-compare" => pde::scattering_compare(cfg, out)?,
        "dispersive-check" => pde::dispersive(cfg, out)?,
        other => return Err(LabError::UnknownScenario(other.into())),
    };
    if let (Some(mode), Some(path)) = (cfg.fixture_mode, cfg.fixture_path.as_deref()) {
        let fresh = Fixture::from_summary(&summary);
        match mode {
            FixtureMode::Record => fresh.write(path)?,
            FixtureMode::Compare => {
                let stored = Fixture::read(path)?;
                let bad = stored.mismatches(&fresh, cfg.fixture_tol);
                summary.push(Check::new(
                    "fixture_match",
                    bad.len() as f64,
                    format!("0 values off by more than {:e} relative", cfg.fixture_tol),
                    bad.is_empty(),
                ));
                for k in bad {
                    summary.values.insert(format!("fixture_mismatch:{k}"), 1.0);
                }
            }
        }
    }
    summary.write(&out.join("summary.json"))?;
    Ok(summary)
}
