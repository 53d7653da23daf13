//! Experiment configuration: per-scenario defaults, a TOML file and
//! `key=value` overrides, merged in that order.

use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use wglab_core::lattice::DispersionMatrix;
use wglab_core::Mode;

use crate::error::{LabError, LabResult};

pub const SCENARIOS: [&str; 9] = [
    "admissibility-scan",
    "cluster-report",
    "resonance-census",
    "divisor-ledger",
    "effective-run",
    "full-vs-effective",
    "nls-run",
    "scattering-compare",
    "dispersive-check",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FixtureMode {
    Record,
    Compare,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: String,
    /// `golden`, `identity`, `random:SEED` or row-major entries `a,b;c,d`.
    pub matrix: String,
    pub dim: usize,
    /// Diophantine exponent; the preset's own value when absent.
    pub tau: Option<f64>,
    pub radius: u32,
    pub radii: Vec<u32>,
    /// Radius of the rebuilt partition in the stability comparison (0 disables it).
    pub compare_radius: u32,
    pub half_length: f64,
    pub nx: usize,
    pub ny: usize,
    pub c_d: f64,
    pub theta: f64,
    /// Constant of the high-frequency threshold; the partition default when absent.
    pub alpha0: Option<f64>,
    pub s: f64,
    pub sigma: f64,
    pub delta: f64,
    pub gamma: f64,
    pub t0: f64,
    pub t1: f64,
    pub h: f64,
    /// Step sizes of a convergence study, coarse to fine.
    pub steps: Vec<f64>,
    /// Spacing of recorded samples.
    pub sample_every: f64,
    pub seed: u64,
    pub amplitude: f64,
    /// Transverse modes carrying the initial data of PDE runs, as `a;b`.
    pub data_modes: Vec<String>,
    /// Gaussian width `w` of `e^{-x²/w²}` data.
    pub width: f64,
    pub fit_window: [f64; 2],
    pub compare_window: [f64; 2],
    pub times: Vec<f64>,
    pub dealias: bool,
    pub resonance_tol: Option<f64>,
    /// Row limit for enumerated sets written to CSV.
    pub max_rows: usize,
    /// Effective-run data: number of high clusters, norm cap of every mode
    /// involved, and the number and spacing of `ξ` slices.
    pub clusters: usize,
    pub mode_cap: f64,
    pub slices: usize,
    pub xi_step: f64,
    pub control: bool,
    pub ledger_samples: usize,
    pub ledger_small_radius: u32,
    pub ledger_budget: f64,
    pub fixture_mode: Option<FixtureMode>,
    pub fixture_path: Option<PathBuf>,
    pub fixture_tol: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            scenario: String::new(),
            matrix: "golden".into(),
            dim: 2,
            tau: None,
            radius: 24,
            radii: vec![32, 64],
            compare_radius: 0,
            half_length: 200.0,
            nx: 4096,
            ny: 8,
            c_d: 0.5,
            theta: 0.2,
            alpha0: None,
            s: 2.0,
            sigma: 0.1,
            delta: 0.01,
            gamma: 0.2,
            t0: 1.0,
            t1: 10.0,
            h: 0.01,
            steps: vec![1e-2, 5e-3, 2.5e-3],
            sample_every: 1.0,
            seed: 7,
            amplitude: 0.1,
            data_modes: vec!["0;0".into(), "1;0".into()],
            width: 1.0,
            fit_window: [2.0, 40.0],
            compare_window: [5.0, 40.0],
            times: vec![1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0],
            dealias: false,
            resonance_tol: None,
            max_rows: 1000,
            clusters: 3,
            mode_cap: 15.0,
            slices: 4,
            xi_step: 0.5,
            control: true,
            ledger_samples: 20_000,
            ledger_small_radius: 2,
            ledger_budget: 5e7,
            fixture_mode: None,
            fixture_path: None,
            fixture_tol: 1e-9,
        }
    }
}

impl ExperimentConfig {
    /// Defaults tuned for one scenario.
    pub fn defaults_for(scenario: &str) -> LabResult<Self> {
        if !SCENARIOS.contains(&scenario) {
            return Err(LabError::UnknownScenario(scenario.into()));
        }
        let mut c = ExperimentConfig { scenario: scenario.into(), ..Default::default() };
        match scenario {
            "admissibility-scan" => c.radius = 32,
            "cluster-report" => {
                c.radius = 64;
                c.compare_radius = 128;
            }
            "resonance-census" => c.radius = 20,
            "effective-run" => c.alpha0 = Some(8.0),
            "full-vs-effective" => {
                c.alpha0 = Some(8.0);
                c.steps = vec![2.5e-3, 1.25e-3];
            }
            "nls-run" => {
                c.amplitude = 0.05;
                c.t0 = 0.0;
                c.t1 = 40.0;
                c.h = 0.02;
            }
            "scattering-compare" => {
                c.amplitude = 0.05;
                c.t0 = 0.0;
                c.t1 = 40.0;
                c.h = 0.02;
            }
            "dispersive-check" => {
                c.width = 10.0;
                c.half_length = 256.0;
                c.nx = 1024;
            }
            _ => {}
        }
        Ok(c)
    }

    /// Scenario defaults, then the TOML text, then `key=value` overrides.
    pub fn resolve(scenario: &str, text: Option<&str>, overrides: &[String]) -> LabResult<Self> {
        let base = Self::defaults_for(scenario)?;
        let mut table = toml::Table::try_from(&base).map_err(|e| LabError::config(e.to_string()))?;
        if let Some(text) = text {
            let file: toml::Table = toml::from_str(text)?;
            if let Some(s) = file.get("scenario").and_then(|v| v.as_str()) {
                if s != scenario {
                    return Err(LabError::config(format!("file is for scenario `{s}`, not `{scenario}`")));
                }
            }
            table.extend(file);
        }
        for o in overrides {
            let (key, value) = o
                .split_once('=')
                .ok_or_else(|| LabError::config(format!("override `{o}` is not key=value")))?;
            table.insert(key.trim().to_string(), parse_value(value.trim()));
        }
        let cfg: ExperimentConfig =
            toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| LabError::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(scenario: &str, path: Option<&Path>, overrides: &[String]) -> LabResult<Self> {
        let text = match path {
            Some(p) => Some(std::fs::read_to_string(p)?),
            None => None,
        };
        Self::resolve(scenario, text.as_deref(), overrides)
    }

    pub fn validate(&self) -> LabResult<()> {
        let fail = |m: String| Err(LabError::config(m));
        if !(self.s > self.dim as f64 / 2.0) {
            return fail(format!("s = {} must exceed d/2 = {}", self.s, self.dim as f64 / 2.0));
        }
        if !(3.0 * self.delta < self.gamma) {
            return fail(format!("need 3δ < γ, got δ = {}, γ = {}", self.delta, self.gamma));
        }
        if !(self.delta >= 0.0 && self.delta < 0.25) {
            return fail(format!("need 0 ≤ δ < 1/4, got {}", self.delta));
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return fail(format!("θ must lie in (0, 1), got {}", self.theta));
        }
        if !(self.sigma >= 0.0) {
            return fail("σ must be non-negative".into());
        }
        if !(self.h > 0.0) || self.steps.iter().any(|h| !(*h > 0.0)) {
            return fail("step sizes must be positive".into());
        }
        if !(self.t1 >= self.t0) {
            return fail("t1 must not precede t0".into());
        }
        if !(self.sample_every > 0.0) {
            return fail("sample_every must be positive".into());
        }
        self.matrix()?;
        for m in &self.data_modes {
            self.parse_mode(m)?;
        }
        if self.fixture_mode.is_some() && self.fixture_path.is_none() {
            return fail("fixture_mode needs fixture_path".into());
        }
        Ok(())
    }

    pub fn matrix(&self) -> LabResult<DispersionMatrix> {
        parse_matrix(&self.matrix, self.dim, self.tau)
    }

    pub fn parse_mode(&self, s: &str) -> LabResult<Mode> {
        let m: Mode = s.parse().map_err(|_| LabError::config(format!("bad mode `{s}`")))?;
        if m.dim() != self.dim {
            return Err(LabError::config(format!("mode `{s}` has dimension {}, expected {}", m.dim(), self.dim)));
        }
        Ok(m)
    }

    pub fn data_modes(&self) -> LabResult<Vec<Mode>> {
        self.data_modes.iter().map(|m| self.parse_mode(m)).collect()
    }
}

fn parse_value(raw: &str) -> toml::Value {
    match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.into())),
        Err(_) => toml::Value::String(raw.into()),
    }
}

/// Parses a matrix description; see [`ExperimentConfig::matrix`].
pub fn parse_matrix(spec: &str, dim: usize, tau: Option<f64>) -> LabResult<DispersionMatrix> {
    let tau_or = |d: f64| tau.unwrap_or(d);
    let spec = spec.trim();
    let a = match spec {
        "golden" => {
            if dim != 2 {
                return Err(LabError::config("the golden preset is two-dimensional"));
            }
            let g = DispersionMatrix::golden();
            match tau {
                Some(t) => DispersionMatrix::new(2, &g.row_major(), t)?,
                None => g,
            }
        }
        "identity" => DispersionMatrix::identity(dim, tau_or(3.0))?,
        _ if spec.starts_with("random:") => {
            let seed: u64 = spec[7..].parse().map_err(|_| LabError::config(format!("bad seed in `{spec}`")))?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            DispersionMatrix::random(dim, tau_or(3.0), 0.5, &mut rng)?
        }
        _ => {
            let rows: Vec<Vec<f64>> = spec
                .split(';')
                .map(|r| r.split(',').map(|x| x.trim().parse::<f64>()).collect::<Result<Vec<_>, _>>())
                .collect::<Result<_, _>>()
                .map_err(|_| LabError::config(format!("bad matrix `{spec}`")))?;
            if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                return Err(LabError::config(format!("matrix `{spec}` is not {dim}×{dim}")));
            }
            let flat: Vec<f64> = rows.concat();
            DispersionMatrix::new(dim, &flat, tau_or(3.0))?
        }
    };
    Ok(a)
}

/// Row-major entries in the `a,b;c,d` syntax, with round-trip precision.
pub fn format_matrix(a: &DispersionMatrix) -> String {
    let d = a.dim();
    (0..d)
        .map(|i| (0..d).map(|j| format!("{:?}", a.entry(i, j))).collect::<Vec<_>>().join(","))
        .collect::<Vec<_>>()
        .join(";")
}
