//! Effective resonant dynamics and the full toroidal control system.

use std::collections::BTreeSet;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use wglab_core::clusters::{build_partition, ClusterMap, ClusterPartition};
use wglab_core::effective::{
    conservation_report, integrate_effective, integrate_rk4, ConservationReport, EffectiveWaveguideState, FullSystem,
    InteractionTable, Rk4Options,
};
use wglab_core::lattice::DispersionMatrix;
use wglab_core::resonance::{build_quasi_resonant_index, QuasiResonantIndex};
use wglab_core::{Complex64, Mode, ModeSet};

use crate::config::ExperimentConfig;
use crate::error::{LabError, LabResult};
use crate::fft::RustFftPlanner;
use crate::fit::observed_order;
use crate::formats::{write_csv, Check, Summary};
use crate::plot::{LinePlot, Series};

/// Drifts below this are indistinguishable from rounding.
const ROUNDOFF: f64 = 1e-13;

pub struct EffectiveSetup {
    pub matrix: DispersionMatrix,
    pub partition: ClusterPartition,
    pub index: QuasiResonantIndex,
    pub modes: ModeSet,
    pub map: ClusterMap,
    pub table: InteractionTable,
    pub initial: EffectiveWaveguideState,
}

/// Builds the effective-run problem: the `clusters` high-frequency clusters
/// with the largest first quasi-resonant sets, among those whose members and
/// interaction partners all have norm at most `mode_cap`, together with the
/// partners; seeded random amplitudes on `slices` frequencies `ξ = k·xi_step`.
pub fn effective_setup(cfg: &ExperimentConfig) -> LabResult<EffectiveSetup> {
    let a = cfg.matrix()?;
    let p = build_partition(&a, cfg.radius, cfg.c_d)?;
    let idx = build_quasi_resonant_index(&p, &a, cfg.theta, cfg.alpha0.unwrap_or_else(|| p.default_alpha0_constant()))?;
    let fits = |m: &Mode| m.norm() <= cfg.mode_cap;
    let mut candidates: Vec<(usize, usize)> = Vec::new();
    for n in idx.outgoing().iter() {
        let first = idx.first_set(n);
        let Some(c) = p.cluster_of(n) else { continue };
        if first.is_empty()
            || !p.clusters()[c].members.iter().all(fits)
            || !first.iter().all(|t| fits(&t.n1) && fits(&t.n2) && fits(&t.n3))
        {
            continue;
        }
        candidates.push((first.len(), c));
    }
    candidates.sort_by(|x, y| y.0.cmp(&x.0).then(x.1.cmp(&y.1)));
    let mut chosen: Vec<usize> = Vec::new();
    for (_, c) in candidates {
        if chosen.len() == cfg.clusters {
            break;
        }
        if !chosen.contains(&c) {
            chosen.push(c);
        }
    }
    if chosen.len() < cfg.clusters {
        return Err(LabError::config(format!(
            "only {} admissible high clusters within mode_cap = {}",
            chosen.len(),
            cfg.mode_cap
        )));
    }
    let mut set = BTreeSet::new();
    for &c in &chosen {
        set.extend(p.clusters()[c].members.iter().copied());
    }
    let members: Vec<Mode> = set.iter().copied().collect();
    for n in &members {
        if idx.is_high(n) {
            for t in idx.first_set(n) {
                set.extend([t.n1, t.n2, t.n3]);
            }
        }
    }
    let modes = ModeSet::from_modes(a.dim(), set.into_iter().collect())?;
    let map = ClusterMap::new(&p, &modes)?;
    let table = InteractionTable::compile(&idx, &modes);

    let xi: Vec<f64> = (0..cfg.slices).map(|k| k as f64 * cfg.xi_step).collect();
    let mut g0 = EffectiveWaveguideState::zeros(xi, cfg.xi_step, modes.len(), cfg.t0);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for k in 0..cfg.slices {
        let scale = cfg.amplitude * (cfg.slices - k) as f64 / cfg.slices as f64;
        for v in g0.slice_mut(k) {
            *v = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * scale;
        }
    }
    Ok(EffectiveSetup { matrix: a, partition: p, index: idx, modes, map, table, initial: g0 })
}

#[derive(Serialize)]
struct DriftCsv {
    h: f64,
    super_action_drift: f64,
    z_drift: f64,
    hs_drift: f64,
}

#[derive(Serialize)]
struct TrajectoryCsv {
    t: f64,
    xi_index: usize,
    cluster_index: usize,
    super_action: f64,
}

#[derive(Serialize)]
struct NormTraceCsv {
    t: f64,
    z: f64,
    hs: f64,
}

fn stride(cfg: &ExperimentConfig, h: f64) -> usize {
    ((cfg.sample_every / h).round() as usize).max(1)
}

fn order_checks(s: &mut Summary, name: &str, steps: &[f64], drifts: &[f64]) {
    let finest = *drifts.last().unwrap();
    s.push(Check::at_most(&format!("{name}_drift_finest"), finest, 1e-8));
    if steps.len() < 2 {
        return;
    }
    let coarse = drifts[drifts.len() - 2];
    if coarse <= ROUNDOFF {
        s.push(Check::new(&format!("{name}_order"), f64::NAN, "in [3.5, 4.5] (drift at rounding level)", true));
    } else {
        let order = *observed_order(steps, drifts).last().unwrap();
        s.push(Check::within(&format!("{name}_order"), order, 3.5, 4.5));
    }
}

pub fn effective_run(cfg: &ExperimentConfig, out: &Path) -> LabResult<Summary> {
    let setup = effective_setup(cfg)?;
    let mut s = Summary::new(&cfg.scenario);
    s.value("modes", setup.modes.len() as f64);
    s.value("couplings", setup.table.coupling_count() as f64);
    s.value("dropped_couplings", setup.table.dropped() as f64);

    let mut steps = cfg.steps.clone();
    steps.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut rows = Vec::new();
    let mut last: Option<ConservationReport> = None;
    for &h in &steps {
        let opts = Rk4Options { t0: cfg.t0, t1: cfg.t1, h, stride: stride(cfg, h), mass_guard: None };
        let (_, rep) = integrate_effective(&setup.initial, &setup.table, &setup.map, &opts, cfg.s)?;
        rows.push(DriftCsv {
            h,
            super_action_drift: rep.super_action_drift,
            z_drift: rep.z_drift,
            hs_drift: rep.hs_drift,
        });
        last = Some(rep);
    }
    let rep = last.ok_or_else(|| LabError::config("steps must not be empty"))?;
    let col = |f: fn(&DriftCsv) -> f64| rows.iter().map(f).collect::<Vec<_>>();
    order_checks(&mut s, "super_action", &steps, &col(|r| r.super_action_drift));
    order_checks(&mut s, "z", &steps, &col(|r| r.z_drift));
    order_checks(&mut s, "hs", &steps, &col(|r| r.hs_drift));

    let c = rep.clusters;
    let active: Vec<usize> = (0..setup.initial.xi.len() * c).filter(|&i| rep.super_actions[0][i] > 0.0).collect();
    let mut traj = Vec::new();
    for (t, sa) in rep.times.iter().zip(&rep.super_actions) {
        for &i in &active {
            traj.push(TrajectoryCsv { t: *t, xi_index: i / c, cluster_index: i % c, super_action: sa[i] });
        }
    }
    write_csv(&out.join("trajectory.csv"), traj)?;
    write_csv(
        &out.join("norms.csv"),
        rep.times.iter().zip(rep.z.iter().zip(&rep.hs)).map(|(t, (z, hs))| NormTraceCsv { t: *t, z: *z, hs: *hs }),
    )?;
    let reference: Vec<(f64, f64)> = {
        let (h0, d0) = (steps[0], rows[0].super_action_drift);
        steps.iter().map(|h| (*h, d0 * (h / h0).powi(4))).collect()
    };
    LinePlot::new("conservation drift", "step h", "relative drift")
        .log_log()
        .with(Series::new("super-actions", rows.iter().map(|r| (r.h, r.super_action_drift)).collect()))
        .with(Series::new("Z", rows.iter().map(|r| (r.h, r.z_drift)).collect()))
        .with(Series::new("Hs", rows.iter().map(|r| (r.h, r.hs_drift)).collect()))
        .with(Series::new("h^4", reference).dashed())
        .write(&out.join("conservation.svg"))?;
    write_csv(&out.join("conservation.csv"), rows)?;

    let mass: f64 = setup.initial.values.iter().map(|v| v.norm_sqr()).sum();
    if cfg.control && mass > 0.0 {
        let finest = *steps.last().unwrap();
        let id = DispersionMatrix::identity(setup.matrix.dim(), setup.matrix.tau())?;
        let ctl = full_control(cfg, &setup, &id, &[finest, finest / 2.0])?;
        s.value("control_integrator_error", ctl.integrator_error);
        s.push(Check::at_least("control_drift", ctl.drift, 1e-3));
        s.push(Check::at_least("control_margin", ctl.drift / ctl.integrator_error.max(f64::MIN_POSITIVE), 1e4));
        write_csv(&out.join("control.csv"), ctl.rows)?;
    }
    Ok(s)
}

#[derive(Serialize)]
struct ControlCsv {
    matrix: String,
    h: f64,
    super_action_drift: f64,
}

struct Control {
    drift: f64,
    /// Largest change of a final super-action between the two finest steps,
    /// relative to the total.
    integrator_error: f64,
    rows: Vec<ControlCsv>,
    trace: Vec<(f64, f64)>,
}

/// Runs the full toroidal system for `a` from the first slice of the
/// effective data, monitoring super-actions of the effective partition.
fn full_control(cfg: &ExperimentConfig, setup: &EffectiveSetup, a: &DispersionMatrix, steps: &[f64]) -> LabResult<Control> {
    let radius = setup.modes.iter().map(|m| m.norm()).fold(0.0, f64::max).ceil() as u32;
    let full = FullSystem::new(a, radius, &RustFftPlanner)?;
    let map = ClusterMap::new(&setup.partition, full.modes())?;
    let mut y0 = vec![Complex64::new(0.0, 0.0); full.modes().len()];
    for (m, v) in setup.modes.iter().zip(setup.initial.slice(0)) {
        let i = full.modes().index_of(m).expect("the ball contains the data modes");
        y0[i] = *v;
    }
    let total: f64 = map.super_actions(&y0).iter().sum();
    let name = crate::config::format_matrix(a);
    let mut rows = Vec::new();
    let mut finals: Vec<Vec<f64>> = Vec::new();
    let mut drift = 0.0;
    let mut trace = Vec::new();
    for &h in steps {
        let opts = Rk4Options { t0: cfg.t0, t1: cfg.t1, h, stride: stride(cfg, h), mass_guard: None };
        let traj = integrate_rk4(&full, &y0, &opts)?;
        let rep = conservation_report(&traj, &map, &[0.0], 1.0, cfg.s)?;
        rows.push(ControlCsv { matrix: name.clone(), h, super_action_drift: rep.super_action_drift });
        drift = rep.super_action_drift;
        trace = rep
            .times
            .iter()
            .zip(&rep.super_actions)
            .map(|(t, sa)| {
                let dev = sa.iter().zip(&rep.super_actions[0]).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
                (*t, dev / total)
            })
            .collect();
        finals.push(map.super_actions(traj.states.last().unwrap()));
    }
    let integrator_error = match finals.as_slice() {
        [.., x, y] => x.iter().zip(y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / total,
        _ => f64::NAN,
    };
    Ok(Control { drift, integrator_error, rows, trace })
}

pub fn full_vs_effective(cfg: &ExperimentConfig, out: &Path) -> LabResult<Summary> {
    let setup = effective_setup(cfg)?;
    let mut s = Summary::new(&cfg.scenario);
    let mut steps = cfg.steps.clone();
    steps.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let id = DispersionMatrix::identity(setup.matrix.dim(), setup.matrix.tau())?;
    let square = full_control(cfg, &setup, &id, &steps)?;
    let admissible = full_control(cfg, &setup, &setup.matrix, &steps)?;

    let finest = *steps.last().unwrap();
    let opts = Rk4Options { t0: cfg.t0, t1: cfg.t1, h: finest, stride: stride(cfg, finest), mass_guard: None };
    let (_, eff) = integrate_effective(&setup.initial, &setup.table, &setup.map, &opts, cfg.s)?;

    s.value("admissible_full_drift", admissible.drift);
    s.value("admissible_integrator_error", admissible.integrator_error);
    s.value("effective_drift", eff.super_action_drift);
    s.value("square_integrator_error", square.integrator_error);
    s.push(Check::at_least("square_drift", square.drift, 1e-3));
    s.push(Check::at_least("square_margin", square.drift / square.integrator_error.max(f64::MIN_POSITIVE), 1e4));
    s.push(Check::at_most("effective_drift", eff.super_action_drift, 1e-8));

    LinePlot::new("super-action deviation", "t", "max |S(t) − S(1)| / Σ S")
        .log_y()
        .with(Series::new("full, A = Id", square.trace.clone()))
        .with(Series::new("full, admissible A", admissible.trace.clone()))
        .write(&out.join("full_vs_effective.svg"))?;
    let mut rows = square.rows;
    rows.extend(admissible.rows);
    write_csv(&out.join("full_vs_effective.csv"), rows)?;
    Ok(s)
}
