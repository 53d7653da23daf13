//! Scenarios on the waveguide: the split-step solver, the comparison with
//! the effective system and the one-dimensional dispersive estimate.

use std::path::Path;

use serde::Serialize;
use wglab_core::clusters::{build_partition, ClusterMap, ClusterPartition};
use wglab_core::effective::{integrate_effective, EffectiveWaveguideState, InteractionTable, Rk4Options};
use wglab_core::fft::FftPlanner;
use wglab_core::lattice::DispersionMatrix;
use wglab_core::resonance::build_quasi_resonant_index;
use wglab_core::waveguide::{
    dispersive_check, extract_profile, line_flow, trilinear_kernel, NlsOptions, NormContext, SplitStep, Transforms,
    WaveguideField, WaveguideGrid,
};
use wglab_core::Complex64;

use crate::config::ExperimentConfig;
use crate::error::{LabError, LabResult};
use crate::fft::RustFftPlanner;
use crate::fit::{fit_line, fit_log_log};
use crate::formats::{write_csv, write_snapshot, Check, Summary};
use crate::plot::{LinePlot, Series};

/// Relative Fourier amplitude that delimits the frequency support of the data.
const SUPPORT_LEVEL: f64 = 1e-2;

struct Pde {
    a: DispersionMatrix,
    grid: WaveguideGrid,
    tr: Transforms,
    partition: ClusterPartition,
    norms: NormContext,
    u0: WaveguideField,
}

fn pde_setup(cfg: &ExperimentConfig) -> LabResult<Pde> {
    let a = cfg.matrix()?;
    let grid = WaveguideGrid::new(cfg.half_length, cfg.nx, a.dim(), cfg.ny)?;
    let tr = Transforms::new(grid, &RustFftPlanner);
    let partition = build_partition(&a, grid.cover_radius(), cfg.c_d)?;
    let norms = NormContext::new(&partition, grid, cfg.s, cfg.sigma, cfg.delta)?;
    let support = cfg.data_modes()?;
    for m in &support {
        if !grid.in_box(m) {
            return Err(LabError::config(format!("data mode {m} is outside the transverse box")));
        }
    }
    let (eps, w) = (cfg.amplitude, cfg.width);
    let u0 = WaveguideField::from_physical(grid, 0.0, |x, m| {
        if support.contains(m) {
            Complex64::new(eps * (-x * x / (w * w)).exp(), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let u0 = tr.to_fourier(&u0)?;
    Ok(Pde { a, grid, tr, partition, norms, u0 })
}

/// Time before waves leaving the data region re-enter it through the
/// periodic seam: `2L / v_max` with `v_max = 2|ξ|` at the edge of the
/// frequency support.
fn wrap_horizon(u0: &WaveguideField) -> f64 {
    let g = u0.grid;
    let nt = g.transverse_len();
    let row_max: Vec<f64> = (0..g.nx()).map(|k| (0..nt).map(|j| u0.at(k, j).norm()).fold(0.0, f64::max)).collect();
    let peak = row_max.iter().cloned().fold(0.0, f64::max);
    let xi_max = (0..g.nx())
        .filter(|&k| row_max[k] >= SUPPORT_LEVEL * peak)
        .map(|k| g.xi(k).abs())
        .fold(0.0, f64::max);
    if xi_max == 0.0 {
        f64::INFINITY
    } else {
        2.0 * g.half_length() / (2.0 * xi_max)
    }
}

fn sample_times(cfg: &ExperimentConfig, extra: Option<f64>) -> Vec<f64> {
    let mut times: Vec<f64> = Vec::new();
    let mut k = (cfg.t0 / cfg.sample_every).ceil() as i64;
    loop {
        let t = k as f64 * cfg.sample_every;
        if t > cfg.t1 + 1e-12 {
            break;
        }
        times.push(t);
        k += 1;
    }
    if let Some(e) = extra {
        if e >= cfg.t0 && e <= cfg.t1 && !times.iter().any(|t| (t - e).abs() < 1e-12) {
            times.push(e);
            times.sort_by(|a, b| a.partial_cmp(b).unwrap());
        }
    }
    times
}

#[derive(Serialize)]
struct NormCsv {
    t: f64,
    hs_linf: f64,
    hs: f64,
    s: f64,
    z: f64,
    xt_z: f64,
    xt_s: f64,
    xt_dt: f64,
    mass: f64,
}

pub fn nls_run(cfg: &ExperimentConfig, out: &Path) -> LabResult<Summary> {
    let pde = pde_setup(cfg)?;
    let opts = NlsOptions { h: cfg.h, dealias: cfg.dealias, ..Default::default() };
    let mut solver = SplitStep::new(&pde.u0, &pde.a, &pde.tr, opts)?;
    let horizon = wrap_horizon(&pde.u0);
    let mut rows = Vec::new();
    for t in sample_times(cfg, None) {
        solver.advance_to(t)?;
        let u = solver.state();
        let f = extract_profile(u, &pde.a, t)?;
        let mut dt = trilinear_kernel(&f, &f, &f, &pde.a, t, &pde.tr)?;
        for v in dt.values.iter_mut() {
            *v *= Complex64::new(0.0, -1.0);
        }
        let r = pde.norms.report(&f, Some(u), Some(&dt), t, &pde.tr)?;
        rows.push(NormCsv {
            t,
            hs_linf: r.hs_linf.unwrap_or(f64::NAN),
            hs: r.hs,
            s: r.s_norm,
            z: r.z,
            xt_z: r.xt_z,
            xt_s: r.xt_s,
            xt_dt: r.xt_dt.unwrap_or(f64::NAN),
            mass: u.mass(),
        });
    }
    write_snapshot(&out.join("field_final.bin"), solver.state(), &pde.a.row_major())?;

    let [w0, w1] = cfg.fit_window;
    let window: Vec<(f64, f64)> =
        rows.iter().filter(|r| r.t >= w0 && r.t <= w1 && r.t > 0.0).map(|r| (r.t, r.hs_linf)).collect();
    let fit = fit_log_log(&window);
    let hs0 = rows.first().map(|r| r.hs).unwrap_or(f64::NAN);
    let ratios: Vec<f64> = rows.iter().filter(|r| r.t <= w1).map(|r| r.hs / hs0).collect();
    let worst = ratios.iter().cloned().fold(1.0, |acc: f64, r| if (r - 1.0).abs() > (acc - 1.0).abs() { r } else { acc });
    let weighted: Vec<f64> = window.iter().map(|(t, v)| t.sqrt() * v).collect();
    let mass0 = rows.first().map(|r| r.mass).unwrap_or(0.0);

    let mut s = Summary::new(&cfg.scenario);
    s.value("horizon", horizon);
    s.value("mass_drift", rows.iter().map(|r| (r.mass - mass0).abs() / mass0.max(f64::MIN_POSITIVE)).fold(0.0, f64::max));
    if !weighted.is_empty() {
        let hi = weighted.iter().cloned().fold(f64::MIN, f64::max);
        let lo = weighted.iter().cloned().fold(f64::MAX, f64::min);
        s.value("sqrt_t_linf_spread", hi / lo);
    }
    s.push(Check::at_least("wrap_horizon", horizon, w1));
    match fit {
        Some(f) => {
            s.value("decay_intercept", f.intercept);
            s.push(Check::within("decay_slope", f.slope, -0.6, -0.4));
        }
        None => s.push(Check::new("decay_slope", f64::NAN, "in [-0.6, -0.4]", false)),
    }
    s.push(Check::within("hs_ratio", worst, 0.9, 1.1));

    let mut plot = LinePlot::new("dispersive decay", "t", "sup_x ‖U‖_{h^s}")
        .log_log()
        .with(Series::new("measured", rows.iter().filter(|r| r.t > 0.0).map(|r| (r.t, r.hs_linf)).collect()));
    if let Some(f) = fit {
        plot = plot.with(Series::new("fit", window.iter().map(|(t, _)| (*t, (f.intercept + f.slope * t.ln()).exp())).collect()).dashed());
    }
    plot.write(&out.join("decay.svg"))?;
    LinePlot::new("norm traces", "t", "value")
        .log_y()
        .with(Series::new("Hs", rows.iter().map(|r| (r.t, r.hs)).collect()))
        .with(Series::new("S", rows.iter().map(|r| (r.t, r.s)).collect()))
        .with(Series::new("Z", rows.iter().map(|r| (r.t, r.z)).collect()))
        .with(Series::new("X_T terms", rows.iter().map(|r| (r.t, r.xt_z + r.xt_s + r.xt_dt)).collect()))
        .write(&out.join("norms.svg"))?;
    write_csv(&out.join("norms.csv"), rows)?;
    Ok(s)
}

#[derive(Serialize)]
struct ScatteringCsv {
    t: f64,
    difference: f64,
    relative: f64,
    profile_hs: f64,
    effective_hs: f64,
}

pub fn scattering_compare(cfg: &ExperimentConfig, out: &Path) -> LabResult<Summary> {
    if cfg.t0 > 1.0 || cfg.t1 < 1.0 {
        return Err(LabError::config("the time range must contain t = 1"));
    }
    let pde = pde_setup(cfg)?;
    let opts = NlsOptions { h: cfg.h, dealias: cfg.dealias, ..Default::default() };
    let mut solver = SplitStep::new(&pde.u0, &pde.a, &pde.tr, opts)?;
    let times: Vec<f64> = sample_times(cfg, Some(1.0)).into_iter().filter(|t| *t >= 1.0).collect();
    let mut profiles = Vec::with_capacity(times.len());
    for &t in &times {
        solver.advance_to(t)?;
        profiles.push(extract_profile(solver.state(), &pde.a, t)?);
    }

    let grid = pde.grid;
    let modes = grid.transverse_modes();
    let map = ClusterMap::new(&pde.partition, &modes)?;
    let alpha0 = cfg.alpha0.unwrap_or_else(|| pde.partition.default_alpha0_constant());
    let idx = build_quasi_resonant_index(&pde.partition, &pde.a, cfg.theta, alpha0)?;
    let table = InteractionTable::compile(&idx, &modes);
    let xi: Vec<f64> = (0..grid.nx()).map(|k| grid.xi(k)).collect();
    let g0 = EffectiveWaveguideState { xi, dxi: grid.dxi(), modes: modes.len(), values: profiles[0].values.clone(), time: 1.0 };
    let stride = (cfg.sample_every / cfg.h).round() as usize;
    if stride == 0 || ((stride as f64) * cfg.h - cfg.sample_every).abs() > 1e-9 * cfg.sample_every {
        return Err(LabError::config("sample_every must be a multiple of h"));
    }
    let rk = Rk4Options { t0: 1.0, t1: *times.last().unwrap(), h: cfg.h, stride, mass_guard: None };
    let (traj, _) = integrate_effective(&g0, &table, &map, &rk, cfg.s)?;

    let f1 = pde.norms.smoothed_hs(&profiles[0], 0.0)?;
    let mut rows = Vec::new();
    for (t, g) in traj.times.iter().zip(&traj.states) {
        let Some(i) = times.iter().position(|s| (s - t).abs() < 1e-9) else { continue };
        let mut diff = profiles[i].clone();
        for (v, w) in diff.values.iter_mut().zip(g) {
            *v -= w;
        }
        let mut gf = profiles[i].clone();
        gf.values.clone_from(g);
        let d = pde.norms.smoothed_hs(&diff, 0.0)?;
        rows.push(ScatteringCsv {
            t: *t,
            difference: d,
            relative: d / f1,
            profile_hs: pde.norms.smoothed_hs(&profiles[i], 0.0)?,
            effective_hs: pde.norms.smoothed_hs(&gf, 0.0)?,
        });
    }

    let [w0, w1] = cfg.compare_window;
    let window: Vec<(f64, f64)> = rows.iter().filter(|r| r.t >= w0 && r.t <= w1).map(|r| (r.t, r.relative)).collect();
    let mut s = Summary::new(&cfg.scenario);
    s.value("couplings", table.coupling_count() as f64);
    s.value("horizon", wrap_horizon(&pde.u0));
    let worst = window.iter().map(|p| p.1).fold(f64::NAN, f64::max);
    s.push(Check::at_most("difference_bound", worst, 0.2));
    match fit_line(&window) {
        Some(f) => s.push(Check::at_most("difference_trend", f.slope, 0.0)),
        None => s.push(Check::new("difference_trend", f64::NAN, "<= 0", false)),
    }
    if window.len() >= 3 {
        let mid = window.len() / 2;
        s.value("growth_first_half", window[mid].1 - window[0].1);
        s.value("growth_second_half", window[window.len() - 1].1 - window[mid].1);
    }
    LinePlot::new("profile vs effective dynamics", "t", "‖F − G‖_{H^s} / ‖F(1)‖_{H^s}")
        .with(Series::new("relative difference", rows.iter().map(|r| (r.t, r.relative)).collect()))
        .write(&out.join("scattering.svg"))?;
    write_csv(&out.join("scattering.csv"), rows)?;
    Ok(s)
}

#[derive(Serialize)]
struct DispersiveCsv {
    t: f64,
    sup_error: f64,
    normalized: f64,
    gaussian_error: f64,
}

/// `e^{it∂_x²} e^{-x²/w²} = (1 + 4it/w²)^{-1/2} e^{-x²/(w² + 4it)}`.
fn gaussian_flow(x: f64, w: f64, t: f64) -> Complex64 {
    let denom = Complex64::new(w * w, 4.0 * t);
    (Complex64::new(w * w, 0.0) / denom).sqrt() * (-Complex64::new(x * x, 0.0) / denom).exp()
}

pub fn dispersive(cfg: &ExperimentConfig, out: &Path) -> LabResult<Summary> {
    let (l, n, w) = (cfg.half_length, cfg.nx, cfg.width);
    let fft = RustFftPlanner.plan(n);
    let dx = 2.0 * l / n as f64;
    let xs: Vec<f64> = (0..n).map(|j| -l + j as f64 * dx).collect();
    let f: Vec<Complex64> = xs.iter().map(|x| Complex64::new((-x * x / (w * w)).exp(), 0.0)).collect();
    let mut rows = Vec::new();
    let mut x_weight = f64::NAN;
    for &t in &cfg.times {
        let r = dispersive_check(&f, l, t, &*fft)?;
        x_weight = r.x_weight_norm;
        let u = line_flow(&f, l, t, &*fft)?;
        let g = xs.iter().zip(&u).map(|(x, v)| (v - gaussian_flow(*x, w, t)).norm()).fold(0.0, f64::max);
        rows.push(DispersiveCsv { t, sup_error: r.sup_error, normalized: r.normalized, gaussian_error: g });
    }
    let mut s = Summary::new(&cfg.scenario);
    s.value("x_weight_norm", x_weight);
    let hi = rows.iter().map(|r| r.normalized).fold(f64::MIN, f64::max);
    let lo = rows.iter().map(|r| r.normalized).fold(f64::MAX, f64::min);
    s.push(Check::new("normalized_spread", hi / lo, "< 10", hi / lo < 10.0));
    s.push(Check::at_most("gaussian_closed_form", rows.iter().map(|r| r.gaussian_error).fold(0.0, f64::max), 1e-8));
    LinePlot::new("dispersive estimate", "t", "sup error · t^{3/4} / ‖xf‖")
        .log_log()
        .with(Series::new("normalized error", rows.iter().map(|r| (r.t, r.normalized)).collect()))
        .write(&out.join("dispersive.svg"))?;
    write_csv(&out.join("dispersive.csv"), rows)?;
    Ok(s)
}
