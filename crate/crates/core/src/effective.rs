//! Effective resonant dynamics: the toroidal cluster system, the effective
//! waveguide system, the full toroidal system used as a reference, and a
//! fixed-step RK4 integrator with conservation diagnostics.
//!
//! Interaction phases are `e^{-itΩ}`, the sign produced by conjugating the
//! linear flow `e^{-itλ_n²}` of `i∂_t u + div(A∇)u = |u|²u`.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;
use core::cell::RefCell;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)] // inherent float methods take over when std is linked
use num_traits::Float;

use crate::clusters::ClusterMap;
use crate::error::{Error, Result};
use crate::fft::{bin_of, transform_cube, Direction, Fft, FftPlanner};
use crate::lattice::{omega_of, DispersionMatrix};
use crate::mode::ModeSet;
use crate::resonance::QuasiResonantIndex;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[inline]
fn phase(t: f64, omega: f64) -> Complex64 {
    let a = -t * omega;
    Complex64::new(a.cos(), a.sin())
}

/// A first-set interaction resolved to indices of a mode set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Coupling {
    pub i1: u32,
    pub i2: u32,
    pub i3: u32,
    pub omega: f64,
}

/// Quasi-resonant interactions compiled against a concrete mode set.
#[derive(Clone, Debug)]
pub struct InteractionTable {
    len: usize,
    high: Vec<bool>,
    /// `(outgoing index, coupling)`, grouped by outgoing index.
    couplings: Vec<(u32, Coupling)>,
    dropped: usize,
}

impl InteractionTable {
    /// Resolves the first sets of every high-frequency mode in `modes`.
    ///
    /// Triples touching a mode outside `modes` are dropped and counted. Since
    /// the mirrored triple involves the same four modes, dropping preserves
    /// the symmetry behind the conservation laws.
    pub fn compile(idx: &QuasiResonantIndex, modes: &ModeSet) -> Self {
        let mut high = vec![false; modes.len()];
        let mut couplings = Vec::new();
        let mut dropped = 0;
        for (i, n) in modes.iter().enumerate() {
            if !idx.is_high(n) {
                continue;
            }
            high[i] = true;
            for t in idx.first_set(n) {
                match (modes.index_of(&t.n1), modes.index_of(&t.n2), modes.index_of(&t.n3)) {
                    (Some(a), Some(b), Some(c)) => couplings.push((
                        i as u32,
                        Coupling { i1: a as u32, i2: b as u32, i3: c as u32, omega: t.omega },
                    )),
                    _ => dropped += 1,
                }
            }
        }
        InteractionTable { len: modes.len(), high, couplings, dropped }
    }

    /// A table without quasi-resonant couplings.
    pub fn empty(len: usize) -> Self {
        InteractionTable { len, high: vec![false; len], couplings: Vec::new(), dropped: 0 }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn coupling_count(&self) -> usize {
        self.couplings.len()
    }

    pub fn dropped(&self) -> usize {
        self.dropped
    }

    pub fn is_high(&self, i: usize) -> bool {
        self.high[i]
    }

    fn phases(&self, t: f64, out: &mut Vec<Complex64>) {
        out.clear();
        out.extend(self.couplings.iter().map(|(_, c)| phase(t, c.omega)));
    }

    /// `acc[n] += scale · Σ_{first set} phase · a₁ ā₂ a₃`.
    fn accumulate(&self, phases: &[Complex64], a: &[Complex64], scale: f64, acc: &mut [Complex64]) {
        for ((n, c), ph) in self.couplings.iter().zip(phases) {
            let term = a[c.i1 as usize] * a[c.i2 as usize].conj() * a[c.i3 as usize];
            acc[*n as usize] += ph * term * scale;
        }
    }
}

/// Amplitudes on a transverse mode set at time `time`.
#[derive(Clone, Debug, PartialEq)]
pub struct ToroidalState {
    pub amplitudes: Vec<Complex64>,
    pub time: f64,
}

/// Right-hand side of the toroidal cluster system:
/// `∂_t a_n = −2i Σ_{first set of n} e^{-itΩ} a₁ ā₂ a₃` for high-frequency
/// `n`, zero otherwise.
pub fn toroidal_rhs(table: &InteractionTable, state: &ToroidalState, out: &mut [Complex64]) -> Result<()> {
    check_len(table.len, state.amplitudes.len())?;
    check_len(table.len, out.len())?;
    let mut ph = Vec::new();
    table.phases(state.time, &mut ph);
    out.fill(ZERO);
    table.accumulate(&ph, &state.amplitudes, 2.0, out);
    for v in out.iter_mut() {
        *v *= Complex64::new(0.0, -1.0);
    }
    Ok(())
}

/// Right-hand side of the full toroidal system by direct summation:
/// `∂_t a_n = −i Σ_{n₁−n₂+n₃=n} e^{-itΩ} a₁ ā₂ a₃` over the mode set.
/// Cost is cubic in the number of modes.
pub fn full_toroidal_rhs(
    a: &DispersionMatrix,
    modes: &ModeSet,
    state: &ToroidalState,
    out: &mut [Complex64],
) -> Result<()> {
    check_len(modes.len(), state.amplitudes.len())?;
    check_len(modes.len(), out.len())?;
    let amp = &state.amplitudes;
    for (i, n) in modes.iter().enumerate() {
        let mut acc = ZERO;
        for (i1, n1) in modes.iter().enumerate() {
            if amp[i1] == ZERO {
                continue;
            }
            for (i2, n2) in modes.iter().enumerate() {
                let n3 = *n - *n1 + *n2;
                let Some(i3) = modes.index_of(&n3) else { continue };
                let w = omega_of(a, n1, n2, &n3, n);
                acc += phase(state.time, w) * amp[i1] * amp[i2].conj() * amp[i3];
            }
        }
        out[i] = Complex64::new(0.0, -1.0) * acc;
    }
    Ok(())
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// Transverse amplitudes on a grid of longitudinal frequencies.
///
/// `values[k * modes + i]` is the amplitude of mode `i` at frequency `xi[k]`.
#[derive(Clone, Debug, PartialEq)]
pub struct EffectiveWaveguideState {
    pub xi: Vec<f64>,
    /// Spacing used for frequency integrals.
    pub dxi: f64,
    pub modes: usize,
    pub values: Vec<Complex64>,
    pub time: f64,
}

impl EffectiveWaveguideState {
    pub fn zeros(xi: Vec<f64>, dxi: f64, modes: usize, time: f64) -> Self {
        let values = vec![ZERO; xi.len() * modes];
        EffectiveWaveguideState { xi, dxi, modes, values, time }
    }

    pub fn slice(&self, k: usize) -> &[Complex64] {
        &self.values[k * self.modes..(k + 1) * self.modes]
    }

    pub fn slice_mut(&mut self, k: usize) -> &mut [Complex64] {
        &mut self.values[k * self.modes..(k + 1) * self.modes]
    }
}

/// Right-hand side of the effective waveguide system, slice by slice:
/// `∂_t G_n = −i (R_n + Q_n)` with
/// `R_n = (2π/t) Σ_m |G_m|² G_n − (π/t) |G_n|² G_n` and
/// `Q_n = (2π/t) Σ_{first set of n} e^{-itΩ} G₁ Ḡ₂ G₃` for high-frequency `n`.
pub fn effective_rhs(table: &InteractionTable, state: &EffectiveWaveguideState, out: &mut [Complex64]) -> Result<()> {
    let sys = EffectiveSystem::new(table, state.xi.len())?;
    sys.eval(state.time, &state.values, out)
}

/// A vector field `y' = f(t, y)` on complex vectors.
pub trait VectorField {
    fn dimension(&self) -> usize;
    /// Length of the blocks on which mass is monitored.
    fn block_len(&self) -> usize {
        self.dimension()
    }
    fn eval(&self, t: f64, y: &[Complex64], out: &mut [Complex64]) -> Result<()>;
}

pub struct ToroidalSystem<'a> {
    table: &'a InteractionTable,
}

impl<'a> ToroidalSystem<'a> {
    pub fn new(table: &'a InteractionTable) -> Self {
        ToroidalSystem { table }
    }
}

impl VectorField for ToroidalSystem<'_> {
    fn dimension(&self) -> usize {
        self.table.len
    }

    fn eval(&self, t: f64, y: &[Complex64], out: &mut [Complex64]) -> Result<()> {
        let mut ph = Vec::new();
        self.table.phases(t, &mut ph);
        out.fill(ZERO);
        self.table.accumulate(&ph, y, 2.0, out);
        for v in out.iter_mut() {
            *v *= Complex64::new(0.0, -1.0);
        }
        Ok(())
    }
}

pub struct EffectiveSystem<'a> {
    table: &'a InteractionTable,
    slices: usize,
    phases: RefCell<Vec<Complex64>>,
}

impl<'a> EffectiveSystem<'a> {
    pub fn new(table: &'a InteractionTable, slices: usize) -> Result<Self> {
        if table.len == 0 {
            return Err(Error::param("modes", "empty mode set"));
        }
        Ok(EffectiveSystem { table, slices, phases: RefCell::new(Vec::new()) })
    }
}

impl VectorField for EffectiveSystem<'_> {
    fn dimension(&self) -> usize {
        self.table.len * self.slices
    }

    fn block_len(&self) -> usize {
        self.table.len
    }

    fn eval(&self, t: f64, y: &[Complex64], out: &mut [Complex64]) -> Result<()> {
        if t < 1.0 {
            return Err(Error::TimeBeforeOne(t));
        }
        check_len(self.dimension(), y.len())?;
        check_len(self.dimension(), out.len())?;
        let m = self.table.len;
        let mut ph = self.phases.borrow_mut();
        self.table.phases(t, &mut ph);
        for k in 0..self.slices {
            let g = &y[k * m..(k + 1) * m];
            let o = &mut out[k * m..(k + 1) * m];
            let mass: f64 = g.iter().map(|v| v.norm_sqr()).sum();
            for (oi, gi) in o.iter_mut().zip(g) {
                *oi = gi * (2.0 * PI / t * mass - PI / t * gi.norm_sqr());
            }
            self.table.accumulate(&ph, g, 2.0 * PI / t, o);
            for v in o.iter_mut() {
                *v *= Complex64::new(0.0, -1.0);
            }
        }
        Ok(())
    }
}

/// The full toroidal system on a ball, evaluated pseudo-spectrally.
///
/// Amplitudes are placed on a periodic grid of side at least `4R + 1`, which
/// is large enough that the cubic convolution restricted to the ball has no
/// aliasing; the result equals [`full_toroidal_rhs`] up to rounding.
pub struct FullSystem {
    modes: ModeSet,
    lambda: Vec<f64>,
    bins: Vec<usize>,
    fft: Box<dyn Fft>,
    side: usize,
    dim: usize,
    scratch: RefCell<(Vec<Complex64>, Vec<Complex64>)>,
}

impl FullSystem {
    pub fn new(a: &DispersionMatrix, radius: u32, planner: &dyn FftPlanner) -> Result<Self> {
        let dim = a.dim();
        let modes = ModeSet::ball(dim, radius)?;
        let side = (4 * radius as usize + 1).next_power_of_two();
        let lambda = modes.iter().map(|m| a.quad(m)).collect();
        let bins = modes
            .iter()
            .map(|m| {
                m.comps()
                    .iter()
                    .fold(0usize, |acc, &c| acc * side + bin_of(c as i64, side))
            })
            .collect();
        Ok(FullSystem {
            modes,
            lambda,
            bins,
            fft: planner.plan(side),
            side,
            dim,
            scratch: RefCell::new((vec![ZERO; side.pow(dim as u32)], Vec::new())),
        })
    }

    pub fn modes(&self) -> &ModeSet {
        &self.modes
    }
}

impl VectorField for FullSystem {
    fn dimension(&self) -> usize {
        self.modes.len()
    }

    fn eval(&self, t: f64, y: &[Complex64], out: &mut [Complex64]) -> Result<()> {
        check_len(self.modes.len(), y.len())?;
        check_len(self.modes.len(), out.len())?;
        let mut guard = self.scratch.borrow_mut();
        let (grid, line) = &mut *guard;
        grid.fill(ZERO);
        for ((v, &b), &l) in y.iter().zip(&self.bins).zip(&self.lambda) {
            grid[b] = v * phase(t, l);
        }
        transform_cube(&*self.fft, grid, self.dim, Direction::Inverse, line);
        for v in grid.iter_mut() {
            *v *= v.norm_sqr();
        }
        transform_cube(&*self.fft, grid, self.dim, Direction::Forward, line);
        let scale = 1.0 / (self.side.pow(self.dim as u32) as f64);
        for ((o, &b), &l) in out.iter_mut().zip(&self.bins).zip(&self.lambda) {
            *o = Complex64::new(0.0, -1.0) * grid[b] * phase(-t, l) * scale;
        }
        Ok(())
    }
}

/// Options for [`integrate_rk4`].
#[derive(Clone, Debug, PartialEq)]
pub struct Rk4Options {
    pub t0: f64,
    pub t1: f64,
    /// Requested step; the actual step divides `t1 − t0` evenly.
    pub h: f64,
    /// Keep every `stride`-th state (the initial and final states are always kept).
    pub stride: usize,
    /// Reject the run when the relative mass of a block drifts beyond this.
    pub mass_guard: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<Complex64>>,
}

/// Classical fourth-order Runge–Kutta with a fixed step.
pub fn integrate_rk4<F: VectorField + ?Sized>(f: &F, y0: &[Complex64], opts: &Rk4Options) -> Result<Trajectory> {
    check_len(f.dimension(), y0.len())?;
    if !(opts.h > 0.0) || !(opts.t1 >= opts.t0) {
        return Err(Error::param("h", "step must be positive and t1 >= t0"));
    }
    let span = opts.t1 - opts.t0;
    let raw = span / opts.h;
    let steps = if (raw - raw.round()).abs() < 1e-9 { raw.round() } else { raw.ceil() } as usize;
    let h = if steps == 0 { 0.0 } else { span / steps as f64 };
    let stride = opts.stride.max(1);
    let block = f.block_len().max(1);
    let masses = |y: &[Complex64]| -> Vec<f64> {
        y.chunks(block).map(|c| c.iter().map(|v| v.norm_sqr()).sum()).collect()
    };
    let m0 = masses(y0);

    let n = y0.len();
    let mut y = y0.to_vec();
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) = (vec![ZERO; n], vec![ZERO; n], vec![ZERO; n], vec![ZERO; n], vec![ZERO; n]);
    let mut traj = Trajectory { times: vec![opts.t0], states: vec![y.clone()] };
    for step in 0..steps {
        let t = opts.t0 + step as f64 * h;
        f.eval(t, &y, &mut k1)?;
        for i in 0..n {
            tmp[i] = y[i] + k1[i] * (h / 2.0);
        }
        f.eval(t + h / 2.0, &tmp, &mut k2)?;
        for i in 0..n {
            tmp[i] = y[i] + k2[i] * (h / 2.0);
        }
        f.eval(t + h / 2.0, &tmp, &mut k3)?;
        for i in 0..n {
            tmp[i] = y[i] + k3[i] * h;
        }
        f.eval(t + h, &tmp, &mut k4)?;
        for i in 0..n {
            y[i] += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (h / 6.0);
        }
        let t_next = opts.t0 + (step + 1) as f64 * h;
        if let Some(guard) = opts.mass_guard {
            for (now, before) in masses(&y).iter().zip(&m0) {
                let drift = if *before > 0.0 { (now - before).abs() / before } else { now.abs() };
                if !(drift <= guard) {
                    return Err(Error::StepRejected { time: t_next, drift, guard });
                }
            }
        }
        if (step + 1) % stride == 0 || step + 1 == steps {
            traj.times.push(t_next);
            traj.states.push(y.clone());
        }
    }
    Ok(traj)
}

/// Invariants of the effective system along a trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct ConservationReport {
    pub times: Vec<f64>,
    /// `super_actions[sample][slice * clusters + α]`.
    pub super_actions: Vec<Vec<f64>>,
    pub clusters: usize,
    /// `sup_ξ ‖G(ξ)‖_{h^s}` per sample.
    pub z: Vec<f64>,
    /// Slice attaining the supremum.
    pub z_slice: Vec<usize>,
    /// `‖G‖_{H^s}` per sample.
    pub hs: Vec<f64>,
    /// `max |S_α(t) − S_α(t₀)| / Σ_α S_α(t₀)` over slices, clusters and samples.
    pub super_action_drift: f64,
    pub z_drift: f64,
    pub hs_drift: f64,
}

/// Super-actions and norms of a sampled effective trajectory.
pub fn conservation_report(
    traj: &Trajectory,
    map: &ClusterMap,
    xi: &[f64],
    dxi: f64,
    s: f64,
) -> Result<ConservationReport> {
    let m = map.len();
    let slices = xi.len();
    let weights = map.hs_weights(s);
    let japanese: Vec<f64> = xi.iter().map(|x| (1.0 + x * x).powf(s)).collect();
    let mut report = ConservationReport {
        times: traj.times.clone(),
        super_actions: Vec::new(),
        clusters: map.cluster_count(),
        z: Vec::new(),
        z_slice: Vec::new(),
        hs: Vec::new(),
        super_action_drift: 0.0,
        z_drift: 0.0,
        hs_drift: 0.0,
    };
    for y in &traj.states {
        check_len(m * slices, y.len())?;
        let mut actions = Vec::with_capacity(slices * map.cluster_count());
        let (mut zmax, mut zarg, mut hs2) = (0.0f64, 0usize, 0.0);
        for k in 0..slices {
            let g = &y[k * m..(k + 1) * m];
            actions.extend(map.super_actions(g));
            let weighted: f64 = g.iter().zip(&weights).map(|(v, w)| w * w * v.norm_sqr()).sum();
            let plain: f64 = g.iter().map(|v| v.norm_sqr()).sum();
            if weighted.sqrt() > zmax {
                zmax = weighted.sqrt();
                zarg = k;
            }
            hs2 += 2.0 * PI * dxi * (weighted + japanese[k] * plain);
        }
        report.super_actions.push(actions);
        report.z.push(zmax);
        report.z_slice.push(zarg);
        report.hs.push(hs2.sqrt());
    }
    let c = map.cluster_count();
    let first = &report.super_actions[0];
    for sample in &report.super_actions {
        for k in 0..slices {
            let base = &first[k * c..(k + 1) * c];
            let total: f64 = base.iter().sum();
            if total == 0.0 {
                continue;
            }
            for (now, before) in sample[k * c..(k + 1) * c].iter().zip(base) {
                report.super_action_drift = report.super_action_drift.max((now - before).abs() / total);
            }
        }
    }
    let rel = |v: &[f64]| v.iter().map(|x| if v[0] > 0.0 { (x - v[0]).abs() / v[0] } else { 0.0 }).fold(0.0, f64::max);
    report.z_drift = rel(&report.z);
    report.hs_drift = rel(&report.hs);
    Ok(report)
}

/// Integrates the effective waveguide system and reports its invariants.
pub fn integrate_effective(
    g0: &EffectiveWaveguideState,
    table: &InteractionTable,
    map: &ClusterMap,
    opts: &Rk4Options,
    s: f64,
) -> Result<(Trajectory, ConservationReport)> {
    if opts.t0 < 1.0 {
        return Err(Error::TimeBeforeOne(opts.t0));
    }
    check_len(table.len, g0.modes)?;
    check_len(table.len, map.len())?;
    let sys = EffectiveSystem::new(table, g0.xi.len())?;
    let traj = integrate_rk4(&sys, &g0.values, opts)?;
    let report = conservation_report(&traj, map, &g0.xi, g0.dxi, s)?;
    Ok((traj, report))
}
