//! Resonant and quasi-resonant four-wave interactions.

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // inherent float methods take over when std is linked
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::clusters::{ClusterPartition, HighFrequencyThreshold};
use crate::error::{Error, Result};
use crate::lattice::{omega_of, scan_admissibility, DispersionMatrix, Quadruple};
use crate::mode::{Mode, ModeSet};

/// Zero-momentum quadruples in a ball whose resonance value is below a tolerance.
///
/// Members are stored as ball indices `(n₁, n₂, n₃)`, sorted
/// lexicographically; the outgoing mode is `n₁ − n₂ + n₃`.
#[derive(Clone, Debug)]
pub struct ResonantSet {
    radius: u32,
    tol: f64,
    modes: ModeSet,
    members: Vec<[u32; 3]>,
    omegas: Vec<f64>,
    nontrivial: usize,
    inexact: usize,
}

impl ResonantSet {
    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    pub fn modes(&self) -> &ModeSet {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn nontrivial_count(&self) -> usize {
        self.nontrivial
    }

    /// True when every member is a pairing `{n₁, n₃} = {n₂, n}`.
    pub fn trivial_only(&self) -> bool {
        self.nontrivial == 0
    }

    /// Members whose floating-point resonance value is not exactly zero.
    pub fn inexact_count(&self) -> usize {
        self.inexact
    }

    pub fn quadruple(&self, i: usize) -> Quadruple {
        let [a, b, c] = self.members[i];
        let (n1, n2, n3) = (self.modes.get(a as usize), self.modes.get(b as usize), self.modes.get(c as usize));
        Quadruple { n1, n2, n3, n: n1 - n2 + n3, omega: self.omegas[i] }
    }

    pub fn iter(&self) -> impl Iterator<Item = Quadruple> + '_ {
        (0..self.len()).map(move |i| self.quadruple(i))
    }

    pub fn contains(&self, n1: &Mode, n2: &Mode, n3: &Mode) -> bool {
        let key = match (self.modes.index_of(n1), self.modes.index_of(n2), self.modes.index_of(n3)) {
            (Some(a), Some(b), Some(c)) => [a as u32, b as u32, c as u32],
            _ => return false,
        };
        self.members.binary_search(&key).is_ok()
    }
}

/// Tolerance below which no non-trivial resonance value can exist in the
/// ball of radius `radius`, given the admissibility constant measured on the
/// ball of radius `2·radius`: half of `2 c / (2R)^{2τ}`.
pub fn certified_tolerance(a: &DispersionMatrix, radius: u32) -> Result<f64> {
    let report = scan_admissibility(a, 2 * radius)?;
    let r = 2.0 * radius as f64;
    Ok(report.best_constant / r.powf(2.0 * a.tau()))
}

/// Enumerates `{(n₁, n₂, n₃, n) : n₁ − n₂ + n₃ = n, |Ω| <= tol}` over the ball.
///
/// Candidates are screened with the factorization
/// `Ω = 2 (n₁ − n₂)ᵀA(n₂ − n₃)`, and survivors are re-evaluated from the
/// eigenvalues before the tolerance is applied.
pub fn enumerate_resonant_set(a: &DispersionMatrix, radius: u32, tol: f64) -> Result<ResonantSet> {
    if !(tol >= 0.0 && tol.is_finite()) {
        return Err(Error::param("tol", "must be finite and non-negative"));
    }
    let dim = a.dim();
    let modes = ModeSet::ball(dim, radius)?;
    let m = modes.len();
    let coords: Vec<[f64; 4]> = modes
        .iter()
        .map(|n| {
            let mut c = [0.0; 4];
            for (k, &v) in n.comps().iter().enumerate() {
                c[k] = v as f64;
            }
            c
        })
        .collect();
    let screen = tol + 1e-6;
    let mut members = Vec::new();
    let mut omegas = Vec::new();
    let mut nontrivial = 0;
    let mut inexact = 0;
    for i1 in 0..m {
        let n1 = modes.get(i1);
        for i2 in 0..m {
            let n2 = modes.get(i2);
            let u = n1 - n2;
            let w = a.apply(&u);
            let mut c2 = 0.0;
            for k in 0..dim {
                c2 += w[k] * coords[i2][k];
            }
            let zero_u = u.is_zero();
            for i3 in 0..m {
                if !zero_u {
                    let mut c3 = 0.0;
                    for k in 0..dim {
                        c3 += w[k] * coords[i3][k];
                    }
                    if (2.0 * (c2 - c3)).abs() > screen {
                        continue;
                    }
                }
                let n3 = modes.get(i3);
                let n = u + n3;
                if modes.index_of(&n).is_none() {
                    continue;
                }
                let omega = omega_of(a, &n1, &n2, &n3, &n);
                if omega.abs() > tol {
                    continue;
                }
                let trivial = zero_u || (n1 == n && n3 == n2);
                if !trivial {
                    nontrivial += 1;
                }
                if omega != 0.0 {
                    inexact += 1;
                }
                members.push([i1 as u32, i2 as u32, i3 as u32]);
                omegas.push(omega);
            }
        }
    }
    Ok(ResonantSet { radius, tol, modes, members, omegas, nontrivial, inexact })
}

/// Evaluates both sides of
/// `Σ_{Γ₀} a₁ ā₂ a₃ ā_n = 2 (Σ|a_n|²)² − Σ|a_n|⁴`
/// for amplitudes indexed by the ball of `set`.
///
/// The left side is returned as its real part; its imaginary part vanishes
/// because the pairing set is closed under complex conjugation of the terms.
pub fn resonant_sum_identity_check(set: &ResonantSet, amps: &[Complex64]) -> Result<(f64, f64)> {
    if amps.len() != set.modes.len() {
        return Err(Error::DimensionMismatch { expected: set.modes.len(), got: amps.len() });
    }
    if !set.trivial_only() {
        return Err(Error::NonTrivialResonantSet(set.nontrivial));
    }
    let mut lhs = Complex64::new(0.0, 0.0);
    for &[i1, i2, i3] in &set.members {
        let n = set.modes.get(i1 as usize) - set.modes.get(i2 as usize) + set.modes.get(i3 as usize);
        let Some(j) = set.modes.index_of(&n) else { continue };
        lhs += amps[i1 as usize] * amps[i2 as usize].conj() * amps[i3 as usize] * amps[j].conj();
    }
    let mass: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    let quartic: f64 = amps.iter().map(|a| a.norm_sqr() * a.norm_sqr()).sum();
    Ok((lhs.re, 2.0 * mass * mass - quartic))
}

/// An interaction `(n₁, n₂, n₃)` feeding a fixed outgoing mode.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Triple {
    pub n1: Mode,
    pub n2: Mode,
    pub n3: Mode,
    pub omega: f64,
}

/// The quasi-resonant sets of every high-frequency mode of a partition.
///
/// For an outgoing `n` in a cluster `C_α` with `α >= α₀`, the first set holds
/// the triples with `n₁ ∈ C_α`, `|n₂|, |n₃| < θK_α` and `|Ω| < 1`; the third
/// set is its mirror with the roles of `n₁` and `n₃` exchanged.
#[derive(Clone, Debug)]
pub struct QuasiResonantIndex {
    theta: f64,
    alpha0_constant: f64,
    threshold: HighFrequencyThreshold,
    outgoing: ModeSet,
    first: Vec<Vec<Triple>>,
    third: Vec<Vec<Triple>>,
}

/// `(θK)²`, lowered by a relative `1e-12` so that modes on the boundary
/// `|m| = θK` stay excluded when `θ` is a decimal fraction.
fn small_cut_sq(theta: f64, k: f64) -> f64 {
    let c = theta * k;
    c * c * (1.0 - 1e-12)
}

pub fn build_quasi_resonant_index(
    p: &ClusterPartition,
    a: &DispersionMatrix,
    theta: f64,
    alpha0_constant: f64,
) -> Result<QuasiResonantIndex> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::param("theta", "must lie in (0, 1)"));
    }
    if !p.matrix().same_as(a) {
        return Err(Error::MatrixMismatch);
    }
    let threshold = p.high_frequency_threshold(alpha0_constant);
    let dim = a.dim();
    let mut outgoing = Vec::new();
    let mut first = Vec::new();
    let mut third = Vec::new();
    if let HighFrequencyThreshold::Cluster(start) = threshold {
        for cluster in &p.clusters()[start..] {
            let k = cluster.weight;
            let cut = theta * k;
            let cut_sq = small_cut_sq(theta, k);
            let small: Vec<Mode> = ModeSet::ball(dim, cut.ceil() as u32)?
                .iter()
                .copied()
                .filter(|m| (m.norm_sq() as f64) < cut_sq)
                .collect();
            let is_small = |m: &Mode| (m.norm_sq() as f64) < cut_sq;
            for &n in &cluster.members {
                let mut l1 = Vec::new();
                let mut l3 = Vec::new();
                for &big in &cluster.members {
                    for &n2 in &small {
                        let other = n - big + n2;
                        if !is_small(&other) {
                            continue;
                        }
                        let w1 = omega_of(a, &big, &n2, &other, &n);
                        if w1.abs() < 1.0 {
                            l1.push(Triple { n1: big, n2, n3: other, omega: w1 });
                        }
                        let w3 = omega_of(a, &other, &n2, &big, &n);
                        if w3.abs() < 1.0 {
                            l3.push(Triple { n1: other, n2, n3: big, omega: w3 });
                        }
                    }
                }
                outgoing.push(n);
                first.push(l1);
                third.push(l3);
            }
        }
    }
    Ok(QuasiResonantIndex {
        theta,
        alpha0_constant,
        threshold,
        outgoing: ModeSet::from_modes(dim, outgoing)?,
        first,
        third,
    })
}

impl QuasiResonantIndex {
    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn alpha0_constant(&self) -> f64 {
        self.alpha0_constant
    }

    pub fn threshold(&self) -> HighFrequencyThreshold {
        self.threshold
    }

    /// True when no cluster inside the truncation is high frequency.
    pub fn is_empty(&self) -> bool {
        self.outgoing.is_empty()
    }

    pub fn outgoing(&self) -> &ModeSet {
        &self.outgoing
    }

    pub fn is_high(&self, n: &Mode) -> bool {
        self.outgoing.contains(n)
    }

    pub fn first_set(&self, n: &Mode) -> &[Triple] {
        self.outgoing.index_of(n).map_or(&[], |i| &self.first[i])
    }

    pub fn third_set(&self, n: &Mode) -> &[Triple] {
        self.outgoing.index_of(n).map_or(&[], |i| &self.third[i])
    }

    pub fn total_first(&self) -> usize {
        self.first.iter().map(Vec::len).sum()
    }

    /// Membership in the first or third set of `n`, decided from the defining
    /// conditions rather than the stored lists.
    pub fn contains(&self, p: &ClusterPartition, n: &Mode, n1: &Mode, n2: &Mode, n3: &Mode, omega: f64) -> bool {
        if !self.is_high(n) || omega.abs() >= 1.0 {
            return false;
        }
        let Some(alpha) = p.cluster_of(n) else { return false };
        let cut_sq = small_cut_sq(self.theta, p.clusters()[alpha].weight);
        let small = |m: &Mode| (m.norm_sq() as f64) < cut_sq;
        if !small(n2) {
            return false;
        }
        (p.cluster_of(n1) == Some(alpha) && small(n3)) || (p.cluster_of(n3) == Some(alpha) && small(n1))
    }
}

/// `1/Ω` for a zero-momentum quadruple outside the quasi-resonant sets.
pub fn normal_form_weight(p: &ClusterPartition, idx: &QuasiResonantIndex, q: &Quadruple, tol: f64) -> Result<f64> {
    if !q.is_zero_momentum() {
        return Err(Error::ZeroMomentumViolated {
            expected: format!("{}", q.n),
            got: format!("{}", q.n1 - q.n2 + q.n3),
        });
    }
    if q.omega.abs() <= tol {
        return Err(Error::ZeroDivisor(q.omega));
    }
    if idx.contains(p, &q.n, &q.n1, &q.n2, &q.n3, q.omega) {
        return Err(Error::QuasiResonantTriple);
    }
    Ok(1.0 / q.omega)
}

/// Options for [`divisor_ledger`].
#[derive(Clone, Debug, PartialEq)]
pub struct LedgerConfig {
    pub s: f64,
    /// Radius of the stratum swept exhaustively: the two smaller incoming
    /// modes range over `|m| <= small_radius`.
    pub small_radius: u32,
    pub samples: usize,
    pub seed: u64,
    /// Resonance values at or below this are treated as exact resonances.
    pub resonance_tol: f64,
    /// Full exhaustive enumeration is used when it needs at most this many
    /// candidate triples.
    pub exhaustive_budget: u64,
    /// Number of largest ratios kept in the entry list.
    pub keep_top: usize,
}

impl Default for LedgerConfig {
    fn default() -> Self {
        LedgerConfig {
            s: 25.0,
            small_radius: 2,
            samples: 20_000,
            seed: 7,
            resonance_tol: 1e-9,
            exhaustive_budget: 50_000_000,
            keep_top: 32,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LedgerEntry {
    pub quadruple: Quadruple,
    pub weight: f64,
    pub ratio: f64,
}

/// Observed small-divisor ratios
/// `(K_α^s / |Ω|) / (⟨n₁*⟩^s ⟨n₂*⟩^{4τ/c_d})`, where `n₁* >= n₂*` are the two
/// largest incoming sizes and `⟨x⟩ = max(1, x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DivisorLedger {
    pub radius: u32,
    pub s: f64,
    pub exponent: f64,
    pub exhaustive: bool,
    pub swept: u64,
    pub sampled: u64,
    pub max_ratio: f64,
    pub argmax: Option<LedgerEntry>,
    /// Largest swept ratios followed by the random samples.
    pub entries: Vec<LedgerEntry>,
}

struct LedgerCtx<'a> {
    p: &'a ClusterPartition,
    idx: &'a QuasiResonantIndex,
    s: f64,
    exponent: f64,
    tol: f64,
}

impl LedgerCtx<'_> {
    fn evaluate(&self, n1: Mode, n2: Mode, n3: Mode, n: Mode) -> Option<LedgerEntry> {
        let a = self.p.matrix();
        let omega = omega_of(a, &n1, &n2, &n3, &n);
        if omega.abs() <= self.tol || self.idx.contains(self.p, &n, &n1, &n2, &n3, omega) {
            return None;
        }
        let k = self.p.weight_of(&n)?;
        let q = Quadruple { n1, n2, n3, n, omega };
        let sizes = q.incoming_sizes_desc();
        let log_ratio = self.s * k.ln()
            - omega.abs().ln()
            - self.s * sizes[0].max(1.0).ln()
            - self.exponent * sizes[1].max(1.0).ln();
        Some(LedgerEntry { quadruple: q, weight: k, ratio: log_ratio.exp() })
    }
}

fn keep_top(top: &mut Vec<LedgerEntry>, e: LedgerEntry, cap: usize) {
    if cap == 0 {
        return;
    }
    if top.len() == cap && top.last().is_some_and(|l| l.ratio >= e.ratio) {
        return;
    }
    let pos = top.partition_point(|x| x.ratio >= e.ratio);
    top.insert(pos, e);
    top.truncate(cap);
}

/// Sweeps zero-momentum quadruples with a high-frequency outgoing mode that
/// are neither resonant nor quasi-resonant and records the small-divisor
/// ratio.
///
/// When the full enumeration fits in the budget every triple of the ball is
/// visited. Otherwise the sweep covers exhaustively the stratum where the two
/// smaller incoming modes lie in a small ball (where the ratio is largest,
/// since it decays like a high power of the second largest size) and adds
/// uniform random samples from the whole ball with a fixed seed.
pub fn divisor_ledger(p: &ClusterPartition, idx: &QuasiResonantIndex, cfg: &LedgerConfig) -> Result<DivisorLedger> {
    let a = p.matrix();
    let exponent = 4.0 * a.tau() / p.c_d();
    let ctx = LedgerCtx { p, idx, s: cfg.s, exponent, tol: cfg.resonance_tol };
    let ball = p.modes();
    let high: Vec<Mode> = idx.outgoing().iter().copied().collect();
    let m = ball.len() as u64;
    let exhaustive = (high.len() as u64).saturating_mul(m * m) <= cfg.exhaustive_budget;

    let mut top: Vec<LedgerEntry> = Vec::new();
    let mut best: Option<LedgerEntry> = None;
    let mut swept = 0u64;
    let mut record = |e: LedgerEntry, top: &mut Vec<LedgerEntry>| {
        if best.as_ref().is_none_or(|b| e.ratio > b.ratio) {
            best = Some(e.clone());
        }
        keep_top(top, e, cfg.keep_top);
    };

    if exhaustive {
        for &n in &high {
            for &n1 in ball.iter() {
                for &n2 in ball.iter() {
                    let n3 = n - n1 + n2;
                    if !ball.contains(&n3) {
                        continue;
                    }
                    swept += 1;
                    if let Some(e) = ctx.evaluate(n1, n2, n3, n) {
                        record(e, &mut top);
                    }
                }
            }
        }
    } else {
        let small = ModeSet::ball(a.dim(), cfg.small_radius)?;
        for &n in &high {
            for &x in small.iter() {
                for &y in small.iter() {
                    // the large incoming mode sits in slot 1, 2 or 3
                    let cands = [(n + x - y, x, y), (x, x + y - n, y), (x, y, n - x + y)];
                    for (slot, (n1, n2, n3)) in cands.into_iter().enumerate() {
                        let large = [n1, n2, n3][slot];
                        if small.contains(&large) || !ball.contains(&large) {
                            continue;
                        }
                        swept += 1;
                        if let Some(e) = ctx.evaluate(n1, n2, n3, n) {
                            record(e, &mut top);
                        }
                    }
                }
            }
        }
    }

    let mut entries = top;
    let mut sampled = 0u64;
    if !exhaustive && !high.is_empty() {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut attempts = 0usize;
        while (sampled as usize) < cfg.samples && attempts < 20 * cfg.samples.max(1) {
            attempts += 1;
            let n = high[rng.random_range(0..high.len())];
            let n1 = ball.get(rng.random_range(0..ball.len()));
            let n2 = ball.get(rng.random_range(0..ball.len()));
            let n3 = n - n1 + n2;
            if !ball.contains(&n3) {
                continue;
            }
            if let Some(e) = ctx.evaluate(n1, n2, n3, n) {
                sampled += 1;
                if best.as_ref().is_none_or(|b| e.ratio > b.ratio) {
                    best = Some(e.clone());
                }
                entries.push(e);
            }
        }
    }

    Ok(DivisorLedger {
        radius: p.radius(),
        s: cfg.s,
        exponent,
        exhaustive,
        swept,
        sampled,
        max_ratio: best.as_ref().map_or(0.0, |b| b.ratio),
        argmax: best,
        entries,
    })
}
