//! Transverse dispersion: the quadratic form `λ_n² = nᵀAn`, resonance values
//! of four-wave interactions and the Diophantine (admissibility) condition.

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent float methods take over when std is linked
use num_traits::Float;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::symmetric_eigenvalues;
use crate::mode::{Mode, ModeSet, MAX_DIM};

/// Symmetric positive definite matrix `A` together with the admissibility
/// exponent `τ` it is assumed to satisfy.
#[derive(Clone, Debug, PartialEq)]
pub struct DispersionMatrix {
    dim: usize,
    entries: [[f64; MAX_DIM]; MAX_DIM],
    tau: f64,
    eig_min: f64,
    eig_max: f64,
}

impl DispersionMatrix {
    /// Builds `A` from row-major entries.
    pub fn new(dim: usize, row_major: &[f64], tau: f64) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(Error::param("dim", "dimension must be between 1 and 4"));
        }
        if row_major.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, got: row_major.len() });
        }
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::param("tau", "must be positive and finite"));
        }
        let mut entries = [[0.0; MAX_DIM]; MAX_DIM];
        for i in 0..dim {
            for j in 0..dim {
                let v = row_major[i * dim + j];
                if !v.is_finite() {
                    return Err(Error::param("matrix", "entries must be finite"));
                }
                entries[i][j] = v;
            }
        }
        for i in 0..dim {
            for j in i + 1..dim {
                let (a, b) = (entries[i][j], entries[j][i]);
                if (a - b).abs() > 1e-12 * (1.0 + a.abs().max(b.abs())) {
                    return Err(Error::NotSymmetric { row: i, col: j });
                }
                entries[j][i] = a;
            }
        }
        let ev = symmetric_eigenvalues(&entries, dim);
        if ev[0] <= 0.0 {
            return Err(Error::NotPositiveDefinite { min_eigenvalue: ev[0] });
        }
        Ok(DispersionMatrix { dim, entries, tau, eig_min: ev[0], eig_max: ev[dim - 1] })
    }

    pub fn identity(dim: usize, tau: f64) -> Result<Self> {
        let mut e = [0.0; MAX_DIM * MAX_DIM];
        for i in 0..dim.min(MAX_DIM) {
            e[i * dim + i] = 1.0;
        }
        Self::new(dim, &e[..dim * dim], tau)
    }

    pub fn diagonal(diag: &[f64], tau: f64) -> Result<Self> {
        let d = diag.len();
        let mut e = [0.0; MAX_DIM * MAX_DIM];
        for (i, &v) in diag.iter().enumerate().take(MAX_DIM) {
            e[i * d + i] = v;
        }
        Self::new(d, &e[..(d * d).min(MAX_DIM * MAX_DIM)], tau)
    }

    /// The two-dimensional reference matrix `[[1, g], [g, 2]]` with
    /// `g = (√5 − 1)/2`, paired with `τ = 3`.
    pub fn golden() -> Self {
        let g = (5f64.sqrt() - 1.0) / 2.0;
        Self::new(2, &[1.0, g, g, 2.0], 3.0).expect("reference matrix is positive definite")
    }

    /// Random symmetric matrix with smallest eigenvalue at least `floor`.
    ///
    /// Entries are drawn uniformly from `[-1, 1]`, shifted along the
    /// identity to lift the spectrum, and quantized to multiples of `2^-30`
    /// so the exact matrix can be reproduced from a printed artifact.
    pub fn random<R: Rng + ?Sized>(dim: usize, tau: f64, floor: f64, rng: &mut R) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(Error::param("dim", "dimension must be between 1 and 4"));
        }
        if !(floor > 0.0) {
            return Err(Error::param("floor", "must be positive"));
        }
        let mut m = [[0.0; MAX_DIM]; MAX_DIM];
        for i in 0..dim {
            for j in i..dim {
                let v: f64 = rng.random_range(-1.0..1.0);
                m[i][j] = v;
                m[j][i] = v;
            }
        }
        let ev = symmetric_eigenvalues(&m, dim);
        let shift = (floor - ev[0]).max(0.0) + 2f64.powi(-20);
        let q = 2f64.powi(30);
        let mut e = Vec::with_capacity(dim * dim);
        for (i, row) in m.iter().enumerate().take(dim) {
            for (j, &v) in row.iter().enumerate().take(dim) {
                let v = if i == j { v + shift } else { v };
                e.push((v * q).round() / q);
            }
        }
        Self::new(dim, &e, tau)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.entries[i][j]
    }

    pub fn row_major(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dim * self.dim);
        for i in 0..self.dim {
            out.extend_from_slice(&self.entries[i][..self.dim]);
        }
        out
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eig_min
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eig_max
    }

    /// `nᵀAn` without a dimension check.
    #[inline]
    pub(crate) fn quad(&self, n: &Mode) -> f64 {
        let c = n.comps();
        let mut s = 0.0;
        for i in 0..self.dim {
            let mut r = 0.0;
            for j in 0..self.dim {
                r += self.entries[i][j] * c[j] as f64;
            }
            s += c[i] as f64 * r;
        }
        s
    }

    /// `aᵀAb` without a dimension check.
    #[inline]
    pub(crate) fn bilinear_unchecked(&self, a: &Mode, b: &Mode) -> f64 {
        let (ca, cb) = (a.comps(), b.comps());
        let mut s = 0.0;
        for i in 0..self.dim {
            let mut r = 0.0;
            for j in 0..self.dim {
                r += self.entries[i][j] * cb[j] as f64;
            }
            s += ca[i] as f64 * r;
        }
        s
    }

    pub fn bilinear(&self, a: &Mode, b: &Mode) -> Result<f64> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.bilinear_unchecked(a, b))
    }

    /// `A n` as a float vector.
    pub(crate) fn apply(&self, n: &Mode) -> [f64; MAX_DIM] {
        let mut out = [0.0; MAX_DIM];
        let c = n.comps();
        for i in 0..self.dim {
            for j in 0..self.dim {
                out[i] += self.entries[i][j] * c[j] as f64;
            }
        }
        out
    }

    pub(crate) fn check(&self, n: &Mode) -> Result<()> {
        if n.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: n.dim() });
        }
        Ok(())
    }

    pub(crate) fn same_as(&self, other: &DispersionMatrix) -> bool {
        self.dim == other.dim && self.entries == other.entries
    }
}

/// `λ_n² = nᵀAn`.
pub fn eigenvalue(a: &DispersionMatrix, n: &Mode) -> Result<f64> {
    a.check(n)?;
    Ok(a.quad(n))
}

/// Resonance value of a four-wave interaction, evaluated as
/// `(λ₁² + λ₃²) − (λ₂² + λ_n²)`.
///
/// Grouping the sum this way makes the symmetries of the quadruple exact in
/// floating point: swapping `n₁ ↔ n₃` leaves the value unchanged and
/// swapping `(n₁, n₃) ↔ (n₂, n)` flips its sign bit for bit.
#[inline]
pub(crate) fn omega_of(a: &DispersionMatrix, n1: &Mode, n2: &Mode, n3: &Mode, n: &Mode) -> f64 {
    (a.quad(n1) + a.quad(n3)) - (a.quad(n2) + a.quad(n))
}

/// A four-wave interaction `(n₁, n₂, n₃) → n` with its resonance value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadruple {
    pub n1: Mode,
    pub n2: Mode,
    pub n3: Mode,
    pub n: Mode,
    pub omega: f64,
}

impl Quadruple {
    pub fn new(a: &DispersionMatrix, n1: Mode, n2: Mode, n3: Mode, n: Mode) -> Result<Self> {
        for m in [&n1, &n2, &n3, &n] {
            a.check(m)?;
        }
        Ok(Quadruple { n1, n2, n3, n, omega: omega_of(a, &n1, &n2, &n3, &n) })
    }

    /// The zero-momentum quadruple with outgoing mode `n₁ − n₂ + n₃`.
    pub fn from_triple(a: &DispersionMatrix, n1: Mode, n2: Mode, n3: Mode) -> Result<Self> {
        a.check(&n1)?;
        a.check(&n2)?;
        a.check(&n3)?;
        Self::new(a, n1, n2, n3, n1 - n2 + n3)
    }

    pub fn is_zero_momentum(&self) -> bool {
        self.n1 - self.n2 + self.n3 == self.n
    }

    /// `{n₁, n₃} = {n₂, n}` as multisets.
    pub fn is_trivial(&self) -> bool {
        (self.n1 == self.n2 && self.n3 == self.n) || (self.n1 == self.n && self.n3 == self.n2)
    }

    /// Sizes of the three incoming modes in decreasing order.
    pub fn incoming_sizes_desc(&self) -> [f64; 3] {
        let mut s = [self.n1.norm(), self.n2.norm(), self.n3.norm()];
        s.sort_by(|x, y| y.partial_cmp(x).unwrap());
        s
    }
}

/// Recomputes `Ω = λ₁² − λ₂² + λ₃² − λ_n²` from the modes of `q`.
pub fn resonant_value(a: &DispersionMatrix, q: &Quadruple) -> Result<f64> {
    for m in [&q.n1, &q.n2, &q.n3, &q.n] {
        a.check(m)?;
    }
    Ok(omega_of(a, &q.n1, &q.n2, &q.n3, &q.n))
}

/// The zero-momentum factorization `Ω = 2 (n₁ − n₂)ᵀ A (n₂ − n₃)`.
pub fn factored_resonant_value(a: &DispersionMatrix, q: &Quadruple) -> Result<f64> {
    for m in [&q.n1, &q.n2, &q.n3, &q.n] {
        a.check(m)?;
    }
    if !q.is_zero_momentum() {
        return Err(Error::ZeroMomentumViolated {
            expected: format!("{}", q.n),
            got: format!("{}", q.n1 - q.n2 + q.n3),
        });
    }
    Ok(2.0 * a.bilinear_unchecked(&(q.n1 - q.n2), &(q.n2 - q.n3)))
}

/// One row of the admissibility history.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdmissibilityRow {
    pub radius: u32,
    pub best_constant: f64,
    pub witness_a: Mode,
    pub witness_b: Mode,
}

/// Result of [`scan_admissibility`].
#[derive(Clone, Debug, PartialEq)]
pub struct AdmissibilityReport {
    pub radius: u32,
    pub tau: f64,
    /// `min |aᵀAb| · |a|^τ |b|^τ` over nonzero `a, b` with `|a|, |b| <= radius`.
    pub best_constant: f64,
    pub witness: (Mode, Mode),
    /// Best constant for every integer radius `1..=radius`.
    pub history: Vec<AdmissibilityRow>,
}

/// Exhaustive search for the Diophantine constant of `A` up to `radius`.
///
/// Only one representative of each `±a` is scanned and pairs are visited
/// once, since the quantity is invariant under sign changes and swapping.
pub fn scan_admissibility(a: &DispersionMatrix, radius: u32) -> Result<AdmissibilityReport> {
    if radius == 0 {
        return Err(Error::param("radius", "must be at least 1"));
    }
    let dim = a.dim();
    let ball = ModeSet::ball(dim, radius)?;
    let half: Vec<Mode> = ball.iter().copied().filter(|m| m.is_positive()).collect();
    let tau = a.tau();
    let weight: Vec<f64> = half.iter().map(|m| m.norm().powf(tau)).collect();
    let coords: Vec<[f64; MAX_DIM]> = half
        .iter()
        .map(|m| {
            let mut c = [0.0; MAX_DIM];
            for (k, &v) in m.comps().iter().enumerate() {
                c[k] = v as f64;
            }
            c
        })
        .collect();

    // best pair whose larger member has norm in (r-1, r]
    let mut shell: Vec<Option<(f64, Mode, Mode)>> = alloc::vec![None; radius as usize + 1];
    for i in 0..half.len() {
        let av = a.apply(&half[i]);
        let r = half[i].norm_sq();
        let bucket = ceil_sqrt(r) as usize;
        let mut best = shell[bucket];
        for j in 0..=i {
            let mut dot = 0.0;
            for k in 0..dim {
                dot += av[k] * coords[j][k];
            }
            let v = dot.abs() * weight[i] * weight[j];
            if best.is_none_or(|(b, _, _)| v < b) {
                best = Some((v, half[i], half[j]));
            }
        }
        shell[bucket] = best;
    }

    let mut history = Vec::with_capacity(radius as usize);
    let mut running: Option<(f64, Mode, Mode)> = None;
    for (r, s) in shell.iter().enumerate().skip(1) {
        if let Some(cand) = s {
            if running.is_none_or(|(b, _, _)| cand.0 < b) {
                running = Some(*cand);
            }
        }
        let (c, wa, wb) = running.expect("radius 1 always contains a unit vector");
        history.push(AdmissibilityRow { radius: r as u32, best_constant: c, witness_a: wa, witness_b: wb });
    }
    let last = *history.last().unwrap();
    Ok(AdmissibilityReport {
        radius,
        tau,
        best_constant: last.best_constant,
        witness: (last.witness_a, last.witness_b),
        history,
    })
}

fn ceil_sqrt(v: i64) -> i64 {
    let mut r = (v as f64).sqrt() as i64;
    while r * r < v {
        r += 1;
    }
    while r > 0 && (r - 1) * (r - 1) >= v {
        r -= 1;
    }
    r
}

/// The regularity threshold `s₀ = d/2 + 4τ/c_d`.
pub fn regularity_threshold(tau: f64, c_d: f64, dim: usize) -> Result<f64> {
    if !(c_d > 0.0 && c_d.is_finite()) {
        return Err(Error::param("c_d", "must be positive"));
    }
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::param("tau", "must be positive"));
    }
    Ok(dim as f64 / 2.0 + 4.0 * tau / c_d)
}
