//! Profiles and trilinear interaction kernels.
//!
//! For a solution `U`, the profile is `F(t) = e^{-itΔ}U(t)`, i.e.
//! `F̂_n(ξ) = e^{it(ξ²+λ_n²)} Û_n(ξ)`, and it solves `i∂_t F = N^t[F, F, F]`
//! with `N^t[F, G, H] = e^{-itΔ}(e^{itΔ}F · conj(e^{itΔ}G) · e^{itΔ}H)`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)] // inherent float methods take over when std is linked
use num_traits::Float;

use super::solver::dispersion_symbol;
use super::{Representation, Transforms, WaveguideField};
use crate::clusters::ClusterPartition;
use crate::error::{Error, Result};
use crate::lattice::{omega_of, DispersionMatrix};
use crate::resonance::QuasiResonantIndex;

fn rotate(f: &WaveguideField, a: &DispersionMatrix, t: f64, sign: f64) -> Result<WaveguideField> {
    f.expect(Representation::Fourier)?;
    let sym = dispersion_symbol(&f.grid, a)?;
    let mut out = f.clone();
    for (v, w) in out.values.iter_mut().zip(&sym) {
        let ph = sign * t * w;
        *v *= Complex64::new(ph.cos(), ph.sin());
    }
    out.time = t;
    Ok(out)
}

/// `e^{itΔ}F`: multiplies `F̂_n(ξ)` by `e^{-it(ξ²+λ_n²)}`.
pub fn free_flow(f: &WaveguideField, a: &DispersionMatrix, t: f64) -> Result<WaveguideField> {
    rotate(f, a, t, -1.0)
}

/// `F(t) = e^{-itΔ}U(t)` for a solution in the Fourier representation.
pub fn extract_profile(u: &WaveguideField, a: &DispersionMatrix, t: f64) -> Result<WaveguideField> {
    rotate(u, a, t, 1.0)
}

fn check_three(f: &WaveguideField, g: &WaveguideField, h: &WaveguideField, tr: &Transforms) -> Result<()> {
    for x in [f, g, h] {
        x.expect(Representation::Fourier)?;
        if x.grid != *tr.grid() {
            return Err(Error::GridMismatch);
        }
    }
    Ok(())
}

/// `N^t[F, G, H]` in the Fourier representation, evaluated pseudo-spectrally.
pub fn trilinear_kernel(
    f: &WaveguideField,
    g: &WaveguideField,
    h: &WaveguideField,
    a: &DispersionMatrix,
    t: f64,
    tr: &Transforms,
) -> Result<WaveguideField> {
    check_three(f, g, h, tr)?;
    let to_space = |x: &WaveguideField| -> Result<Vec<Complex64>> {
        let mut v = free_flow(x, a, t)?.values;
        tr.x_inverse(&mut v);
        tr.modes_to_space(&mut v);
        Ok(v)
    };
    let u1 = to_space(f)?;
    let u2 = if core::ptr::eq(g, f) { u1.clone() } else { to_space(g)? };
    let u3 = if core::ptr::eq(h, f) {
        u1.clone()
    } else if core::ptr::eq(h, g) {
        u2.clone()
    } else {
        to_space(h)?
    };
    let mut prod: Vec<Complex64> = u1.iter().zip(&u2).zip(&u3).map(|((a, b), c)| a * b.conj() * c).collect();
    tr.space_to_modes(&mut prod);
    tr.x_forward(&mut prod);
    let out = WaveguideField { grid: f.grid, repr: Representation::Fourier, time: t, values: prod };
    extract_profile(&out, a, t)
}

/// The space-resonant part of the kernel,
/// `(π/t) Σ_{n₁−n₂+n₃=n} e^{-itΩ} F̂_{n₁}(ξ) conj(Ĝ_{n₂}(ξ)) Ĥ_{n₃}(ξ)`,
/// pointwise in `ξ`. The transverse sum is a cubic convolution on the mode
/// box, wrapped periodically exactly as in [`trilinear_kernel`].
pub fn space_resonant_part(
    f: &WaveguideField,
    g: &WaveguideField,
    h: &WaveguideField,
    a: &DispersionMatrix,
    t: f64,
    tr: &Transforms,
) -> Result<WaveguideField> {
    if t < 1.0 {
        return Err(Error::TimeBeforeOne(t));
    }
    check_three(f, g, h, tr)?;
    let grid = f.grid;
    let nt = grid.transverse_len();
    let rot: Vec<Complex64> = (0..nt)
        .map(|j| {
            let ph = -t * a.quad(&grid.transverse_mode(j));
            Complex64::new(ph.cos(), ph.sin())
        })
        .collect();
    let mut out = WaveguideField::zeros(grid, Representation::Fourier, t);
    let (mut b1, mut b2, mut b3) = (vec![Complex64::new(0.0, 0.0); nt], vec![Complex64::new(0.0, 0.0); nt], vec![Complex64::new(0.0, 0.0); nt]);
    for k in 0..grid.nx() {
        let row = k * nt..(k + 1) * nt;
        for (b, x) in [(&mut b1, f), (&mut b2, g), (&mut b3, h)] {
            for ((dst, src), r) in b.iter_mut().zip(&x.values[row.clone()]).zip(&rot) {
                *dst = src * r;
            }
            tr.block_to_space(b);
        }
        let dst = &mut out.values[row];
        for (j, d) in dst.iter_mut().enumerate() {
            *d = b1[j] * b2[j].conj() * b3[j];
        }
        tr.block_to_modes(dst);
        for (d, r) in dst.iter_mut().zip(&rot) {
            *d *= r.conj() * (PI / t);
        }
    }
    Ok(out)
}

/// The remainder `N^t − (space-resonant part)`.
pub fn nonresonant_part(
    f: &WaveguideField,
    g: &WaveguideField,
    h: &WaveguideField,
    a: &DispersionMatrix,
    t: f64,
    tr: &Transforms,
) -> Result<WaveguideField> {
    let mut total = trilinear_kernel(f, g, h, a, t, tr)?;
    let res = space_resonant_part(f, g, h, a, t, tr)?;
    for (v, r) in total.values.iter_mut().zip(&res.values) {
        *v -= r;
    }
    Ok(total)
}

/// Normal-form kernel
/// `Σ e^{-itΩ}/Ω · F̂_{n₁}(ξ) conj(Ĝ_{n₂}(ξ)) Ĥ_{n₃}(ξ)`
/// over zero-momentum triples with `|Ω| > tol`; for a high-frequency
/// outgoing mode the triples of its first and third quasi-resonant sets are
/// excluded as well. Outgoing modes outside the box are discarded.
///
/// The sum runs over the nonzero entries of each slice, so sparse inputs
/// are cheap.
#[allow(clippy::too_many_arguments)]
pub fn normal_form_kernel(
    f: &WaveguideField,
    g: &WaveguideField,
    h: &WaveguideField,
    t: f64,
    p: &ClusterPartition,
    idx: &QuasiResonantIndex,
    tol: f64,
) -> Result<WaveguideField> {
    for x in [f, g, h] {
        x.expect(Representation::Fourier)?;
    }
    f.same_grid(g)?;
    f.same_grid(h)?;
    let a = p.matrix();
    let grid = f.grid;
    if a.dim() != grid.dim() {
        return Err(Error::DimensionMismatch { expected: grid.dim(), got: a.dim() });
    }
    let nt = grid.transverse_len();
    let modes: Vec<_> = (0..nt).map(|j| grid.transverse_mode(j)).collect();
    let mut out = WaveguideField::zeros(grid, Representation::Fourier, t);
    let support = |x: &WaveguideField, k: usize| -> Vec<(usize, Complex64)> {
        (0..nt).map(|j| (j, x.at(k, j))).filter(|(_, v)| *v != Complex64::new(0.0, 0.0)).collect()
    };
    for k in 0..grid.nx() {
        let (s1, s2, s3) = (support(f, k), support(g, k), support(h, k));
        for &(j1, v1) in &s1 {
            for &(j2, v2) in &s2 {
                let pair = v1 * v2.conj();
                for &(j3, v3) in &s3 {
                    let (n1, n2, n3) = (modes[j1], modes[j2], modes[j3]);
                    let n = n1 - n2 + n3;
                    if !grid.in_box(&n) {
                        continue;
                    }
                    let w = omega_of(a, &n1, &n2, &n3, &n);
                    if w.abs() <= tol || idx.contains(p, &n, &n1, &n2, &n3, w) {
                        continue;
                    }
                    let ph = -t * w;
                    let j = grid.transverse_index(&n);
                    out.values[k * nt + j] += Complex64::new(ph.cos(), ph.sin()) * pair * v3 / w;
                }
            }
        }
    }
    Ok(out)
}
