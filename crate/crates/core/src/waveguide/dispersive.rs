//! Long-time asymptotics of the free Schrödinger flow on the line.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)] // inherent float methods take over when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::fft::{signed_bin, Direction, Fft};

#[derive(Clone, Debug, PartialEq)]
pub struct DispersiveCheck {
    pub t: f64,
    /// `sup_x |e^{it∂_x²}f − A_t f|` over the grid.
    pub sup_error: f64,
    /// `sup_error · t^{3/4} / ‖x f‖_{L²}`.
    pub normalized: f64,
    pub x_weight_norm: f64,
}

/// `e^{it∂_x²}f` on the periodic window `[−L, L)`, computed spectrally.
pub fn line_flow(samples: &[Complex64], half_length: f64, t: f64, fft: &dyn Fft) -> Result<Vec<Complex64>> {
    let n = samples.len();
    if n != fft.len() {
        return Err(Error::param("samples", "length must match the FFT length"));
    }
    let dxi = PI / half_length;
    let mut u = samples.to_vec();
    fft.process(&mut u, Direction::Forward);
    for (k, v) in u.iter_mut().enumerate() {
        let xi = signed_bin(k, n) as f64 * dxi;
        let ph = -t * xi * xi;
        *v *= Complex64::new(ph.cos(), ph.sin()) / n as f64;
    }
    fft.process(&mut u, Direction::Inverse);
    Ok(u)
}

/// Compares `e^{it∂_x²}f` with its leading asymptotic profile
/// `A_t f(x) = e^{ix²/4t} (4iπt)^{-1/2} ∫ e^{-ixz/2t} f(z) dz`.
///
/// `f` is sampled at `x_j = −L + j·2L/N`. The exact flow is computed
/// spectrally; the integral is evaluated by direct quadrature at each
/// `ξ = x/2t`. Fails when `f` or the evolved solution is not negligible at
/// the window edges, since the periodic computation would then differ from
/// the flow on the line.
pub fn dispersive_check(samples: &[Complex64], half_length: f64, t: f64, fft: &dyn Fft) -> Result<DispersiveCheck> {
    let n = samples.len();
    if n != fft.len() || !n.is_power_of_two() {
        return Err(Error::param("samples", "length must match the FFT length and be a power of two"));
    }
    if !(t > 0.0) {
        return Err(Error::param("t", "must be positive"));
    }
    let dx = 2.0 * half_length / n as f64;
    let x = |j: usize| -half_length + j as f64 * dx;
    let u = line_flow(samples, half_length, t, fft)?;

    let edge = |v: &[Complex64]| -> f64 {
        let peak = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let band = (n / 64).max(1);
        let rim = v[..band].iter().chain(&v[n - band..]).map(|z| z.norm()).fold(0.0, f64::max);
        if peak > 0.0 {
            rim / peak
        } else {
            0.0
        }
    };
    let rim = edge(samples).max(edge(&u));
    if rim > 1e-8 {
        return Err(Error::WindowTooSmall { amplitude: rim });
    }

    let norm_xf = (samples.iter().enumerate().map(|(j, v)| x(j) * x(j) * v.norm_sqr()).sum::<f64>() * dx).sqrt();
    let prefactor = Complex64::from_polar(1.0, -PI / 4.0) / (4.0 * PI * t).sqrt();
    let xs: Vec<f64> = (0..n).map(x).collect();
    let mut sup = 0.0f64;
    for (j, &xj) in xs.iter().enumerate() {
        let xi = xj / (2.0 * t);
        let mut acc = Complex64::new(0.0, 0.0);
        for (z, v) in xs.iter().zip(samples) {
            let ph = -xi * z;
            acc += v * Complex64::new(ph.cos(), ph.sin());
        }
        let ph = xj * xj / (4.0 * t);
        let approx = Complex64::new(ph.cos(), ph.sin()) * prefactor * acc * dx;
        sup = sup.max((u[j] - approx).norm());
    }
    Ok(DispersiveCheck {
        t,
        sup_error: sup,
        normalized: if norm_xf > 0.0 { sup * t.powf(0.75) / norm_xf } else { 0.0 },
        x_weight_norm: norm_xf,
    })
}
