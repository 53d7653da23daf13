//! Strang split-step Fourier solver for `i∂_t U + ∂_x²U + div(A∇_y)U = |U|²U`.

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // inherent float methods take over when std is linked
use num_traits::Float;

use super::{Transforms, WaveguideField, WaveguideGrid};
use crate::error::{Error, Result};
use crate::fft::signed_bin;
use crate::lattice::DispersionMatrix;

#[derive(Clone, Debug, PartialEq)]
pub struct NlsOptions {
    pub h: f64,
    /// Turn off to run the free flow through the same machinery.
    pub nonlinear: bool,
    /// Zero longitudinal bins `|k| > Nx/3` and transverse modes with a
    /// component beyond `ny/3` after every nonlinear step.
    pub dealias: bool,
    /// Abort when `sup |U|` exceeds this.
    pub sup_guard: f64,
}

impl Default for NlsOptions {
    fn default() -> Self {
        NlsOptions { h: 0.01, nonlinear: true, dealias: false, sup_guard: 1e3 }
    }
}

/// Split-step state, kept in the Fourier representation.
pub struct SplitStep<'a> {
    tr: &'a Transforms,
    opts: NlsOptions,
    half: Vec<Complex64>,
    mask: Option<Vec<bool>>,
    state: WaveguideField,
    steps: u64,
    t0: f64,
}

pub(crate) fn dispersion_symbol(grid: &WaveguideGrid, a: &DispersionMatrix) -> Result<Vec<f64>> {
    if a.dim() != grid.dim() {
        return Err(Error::DimensionMismatch { expected: grid.dim(), got: a.dim() });
    }
    let nt = grid.transverse_len();
    let lam: Vec<f64> = (0..nt).map(|j| a.quad(&grid.transverse_mode(j))).collect();
    let mut out = Vec::with_capacity(grid.len());
    for k in 0..grid.nx() {
        let xi = grid.xi(k);
        out.extend(lam.iter().map(|l| xi * xi + l));
    }
    Ok(out)
}

fn dealias_mask(grid: &WaveguideGrid) -> Vec<bool> {
    let nt = grid.transverse_len();
    let keep_t: Vec<bool> = (0..nt)
        .map(|j| grid.transverse_mode(j).comps().iter().all(|&c| 3 * (c.unsigned_abs() as usize) <= grid.ny()))
        .collect();
    let mut out = Vec::with_capacity(grid.len());
    for k in 0..grid.nx() {
        let keep_x = 3 * signed_bin(k, grid.nx()).unsigned_abs() as usize <= grid.nx();
        out.extend(keep_t.iter().map(|&t| t && keep_x));
    }
    out
}

impl<'a> SplitStep<'a> {
    pub fn new(u0: &WaveguideField, a: &DispersionMatrix, tr: &'a Transforms, opts: NlsOptions) -> Result<Self> {
        if !(opts.h > 0.0 && opts.h.is_finite()) {
            return Err(Error::param("h", "must be positive"));
        }
        let mut state = tr.to_fourier(u0)?;
        let symbol = dispersion_symbol(tr.grid(), a)?;
        let half = symbol
            .iter()
            .map(|w| {
                let ph = -w * opts.h / 2.0;
                Complex64::new(ph.cos(), ph.sin())
            })
            .collect();
        let mask = opts.dealias.then(|| dealias_mask(tr.grid()));
        if let Some(m) = &mask {
            for (v, &keep) in state.values.iter_mut().zip(m) {
                if !keep {
                    *v = Complex64::new(0.0, 0.0);
                }
            }
        }
        let t0 = state.time;
        Ok(SplitStep { tr, opts, half, mask, state, steps: 0, t0 })
    }

    pub fn time(&self) -> f64 {
        self.t0 + self.steps as f64 * self.opts.h
    }

    /// Current solution in the Fourier representation.
    pub fn state(&self) -> &WaveguideField {
        &self.state
    }

    pub fn step(&mut self) -> Result<()> {
        for (v, p) in self.state.values.iter_mut().zip(&self.half) {
            *v *= p;
        }
        if self.opts.nonlinear {
            self.nonlinear_step()?;
        }
        for (v, p) in self.state.values.iter_mut().zip(&self.half) {
            *v *= p;
        }
        self.steps += 1;
        self.state.time = self.time();
        Ok(())
    }

    fn nonlinear_step(&mut self) -> Result<()> {
        let h = self.opts.h;
        let values = &mut self.state.values;
        self.tr.x_inverse(values);
        self.tr.modes_to_space(values);
        let mut sup = 0.0f64;
        for v in values.iter_mut() {
            let m = v.norm_sqr();
            sup = sup.max(m);
            let ph = -m * h;
            *v *= Complex64::new(ph.cos(), ph.sin());
        }
        let sup = sup.sqrt();
        if !(sup <= self.opts.sup_guard) {
            return Err(Error::BlowUp { time: self.time(), sup });
        }
        self.tr.space_to_modes(values);
        self.tr.x_forward(values);
        if let Some(m) = &self.mask {
            for (v, &keep) in values.iter_mut().zip(m) {
                if !keep {
                    *v = Complex64::new(0.0, 0.0);
                }
            }
        }
        Ok(())
    }

    /// Steps until the time reaches `t` to within rounding.
    pub fn advance_to(&mut self, t: f64) -> Result<()> {
        while self.time() < t - 1e-9 * self.opts.h {
            self.step()?;
        }
        Ok(())
    }
}

/// Evolves `u0` to time `t1` and returns the solution in the Fourier representation.
pub fn evolve_nls(
    u0: &WaveguideField,
    a: &DispersionMatrix,
    tr: &Transforms,
    t1: f64,
    opts: NlsOptions,
) -> Result<WaveguideField> {
    let mut s = SplitStep::new(u0, a, tr, opts)?;
    s.advance_to(t1)?;
    Ok(s.state.clone())
}
