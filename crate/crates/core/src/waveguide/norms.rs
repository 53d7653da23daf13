//! Cluster-weighted norms of waveguide fields.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)] // inherent float methods take over when std is linked
use num_traits::Float;

use super::{Representation, Transforms, WaveguideField, WaveguideGrid};
use crate::clusters::{ClusterMap, ClusterPartition};
use crate::error::{Error, Result};

/// Norms of one time sample.
#[derive(Clone, Debug, PartialEq)]
pub struct NormReport {
    pub t: f64,
    /// `sup_x ‖U(x)‖_{h^s}` of the solution, when one was supplied.
    pub hs_linf: Option<f64>,
    /// `‖F‖_{H^s} = (‖F‖²_{L²h^s} + ‖F‖²_{H^s_x ℓ²})^{1/2}`.
    pub hs: f64,
    /// `‖(1 − ∂_x²)^{σ/2} F‖_{H^s} + ‖xF‖_{L²h^s}`.
    pub s_norm: f64,
    /// `sup_ξ ‖F̂(ξ)‖_{h^s}`.
    pub z: f64,
    /// `‖xF‖_{L²h^s}` with `x` measured from the centre of mass.
    pub x_weighted: f64,
    /// The three contributions to the time-weighted norm at this sample:
    /// `Z`, `⟨t⟩^{-δ} S` and `⟨t⟩^{1-δ} ‖∂_t F‖_S` (the last when the time
    /// derivative was supplied).
    pub xt_z: f64,
    pub xt_s: f64,
    pub xt_dt: Option<f64>,
}

impl NormReport {
    pub fn xt_total(&self) -> f64 {
        self.xt_z + self.xt_s + self.xt_dt.unwrap_or(0.0)
    }
}

/// Weights and exponents shared by all norm evaluations on one grid.
#[derive(Clone, Debug)]
pub struct NormContext {
    grid: WaveguideGrid,
    /// `K_α^{2s}` per transverse index.
    weights_sq: Vec<f64>,
    s: f64,
    sigma: f64,
    delta: f64,
}

impl NormContext {
    pub fn new(p: &ClusterPartition, grid: WaveguideGrid, s: f64, sigma: f64, delta: f64) -> Result<Self> {
        if !(s >= 0.0 && sigma >= 0.0 && delta >= 0.0) {
            return Err(Error::param("s", "exponents must be non-negative"));
        }
        let map = ClusterMap::new(p, &grid.transverse_modes())?;
        let weights_sq = map.hs_weights(s).iter().map(|w| w * w).collect();
        Ok(NormContext { grid, weights_sq, s, sigma, delta })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    fn japanese(xi: f64, power: f64) -> f64 {
        (1.0 + xi * xi).powf(power / 2.0)
    }

    fn weighted_row(&self, row: &[num_complex::Complex64]) -> f64 {
        row.iter().zip(&self.weights_sq).map(|(v, w)| w * v.norm_sqr()).sum()
    }

    /// `sup_ξ ‖F̂(ξ)‖_{h^s}`.
    pub fn z(&self, f: &WaveguideField) -> Result<f64> {
        f.expect(Representation::Fourier)?;
        let nt = self.grid.transverse_len();
        Ok(f.values.chunks(nt).map(|r| self.weighted_row(r)).fold(0.0, f64::max).sqrt())
    }

    /// `(2π Σ_ξ dξ ⟨ξ⟩^{2σ} Σ_n (K^{2s} + ⟨ξ⟩^{2s}) |F̂_n(ξ)|²)^{1/2}`; `σ = 0` gives `‖F‖_{H^s}`.
    pub fn smoothed_hs(&self, f: &WaveguideField, sigma: f64) -> Result<f64> {
        f.expect(Representation::Fourier)?;
        let nt = self.grid.transverse_len();
        let mut acc = 0.0;
        for (k, row) in f.values.chunks(nt).enumerate() {
            let xi = self.grid.xi(k);
            let plain: f64 = row.iter().map(|v| v.norm_sqr()).sum();
            let weighted = self.weighted_row(row);
            acc += Self::japanese(xi, 2.0 * sigma) * (weighted + Self::japanese(xi, 2.0 * self.s) * plain);
        }
        Ok((2.0 * PI * self.grid.dxi() * acc).sqrt())
    }

    /// `sup_x ‖F(x)‖_{h^s}`.
    pub fn hs_linf(&self, f: &WaveguideField) -> Result<f64> {
        f.expect(Representation::Physical)?;
        let nt = self.grid.transverse_len();
        Ok(f.values.chunks(nt).map(|r| self.weighted_row(r)).fold(0.0, f64::max).sqrt())
    }

    /// `‖xF‖_{L²h^s}` with `x` measured from the centre of mass of `Σ_n |F_n|²`,
    /// wrapped into the window.
    pub fn x_weighted(&self, f: &WaveguideField) -> Result<f64> {
        f.expect(Representation::Physical)?;
        let nt = self.grid.transverse_len();
        let dens: Vec<f64> = f.values.chunks(nt).map(|r| r.iter().map(|v| v.norm_sqr()).sum()).collect();
        let total: f64 = dens.iter().sum();
        let centre = if total > 0.0 {
            dens.iter().enumerate().map(|(i, d)| self.grid.x(i) * d).sum::<f64>() / total
        } else {
            0.0
        };
        let l = self.grid.half_length();
        let mut acc = 0.0;
        for (i, row) in f.values.chunks(nt).enumerate() {
            let shifted = self.grid.x(i) - centre + l;
            let x = shifted - 2.0 * l * (shifted / (2.0 * l)).floor() - l;
            acc += x * x * self.weighted_row(row);
        }
        Ok((acc * self.grid.dx()).sqrt())
    }

    /// `‖F‖_S` of a field in the Fourier representation.
    pub fn s_norm(&self, f: &WaveguideField, tr: &Transforms) -> Result<f64> {
        let phys = tr.to_physical(f)?;
        Ok(self.smoothed_hs(f, self.sigma)? + self.x_weighted(&phys)?)
    }

    /// Norms of a profile `F` at time `t`, optionally with the solution `U`
    /// (any representation) and the time derivative `∂_t F` (Fourier).
    pub fn report(
        &self,
        profile: &WaveguideField,
        solution: Option<&WaveguideField>,
        derivative: Option<&WaveguideField>,
        t: f64,
        tr: &Transforms,
    ) -> Result<NormReport> {
        let phys = tr.to_physical(profile)?;
        let hs = self.smoothed_hs(profile, 0.0)?;
        let x_weighted = self.x_weighted(&phys)?;
        let s_norm = self.smoothed_hs(profile, self.sigma)? + x_weighted;
        let z = self.z(profile)?;
        let hs_linf = match solution {
            Some(u) => Some(self.hs_linf(&tr.to_physical(u)?)?),
            None => None,
        };
        let bracket = (1.0 + t * t).sqrt();
        let xt_dt = match derivative {
            Some(d) => Some(bracket.powf(1.0 - self.delta) * self.s_norm(d, tr)?),
            None => None,
        };
        Ok(NormReport {
            t,
            hs_linf,
            hs,
            s_norm,
            z,
            x_weighted,
            xt_z: z,
            xt_s: bracket.powf(-self.delta) * s_norm,
            xt_dt,
        })
    }
}
