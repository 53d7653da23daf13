//! Fields on the waveguide `R × T^d`: a periodic window `[−L, L)` in `x`
//! and a box of transverse Fourier modes.
//!
//! Longitudinal transforms use `F̂(ξ) = (2π)^{-1} ∫ e^{-iξx} F(x) dx`,
//! discretized on the window; transverse coefficients are
//! `u_n = (2π)^{-d} ∫_{T^d} e^{-in·y} u(y) dy`.

mod dispersive;
mod kernel;
mod norms;
mod solver;

pub use dispersive::{dispersive_check, line_flow, DispersiveCheck};
pub use kernel::{
    extract_profile, free_flow, nonresonant_part, normal_form_kernel, space_resonant_part, trilinear_kernel,
};
pub use norms::{NormContext, NormReport};
pub use solver::{evolve_nls, NlsOptions, SplitStep};

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;
use core::cell::RefCell;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)] // inherent float methods take over when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::fft::{signed_bin, transform_cube, Direction, Fft, FftPlanner};
use crate::mode::{Mode, ModeSet, MAX_DIM};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WaveguideGrid {
    half_length: f64,
    nx: usize,
    dim: usize,
    ny: usize,
}

impl WaveguideGrid {
    /// `nx` points on `[−L, L)` and `ny^dim` transverse modes
    /// `n_i ∈ [−ny/2, ny/2)`; both sizes must be powers of two.
    pub fn new(half_length: f64, nx: usize, dim: usize, ny: usize) -> Result<Self> {
        if !(half_length > 0.0 && half_length.is_finite()) {
            return Err(Error::param("L", "must be positive"));
        }
        if !nx.is_power_of_two() || nx < 2 {
            return Err(Error::param("Nx", "must be a power of two, at least 2"));
        }
        if !ny.is_power_of_two() {
            return Err(Error::param("Ny", "must be a power of two"));
        }
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(Error::param("dim", "dimension must be between 1 and 4"));
        }
        Ok(WaveguideGrid { half_length, nx, dim, ny })
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_length / self.nx as f64
    }

    pub fn dxi(&self) -> f64 {
        PI / self.half_length
    }

    pub fn x(&self, j: usize) -> f64 {
        -self.half_length + j as f64 * self.dx()
    }

    /// Frequency of bin `k` (FFT order).
    pub fn xi(&self, k: usize) -> f64 {
        signed_bin(k, self.nx) as f64 * self.dxi()
    }

    pub fn transverse_len(&self) -> usize {
        self.ny.pow(self.dim as u32)
    }

    pub fn len(&self) -> usize {
        self.nx * self.transverse_len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Mode stored at transverse index `j` (row-major FFT order).
    pub fn transverse_mode(&self, mut j: usize) -> Mode {
        let mut c = [0i32; MAX_DIM];
        for axis in (0..self.dim).rev() {
            c[axis] = signed_bin(j % self.ny, self.ny) as i32;
            j /= self.ny;
        }
        Mode::new(&c[..self.dim]).unwrap()
    }

    /// Transverse index of a mode, wrapping out-of-box modes periodically.
    pub fn transverse_index(&self, m: &Mode) -> usize {
        m.comps()
            .iter()
            .fold(0, |acc, &c| acc * self.ny + (c as i64).rem_euclid(self.ny as i64) as usize)
    }

    pub fn in_box(&self, m: &Mode) -> bool {
        let h = (self.ny / 2) as i32;
        m.comps().iter().all(|&c| c >= -h && c < h)
    }

    pub fn transverse_modes(&self) -> ModeSet {
        let modes = (0..self.transverse_len()).map(|j| self.transverse_mode(j)).collect();
        ModeSet::from_modes(self.dim, modes).unwrap()
    }

    /// Radius of a ball containing every transverse mode of the box.
    pub fn cover_radius(&self) -> u32 {
        let h = (self.ny / 2) as f64;
        (h * (self.dim as f64).sqrt()).ceil() as u32
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Representation {
    /// Values `F_n(x_j)`.
    Physical,
    /// Values `F̂_n(ξ_k)`.
    Fourier,
}

/// Samples of a field, `values[i * transverse_len + j]` with `i` the
/// longitudinal index (point or frequency bin) and `j` the transverse mode.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveguideField {
    pub grid: WaveguideGrid,
    pub repr: Representation,
    pub time: f64,
    pub values: Vec<Complex64>,
}

impl WaveguideField {
    pub fn zeros(grid: WaveguideGrid, repr: Representation, time: f64) -> Self {
        WaveguideField { grid, repr, time, values: vec![ZERO; grid.len()] }
    }

    /// Samples `f(x, n)` on the physical grid.
    pub fn from_physical(grid: WaveguideGrid, time: f64, f: impl Fn(f64, &Mode) -> Complex64) -> Self {
        let nt = grid.transverse_len();
        let modes: Vec<Mode> = (0..nt).map(|j| grid.transverse_mode(j)).collect();
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..grid.nx {
            let x = grid.x(i);
            values.extend(modes.iter().map(|m| f(x, m)));
        }
        WaveguideField { grid, repr: Representation::Physical, time, values }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.grid.transverse_len() + j]
    }

    /// `∫ Σ_n |F_n(x)|² dx`, computed in either representation.
    pub fn mass(&self) -> f64 {
        let sum: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
        match self.repr {
            Representation::Physical => sum * self.grid.dx(),
            Representation::Fourier => sum * 2.0 * PI * self.grid.dxi(),
        }
    }

    pub(crate) fn expect(&self, repr: Representation) -> Result<()> {
        if self.repr != repr {
            return Err(Error::WrongRepresentation {
                expected: match repr {
                    Representation::Physical => "physical",
                    Representation::Fourier => "fourier",
                },
            });
        }
        Ok(())
    }

    pub(crate) fn same_grid(&self, other: &WaveguideField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }
}

/// FFT plans for one grid.
pub struct Transforms {
    grid: WaveguideGrid,
    x: Box<dyn Fft>,
    y: Box<dyn Fft>,
    line: RefCell<Vec<Complex64>>,
    cube_line: RefCell<Vec<Complex64>>,
}

impl Transforms {
    pub fn new(grid: WaveguideGrid, planner: &dyn FftPlanner) -> Self {
        Transforms {
            grid,
            x: planner.plan(grid.nx),
            y: planner.plan(grid.ny),
            line: RefCell::new(vec![ZERO; grid.nx]),
            cube_line: RefCell::new(Vec::new()),
        }
    }

    pub fn grid(&self) -> &WaveguideGrid {
        &self.grid
    }

    pub fn to_fourier(&self, f: &WaveguideField) -> Result<WaveguideField> {
        self.check(f)?;
        let mut out = f.clone();
        if f.repr == Representation::Physical {
            self.x_forward(&mut out.values);
            out.repr = Representation::Fourier;
        }
        Ok(out)
    }

    pub fn to_physical(&self, f: &WaveguideField) -> Result<WaveguideField> {
        self.check(f)?;
        let mut out = f.clone();
        if f.repr == Representation::Fourier {
            self.x_inverse(&mut out.values);
            out.repr = Representation::Physical;
        }
        Ok(out)
    }

    fn check(&self, f: &WaveguideField) -> Result<()> {
        if f.grid != self.grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    /// Physical `x` to frequency `ξ`, every transverse mode.
    pub(crate) fn x_forward(&self, values: &mut [Complex64]) {
        let scale = self.grid.dx() / (2.0 * PI);
        self.x_lines(values, Direction::Forward, scale);
    }

    pub(crate) fn x_inverse(&self, values: &mut [Complex64]) {
        let scale = self.grid.dxi();
        self.x_lines(values, Direction::Inverse, scale);
    }

    fn x_lines(&self, values: &mut [Complex64], dir: Direction, scale: f64) {
        let nx = self.grid.nx;
        let nt = self.grid.transverse_len();
        let mut line = self.line.borrow_mut();
        for j in 0..nt {
            for i in 0..nx {
                line[i] = values[i * nt + j];
            }
            if dir == Direction::Inverse {
                for (k, v) in line.iter_mut().enumerate() {
                    if k % 2 == 1 {
                        *v = -*v;
                    }
                }
            }
            self.x.process(&mut line, dir);
            for i in 0..nx {
                let sign = if dir == Direction::Forward && i % 2 == 1 { -scale } else { scale };
                values[i * nt + j] = line[i] * sign;
            }
        }
    }

    /// Transverse coefficients to values on the `ny^d` grid of `T^d`, for every `x`.
    pub(crate) fn modes_to_space(&self, values: &mut [Complex64]) {
        let nt = self.grid.transverse_len();
        let mut line = self.cube_line.borrow_mut();
        for block in values.chunks_mut(nt) {
            transform_cube(&*self.y, block, self.grid.dim, Direction::Inverse, &mut line);
        }
    }

    pub(crate) fn space_to_modes(&self, values: &mut [Complex64]) {
        let nt = self.grid.transverse_len();
        let scale = 1.0 / nt as f64;
        let mut line = self.cube_line.borrow_mut();
        for block in values.chunks_mut(nt) {
            transform_cube(&*self.y, block, self.grid.dim, Direction::Forward, &mut line);
            for v in block.iter_mut() {
                *v *= scale;
            }
        }
    }

    /// Transverse transforms of a single block of `ny^d` values.
    pub(crate) fn block_to_space(&self, block: &mut [Complex64]) {
        let mut line = self.cube_line.borrow_mut();
        transform_cube(&*self.y, block, self.grid.dim, Direction::Inverse, &mut line);
    }

    pub(crate) fn block_to_modes(&self, block: &mut [Complex64]) {
        let scale = 1.0 / block.len() as f64;
        let mut line = self.cube_line.borrow_mut();
        transform_cube(&*self.y, block, self.grid.dim, Direction::Forward, &mut line);
        for v in block.iter_mut() {
            *v *= scale;
        }
    }
}
