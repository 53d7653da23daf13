//! Integer lattice points of `Z^d` and indexed sets of them.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Neg, Sub};
use core::str::FromStr;

#[allow(unused_imports)] // inherent float methods take over when std is linked
use num_traits::Float;

use crate::error::{Error, Result};

/// Largest transverse dimension supported.
pub const MAX_DIM: usize = 4;

/// A transverse frequency `n ∈ Z^d`, `1 <= d <= MAX_DIM`.
///
/// Unused trailing components are always zero, so the derived ordering and
/// hashing only depend on the dimension and the used components.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mode {
    dim: u8,
    comps: [i32; MAX_DIM],
}

impl Mode {
    pub fn new(comps: &[i32]) -> Result<Self> {
        if comps.is_empty() || comps.len() > MAX_DIM {
            return Err(Error::param("dim", "dimension must be between 1 and 4"));
        }
        let mut c = [0; MAX_DIM];
        c[..comps.len()].copy_from_slice(comps);
        Ok(Mode { dim: comps.len() as u8, comps: c })
    }

    pub fn zero(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim));
        Mode { dim: dim as u8, comps: [0; MAX_DIM] }
    }

    pub fn unit(dim: usize, axis: usize) -> Self {
        let mut m = Mode::zero(dim);
        m.comps[axis] = 1;
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    #[inline]
    pub fn comps(&self) -> &[i32] {
        &self.comps[..self.dim as usize]
    }

    #[inline]
    pub fn norm_sq(&self) -> i64 {
        self.comps().iter().map(|&c| c as i64 * c as i64).sum()
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        (self.norm_sq() as f64).sqrt()
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|&c| c == 0)
    }

    pub fn dot(&self, other: &Mode) -> i64 {
        self.comps().iter().zip(other.comps()).map(|(&a, &b)| a as i64 * b as i64).sum()
    }

    /// Largest absolute component.
    pub fn sup_norm(&self) -> i32 {
        self.comps().iter().map(|c| c.abs()).max().unwrap_or(0)
    }

    /// True when the first nonzero component is positive.
    pub fn is_positive(&self) -> bool {
        self.comps().iter().find(|&&c| c != 0).is_some_and(|&c| c > 0)
    }
}

impl Add for Mode {
    type Output = Mode;
    fn add(mut self, rhs: Mode) -> Mode {
        debug_assert_eq!(self.dim, rhs.dim);
        for (a, b) in self.comps.iter_mut().zip(rhs.comps) {
            *a += b;
        }
        self
    }
}

impl Sub for Mode {
    type Output = Mode;
    fn sub(mut self, rhs: Mode) -> Mode {
        debug_assert_eq!(self.dim, rhs.dim);
        for (a, b) in self.comps.iter_mut().zip(rhs.comps) {
            *a -= b;
        }
        self
    }
}

impl Neg for Mode {
    type Output = Mode;
    fn neg(mut self) -> Mode {
        for a in self.comps.iter_mut() {
            *a = -*a;
        }
        self
    }
}

/// Components joined by `;`, the format used in CSV artifacts.
impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.comps().iter().enumerate() {
            if i > 0 {
                f.write_str(";")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({self})")
    }
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let mut comps = Vec::new();
        for part in s.trim().trim_matches(|c| c == '(' || c == ')').split(';') {
            let v = part
                .trim()
                .parse::<i32>()
                .map_err(|_| Error::param("mode", String::from("cannot parse ") + s))?;
            comps.push(v);
        }
        Mode::new(&comps)
    }
}

pub(crate) fn join_modes(modes: &[Mode], limit: usize) -> String {
    let mut out = String::new();
    for (i, m) in modes.iter().take(limit).enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push('(');
        out.push_str(&m.to_string());
        out.push(')');
    }
    if modes.len() > limit {
        out.push_str(" ...");
    }
    out
}

/// An ordered set of modes with constant-time index lookup.
///
/// Lookup goes through a dense table over the bounding box, which keeps the
/// crate free of hashing and makes every iteration order deterministic.
#[derive(Clone, Debug)]
pub struct ModeSet {
    dim: usize,
    modes: Vec<Mode>,
    bound: i32,
    table: Vec<u32>,
}

const ABSENT: u32 = u32::MAX;

impl ModeSet {
    /// The closed ball `|n| <= radius`, sorted by `(|n|^2, lexicographic)`.
    pub fn ball(dim: usize, radius: u32) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(Error::param("dim", "dimension must be between 1 and 4"));
        }
        let r = radius as i64;
        let mut modes: Vec<Mode> = box_modes(dim, radius as i32)
            .into_iter()
            .filter(|m| m.norm_sq() <= r * r)
            .collect();
        modes.sort_by_key(|m| (m.norm_sq(), *m));
        Self::build(dim, modes)
    }

    /// Keeps the given order; duplicates and mixed dimensions are rejected.
    pub fn from_modes(dim: usize, modes: Vec<Mode>) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(Error::param("dim", "dimension must be between 1 and 4"));
        }
        if let Some(m) = modes.iter().find(|m| m.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: m.dim() });
        }
        Self::build(dim, modes)
    }

    fn build(dim: usize, modes: Vec<Mode>) -> Result<Self> {
        if modes.len() >= ABSENT as usize {
            return Err(Error::param("modes", "too many modes"));
        }
        let bound = modes.iter().map(|m| m.sup_norm()).max().unwrap_or(0);
        let side = 2 * bound as usize + 1;
        let mut table = vec![ABSENT; side.pow(dim as u32)];
        for (i, m) in modes.iter().enumerate() {
            let slot = Self::slot(dim, bound, m);
            if table[slot] != ABSENT {
                return Err(Error::param("modes", String::from("duplicate mode ") + &m.to_string()));
            }
            table[slot] = i as u32;
        }
        Ok(ModeSet { dim, modes, bound, table })
    }

    #[inline]
    fn slot(dim: usize, bound: i32, m: &Mode) -> usize {
        let side = 2 * bound as usize + 1;
        let mut s = 0usize;
        for &c in &m.comps[..dim] {
            s = s * side + (c + bound) as usize;
        }
        s
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn get(&self, i: usize) -> Mode {
        self.modes[i]
    }

    pub fn iter(&self) -> core::slice::Iter<'_, Mode> {
        self.modes.iter()
    }

    #[inline]
    pub fn index_of(&self, m: &Mode) -> Option<usize> {
        if m.dim() != self.dim || m.sup_norm() > self.bound {
            return None;
        }
        let v = self.table[Self::slot(self.dim, self.bound, m)];
        (v != ABSENT).then_some(v as usize)
    }

    pub fn contains(&self, m: &Mode) -> bool {
        self.index_of(m).is_some()
    }
}

/// All modes of the cube `[-half, half]^dim` in lexicographic order.
pub(crate) fn box_modes(dim: usize, half: i32) -> Vec<Mode> {
    let side = (2 * half + 1) as usize;
    let total = side.pow(dim as u32);
    let mut out = Vec::with_capacity(total);
    let mut comps = [-half; MAX_DIM];
    for _ in 0..total {
        out.push(Mode::new(&comps[..dim]).unwrap());
        for axis in (0..dim).rev() {
            if comps[axis] < half {
                comps[axis] += 1;
                break;
            }
            comps[axis] = -half;
        }
    }
    out
}
