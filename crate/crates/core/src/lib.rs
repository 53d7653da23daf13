//! Resonance analysis and effective dynamics for the defocusing cubic NLS on
//! waveguides `R × T^d` whose transverse Laplacian `div(A∇)` is Diophantine.
//!
//! The crate is `no_std` and only needs `alloc`. FFTs go through the
//! [`fft::Fft`] trait so a faster backend can be plugged in by a std crate.
#![no_std]

extern crate alloc;

pub mod clusters;
pub mod effective;
pub mod error;
pub mod fft;
pub mod lattice;
mod linalg;
pub mod mode;
pub mod resonance;
pub mod waveguide;

pub use error::{Error, Result};
pub use mode::{Mode, ModeSet, MAX_DIM};
pub use num_complex::Complex64;
