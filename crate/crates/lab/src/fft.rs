//! FFT backend built on `rustfft`.

use std::sync::Arc;

use rustfft::FftPlanner as RustPlanner;
use wglab_core::fft::{Direction, Fft, FftPlanner};
use wglab_core::Complex64;

pub struct RustFft {
    forward: Arc<dyn rustfft::Fft<f64>>,
    inverse: Arc<dyn rustfft::Fft<f64>>,
}

impl Fft for RustFft {
    fn len(&self) -> usize {
        self.forward.len()
    }

    fn process(&self, buf: &mut [Complex64], direction: Direction) {
        match direction {
            Direction::Forward => self.forward.process(buf),
            Direction::Inverse => self.inverse.process(buf),
        }
    }
}

/// Planner handing out `rustfft` transforms.
pub struct RustFftPlanner;

impl FftPlanner for RustFftPlanner {
    fn plan(&self, len: usize) -> Box<dyn Fft> {
        let mut p = RustPlanner::new();
        Box::new(RustFft { forward: p.plan_fft_forward(len), inverse: p.plan_fft_inverse(len) })
    }
}
