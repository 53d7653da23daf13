//! FFT interface and a portable radix-2 implementation.
//!
//! Transforms are unnormalized: forward uses `e^{-2πijk/N}`, inverse
//! `e^{+2πijk/N}`.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // inherent float methods take over when std is linked
use num_traits::Float;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

pub trait Fft {
    fn len(&self) -> usize;
    fn process(&self, buf: &mut [Complex64], direction: Direction);
}

/// Creates transforms of a given power-of-two length.
pub trait FftPlanner {
    fn plan(&self, len: usize) -> Box<dyn Fft>;
}

/// Iterative Cooley–Tukey transform for power-of-two lengths.
pub struct Radix2 {
    len: usize,
    twiddles: Vec<Complex64>,
    reversed: Vec<u32>,
}

impl Radix2 {
    pub fn new(len: usize) -> Self {
        assert!(len.is_power_of_two(), "radix-2 length must be a power of two");
        let twiddles = (0..len / 2)
            .map(|k| {
                let a = -2.0 * core::f64::consts::PI * k as f64 / len as f64;
                Complex64::new(a.cos(), a.sin())
            })
            .collect();
        let bits = len.trailing_zeros();
        let reversed = (0..len as u32)
            .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (32 - bits) })
            .collect();
        Radix2 { len, twiddles, reversed }
    }
}

impl Fft for Radix2 {
    fn len(&self) -> usize {
        self.len
    }

    fn process(&self, buf: &mut [Complex64], direction: Direction) {
        let n = self.len;
        assert_eq!(buf.len(), n);
        for i in 0..n {
            let j = self.reversed[i] as usize;
            if i < j {
                buf.swap(i, j);
            }
        }
        let mut half = 1;
        while half < n {
            let step = n / (2 * half);
            for start in (0..n).step_by(2 * half) {
                for k in 0..half {
                    let mut w = self.twiddles[k * step];
                    if direction == Direction::Inverse {
                        w = w.conj();
                    }
                    let a = buf[start + k];
                    let b = buf[start + k + half] * w;
                    buf[start + k] = a + b;
                    buf[start + k + half] = a - b;
                }
            }
            half *= 2;
        }
    }
}

pub struct Radix2Planner;

impl FftPlanner for Radix2Planner {
    fn plan(&self, len: usize) -> Box<dyn Fft> {
        Box::new(Radix2::new(len))
    }
}

/// Transforms every axis of a row-major cube with side `fft.len()`.
pub fn transform_cube(fft: &dyn Fft, data: &mut [Complex64], dim: usize, direction: Direction, line: &mut Vec<Complex64>) {
    let n = fft.len();
    debug_assert_eq!(data.len(), n.pow(dim as u32));
    line.resize(n, Complex64::new(0.0, 0.0));
    for axis in 0..dim {
        let stride = n.pow((dim - 1 - axis) as u32);
        let block = stride * n;
        for base in (0..data.len()).step_by(block) {
            for off in 0..stride {
                let start = base + off;
                if stride == 1 {
                    fft.process(&mut data[start..start + n], direction);
                    continue;
                }
                for k in 0..n {
                    line[k] = data[start + k * stride];
                }
                fft.process(line, direction);
                for k in 0..n {
                    data[start + k * stride] = line[k];
                }
            }
        }
    }
}

/// Signed frequency of FFT bin `k` for length `n`: `0, 1, …, n/2−1, −n/2, …, −1`.
#[inline]
pub fn signed_bin(k: usize, n: usize) -> i64 {
    if k < n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

/// Bin of a signed frequency, wrapping modulo `n`.
#[inline]
pub fn bin_of(freq: i64, n: usize) -> usize {
    freq.rem_euclid(n as i64) as usize
}

/// Unnormalized DFT by definition, for testing.
pub fn naive_dft(input: &[Complex64], direction: Direction) -> Vec<Complex64> {
    let n = input.len();
    let sign = if direction == Direction::Forward { -1.0 } else { 1.0 };
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (k, o) in out.iter_mut().enumerate() {
        for (j, x) in input.iter().enumerate() {
            let a = sign * 2.0 * core::f64::consts::PI * ((j * k) % n) as f64 / n as f64;
            *o += x * Complex64::new(a.cos(), a.sin());
        }
    }
    out
}
