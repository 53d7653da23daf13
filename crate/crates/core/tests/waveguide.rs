use std::f64::consts::PI;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wglab_core::clusters::build_partition;
use wglab_core::fft::{signed_bin, Radix2, Radix2Planner};
use wglab_core::lattice::DispersionMatrix;
use wglab_core::resonance::build_quasi_resonant_index;
use wglab_core::waveguide::{
    dispersive_check, evolve_nls, extract_profile, free_flow, line_flow, nonresonant_part, normal_form_kernel,
    space_resonant_part, trilinear_kernel, NlsOptions, NormContext, Representation, SplitStep, Transforms,
    WaveguideField, WaveguideGrid,
};
use wglab_core::{Complex64, Error, Mode};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn m(v: &[i32]) -> Mode {
    Mode::new(v).unwrap()
}

fn quad(a: &DispersionMatrix, n: &Mode) -> f64 {
    let v = n.comps();
    let mut s = 0.0;
    for i in 0..a.dim() {
        for j in 0..a.dim() {
            s += a.entry(i, j) * v[i] as f64 * v[j] as f64;
        }
    }
    s
}

/// Free evolution of `e^{-x²}` under `i∂_t u + ∂_x²u = 0`.
fn gaussian(x: f64, t: f64) -> Complex64 {
    let d = c(1.0, 4.0 * t);
    (c(-x * x, 0.0) / d).exp() / d.sqrt()
}

fn max_diff(a: &WaveguideField, b: &WaveguideField) -> f64 {
    a.values.iter().zip(&b.values).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn sup(a: &WaveguideField) -> f64 {
    a.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

fn two_mode_data(grid: WaveguideGrid, eps: f64) -> WaveguideField {
    let (n0, n1) = (Mode::zero(grid.dim()), Mode::unit(grid.dim(), 0));
    WaveguideField::from_physical(grid, 0.0, |x, n| {
        if *n == n0 || *n == n1 {
            c(eps * (-x * x).exp(), 0.0)
        } else {
            ZERO
        }
    })
}

#[test]
fn free_flow_matches_gaussian_closed_form() {
    let a = DispersionMatrix::golden();
    let grid = WaveguideGrid::new(64.0, 1024, 2, 4).unwrap();
    let tr = Transforms::new(grid, &Radix2Planner);
    let n = m(&[1, -1]);
    let u0 = WaveguideField::from_physical(grid, 0.0, |x, k| if *k == n { gaussian(x, 0.0) } else { ZERO });
    let opts = NlsOptions { h: 0.1, nonlinear: false, ..Default::default() };
    let t = 2.0;
    let u = tr.to_physical(&evolve_nls(&u0, &a, &tr, t, opts).unwrap()).unwrap();
    let lam = quad(&a, &n);
    let want = WaveguideField::from_physical(grid, t, |x, k| {
        if *k == n {
            gaussian(x, t) * Complex64::from_polar(1.0, -t * lam)
        } else {
            ZERO
        }
    });
    assert!(max_diff(&u, &want) < 1e-10, "{}", max_diff(&u, &want));
}

#[test]
fn zero_data_stays_zero() {
    let a = DispersionMatrix::golden();
    let grid = WaveguideGrid::new(16.0, 64, 2, 4).unwrap();
    let tr = Transforms::new(grid, &Radix2Planner);
    let u0 = WaveguideField::zeros(grid, Representation::Physical, 0.0);
    let u = evolve_nls(&u0, &a, &tr, 1.0, NlsOptions::default()).unwrap();
    assert!(u.values.iter().all(|v| *v == ZERO));
}

#[test]
fn mass_is_conserved() {
    let a = DispersionMatrix::golden();
    let grid = WaveguideGrid::new(64.0, 512, 2, 4).unwrap();
    let tr = Transforms::new(grid, &Radix2Planner);
    let u0 = two_mode_data(grid, 0.1);
    let m0 = u0.mass();
    let mut solver = SplitStep::new(&u0, &a, &tr, NlsOptions { h: 0.05, ..Default::default() }).unwrap();
    for t in 1..=10 {
        solver.advance_to(t as f64).unwrap();
        assert!((solver.state().mass() - m0).abs() <= 1e-12 * m0);
    }
    assert!((solver.time() - 10.0).abs() < 1e-9);
}

#[test]
fn strang_splitting_is_second_order() {
    let a = DispersionMatrix::golden();
    let grid = WaveguideGrid::new(16.0, 128, 2, 4).unwrap();
    let tr = Transforms::new(grid, &Radix2Planner);
    let u0 = two_mode_data(grid, 1.0);
    let run = |h: f64| evolve_nls(&u0, &a, &tr, 1.0, NlsOptions { h, ..Default::default() }).unwrap();
    let reference = run(0.05 / 64.0);
    let errs: Vec<f64> = [0.05, 0.025, 0.0125].iter().map(|&h| max_diff(&run(h), &reference)).collect();
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((order - 2.0).abs() < 0.2, "order {order}, errors {errs:?}");
    }
}

#[test]
fn dealiasing_clears_the_outer_third() {
    let a = DispersionMatrix::golden();
    let grid = WaveguideGrid::new(8.0, 64, 2, 8).unwrap();
    let tr = Transforms::new(grid, &Radix2Planner);
    let u0 = WaveguideField::from_physical(grid, 0.0, |x, n| c((-x * x).exp() / (1.0 + n.norm_sq() as f64), 0.0));
    let u = evolve_nls(&u0, &a, &tr, 0.2, NlsOptions { h: 0.05, dealias: true, ..Default::default() }).unwrap();
    let nt = grid.transverse_len();
    for k in 0..grid.nx() {
        for j in 0..nt {
            let n = grid.transverse_mode(j);
            let outside = 3 * signed_bin(k, grid.nx()).unsigned_abs() as usize > grid.nx()
                || n.comps().iter().any(|&v| 3 * v.unsigned_abs() as usize > grid.ny());
            if outside {
                assert_eq!(u.at(k, j), ZERO);
            }
        }
    }
    assert!(sup(&u) > 0.1);
}

#[test]
fn blow_up_guard_trips() {
    let a = DispersionMatrix::golden();
    let grid = WaveguideGrid::new(8.0, 32, 1, 4).unwrap();
    let tr = Transforms::new(grid, &Radix2Planner);
    let a1 = DispersionMatrix::new(1, &[1.0], 1.0).unwrap();
    let u0 = WaveguideField::from_physical(grid, 0.0, |_, _| c(10.0, 0.0));
    let r = evolve_nls(&u0, &a1, &tr, 0.1, NlsOptions { sup_guard: 5.0, ..Default::default() });
    assert!(matches!(r, Err(Error::BlowUp { .. })));
    assert!(evolve_nls(&u0, &a, &tr, 0.1, NlsOptions::default()).is_err());
}

#[test]
fn profile_identities() {
    let a = DispersionMatrix::golden();
    let grid = WaveguideGrid::new(32.0, 256, 2, 4).unwrap();
    let tr = Transforms::new(grid, &Radix2Planner);
    let u0 = tr.to_fourier(&two_mode_data(grid, 0.5)).unwrap();
    assert_eq!(extract_profile(&u0, &a, 0.0).unwrap().values, u0.values);
    let there = extract_profile(&u0, &a, 3.7).unwrap();
    let back = extract_profile(&there, &a, -3.7).unwrap();
    assert!(max_diff(&back, &u0) < 1e-15);
    assert!(max_diff(&free_flow(&there, &a, 3.7).unwrap(), &u0) < 1e-15);
    let phys = tr.to_physical(&u0).unwrap();
    assert!(matches!(extract_profile(&phys, &a, 1.0), Err(Error::WrongRepresentation { .. })));

    let opts = NlsOptions { h: 0.1, nonlinear: false, ..Default::default() };
    let mut solver = SplitStep::new(&u0, &a, &tr, opts).unwrap();
    for t in [1.0, 2.5, 5.0] {
        solver.advance_to(t).unwrap();
        let f = extract_profile(solver.state(), &a, solver.time()).unwrap();
        assert!(max_diff(&f, &u0) <= 1e-10);
    }
}

fn random_band_limited(grid: WaveguideGrid, band: i64, rng: &mut ChaCha8Rng) -> WaveguideField {
    let mut f = WaveguideField::zeros(grid, Representation::Fourier, 0.0);
    let nt = grid.transverse_len();
    for k in 0..grid.nx() {
        if signed_bin(k, grid.nx()).abs() > band {
            continue;
        }
        for j in 0..nt {
            f.values[k * nt + j] = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        }
    }
    f
}

#[test]
fn kernel_matches_fourier_side_quadrature() {
    // bins |k| <= 2 keep every cubic product below the Nyquist bin of Nx = 16,
    // so the discrete convolution has no longitudinal aliasing; transverse
    // sums wrap on the box exactly as the pseudo-spectral product does.
    let a = DispersionMatrix::golden();
    let grid = WaveguideGrid::new(3.0, 16, 2, 4).unwrap();
    let tr = Transforms::new(grid, &Radix2Planner);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let (f, g, h) = (
        random_band_limited(grid, 2, &mut rng),
        random_band_limited(grid, 2, &mut rng),
        random_band_limited(grid, 2, &mut rng),
    );
    let t = 1.3;
    let got = trilinear_kernel(&f, &g, &h, &a, t, &tr).unwrap();
    let (nx, nt) = (grid.nx(), grid.transverse_len());
    let dxi = grid.dxi();
    let sym = |k: usize, j: usize| grid.xi(k).powi(2) + quad(&a, &grid.transverse_mode(j));
    let mut worst = 0.0f64;
    for k in 0..nx {
        for j in 0..nt {
            let mut acc = ZERO;
            for k1 in 0..nx {
                for k2 in 0..nx {
                    let s3 = signed_bin(k, nx) - signed_bin(k1, nx) + signed_bin(k2, nx);
                    if s3.abs() > 2 {
                        continue;
                    }
                    let k3 = s3.rem_euclid(nx as i64) as usize;
                    for j1 in 0..nt {
                        for j2 in 0..nt {
                            let n3 = grid.transverse_mode(j) - grid.transverse_mode(j1) + grid.transverse_mode(j2);
                            let j3 = grid.transverse_index(&n3);
                            let phi = sym(k, j) - sym(k1, j1) + sym(k2, j2) - sym(k3, j3);
                            acc += Complex64::from_polar(dxi * dxi, t * phi)
                                * f.at(k1, j1)
                                * g.at(k2, j2).conj()
                                * h.at(k3, j3);
                        }
                    }
                }
            }
            worst = worst.max((got.at(k, j) - acc).norm());
        }
    }
    assert!(worst < 1e-8, "{worst:e}");
}

#[test]
fn kernel_is_multilinear_and_gauge_covariant() {
    let a = DispersionMatrix::golden();
    let grid = WaveguideGrid::new(8.0, 32, 2, 4).unwrap();
    let tr = Transforms::new(grid, &Radix2Planner);
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let f = random_band_limited(grid, 16, &mut rng);
    let zero = WaveguideField::zeros(grid, Representation::Fourier, 0.0);
    assert_eq!(sup(&trilinear_kernel(&f, &zero, &f, &a, 2.0, &tr).unwrap()), 0.0);
    let rot = Complex64::from_polar(1.0, 0.9);
    let mut turned = f.clone();
    turned.values.iter_mut().for_each(|v| *v *= rot);
    let base = trilinear_kernel(&f, &f, &f, &a, 2.0, &tr).unwrap();
    let out = trilinear_kernel(&turned, &turned, &turned, &a, 2.0, &tr).unwrap();
    for (x, y) in base.values.iter().zip(&out.values) {
        assert!((x * rot - y).norm() <= 1e-12 * (1.0 + x.norm()));
    }
}

#[test]
fn kernel_splits_into_resonant_and_nonresonant_parts() {
    let a = DispersionMatrix::golden();
    let grid = WaveguideGrid::new(16.0, 64, 2, 8).unwrap();
    let tr = Transforms::new(grid, &Radix2Planner);
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let f = random_band_limited(grid, 20, &mut rng);
    let g = random_band_limited(grid, 20, &mut rng);
    for t in [1.0, 3.0, 20.0] {
        let total = trilinear_kernel(&f, &g, &f, &a, t, &tr).unwrap();
        let res = space_resonant_part(&f, &g, &f, &a, t, &tr).unwrap();
        let non = nonresonant_part(&f, &g, &f, &a, t, &tr).unwrap();
        let scale = sup(&total);
        for ((x, r), n) in total.values.iter().zip(&res.values).zip(&non.values) {
            assert!((x - r - n).norm() <= 1e-13 * scale);
        }
    }
    assert!(matches!(space_resonant_part(&f, &g, &f, &a, 0.5, &tr), Err(Error::TimeBeforeOne(_))));
}

#[test]
fn resonant_part_examples() {
    let a = DispersionMatrix::golden();
    let grid = WaveguideGrid::new(8.0, 16, 2, 8).unwrap();
    let tr = Transforms::new(grid, &Radix2Planner);
    let nt = grid.transverse_len();
    let t = 2.0;

    // one mode
    let mut f = WaveguideField::zeros(grid, Representation::Fourier, 0.0);
    let j0 = grid.transverse_index(&m(&[1, 2]));
    for k in 0..grid.nx() {
        f.values[k * nt + j0] = c(0.1 * k as f64, -0.3);
    }
    let r = space_resonant_part(&f, &f, &f, &a, t, &tr).unwrap();
    for k in 0..grid.nx() {
        for j in 0..nt {
            let v = f.at(k, j);
            let want = v * v.norm_sqr() * (PI / t);
            assert!((r.at(k, j) - want).norm() <= 1e-14 * (1.0 + want.norm()), "{k} {j} {} {want}", r.at(k, j));
        }
    }

    // naive loop on the box of half-width 4
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let f = random_band_limited(grid, 8, &mut rng);
    let g = random_band_limited(grid, 8, &mut rng);
    let h = random_band_limited(grid, 8, &mut rng);
    let r = space_resonant_part(&f, &g, &h, &a, t, &tr).unwrap();
    for k in [0usize, 3, 9] {
        for j in 0..nt {
            let n = grid.transverse_mode(j);
            let (mut acc, mut size) = (ZERO, 0.0);
            for j1 in 0..nt {
                for j2 in 0..nt {
                    let n1 = grid.transverse_mode(j1);
                    let n2 = grid.transverse_mode(j2);
                    let j3 = grid.transverse_index(&(n - n1 + n2));
                    let n3 = grid.transverse_mode(j3);
                    let w = quad(&a, &n1) - quad(&a, &n2) + quad(&a, &n3) - quad(&a, &n);
                    let term = f.at(k, j1) * g.at(k, j2).conj() * h.at(k, j3);
                    acc += Complex64::from_polar(1.0, -t * w) * term;
                    size += term.norm();
                }
            }
            let want = acc * (PI / t);
            assert!((r.at(k, j) - want).norm() <= 1e-13 * size, "{k} {n}");
        }
    }

    // the resonant flow F ↦ −iR[F,F,F] does not change the mass of a slice
    let r = space_resonant_part(&f, &f, &f, &a, t, &tr).unwrap();
    for k in 0..grid.nx() {
        let pairing: Complex64 = (0..nt).map(|j| f.at(k, j).conj() * r.at(k, j)).sum();
        let size: f64 = (0..nt).map(|j| f.at(k, j).norm() * r.at(k, j).norm()).sum();
        assert!(pairing.im.abs() <= 1e-13 * size.max(1e-300));
    }
}

// t^{1+γ−3δ}‖nonresonant part‖_Z, γ = 0.2, δ = 0.01, maximum over t ∈ [1, 50]
const NONRESONANT_DECAY: f64 = 7.48916966908678094e-5;

#[test]
fn nonresonant_part_decays() {
    let a = DispersionMatrix::golden();
    let grid = WaveguideGrid::new(1024.0, 8192, 2, 4).unwrap();
    let tr = Transforms::new(grid, &Radix2Planner);
    let p = build_partition(&a, grid.cover_radius(), 0.5).unwrap();
    let ctx = NormContext::new(&p, grid, 2.0, 0.1, 0.01).unwrap();
    let f = tr.to_fourier(&two_mode_data(grid, 0.1)).unwrap();
    let mut vals = Vec::new();
    for t in [1.0, 2.0, 5.0, 10.0, 20.0, 50.0] {
        let nr = nonresonant_part(&f, &f, &f, &a, t, &tr).unwrap();
        vals.push(t.powf(1.0 + 0.2 - 0.03) * ctx.z(&nr).unwrap());
    }
    assert!(vals.windows(2).all(|w| w[1] < w[0]), "{vals:?}");
    let worst = vals.iter().cloned().fold(0.0, f64::max);
    assert!((worst - NONRESONANT_DECAY).abs() <= 1e-9 * NONRESONANT_DECAY);
}

#[test]
fn normal_form_kernel_single_triple() {
    let id = DispersionMatrix::identity(2, 1.0).unwrap();
    let grid = WaveguideGrid::new(4.0, 4, 2, 8).unwrap();
    let p = build_partition(&id, grid.cover_radius(), 0.5).unwrap();
    let idx = build_quasi_resonant_index(&p, &id, 0.2, 1e9).unwrap();
    let nt = grid.transverse_len();
    let put = |n: Mode, v: Complex64| {
        let mut f = WaveguideField::zeros(grid, Representation::Fourier, 0.0);
        f.values[nt + grid.transverse_index(&n)] = v;
        f
    };
    // Ω = 4 − 1 + 0 − 1
    let (f, g, h) = (put(m(&[2, 0]), c(1.0, 0.0)), put(m(&[1, 0]), c(1.0, 0.0)), put(m(&[0, 0]), c(1.0, 0.0)));
    let out = normal_form_kernel(&f, &g, &h, 0.0, &p, &idx, 1e-9).unwrap();
    let j = grid.transverse_index(&m(&[1, 0]));
    for (i, v) in out.values.iter().enumerate() {
        let want = if i == nt + j { c(0.5, 0.0) } else { ZERO };
        assert!((v - want).norm() < 1e-15);
    }
    let later = normal_form_kernel(&f, &g, &h, 0.3, &p, &idx, 1e-9).unwrap();
    assert!((later.values[nt + j] - Complex64::from_polar(0.5, -0.6)).norm() < 1e-15);
    // a pairing has Ω = 0 and is skipped
    let out = normal_form_kernel(&f, &f, &h, 0.0, &p, &idx, 1e-9).unwrap();
    assert!(out.values.iter().all(|v| *v == ZERO));
}

// sup of ‖normal-form kernel‖_Z / (‖F‖_Z ‖G‖_Z ‖H‖_Z) over the sweep below
const NORMAL_FORM_RATIO: f64 = 1.74888866010934423e-70;

#[test]
fn normal_form_kernel_z_bound() {
    let a = DispersionMatrix::golden();
    let grid = WaveguideGrid::new(4.0, 2, 2, 64).unwrap();
    let p = build_partition(&a, grid.cover_radius(), 0.5).unwrap();
    let idx = build_quasi_resonant_index(&p, &a, 0.2, p.default_alpha0_constant()).unwrap();
    let s = 26.0;
    let ctx = NormContext::new(&p, grid, s, 0.0, 0.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let mut worst = 0.0f64;
    for _ in 0..40 {
        let mut draw = || {
            let mut f = WaveguideField::zeros(grid, Representation::Fourier, 0.0);
            for _ in 0..6 {
                let n = loop {
                    let v = m(&[rng.random_range(-32..32), rng.random_range(-32..32)]);
                    if v.norm_sq() <= 32 * 32 {
                        break v;
                    }
                };
                f.values[grid.transverse_index(&n)] = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            }
            f
        };
        let (f, g, h) = (draw(), draw(), draw());
        let t = rng.random_range(1.0..20.0);
        let out = normal_form_kernel(&f, &g, &h, t, &p, &idx, 1e-9).unwrap();
        let ratio = ctx.z(&out).unwrap() / (ctx.z(&f).unwrap() * ctx.z(&g).unwrap() * ctx.z(&h).unwrap());
        worst = worst.max(ratio);
    }
    assert!(worst.is_finite());
    assert!((worst - NORMAL_FORM_RATIO).abs() <= 1e-9 * NORMAL_FORM_RATIO);
}

#[test]
fn z_norm_of_gaussian() {
    let a = DispersionMatrix::golden();
    let grid = WaveguideGrid::new(32.0, 256, 2, 4).unwrap();
    let tr = Transforms::new(grid, &Radix2Planner);
    let p = build_partition(&a, grid.cover_radius(), 0.5).unwrap();
    let ctx = NormContext::new(&p, grid, 2.0, 0.1, 0.01).unwrap();
    let zero = Mode::zero(2);
    let f = WaveguideField::from_physical(grid, 0.0, |x, n| if *n == zero { c((-x * x).exp(), 0.0) } else { ZERO });
    let z = ctx.z(&tr.to_fourier(&f).unwrap()).unwrap();
    assert!((z - 1.0 / (2.0 * PI.sqrt())).abs() < 1e-12, "{z}");
    let empty = WaveguideField::zeros(grid, Representation::Fourier, 0.0);
    let rep = ctx.report(&empty, Some(&empty), Some(&empty), 1.0, &tr).unwrap();
    assert_eq!((rep.z, rep.hs, rep.s_norm, rep.x_weighted, rep.xt_total()), (0.0, 0.0, 0.0, 0.0, 0.0));
    assert_eq!(rep.hs_linf, Some(0.0));
}

// sup of 2√π·Z/S over the random fields below; the bound predicts at most 1
const Z_OVER_S: f64 = 5.55220912086705098e-1;

#[test]
fn z_is_controlled_by_the_strong_norm() {
    let a = DispersionMatrix::golden();
    let grid = WaveguideGrid::new(32.0, 256, 2, 4).unwrap();
    let tr = Transforms::new(grid, &Radix2Planner);
    let p = build_partition(&a, grid.cover_radius(), 0.5).unwrap();
    let ctx = NormContext::new(&p, grid, 2.0, 0.1, 0.01).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let nt = grid.transverse_len();
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let bumps: Vec<(usize, f64, f64, Complex64)> = (0..4)
            .map(|_| {
                (
                    rng.random_range(0..nt),
                    rng.random_range(-8.0..8.0),
                    rng.random_range(0.5..3.0),
                    c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
                )
            })
            .collect();
        let f = WaveguideField::from_physical(grid, 0.0, |x, n| {
            let j = grid.transverse_index(n);
            bumps.iter().filter(|b| b.0 == j).map(|&(_, x0, w, amp)| amp * (-(x - x0).powi(2) / (w * w)).exp()).sum()
        });
        let fh = tr.to_fourier(&f).unwrap();
        let ratio = 2.0 * PI.sqrt() * ctx.z(&fh).unwrap() / ctx.s_norm(&fh, &tr).unwrap();
        worst = worst.max(ratio);
    }
    assert!(worst <= 1.0);
    assert!((worst - Z_OVER_S).abs() <= 1e-9 * Z_OVER_S);
}

#[test]
fn line_flow_and_dispersive_check() {
    let n = 1024;
    let l = 256.0;
    let fft = Radix2::new(n);
    let w = 10.0;
    let x = |j: usize| -l + j as f64 * 2.0 * l / n as f64;
    let f: Vec<Complex64> = (0..n).map(|j| c((-(x(j) / w).powi(2)).exp(), 0.0)).collect();
    for t in [1.0, 10.0, 100.0] {
        let u = line_flow(&f, l, t, &fft).unwrap();
        let d = c(w * w, 4.0 * t);
        for (j, v) in u.iter().enumerate() {
            let want = (c(w * w, 0.0) / d).sqrt() * (c(-x(j) * x(j), 0.0) / d).exp();
            assert!((v - want).norm() < 1e-10);
        }
        let chk = dispersive_check(&f, l, t, &fft).unwrap();
        assert!(chk.sup_error.is_finite() && chk.normalized > 0.0);
    }
    let wide: Vec<Complex64> = (0..n).map(|j| c((-(x(j) / 100.0).powi(2)).exp(), 0.0)).collect();
    assert!(matches!(dispersive_check(&wide, l, 1.0, &fft), Err(Error::WindowTooSmall { .. })));
    assert!(line_flow(&f[1..], l, 1.0, &fft).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]
    #[test]
    fn fourier_round_trip(seed in 0u64..1000) {
        let grid = WaveguideGrid::new(5.0, 32, 1, 8).unwrap();
        let tr = Transforms::new(grid, &Radix2Planner);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut f = WaveguideField::zeros(grid, Representation::Physical, 0.0);
        f.values.iter_mut().for_each(|v| *v = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let back = tr.to_physical(&tr.to_fourier(&f).unwrap()).unwrap();
        prop_assert!(max_diff(&f, &back) < 1e-13);
        let fh = tr.to_fourier(&f).unwrap();
        prop_assert!((fh.mass() - f.mass()).abs() <= 1e-12 * f.mass());
    }
}
