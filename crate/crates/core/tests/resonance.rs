use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wglab_core::clusters::{build_partition, ClusterPartition, HighFrequencyThreshold};
use wglab_core::lattice::{regularity_threshold, DispersionMatrix, Quadruple};
use wglab_core::resonance::{
    build_quasi_resonant_index, certified_tolerance, divisor_ledger, enumerate_resonant_set, normal_form_weight,
    resonant_sum_identity_check, LedgerConfig, QuasiResonantIndex,
};
use wglab_core::{Complex64, Error, Mode, ModeSet};

fn m(c: &[i32]) -> Mode {
    Mode::new(c).unwrap()
}

fn quad(a: &DispersionMatrix, n: &Mode) -> f64 {
    let c = n.comps();
    let mut s = 0.0;
    for i in 0..a.dim() {
        for j in 0..a.dim() {
            s += a.entry(i, j) * c[i] as f64 * c[j] as f64;
        }
    }
    s
}

type Key = (Vec<i32>, Vec<i32>, Vec<i32>);

fn key(n1: &Mode, n2: &Mode, n3: &Mode) -> Key {
    (n1.comps().to_vec(), n2.comps().to_vec(), n3.comps().to_vec())
}

/// Every triple of the ball, with the outgoing mode required to lie in it.
fn naive_resonant(a: &DispersionMatrix, radius: u32, tol: f64) -> BTreeSet<Key> {
    let ball = ModeSet::ball(a.dim(), radius).unwrap();
    let mut out = BTreeSet::new();
    for n1 in ball.iter() {
        for n2 in ball.iter() {
            for n3 in ball.iter() {
                let n = *n1 - *n2 + *n3;
                if !ball.contains(&n) {
                    continue;
                }
                let omega = quad(a, n1) - quad(a, n2) + quad(a, n3) - quad(a, &n);
                if omega.abs() <= tol {
                    out.insert(key(n1, n2, n3));
                }
            }
        }
    }
    out
}

#[test]
fn resonant_set_matches_naive_enumeration() {
    let id = DispersionMatrix::identity(2, 1.0).unwrap();
    let tilted = DispersionMatrix::new(2, &[1.0, 0.3, 0.3, 2.0], 3.0).unwrap();
    let cases = [(id, 3u32), (DispersionMatrix::golden(), 4), (tilted, 4)];
    for (a, r) in cases {
        let set = enumerate_resonant_set(&a, r, 1e-9).unwrap();
        let got: BTreeSet<Key> = set.iter().map(|q| key(&q.n1, &q.n2, &q.n3)).collect();
        assert_eq!(got.len(), set.len());
        assert_eq!(got, naive_resonant(&a, r, 1e-9));
        for q in set.iter() {
            assert!(q.is_zero_momentum() && q.omega.abs() <= 1e-9);
        }
    }
}

#[test]
fn square_torus_has_rectangles() {
    let id = DispersionMatrix::identity(2, 1.0).unwrap();
    let set = enumerate_resonant_set(&id, 2, 1e-9).unwrap();
    assert!(set.contains(&m(&[1, 0]), &m(&[0, 0]), &m(&[0, 1])));
    assert!(!set.trivial_only());
}

#[test]
fn pairings_are_always_members() {
    let a = DispersionMatrix::golden();
    let set = enumerate_resonant_set(&a, 6, 0.0).unwrap();
    let ball = ModeSet::ball(2, 6).unwrap();
    for x in ball.iter() {
        for y in ball.iter() {
            assert!(set.contains(x, x, y));
            assert!(set.contains(x, y, y));
        }
    }
    // each pairing counted once, the all-equal ones shared
    let mlen = ball.len();
    assert_eq!(set.len(), 2 * mlen * mlen - mlen);
}

#[test]
fn admissible_matrix_has_only_pairings() {
    let a = DispersionMatrix::golden();
    let tol = certified_tolerance(&a, 12).unwrap();
    assert!(tol > 0.0);
    let set = enumerate_resonant_set(&a, 12, tol).unwrap();
    assert!(set.trivial_only());
    assert_eq!(set.inexact_count(), 0);
    for q in set.iter() {
        assert!(q.is_trivial(), "{q:?}");
    }
}

#[test]
fn identity_check_examples() {
    let a = DispersionMatrix::golden();
    let set = enumerate_resonant_set(&a, 10, 1e-9).unwrap();
    let n = set.modes().len();
    let mut amps = vec![Complex64::new(0.0, 0.0); n];
    amps[5] = Complex64::new(1.0, 0.0);
    assert_eq!(resonant_sum_identity_check(&set, &amps).unwrap(), (1.0, 1.0));
    amps[17] = Complex64::new(0.0, 1.0);
    let (lhs, rhs) = resonant_sum_identity_check(&set, &amps).unwrap();
    assert_eq!(rhs, 6.0);
    assert!((lhs - 6.0).abs() < 1e-14);

    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..10 {
        let amps: Vec<Complex64> =
            (0..n).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let (lhs, rhs) = resonant_sum_identity_check(&set, &amps).unwrap();
        // pairing double sum: n₁ = n₂ or n₁ = n, the diagonal counted once
        let mass: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        let diag: f64 = amps.iter().map(|a| a.norm_sqr().powi(2)).sum();
        let mut double = 0.0;
        for x in &amps {
            for y in &amps {
                double += 2.0 * x.norm_sqr() * y.norm_sqr();
            }
        }
        assert!((double - diag - (2.0 * mass * mass - diag)).abs() <= 1e-12 * double);
        assert!((lhs - rhs).abs() <= 1e-12 * rhs);
    }
    assert!(resonant_sum_identity_check(&set, &amps[1..]).is_err());
}

#[test]
fn identity_check_rejects_nontrivial_sets() {
    let id = DispersionMatrix::identity(2, 1.0).unwrap();
    let set = enumerate_resonant_set(&id, 2, 1e-9).unwrap();
    let amps = vec![Complex64::new(1.0, 0.0); set.modes().len()];
    assert!(matches!(resonant_sum_identity_check(&set, &amps), Err(Error::NonTrivialResonantSet(_))));
}

/// `|v| < K/5` in integer arithmetic, `K²` being the squared norm of the
/// smallest member of the cluster.
fn below_fifth(v: &Mode, k_sq: i64) -> bool {
    25 * v.norm_sq() < k_sq
}

fn weight_sq(p: &ClusterPartition, alpha: usize) -> i64 {
    p.clusters()[alpha].members[0].norm_sq()
}

/// Both sets of one outgoing mode for `θ = 1/5`, scanned over pairs of
/// small modes.
fn scan_sets(p: &ClusterPartition, a: &DispersionMatrix, n: &Mode) -> (BTreeSet<Key>, BTreeSet<Key>) {
    let alpha = p.cluster_of(n).unwrap();
    let k_sq = weight_sq(p, alpha);
    let c = (k_sq as f64).sqrt() as i32 / 5 + 1;
    let mut small = Vec::new();
    for x in -c..=c {
        for y in -c..=c {
            let v = m(&[x, y]);
            if below_fifth(&v, k_sq) {
                small.push(v);
            }
        }
    }
    let omega = |n1: &Mode, n2: &Mode, n3: &Mode| quad(a, n1) - quad(a, n2) + quad(a, n3) - quad(a, n);
    let (mut first, mut third) = (BTreeSet::new(), BTreeSet::new());
    for u in &small {
        for v in &small {
            let big = *n + *u - *v;
            if p.cluster_of(&big) == Some(alpha) {
                if omega(&big, u, v).abs() < 1.0 {
                    first.insert(key(&big, u, v));
                }
                if omega(v, u, &big).abs() < 1.0 {
                    third.insert(key(v, u, &big));
                }
            }
        }
    }
    (first, third)
}

fn check_index(p: &ClusterPartition, a: &DispersionMatrix, idx: &QuasiResonantIndex, stride: usize) {
    assert_eq!(idx.theta(), 0.2);
    let HighFrequencyThreshold::Cluster(start) = idx.threshold() else { panic!("no high clusters") };
    let expected: usize = p.clusters()[start..].iter().map(|c| c.members.len()).sum();
    assert_eq!(idx.outgoing().len(), expected);
    for (k, n) in idx.outgoing().iter().enumerate() {
        let alpha = p.cluster_of(n).unwrap();
        let k_sq = weight_sq(p, alpha);
        for t in idx.first_set(n) {
            assert_eq!(t.n1 - t.n2 + t.n3, *n);
            assert_eq!(p.cluster_of(&t.n1), Some(alpha));
            assert!(below_fifth(&t.n2, k_sq) && below_fifth(&t.n3, k_sq) && t.omega.abs() < 1.0, "{n} {t:?}");
        }
        if k % stride != 0 {
            continue;
        }
        let (first, third) = scan_sets(p, a, n);
        let got1: BTreeSet<Key> = idx.first_set(n).iter().map(|t| key(&t.n1, &t.n2, &t.n3)).collect();
        let got3: BTreeSet<Key> = idx.third_set(n).iter().map(|t| key(&t.n1, &t.n2, &t.n3)).collect();
        assert_eq!(got1, first, "first set of {n}");
        assert_eq!(got3, third, "third set of {n}");
    }
}

#[test]
fn index_matches_scan_over_small_pairs() {
    let a = DispersionMatrix::golden();
    let p = build_partition(&a, 32, 0.5).unwrap();
    let idx = build_quasi_resonant_index(&p, &a, 0.2, p.default_alpha0_constant()).unwrap();
    check_index(&p, &a, &idx, 1);
}

const FIXTURE_R64: (usize, usize) = (11968, 3220592);

#[test]
fn golden_index_fixture() {
    let a = DispersionMatrix::golden();
    let p = build_partition(&a, 64, 0.5).unwrap();
    let idx = build_quasi_resonant_index(&p, &a, 0.2, p.default_alpha0_constant()).unwrap();
    check_index(&p, &a, &idx, 13);
    assert_eq!((idx.outgoing().len(), idx.total_first()), FIXTURE_R64);
}

#[test]
fn index_sets_mirror_each_other() {
    let a = DispersionMatrix::golden();
    let p = build_partition(&a, 40, 0.5).unwrap();
    let idx = build_quasi_resonant_index(&p, &a, 0.2, 16.0).unwrap();
    for n in idx.outgoing().iter() {
        let first: BTreeSet<Key> = idx.first_set(n).iter().map(|t| key(&t.n3, &t.n2, &t.n1)).collect();
        let third: BTreeSet<Key> = idx.third_set(n).iter().map(|t| key(&t.n1, &t.n2, &t.n3)).collect();
        assert_eq!(first, third);
        for t in idx.first_set(n) {
            assert!(idx.contains(&p, n, &t.n1, &t.n2, &t.n3, t.omega));
        }
    }
}

#[test]
fn diagonal_triples_always_qualify() {
    let a = DispersionMatrix::golden();
    let p = build_partition(&a, 32, 0.5).unwrap();
    let idx = build_quasi_resonant_index(&p, &a, 0.2, 16.0).unwrap();
    assert!(!idx.is_empty());
    for n in idx.outgoing().iter() {
        let k_sq = weight_sq(&p, p.cluster_of(n).unwrap());
        let set = idx.first_set(n);
        for u in ModeSet::ball(2, 8).unwrap().iter().filter(|u| below_fifth(u, k_sq)) {
            let t = set.iter().find(|t| t.n1 == *n && t.n2 == *u && t.n3 == *u).expect("diagonal triple");
            assert_eq!(t.omega, 0.0);
        }
    }
}

#[test]
fn tiny_theta_leaves_only_the_origin_triple() {
    let a = DispersionMatrix::golden();
    let p = build_partition(&a, 32, 0.5).unwrap();
    let idx = build_quasi_resonant_index(&p, &a, 0.01, 16.0).unwrap();
    assert!(!idx.is_empty());
    let zero = Mode::zero(2);
    for n in idx.outgoing().iter() {
        let (first, third) = (idx.first_set(n), idx.third_set(n));
        assert_eq!((first.len(), third.len()), (1, 1));
        assert_eq!((first[0].n1, first[0].n2, first[0].n3), (*n, zero, zero));
        assert_eq!((third[0].n1, third[0].n2, third[0].n3), (zero, zero, *n));
    }
    assert!(build_quasi_resonant_index(&p, &a, 1.5, 16.0).is_err());
    let other = DispersionMatrix::identity(2, 3.0).unwrap();
    assert!(build_quasi_resonant_index(&p, &other, 0.2, 16.0).is_err());
}

#[test]
fn low_threshold_constant_above_truncation_gives_empty_index() {
    let a = DispersionMatrix::golden();
    let p = build_partition(&a, 16, 0.5).unwrap();
    let idx = build_quasi_resonant_index(&p, &a, 0.2, 1e6).unwrap();
    assert!(idx.is_empty());
    assert_eq!(idx.threshold(), HighFrequencyThreshold::BeyondTruncation);
}

#[test]
fn normal_form_weight_examples() {
    let a = DispersionMatrix::golden();
    let p = build_partition(&a, 16, 0.5).unwrap();
    let idx = build_quasi_resonant_index(&p, &a, 0.2, 8.0).unwrap();
    let id = DispersionMatrix::identity(2, 1.0).unwrap();
    // Ω = 4 − 1 + 0 − 1 on the square torus; membership is decided by modes only
    let q = Quadruple::from_triple(&id, m(&[2, 0]), m(&[1, 0]), m(&[0, 0])).unwrap();
    assert_eq!(q.omega, 2.0);
    assert_eq!(normal_form_weight(&p, &idx, &q, 1e-9).unwrap(), 0.5);

    let pairing = Quadruple::from_triple(&a, m(&[3, 1]), m(&[3, 1]), m(&[0, 2])).unwrap();
    assert!(matches!(normal_form_weight(&p, &idx, &pairing, 1e-9), Err(Error::ZeroDivisor(_))));

    let n = *idx.outgoing().iter().next().unwrap();
    let t = idx.first_set(&n).iter().find(|t| t.omega != 0.0).copied();
    if let Some(t) = t {
        let q = Quadruple::from_triple(&a, t.n1, t.n2, t.n3).unwrap();
        assert!(matches!(normal_form_weight(&p, &idx, &q, 1e-9), Err(Error::QuasiResonantTriple)));
    }
    let bad = Quadruple::new(&a, m(&[1, 0]), m(&[0, 0]), m(&[0, 1]), m(&[2, 2])).unwrap();
    assert!(normal_form_weight(&p, &idx, &bad, 1e-9).is_err());

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..200 {
        let c: Vec<i32> = (0..6).map(|_| rng.random_range(-5..=5)).collect();
        let q = Quadruple::from_triple(&a, m(&c[0..2]), m(&c[2..4]), m(&c[4..6])).unwrap();
        if let Ok(w) = normal_form_weight(&p, &idx, &q, 1e-9) {
            assert!((w * q.omega - 1.0).abs() < 1e-15);
        }
    }
}

const LEDGER_R32: f64 = 0.9714237678692831;

fn ledger_at(radius: u32, seed: u64) -> wglab_core::resonance::DivisorLedger {
    let a = DispersionMatrix::golden();
    let p = build_partition(&a, radius, 0.5).unwrap();
    let idx = build_quasi_resonant_index(&p, &a, 0.2, p.default_alpha0_constant()).unwrap();
    let s = regularity_threshold(a.tau(), 0.5, 2).unwrap();
    divisor_ledger(&p, &idx, &LedgerConfig { s, seed, ..Default::default() }).unwrap()
}

#[test]
fn ledger_fixture_and_determinism() {
    let led = ledger_at(32, 7);
    assert_eq!(led.s, 25.0);
    assert_eq!(led.exponent, 24.0);
    assert!(led.max_ratio.is_finite());
    assert!((led.max_ratio - LEDGER_R32).abs() <= 1e-12 * LEDGER_R32);
    assert_eq!(led, ledger_at(32, 7));
    let e = led.argmax.as_ref().unwrap();
    assert_eq!(e.ratio, led.max_ratio);
    assert!(e.quadruple.is_zero_momentum() && e.quadruple.omega != 0.0);
}

#[test]
fn ledger_entries_obey_admission_rules_and_easy_bound() {
    let a = DispersionMatrix::golden();
    let p = build_partition(&a, 32, 0.5).unwrap();
    let idx = build_quasi_resonant_index(&p, &a, 0.2, p.default_alpha0_constant()).unwrap();
    let led = ledger_at(32, 3);
    assert!(led.sampled > 0 && led.swept > 0);
    let bound = 3f64.powf(led.s);
    for e in &led.entries {
        let q = &e.quadruple;
        assert!(q.is_zero_momentum() && q.omega != 0.0 && idx.is_high(&q.n));
        assert!(!idx.contains(&p, &q.n, &q.n1, &q.n2, &q.n3, q.omega));
        let sizes = q.incoming_sizes_desc();
        let direct = e.weight.powf(led.s)
            / q.omega.abs()
            / (sizes[0].max(1.0).powf(led.s) * sizes[1].max(1.0).powf(led.exponent));
        assert!((direct - e.ratio).abs() <= 1e-9 * direct);
        if q.omega.abs() >= 1.0 && e.weight <= 3.0 * sizes[0] {
            assert!(e.ratio <= bound);
        }
    }
}

#[test]
fn exhaustive_ledger_agrees_with_stratified_at_small_radius() {
    let a = DispersionMatrix::golden();
    let p = build_partition(&a, 12, 0.5).unwrap();
    let idx = build_quasi_resonant_index(&p, &a, 0.2, 8.0).unwrap();
    let cfg = LedgerConfig { s: 25.0, ..Default::default() };
    let full = divisor_ledger(&p, &idx, &cfg).unwrap();
    assert!(full.exhaustive);
    let strat = divisor_ledger(&p, &idx, &LedgerConfig { exhaustive_budget: 0, ..cfg }).unwrap();
    assert!(!strat.exhaustive);
    assert_eq!(full.max_ratio, strat.max_ratio);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn resonant_members_are_zero_momentum(r in 1u32..=3, seed in 0u64..100) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = DispersionMatrix::random(2, 2.0, 0.5, &mut rng).unwrap();
        let set = enumerate_resonant_set(&a, r, 1e-9).unwrap();
        for q in set.iter() {
            prop_assert!(q.is_zero_momentum());
            prop_assert!(q.omega.abs() <= 1e-9);
        }
        prop_assert!(set.len() >= 2 * set.modes().len().pow(2) - set.modes().len());
    }
}
