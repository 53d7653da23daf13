use std::collections::{BTreeSet, HashMap, VecDeque};

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wglab_core::clusters::{build_partition, cluster_norm_hs, ClusterMap, HighFrequencyThreshold};
use wglab_core::lattice::{eigenvalue, DispersionMatrix};
use wglab_core::{Complex64, Mode, ModeSet};

/// Connected components by breadth-first search over every pair of the
/// ball of radius `2 * radius`.
fn bfs_components(a: &DispersionMatrix, radius: u32, c: f64) -> Vec<BTreeSet<Vec<i32>>> {
    let big = ModeSet::ball(a.dim(), 2 * radius).unwrap();
    let pts: Vec<Mode> = big.iter().copied().collect();
    let lam: Vec<f64> = pts.iter().map(|m| eigenvalue(a, m).unwrap()).collect();
    let n = pts.len();
    let mut comp = vec![usize::MAX; n];
    let mut out = Vec::new();
    for s in 0..n {
        if comp[s] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut members = BTreeSet::new();
        let mut queue = VecDeque::from([s]);
        comp[s] = id;
        while let Some(i) = queue.pop_front() {
            members.insert(pts[i].comps().to_vec());
            for j in 0..n {
                if comp[j] != usize::MAX {
                    continue;
                }
                let gap = (pts[i] - pts[j]).norm() + (lam[i] - lam[j]).abs();
                if gap <= (pts[i].norm() + pts[j].norm()).powf(c) {
                    comp[j] = id;
                    queue.push_back(j);
                }
            }
        }
        out.push(members);
    }
    out
}

fn check_against_bfs(a: &DispersionMatrix, radius: u32, c: f64) {
    let p = build_partition(a, radius, c).unwrap();
    let comps = bfs_components(a, radius, c);
    let r2 = (radius * radius) as i64;
    let mut expected: BTreeSet<BTreeSet<Vec<i32>>> = BTreeSet::new();
    let mut closed: HashMap<Vec<i32>, bool> = HashMap::new();
    for comp in &comps {
        let inner: BTreeSet<Vec<i32>> =
            comp.iter().filter(|v| v.iter().map(|&x| x as i64 * x as i64).sum::<i64>() <= r2).cloned().collect();
        if inner.is_empty() {
            continue;
        }
        let whole = inner.len() == comp.len();
        for v in &inner {
            closed.insert(v.clone(), whole);
        }
        expected.insert(inner);
    }
    let got: BTreeSet<BTreeSet<Vec<i32>>> = p
        .clusters()
        .iter()
        .map(|cl| cl.members.iter().map(|m| m.comps().to_vec()).collect())
        .collect();
    assert_eq!(got, expected, "radius {radius}, c {c}");
    for cl in p.clusters() {
        if cl.interior {
            assert!(cl.members.iter().all(|m| closed[&m.comps().to_vec()]));
        }
    }
}

#[test]
fn partition_matches_breadth_first_components() {
    let golden = DispersionMatrix::golden();
    for r in [4, 8, 12] {
        check_against_bfs(&golden, r, 0.5);
    }
    check_against_bfs(&golden, 6, 0.6);
    let tilted = DispersionMatrix::new(2, &[1.0, 0.3, 0.3, 2.0], 3.0).unwrap();
    check_against_bfs(&tilted, 8, 0.5);
    let three = DispersionMatrix::new(3, &[1.0, 0.2, 0.1, 0.2, 1.3, 0.05, 0.1, 0.05, 1.7], 4.0).unwrap();
    check_against_bfs(&three, 3, 0.5);
}

#[test]
fn dense_branch_matches_breadth_first_components() {
    let golden = DispersionMatrix::golden();
    match build_partition(&golden, 3, 1.2) {
        Ok(_) => check_against_bfs(&golden, 3, 1.2),
        Err(e) => assert!(matches!(e, wglab_core::Error::DyadicityViolated { .. }), "{e}"),
    }
}

const FIXTURE_CLUSTERS: usize = 7289;
const FIXTURE_WEIGHT_SUM: f64 = 3.09747663885821472e5;
const FIXTURE_INTERIOR_RADIUS: u32 = 45;

#[test]
fn golden_fixture_partition() {
    let a = DispersionMatrix::golden();
    let p = build_partition(&a, 64, 0.5).unwrap();
    let cert = p.certify();
    assert!(cert.passed(), "{:?}", cert.violations);
    for c in p.clusters().iter().skip(1).filter(|c| c.interior) {
        assert!(c.max_norm <= 2.0 * c.min_norm);
    }
    let weight_sum: f64 = p.clusters().iter().map(|c| c.weight).sum();
    assert_eq!(p.clusters().len(), FIXTURE_CLUSTERS);
    assert!((weight_sum - FIXTURE_WEIGHT_SUM).abs() <= 1e-9 * FIXTURE_WEIGHT_SUM);
    assert_eq!(p.interior_radius(), FIXTURE_INTERIOR_RADIUS);
    let larger = build_partition(&a, 96, 0.5).unwrap();
    assert!(p.stability_against(&larger).mismatches.is_empty());
}

#[test]
fn high_frequency_threshold_examples() {
    let p = build_partition(&DispersionMatrix::golden(), 64, 0.5).unwrap();
    assert_eq!(p.high_frequency_threshold(1.0), HighFrequencyThreshold::Cluster(1));
    assert_eq!(p.high_frequency_threshold(1e10), HighFrequencyThreshold::BeyondTruncation);
    let scan = (1..p.clusters().len()).find(|&i| p.clusters()[i].weight >= 8.0).unwrap();
    assert_eq!(p.high_frequency_threshold(8.0), HighFrequencyThreshold::Cluster(scan));
    assert!(p.clusters()[scan - 1].weight < 8.0 || scan == 1);
}

#[test]
fn weights_are_non_decreasing_in_cluster_order() {
    let p = build_partition(&DispersionMatrix::golden(), 48, 0.5).unwrap();
    for w in p.clusters().windows(2).skip(1) {
        assert!(w[0].weight <= w[1].weight);
    }
    assert_eq!(p.clusters()[0].weight, 1.0);
}

#[test]
fn cluster_norm_examples() {
    let p = build_partition(&DispersionMatrix::golden(), 16, 0.5).unwrap();
    let modes = ModeSet::ball(2, 4).unwrap();
    let mut amps = vec![Complex64::new(0.0, 0.0); modes.len()];
    assert_eq!(cluster_norm_hs(&p, &modes, &amps, 3.0).unwrap(), 0.0);
    amps[0] = Complex64::new(0.0, 2.0);
    assert_eq!(cluster_norm_hs(&p, &modes, &amps, 3.0).unwrap(), 2.0);
    assert!(cluster_norm_hs(&p, &modes, &amps[1..], 3.0).is_err());
    let outside = ModeSet::ball(2, 17).unwrap();
    let big = vec![Complex64::new(1.0, 0.0); outside.len()];
    assert!(cluster_norm_hs(&p, &outside, &big, 3.0).is_err());
}

#[test]
fn cluster_norm_is_equivalent_to_sobolev_norm() {
    let p = build_partition(&DispersionMatrix::golden(), 64, 0.5).unwrap();
    let modes = ModeSet::ball(2, p.interior_radius()).unwrap();
    let map = ClusterMap::new(&p, &modes).unwrap();
    let origin_cap = p.origin_bound().max(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for s in [1.0, 2.5, 6.0] {
        for _ in 0..20 {
            let amps: Vec<Complex64> =
                modes.iter().map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
            let ours = cluster_norm_hs(&p, &modes, &amps, s).unwrap();
            let sobolev = modes
                .iter()
                .zip(&amps)
                .map(|(m, a)| m.norm().max(1.0).powf(2.0 * s) * a.norm_sqr())
                .sum::<f64>()
                .sqrt();
            let ratio = sobolev / ours;
            let top = 2f64.max(origin_cap).powf(s);
            assert!(ratio >= 1.0 - 1e-12 && ratio <= top * (1.0 + 1e-12), "s={s} ratio={ratio}");
            assert!((map.hs_norm(&amps, s) - ours).abs() <= 1e-12 * ours);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn super_actions_sum_to_mass(seed in 0u64..10_000) {
        let p = build_partition(&DispersionMatrix::golden(), 20, 0.5).unwrap();
        let modes = ModeSet::ball(2, 20).unwrap();
        let map = ClusterMap::new(&p, &modes).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let amps: Vec<Complex64> =
            modes.iter().map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let mass: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        let total: f64 = map.super_actions(&amps).iter().sum();
        prop_assert!((mass - total).abs() <= 1e-12 * mass);
        prop_assert_eq!(map.hs_norm(&amps, 0.0), mass.sqrt());
    }
}
