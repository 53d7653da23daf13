//! Partition of transverse frequencies into dyadic, well separated clusters
//! and the weighted norms built on it.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent float methods take over when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::lattice::DispersionMatrix;
use crate::mode::{join_modes, Mode, ModeSet};

/// One cluster of the partition.
#[derive(Clone, Debug, PartialEq)]
pub struct Cluster {
    /// Members in ball order (by norm, then lexicographic).
    pub members: Vec<Mode>,
    /// `K_α`: 1 for the cluster of the origin, the smallest member norm otherwise.
    pub weight: f64,
    pub min_norm: f64,
    pub max_norm: f64,
    /// The whole connected component lies inside the truncation ball and
    /// cannot connect to anything outside the enumeration ball.
    pub interior: bool,
    pub dyadic: bool,
}

/// Index of the first high-frequency cluster.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HighFrequencyThreshold {
    Cluster(usize),
    /// No cluster inside the truncation reaches the requested size.
    BeyondTruncation,
}

#[derive(Clone, Debug)]
pub struct ClusterPartition {
    matrix: DispersionMatrix,
    radius: u32,
    c_d: f64,
    modes: ModeSet,
    labels: Vec<usize>,
    clusters: Vec<Cluster>,
}

struct DisjointSets {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        DisjointSets { parent: (0..n as u32).collect(), size: vec![1; n] }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] as usize != x {
            let p = self.parent[x] as usize;
            self.parent[x] = self.parent[p];
            x = p;
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        if self.size[ra] < self.size[rb] {
            core::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra as u32;
        self.size[ra] += self.size[rb];
    }
}

/// Largest distance `δ` with `δ <= (2r + δ)^c`, valid for `0 < c < 1`.
///
/// Two modes with `|n| = r` can only be joined by an edge when their distance
/// is at most this value.
fn reach(r: f64, c: f64) -> f64 {
    let mut d = (2.0 * r).max(1.0).powf(c);
    for _ in 0..200 {
        let next = (2.0 * r + d).powf(c);
        if (next - d).abs() < 1e-12 {
            break;
        }
        d = next;
    }
    d + 1e-9
}

/// Whether a mode of norm `<= rmax` can have an edge to a mode of norm `> outer`.
fn may_escape(a: &DispersionMatrix, c: f64, rmax: f64, outer: f64) -> bool {
    if c < 1.0 {
        return rmax + reach(rmax, c) > outer;
    }
    // h(r) = (r - rmax) + λ_min r² - λ_max rmax² - (r + rmax)^c must stay
    // positive for r >= outer; convexity on that range makes three checks enough.
    let (lo, hi) = (a.min_eigenvalue(), a.max_eigenvalue());
    let r = outer;
    let h = (r - rmax) + lo * r * r - hi * rmax * rmax - (r + rmax).powf(c);
    let dh = 1.0 + 2.0 * lo * r - c * (r + rmax).powf(c - 1.0);
    let ddh = 2.0 * lo - c * (c - 1.0) * (r + rmax).powf(c - 2.0);
    !(h > 0.0 && dh > 0.0 && ddh > 0.0)
}

#[inline]
fn edge(c: f64, m: &Mode, n: &Mode, lm: f64, ln: f64) -> bool {
    (*m - *n).norm() + (lm - ln).abs() <= (m.norm() + n.norm()).powf(c)
}

/// Builds the cluster partition of the ball `|n| <= radius`.
///
/// Modes are joined when `|m − n| + |λ_m² − λ_n²| <= (|m| + |n|)^{c_d}`; the
/// connected components of that graph, enumerated on the ball of radius
/// `2·radius`, are the clusters. Components that provably close up inside
/// the enumeration ball are marked interior and must be dyadic
/// (`max |n| <= 2 min |n|`), otherwise the construction fails.
pub fn build_partition(a: &DispersionMatrix, radius: u32, c_d: f64) -> Result<ClusterPartition> {
    if radius == 0 {
        return Err(Error::param("radius", "must be at least 1"));
    }
    if !(c_d > 0.0 && c_d <= 2.0) {
        return Err(Error::param("c_d", "must lie in (0, 2]"));
    }
    let dim = a.dim();
    let big = ModeSet::ball(dim, 2 * radius)?;
    let lam: Vec<f64> = big.iter().map(|m| a.quad(m)).collect();
    let mut sets = DisjointSets::new(big.len());

    if c_d < 1.0 {
        let max_reach = reach(2.0 * radius as f64, c_d);
        let offsets = ModeSet::ball(dim, max_reach.ceil() as u32)?;
        for (i, n) in big.iter().enumerate() {
            let rho = reach(n.norm(), c_d);
            let rho_sq = rho * rho;
            for off in offsets.iter().skip(1) {
                if off.norm_sq() as f64 > rho_sq {
                    break;
                }
                let m = *n + *off;
                if let Some(j) = big.index_of(&m) {
                    if j > i && edge(c_d, &m, n, lam[j], lam[i]) {
                        sets.union(i, j);
                    }
                }
            }
        }
    } else {
        for i in 0..big.len() {
            for j in i + 1..big.len() {
                if edge(c_d, &big.get(i), &big.get(j), lam[i], lam[j]) {
                    sets.union(i, j);
                }
            }
        }
    }

    let modes = ModeSet::ball(dim, radius)?;
    let inner = modes.len();
    let outer = 2.0 * radius as f64;
    // roots that reach outside the truncation ball
    let mut leaks = vec![false; big.len()];
    for j in inner..big.len() {
        let r = sets.find(j);
        leaks[r] = true;
    }
    let mut root_to_cluster = vec![usize::MAX; big.len()];
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut roots = Vec::new();
    for i in 0..inner {
        let r = sets.find(i);
        if root_to_cluster[r] == usize::MAX {
            root_to_cluster[r] = groups.len();
            groups.push(Vec::new());
            roots.push(r);
        }
        groups[root_to_cluster[r]].push(i);
    }

    let origin_group = root_to_cluster[sets.find(0)];
    // the origin is index 0 of the ball, so its group is created first
    debug_assert_eq!(origin_group, 0);

    let mut clusters = Vec::with_capacity(groups.len());
    let mut labels = vec![0usize; inner];
    for (g, idx) in groups.iter().enumerate() {
        let members: Vec<Mode> = idx.iter().map(|&i| modes.get(i)).collect();
        let min_norm = members[0].norm();
        let max_norm = members.last().unwrap().norm();
        let interior = !leaks[roots[g]] && !may_escape(a, c_d, max_norm, outer);
        let dyadic = g == 0 || max_norm <= 2.0 * min_norm;
        if interior && !dyadic {
            return Err(Error::DyadicityViolated {
                min_norm,
                max_norm,
                members: join_modes(&members, 24),
            });
        }
        let weight = if g == 0 { 1.0 } else { min_norm };
        for &i in idx {
            labels[i] = g;
        }
        clusters.push(Cluster { members, weight, min_norm, max_norm, interior, dyadic });
    }

    Ok(ClusterPartition { matrix: a.clone(), radius, c_d, modes, labels, clusters })
}

/// Outcome of [`ClusterPartition::certify`].
#[derive(Clone, Debug, PartialEq)]
pub struct CertificateReport {
    pub partition: bool,
    pub origin: bool,
    pub dyadic: bool,
    pub separation: bool,
    pub checked_pairs: u64,
    pub violations: Vec<String>,
}

impl CertificateReport {
    pub fn passed(&self) -> bool {
        self.partition && self.origin && self.dyadic && self.separation
    }
}

/// Outcome of [`ClusterPartition::stability_against`].
#[derive(Clone, Debug, PartialEq)]
pub struct StabilityReport {
    pub compared: usize,
    pub mismatches: Vec<String>,
}

impl ClusterPartition {
    /// Rebuilds a partition from stored labels and interior flags.
    ///
    /// Labels must cover the ball of `radius` exactly and cluster 0 must
    /// contain the origin; weights and dyadicity are recomputed.
    pub fn from_labels(
        a: &DispersionMatrix,
        radius: u32,
        c_d: f64,
        rows: &[(Mode, usize, bool)],
    ) -> Result<Self> {
        let modes = ModeSet::ball(a.dim(), radius)?;
        if rows.len() != modes.len() {
            return Err(Error::param("labels", format!("expected {} rows, got {}", modes.len(), rows.len())));
        }
        let count = rows.iter().map(|r| r.1).max().map_or(0, |m| m + 1);
        let mut labels = vec![usize::MAX; modes.len()];
        let mut interior = vec![None; count];
        for &(m, label, int) in rows {
            let i = modes.index_of(&m).ok_or_else(|| Error::ModeNotCovered(format!("{m}")))?;
            if labels[i] != usize::MAX {
                return Err(Error::param("labels", format!("mode {m} listed twice")));
            }
            labels[i] = label;
            match interior[label] {
                None => interior[label] = Some(int),
                Some(prev) if prev != int => {
                    return Err(Error::param("labels", format!("cluster {label} has mixed interior flags")))
                }
                _ => {}
            }
        }
        if labels[0] != 0 {
            return Err(Error::param("labels", "cluster 0 must contain the origin"));
        }
        let mut members: Vec<Vec<Mode>> = vec![Vec::new(); count];
        for (i, &l) in labels.iter().enumerate() {
            members[l].push(modes.get(i));
        }
        let mut clusters = Vec::with_capacity(count);
        for (g, mem) in members.into_iter().enumerate() {
            if mem.is_empty() {
                return Err(Error::param("labels", format!("cluster {g} is empty")));
            }
            let min_norm = mem[0].norm();
            let max_norm = mem.last().unwrap().norm();
            clusters.push(Cluster {
                weight: if g == 0 { 1.0 } else { min_norm },
                dyadic: g == 0 || max_norm <= 2.0 * min_norm,
                interior: interior[g].unwrap_or(false),
                min_norm,
                max_norm,
                members: mem,
            });
        }
        Ok(ClusterPartition { matrix: a.clone(), radius, c_d, modes, labels, clusters })
    }

    pub fn matrix(&self) -> &DispersionMatrix {
        &self.matrix
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn c_d(&self) -> f64 {
        self.c_d
    }

    pub fn modes(&self) -> &ModeSet {
        &self.modes
    }

    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    pub fn label(&self, index: usize) -> usize {
        self.labels[index]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn cluster_of(&self, m: &Mode) -> Option<usize> {
        self.modes.index_of(m).map(|i| self.labels[i])
    }

    /// `K_α` of the cluster containing `m`.
    pub fn weight_of(&self, m: &Mode) -> Option<f64> {
        self.cluster_of(m).map(|c| self.clusters[c].weight)
    }

    /// Radius of the cluster of the origin.
    pub fn origin_bound(&self) -> f64 {
        self.clusters[0].max_norm
    }

    /// Largest integer radius whose ball is covered by interior clusters.
    pub fn interior_radius(&self) -> u32 {
        let worst = self
            .modes
            .iter()
            .zip(&self.labels)
            .filter(|(_, &l)| !self.clusters[l].interior)
            .map(|(m, _)| m.norm_sq())
            .min();
        match worst {
            None => self.radius,
            Some(q) => {
                let mut r = (q as f64).sqrt() as i64;
                while r * r >= q {
                    r -= 1;
                }
                r.max(0) as u32
            }
        }
    }

    /// Default size above which clusters count as high frequency.
    pub fn default_alpha0_constant(&self) -> f64 {
        (2.0 * self.origin_bound()).max(16.0)
    }

    /// `α₀ = min{α >= 1 : K_α >= constant}`.
    pub fn high_frequency_threshold(&self, constant: f64) -> HighFrequencyThreshold {
        self.clusters
            .iter()
            .enumerate()
            .skip(1)
            .find(|(_, c)| c.weight >= constant)
            .map_or(HighFrequencyThreshold::BeyondTruncation, |(i, _)| HighFrequencyThreshold::Cluster(i))
    }

    /// Exhaustive check of the cluster properties on the truncation ball.
    ///
    /// Separation is verified by brute force over every pair of modes in
    /// distinct clusters.
    pub fn certify(&self) -> CertificateReport {
        let mut violations = Vec::new();
        let mut seen = vec![0u32; self.modes.len()];
        for c in &self.clusters {
            for m in &c.members {
                match self.modes.index_of(m) {
                    Some(i) => seen[i] += 1,
                    None => violations.push(format!("member {m} outside the ball")),
                }
            }
        }
        let partition = seen.iter().all(|&s| s == 1) && violations.is_empty();
        if !partition {
            violations.push(String::from("clusters do not cover the ball exactly once"));
        }
        let origin = self.labels[0] == 0 && self.clusters[0].members.contains(&Mode::zero(self.modes.dim()));
        if !origin {
            violations.push(String::from("cluster 0 does not contain the origin"));
        }
        let mut dyadic = true;
        for (g, c) in self.clusters.iter().enumerate().skip(1) {
            if c.interior && c.max_norm > 2.0 * c.min_norm {
                dyadic = false;
                violations.push(format!("cluster {g} is not dyadic: {}", join_modes(&c.members, 8)));
            }
        }

        let lam: Vec<f64> = self.modes.iter().map(|m| self.matrix.quad(m)).collect();
        let norms: Vec<f64> = self.modes.iter().map(|m| m.norm()).collect();
        let cap = (2.0 * self.radius as f64).powf(self.c_d);
        let mut separation = true;
        let mut checked = 0u64;
        for i in 0..self.modes.len() {
            let (mi, li) = (self.modes.get(i), self.labels[i]);
            for j in i + 1..self.modes.len() {
                if self.labels[j] == li {
                    continue;
                }
                checked += 1;
                let gap = (mi - self.modes.get(j)).norm() + (lam[i] - lam[j]).abs();
                if gap > cap {
                    continue;
                }
                if gap <= (norms[i] + norms[j]).powf(self.c_d) {
                    separation = false;
                    if violations.len() < 32 {
                        violations.push(format!("modes {mi} and {} are not separated", self.modes.get(j)));
                    }
                }
            }
        }
        CertificateReport { partition, origin, dyadic, separation, checked_pairs: checked, violations }
    }

    /// Compares interior clusters with those of a partition of a larger ball.
    pub fn stability_against(&self, larger: &ClusterPartition) -> StabilityReport {
        let mut mismatches = Vec::new();
        let mut compared = 0;
        for (g, c) in self.clusters.iter().enumerate() {
            if !c.interior {
                continue;
            }
            compared += 1;
            let other = larger.cluster_of(&c.members[0]).map(|l| &larger.clusters[l]);
            match other {
                Some(o) if o.members == c.members && o.interior => {}
                _ => mismatches.push(format!("cluster {g} ({}) changed", join_modes(&c.members, 6))),
            }
        }
        StabilityReport { compared, mismatches }
    }
}

/// Cluster labels and weights attached to an arbitrary set of modes.
#[derive(Clone, Debug)]
pub struct ClusterMap {
    labels: Vec<usize>,
    weights: Vec<f64>,
    cluster_count: usize,
}

impl ClusterMap {
    pub fn new(p: &ClusterPartition, modes: &ModeSet) -> Result<Self> {
        let mut labels = Vec::with_capacity(modes.len());
        let mut weights = Vec::with_capacity(modes.len());
        for m in modes.iter() {
            let l = p.cluster_of(m).ok_or_else(|| Error::ModeNotCovered(format!("{m}")))?;
            labels.push(l);
            weights.push(p.clusters[l].weight);
        }
        Ok(ClusterMap { labels, weights, cluster_count: p.clusters.len() })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn cluster_count(&self) -> usize {
        self.cluster_count
    }

    /// `(K_α)^s` per mode.
    pub fn hs_weights(&self, s: f64) -> Vec<f64> {
        self.weights.iter().map(|w| w.powf(s)).collect()
    }

    /// Super-actions `Σ_{n ∈ C_α} |a_n|²` for every cluster of the partition.
    pub fn super_actions(&self, amps: &[crate::Complex64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cluster_count];
        for (a, &l) in amps.iter().zip(&self.labels) {
            out[l] += a.norm_sqr();
        }
        out
    }

    /// `‖a‖_{h^s} = (Σ_α K_α^{2s} ‖π_α a‖²)^{1/2}`.
    pub fn hs_norm(&self, amps: &[crate::Complex64], s: f64) -> f64 {
        amps.iter()
            .zip(&self.weights)
            .map(|(a, w)| w.powf(2.0 * s) * a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// `‖a‖_{h^s}` of amplitudes indexed by `modes`.
pub fn cluster_norm_hs(p: &ClusterPartition, modes: &ModeSet, amps: &[crate::Complex64], s: f64) -> Result<f64> {
    if amps.len() != modes.len() {
        return Err(Error::DimensionMismatch { expected: modes.len(), got: amps.len() });
    }
    Ok(ClusterMap::new(p, modes)?.hs_norm(amps, s))
}
