//! Scenarios on the frequency lattice: admissibility, clusters, resonant
//! sets and small divisors.

use std::path::Path;

use serde::Serialize;
use wglab_core::clusters::build_partition;
use wglab_core::lattice::{regularity_threshold, scan_admissibility, DispersionMatrix};
use wglab_core::resonance::{
    build_quasi_resonant_index, certified_tolerance, divisor_ledger as sweep_ledger, enumerate_resonant_set,
    LedgerConfig, QuasiResonantIndex,
};
use wglab_core::Mode;

use crate::config::ExperimentConfig;
use crate::error::LabResult;
use crate::formats::{write_csv, write_partition, Check, Summary};
use crate::plot::{scatter, LinePlot, Series};

#[derive(Serialize)]
struct AdmissibilityCsv {
    radius: u32,
    best_constant: f64,
    witness_a: String,
    witness_b: String,
}

pub fn admissibility_scan(cfg: &ExperimentConfig, out: &Path) -> LabResult<Summary> {
    let a = cfg.matrix()?;
    let rep = scan_admissibility(&a, cfg.radius)?;
    write_csv(
        &out.join("admissibility.csv"),
        rep.history.iter().map(|r| AdmissibilityCsv {
            radius: r.radius,
            best_constant: r.best_constant,
            witness_a: r.witness_a.to_string(),
            witness_b: r.witness_b.to_string(),
        }),
    )?;
    LinePlot::new("Diophantine constant", "radius", "min |aᵀAb|·|a|^τ|b|^τ")
        .log_log()
        .with(Series::new("best constant", rep.history.iter().map(|r| (r.radius as f64, r.best_constant)).collect()))
        .write(&out.join("admissibility.svg"))?;

    let mut s = Summary::new(&cfg.scenario);
    s.value("tau", rep.tau);
    s.push(Check::new("best_constant_positive", rep.best_constant, "> 0", rep.best_constant > 0.0));
    Ok(s)
}

#[derive(Serialize)]
struct ClusterCsv {
    cluster: usize,
    size: usize,
    min_norm: f64,
    max_norm: f64,
    weight: f64,
    interior: bool,
    dyadic: bool,
}

pub fn cluster_report(cfg: &ExperimentConfig, out: &Path) -> LabResult<Summary> {
    let a = cfg.matrix()?;
    let p = build_partition(&a, cfg.radius, cfg.c_d)?;
    let cert = p.certify();
    write_partition(&out.join("partition.csv"), &p)?;
    write_csv(
        &out.join("clusters.csv"),
        p.clusters().iter().enumerate().map(|(i, c)| ClusterCsv {
            cluster: i,
            size: c.members.len(),
            min_norm: c.min_norm,
            max_norm: c.max_norm,
            weight: c.weight,
            interior: c.interior,
            dyadic: c.dyadic,
        }),
    )?;
    if a.dim() == 2 {
        let pts: Vec<(f64, f64, usize)> = p
            .modes()
            .iter()
            .enumerate()
            .map(|(i, m)| (m.comps()[0] as f64, m.comps()[1] as f64, p.label(i)))
            .collect();
        std::fs::write(out.join("clusters.svg"), scatter("clusters", &pts))?;
    }

    let mut s = Summary::new(&cfg.scenario);
    s.value("clusters", p.clusters().len() as f64);
    s.value("interior_radius", p.interior_radius() as f64);
    s.value("max_cluster_size", p.clusters().iter().map(|c| c.members.len()).max().unwrap_or(0) as f64);
    s.value("origin_bound", p.origin_bound());
    s.value("checked_pairs", cert.checked_pairs as f64);
    let bad_dyadic = p.clusters().iter().filter(|c| c.interior && !c.dyadic).count();
    s.push(Check::at_most("interior_dyadic_violations", bad_dyadic as f64, 0.0));
    s.push(Check::new("separation", cert.violations.len() as f64, "0 violations", cert.separation));
    s.push(Check::new("certificate", cert.violations.len() as f64, "all certificates pass", cert.passed()));
    if cfg.compare_radius > cfg.radius {
        let larger = build_partition(&a, cfg.compare_radius, cfg.c_d)?;
        let st = p.stability_against(&larger);
        s.value("stability_compared", st.compared as f64);
        s.push(Check::at_most("stability_mismatches", st.mismatches.len() as f64, 0.0));
    }
    Ok(s)
}

#[derive(Serialize)]
struct CensusCsv {
    matrix: String,
    radius: u32,
    tolerance: f64,
    members: usize,
    nontrivial: usize,
    inexact: usize,
    trivial_only: bool,
}

#[derive(Serialize)]
struct QuadrupleCsv {
    matrix: String,
    n1: String,
    n2: String,
    n3: String,
    n: String,
    omega: f64,
}

#[derive(Serialize)]
struct TripleCsv {
    n: String,
    set: u8,
    n1: String,
    n2: String,
    n3: String,
    omega: f64,
}

fn is_square_control(a: &DispersionMatrix) -> bool {
    let d = a.dim();
    (0..d).all(|i| (0..d).all(|j| a.entry(i, j) == if i == j { 1.0 } else { 0.0 }))
}

pub fn resonance_census(cfg: &ExperimentConfig, out: &Path) -> LabResult<Summary> {
    let a = cfg.matrix()?;
    let d = a.dim();
    let tol = match cfg.resonance_tol {
        Some(t) => t,
        None => certified_tolerance(&a, cfg.radius)?,
    };
    let square = DispersionMatrix::identity(d, a.tau())?;
    let configured_is_square = is_square_control(&a);
    let mut runs = vec![("configured", a.clone(), tol)];
    if !configured_is_square {
        runs.push(("square", square, 1e-9));
    }

    let mut s = Summary::new(&cfg.scenario);
    let mut census = Vec::new();
    let mut listed = Vec::new();
    let witness = (Mode::unit(d, 0), Mode::zero(d), Mode::unit(d, 1));
    for (name, m, t) in &runs {
        let set = enumerate_resonant_set(m, cfg.radius, *t)?;
        census.push(CensusCsv {
            matrix: name.to_string(),
            radius: cfg.radius,
            tolerance: *t,
            members: set.len(),
            nontrivial: set.nontrivial_count(),
            inexact: set.inexact_count(),
            trivial_only: set.trivial_only(),
        });
        listed.extend(set.iter().filter(|q| !q.is_trivial()).take(cfg.max_rows).map(|q| QuadrupleCsv {
            matrix: name.to_string(),
            n1: q.n1.to_string(),
            n2: q.n2.to_string(),
            n3: q.n3.to_string(),
            n: q.n.to_string(),
            omega: q.omega,
        }));
        s.value(&format!("{name}_members"), set.len() as f64);
        let square_like = *name == "square" || configured_is_square;
        if square_like {
            let has = set.contains(&witness.0, &witness.1, &witness.2);
            s.push(Check::at_least(&format!("{name}_nontrivial"), set.nontrivial_count() as f64, 1.0));
            s.push(Check::new(&format!("{name}_rectangle_witness"), has as u8 as f64, "contained", has));
        } else {
            s.value("configured_tolerance", *t);
            s.push(Check::at_most("configured_nontrivial", set.nontrivial_count() as f64, 0.0));
        }
    }
    write_csv(&out.join("census.csv"), census)?;
    write_csv(&out.join("resonant_nontrivial.csv"), listed)?;

    let p = build_partition(&a, cfg.radius, cfg.c_d)?;
    let idx = build_quasi_resonant_index(&p, &a, cfg.theta, cfg.alpha0.unwrap_or_else(|| p.default_alpha0_constant()))?;
    write_csv(&out.join("quasi_resonant.csv"), lambda_rows(&idx).take(cfg.max_rows))?;
    let (first, third) = idx
        .outgoing()
        .iter()
        .fold((0, 0), |(f, t), n| (f + idx.first_set(n).len(), t + idx.third_set(n).len()));
    s.value("lambda_outgoing", idx.outgoing().len() as f64);
    s.value("lambda_first", first as f64);
    s.value("lambda_third", third as f64);
    s.push(Check::new("lambda_mirror", third as f64, format!("= {first}"), first == third));
    Ok(s)
}

fn lambda_rows(idx: &QuasiResonantIndex) -> impl Iterator<Item = TripleCsv> + '_ {
    idx.outgoing().iter().flat_map(move |n| {
        let row = move |set: u8, t: &wglab_core::resonance::Triple| TripleCsv {
            n: n.to_string(),
            set,
            n1: t.n1.to_string(),
            n2: t.n2.to_string(),
            n3: t.n3.to_string(),
            omega: t.omega,
        };
        idx.first_set(n).iter().map(move |t| row(1, t)).chain(idx.third_set(n).iter().map(move |t| row(3, t)))
    })
}

#[derive(Serialize)]
struct LedgerCsv {
    radius: u32,
    rank: usize,
    n1: String,
    n2: String,
    n3: String,
    n: String,
    omega: f64,
    weight: f64,
    ratio: f64,
}

#[derive(Serialize)]
struct LedgerSummaryCsv {
    radius: u32,
    exhaustive: bool,
    swept: u64,
    sampled: u64,
    max_ratio: f64,
}

pub fn divisor_ledger(cfg: &ExperimentConfig, out: &Path) -> LabResult<Summary> {
    let a = cfg.matrix()?;
    let lcfg = LedgerConfig {
        s: regularity_threshold(a.tau(), cfg.c_d, a.dim())?,
        small_radius: cfg.ledger_small_radius,
        samples: cfg.ledger_samples,
        seed: cfg.seed,
        exhaustive_budget: cfg.ledger_budget as u64,
        ..Default::default()
    };
    let mut rows = Vec::new();
    let mut totals = Vec::new();
    let mut s = Summary::new(&cfg.scenario);
    s.value("s", lcfg.s);
    for &r in &cfg.radii {
        let p = build_partition(&a, r, cfg.c_d)?;
        let idx = build_quasi_resonant_index(&p, &a, cfg.theta, cfg.alpha0.unwrap_or_else(|| p.default_alpha0_constant()))?;
        let led = sweep_ledger(&p, &idx, &lcfg)?;
        for (rank, e) in led.entries.iter().enumerate() {
            let q = &e.quadruple;
            rows.push(LedgerCsv {
                radius: r,
                rank,
                n1: q.n1.to_string(),
                n2: q.n2.to_string(),
                n3: q.n3.to_string(),
                n: q.n.to_string(),
                omega: q.omega,
                weight: e.weight,
                ratio: e.ratio,
            });
        }
        s.value(&format!("max_ratio_r{r}"), led.max_ratio);
        totals.push(LedgerSummaryCsv {
            radius: r,
            exhaustive: led.exhaustive,
            swept: led.swept,
            sampled: led.sampled,
            max_ratio: led.max_ratio,
        });
    }
    write_csv(&out.join("divisor_ledger.csv"), rows)?;
    LinePlot::new("small-divisor ratio", "radius", "max ratio")
        .log_log()
        .with(Series::new("max ratio", totals.iter().map(|t| (t.radius as f64, t.max_ratio)).collect()))
        .write(&out.join("divisor_ledger.svg"))?;
    let ratios: Vec<f64> = totals.iter().map(|t| t.max_ratio).filter(|r| *r > 0.0).collect();
    write_csv(&out.join("divisor_summary.csv"), totals)?;
    if ratios.len() >= 2 {
        let hi = ratios.iter().cloned().fold(f64::MIN, f64::max);
        let lo = ratios.iter().cloned().fold(f64::MAX, f64::min);
        s.push(Check::new("max_ratio_spread", hi / lo, "< 4", hi / lo < 4.0));
    }
    Ok(s)
}
