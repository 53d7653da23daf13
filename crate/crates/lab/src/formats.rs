//! On-disk formats: run summaries, CSV tables, the partition artifact,
//! binary field snapshots and fixtures.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use wglab_core::clusters::ClusterPartition;
use wglab_core::waveguide::{Representation, WaveguideField, WaveguideGrid};
use wglab_core::{Complex64, Mode};

use crate::config::{format_matrix, parse_matrix};
use crate::error::{LabError, LabResult};

/// One acceptance check of a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub id: String,
    /// `None` when the quantity is undefined (written as `null`).
    pub measured: Option<f64>,
    pub bound: String,
    pub pass: bool,
}

impl Check {
    pub fn new(id: &str, measured: f64, bound: impl Into<String>, pass: bool) -> Self {
        Check { id: id.into(), measured: measured.is_finite().then_some(measured), bound: bound.into(), pass }
    }

    pub fn at_most(id: &str, measured: f64, bound: f64) -> Self {
        Self::new(id, measured, format!("<= {bound:e}"), measured <= bound)
    }

    pub fn at_least(id: &str, measured: f64, bound: f64) -> Self {
        Self::new(id, measured, format!(">= {bound:e}"), measured >= bound)
    }

    pub fn within(id: &str, measured: f64, lo: f64, hi: f64) -> Self {
        Self::new(id, measured, format!("in [{lo}, {hi}]"), measured >= lo && measured <= hi)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub scenario: String,
    pub checks: Vec<Check>,
    pub all_pass: bool,
    /// Scalar results that are reported but not checked.
    pub values: BTreeMap<String, f64>,
}

impl Summary {
    pub fn new(scenario: &str) -> Self {
        Summary { scenario: scenario.into(), checks: Vec::new(), all_pass: true, values: BTreeMap::new() }
    }

    pub fn push(&mut self, c: Check) {
        self.all_pass &= c.pass;
        self.checks.push(c);
    }

    pub fn value(&mut self, key: &str, v: f64) {
        self.values.insert(key.into(), v);
    }

    pub fn check(&self, id: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.id == id)
    }

    pub fn write(&self, path: &Path) -> LabResult<()> {
        let mut w = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut w, self)?;
        w.write_all(b"\n")?;
        Ok(())
    }

    pub fn read(path: &Path) -> LabResult<Self> {
        Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
    }
}

pub fn write_csv<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> LabResult<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> LabResult<Vec<T>> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path)?;
    Ok(r.deserialize().collect::<Result<_, _>>()?)
}

#[derive(Debug, Serialize, Deserialize)]
struct PartitionRow {
    mode: String,
    cluster: usize,
    interior: bool,
}

/// Writes a partition as `#`-prefixed header lines followed by one
/// `mode,cluster,interior` row per mode of the ball.
pub fn write_partition(path: &Path, p: &ClusterPartition) -> LabResult<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let a = p.matrix();
    writeln!(w, "# dim={}", a.dim())?;
    writeln!(w, "# radius={}", p.radius())?;
    writeln!(w, "# c_d={:?}", p.c_d())?;
    writeln!(w, "# tau={:?}", a.tau())?;
    writeln!(w, "# matrix={}", format_matrix(a))?;
    let mut cw = csv::Writer::from_writer(w);
    for (i, m) in p.modes().iter().enumerate() {
        let c = p.label(i);
        cw.serialize(PartitionRow { mode: m.to_string(), cluster: c, interior: p.clusters()[c].interior })?;
    }
    cw.flush()?;
    Ok(())
}

pub fn read_partition(path: &Path) -> LabResult<ClusterPartition> {
    let mut header = BTreeMap::new();
    let f = BufReader::new(File::open(path)?);
    for line in f.lines() {
        let line = line?;
        let Some(rest) = line.strip_prefix('#') else { break };
        let (k, v) = rest.trim().split_once('=').ok_or_else(|| LabError::format("partition header", line.clone()))?;
        header.insert(k.to_string(), v.to_string());
    }
    let get = |k: &str| header.get(k).ok_or_else(|| LabError::format("partition header", format!("missing `{k}`")));
    let num = |k: &str| -> LabResult<f64> { get(k)?.parse().map_err(|_| LabError::format("partition header", k.to_string())) };
    let dim = num("dim")? as usize;
    let radius = num("radius")? as u32;
    let c_d = num("c_d")?;
    let a = parse_matrix(get("matrix")?, dim, Some(num("tau")?))?;
    let rows: Vec<PartitionRow> = read_csv(path)?;
    let mut labels = Vec::with_capacity(rows.len());
    for r in rows {
        let m: Mode = r.mode.parse().map_err(|_| LabError::format("partition row", r.mode.clone()))?;
        labels.push((m, r.cluster, r.interior));
    }
    Ok(ClusterPartition::from_labels(&a, radius, c_d, &labels)?)
}

const SNAPSHOT_MAGIC: &[u8; 8] = b"WGFIELD1";

/// Binary snapshot: magic, `L`, `Nx`, `ny`, `d`, the `d×d` matrix, `t`, a
/// representation byte (0 physical, 1 Fourier), then the values as
/// little-endian `(re, im)` pairs.
pub fn write_snapshot(path: &Path, f: &WaveguideField, matrix: &[f64]) -> LabResult<()> {
    let g = f.grid;
    if matrix.len() != g.dim() * g.dim() {
        return Err(LabError::format("snapshot", "matrix size does not match the grid dimension"));
    }
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(SNAPSHOT_MAGIC)?;
    w.write_all(&g.half_length().to_le_bytes())?;
    for n in [g.nx(), g.ny(), g.dim()] {
        w.write_all(&(n as u64).to_le_bytes())?;
    }
    for v in matrix {
        w.write_all(&v.to_le_bytes())?;
    }
    w.write_all(&f.time.to_le_bytes())?;
    w.write_all(&[match f.repr {
        Representation::Physical => 0u8,
        Representation::Fourier => 1,
    }])?;
    for v in &f.values {
        w.write_all(&v.re.to_le_bytes())?;
        w.write_all(&v.im.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> LabResult<(WaveguideField, Vec<f64>)> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != SNAPSHOT_MAGIC {
        return Err(LabError::format("snapshot", "bad magic"));
    }
    let mut b8 = [0u8; 8];
    let mut f64_ = |r: &mut BufReader<File>| -> LabResult<f64> {
        r.read_exact(&mut b8)?;
        Ok(f64::from_le_bytes(b8))
    };
    let l = f64_(&mut r)?;
    let mut ints = [0usize; 3];
    for v in ints.iter_mut() {
        let mut b = [0u8; 8];
        r.read_exact(&mut b)?;
        *v = u64::from_le_bytes(b) as usize;
    }
    let [nx, ny, dim] = ints;
    if dim == 0 || dim > wglab_core::MAX_DIM {
        return Err(LabError::format("snapshot", format!("dimension {dim}")));
    }
    let grid = WaveguideGrid::new(l, nx, dim, ny)?;
    let matrix = (0..dim * dim).map(|_| f64_(&mut r)).collect::<LabResult<Vec<_>>>()?;
    let time = f64_(&mut r)?;
    let mut flag = [0u8; 1];
    r.read_exact(&mut flag)?;
    let repr = match flag[0] {
        0 => Representation::Physical,
        1 => Representation::Fourier,
        x => return Err(LabError::format("snapshot", format!("representation flag {x}"))),
    };
    let mut values = Vec::with_capacity(grid.len());
    for _ in 0..grid.len() {
        let re = f64_(&mut r)?;
        let im = f64_(&mut r)?;
        values.push(Complex64::new(re, im));
    }
    if r.read(&mut [0u8; 1])? != 0 {
        return Err(LabError::format("snapshot", "trailing bytes"));
    }
    Ok((WaveguideField { grid, repr, time, values }, matrix))
}

/// Frozen measured values of a run, keyed by check id and value name.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fixture {
    pub scenario: String,
    pub values: BTreeMap<String, f64>,
}

impl Fixture {
    pub fn from_summary(s: &Summary) -> Self {
        let mut values = s.values.clone();
        for c in &s.checks {
            if let Some(m) = c.measured {
                values.insert(format!("check:{}", c.id), m);
            }
        }
        Fixture { scenario: s.scenario.clone(), values }
    }

    pub fn write(&self, path: &Path) -> LabResult<()> {
        let mut w = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut w, self)?;
        w.write_all(b"\n")?;
        Ok(())
    }

    pub fn read(path: &Path) -> LabResult<Self> {
        Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
    }

    /// Keys whose values differ from `other` by more than `tol`
    /// relative, or that are missing on either side.
    pub fn mismatches(&self, other: &Fixture, tol: f64) -> Vec<String> {
        let mut out = Vec::new();
        if self.scenario != other.scenario {
            out.push("scenario".into());
        }
        for (k, v) in &self.values {
            match other.values.get(k) {
                Some(w) if (v - w).abs() <= tol * v.abs().max(w.abs()) || v == w => {}
                _ => out.push(k.clone()),
            }
        }
        out.extend(other.values.keys().filter(|k| !self.values.contains_key(*k)).cloned());
        out
    }
}
