//! Kinematic estimators on recorded paths, with Δ the record interval:
//!
//!   v̂ = (x₊ − x₋)/2Δ        û = (x₊ + x₋ − 2x)/2Δ        D̂ = ⟨(x₊ − x)²⟩/2Δ
//!
//! v̂ and û are binned by the central position x. Central records are taken
//! every other record so that the windows of one path do not overlap.

use std::io::Write;

use crate::error::{Error, Result};
use crate::stats::mean_and_stderr;

use super::ensemble::TrajectoryEnsemble;

pub const BINNED_CSV_HEADER: &str = "x,value,std_err,count";

/// Bins with fewer samples are dropped from estimates.
pub const MIN_BIN_OCCUPANCY: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinSpec {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    pub min_occupancy: usize,
}

impl BinSpec {
    pub fn new(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if !(hi > lo) || count == 0 {
            return Err(Error::InvalidParameter {
                name: "bins",
                reason: format!("need lo < hi and count >= 1 (got [{lo}, {hi}) x {count})"),
            });
        }
        Ok(Self {
            lo,
            hi,
            count,
            min_occupancy: MIN_BIN_OCCUPANCY,
        })
    }

    pub fn with_min_occupancy(mut self, n: usize) -> Self {
        self.min_occupancy = n;
        self
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.count as f64
    }

    pub fn center(&self, b: usize) -> f64 {
        self.lo + (b as f64 + 0.5) * self.width()
    }

    pub fn index(&self, x: f64) -> Option<usize> {
        (x >= self.lo && x < self.hi).then(|| (((x - self.lo) / self.width()) as usize).min(self.count - 1))
    }
}

/// Per-bin means over bins meeting the occupancy threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct BinnedEstimate {
    pub bin_centers: Vec<f64>,
    pub values: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub counts: Vec<usize>,
}

impl BinnedEstimate {
    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "{BINNED_CSV_HEADER}")?;
        for i in 0..self.values.len() {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{}",
                self.bin_centers[i], self.values[i], self.std_errors[i], self.counts[i]
            )?;
        }
        Ok(())
    }

    /// Largest |value − f(center)| / std_err over bins.
    pub fn max_z_score(&self, f: impl Fn(f64) -> f64) -> f64 {
        (0..self.values.len())
            .map(|i| (self.values[i] - f(self.bin_centers[i])).abs() / self.std_errors[i])
            .fold(0.0, f64::max)
    }
}

fn binned(ens: &TrajectoryEnsemble, bins: &BinSpec, sample: impl Fn(f64, f64, f64) -> f64) -> Result<BinnedEstimate> {
    if ens.n_records() < 3 {
        return Err(Error::Precondition("need at least three records per path".into()));
    }
    let mut per_bin: Vec<Vec<f64>> = vec![Vec::new(); bins.count];
    for i in 0..ens.n_traj() {
        let path = ens.trajectory(i);
        for k in (1..path.len() - 1).step_by(2) {
            if let Some(b) = bins.index(path[k]) {
                per_bin[b].push(sample(path[k - 1], path[k], path[k + 1]));
            }
        }
    }
    let mut out = BinnedEstimate {
        bin_centers: Vec::new(),
        values: Vec::new(),
        std_errors: Vec::new(),
        counts: Vec::new(),
    };
    for (b, samples) in per_bin.iter().enumerate() {
        if samples.len() < bins.min_occupancy.max(2) {
            continue;
        }
        let (mean, err) = mean_and_stderr(samples);
        out.bin_centers.push(bins.center(b));
        out.values.push(mean);
        out.std_errors.push(err);
        out.counts.push(samples.len());
    }
    Ok(out)
}

pub fn estimate_flux_velocity(ens: &TrajectoryEnsemble, bins: &BinSpec) -> Result<BinnedEstimate> {
    let two_delta = 2.0 * ens.record_dt();
    binned(ens, bins, |before, _, after| (after - before) / two_delta)
}

pub fn estimate_osmotic_velocity(ens: &TrajectoryEnsemble, bins: &BinSpec) -> Result<BinnedEstimate> {
    let two_delta = 2.0 * ens.record_dt();
    binned(ens, bins, |before, x, after| (after + before - 2.0 * x) / two_delta)
}

/// D̂ over every increment of every path.
pub fn estimate_diffusion(ens: &TrajectoryEnsemble) -> f64 {
    let two_delta = 2.0 * ens.record_dt();
    let mut sum = 0.0;
    let mut n = 0usize;
    for i in 0..ens.n_traj() {
        for w in ens.trajectory(i).windows(2) {
            sum += (w[1] - w[0]).powi(2);
            n += 1;
        }
    }
    sum / (n as f64 * two_delta)
}

/// Bin probabilities of positions pooled over records `from_record..`.
pub fn position_histogram(ens: &TrajectoryEnsemble, from_record: usize, bins: &BinSpec) -> Vec<f64> {
    let samples = (0..ens.n_traj()).flat_map(|i| ens.trajectory(i)[from_record..].iter().copied());
    crate::stats::histogram(samples, bins.lo, bins.hi, bins.count)
}

/// ⟨x²⟩ over records `from_record..` with a standard error from the spread of
/// per-path time averages (paths are independent, records within a path are not).
pub fn second_moment(ens: &TrajectoryEnsemble, from_record: usize) -> (f64, f64) {
    let per_path: Vec<f64> = (0..ens.n_traj())
        .map(|i| {
            let tail = &ens.trajectory(i)[from_record..];
            tail.iter().map(|x| x * x).sum::<f64>() / tail.len() as f64
        })
        .collect();
    mean_and_stderr(&per_path)
}
