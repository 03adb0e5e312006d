use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::rng::RandomStreamSpec;

pub const TRAJECTORY_CSV_HEADER: &str = "traj_id,step,t,x";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProcessTag {
    Quantum,
    Brownian,
    Sed,
}

/// Positions of `n_traj` paths recorded every `stride` integration steps.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryEnsemble {
    pub(crate) n_traj: usize,
    pub(crate) n_records: usize,
    pub(crate) dt: f64,
    pub(crate) stride: usize,
    pub(crate) t0: f64,
    /// Trajectory-major: `positions[i * n_records + k]`.
    pub(crate) positions: Vec<f64>,
    pub(crate) seed: RandomStreamSpec,
    pub(crate) process_tag: ProcessTag,
    pub(crate) exited: usize,
}

impl TrajectoryEnsemble {
    pub fn n_traj(&self) -> usize {
        self.n_traj
    }

    pub fn n_records(&self) -> usize {
        self.n_records
    }

    /// Integration step.
    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    /// Time between consecutive records.
    pub fn record_dt(&self) -> f64 {
        self.dt * self.stride as f64
    }

    pub fn time(&self, record: usize) -> f64 {
        self.t0 + record as f64 * self.record_dt()
    }

    pub fn seed(&self) -> RandomStreamSpec {
        self.seed
    }

    pub fn process_tag(&self) -> ProcessTag {
        self.process_tag
    }

    pub fn trajectory(&self, i: usize) -> &[f64] {
        &self.positions[i * self.n_records..(i + 1) * self.n_records]
    }

    pub fn positions_at(&self, record: usize) -> Vec<f64> {
        (0..self.n_traj).map(|i| self.trajectory(i)[record]).collect()
    }

    /// Fraction of trajectories that hit the grid boundary at least once.
    pub fn exit_fraction(&self) -> f64 {
        self.exited as f64 / self.n_traj as f64
    }

    pub fn flagged(&self) -> bool {
        self.exit_fraction() > super::drive::MAX_EXIT_FRACTION
    }

    /// First record at or after time `t`.
    pub fn record_at_or_after(&self, t: f64) -> usize {
        let k = ((t - self.t0) / self.record_dt()).ceil().max(0.0) as usize;
        k.min(self.n_records - 1)
    }

    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "{TRAJECTORY_CSV_HEADER}")?;
        for i in 0..self.n_traj {
            for (k, x) in self.trajectory(i).iter().enumerate() {
                writeln!(out, "{i},{},{:.16e},{:.16e}", k * self.stride, self.time(k), x)?;
            }
        }
        Ok(())
    }
}
