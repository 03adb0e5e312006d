//! Euler–Maruyama drivers.
//!
//! Nelson (λ = +1):   x ← x + (v + u)dt + √(2D dt)·ξ
//! Brownian (λ = −1): x ← x + f/(mγ)·dt + √(2D dt)·ξ
//!
//! Each trajectory owns the random stream `stream_index = i` of two derived
//! seeds (initial positions, increments), so ensembles are bit-identical
//! whatever the thread count. Paths leaving the grid are reflected back and
//! counted.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{cumulative_integral, Grid1D, ScalarField};
use crate::params::PhysicalParams;
use crate::quantum::{flux_velocity, osmotic_velocity, MaskedField, Wavefunction};
use crate::rng::{tags, RandomStreamSpec};

use super::ensemble::{ProcessTag, TrajectoryEnsemble};

/// Runs whose exit fraction exceeds this are flagged.
pub const MAX_EXIT_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerConfig {
    pub n_traj: usize,
    pub dt: f64,
    pub n_steps: usize,
    /// Keep every `record_stride`-th position (the first is always kept).
    pub record_stride: usize,
    pub seed: RandomStreamSpec,
}

impl SamplerConfig {
    pub fn new(n_traj: usize, dt: f64, n_steps: usize, seed: u64) -> Self {
        Self {
            n_traj,
            dt,
            n_steps,
            record_stride: 1,
            seed: RandomStreamSpec::new(seed, 0),
        }
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.record_stride = stride;
        self
    }

    fn validate(&self) -> Result<()> {
        let bad = |name, reason: String| Err(Error::InvalidParameter { name, reason });
        if self.n_traj == 0 {
            return bad("n_traj", "must be >= 1".into());
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad("dt", format!("must be > 0 (got {})", self.dt));
        }
        if self.record_stride == 0 {
            return bad("record_stride", "must be >= 1".into());
        }
        if self.n_steps / self.record_stride < 1 {
            return bad(
                "n_steps",
                format!("must allow at least two records (n_steps = {}, stride = {})", self.n_steps, self.record_stride),
            );
        }
        Ok(())
    }

    fn n_records(&self) -> usize {
        self.n_steps / self.record_stride + 1
    }
}

/// The Nelson drift b = v + u on a grid, either fixed or tabulated at a
/// sequence of increasing times (linear in t between frames, clamped outside).
#[derive(Debug, Clone)]
pub struct DriftFields {
    grid: Grid1D,
    times: Vec<f64>,
    frames: Vec<ScalarField>,
}

/// Masked nodes take the value of the nearest valid node.
fn fill_masked(f: &MaskedField) -> Result<ScalarField> {
    let valid: Vec<usize> = (0..f.valid.len()).filter(|&i| f.valid[i]).collect();
    if valid.is_empty() {
        return Err(Error::Precondition("drift field is masked everywhere".into()));
    }
    let values = (0..f.valid.len())
        .map(|i| {
            let j = match valid.binary_search(&i) {
                Ok(k) => valid[k],
                Err(0) => valid[0],
                Err(k) if k == valid.len() => valid[k - 1],
                Err(k) => {
                    if i - valid[k - 1] <= valid[k] - i {
                        valid[k - 1]
                    } else {
                        valid[k]
                    }
                }
            };
            f.field.get(j)
        })
        .collect();
    ScalarField::new(*f.field.grid(), values)
}

impl DriftFields {
    pub fn stationary(v: &ScalarField, u: &ScalarField) -> Result<Self> {
        v.grid().check_same(u.grid())?;
        Ok(Self {
            grid: *v.grid(),
            times: vec![0.0],
            frames: vec![v.zip_with(u, |a, b| a + b)?],
        })
    }

    /// From masked fields; masked nodes hold the nearest valid value.
    pub fn from_masked(v: &MaskedField, u: &MaskedField) -> Result<Self> {
        Self::stationary(&fill_masked(v)?, &fill_masked(u)?)
    }

    pub fn from_wavefunction(psi: &Wavefunction) -> Result<Self> {
        Self::from_masked(&flux_velocity(psi)?, &osmotic_velocity(psi)?)
    }

    /// From wavefunction snapshots at increasing times.
    pub fn time_indexed(snapshots: &[Wavefunction]) -> Result<Self> {
        let first = snapshots
            .first()
            .ok_or_else(|| Error::Precondition("no snapshots".into()))?;
        let mut times = Vec::with_capacity(snapshots.len());
        let mut frames = Vec::with_capacity(snapshots.len());
        for psi in snapshots {
            first.grid().check_same(psi.grid())?;
            if times.last().is_some_and(|&t| psi.time() <= t) {
                return Err(Error::Precondition("snapshot times must increase".into()));
            }
            times.push(psi.time());
            frames.push(Self::from_wavefunction(psi)?.frames.remove(0));
        }
        Ok(Self {
            grid: *first.grid(),
            times,
            frames,
        })
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn drift(&self, x: f64, t: f64) -> f64 {
        let n = self.times.len();
        if n == 1 || t <= self.times[0] {
            return self.frames[0].interpolate(x);
        }
        if t >= self.times[n - 1] {
            return self.frames[n - 1].interpolate(x);
        }
        let k = self.times.partition_point(|&s| s <= t) - 1;
        let w = (t - self.times[k]) / (self.times[k + 1] - self.times[k]);
        (1.0 - w) * self.frames[k].interpolate(x) + w * self.frames[k + 1].interpolate(x)
    }

    fn start_time(&self) -> f64 {
        self.times[0]
    }
}

/// Inverse-CDF sampler over a density tabulated on a grid, piecewise
/// uniform within each cell.
struct InverseCdf {
    grid: Grid1D,
    cdf: Vec<f64>,
}

impl InverseCdf {
    fn new(rho: &ScalarField) -> Result<Self> {
        if rho.values().iter().any(|&r| r < 0.0) {
            return Err(Error::Precondition("initial density must be non-negative".into()));
        }
        let cdf = cumulative_integral(rho);
        let total = *cdf.last().expect("grid is non-empty");
        if !(total > 0.0) {
            return Err(Error::Precondition("initial density has zero mass".into()));
        }
        Ok(Self {
            grid: *rho.grid(),
            cdf: cdf.into_iter().map(|c| c / total).collect(),
        })
    }

    fn sample(&self, p: f64) -> f64 {
        let k = self.cdf.partition_point(|&c| c < p).clamp(1, self.cdf.len() - 1);
        let (lo, hi) = (self.cdf[k - 1], self.cdf[k]);
        let w = if hi > lo { (p - lo) / (hi - lo) } else { 0.5 };
        self.grid.x(k - 1) + w * self.grid.dx()
    }
}

/// Folds `x` back into [a, b]; returns whether it was outside.
fn reflect(x: f64, a: f64, b: f64) -> (f64, bool) {
    if x >= a && x <= b {
        return (x, false);
    }
    let width = b - a;
    let mut y = (x - a).rem_euclid(2.0 * width);
    if y > width {
        y = 2.0 * width - y;
    }
    (a + y, true)
}

fn run_ensemble(
    initial: &ScalarField,
    cfg: &SamplerConfig,
    diffusion: f64,
    t0: f64,
    tag: ProcessTag,
    drift: impl Fn(f64, f64) -> f64 + Sync,
) -> Result<TrajectoryEnsemble> {
    cfg.validate()?;
    if !(diffusion >= 0.0 && diffusion.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "diffusion",
            reason: format!("must be >= 0 (got {diffusion})"),
        });
    }
    let grid = *initial.grid();
    let sampler = InverseCdf::new(initial)?;
    let init_seed = cfg.seed.derive(tags::INITIAL_POSITIONS);
    let noise_seed = cfg.seed.derive(tags::TRAJECTORY_NOISE);
    let n_records = cfg.n_records();
    let kick = (2.0 * diffusion * cfg.dt).sqrt();
    let (a, b) = (grid.x_min(), grid.x_max());

    let paths: Vec<(Vec<f64>, bool)> = (0..cfg.n_traj)
        .into_par_iter()
        .map(|i| {
            let mut x = sampler.sample(init_seed.with_stream(i as u64).rng().gen::<f64>());
            let mut rng = noise_seed.with_stream(i as u64).rng();
            let mut path = Vec::with_capacity(n_records);
            let mut exited = false;
            path.push(x);
            for step in 0..(n_records - 1) * cfg.record_stride {
                let t = t0 + step as f64 * cfg.dt;
                let xi: f64 = rng.sample(StandardNormal);
                let (y, out) = reflect(x + drift(x, t) * cfg.dt + kick * xi, a, b);
                x = y;
                exited |= out;
                if (step + 1) % cfg.record_stride == 0 {
                    path.push(x);
                }
            }
            (path, exited)
        })
        .collect();

    let exited = paths.iter().filter(|(_, e)| *e).count();
    let mut positions = Vec::with_capacity(cfg.n_traj * n_records);
    for (p, _) in paths {
        positions.extend(p);
    }
    Ok(TrajectoryEnsemble {
        n_traj: cfg.n_traj,
        n_records,
        dt: cfg.dt,
        stride: cfg.record_stride,
        t0,
        positions,
        seed: cfg.seed,
        process_tag: tag,
        exited,
    })
}

/// Nelson diffusion driven by `fields`, started from `initial` (the density
/// at the first field time).
pub fn nelson_sample(
    fields: &DriftFields,
    initial: &ScalarField,
    params: &PhysicalParams,
    cfg: &SamplerConfig,
) -> Result<TrajectoryEnsemble> {
    fields.grid().check_same(initial.grid())?;
    run_ensemble(initial, cfg, params.diffusion, fields.start_time(), ProcessTag::Quantum, |x, t| {
        fields.drift(x, t)
    })
}

/// Overdamped Brownian motion in `force` with friction rate γ, started from
/// `initial`. Uses `params.mass` and `params.diffusion`.
pub fn brownian_sample(
    force: &ScalarField,
    friction: f64,
    initial: &ScalarField,
    params: &PhysicalParams,
    cfg: &SamplerConfig,
) -> Result<TrajectoryEnsemble> {
    if !(friction > 0.0 && friction.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "friction",
            reason: format!("must be > 0 (got {friction})"),
        });
    }
    force.grid().check_same(initial.grid())?;
    let mobility = 1.0 / (params.mass * friction);
    run_ensemble(initial, cfg, params.diffusion, 0.0, ProcessTag::Brownian, |x, _| {
        mobility * force.interpolate(x)
    })
}
