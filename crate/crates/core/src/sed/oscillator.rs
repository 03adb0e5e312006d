//! The radiation-damped oscillator in the zero-point field,
//!
//!   ẍ = −ω₀²x − Γẋ + (e/m)E(t),   Γ = τω₀²,
//!
//! the order-τ reduction of the third-derivative reaction term. The step is
//! the trapezoidal (Cayley) map for y = (x, ẋ), which conserves energy
//! exactly when Γ = 0 and satisfies the discrete balance
//!
//!   H_{n+1} − H_n = Δt (m F̄ v̄ − mΓ v̄²),   v̄ = (v_n + v_{n+1})/2, F̄ likewise,
//!
//! so absorbed and radiated powers are accumulated with these midpoint values.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::params::PhysicalParams;
use crate::stats::weighted_line_fit;

use super::zpf::{synthesize, ZpfRealization, ZpfSpec};

pub const SED_CSV_HEADER: &str = "t,x,xdot";

/// Blocks used for the stationarity trend test over the last half of a run.
const TREND_BLOCKS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SedConfig {
    pub omega0: f64,
    pub duration: f64,
    pub dt_max: f64,
    /// Start of the stationary window.
    pub burn_in: f64,
    /// End of the early window [0, early_window) used for the transient check.
    pub early_window: f64,
    /// Keep every `record_stride`-th sample in the trajectory (0 = none).
    pub record_stride: usize,
    pub initial: (f64, f64),
    /// Position histogram over the stationary window: (lo, hi, bins).
    pub histogram: Option<(f64, f64, usize)>,
}

impl SedConfig {
    /// Burn-in 10/Γ, early window 1/Γ, starting at rest.
    pub fn standard(params: &PhysicalParams, omega0: f64, duration: f64, dt_max: f64) -> Self {
        let gamma = params.damping_rate(omega0);
        let (burn_in, early) = if gamma > 0.0 {
            ((10.0 / gamma).min(0.5 * duration), (1.0 / gamma).min(duration))
        } else {
            (0.0, duration)
        };
        Self {
            omega0,
            duration,
            dt_max,
            burn_in,
            early_window: early,
            record_stride: 0,
            initial: (0.0, 0.0),
            histogram: None,
        }
    }

    fn validate(&self, params: &PhysicalParams, driven: bool) -> Result<()> {
        let bad = |name, reason: String| Err(Error::InvalidParameter { name, reason });
        if !(self.omega0 > 0.0) {
            return bad("omega0", format!("must be > 0 (got {})", self.omega0));
        }
        let gamma = params.damping_rate(self.omega0);
        if gamma / self.omega0 > 0.1 {
            return Err(Error::Precondition(format!(
                "damping ratio Gamma/omega0 = {} exceeds 0.1; the order-tau reduction does not apply",
                gamma / self.omega0
            )));
        }
        if !(self.dt_max > 0.0) || self.dt_max > 1e-2 / self.omega0 * (1.0 + 1e-12) {
            return Err(Error::Precondition(format!(
                "dt must be in (0, 0.01/omega0] (got {})",
                self.dt_max
            )));
        }
        if driven && gamma > 0.0 && self.duration < 20.0 / gamma * (1.0 - 1e-12) {
            return Err(Error::Precondition(format!(
                "duration {} is shorter than 20/Gamma = {}",
                self.duration,
                20.0 / gamma
            )));
        }
        if !(self.burn_in >= 0.0 && self.burn_in < self.duration) {
            return bad("burn_in", format!("must lie in [0, duration) (got {})", self.burn_in));
        }
        Ok(())
    }
}

/// Time averages of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct SedSummary {
    pub x2_mean: f64,
    pub v2_mean: f64,
    pub p_abs: f64,
    pub p_rad: f64,
    pub early_p_abs: f64,
    pub early_p_rad: f64,
    /// Counts per histogram bin over the stationary window, and the sample total.
    pub histogram: Vec<u64>,
    pub histogram_total: u64,
    /// Mean energy in consecutive blocks of the last half of the run.
    pub block_energies: Vec<f64>,
    /// Energy trend over the last half exceeds 3σ.
    pub nonstationary: bool,
    pub recurrence_flag: bool,
}

#[derive(Debug, Clone)]
pub struct SedTrajectory {
    pub times: Vec<f64>,
    pub x: Vec<f64>,
    pub xdot: Vec<f64>,
    pub dt: f64,
    pub params: PhysicalParams,
    pub omega0: f64,
    pub summary: SedSummary,
}

impl SedTrajectory {
    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "{SED_CSV_HEADER}")?;
        for i in 0..self.times.len() {
            writeln!(out, "{:.16e},{:.16e},{:.16e}", self.times[i], self.x[i], self.xdot[i])?;
        }
        Ok(())
    }
}

#[derive(Default)]
struct Window {
    n: u64,
    x2: f64,
    v2: f64,
    fv: f64,
}

/// Integrates one run. `field = None` switches the drive off (radiation
/// damping still acts if the particle is charged).
pub fn sed_integrate(params: &PhysicalParams, cfg: &SedConfig, field: Option<&ZpfRealization>) -> Result<SedTrajectory> {
    params.validate()?;
    cfg.validate(params, field.is_some())?;
    let m = params.mass;
    let w2 = cfg.omega0 * cfg.omega0;
    let gamma = params.damping_rate(cfg.omega0);

    let (dt, forcing, recurrence_flag) = match field {
        Some(f) => {
            let sampled = synthesize(f, cfg.duration, cfg.dt_max)?;
            let scale = params.charge / m;
            let forcing: Vec<f64> = sampled.values.iter().map(|e| scale * e).collect();
            (sampled.dt, forcing, sampled.recurrence_flag)
        }
        None => {
            let n = (cfg.duration / cfg.dt_max).ceil() as usize;
            let dt = cfg.duration / n as f64;
            (dt, vec![0.0; n + 1], false)
        }
    };
    let steps = forcing.len() - 1;

    // (I − hA/2) y' = (I + hA/2) y + h F̄ e₂ with A = [[0, 1], [−ω₀², −Γ]].
    let h = dt;
    let (a11, a12, a21, a22) = (1.0, -0.5 * h, 0.5 * h * w2, 1.0 + 0.5 * h * gamma);
    let det = a11 * a22 - a12 * a21;
    let inv = [a22 / det, -a12 / det, -a21 / det, a11 / det];
    let (b11, b12, b21, b22) = (1.0, 0.5 * h, -0.5 * h * w2, 1.0 - 0.5 * h * gamma);

    let burn_step = (cfg.burn_in / dt).ceil() as usize;
    let early_step = ((cfg.early_window / dt).floor() as usize).min(steps);
    let (hist_lo, hist_hi, bins) = cfg.histogram.unwrap_or((0.0, 1.0, 0));
    let mut histogram = vec![0u64; bins];
    let mut histogram_total = 0u64;
    let bin_width = if bins > 0 { (hist_hi - hist_lo) / bins as f64 } else { 1.0 };

    let half_step = steps / 2;
    let block_len = ((steps - half_step) / TREND_BLOCKS).max(1);
    let mut block_energy = Vec::with_capacity(TREND_BLOCKS + 1);
    let mut block_acc = (0.0, 0usize);

    let mut stationary = Window::default();
    let mut early = Window::default();
    let (mut times, mut xs, mut vs) = (Vec::new(), Vec::new(), Vec::new());
    let record = |k: usize, x: f64, v: f64, t: &mut Vec<f64>, xs: &mut Vec<f64>, vs: &mut Vec<f64>| {
        if cfg.record_stride > 0 && k.is_multiple_of(cfg.record_stride) {
            t.push(k as f64 * dt);
            xs.push(x);
            vs.push(v);
        }
    };

    let (mut x, mut v) = cfg.initial;
    record(0, x, v, &mut times, &mut xs, &mut vs);
    for k in 0..steps {
        let f_bar = 0.5 * (forcing[k] + forcing[k + 1]);
        let r1 = b11 * x + b12 * v;
        let r2 = b21 * x + b22 * v + h * f_bar;
        let (x_new, v_new) = (inv[0] * r1 + inv[1] * r2, inv[2] * r1 + inv[3] * r2);
        let v_bar = 0.5 * (v + v_new);
        let x_bar = 0.5 * (x + x_new);

        if k < early_step {
            early.n += 1;
            early.v2 += v_bar * v_bar;
            early.fv += f_bar * v_bar;
        }
        if k >= burn_step {
            stationary.n += 1;
            stationary.x2 += x_bar * x_bar;
            stationary.v2 += v_bar * v_bar;
            stationary.fv += f_bar * v_bar;
            if bins > 0 {
                histogram_total += 1;
                if x_new >= hist_lo && x_new < hist_hi {
                    histogram[(((x_new - hist_lo) / bin_width) as usize).min(bins - 1)] += 1;
                }
            }
        }
        if k >= half_step {
            block_acc.0 += 0.5 * m * (v_new * v_new + w2 * x_new * x_new);
            block_acc.1 += 1;
            if block_acc.1 == block_len {
                block_energy.push(block_acc.0 / block_len as f64);
                block_acc = (0.0, 0);
            }
        }
        x = x_new;
        v = v_new;
        if !(x.is_finite() && v.is_finite()) {
            return Err(Error::NonFinite {
                what: "oscillator state",
                index: k + 1,
                value: x,
            });
        }
        record(k + 1, x, v, &mut times, &mut xs, &mut vs);
    }

    let mean = |s: f64, n: u64| if n > 0 { s / n as f64 } else { f64::NAN };
    let summary = SedSummary {
        x2_mean: mean(stationary.x2, stationary.n),
        v2_mean: mean(stationary.v2, stationary.n),
        p_abs: m * mean(stationary.fv, stationary.n),
        p_rad: m * gamma * mean(stationary.v2, stationary.n),
        early_p_abs: m * mean(early.fv, early.n),
        early_p_rad: m * gamma * mean(early.v2, early.n),
        histogram,
        histogram_total,
        nonstationary: energy_trend_significant(&block_energy),
        block_energies: block_energy,
        recurrence_flag,
    };
    Ok(SedTrajectory {
        times,
        x: xs,
        xdot: vs,
        dt,
        params: *params,
        omega0: cfg.omega0,
        summary,
    })
}

/// Trend test across runs: the least-squares slope of each run's block
/// energies, with the mean slope compared against its standard error over
/// the (independent) runs.
pub fn ensemble_nonstationary(runs: &[SedSummary]) -> bool {
    let Some(first) = runs.first() else {
        return false;
    };
    if runs.len() < 3 {
        return runs.iter().any(|r| r.nonstationary);
    }
    let n_blocks = first.block_energies.len();
    if n_blocks < 4 {
        return false;
    }
    let idx: Vec<f64> = (0..n_blocks).map(|i| i as f64).collect();
    let ones = vec![1.0; n_blocks];
    let slopes: Vec<f64> = runs
        .iter()
        .map(|r| weighted_line_fit(&idx, &r.block_energies, &ones).1)
        .collect();
    let (mean, err) = crate::stats::mean_and_stderr(&slopes);
    mean.abs() > 3.0 * err
}

/// Slope of block energies against block index beyond 3σ of the fit.
fn energy_trend_significant(blocks: &[f64]) -> bool {
    if blocks.len() < 4 {
        return false;
    }
    let idx: Vec<f64> = (0..blocks.len()).map(|i| i as f64).collect();
    let ones = vec![1.0; blocks.len()];
    let (a, b, _) = weighted_line_fit(&idx, blocks, &ones);
    let dof = (blocks.len() - 2) as f64;
    let scatter = (idx
        .iter()
        .zip(blocks)
        .map(|(i, e)| (e - a - b * i).powi(2))
        .sum::<f64>()
        / dof)
        .sqrt();
    let (_, _, unit_err) = weighted_line_fit(&idx, blocks, &vec![scatter.max(f64::MIN_POSITIVE); blocks.len()]);
    b.abs() > 3.0 * unit_err
}

/// Independent realizations 0..n of the field in `spec`, run in parallel and
/// returned in realization order.
pub fn sed_ensemble(params: &PhysicalParams, cfg: &SedConfig, spec: &ZpfSpec, n: usize) -> Result<Vec<SedSummary>> {
    let cfg = SedConfig {
        record_stride: 0,
        ..*cfg
    };
    (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let field = ZpfRealization::generate(spec, i);
            sed_integrate(params, &cfg, Some(&field)).map(|t| t.summary)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_oscillator_conserves_energy() {
        let params = PhysicalParams::natural();
        let mut cfg = SedConfig::standard(&params, 1.0, 200.0, 1e-2);
        cfg.initial = (1.0, 0.3);
        cfg.record_stride = 1;
        let traj = sed_integrate(&params, &cfg, None).unwrap();
        let energy = |i: usize| 0.5 * (traj.xdot[i].powi(2) + traj.x[i].powi(2));
        let e0 = energy(0);
        let worst = (0..traj.x.len()).map(|i| (energy(i) - e0).abs() / e0).fold(0.0, f64::max);
        assert!(worst < 1e-6, "relative drift {worst}");
        assert_eq!(traj.summary.p_abs, 0.0);
    }

    #[test]
    fn damped_energy_decays_exponentially() {
        let gamma = 0.01;
        let params = PhysicalParams::natural().with_damping(gamma, 1.0);
        let mut cfg = SedConfig::standard(&params, 1.0, 300.0, 1e-2);
        cfg.initial = (1.0, 0.0);
        cfg.record_stride = 100;
        let traj = sed_integrate(&params, &cfg, None).unwrap();
        let energy = |i: usize| 0.5 * (traj.xdot[i].powi(2) + traj.x[i].powi(2));
        let e0 = energy(0);
        for i in (0..traj.times.len()).step_by(50) {
            let t = traj.times[i];
            let expected = e0 * (-gamma * t).exp();
            let ratio = energy(i) / expected;
            assert!((ratio - 1.0).abs() < 0.02, "t = {t}: ratio {ratio}");
        }
        assert_eq!(traj.summary.early_p_abs, 0.0);
        assert!(traj.summary.early_p_rad > 0.0);
    }

    #[test]
    fn preconditions() {
        let strong = PhysicalParams::natural().with_damping(0.5, 1.0);
        assert!(matches!(
            sed_integrate(&strong, &SedConfig::standard(&strong, 1.0, 100.0, 1e-2), None),
            Err(Error::Precondition(_))
        ));
        let p = PhysicalParams::natural();
        assert!(sed_integrate(&p, &SedConfig::standard(&p, 1.0, 10.0, 0.1), None).is_err());
        let weak = PhysicalParams::natural().with_damping(1e-2, 1.0);
        let spec = ZpfSpec::new(5.0, 200, &weak, 1).unwrap();
        let f = ZpfRealization::generate(&spec, 0);
        assert!(sed_integrate(&weak, &SedConfig::standard(&weak, 1.0, 100.0, 1e-2), Some(&f)).is_err());
    }

    #[test]
    fn trend_detector() {
        let flat: Vec<f64> = (0..8).map(|i| 1.0 + 0.01 * ((i * 7) % 5) as f64).collect();
        assert!(!energy_trend_significant(&flat));
        let rising: Vec<f64> = (0..8).map(|i| 1.0 + 0.1 * i as f64 + 0.01 * ((i * 7) % 5) as f64).collect();
        assert!(energy_trend_significant(&rising));
    }

    fn summary_with_blocks(blocks: Vec<f64>) -> SedSummary {
        SedSummary {
            x2_mean: 0.5,
            v2_mean: 0.5,
            p_abs: 1.0,
            p_rad: 1.0,
            early_p_abs: 1.0,
            early_p_rad: 1.0,
            histogram: Vec::new(),
            histogram_total: 0,
            block_energies: blocks,
            nonstationary: false,
            recurrence_flag: false,
        }
    }

    #[test]
    fn ensemble_trend_uses_the_spread_of_run_slopes() {
        use rand::Rng;
        let mut rng = crate::rng::RandomStreamSpec::new(3, 0).rng();
        let runs = |drift: f64, rng: &mut rand_chacha::ChaCha8Rng| -> Vec<SedSummary> {
            (0..30)
                .map(|_| {
                    let offset: f64 = rng.gen::<f64>() - 0.5;
                    summary_with_blocks((0..8).map(|i| 1.0 + offset + drift * i as f64 + 0.1 * (rng.gen::<f64>() - 0.5)).collect())
                })
                .collect()
        };
        assert!(!ensemble_nonstationary(&runs(0.0, &mut rng)));
        assert!(ensemble_nonstationary(&runs(0.05, &mut rng)));
    }
}
