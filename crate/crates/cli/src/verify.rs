//! The acceptance suite: ten checks against analytic oracles, run in order.
//!
//! `fast` shrinks every ensemble 10× and widens statistical tolerances by
//! √10 (the SED spread check uses its own 15% fast tolerance). Tolerances
//! that are already in units of standard errors are left unchanged.

use std::time::Instant;

use num_complex::Complex64;
use serde::Serialize;
use stoqlab::dynamics::{
    residual_continuity, residual_time_symmetric, FieldSnapshot, FieldSnapshotPair, ResidualReport,
};
use stoqlab::quantum::{
    heisenberg_product, momentum_stats, osmotic_from_density, osmotic_velocity, solve_eigenstates, CayleyStepper,
    MaskedField, Wavefunction,
};
use stoqlab::samplers::{
    brownian_sample, estimate_diffusion, estimate_flux_velocity, estimate_osmotic_velocity, nelson_sample,
    position_histogram, second_moment, BinSpec, DriftFields, SamplerConfig, TrajectoryEnsemble,
};
use stoqlab::sed::{
    ensemble_nonstationary, fix_diffusion_constant, lineshape_x2, sed_ensemble, BalanceReport, DiffusionEstimate,
    SedConfig, SedSummary, ZpfSpec,
};
use stoqlab::stats::{gaussian_bin_probabilities, l1_distance, weighted_line_fit};
use stoqlab::{Grid1D, PhysicalParams, RandomStreamSpec, ScalarField};

use crate::analysis::{pooled_histogram, zpf_covariance};
use crate::config::{Fault, ScenarioConfig};
use crate::RunError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteOptions {
    pub fast: bool,
    pub seed: u64,
    pub inject: Fault,
    pub n_traj: usize,
    pub sed_realizations: usize,
    pub variant_realizations: usize,
    pub zpf_realizations: usize,
}

impl SuiteOptions {
    pub fn new(fast: bool) -> Self {
        Self {
            fast,
            seed: 1,
            inject: Fault::None,
            n_traj: 10_000,
            sed_realizations: 240,
            variant_realizations: 80,
            zpf_realizations: 100,
        }
    }

    pub fn from_config(cfg: &ScenarioConfig) -> Self {
        let v = &cfg.verify;
        Self {
            fast: v.fast,
            seed: cfg.seed,
            inject: v.inject,
            n_traj: v.n_traj,
            sed_realizations: v.sed_realizations,
            variant_realizations: v.variant_realizations,
            zpf_realizations: v.zpf_realizations,
        }
    }

    fn shrink(&self, n: usize) -> usize {
        if self.fast {
            (n / 10).max(2)
        } else {
            n
        }
    }

    fn widen(&self, tol: f64) -> f64 {
        if self.fast {
            tol * 10f64.sqrt()
        } else {
            tol
        }
    }

    fn seed_for(&self, tag: u64) -> u64 {
        RandomStreamSpec::new(self.seed, 0).derive(tag).master_seed
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Comparison {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
    #[serde(rename = ">")]
    Above,
}

#[derive(Debug, Clone, Serialize)]
pub struct Metric {
    pub name: String,
    pub value: f64,
    pub comparison: Comparison,
    pub tolerance: f64,
    pub pass: bool,
}

impl Metric {
    fn new(name: &str, value: f64, comparison: Comparison, tolerance: f64) -> Self {
        let pass = match comparison {
            Comparison::AtMost => value <= tolerance,
            Comparison::AtLeast => value >= tolerance,
            Comparison::Above => value > tolerance,
        };
        Self {
            name: name.to_string(),
            value,
            comparison,
            tolerance,
            pass,
        }
    }

    fn at_most(name: &str, value: f64, tolerance: f64) -> Self {
        Self::new(name, value, Comparison::AtMost, tolerance)
    }

    fn at_least(name: &str, value: f64, tolerance: f64) -> Self {
        Self::new(name, value, Comparison::AtLeast, tolerance)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub id: usize,
    pub name: String,
    pub status: CheckStatus,
    pub metrics: Vec<Metric>,
    pub runtime_s: f64,
    pub detail: String,
}

impl CheckResult {
    pub fn line(&self) -> String {
        let tag = match self.status {
            CheckStatus::Pass => "PASS",
            CheckStatus::Fail => "FAIL",
            CheckStatus::Skipped => "SKIP",
        };
        let metrics: Vec<String> = self
            .metrics
            .iter()
            .map(|m| {
                let op = match m.comparison {
                    Comparison::AtMost => "<=",
                    Comparison::AtLeast => ">=",
                    Comparison::Above => ">",
                };
                let mark = if m.pass { "" } else { " !" };
                format!("{} = {:.4e} ({op} {:.3e}){mark}", m.name, m.value, m.tolerance)
            })
            .collect();
        let mut line = format!("[{tag}] {:>2} {:<28} {:7.1}s  {}", self.id, self.name, self.runtime_s, metrics.join("; "));
        if !self.detail.is_empty() {
            line.push_str(&format!("  [{}]", self.detail));
        }
        line
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub fast: bool,
    pub pass: bool,
    pub runtime_s: f64,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn lines(&self) -> Vec<String> {
        self.checks.iter().map(CheckResult::line).collect()
    }

    pub fn failing(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|c| c.status == CheckStatus::Fail)
            .map(|c| c.name.as_str())
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

/// Runs one check, turning errors into a failed result.
fn timed<T>(
    id: usize,
    name: &str,
    budget: Option<f64>,
    report: &mut Vec<CheckResult>,
    on_line: &mut dyn FnMut(&CheckResult),
    body: impl FnOnce() -> Result<(Vec<Metric>, T), RunError>,
) -> Option<T> {
    let start = Instant::now();
    let outcome = body();
    let runtime_s = start.elapsed().as_secs_f64();
    let (mut metrics, value, detail) = match outcome {
        Ok((m, v)) => (m, Some(v), String::new()),
        Err(e) => (Vec::new(), None, e.to_string()),
    };
    if let Some(b) = budget {
        metrics.push(Metric::at_most("runtime_s", runtime_s, b));
    }
    let status = if value.is_some() && metrics.iter().all(|m| m.pass) {
        CheckStatus::Pass
    } else {
        CheckStatus::Fail
    };
    let result = CheckResult {
        id,
        name: name.to_string(),
        status,
        metrics,
        runtime_s,
        detail,
    };
    on_line(&result);
    report.push(result);
    value
}

fn skipped(id: usize, name: &str, why: &str, report: &mut Vec<CheckResult>, on_line: &mut dyn FnMut(&CheckResult)) {
    let result = CheckResult {
        id,
        name: name.to_string(),
        status: CheckStatus::Skipped,
        metrics: Vec::new(),
        runtime_s: 0.0,
        detail: why.to_string(),
    };
    on_line(&result);
    report.push(result);
}

fn harmonic(grid: Grid1D, omega: f64) -> ScalarField {
    ScalarField::from_fn(grid, |x| 0.5 * omega * omega * x * x).expect("finite potential")
}

fn reference_states() -> Result<(Grid1D, Vec<Wavefunction>), RunError> {
    let grid = Grid1D::new(-10.0, 10.0, 1001)?;
    let params = PhysicalParams::natural();
    let v = harmonic(grid, 1.0);
    let states = solve_eigenstates(&v, &params, 2)?;
    let (a, b) = (states[0].wavefunction(params), states[1].wavefunction(params));
    let c = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let sup = Wavefunction::superposition(&[(c, &a), (c, &b)])?;
    let stepper = CayleyStepper::new(&v, &params, 1e-3)?;
    let mut out = vec![a, b];
    for steps in [500, 1000, 2000] {
        out.push(stepper.advance(&sup, steps)?);
    }
    Ok((grid, out))
}

fn spectrum() -> Result<(Vec<Metric>, ()), RunError> {
    let grid = Grid1D::new(-10.0, 10.0, 1001)?;
    let states = solve_eigenstates(&harmonic(grid, 1.0), &PhysicalParams::natural(), 4)?;
    let err = states
        .iter()
        .enumerate()
        .map(|(n, s)| (s.energy - (n as f64 + 0.5)).abs())
        .fold(0.0, f64::max);
    Ok((vec![Metric::at_most("max|E_n-(n+1/2)|", err, 1e-4)], ()))
}

fn variance_decomposition() -> Result<(Vec<Metric>, ()), RunError> {
    let (_, states) = reference_states()?;
    let mut gap: f64 = 0.0;
    for psi in &states {
        gap = gap.max(momentum_stats(psi)?.decomposition_gap());
    }
    let heis = heisenberg_product(&states[0])?;
    Ok((
        vec![
            Metric::at_most("max rel|var_p-var_mv-var_mu|", gap, 1e-3),
            Metric::at_most("rel|dx*dp-hbar/2|", (heis - 0.5).abs() / 0.5, 1e-3),
        ],
        (),
    ))
}

fn velocity_identification() -> Result<(Vec<Metric>, ()), RunError> {
    let (grid, states) = reference_states()?;
    let mut worst: f64 = 0.0;
    for psi in &states {
        let from_psi = osmotic_velocity(psi)?;
        let from_rho = osmotic_from_density(&psi.density(), psi.params().diffusion)?;
        let valid = from_psi.joint_valid(&from_rho);
        for i in (0..grid.len()).filter(|&i| valid[i]) {
            worst = worst.max((from_psi.field.get(i) - from_rho.field.get(i)).abs());
        }
    }
    let dx = grid.dx();
    Ok((vec![Metric::at_most("sup|u_psi - D grad(rho)/rho|", worst, 10.0 * dx * dx)], ()))
}

fn superposition_pair(n: usize, dt: f64) -> Result<FieldSnapshotPair, RunError> {
    let grid = Grid1D::new(-5.7, 5.7, n)?;
    let params = PhysicalParams::natural();
    let v = harmonic(grid, 1.0);
    let states = solve_eigenstates(&v, &params, 2)?;
    let c = std::f64::consts::FRAC_1_SQRT_2;
    let psi0 = Wavefunction::superposition(&[
        (Complex64::new(c, 0.0), &states[0].wavefunction(params)),
        (Complex64::new(0.0, -c), &states[1].wavefunction(params)),
    ])?;
    let stepper = CayleyStepper::new(&v, &params, dt)?;
    let before = stepper.advance(&psi0, (0.5 / dt).round() as usize)?;
    let after = stepper.advance(&before, 1)?;
    Ok(FieldSnapshotPair::from_wavefunctions(&before, &after, &v)?)
}

fn ratio(coarse: &ResidualReport, fine: &ResidualReport) -> f64 {
    if coarse.is_valid() && fine.is_valid() {
        coarse.l2_norm / fine.l2_norm
    } else {
        0.0
    }
}

fn dynamical_equivalence() -> Result<(Vec<Metric>, ()), RunError> {
    let coarse = superposition_pair(1141, 1e-3)?;
    let fine = superposition_pair(2281, 5e-4)?;
    let dyn_ratio = ratio(&residual_time_symmetric(&coarse)?, &residual_time_symmetric(&fine)?);
    let cont_ratio = ratio(&residual_continuity(&coarse)?, &residual_continuity(&fine)?);

    let grid = Grid1D::new(-5.45, 5.45, 1091)?;
    let params = PhysicalParams::natural();
    let v = harmonic(grid, 1.0);
    let psi = solve_eigenstates(&v, &params, 1)?[0].wavefunction(params);
    let force = ScalarField::from_fn(grid, |x| -x)?;
    let ground = residual_time_symmetric(&FieldSnapshotPair::stationary(
        FieldSnapshot::from_wavefunction(&psi)?,
        force,
        params,
    )?)?;
    let ground_l2 = if ground.is_valid() { ground.l2_norm } else { f64::INFINITY };
    Ok((
        vec![
            Metric::at_least("dynamical residual ratio", dyn_ratio, 3.5),
            Metric::at_least("continuity residual ratio", cont_ratio, 3.5),
            Metric::at_most("ground-state residual l2", ground_l2, 1e-3),
        ],
        (),
    ))
}

struct SpreadStats {
    x2: f64,
    std_err: f64,
}

const SAMPLER_DT: f64 = 1e-3;
const SAMPLER_STEPS: usize = 5000;
const SAMPLER_STRIDE: usize = 10;

fn sampler_grid() -> Result<Grid1D, RunError> {
    Ok(Grid1D::new(-8.0, 8.0, 801)?)
}

fn ground_nelson(params: PhysicalParams, n_traj: usize, seed: u64, fault: Fault) -> Result<TrajectoryEnsemble, RunError> {
    let grid = sampler_grid()?;
    let psi = solve_eigenstates(&harmonic(grid, 1.0), &params, 1)?[0].wavefunction(params);
    let fields = match fault {
        Fault::None => DriftFields::from_wavefunction(&psi)?,
        Fault::FlipOsmotic => {
            let u = osmotic_velocity(&psi)?;
            let flipped = MaskedField {
                field: u.field.map(|x| -x)?,
                valid: u.valid.clone(),
            };
            DriftFields::from_masked(&stoqlab::quantum::flux_velocity(&psi)?, &flipped)?
        }
    };
    let cfg = SamplerConfig::new(n_traj, SAMPLER_DT, SAMPLER_STEPS, seed).with_stride(SAMPLER_STRIDE);
    Ok(nelson_sample(&fields, &psi.density(), &params, &cfg)?)
}

fn nelson_check(opts: &SuiteOptions) -> Result<(Vec<Metric>, SpreadStats), RunError> {
    let n_traj = opts.shrink(opts.n_traj);
    let ens = ground_nelson(PhysicalParams::natural(), n_traj, opts.seed_for(5), opts.inject)?;
    let from = ens.record_at_or_after(0.5);
    let bins = BinSpec::new(-4.0, 4.0, 40)?;
    let l1 = l1_distance(
        &position_histogram(&ens, from, &bins),
        &gaussian_bin_probabilities(0.5, -4.0, 4.0, 40),
    );
    let fit_bins = BinSpec::new(-1.5, 1.5, 12)?.with_min_occupancy(20);
    let v = estimate_flux_velocity(&ens, &fit_bins)?;
    let u = estimate_osmotic_velocity(&ens, &fit_bins)?;
    if u.values.len() < 3 {
        return Err(RunError::Internal("too few occupied bins for the slope fit".into()));
    }
    let (_, slope, _) = weighted_line_fit(&u.bin_centers, &u.values, &u.std_errors);
    let d = estimate_diffusion(&ens);
    let (x2, std_err) = second_moment(&ens, from);
    Ok((
        vec![
            Metric::at_most("L1(hist, |psi0|^2)", l1, opts.widen(0.02)),
            Metric::at_most("max|z(v_hat)|", v.max_z_score(|_| 0.0), 4.0),
            Metric::at_most("rel|u_slope+1|", (slope + 1.0).abs(), opts.widen(0.05)),
            Metric::at_most("rel|D_hat-0.5|", (d - 0.5).abs() / 0.5, opts.widen(0.02)),
            Metric::at_most("exit_fraction", ens.exit_fraction(), stoqlab::samplers::MAX_EXIT_FRACTION),
        ],
        SpreadStats { x2, std_err },
    ))
}

/// Overdamped branch in the same trap with D = 0.1 and γ = 1, so the
/// Ornstein–Uhlenbeck variance is γD/ω² = 0.1.
fn brownian_check(opts: &SuiteOptions, nelson: Option<&SpreadStats>) -> Result<(Vec<Metric>, ()), RunError> {
    let (diffusion, friction) = (0.1, 1.0);
    let grid = sampler_grid()?;
    let natural = PhysicalParams::natural();
    let start = solve_eigenstates(&harmonic(grid, 1.0), &natural, 1)?[0]
        .wavefunction(natural)
        .density();
    let force = ScalarField::from_fn(grid, |x| -x)?;
    let params = PhysicalParams::brownian(1.0, diffusion);
    let cfg = SamplerConfig::new(opts.shrink(opts.n_traj), SAMPLER_DT, SAMPLER_STEPS, opts.seed_for(6))
        .with_stride(SAMPLER_STRIDE);
    let ens = brownian_sample(&force, friction, &start, &params, &cfg)?;
    let from = ens.record_at_or_after(3.5);
    let variance = friction * diffusion;
    let half = 4.0 * variance.sqrt();
    let bins = BinSpec::new(-half, half, 20)?;
    let l1 = l1_distance(
        &position_histogram(&ens, from, &bins),
        &gaussian_bin_probabilities(variance, -half, half, 20),
    );
    let (x2, err) = second_moment(&ens, from);
    let (q_x2, q_err) = nelson.map_or((0.5, 0.0), |s| (s.x2, s.std_err));
    let separation = (x2 - q_x2).abs() / (err * err + q_err * q_err).sqrt();
    Ok((
        vec![
            Metric::at_most("L1(hist, OU density)", l1, opts.widen(0.02)),
            Metric::at_least("z(<x^2> vs quantum)", separation, 5.0),
            Metric::at_most("exit_fraction", ens.exit_fraction(), stoqlab::samplers::MAX_EXIT_FRACTION),
        ],
        (),
    ))
}

fn zpf_check(opts: &SuiteOptions) -> Result<(Vec<Metric>, ()), RunError> {
    let params = PhysicalParams::natural();
    let spec = ZpfSpec::for_duration(20.0, 50.0, &params, opts.seed_for(7))?;
    let (rows, recurrence) = zpf_covariance(&spec, 50.0, 1e-2, opts.shrink(opts.zpf_realizations), &[0, 1, 5, 20])?;
    let mut metrics: Vec<Metric> = rows
        .iter()
        .map(|r| Metric::at_most(&format!("z(lag {})", r.lag), r.z, 3.0))
        .collect();
    metrics.push(Metric::at_most("recurrence", recurrence as u8 as f64, 0.0));
    Ok((metrics, ()))
}

struct SedRuns {
    runs: Vec<SedSummary>,
    diffusion: DiffusionEstimate,
}

const SED_RATIO: f64 = 1e-3;
const SED_CUTOFF: f64 = 20.0;

fn sed_runs(params: &PhysicalParams, omega0: f64, n: usize, seed: u64) -> Result<Vec<SedSummary>, RunError> {
    let gamma = SED_RATIO * omega0;
    let params = params.with_damping(gamma, omega0);
    let duration = 40.0 / gamma;
    let mut cfg = SedConfig::standard(&params, omega0, duration, 1e-2 / omega0);
    cfg.histogram = Some((-4.0, 4.0, 16));
    let spec = ZpfSpec::for_duration(SED_CUTOFF * omega0, duration, &params, seed)?;
    Ok(sed_ensemble(&params, &cfg, &spec, n)?)
}

fn sed_ground_state(opts: &SuiteOptions) -> Result<(Vec<Metric>, SedRuns), RunError> {
    let natural = PhysicalParams::natural();
    let oracle = lineshape_x2(&natural.with_damping(SED_RATIO, 1.0), 1.0, SED_CUTOFF);
    let runs = sed_runs(&natural, 1.0, opts.shrink(opts.sed_realizations), opts.seed_for(8))?;
    let diffusion = fix_diffusion_constant(&runs, 1.0)?;
    let l1 = l1_distance(&pooled_histogram(&runs), &gaussian_bin_probabilities(0.5, -4.0, 4.0, 16));
    let spread_tol = if opts.fast { 0.15 } else { 0.05 };
    Ok((
        vec![
            Metric::at_most("rel|lineshape-1/2|", (oracle - 0.5).abs() / 0.5, 0.01),
            Metric::at_most("rel|<x^2>-1/2|", (diffusion.value - 0.5).abs() / 0.5, spread_tol),
            Metric::at_most("L1(hist, quantum)", l1, opts.widen(0.05)),
            Metric::at_most("nonstationary", ensemble_nonstationary(&runs) as u8 as f64, 0.0),
            Metric::at_most("recurrence", runs.iter().any(|r| r.recurrence_flag) as u8 as f64, 0.0),
        ],
        SedRuns { runs, diffusion },
    ))
}

fn energy_balance(opts: &SuiteOptions, sed: &SedRuns) -> Result<(Vec<Metric>, ()), RunError> {
    let report = BalanceReport::from_runs(&sed.runs, 1.0)?;
    Ok((
        vec![
            Metric::at_most("|P_abs-P_rad|/P_rad", report.imbalance, opts.widen(0.1)),
            Metric::new("early P_abs/P_rad", report.early_p_abs / report.early_p_rad, Comparison::Above, 1.0),
        ],
        (),
    ))
}

fn closing_the_loop(opts: &SuiteOptions, sed: &SedRuns) -> Result<(Vec<Metric>, ()), RunError> {
    let base = sed.diffusion;
    let n_var = opts.shrink(opts.variant_realizations);
    let natural = PhysicalParams::natural();
    let doubled_omega = fix_diffusion_constant(&sed_runs(&natural, 2.0, n_var, opts.seed_for(101))?, 2.0)?;
    let heavy_hbar = PhysicalParams::quantum(2.0, 1.0);
    let doubled_hbar = fix_diffusion_constant(&sed_runs(&heavy_hbar, 1.0, n_var, opts.seed_for(102))?, 1.0)?;
    let z = |a: f64, ea: f64, b: f64, eb: f64| (a - b).abs() / (ea * ea + eb * eb).sqrt();
    let invariance = z(doubled_omega.value, doubled_omega.std_err, base.value, base.std_err);
    let scaling = z(doubled_hbar.value, doubled_hbar.std_err, 2.0 * base.value, 2.0 * base.std_err);

    let injected = natural.with_diffusion(base.value);
    let ens = ground_nelson(injected, opts.shrink(opts.n_traj), opts.seed_for(103), Fault::None)?;
    let from = ens.record_at_or_after(0.5);
    let (nx2, nerr) = second_moment(&ens, from);
    let (sx2, serr) = mean_and_stderr_x2(&sed.runs);
    let hist = position_histogram(&ens, from, &BinSpec::new(-4.0, 4.0, 16)?);
    let l1 = l1_distance(&hist, &pooled_histogram(&sed.runs));
    Ok((
        vec![
            Metric::at_most("rel|D_inferred-0.5|", (base.value - 0.5).abs() / 0.5, opts.widen(0.05)),
            Metric::at_most("z(D(2w0) vs D(w0))", invariance, 3.0),
            Metric::at_most("z(D(2hbar) vs 2D(hbar))", scaling, 3.0),
            Metric::at_most("z(<x^2> Nelson vs SED)", z(nx2, nerr, sx2, serr), 3.0),
            Metric::at_most("L1(Nelson hist, SED hist)", l1, opts.widen(0.05)),
        ],
        (),
    ))
}

fn mean_and_stderr_x2(runs: &[SedSummary]) -> (f64, f64) {
    let x2: Vec<f64> = runs.iter().map(|r| r.x2_mean).collect();
    stoqlab::stats::mean_and_stderr(&x2)
}

pub const CHECK_NAMES: [&str; 10] = [
    "oscillator-spectrum",
    "variance-decomposition",
    "velocity-identification",
    "dynamical-equivalence",
    "nelson-sampling",
    "two-branches",
    "zpf-covariance",
    "sed-ground-state",
    "energy-balance",
    "closing-the-loop",
];

/// Runs every check in order, calling `on_line` as each one finishes.
pub fn run_suite(opts: &SuiteOptions, mut on_line: impl FnMut(&CheckResult)) -> VerifyReport {
    let start = Instant::now();
    let mut report = Vec::new();
    let cb: &mut dyn FnMut(&CheckResult) = &mut on_line;
    let name = |i: usize| CHECK_NAMES[i - 1];

    timed(1, name(1), Some(5.0), &mut report, cb, spectrum);
    timed(2, name(2), None, &mut report, cb, variance_decomposition);
    timed(3, name(3), None, &mut report, cb, velocity_identification);
    timed(4, name(4), None, &mut report, cb, dynamical_equivalence);
    let nelson = timed(5, name(5), Some(60.0), &mut report, cb, || nelson_check(opts));
    timed(6, name(6), None, &mut report, cb, || brownian_check(opts, nelson.as_ref()));
    timed(7, name(7), Some(30.0), &mut report, cb, || zpf_check(opts));
    let sed_budget = if opts.fast { 60.0 } else { 600.0 };
    let sed = timed(8, name(8), Some(sed_budget), &mut report, cb, || sed_ground_state(opts));
    match &sed {
        Some(sed) => {
            timed(9, name(9), None, &mut report, cb, || energy_balance(opts, sed));
            timed(10, name(10), None, &mut report, cb, || closing_the_loop(opts, sed));
        }
        None => {
            skipped(9, name(9), "needs the SED ensemble", &mut report, cb);
            skipped(10, name(10), "needs the SED ensemble", &mut report, cb);
        }
    }

    let pass = report.iter().all(|c| c.status != CheckStatus::Fail) && sed.is_some();
    VerifyReport {
        fast: opts.fast,
        pass,
        runtime_s: start.elapsed().as_secs_f64(),
        checks: report,
    }
}
