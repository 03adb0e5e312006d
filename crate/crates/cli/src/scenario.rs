//! Runs one scenario, writing its artifacts and `manifest.json` into the
//! output directory.
//!
//! Random streams: every scenario seeds its sampler or field synthesis with
//! the configured `seed` directly; the verify suite derives one sub-seed per
//! check from it (see [`crate::verify`]).

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::json;
use stoqlab::dynamics::{osmotic_relation_residual, residual_continuity, residual_time_symmetric, FieldSnapshotPair};
use stoqlab::quantum::{
    momentum_stats, quantum_potential, solve_eigenstates, write_field_csv, CayleyStepper, Wavefunction,
};
use stoqlab::samplers::{
    brownian_sample, estimate_diffusion, estimate_flux_velocity, estimate_osmotic_velocity, nelson_sample,
    position_histogram, second_moment, BinSpec, DriftFields, SamplerConfig, TrajectoryEnsemble,
};
use stoqlab::sed::{
    ensemble_nonstationary, fix_diffusion_constant, lineshape_x2, sed_ensemble, sed_integrate, BalanceReport,
    SedConfig, SedSummary, ZpfRealization, ZpfSpec,
};
use stoqlab::stats::{gaussian_bin_probabilities, l1_distance, mean_and_stderr};

use crate::analysis::{pooled_histogram, zpf_covariance, ZPF_CSV_HEADER};
use crate::config::{Scenario, ScenarioConfig};
use crate::setup;
use crate::verify::{run_suite, SuiteOptions};
use crate::{ExitStatus, RunError};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const HISTOGRAM_CSV_HEADER: &str = "x,probability,target";

#[derive(Debug, Clone, Serialize)]
pub struct Artifact {
    pub path: String,
    pub description: String,
}

/// The single writer for a run's output directory.
struct Artifacts {
    dir: PathBuf,
    files: Vec<Artifact>,
}

impl Artifacts {
    fn write(
        &mut self,
        name: &str,
        description: &str,
        body: impl FnOnce(&mut dyn Write) -> Result<(), RunError>,
    ) -> Result<(), RunError> {
        let mut out = BufWriter::new(File::create(self.dir.join(name))?);
        body(&mut out)?;
        out.flush()?;
        self.files.push(Artifact {
            path: name.to_string(),
            description: description.to_string(),
        });
        Ok(())
    }

    fn json(&mut self, name: &str, description: &str, value: &serde_json::Value) -> Result<(), RunError> {
        self.write(name, description, |w| {
            serde_json::to_writer_pretty(&mut *w, value).map_err(|e| RunError::Internal(e.to_string()))?;
            writeln!(w)?;
            Ok(())
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub versions: serde_json::Value,
    pub scenario: Scenario,
    pub seed: u64,
    pub config: serde_json::Value,
    pub started_unix: u64,
    pub wall_clock_s: f64,
    pub threads: usize,
    pub artifacts: Vec<Artifact>,
    pub flags: Vec<String>,
    pub status: ExitStatus,
    pub exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub status: ExitStatus,
    pub manifest: Manifest,
    /// Human-readable lines for the terminal (the verify suite's report).
    pub lines: Vec<String>,
}

struct Context {
    artifacts: Artifacts,
    flags: Vec<String>,
    lines: Vec<String>,
}

impl Context {
    fn flag(&mut self, flag: impl Into<String>) {
        self.flags.push(flag.into());
    }
}

/// Runs `cfg` into `cfg.output_dir`. The manifest is written whenever the
/// directory can be created, including after a failed run.
pub fn run_scenario(cfg: &ScenarioConfig) -> RunOutcome {
    let started = Instant::now();
    let started_unix = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let mut ctx = Context {
        artifacts: Artifacts {
            dir: cfg.output_dir.clone(),
            files: Vec::new(),
        },
        flags: Vec::new(),
        lines: Vec::new(),
    };
    let result = std::fs::create_dir_all(&cfg.output_dir)
        .map_err(RunError::from)
        .and_then(|_| dispatch(cfg, &mut ctx));
    let (status, error) = match result {
        Ok(()) if ctx.flags.is_empty() => (ExitStatus::Success, None),
        Ok(()) => (ExitStatus::CheckFailure, None),
        Err(e) => (e.exit_status(), Some(e.to_string())),
    };
    let manifest = Manifest {
        tool: "stoqlab",
        versions: json!({ "stoqlab-cli": env!("CARGO_PKG_VERSION"), "stoqlab": stoqlab::VERSION }),
        scenario: cfg.scenario,
        seed: cfg.seed,
        config: cfg.to_json(),
        started_unix,
        wall_clock_s: started.elapsed().as_secs_f64(),
        threads: rayon::current_num_threads(),
        artifacts: ctx.artifacts.files,
        flags: ctx.flags,
        status,
        exit_code: status.code(),
        error,
    };
    let mut status = status;
    if cfg.output_dir.is_dir() {
        let written = serde_json::to_string_pretty(&manifest)
            .map_err(|e| e.to_string())
            .and_then(|text| std::fs::write(cfg.output_dir.join(MANIFEST_FILE), text + "\n").map_err(|e| e.to_string()));
        if written.is_err() && status == ExitStatus::Success {
            status = ExitStatus::InternalError;
        }
    }
    RunOutcome {
        status,
        manifest,
        lines: ctx.lines,
    }
}

fn dispatch(cfg: &ScenarioConfig, ctx: &mut Context) -> Result<(), RunError> {
    match cfg.scenario {
        Scenario::Eigen => eigen(cfg, ctx),
        Scenario::Evolve => evolve(cfg, ctx),
        Scenario::Fields => fields(cfg, ctx),
        Scenario::Nelson => nelson(cfg, ctx),
        Scenario::Brownian => brownian(cfg, ctx),
        Scenario::Sed => sed(cfg, ctx, false),
        Scenario::Balance => sed(cfg, ctx, true),
        Scenario::ZpfCheck => zpf_check(cfg, ctx),
        Scenario::Verify => verify(cfg, ctx),
    }
}

fn e16(x: f64) -> String {
    format!("{x:.16e}")
}

fn eigen(cfg: &ScenarioConfig, ctx: &mut Context) -> Result<(), RunError> {
    let params = setup::params(cfg)?;
    let grid = setup::grid(cfg)?;
    let v = setup::potential(cfg, grid)?;
    let states = solve_eigenstates(&v, &params, cfg.eigen_count)?;
    ctx.artifacts.write("eigenvalues.csv", "eigenvalues: n,energy", |w| {
        writeln!(w, "n,energy")?;
        for s in &states {
            writeln!(w, "{},{}", s.index, e16(s.energy))?;
        }
        Ok(())
    })?;
    for s in &states {
        let psi = s.wavefunction(params);
        ctx.artifacts.write(
            &format!("eigenstate_{}.csv", s.index),
            &format!("fields of eigenstate {}", s.index),
            |w| Ok(write_field_csv(&psi, w)?),
        )?;
    }
    Ok(())
}

fn evolve(cfg: &ScenarioConfig, ctx: &mut Context) -> Result<(), RunError> {
    let params = setup::params(cfg)?;
    let grid = setup::grid(cfg)?;
    let v = setup::potential(cfg, grid)?;
    let (psi0, _) = setup::state(cfg, params, &v)?;
    let stepper = CayleyStepper::new(&v, &params, cfg.integrator.dt)?;
    let stride = cfg.integrator.record_stride;
    let e0 = stepper.energy(&psi0);
    let mut rows = Vec::new();
    let mut psi = psi0.clone();
    let mut step = 0;
    let mut record = |step: usize, psi: &Wavefunction| {
        rows.push(format!(
            "{step},{},{},{},{},{}",
            e16(psi.time()),
            e16(psi.norm()),
            e16(stepper.energy(psi)),
            e16(psi.expectation_x()),
            e16(psi.variance_x())
        ));
    };
    record(0, &psi);
    while step < cfg.integrator.steps {
        let n = stride.min(cfg.integrator.steps - step);
        psi = stepper.advance(&psi, n)?;
        step += n;
        record(step, &psi);
    }
    ctx.artifacts.write("observables.csv", "step,t,norm,energy,mean_x,var_x", |w| {
        writeln!(w, "step,t,norm,energy,mean_x,var_x")?;
        for r in &rows {
            writeln!(w, "{r}")?;
        }
        Ok(())
    })?;
    ctx.artifacts.write("final_state.csv", "fields of the evolved state", |w| Ok(write_field_csv(&psi, w)?))?;
    if (psi.norm() - 1.0).abs() > stoqlab::quantum::NORM_TOLERANCE {
        ctx.flag("norm_drift");
    }
    if (stepper.energy(&psi) - e0).abs() > 1e-6 * e0.abs().max(1.0) {
        ctx.flag("energy_drift");
    }
    Ok(())
}

fn fields(cfg: &ScenarioConfig, ctx: &mut Context) -> Result<(), RunError> {
    let params = setup::params(cfg)?;
    let grid = setup::grid(cfg)?;
    let v = setup::potential(cfg, grid)?;
    let (psi, _) = setup::state(cfg, params, &v)?;
    let after = CayleyStepper::new(&v, &params, cfg.integrator.dt)?.advance(&psi, 1)?;
    let pair = FieldSnapshotPair::from_wavefunctions(&psi, &after, &v)?;
    let reports = [
        ("osmotic_relation", osmotic_relation_residual(&psi.density(), &stoqlab::quantum::osmotic_velocity(&psi)?, params.diffusion)?),
        ("time_symmetric", residual_time_symmetric(&pair)?),
        ("continuity", residual_continuity(&pair)?),
    ];
    let qp = quantum_potential(&psi.density(), &params)?;
    let mut summary = serde_json::Map::new();
    for (name, report) in &reports {
        summary.insert(name.to_string(), report.to_json());
        if !report.is_valid() {
            ctx.flag(format!("invalid_residual_report:{name}"));
        }
    }
    summary.insert("quantum_potential_max_discrepancy".into(), json!(qp.max_discrepancy()));
    summary.insert("momentum".into(), serde_json::to_value(momentum_stats(&psi)?).expect("serializes"));
    ctx.artifacts.write("fields.csv", "fields of the configured state", |w| Ok(write_field_csv(&psi, w)?))?;
    ctx.artifacts.json("residuals.json", "residual reports and moments", &summary.into())
}

fn write_histogram(ctx: &mut Context, name: &str, bins: &BinSpec, hist: &[f64], target: &[f64]) -> Result<(), RunError> {
    ctx.artifacts.write(name, HISTOGRAM_CSV_HEADER, |w| {
        writeln!(w, "{HISTOGRAM_CSV_HEADER}")?;
        for b in 0..bins.count {
            writeln!(w, "{},{},{}", e16(bins.center(b)), e16(hist[b]), e16(target[b]))?;
        }
        Ok(())
    })
}

/// Artifacts shared by both sampler scenarios.
fn sampler_outputs(
    cfg: &ScenarioConfig,
    ctx: &mut Context,
    ens: &TrajectoryEnsemble,
    target: &[f64],
    from: usize,
) -> Result<(), RunError> {
    let bins = setup::bins(cfg)?;
    let hist = position_histogram(ens, from, &bins);
    write_histogram(ctx, "histogram.csv", &bins, &hist, target)?;
    let v = estimate_flux_velocity(ens, &bins)?;
    ctx.artifacts.write("flux_velocity.csv", "binned v estimate", |w| Ok(v.write_csv(w)?))?;
    let u = estimate_osmotic_velocity(ens, &bins)?;
    ctx.artifacts.write("osmotic_velocity.csv", "binned u estimate", |w| Ok(u.write_csv(w)?))?;
    if cfg.ensemble.write_paths {
        ctx.artifacts.write("trajectories.csv", "recorded paths", |w| Ok(ens.write_csv(w)?))?;
    }
    let (x2, x2_err) = second_moment(ens, from);
    let summary = json!({
        "process": ens.process_tag(),
        "n_traj": ens.n_traj(),
        "record_dt": ens.record_dt(),
        "D_hat": estimate_diffusion(ens),
        "x2_mean": x2,
        "x2_std_err": x2_err,
        "l1_to_target": l1_distance(&hist, target),
        "exit_fraction": ens.exit_fraction(),
        "flagged": ens.flagged(),
    });
    ctx.artifacts.json("summary.json", "ensemble summary", &summary)?;
    if ens.flagged() {
        ctx.flag("exit_fraction_exceeded");
    }
    Ok(())
}

fn sampler_config(cfg: &ScenarioConfig) -> SamplerConfig {
    SamplerConfig::new(cfg.ensemble.n_traj, cfg.integrator.dt, cfg.integrator.steps, cfg.seed)
        .with_stride(cfg.integrator.record_stride)
}

fn nelson(cfg: &ScenarioConfig, ctx: &mut Context) -> Result<(), RunError> {
    let params = setup::params(cfg)?;
    let grid = setup::grid(cfg)?;
    let v = setup::potential(cfg, grid)?;
    let (psi0, stationary) = setup::state(cfg, params, &v)?;
    let sampler = sampler_config(cfg);
    let bins = setup::bins(cfg)?;
    let (fields, target_rho) = if stationary {
        (DriftFields::from_wavefunction(&psi0)?, psi0.density())
    } else {
        let stepper = CayleyStepper::new(&v, &params, cfg.integrator.dt)?;
        let mut snapshots = vec![psi0.clone()];
        let mut step = 0;
        while step < cfg.integrator.steps {
            let n = cfg.integrator.record_stride.min(cfg.integrator.steps - step);
            snapshots.push(stepper.advance(snapshots.last().unwrap(), n)?);
            step += n;
        }
        let last = snapshots.last().unwrap().density();
        (DriftFields::time_indexed(&snapshots)?, last)
    };
    let ens = nelson_sample(&fields, &psi0.density(), &params, &sampler)?;
    let from = if stationary {
        ens.record_at_or_after(cfg.ensemble.burn_in)
    } else {
        ens.n_records() - 1
    };
    let target = setup::bin_probabilities(&target_rho, &bins);
    sampler_outputs(cfg, ctx, &ens, &target, from)
}

fn brownian(cfg: &ScenarioConfig, ctx: &mut Context) -> Result<(), RunError> {
    let base = setup::params(cfg)?;
    let grid = setup::grid(cfg)?;
    let v = setup::potential(cfg, grid)?;
    let (psi0, _) = setup::state(cfg, base, &v)?;
    let params = stoqlab::PhysicalParams::brownian(base.mass, base.diffusion);
    let force = stoqlab::grid::derivative(&v)?.map(|f| -f)?;
    let ens = brownian_sample(&force, cfg.friction, &psi0.density(), &params, &sampler_config(cfg))?;
    let scale = params.mass * cfg.friction * params.diffusion;
    let v_min = v.values().iter().copied().fold(f64::INFINITY, f64::min);
    let boltzmann = v.map(|x| (-(x - v_min) / scale).exp())?;
    let target = setup::bin_probabilities(&boltzmann, &setup::bins(cfg)?);
    sampler_outputs(cfg, ctx, &ens, &target, ens.record_at_or_after(cfg.ensemble.burn_in))
}

fn sed(cfg: &ScenarioConfig, ctx: &mut Context, balance_only: bool) -> Result<(), RunError> {
    let base = setup::params(cfg)?;
    let omega0 = setup::harmonic_omega(cfg)?;
    let s = &cfg.sed;
    let params = base.with_damping(s.gamma, omega0);
    let mut sed_cfg = SedConfig::standard(&params, omega0, s.duration, s.dt);
    let half = s.histogram_half_width;
    sed_cfg.histogram = Some((-half, half, s.histogram_bins));
    let probe = SedConfig {
        duration: 10.0 * s.dt,
        burn_in: 0.0,
        early_window: 10.0 * s.dt,
        histogram: None,
        ..sed_cfg
    };
    sed_integrate(&params, &probe, None)?;
    let spec = ZpfSpec::for_duration(s.omega_cutoff, s.duration, &params, cfg.seed)?;
    let runs = sed_ensemble(&params, &sed_cfg, &spec, s.realizations)?;
    let report = BalanceReport::from_runs(&runs, omega0)?;
    let d = fix_diffusion_constant(&runs, omega0)?;
    let nonstationary = ensemble_nonstationary(&runs);
    let recurrence = runs.iter().any(|r| r.recurrence_flag);
    if nonstationary {
        ctx.flag("nonstationary");
    }
    if recurrence {
        ctx.flag("zpf_recurrence");
    }

    let mut balance = report.to_json();
    balance["early_P_abs"] = json!(report.early_p_abs);
    balance["early_P_rad"] = json!(report.early_p_rad);
    balance["early_absorption_exceeds_radiation"] = json!(report.early_p_abs > report.early_p_rad);
    balance["D"] = json!(d);
    balance["nonstationary"] = json!(nonstationary);
    if balance_only {
        return ctx.artifacts.json("balance.json", "power balance and inferred D", &balance);
    }

    let x2: Vec<f64> = runs.iter().map(|r| r.x2_mean).collect();
    let (x2_mean, x2_err) = mean_and_stderr(&x2);
    let target_var = params.hbar / (2.0 * params.mass * omega0);
    let bins = BinSpec::new(-half, half, s.histogram_bins)?;
    let hist = pooled_histogram(&runs);
    let target = gaussian_bin_probabilities(target_var, -half, half, s.histogram_bins);
    write_histogram(ctx, "sed_histogram.csv", &bins, &hist, &target)?;
    ctx.artifacts.write("sed_runs.csv", "per-realization averages", |w| write_runs(w, &runs))?;
    if s.trajectory_stride > 0 {
        let traj_cfg = SedConfig {
            record_stride: s.trajectory_stride,
            ..sed_cfg
        };
        let traj = sed_integrate(&params, &traj_cfg, Some(&ZpfRealization::generate(&spec, 0)))?;
        ctx.artifacts.write("sed_trajectory.csv", "realization 0: t,x,xdot", |w| Ok(traj.write_csv(w)?))?;
    }
    let summary = json!({
        "realizations": runs.len(),
        "x2_mean": x2_mean,
        "x2_std_err": x2_err,
        "x2_quantum": target_var,
        "x2_lineshape": lineshape_x2(&params, omega0, s.omega_cutoff),
        "l1_to_quantum": l1_distance(&hist, &target),
        "balance": balance,
        "recurrence": recurrence,
    });
    ctx.artifacts.json("sed_summary.json", "ensemble summary", &summary)
}

fn write_runs(w: &mut dyn Write, runs: &[SedSummary]) -> Result<(), RunError> {
    writeln!(w, "realization,x2_mean,v2_mean,p_abs,p_rad,nonstationary")?;
    for (i, r) in runs.iter().enumerate() {
        writeln!(
            w,
            "{i},{},{},{},{},{}",
            e16(r.x2_mean),
            e16(r.v2_mean),
            e16(r.p_abs),
            e16(r.p_rad),
            r.nonstationary
        )?;
    }
    Ok(())
}

fn zpf_check(cfg: &ScenarioConfig, ctx: &mut Context) -> Result<(), RunError> {
    let params = setup::params(cfg)?;
    let z = &cfg.zpf;
    let spec = ZpfSpec::for_duration(z.omega_cutoff, z.duration, &params, cfg.seed)?;
    let (rows, recurrence) = zpf_covariance(&spec, z.duration, z.dt, z.realizations, &z.lags)?;
    ctx.artifacts.write("zpf_covariance.csv", ZPF_CSV_HEADER, |w| {
        writeln!(w, "{ZPF_CSV_HEADER}")?;
        for r in &rows {
            writeln!(w, "{},{},{},{},{},{}", r.lag, e16(r.tau), e16(r.empirical), e16(r.std_err), e16(r.phi), e16(r.z))?;
        }
        Ok(())
    })?;
    if rows.iter().any(|r| r.z > 3.0) {
        ctx.flag("covariance_mismatch");
    }
    if recurrence {
        ctx.flag("zpf_recurrence");
    }
    Ok(())
}

fn verify(cfg: &ScenarioConfig, ctx: &mut Context) -> Result<(), RunError> {
    let opts = SuiteOptions::from_config(cfg);
    let report = run_suite(&opts, |_| {});
    ctx.lines = report.lines();
    for name in report.failing() {
        ctx.flag(format!("check_failed:{name}"));
    }
    ctx.artifacts.json("verify.json", "acceptance suite report", &report.to_json())
}

/// Reads and parses a config file for `scenario`.
pub fn load_config(path: &Path, scenario: Scenario) -> Result<ScenarioConfig, crate::ConfigErrors> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        crate::ConfigErrors(vec![crate::ConfigError {
            key: "<file>".into(),
            message: format!("cannot read {}: {e}", path.display()),
            remedy: "pass an existing config file".into(),
        }])
    })?;
    crate::parse_config_with(&text, Some(scenario))
}
