//! Ensemble reductions shared by scenarios and the verification suite.

use serde::Serialize;
use stoqlab::sed::{covariance_phi, synthesize, ZpfRealization, ZpfSpec};
use stoqlab::stats::mean_and_stderr;

use crate::RunError;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct LagCovariance {
    pub lag: usize,
    pub tau: f64,
    pub empirical: f64,
    pub std_err: f64,
    pub phi: f64,
    pub z: f64,
}

pub const ZPF_CSV_HEADER: &str = "lag,tau,empirical,std_err,phi,z";

/// Time-averaged E(t)E(t+τ) per realization over [0, duration − τ_max],
/// then mean and standard error across realizations.
pub fn zpf_covariance(
    spec: &ZpfSpec,
    duration: f64,
    dt: f64,
    realizations: usize,
    lags: &[usize],
) -> Result<(Vec<LagCovariance>, bool), RunError> {
    let max_lag = lags.iter().copied().max().unwrap_or(0);
    let mut per_lag = vec![Vec::with_capacity(realizations); lags.len()];
    let mut sample_dt = dt;
    let mut recurrence = false;
    for r in 0..realizations as u64 {
        let field = synthesize(&ZpfRealization::generate(spec, r), duration, dt)?;
        sample_dt = field.dt;
        recurrence |= field.recurrence_flag;
        let usable = ((duration / field.dt).floor() as usize).min(field.values.len());
        if usable <= max_lag + 1 {
            return Err(RunError::Invalid(format!(
                "zpf.duration {duration} holds fewer samples than the largest lag {max_lag}"
            )));
        }
        let window = usable - max_lag;
        for (j, &lag) in lags.iter().enumerate() {
            let c = (0..window).map(|i| field.values[i] * field.values[i + lag]).sum::<f64>() / window as f64;
            per_lag[j].push(c);
        }
    }
    let rows = lags
        .iter()
        .zip(&per_lag)
        .map(|(&lag, samples)| {
            let (empirical, std_err) = mean_and_stderr(samples);
            let tau = lag as f64 * sample_dt;
            let phi = covariance_phi(tau, spec);
            LagCovariance {
                lag,
                tau,
                empirical,
                std_err,
                phi,
                z: (empirical - phi).abs() / std_err,
            }
        })
        .collect();
    Ok((rows, recurrence))
}

/// Pooled bin probabilities from per-run histogram counts.
pub fn pooled_histogram(runs: &[stoqlab::sed::SedSummary]) -> Vec<f64> {
    let bins = runs.first().map_or(0, |r| r.histogram.len());
    let total: u64 = runs.iter().map(|r| r.histogram_total).sum();
    (0..bins)
        .map(|b| runs.iter().map(|r| r.histogram[b]).sum::<u64>() as f64 / total.max(1) as f64)
        .collect()
}
