use serde::Serialize;

use crate::error::{Error, Result};
use crate::stats::mean_and_stderr;

use super::oscillator::SedSummary;

/// Ensemble-averaged power balance over the stationary window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BalanceReport {
    #[serde(rename = "P_abs")]
    pub p_abs: f64,
    #[serde(rename = "P_rad")]
    pub p_rad: f64,
    /// |P_abs − P_rad| / P_rad.
    pub imbalance: f64,
    pub x2_mean: f64,
    #[serde(rename = "D_inferred")]
    pub d_inferred: f64,
    #[serde(skip)]
    pub early_p_abs: f64,
    #[serde(skip)]
    pub early_p_rad: f64,
}

impl BalanceReport {
    pub fn from_runs(runs: &[SedSummary], omega0: f64) -> Result<Self> {
        if runs.is_empty() {
            return Err(Error::Precondition("no runs to average".into()));
        }
        let avg = |f: fn(&SedSummary) -> f64| runs.iter().map(f).sum::<f64>() / runs.len() as f64;
        let p_abs = avg(|r| r.p_abs);
        let p_rad = avg(|r| r.p_rad);
        let x2_mean = avg(|r| r.x2_mean);
        Ok(Self {
            p_abs,
            p_rad,
            imbalance: (p_abs - p_rad).abs() / p_rad,
            x2_mean,
            d_inferred: omega0 * x2_mean,
            early_p_abs: avg(|r| r.early_p_abs),
            early_p_rad: avg(|r| r.early_p_rad),
        })
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiffusionEstimate {
    pub value: f64,
    pub std_err: f64,
}

/// D = ω₀⟨x²⟩: the stationary spread ħ/2mω₀ of the oscillator read as the
/// diffusion constant ħ/2m. Uncertainty from the spread across runs.
pub fn fix_diffusion_constant(runs: &[SedSummary], omega0: f64) -> Result<DiffusionEstimate> {
    if runs.len() < 2 {
        return Err(Error::Precondition("need at least two runs for an uncertainty".into()));
    }
    let d: Vec<f64> = runs.iter().map(|r| omega0 * r.x2_mean).collect();
    let (value, std_err) = mean_and_stderr(&d);
    Ok(DiffusionEstimate { value, std_err })
}
