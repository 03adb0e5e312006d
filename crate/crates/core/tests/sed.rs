use stoqlab::sed::*;
use stoqlab::stats::mean_and_stderr;
use stoqlab::quadrature::integrate_with_breaks;
use stoqlab::PhysicalParams;

#[test]
fn synthesized_covariance_matches_phi() {
    let params = PhysicalParams::natural();
    let spec = ZpfSpec::for_duration(20.0, 50.0, &params, 4).unwrap();
    let dt = 0.01;
    let lags = [0usize, 1, 5, 20];
    let mut per_lag = vec![Vec::new(); lags.len()];
    for r in 0..100 {
        let field = synthesize(&ZpfRealization::generate(&spec, r), 50.0, dt).unwrap();
        let window = (50.0 / field.dt) as usize - 20;
        for (j, &lag) in lags.iter().enumerate() {
            let c = (0..window).map(|i| field.values[i] * field.values[i + lag]).sum::<f64>() / window as f64;
            per_lag[j].push(c);
        }
        assert!(!field.recurrence_flag);
    }
    let field_dt = synthesize(&ZpfRealization::generate(&spec, 0), 50.0, dt).unwrap().dt;
    for (j, &lag) in lags.iter().enumerate() {
        let (mean, err) = mean_and_stderr(&per_lag[j]);
        let phi = covariance_phi(lag as f64 * field_dt, &spec);
        assert!((mean - phi).abs() < 3.0 * err, "lag {lag}: {mean} ± {err} vs {phi}");
    }
}

#[test]
fn distinct_realizations_are_uncorrelated() {
    let params = PhysicalParams::natural();
    let spec = ZpfSpec::for_duration(10.0, 40.0, &params, 1).unwrap();
    let a = synthesize(&ZpfRealization::generate(&spec, 0), 40.0, 0.01).unwrap();
    let b = synthesize(&ZpfRealization::generate(&spec, 1), 40.0, 0.01).unwrap();
    let n = a.values.len().min(b.values.len());
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>();
    let corr = dot(&a.values[..n], &b.values[..n]) / (dot(&a.values[..n], &a.values[..n]) * dot(&b.values[..n], &b.values[..n])).sqrt();
    assert!(corr.abs() < 0.1, "correlation {corr}");
}

#[test]
fn lineshape_oracle_gives_the_ground_state_spread() {
    for (hbar, omega0) in [(1.0, 1.0), (1.0, 2.0), (2.0, 1.0)] {
        let params = PhysicalParams::quantum(hbar, 1.0).with_damping(1e-3 * omega0, omega0);
        let x2 = lineshape_x2(&params, omega0, 20.0 * omega0);
        let target = hbar / (2.0 * omega0);
        assert!((x2 - target).abs() < 0.01 * target, "ħ={hbar} ω₀={omega0}: {x2}");
    }
}

fn velocity_lineshape(gamma: f64, cutoff: f64, charge: f64) -> f64 {
    let pre = 2.0 / (3.0 * std::f64::consts::PI) * charge * charge;
    let f = |w: f64| pre * w.powi(5) / ((1.0 - w * w).powi(2) + (gamma * w).powi(2));
    let breaks = [0.0, 1.0 - 5.0 * gamma, 1.0, 1.0 + 5.0 * gamma, cutoff];
    integrate_with_breaks(f, &breaks, 0.0, 1e-10).0
}

#[test]
fn small_ensemble_matches_the_lineshape_oracles() {
    let gamma = 0.05;
    let params = PhysicalParams::natural().with_damping(gamma, 1.0);
    let duration = 40.0 / gamma;
    let mut cfg = SedConfig::standard(&params, 1.0, duration, 1e-2);
    cfg.histogram = Some((-4.0, 4.0, 16));
    let spec = ZpfSpec::for_duration(5.0, duration, &params, 2).unwrap();
    let runs = sed_ensemble(&params, &cfg, &spec, 12).unwrap();
    let x2: Vec<f64> = runs.iter().map(|r| r.x2_mean).collect();
    let v2: Vec<f64> = runs.iter().map(|r| r.v2_mean).collect();
    let oracle = lineshape_x2(&params, 1.0, 5.0);
    let (mx, ex) = mean_and_stderr(&x2);
    assert!((mx - oracle).abs() < 4.0 * ex, "<x²> = {mx} ± {ex}, oracle {oracle}");
    let (mv, ev) = mean_and_stderr(&v2);
    let v2_oracle = velocity_lineshape(gamma, 5.0, params.charge);
    assert!((mv - v2_oracle).abs() < 4.0 * ev, "<v²> = {mv} ± {ev}, oracle {v2_oracle}");
    let report = BalanceReport::from_runs(&runs, 1.0).unwrap();
    assert!(report.imbalance < 0.1, "imbalance {}", report.imbalance);
    assert!(report.early_p_abs > report.early_p_rad);
    let d = fix_diffusion_constant(&runs, 1.0).unwrap();
    assert!((d.value - 0.5).abs() < 4.0 * d.std_err + 0.05);
}

#[test]
fn strong_damping_is_rejected() {
    let params = PhysicalParams::natural().with_damping(0.5, 1.0);
    let cfg = SedConfig::standard(&params, 1.0, 100.0, 1e-2);
    let err = sed_integrate(&params, &cfg, None).unwrap_err();
    assert!(matches!(err, stoqlab::Error::Precondition(_)));
}

#[test]
fn undriven_oscillator_decays_at_gamma() {
    let gamma = 0.01;
    let params = PhysicalParams::natural().with_damping(gamma, 1.0);
    let mut cfg = SedConfig::standard(&params, 1.0, 300.0, 1e-2);
    cfg.initial = (1.0, 0.0);
    cfg.record_stride = 100;
    let traj = sed_integrate(&params, &cfg, None).unwrap();
    let k = traj.times.len() - 1;
    let energy = 0.5 * (traj.x[k].powi(2) + traj.xdot[k].powi(2));
    let expected = 0.5 * (-gamma * traj.times[k]).exp();
    assert!((energy - expected).abs() < 0.02 * expected, "{energy} vs {expected}");
}
