use std::f64::consts::PI;

use crate::params::PhysicalParams;
use crate::quadrature::integrate_with_breaks;

/// ⟨x²⟩ of the stationary driven oscillator by direct quadrature of
/// (e/m)² ∫₀^{ω_c} S(ω) / ((ω₀² − ω²)² + Γ²ω²) dω.
pub fn lineshape_x2(params: &PhysicalParams, omega0: f64, omega_cutoff: f64) -> f64 {
    let gamma = params.damping_rate(omega0);
    let prefactor = 2.0 * params.hbar / (3.0 * PI * params.light_speed.powi(3));
    let coupling = (params.charge / params.mass).powi(2);
    let integrand = |w: f64| prefactor * w.powi(3) / ((omega0 * omega0 - w * w).powi(2) + (gamma * w).powi(2));
    let mut breaks = vec![0.0];
    for k in [-50.0, -5.0, -1.0, 0.0, 1.0, 5.0, 50.0] {
        let w = omega0 + k * gamma;
        if w > 0.0 && w < omega_cutoff {
            breaks.push(w);
        }
    }
    breaks.push(omega_cutoff);
    breaks.dedup();
    let (value, _) = integrate_with_breaks(integrand, &breaks, 0.0, 1e-12);
    coupling * value
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn narrow_resonance_gives_the_ground_state_spread() {
        for (gamma, omega0, hbar) in [(1e-3, 1.0, 1.0), (1e-3, 2.0, 1.0), (1e-4, 1.0, 2.0)] {
            let mut params = PhysicalParams::quantum(hbar, 1.0);
            params = params.with_damping(gamma * omega0, omega0);
            let x2 = lineshape_x2(&params, omega0, 20.0 * omega0);
            let target = hbar / (2.0 * omega0);
            assert!((x2 - target).abs() / target < 0.01, "⟨x²⟩ = {x2}, target {target}");
        }
    }
}
