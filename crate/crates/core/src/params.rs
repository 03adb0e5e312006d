//! Physical constants shared by every module.
//!
//! All formulas carry the symbolic constants, so SI-like parameter sets run
//! unchanged; the presets use natural units ħ = m = c = 1.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sign of the diffusive acceleration in the time-symmetric dynamical law.
///
/// `Quantum` (λ = +1) leads to the Schrödinger-like equation, `Brownian`
/// (λ = −1) to irreversible Brownian-type dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    Quantum,
    Brownian,
}

impl Branch {
    pub fn lambda(self) -> f64 {
        match self {
            Branch::Quantum => 1.0,
            Branch::Brownian => -1.0,
        }
    }

    pub fn from_lambda(lambda: i64) -> Result<Self> {
        match lambda {
            1 => Ok(Branch::Quantum),
            -1 => Ok(Branch::Brownian),
            other => Err(Error::InvalidParameter {
                name: "lambda_branch",
                reason: format!("lambda_branch must be +1 or -1 (got {other})"),
            }),
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Branch::Quantum => Branch::Brownian,
            Branch::Brownian => Branch::Quantum,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub hbar: f64,
    pub mass: f64,
    pub charge: f64,
    pub light_speed: f64,
    pub branch: Branch,
    /// Diffusion coefficient D of the stochastic process.
    pub diffusion: f64,
    /// Radiation-reaction time τ = 2e²/(3mc³).
    pub tau: f64,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self::natural()
    }
}

impl PhysicalParams {
    /// ħ = m = c = 1, uncharged, quantum branch with D = ħ/2m.
    pub fn natural() -> Self {
        Self::quantum(1.0, 1.0)
    }

    /// Quantum preset: λ = +1 and D fixed to ħ/2m.
    pub fn quantum(hbar: f64, mass: f64) -> Self {
        Self {
            hbar,
            mass,
            charge: 0.0,
            light_speed: 1.0,
            branch: Branch::Quantum,
            diffusion: hbar / (2.0 * mass),
            tau: 0.0,
        }
    }

    /// Brownian preset: λ = −1 with a diffusion coefficient set independently of ħ.
    pub fn brownian(mass: f64, diffusion: f64) -> Self {
        Self {
            branch: Branch::Brownian,
            diffusion,
            ..Self::quantum(1.0, mass)
        }
    }

    /// Generic-D variant of the Schrödinger-like equation.
    pub fn with_diffusion(mut self, diffusion: f64) -> Self {
        self.diffusion = diffusion;
        self
    }

    pub fn with_branch(mut self, branch: Branch) -> Self {
        self.branch = branch;
        self
    }

    /// Sets the charge and recomputes τ.
    pub fn with_charge(mut self, charge: f64) -> Self {
        self.charge = charge;
        self.tau = radiation_time(charge, self.mass, self.light_speed);
        self
    }

    /// Picks the charge so that the reduced damping rate Γ = τω₀² equals `gamma`.
    pub fn with_damping(self, gamma: f64, omega0: f64) -> Self {
        let tau = gamma / (omega0 * omega0);
        let charge = (1.5 * self.mass * self.light_speed.powi(3) * tau).sqrt();
        self.with_charge(charge)
    }

    /// The action 2mD that replaces ħ in the generic-D Schrödinger-like equation.
    /// Equals ħ exactly when D = ħ/2m.
    pub fn action(&self) -> f64 {
        2.0 * self.mass * self.diffusion
    }

    /// Damping rate Γ = τω₀² of the order-τ reduced radiation reaction.
    pub fn damping_rate(&self, omega0: f64) -> f64 {
        self.tau * omega0 * omega0
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("hbar", self.hbar),
            ("mass", self.mass),
            ("light_speed", self.light_speed),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be finite and > 0 (got {value})"),
                });
            }
        }
        let non_negative = [
            ("charge", self.charge),
            ("diffusion", self.diffusion),
            ("tau", self.tau),
        ];
        for (name, value) in non_negative {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be finite and >= 0 (got {value})"),
                });
            }
        }
        if self.charge > 0.0 {
            let expected = radiation_time(self.charge, self.mass, self.light_speed);
            if (expected - self.tau).abs() > 1e-12 * expected.abs().max(f64::MIN_POSITIVE) {
                return Err(Error::InvalidParameter {
                    name: "tau",
                    reason: format!("tau = {} disagrees with 2e^2/(3mc^3) = {expected}", self.tau),
                });
            }
        }
        Ok(())
    }
}

/// τ = 2e²/(3mc³).
pub fn radiation_time(charge: f64, mass: f64, light_speed: f64) -> f64 {
    2.0 * charge * charge / (3.0 * mass * light_speed.powi(3))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantum_preset_fixes_diffusion() {
        let p = PhysicalParams::quantum(2.0, 4.0);
        assert_eq!(p.diffusion, 0.25);
        assert_eq!(p.action(), 2.0);
        assert_eq!(p.branch.lambda(), 1.0);
    }

    #[test]
    fn tau_is_recomputed_from_charge() {
        let p = PhysicalParams::natural().with_charge(0.3);
        assert_eq!(p.tau, 2.0 * 0.09 / 3.0);
        p.validate().unwrap();

        let mut bad = p;
        bad.tau *= 1.5;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn damping_target_round_trips() {
        let p = PhysicalParams::natural().with_damping(1e-3, 2.0);
        assert!((p.damping_rate(2.0) - 1e-3).abs() < 1e-15);
        p.validate().unwrap();
    }

    #[test]
    fn lambda_must_be_unit() {
        assert_eq!(Branch::from_lambda(1).unwrap(), Branch::Quantum);
        assert_eq!(Branch::from_lambda(-1).unwrap(), Branch::Brownian);
        let err = Branch::from_lambda(2).unwrap_err().to_string();
        assert!(err.contains("lambda_branch must be +1 or -1"), "{err}");
        for b in [Branch::Quantum, Branch::Brownian] {
            assert_eq!(b.lambda() * b.lambda(), 1.0);
        }
    }
}
