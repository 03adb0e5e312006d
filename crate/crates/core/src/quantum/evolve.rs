//! Norm-preserving time stepping of 2imD ∂ψ/∂t = Hψ.
//!
//! Each step applies the Cayley form of the propagator,
//! (1 + iΔt H/2A) ψⁿ⁺¹ = (1 − iΔt H/2A) ψⁿ with A = 2mD, which is unitary
//! for Hermitian H. The left-hand band matrix is factored once per run.

use num_complex::Complex64;

use crate::banded::BandLu;
use crate::error::{Error, Result};
use crate::grid::{ComplexField, ScalarField};

use super::hamiltonian::Hamiltonian;
use super::wavefunction::Wavefunction;

/// A reusable stepper for a fixed potential and time step.
#[derive(Debug, Clone)]
pub struct CayleyStepper {
    hamiltonian: Hamiltonian,
    lhs: BandLu<Complex64>,
    half: Complex64,
    dt: f64,
}

impl CayleyStepper {
    pub fn new(potential: &ScalarField, params: &crate::params::PhysicalParams, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "dt",
                reason: format!("must be > 0 (got {dt})"),
            });
        }
        let hamiltonian = Hamiltonian::new(potential, params)?;
        let half = Complex64::new(0.0, 0.5 * dt / params.action());
        let lhs = hamiltonian
            .complex_band(Complex64::new(1.0, 0.0), half)
            .factor()?;
        Ok(Self {
            hamiltonian,
            lhs,
            half,
            dt,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Advances interior values by one step in place.
    fn step_interior(&self, interior: &mut [Complex64]) {
        let h_psi = self.hamiltonian.apply(interior);
        for (p, hp) in interior.iter_mut().zip(h_psi) {
            *p -= self.half * hp;
        }
        self.lhs.solve_in_place(interior);
    }

    pub fn advance(&self, psi: &Wavefunction, steps: usize) -> Result<Wavefunction> {
        let mut out = psi.clone();
        self.advance_with(&mut out, steps, |_, _| {})?;
        Ok(out)
    }

    /// Advances `psi` by `steps`, calling `observe(step, &ψ)` after every step.
    pub fn advance_with(
        &self,
        psi: &mut Wavefunction,
        steps: usize,
        mut observe: impl FnMut(usize, &Wavefunction),
    ) -> Result<()> {
        let grid = *psi.grid();
        self.hamiltonian.grid().check_same(&grid)?;
        let n = grid.len();
        let mut interior: Vec<Complex64> = psi.psi().values()[1..n - 1].to_vec();
        for step in 1..=steps {
            self.step_interior(&mut interior);
            let mut values = Vec::with_capacity(n);
            values.push(Complex64::new(0.0, 0.0));
            values.extend_from_slice(&interior);
            values.push(Complex64::new(0.0, 0.0));
            let field = ComplexField::new(grid, values)
                .map_err(|e| Error::Precondition(format!("time step {step} diverged: {e}")))?;
            *psi = Wavefunction::from_normalized(field, psi.time() + self.dt, *psi.params());
            observe(step, psi);
        }
        Ok(())
    }

    /// ⟨ψ|H|ψ⟩ under the same discretization the stepper conserves.
    pub fn energy(&self, psi: &Wavefunction) -> f64 {
        let n = psi.grid().len();
        let interior = &psi.psi().values()[1..n - 1];
        let h_psi = self.hamiltonian.apply(interior);
        interior
            .iter()
            .zip(&h_psi)
            .map(|(a, b)| (a.conj() * b).re)
            .sum::<f64>()
            * psi.grid().dx()
    }
}

/// Evolves `psi0` under the potential for `steps` steps of size `dt`.
pub fn evolve(psi0: &Wavefunction, potential: &ScalarField, dt: f64, steps: usize) -> Result<Wavefunction> {
    let norm = psi0.norm();
    if (norm - 1.0).abs() > super::wavefunction::NORM_TOLERANCE {
        return Err(Error::Precondition(format!(
            "initial state must be normalized (norm = {norm})"
        )));
    }
    CayleyStepper::new(potential, psi0.params(), dt)?.advance(psi0, steps)
}
