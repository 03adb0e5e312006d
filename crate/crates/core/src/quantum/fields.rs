//! Velocity fields and quantum potential derived from ψ or ρ.
//!
//! With A = 2mD (= ħ when D = ħ/2m):
//!   v = (A/m)·Im(∇ψ/ψ)            flux velocity
//!   u = (A/m)·Re(∇ψ/ψ) = D∇ρ/ρ    osmotic velocity
//!   V_Q = −A²(∇²√ρ)/(2m√ρ) = −½(m u² + A ∇·u)
//!
//! Near nodes of ψ these ratios blow up. Nodes with ρ ≤ ρ_floor
//! ([`RHO_FLOOR_RELATIVE`] × max ρ) are masked: their value slot holds 0 and
//! `valid[i]` is false. Consumers must skip masked nodes.

use crate::error::Result;
use crate::grid::{complex_derivative, derivative, laplacian, ScalarField};
use crate::params::PhysicalParams;

use super::wavefunction::Wavefunction;

pub const RHO_FLOOR_RELATIVE: f64 = 1e-12;

/// A scalar field with a per-node validity mask.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskedField {
    pub field: ScalarField,
    pub valid: Vec<bool>,
}

impl MaskedField {
    pub fn unmasked(field: ScalarField) -> Self {
        let valid = vec![true; field.values().len()];
        Self { field, valid }
    }

    pub fn get(&self, i: usize) -> Option<f64> {
        self.valid[i].then(|| self.field.get(i))
    }

    pub fn masked_fraction(&self) -> f64 {
        self.valid.iter().filter(|v| !**v).count() as f64 / self.valid.len() as f64
    }

    /// Sup over valid nodes.
    pub fn max_abs(&self) -> f64 {
        self.field
            .values()
            .iter()
            .zip(&self.valid)
            .filter(|(_, ok)| **ok)
            .fold(0.0, |m, (v, _)| m.max(v.abs()))
    }

    /// Nodes valid in both fields.
    pub fn joint_valid(&self, other: &MaskedField) -> Vec<bool> {
        self.valid.iter().zip(&other.valid).map(|(a, b)| *a && *b).collect()
    }
}

/// Validity mask ρ > ρ_floor.
pub fn density_mask(rho: &ScalarField) -> Vec<bool> {
    let floor = RHO_FLOOR_RELATIVE * rho.max_abs();
    rho.values().iter().map(|&r| r > floor).collect()
}

fn masked(grid: crate::grid::Grid1D, raw: Vec<f64>, valid: Vec<bool>) -> Result<MaskedField> {
    let valid: Vec<bool> = raw
        .iter()
        .zip(&valid)
        .map(|(v, ok)| *ok && v.is_finite())
        .collect();
    let values = raw
        .into_iter()
        .zip(&valid)
        .map(|(v, ok)| if *ok { v } else { 0.0 })
        .collect();
    Ok(MaskedField {
        field: ScalarField::new(grid, values)?,
        valid,
    })
}

/// (∇ψ/ψ) split into real and imaginary parts, masked at nodes.
fn log_gradient(psi: &Wavefunction) -> Result<(Vec<f64>, Vec<f64>, Vec<bool>)> {
    let rho = psi.density();
    let valid = density_mask(&rho);
    let d = complex_derivative(psi.psi());
    let mut re = Vec::with_capacity(rho.values().len());
    let mut im = Vec::with_capacity(rho.values().len());
    for ((z, dz), r) in psi.psi().values().iter().zip(d.values()).zip(rho.values()) {
        let ratio = dz * z.conj() / *r;
        re.push(ratio.re);
        im.push(ratio.im);
    }
    Ok((re, im, valid))
}

/// v = (A/m)·Im(∇ψ/ψ).
pub fn flux_velocity(psi: &Wavefunction) -> Result<MaskedField> {
    let p = psi.params();
    let scale = p.action() / p.mass;
    let (_, im, valid) = log_gradient(psi)?;
    masked(*psi.grid(), im.into_iter().map(|x| scale * x).collect(), valid)
}

/// u = (A/m)·Re(∇ψ/ψ).
pub fn osmotic_velocity(psi: &Wavefunction) -> Result<MaskedField> {
    let p = psi.params();
    let scale = p.action() / p.mass;
    let (re, _, valid) = log_gradient(psi)?;
    masked(*psi.grid(), re.into_iter().map(|x| scale * x).collect(), valid)
}

/// u = D∇ρ/ρ computed from the density alone.
pub fn osmotic_from_density(rho: &ScalarField, diffusion: f64) -> Result<MaskedField> {
    let valid = density_mask(rho);
    let grad = derivative(rho)?;
    let raw = grad
        .values()
        .iter()
        .zip(rho.values())
        .map(|(g, r)| diffusion * g / r)
        .collect();
    masked(*rho.grid(), raw, valid)
}

/// Both forms of the quantum potential.
#[derive(Debug, Clone)]
pub struct QuantumPotential {
    /// −A²(∇²√ρ)/(2m√ρ)
    pub amplitude_form: MaskedField,
    /// −½(m u² + A ∇·u) with u = D∇ρ/ρ
    pub osmotic_form: MaskedField,
}

impl QuantumPotential {
    /// Largest pointwise gap between the two forms over nodes valid in both.
    pub fn max_discrepancy(&self) -> f64 {
        let a = &self.amplitude_form;
        let b = &self.osmotic_form;
        (0..a.valid.len())
            .filter(|&i| a.valid[i] && b.valid[i])
            .map(|i| (a.field.get(i) - b.field.get(i)).abs())
            .fold(0.0, f64::max)
    }
}

pub fn quantum_potential(rho: &ScalarField, params: &PhysicalParams) -> Result<QuantumPotential> {
    let grid = *rho.grid();
    let action = params.action();
    let m = params.mass;
    let valid = density_mask(rho);

    let amp = rho.map(|r| r.max(0.0).sqrt())?;
    let lap = laplacian(&amp)?;
    let amplitude_raw = lap
        .values()
        .iter()
        .zip(amp.values())
        .map(|(l, a)| -action * action * l / (2.0 * m * a))
        .collect();

    let u = osmotic_from_density(rho, params.diffusion)?;
    let du = derivative(&u.field)?;
    let osmotic_raw = u
        .field
        .values()
        .iter()
        .zip(du.values())
        .map(|(u, du)| -0.5 * (m * u * u + action * du))
        .collect();

    // ∇·u at a node needs both neighbours unmasked.
    let n = valid.len();
    let osmotic_valid = (0..n)
        .map(|i| valid[i] && (i == 0 || valid[i - 1]) && (i + 1 == n || valid[i + 1]))
        .collect();

    Ok(QuantumPotential {
        amplitude_form: masked(grid, amplitude_raw, valid)?,
        osmotic_form: masked(grid, osmotic_raw, osmotic_valid)?,
    })
}
