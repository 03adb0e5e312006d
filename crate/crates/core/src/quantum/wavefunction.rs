use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{integrate, ComplexField, Grid1D, ScalarField};
use crate::params::PhysicalParams;

/// Normalization tolerance for a wavefunction snapshot.
pub const NORM_TOLERANCE: f64 = 1e-8;

/// A complex field ψ on a grid at a given time. ρ = |ψ|².
#[derive(Debug, Clone, PartialEq)]
pub struct Wavefunction {
    psi: ComplexField,
    time: f64,
    params: PhysicalParams,
}

impl Wavefunction {
    /// Wraps and normalizes `psi`.
    pub fn new(psi: ComplexField, time: f64, params: PhysicalParams) -> Result<Self> {
        params.validate()?;
        let mut wf = Self { psi, time, params };
        wf.normalize()?;
        Ok(wf)
    }

    /// Wraps `psi` as-is; the caller vouches for normalization.
    pub(crate) fn from_normalized(psi: ComplexField, time: f64, params: PhysicalParams) -> Self {
        Self { psi, time, params }
    }

    /// Gaussian packet exp(−(x−x₀)²/4σ²)·exp(ik₀x), so that Var(x) = σ².
    pub fn gaussian(
        grid: Grid1D,
        params: PhysicalParams,
        center: f64,
        sigma: f64,
        k0: f64,
    ) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(Error::InvalidParameter {
                name: "sigma",
                reason: format!("must be > 0 (got {sigma})"),
            });
        }
        let psi = ComplexField::from_fn(grid, |x| {
            let envelope = (-(x - center).powi(2) / (4.0 * sigma * sigma)).exp();
            Complex64::from_polar(envelope, k0 * x)
        })?;
        Self::new(psi, 0.0, params)
    }

    /// Normalized superposition Σ cₖ ψₖ (all on the same grid).
    pub fn superposition(terms: &[(Complex64, &Wavefunction)]) -> Result<Self> {
        let (_, first) = terms
            .first()
            .ok_or_else(|| Error::Precondition("empty superposition".into()))?;
        let grid = *first.grid();
        let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
        for (c, wf) in terms {
            grid.check_same(wf.grid())?;
            for (acc, z) in values.iter_mut().zip(wf.psi.values()) {
                *acc += c * z;
            }
        }
        Self::new(ComplexField::new(grid, values)?, first.time, first.params)
    }

    /// Multiplies ψ by exp(i k₀ x) (Galilean boost by A·k₀).
    pub fn boosted(&self, k0: f64) -> Result<Self> {
        let grid = *self.grid();
        let values = self
            .psi
            .values()
            .iter()
            .enumerate()
            .map(|(i, z)| z * Complex64::from_polar(1.0, k0 * grid.x(i)))
            .collect();
        Ok(Self {
            psi: ComplexField::new(grid, values)?,
            ..self.clone()
        })
    }

    pub fn psi(&self) -> &ComplexField {
        &self.psi
    }

    pub fn grid(&self) -> &Grid1D {
        self.psi.grid()
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn params(&self) -> &PhysicalParams {
        &self.params
    }

    pub fn with_params(mut self, params: PhysicalParams) -> Self {
        self.params = params;
        self
    }

    pub fn with_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }

    pub fn density(&self) -> ScalarField {
        self.psi.modulus_squared()
    }

    pub fn norm(&self) -> f64 {
        integrate(&self.density())
    }

    fn normalize(&mut self) -> Result<()> {
        let norm = self.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::Precondition(format!(
                "cannot normalize wavefunction with norm {norm}"
            )));
        }
        let scale = norm.sqrt().recip();
        let values = self.psi.values().iter().map(|z| z * scale).collect();
        self.psi = ComplexField::new(*self.grid(), values)?;
        Ok(())
    }

    pub fn expectation_x(&self) -> f64 {
        weighted_moment(&self.density(), 1)
    }

    pub fn variance_x(&self) -> f64 {
        let rho = self.density();
        let mean = weighted_moment(&rho, 1);
        weighted_moment(&rho, 2) - mean * mean
    }

    /// ⟨ψ|φ⟩ under the trapezoidal inner product.
    pub fn inner(&self, other: &Wavefunction) -> Result<Complex64> {
        self.grid().check_same(other.grid())?;
        Ok(inner_product(self.psi.values(), other.psi.values(), self.grid().dx()))
    }

    /// Max pointwise deviation of |ψ| from |φ|.
    pub fn max_modulus_difference(&self, other: &Wavefunction) -> f64 {
        self.psi
            .values()
            .iter()
            .zip(other.psi.values())
            .map(|(a, b)| (a.norm() - b.norm()).abs())
            .fold(0.0, f64::max)
    }
}

pub(crate) fn inner_product(a: &[Complex64], b: &[Complex64], h: f64) -> Complex64 {
    let n = a.len();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        let w = if i == 0 || i + 1 == n { 0.5 } else { 1.0 };
        acc += a[i].conj() * b[i] * w;
    }
    acc * h
}

/// ∫ xᵏ ρ dx.
pub(crate) fn weighted_moment(rho: &ScalarField, k: i32) -> f64 {
    let grid = *rho.grid();
    let weighted: Vec<f64> = (0..grid.len())
        .map(|i| grid.x(i).powi(k) * rho.get(i))
        .collect();
    crate::grid::trapezoid(&weighted, grid.dx())
}
