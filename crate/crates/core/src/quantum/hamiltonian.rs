//! Discretized Hamiltonian H = −(2mD²)∇² + V and its low-lying spectrum.
//!
//! The kinetic term uses the fourth-order five-point stencil
//! (−ψ₋₂ + 16ψ₋₁ − 30ψ₀ + 16ψ₁ − ψ₂)/12h². The end nodes carry the Dirichlet
//! condition ψ = 0 and the stencil is closed by odd reflection across them,
//! so H acts on the interior nodes as a real symmetric pentadiagonal matrix.
//!
//! Eigenvalues are located by bisection on the inertia of H − σI (Sylvester's
//! law applied to a banded LDLᵀ factorization) and eigenvectors by inverse
//! iteration with the converged shift.

use num_complex::Complex64;

use crate::banded::BandMatrix;
use crate::error::{Error, Result};
use crate::grid::{ComplexField, Grid1D, ScalarField};
use crate::params::PhysicalParams;

use super::wavefunction::Wavefunction;

/// Interior-node Hamiltonian in symmetric band form: `diag[i]`, `off1[i]` = H(i, i+1),
/// `off2[i]` = H(i, i+2).
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    grid: Grid1D,
    diag: Vec<f64>,
    off1: f64,
    off2: f64,
}

impl Hamiltonian {
    pub fn new(potential: &ScalarField, params: &PhysicalParams) -> Result<Self> {
        params.validate()?;
        let grid = *potential.grid();
        if grid.len() < 5 {
            return Err(Error::InvalidGrid("need at least 5 nodes".into()));
        }
        let kinetic = 2.0 * params.mass * params.diffusion * params.diffusion;
        let c = kinetic / (12.0 * grid.dx().powi(2));
        let m = grid.len() - 2;
        let mut diag: Vec<f64> = (0..m).map(|i| 30.0 * c + potential.get(i + 1)).collect();
        diag[0] -= c;
        diag[m - 1] -= c;
        Ok(Self {
            grid,
            diag,
            off1: -16.0 * c,
            off2: c,
        })
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub(crate) fn interior_len(&self) -> usize {
        self.diag.len()
    }

    /// H·ψ on interior values.
    pub(crate) fn apply<T>(&self, psi: &[T]) -> Vec<T>
    where
        T: Copy + std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T>,
    {
        let m = self.diag.len();
        (0..m)
            .map(|i| {
                let mut acc = psi[i] * self.diag[i];
                if i >= 1 {
                    acc = acc + psi[i - 1] * self.off1;
                }
                if i >= 2 {
                    acc = acc + psi[i - 2] * self.off2;
                }
                if i + 1 < m {
                    acc = acc + psi[i + 1] * self.off1;
                }
                if i + 2 < m {
                    acc = acc + psi[i + 2] * self.off2;
                }
                acc
            })
            .collect()
    }

    /// (α·I + β·H) as a complex band matrix.
    pub(crate) fn complex_band(&self, alpha: Complex64, beta: Complex64) -> BandMatrix<Complex64> {
        let m = self.diag.len();
        let mut a = BandMatrix::new(m, 2, 2);
        for i in 0..m {
            a.set(i, i, alpha + beta * self.diag[i]);
            for (d, off) in [(1, self.off1), (2, self.off2)] {
                if i + d < m {
                    a.set(i, i + d, beta * off);
                    a.set(i + d, i, beta * off);
                }
            }
        }
        a
    }

    fn shifted_band(&self, sigma: f64) -> BandMatrix<f64> {
        let m = self.diag.len();
        let mut a = BandMatrix::new(m, 2, 2);
        for i in 0..m {
            a.set(i, i, self.diag[i] - sigma);
            for (d, off) in [(1, self.off1), (2, self.off2)] {
                if i + d < m {
                    a.set(i, i + d, off);
                    a.set(i + d, i, off);
                }
            }
        }
        a
    }

    /// Number of eigenvalues strictly below `sigma`.
    pub fn count_below(&self, sigma: f64) -> usize {
        // LDLᵀ of the pentadiagonal H − σI; l1[i] = L(i, i−1), l2[i] = L(i, i−2).
        let m = self.diag.len();
        let tiny = f64::EPSILON * self.norm_bound();
        let mut d = vec![0.0; m];
        let mut l1 = vec![0.0; m];
        let mut l2 = vec![0.0; m];
        let mut negatives = 0;
        for i in 0..m {
            if i >= 2 {
                l2[i] = self.off2 / d[i - 2];
            }
            if i >= 1 {
                let mut a = self.off1;
                if i >= 2 {
                    a -= l1[i - 1] * l2[i] * d[i - 2];
                }
                l1[i] = a / d[i - 1];
            }
            let mut di = self.diag[i] - sigma;
            if i >= 1 {
                di -= l1[i] * l1[i] * d[i - 1];
            }
            if i >= 2 {
                di -= l2[i] * l2[i] * d[i - 2];
            }
            if di == 0.0 {
                di = -tiny;
            }
            if di < 0.0 {
                negatives += 1;
            }
            d[i] = di;
        }
        negatives
    }

    fn norm_bound(&self) -> f64 {
        let spread = 2.0 * (self.off1.abs() + self.off2.abs());
        self.diag.iter().fold(0.0f64, |m, d| m.max(d.abs())) + spread
    }

    fn gershgorin(&self) -> (f64, f64) {
        let spread = 2.0 * (self.off1.abs() + self.off2.abs());
        let lo = self.diag.iter().cloned().fold(f64::INFINITY, f64::min) - spread;
        let hi = self.diag.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + spread;
        (lo, hi)
    }

    /// k-th eigenvalue (0-based) by bisection.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        let (mut lo, mut hi) = self.gershgorin();
        let tol = 4.0 * f64::EPSILON * self.norm_bound();
        for _ in 0..200 {
            if hi - lo <= tol {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// One eigenpair of the discretized Hamiltonian.
#[derive(Debug, Clone)]
pub struct EigenSolution {
    pub energy: f64,
    pub index: usize,
    pub psi: ComplexField,
}

impl EigenSolution {
    pub fn wavefunction(&self, params: PhysicalParams) -> Wavefunction {
        Wavefunction::from_normalized(self.psi.clone(), 0.0, params)
    }
}

const INVERSE_ITERATIONS: usize = 8;

/// Lowest `k` eigenpairs of −(2mD²)∇² + V with Dirichlet ends.
///
/// Eigenvectors are real, normalized under the trapezoidal inner product, and
/// signed so that the first node exceeding 1% of the peak modulus is positive
/// (the ground state is then nonnegative everywhere).
pub fn solve_eigenstates(
    potential: &ScalarField,
    params: &PhysicalParams,
    k: usize,
) -> Result<Vec<EigenSolution>> {
    let grid = *potential.grid();
    if k == 0 || k > grid.len() / 4 {
        return Err(Error::Precondition(format!(
            "requested {k} states; need 1 <= k <= n_points/4 = {}",
            grid.len() / 4
        )));
    }
    let h = Hamiltonian::new(potential, params)?;
    let m = h.interior_len();
    let dx = grid.dx();
    let mut found: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut out = Vec::with_capacity(k);

    for index in 0..k {
        let energy = h.eigenvalue(index);
        let scale = h.norm_bound();
        // Nudge the shift off the eigenvalue so the factorization stays regular.
        let shift = energy - 1e3 * f64::EPSILON * scale.max(1.0);
        let lu = h.shifted_band(shift).factor()?;

        let mut v: Vec<f64> = (0..m)
            .map(|i| 1.0 + 0.5 * ((i * 7919 % 101) as f64 / 101.0 - 0.5))
            .collect();
        let mut residual = f64::INFINITY;
        for _ in 0..INVERSE_ITERATIONS {
            for prev in &found {
                let overlap: f64 = prev.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>() * dx;
                v.iter_mut().zip(prev).for_each(|(x, p)| *x -= overlap * p);
            }
            lu.solve_in_place(&mut v);
            let norm = (v.iter().map(|x| x * x).sum::<f64>() * dx).sqrt();
            v.iter_mut().for_each(|x| *x /= norm);
            let hv = h.apply(&v);
            residual = (hv
                .iter()
                .zip(&v)
                .map(|(a, b)| (a - energy * b).powi(2))
                .sum::<f64>()
                * dx)
                .sqrt();
            if residual <= 1e2 * f64::EPSILON * scale.max(1.0) {
                break;
            }
        }
        if !(residual <= 1e-8 * scale.max(1.0)) {
            return Err(Error::EigenNonConvergence { index, residual });
        }

        let peak = v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        let lead = v.iter().find(|x| x.abs() > 0.01 * peak).copied().unwrap_or(1.0);
        if lead < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }

        let mut values = Vec::with_capacity(grid.len());
        values.push(Complex64::new(0.0, 0.0));
        values.extend(v.iter().map(|&x| Complex64::new(x, 0.0)));
        values.push(Complex64::new(0.0, 0.0));
        out.push(EigenSolution {
            energy,
            index,
            psi: ComplexField::new(grid, values)?,
        });
        found.push(v);
    }
    Ok(out)
}
