//! Kinematic operators of stochastic mechanics and residuals of the
//! dynamical equations evaluated on sampled fields.
//!
//!   𝒟̂_c = ∂/∂t + v ∂ₓ        𝒟̂_s = u ∂ₓ + D ∂ₓ²
//!   m(𝒟̂_c v − λ 𝒟̂_s u) = f
//!
//! λ = +1 is the time-reversal invariant (quantum) branch, λ = −1 the
//! Brownian one. Time derivatives are centered differences between two
//! snapshots; everything else is evaluated on the snapshot average, so the
//! residuals are second order in Δt.
//!
//! The correlation tensor of the radiative theory reduces in 1-D to the
//! scalar T = ∂u/∂x. We check this unnormalized form; the −2m/ħ prefactor
//! relating it to the local velocity variance is not asserted separately.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{derivative, laplacian, Grid1D, ScalarField};
use crate::params::{Branch, PhysicalParams};
use crate::quantum::{
    density_mask, flux_velocity, osmotic_from_density, osmotic_velocity, MaskedField, Wavefunction,
};
use crate::samplers::BinnedEstimate;
use crate::stats::weighted_line_fit;

/// Reports whose masked fraction reaches this are marked invalid.
pub const MAX_MASKED_FRACTION: f64 = 0.05;

/// ρ, v, u at one instant.
#[derive(Debug, Clone)]
pub struct FieldSnapshot {
    pub time: f64,
    pub rho: ScalarField,
    pub v: MaskedField,
    pub u: MaskedField,
}

impl FieldSnapshot {
    pub fn new(time: f64, rho: ScalarField, v: MaskedField, u: MaskedField) -> Result<Self> {
        rho.grid().check_same(v.field.grid())?;
        rho.grid().check_same(u.field.grid())?;
        Ok(Self { time, rho, v, u })
    }

    pub fn from_wavefunction(psi: &Wavefunction) -> Result<Self> {
        Self::new(psi.time(), psi.density(), flux_velocity(psi)?, osmotic_velocity(psi)?)
    }

    /// Equilibrium snapshot: v = 0, u = D∇ρ/ρ.
    pub fn from_density(time: f64, rho: ScalarField, diffusion: f64) -> Result<Self> {
        let u = osmotic_from_density(&rho, diffusion)?;
        let v = MaskedField {
            field: ScalarField::constant(*rho.grid(), 0.0)?,
            valid: u.valid.clone(),
        };
        Self::new(time, rho, v, u)
    }

    pub fn grid(&self) -> &Grid1D {
        self.rho.grid()
    }
}

/// Two snapshots bracketing a time step, plus the external force f = −∇V.
#[derive(Debug, Clone)]
pub struct FieldSnapshotPair {
    pub before: FieldSnapshot,
    pub after: FieldSnapshot,
    pub force: ScalarField,
    pub params: PhysicalParams,
}

impl FieldSnapshotPair {
    pub fn new(
        before: FieldSnapshot,
        after: FieldSnapshot,
        force: ScalarField,
        params: PhysicalParams,
    ) -> Result<Self> {
        before.grid().check_same(after.grid())?;
        before.grid().check_same(force.grid())?;
        let dt = after.time - before.time;
        if !(dt > 0.0) {
            return Err(Error::Precondition(format!(
                "snapshot times must increase (dt = {dt})"
            )));
        }
        Ok(Self {
            before,
            after,
            force,
            params,
        })
    }

    /// A time-independent state: both snapshots equal, one unit apart.
    pub fn stationary(snapshot: FieldSnapshot, force: ScalarField, params: PhysicalParams) -> Result<Self> {
        let mut after = snapshot.clone();
        after.time += 1.0;
        Self::new(snapshot, after, force, params)
    }

    /// Pair from two wavefunctions and the potential that evolves them.
    pub fn from_wavefunctions(before: &Wavefunction, after: &Wavefunction, potential: &ScalarField) -> Result<Self> {
        let force = derivative(potential)?.map(|g| -g)?;
        Self::new(
            FieldSnapshot::from_wavefunction(before)?,
            FieldSnapshot::from_wavefunction(after)?,
            force,
            *before.params(),
        )
    }

    pub fn dt(&self) -> f64 {
        self.after.time - self.before.time
    }

    pub fn grid(&self) -> &Grid1D {
        self.before.grid()
    }
}

/// Residual field with norms over unmasked nodes.
#[derive(Debug, Clone)]
pub struct ResidualReport {
    pub residual: MaskedField,
    pub l2_norm: f64,
    pub linf_norm: f64,
    pub masked_fraction: f64,
}

#[derive(Serialize)]
struct ReportJson {
    l2: f64,
    linf: f64,
    masked_fraction: f64,
    valid: bool,
}

impl ResidualReport {
    pub fn from_masked(residual: MaskedField) -> Self {
        let h = residual.field.grid().dx();
        let sum_sq: f64 = residual
            .field
            .values()
            .iter()
            .zip(&residual.valid)
            .filter(|(_, ok)| **ok)
            .map(|(r, _)| r * r)
            .sum();
        Self {
            l2_norm: (sum_sq * h).sqrt(),
            linf_norm: residual.max_abs(),
            masked_fraction: residual.masked_fraction(),
            residual,
        }
    }

    fn build(grid: Grid1D, raw: Vec<f64>, valid: Vec<bool>) -> Result<Self> {
        let values = raw
            .iter()
            .zip(&valid)
            .map(|(r, ok)| if *ok && r.is_finite() { *r } else { 0.0 })
            .collect();
        let valid = raw.iter().zip(valid).map(|(r, ok)| ok && r.is_finite()).collect();
        Ok(Self::from_masked(MaskedField {
            field: ScalarField::new(grid, values)?,
            valid,
        }))
    }

    pub fn is_valid(&self) -> bool {
        self.masked_fraction < MAX_MASKED_FRACTION
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(ReportJson {
            l2: self.l2_norm,
            linf: self.linf_norm,
            masked_fraction: self.masked_fraction,
            valid: self.is_valid(),
        })
        .expect("report serializes")
    }
}

/// Nodes at least two away from either end whose centered stencil touches
/// only valid nodes. One-sided end stencils are too inaccurate for the
/// nested derivatives in the residuals.
pub(crate) fn stencil_valid(valid: &[bool]) -> Vec<bool> {
    let n = valid.len();
    (0..n)
        .map(|i| i >= 2 && i + 2 < n && valid[i - 2..i + 3].iter().all(|v| *v))
        .collect()
}

fn and(a: &[bool], b: &[bool]) -> Vec<bool> {
    a.iter().zip(b).map(|(x, y)| *x && *y).collect()
}

fn average(a: &ScalarField, b: &ScalarField) -> Result<ScalarField> {
    a.zip_with(b, |x, y| 0.5 * (x + y))
}

/// 𝒟̂_c g = ∂g/∂t + v ∂g/∂x, with g given at two times `dt` apart and v at
/// the midpoint.
pub fn apply_dc(before: &ScalarField, after: &ScalarField, v: &ScalarField, dt: f64) -> Result<ScalarField> {
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter {
            name: "dt",
            reason: format!("must be > 0 (got {dt})"),
        });
    }
    before.grid().check_same(after.grid())?;
    before.grid().check_same(v.grid())?;
    let grad = derivative(&average(before, after)?)?;
    let dgdt = after.zip_with(before, |a, b| (a - b) / dt)?;
    let advect = v.zip_with(&grad, |v, g| v * g)?;
    dgdt.zip_with(&advect, |a, b| a + b)
}

/// 𝒟̂_s g = u ∂g/∂x + D ∂²g/∂x².
pub fn apply_ds(g: &ScalarField, u: &ScalarField, diffusion: f64) -> Result<ScalarField> {
    g.grid().check_same(u.grid())?;
    let grad = derivative(g)?;
    let lap = laplacian(g)?;
    let drift = u.zip_with(&grad, |u, g| u * g)?;
    drift.zip_with(&lap, |a, l| a + diffusion * l)
}

struct Midpoint {
    v: ScalarField,
    u: ScalarField,
    valid: Vec<bool>,
}

fn midpoint(pair: &FieldSnapshotPair) -> Result<Midpoint> {
    let (a, b) = (&pair.before, &pair.after);
    let valid = and(&a.v.joint_valid(&a.u), &b.v.joint_valid(&b.u));
    Ok(Midpoint {
        v: average(&a.v.field, &b.v.field)?,
        u: average(&a.u.field, &b.u.field)?,
        valid,
    })
}

/// Residual of m(𝒟̂_c v − λ 𝒟̂_s u) − f for the given branch and force.
fn dynamical_residual(pair: &FieldSnapshotPair, lambda: f64, force: &ScalarField) -> Result<ResidualReport> {
    let m = pair.params.mass;
    let mid = midpoint(pair)?;
    let dc_v = apply_dc(&pair.before.v.field, &pair.after.v.field, &mid.v, pair.dt())?;
    let ds_u = apply_ds(&mid.u, &mid.u, pair.params.diffusion)?;
    let raw = (0..pair.grid().len())
        .map(|i| m * (dc_v.get(i) - lambda * ds_u.get(i)) - force.get(i))
        .collect();
    ResidualReport::build(*pair.grid(), raw, stencil_valid(&mid.valid))
}

/// Residual of m(∂v/∂t + v∂v − u∂u − D∂²u) − f.
pub fn residual_time_symmetric(pair: &FieldSnapshotPair) -> Result<ResidualReport> {
    dynamical_residual(pair, Branch::Quantum.lambda(), &pair.force)
}

/// The dynamical residual with an explicit branch and the pair's own force.
/// Feeding quantum fields to the Brownian branch is the negative control
/// separating the two kinds of process.
pub fn residual_with_branch(pair: &FieldSnapshotPair, branch: Branch) -> Result<ResidualReport> {
    dynamical_residual(pair, branch.lambda(), &pair.force)
}

/// Residual of m(∂v/∂t + v∂v + u∂u + D∂²u) − f₊ for an overdamped process
/// whose forward drift is b = f/(mγ). The right-hand side is the mean forward
/// acceleration of that drift, f₊ = m(∂ₜ + b∂ₓ + D∂ₓ²)b with b = v + u in the
/// stationary state.
pub fn residual_brownian(pair: &FieldSnapshotPair, friction: f64) -> Result<ResidualReport> {
    if !(friction > 0.0 && friction.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "friction",
            reason: format!("must be > 0 (got {friction})"),
        });
    }
    let mid = midpoint(pair)?;
    let drift = mid.v.zip_with(&mid.u, |v, u| v + u)?;
    let d_force = derivative(&pair.force)?;
    let dd_force = laplacian(&pair.force)?;
    let forward = (0..pair.grid().len())
        .map(|i| (drift.get(i) * d_force.get(i) + pair.params.diffusion * dd_force.get(i)) / friction)
        .collect();
    let forward = ScalarField::new(*pair.grid(), forward)?;
    dynamical_residual(pair, Branch::Brownian.lambda(), &forward)
}

/// Residual of ∂ρ/∂t + ∂(ρv)/∂x.
pub fn residual_continuity(pair: &FieldSnapshotPair) -> Result<ResidualReport> {
    let (a, b) = (&pair.before, &pair.after);
    let current = |s: &FieldSnapshot| s.rho.zip_with(&s.v.field, |r, v| r * v);
    let flux = average(&current(a)?, &current(b)?)?;
    let div = derivative(&flux)?;
    let dt = pair.dt();
    let raw = (0..pair.grid().len())
        .map(|i| (b.rho.get(i) - a.rho.get(i)) / dt + div.get(i))
        .collect();
    let valid = and(&density_mask(&a.rho), &density_mask(&b.rho));
    ResidualReport::build(*pair.grid(), raw, stencil_valid(&valid))
}

/// Residual of u − D∇ρ/ρ.
pub fn osmotic_relation_residual(rho: &ScalarField, u: &MaskedField, diffusion: f64) -> Result<ResidualReport> {
    let reference = osmotic_from_density(rho, diffusion)?;
    let valid = u.joint_valid(&reference);
    let raw = (0..rho.grid().len())
        .map(|i| u.field.get(i) - reference.field.get(i))
        .collect();
    ResidualReport::build(*rho.grid(), raw, valid)
}

/// T = ∂u/∂x, masked where the stencil touches a masked node.
pub fn correlation_tensor(u: &MaskedField) -> Result<MaskedField> {
    let t = derivative(&u.field)?;
    let valid = stencil_valid(&u.valid);
    let values = t
        .values()
        .iter()
        .zip(&valid)
        .map(|(v, ok)| if *ok { *v } else { 0.0 })
        .collect();
    Ok(MaskedField {
        field: ScalarField::new(*u.field.grid(), values)?,
        valid,
    })
}

/// Slope of u fitted over the occupied bins of an ensemble estimate û, from
/// the fields and from the ensemble, with the same weights.
#[derive(Debug, Clone, Copy)]
pub struct EnsembleSlope {
    pub field: f64,
    pub ensemble: f64,
    pub std_err: f64,
}

impl EnsembleSlope {
    /// |field − ensemble| in ensemble standard errors.
    pub fn z_score(&self) -> f64 {
        (self.ensemble - self.field).abs() / self.std_err
    }
}

#[derive(Debug, Clone)]
pub struct CorrelationCheck {
    /// T(x) = ∂u/∂x from the fields.
    pub tensor: MaskedField,
    pub ensemble: Option<EnsembleSlope>,
}

impl CorrelationCheck {
    /// Residual of T(x) against a reference tensor.
    pub fn residual_against(&self, reference: &ScalarField) -> Result<ResidualReport> {
        let raw = (0..reference.grid().len())
            .map(|i| self.tensor.field.get(i) - reference.get(i))
            .collect();
        ResidualReport::build(*reference.grid(), raw, self.tensor.valid.clone())
    }
}

pub fn correlation_tensor_check(u: &MaskedField, ensemble_u: Option<&BinnedEstimate>) -> Result<CorrelationCheck> {
    let tensor = correlation_tensor(u)?;
    let ensemble = match ensemble_u {
        None => None,
        Some(est) if est.bin_centers.len() < 3 => {
            return Err(Error::Precondition(
                "need at least three occupied bins to fit a slope".into(),
            ))
        }
        Some(est) => {
            let field_at: Vec<f64> = est.bin_centers.iter().map(|&x| u.field.interpolate(x)).collect();
            let (_, field, _) = weighted_line_fit(&est.bin_centers, &field_at, &est.std_errors);
            let (_, ensemble, std_err) = weighted_line_fit(&est.bin_centers, &est.values, &est.std_errors);
            Some(EnsembleSlope {
                field,
                ensemble,
                std_err,
            })
        }
    };
    Ok(CorrelationCheck { tensor, ensemble })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::solve_eigenstates;

    // Wide enough for negligible wall effects, narrow enough that the
    // ρ-floor mask stays under the validity threshold.
    fn grid() -> Grid1D {
        Grid1D::new(-5.45, 5.45, 1091).unwrap()
    }

    fn oscillator(n: usize) -> (Vec<Wavefunction>, ScalarField) {
        let params = PhysicalParams::natural();
        let v = ScalarField::from_fn(grid(), |x| 0.5 * x * x).unwrap();
        let states = solve_eigenstates(&v, &params, n)
            .unwrap()
            .iter()
            .map(|s| s.wavefunction(params))
            .collect();
        (states, v)
    }

    #[test]
    fn dc_and_ds_of_position_are_the_velocities() {
        let g = grid();
        let x = ScalarField::from_fn(g, |x| x).unwrap();
        let v = ScalarField::from_fn(g, |x| x.sin()).unwrap();
        let dc = apply_dc(&x, &x, &v, 0.1).unwrap();
        let ds = apply_ds(&x, &v, 0.7).unwrap();
        for i in 0..g.len() {
            assert!((dc.get(i) - v.get(i)).abs() < 1e-12);
            assert!((ds.get(i) - v.get(i)).abs() < 1e-9);
        }
    }

    #[test]
    fn dc_annihilates_an_advected_coordinate() {
        let g = grid();
        let (c, t, dt) = (0.8, 0.3, 0.01);
        let a = ScalarField::from_fn(g, |x| x - c * t).unwrap();
        let b = ScalarField::from_fn(g, |x| x - c * (t + dt)).unwrap();
        let v = ScalarField::constant(g, c).unwrap();
        assert!(apply_dc(&a, &b, &v, dt).unwrap().max_abs() < 1e-10);
        let uniform = ScalarField::constant(g, 2.0).unwrap();
        assert!(apply_dc(&uniform, &uniform, &v, dt).unwrap().max_abs() == 0.0);
    }

    #[test]
    fn ds_of_square_is_twice_d() {
        let g = grid();
        let sq = ScalarField::from_fn(g, |x| x * x).unwrap();
        let zero = ScalarField::constant(g, 0.0).unwrap();
        let ds = apply_ds(&sq, &zero, 0.25).unwrap();
        assert!(ds.values().iter().all(|v| (v - 0.5).abs() < 1e-9));
        let uniform = ScalarField::constant(g, 1.0).unwrap();
        assert!(apply_ds(&uniform, &zero, 0.25).unwrap().max_abs() < 1e-9);
    }

    #[test]
    fn ground_state_satisfies_both_equations() {
        let (states, v) = oscillator(1);
        let psi = &states[0];
        let force = derivative(&v).unwrap().map(|g| -g).unwrap();
        let pair = FieldSnapshotPair::stationary(FieldSnapshot::from_wavefunction(psi).unwrap(), force, *psi.params()).unwrap();
        let dynamic = residual_time_symmetric(&pair).unwrap();
        assert!(dynamic.is_valid(), "masked {}", dynamic.masked_fraction);
        assert!(dynamic.l2_norm <= 1e-3, "l2 {}", dynamic.l2_norm);
        let cont = residual_continuity(&pair).unwrap();
        assert!(cont.linf_norm <= 10.0 * grid().dx().powi(2));

        // Swapping the branch leaves a residual of order mω²x.
        let swapped = residual_with_branch(&pair, Branch::Brownian).unwrap();
        assert!(swapped.l2_norm > 1.0);
    }

    #[test]
    fn free_uniform_drift_has_no_residual() {
        let g = grid();
        let params = PhysicalParams::natural();
        let rho = ScalarField::constant(g, 1.0 / 11.0).unwrap();
        let v = MaskedField::unmasked(ScalarField::constant(g, 0.4).unwrap());
        let u = MaskedField::unmasked(ScalarField::constant(g, 0.0).unwrap());
        let snap = FieldSnapshot::new(0.0, rho, v, u).unwrap();
        let zero = ScalarField::constant(g, 0.0).unwrap();
        let pair = FieldSnapshotPair::stationary(snap, zero, params).unwrap();
        assert!(residual_time_symmetric(&pair).unwrap().linf_norm < 1e-12);
        assert!(residual_continuity(&pair).unwrap().linf_norm < 1e-12);
        assert!(residual_brownian(&pair, 1.0).unwrap().linf_norm < 1e-12);
    }

    #[test]
    fn advected_gaussian_satisfies_continuity() {
        let g = grid();
        let (c, dt) = (0.5, 1e-3);
        let rho_at = |t: f64| ScalarField::from_fn(g, move |x| (-(x - c * t).powi(2)).exp() / std::f64::consts::PI.sqrt()).unwrap();
        let snap = |t: f64| {
            let rho = rho_at(t);
            let v = MaskedField::unmasked(ScalarField::constant(g, c).unwrap());
            let u = osmotic_from_density(&rho, 0.5).unwrap();
            FieldSnapshot::new(t, rho, v, u).unwrap()
        };
        let zero = ScalarField::constant(g, 0.0).unwrap();
        let pair = FieldSnapshotPair::new(snap(0.0), snap(dt), zero, PhysicalParams::natural()).unwrap();
        let r = residual_continuity(&pair).unwrap();
        assert!(r.linf_norm <= dt * dt + g.dx().powi(2), "linf {}", r.linf_norm);
    }

    #[test]
    fn overdamped_equilibrium_satisfies_brownian_equation() {
        let g = grid();
        let (omega, gamma, d) = (1.0, 2.0, 0.3);
        let params = PhysicalParams::brownian(1.0, d);
        let var = d * gamma / (omega * omega);
        let rho = ScalarField::from_fn(g, |x| (-x * x / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt()).unwrap();
        let force = ScalarField::from_fn(g, |x| -omega * omega * x).unwrap();
        let pair = FieldSnapshotPair::stationary(FieldSnapshot::from_density(0.0, rho, d).unwrap(), force, params).unwrap();
        let r = residual_brownian(&pair, gamma).unwrap();
        assert!(r.is_valid());
        assert!(r.l2_norm < 1e-2, "l2 {}", r.l2_norm);
        // The same fields violate the time-symmetric equation.
        assert!(residual_time_symmetric(&pair).unwrap().l2_norm > 0.1);
    }

    #[test]
    fn quantum_fields_violate_the_brownian_equation() {
        let (states, v) = oscillator(1);
        let force = derivative(&v).unwrap().map(|g| -g).unwrap();
        let psi = &states[0];
        let pair = FieldSnapshotPair::stationary(FieldSnapshot::from_wavefunction(psi).unwrap(), force, *psi.params()).unwrap();
        assert!(residual_brownian(&pair, 3.0).unwrap().l2_norm > 0.1);
    }

    #[test]
    fn osmotic_relation_and_negative_control() {
        let (states, _) = oscillator(2);
        for psi in &states {
            let u = osmotic_velocity(psi).unwrap();
            let r = osmotic_relation_residual(&psi.density(), &u, 0.5).unwrap();
            assert!(r.linf_norm <= 10.0 * grid().dx().powi(2), "linf {}", r.linf_norm);
        }
        let psi = &states[0];
        let u = osmotic_velocity(psi).unwrap();
        let corrupted = MaskedField {
            field: u.field.map(|x| 1.1 * x).unwrap(),
            valid: u.valid.clone(),
        };
        let r = osmotic_relation_residual(&psi.density(), &corrupted, 0.5).unwrap();
        assert!(r.linf_norm > 0.1);

        let g = grid();
        let flat = ScalarField::constant(g, 1.0 / 11.0).unwrap();
        let zero = MaskedField::unmasked(ScalarField::constant(g, 0.0).unwrap());
        assert!(osmotic_relation_residual(&flat, &zero, 0.5).unwrap().linf_norm < 1e-12);
    }

    #[test]
    fn ground_state_tensor_is_minus_omega() {
        let wide = Grid1D::new(-10.0, 10.0, 1001).unwrap();
        let params = PhysicalParams::natural();
        let v = ScalarField::from_fn(wide, |x| 0.5 * x * x).unwrap();
        let psi = solve_eigenstates(&v, &params, 1).unwrap()[0].wavefunction(params);
        let u = osmotic_velocity(&psi).unwrap();
        let check = correlation_tensor_check(&u, None).unwrap();
        for i in 0..wide.len() {
            if wide.x(i).abs() <= 4.0 {
                let t = check.tensor.get(i).unwrap();
                assert!((t + 1.0).abs() < 1e-3, "T({}) = {t}", wide.x(i));
            }
        }

        let g = grid();
        let plane = MaskedField::unmasked(ScalarField::constant(g, 0.0).unwrap());
        assert!(correlation_tensor(&plane).unwrap().max_abs() == 0.0);
    }

    #[test]
    fn masked_reports_are_flagged() {
        let g = grid();
        let mut valid = vec![true; g.len()];
        for v in valid.iter_mut().take(g.len() / 10) {
            *v = false;
        }
        let r = ResidualReport::from_masked(MaskedField {
            field: ScalarField::constant(g, 0.0).unwrap(),
            valid,
        });
        assert!(!r.is_valid());
        let json = r.to_json();
        assert_eq!(json["valid"], false);
        assert!(json["l2"].is_number() && json["linf"].is_number() && json["masked_fraction"].is_number());
    }
}
