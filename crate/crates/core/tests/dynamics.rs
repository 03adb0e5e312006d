use num_complex::Complex64;
use stoqlab::dynamics::*;
use stoqlab::quantum::*;
use stoqlab::{Grid1D, PhysicalParams, ScalarField};

fn harmonic(grid: Grid1D) -> ScalarField {
    ScalarField::from_fn(grid, |x| 0.5 * x * x).unwrap()
}

fn superposition_pair(n: usize, dt: f64) -> (FieldSnapshotPair, FieldSnapshotPair) {
    let grid = Grid1D::new(-5.7, 5.7, n).unwrap();
    let params = PhysicalParams::natural();
    let v = harmonic(grid);
    let states = solve_eigenstates(&v, &params, 2).unwrap();
    let c = std::f64::consts::FRAC_1_SQRT_2;
    let psi0 = Wavefunction::superposition(&[
        (Complex64::new(c, 0.0), &states[0].wavefunction(params)),
        (Complex64::new(0.0, -c), &states[1].wavefunction(params)),
    ])
    .unwrap();
    let stepper = CayleyStepper::new(&v, &params, dt).unwrap();
    let before = stepper.advance(&psi0, (0.5 / dt).round() as usize).unwrap();
    let after = stepper.advance(&before, 1).unwrap();
    let pair = FieldSnapshotPair::from_wavefunctions(&before, &after, &v).unwrap();
    (pair.clone(), pair)
}

#[test]
fn residuals_converge_at_second_order() {
    let (coarse, _) = superposition_pair(1141, 1e-3);
    let (fine, _) = superposition_pair(2281, 5e-4);
    let (a, b) = (residual_time_symmetric(&coarse).unwrap(), residual_time_symmetric(&fine).unwrap());
    assert!(a.is_valid() && b.is_valid());
    assert!(a.l2_norm / b.l2_norm >= 3.5, "dynamical ratio {}", a.l2_norm / b.l2_norm);
    let (a, b) = (residual_continuity(&coarse).unwrap(), residual_continuity(&fine).unwrap());
    assert!(a.is_valid() && b.is_valid());
    assert!(a.l2_norm / b.l2_norm >= 3.5, "continuity ratio {}", a.l2_norm / b.l2_norm);
}

#[test]
fn wrong_branch_leaves_a_residual() {
    let (pair, _) = superposition_pair(1141, 1e-3);
    let right = residual_with_branch(&pair, stoqlab::Branch::Quantum).unwrap();
    let wrong = residual_with_branch(&pair, stoqlab::Branch::Brownian).unwrap();
    assert!(wrong.l2_norm > 100.0 * right.l2_norm);
}

#[test]
fn ground_state_satisfies_the_stationary_law() {
    let grid = Grid1D::new(-5.45, 5.45, 1091).unwrap();
    let params = PhysicalParams::natural();
    let v = harmonic(grid);
    let psi = solve_eigenstates(&v, &params, 1).unwrap()[0].wavefunction(params);
    let force = ScalarField::from_fn(grid, |x| -x).unwrap();
    let pair = FieldSnapshotPair::stationary(FieldSnapshot::from_wavefunction(&psi).unwrap(), force, params).unwrap();
    let report = residual_time_symmetric(&pair).unwrap();
    assert!(report.is_valid(), "masked {}", report.masked_fraction);
    assert!(report.l2_norm <= 1e-3, "l2 {}", report.l2_norm);
    let json = report.to_json();
    assert_eq!(json["valid"], serde_json::Value::Bool(true));
}

#[test]
fn heavily_masked_reports_are_invalid() {
    let grid = Grid1D::new(-10.0, 10.0, 1001).unwrap();
    let params = PhysicalParams::natural();
    let v = harmonic(grid);
    let psi = solve_eigenstates(&v, &params, 1).unwrap()[0].wavefunction(params);
    let force = ScalarField::from_fn(grid, |x| -x).unwrap();
    let pair = FieldSnapshotPair::stationary(FieldSnapshot::from_wavefunction(&psi).unwrap(), force, params).unwrap();
    let report = residual_time_symmetric(&pair).unwrap();
    assert!(report.masked_fraction > MAX_MASKED_FRACTION);
    assert!(!report.is_valid());
}

#[test]
fn correlation_tensor_of_the_ground_state_is_minus_omega() {
    let grid = Grid1D::new(-10.0, 10.0, 1001).unwrap();
    let params = PhysicalParams::natural();
    let v = harmonic(grid);
    let psi = solve_eigenstates(&v, &params, 1).unwrap()[0].wavefunction(params);
    let t = correlation_tensor(&osmotic_velocity(&psi).unwrap()).unwrap();
    for i in 0..grid.len() {
        if grid.x(i).abs() <= 4.0 {
            let value = t.get(i).unwrap();
            assert!((value + 1.0).abs() < 1e-3, "x = {}: {value}", grid.x(i));
        }
    }
}
