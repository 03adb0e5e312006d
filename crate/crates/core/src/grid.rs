//! Uniform 1-D grids, fields sampled on them, and the finite-difference
//! calculus used throughout the crate.
//!
//! Derivatives are fourth-order five-point differences in the interior and
//! fourth-order one-sided differences on the two nodes nearest each end.
//! Integrals use the trapezoidal rule.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_POINTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    x_min: f64,
    x_max: f64,
    n_points: usize,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite()) {
            return Err(Error::InvalidGrid("bounds must be finite".into()));
        }
        if x_max <= x_min {
            return Err(Error::InvalidGrid(format!(
                "x_max ({x_max}) must exceed x_min ({x_min})"
            )));
        }
        if n_points < MIN_POINTS {
            return Err(Error::InvalidGrid(format!(
                "n_points must be >= {MIN_POINTS} (got {n_points})"
            )));
        }
        Ok(Self {
            x_min,
            x_max,
            n_points,
        })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points - 1) as f64
    }

    /// Half the grid extent.
    pub fn half_width(&self) -> f64 {
        0.5 * (self.x_max - self.x_min)
    }

    pub fn x(&self, i: usize) -> f64 {
        if i + 1 == self.n_points {
            self.x_max
        } else {
            self.x_min + i as f64 * self.dx()
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.x(i)).collect()
    }

    /// Same bounds, twice the resolution (dx halved).
    pub fn refined(&self) -> Self {
        Self {
            n_points: 2 * self.n_points - 1,
            ..*self
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.x_min && x <= self.x_max
    }

    /// Node index `i` and fraction `w` such that x = (1−w)·x_i + w·x_{i+1}.
    /// Positions outside the grid are clamped to the end nodes.
    pub fn locate(&self, x: f64) -> (usize, f64) {
        let s = (x - self.x_min) / self.dx();
        if s <= 0.0 {
            return (0, 0.0);
        }
        let last = (self.n_points - 2) as f64;
        if s >= last + 1.0 {
            return (self.n_points - 2, 1.0);
        }
        let i = s.floor().min(last);
        (i as usize, s - i)
    }

    fn same_as(&self, other: &Grid1D) -> bool {
        self.n_points == other.n_points && self.x_min == other.x_min && self.x_max == other.x_max
    }

    pub fn check_same(&self, other: &Grid1D) -> Result<()> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{self:?} vs {other:?}")))
        }
    }
}

/// A real field sampled at every grid node. All values are finite.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid1D,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Grid1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for {} nodes",
                values.len(),
                grid.len()
            )));
        }
        check_finite("scalar field", &values)?;
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = (0..grid.len()).map(|i| f(grid.x(i))).collect();
        Self::new(grid, values)
    }

    pub fn constant(grid: Grid1D, c: f64) -> Result<Self> {
        Self::new(grid, vec![c; grid.len()])
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_with(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Self::new(self.grid, values)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Linear interpolation, clamped to the end values outside the grid.
    pub fn interpolate(&self, x: f64) -> f64 {
        let (i, w) = self.grid.locate(x);
        (1.0 - w) * self.values[i] + w * self.values[i + 1]
    }
}

/// A complex field sampled at every grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    grid: Grid1D,
    values: Vec<Complex64>,
}

impl ComplexField {
    pub fn new(grid: Grid1D, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for {} nodes",
                values.len(),
                grid.len()
            )));
        }
        for (i, z) in values.iter().enumerate() {
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(Error::NonFinite {
                    what: "complex field",
                    index: i,
                    value: if z.re.is_finite() { z.im } else { z.re },
                });
            }
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let values = (0..grid.len()).map(|i| f(grid.x(i))).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn modulus_squared(&self) -> ScalarField {
        ScalarField {
            grid: self.grid,
            values: self.values.iter().map(|z| z.norm_sqr()).collect(),
        }
    }

    pub fn real(&self) -> ScalarField {
        ScalarField {
            grid: self.grid,
            values: self.values.iter().map(|z| z.re).collect(),
        }
    }

    pub fn imag(&self) -> ScalarField {
        ScalarField {
            grid: self.grid,
            values: self.values.iter().map(|z| z.im).collect(),
        }
    }
}

fn check_finite(what: &'static str, values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite {
            what,
            index,
            value: values[index],
        }),
        None => Ok(()),
    }
}

pub(crate) trait Sample:
    Copy + std::ops::Add<Output = Self> + std::ops::Sub<Output = Self> + std::ops::Mul<f64, Output = Self>
{
}

impl<T> Sample for T where
    T: Copy + std::ops::Add<Output = T> + std::ops::Sub<Output = T> + std::ops::Mul<f64, Output = T>
{
}

fn stencil<T: Sample>(f: &[T], weights: &[f64]) -> T {
    weights
        .iter()
        .zip(f)
        .skip(1)
        .fold(f[0] * weights[0], |acc, (w, v)| acc + *v * *w)
}

/// Applies a fourth-order five-point interior stencil with one-sided
/// fourth-order closures on the two nodes nearest each end. `odd` flips the
/// sign of the mirrored right-end closures (first derivatives).
fn fourth_order<T: Sample>(f: &[T], scale: f64, interior: [f64; 5], edge: [&[f64]; 2], odd: bool) -> Vec<T> {
    let n = f.len();
    let mirror = if odd { -scale } else { scale };
    let reversed: Vec<T> = f[n - 6..].iter().rev().copied().collect();
    let mut out = Vec::with_capacity(n);
    out.push(stencil(&f[..6], edge[0]) * scale);
    out.push(stencil(&f[..6], edge[1]) * scale);
    for i in 2..n - 2 {
        out.push(stencil(&f[i - 2..i + 3], &interior) * scale);
    }
    out.push(stencil(&reversed, edge[1]) * mirror);
    out.push(stencil(&reversed, edge[0]) * mirror);
    out
}

/// First derivative of raw samples with spacing `h` (n ≥ 6), fourth order.
pub(crate) fn derivative_values<T: Sample>(f: &[T], h: f64) -> Vec<T> {
    fourth_order(
        f,
        1.0 / (12.0 * h),
        [1.0, -8.0, 0.0, 8.0, -1.0],
        [&[-25.0, 48.0, -36.0, 16.0, -3.0, 0.0], &[-3.0, -10.0, 18.0, -6.0, 1.0, 0.0]],
        true,
    )
}

/// Second derivative of raw samples with spacing `h` (n ≥ 6), fourth order.
pub(crate) fn laplacian_values<T: Sample>(f: &[T], h: f64) -> Vec<T> {
    fourth_order(
        f,
        1.0 / (12.0 * h * h),
        [-1.0, 16.0, -30.0, 16.0, -1.0],
        [
            &[45.0, -154.0, 214.0, -156.0, 61.0, -10.0],
            &[10.0, -15.0, -4.0, 14.0, -6.0, 1.0],
        ],
        false,
    )
}

pub fn derivative(f: &ScalarField) -> Result<ScalarField> {
    check_finite("derivative input", &f.values)?;
    ScalarField::new(f.grid, derivative_values(&f.values, f.grid.dx()))
}

pub fn laplacian(f: &ScalarField) -> Result<ScalarField> {
    check_finite("laplacian input", &f.values)?;
    ScalarField::new(f.grid, laplacian_values(&f.values, f.grid.dx()))
}

pub fn complex_derivative(f: &ComplexField) -> ComplexField {
    ComplexField {
        grid: f.grid,
        values: derivative_values(&f.values, f.grid.dx()),
    }
}

pub fn complex_laplacian(f: &ComplexField) -> ComplexField {
    ComplexField {
        grid: f.grid,
        values: laplacian_values(&f.values, f.grid.dx()),
    }
}

/// Trapezoidal integral over the whole grid.
pub fn integrate(f: &ScalarField) -> f64 {
    trapezoid(&f.values, f.grid.dx())
}

pub(crate) fn trapezoid(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    let interior: f64 = values[1..n - 1].iter().sum();
    h * (interior + 0.5 * (values[0] + values[n - 1]))
}

/// Running trapezoidal integral, starting at 0 on the first node.
pub fn cumulative_integral(f: &ScalarField) -> Vec<f64> {
    let h = f.grid.dx();
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(f.values.len());
    out.push(0.0);
    for w in f.values.windows(2) {
        acc += 0.5 * h * (w[0] + w[1]);
        out.push(acc);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn grid_rejects_bad_shapes() {
        assert!(Grid1D::new(1.0, 0.0, 10).is_err());
        assert!(Grid1D::new(0.0, 1.0, 7).is_err());
        assert!(Grid1D::new(0.0, f64::INFINITY, 10).is_err());
        let g = Grid1D::new(-1.0, 1.0, 101).unwrap();
        assert!((g.dx() - 0.02).abs() < 1e-15);
        assert_eq!(g.x(100), 1.0);
        assert_eq!(g.refined().len(), 201);
    }

    #[test]
    fn derivative_of_constant_vanishes() {
        let g = Grid1D::new(-3.0, 2.0, 50).unwrap();
        let d = derivative(&ScalarField::constant(g, 4.2).unwrap()).unwrap();
        assert!(d.max_abs() < 1e-12);
        let l = laplacian(&ScalarField::constant(g, 4.2).unwrap()).unwrap();
        assert!(l.max_abs() < 1e-9);
    }

    #[test]
    fn derivative_exact_for_quadratic() {
        let g = Grid1D::new(-1.0, 1.0, 101).unwrap();
        let f = ScalarField::from_fn(g, |x| x * x).unwrap();
        let d = derivative(&f).unwrap();
        let h2 = g.dx().powi(2);
        for i in 0..g.len() {
            assert!((d.get(i) - 2.0 * g.x(i)).abs() <= 10.0 * h2);
        }
        let l = laplacian(&f).unwrap();
        for i in 1..g.len() - 1 {
            assert!((l.get(i) - 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn derivative_of_sine() {
        let g = Grid1D::new(0.0, std::f64::consts::PI, 201).unwrap();
        let d = derivative(&ScalarField::from_fn(g, f64::sin).unwrap()).unwrap();
        let err = (0..g.len())
            .map(|i| (d.get(i) - g.x(i).cos()).abs())
            .fold(0.0, f64::max);
        assert!(err <= 2.0 * g.dx().powi(2), "sup error {err}");
    }

    #[test]
    fn laplacian_of_gaussian() {
        let g = Grid1D::new(-6.0, 6.0, 401).unwrap();
        let l = laplacian(&ScalarField::from_fn(g, |x| (-x * x).exp()).unwrap()).unwrap();
        let err = (0..g.len())
            .map(|i| {
                let x = g.x(i);
                (l.get(i) - (4.0 * x * x - 2.0) * (-x * x).exp()).abs()
            })
            .fold(0.0, f64::max);
        assert!(err <= 5.0 * g.dx().powi(2), "sup error {err}");
    }

    #[test]
    fn integrals() {
        let unit = Grid1D::new(0.0, 1.0, 11).unwrap();
        assert!((integrate(&ScalarField::constant(unit, 1.0).unwrap()) - 1.0).abs() < 1e-14);

        let g = Grid1D::new(-10.0, 10.0, 1001).unwrap();
        let sigma: f64 = 0.7;
        let gauss = ScalarField::from_fn(g, |x| {
            (-x * x / (2.0 * sigma * sigma)).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
        })
        .unwrap();
        assert!((integrate(&gauss) - 1.0).abs() < 1e-6);

        let odd = ScalarField::from_fn(g, |x| x).unwrap();
        assert!(integrate(&odd).abs() < 1e-12);

        let cum = cumulative_integral(&gauss);
        assert!((cum[g.len() - 1] - integrate(&gauss)).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_finite() {
        let g = Grid1D::new(0.0, 1.0, 10).unwrap();
        let mut v = vec![0.0; 10];
        v[3] = f64::NAN;
        assert!(matches!(
            ScalarField::new(g, v),
            Err(Error::NonFinite { index: 3, .. })
        ));
    }

    #[test]
    fn interpolation_is_linear_between_nodes() {
        let g = Grid1D::new(0.0, 1.0, 11).unwrap();
        let f = ScalarField::from_fn(g, |x| 3.0 * x - 1.0).unwrap();
        for x in [0.0, 0.05, 0.333, 0.99, 1.0] {
            assert!((f.interpolate(x) - (3.0 * x - 1.0)).abs() < 1e-12);
        }
        assert_eq!(f.interpolate(-5.0), -1.0);
        assert_eq!(f.interpolate(5.0), 2.0);
    }

    proptest! {
        // Discrete fundamental theorem: ∫f' = f(b) − f(a) = 0 for fields vanishing at both ends.
        #[test]
        fn integral_of_derivative_vanishes(
            center in -1.0f64..1.0,
            width in 0.3f64..1.5,
            amp in 0.1f64..5.0,
            n in 101usize..400,
        ) {
            let g = Grid1D::new(-8.0, 8.0, n).unwrap();
            let f = ScalarField::from_fn(g, |x| amp * (-(x - center).powi(2) / (width * width)).exp()).unwrap();
            let total = integrate(&derivative(&f).unwrap());
            prop_assert!(total.abs() <= 10.0 * g.dx().powi(2));
        }

        #[test]
        fn calculus_is_deterministic(seed in 0u64..1000) {
            let g = Grid1D::new(-2.0, 3.0, 64).unwrap();
            let f = ScalarField::from_fn(g, |x| (x * (seed as f64 + 1.0)).sin()).unwrap();
            let a = laplacian(&f).unwrap();
            let b = laplacian(&f.clone()).unwrap();
            prop_assert_eq!(a.values(), b.values());
        }
    }
}
