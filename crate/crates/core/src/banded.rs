//! Band matrices with LU factorization (partial pivoting).
//!
//! Rows are stored LAPACK-style with room for the fill-in generated by row
//! interchanges: entry (i, j) lives at `rows[i][j + kl - i]`, with
//! `i - kl <= j <= i + ku + kl`.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub trait BandScalar:
    Copy
    + PartialEq
    + std::fmt::Debug
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Div<Output = Self>
{
    fn zero() -> Self;
    fn magnitude(self) -> f64;
}

impl BandScalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl BandScalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

#[derive(Debug, Clone)]
pub struct BandMatrix<T> {
    n: usize,
    kl: usize,
    ku: usize,
    rows: Vec<Vec<T>>,
}

impl<T: BandScalar> BandMatrix<T> {
    pub fn new(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            rows: vec![vec![T::zero(); width]; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn in_band(&self, i: usize, j: usize) -> bool {
        j + self.kl >= i && j <= i + self.ku
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        if self.in_band(i, j) {
            self.rows[i][j + self.kl - i]
        } else {
            T::zero()
        }
    }

    /// Panics if (i, j) is outside the declared band.
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        assert!(self.in_band(i, j), "({i}, {j}) outside band");
        self.rows[i][j + self.kl - i] = v;
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).fold(T::zero(), |acc, j| acc + self.get(i, j) * x[j])
            })
            .collect()
    }

    pub fn factor(mut self) -> Result<BandLu<T>> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let span = ku + kl;
        let mut pivots = Vec::with_capacity(n);
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = self.rows[k][kl].magnitude();
            for r in k + 1..=last_row {
                let m = self.rows[r][k + kl - r].magnitude();
                if m > best {
                    best = m;
                    p = r;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::SingularMatrix { row: k });
            }
            pivots.push(p);
            let last_col = (k + span).min(n - 1);
            if p != k {
                for j in k..=last_col {
                    let a = self.rows[k][j + kl - k];
                    self.rows[k][j + kl - k] = self.rows[p][j + kl - p];
                    self.rows[p][j + kl - p] = a;
                }
            }
            let pivot = self.rows[k][kl];
            for r in k + 1..=last_row {
                let factor = self.rows[r][k + kl - r] / pivot;
                self.rows[r][k + kl - r] = factor;
                if factor == T::zero() {
                    continue;
                }
                for j in k + 1..=last_col {
                    let u = self.rows[k][j + kl - k];
                    let slot = &mut self.rows[r][j + kl - r];
                    *slot = *slot - factor * u;
                }
            }
        }
        Ok(BandLu {
            lu: self,
            pivots,
        })
    }
}

#[derive(Debug, Clone)]
pub struct BandLu<T> {
    lu: BandMatrix<T>,
    pivots: Vec<usize>,
}

impl<T: BandScalar> BandLu<T> {
    pub fn solve_in_place(&self, b: &mut [T]) {
        let (n, kl, ku) = (self.lu.n, self.lu.kl, self.lu.ku);
        assert_eq!(b.len(), n);
        let rows = &self.lu.rows;
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            for r in k + 1..=(k + kl).min(n - 1) {
                b[r] = b[r] - rows[r][k + kl - r] * bk;
            }
        }
        let span = ku + kl;
        for k in (0..n).rev() {
            let mut acc = b[k];
            for j in k + 1..=(k + span).min(n - 1) {
                acc = acc - rows[k][j + kl - k] * b[j];
            }
            b[k] = acc / rows[k][kl];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_tridiagonal_system() {
        let n = 6;
        let mut a = BandMatrix::new(n, 1, 1);
        for i in 0..n {
            a.set(i, i, 2.0);
            if i > 0 {
                a.set(i, i - 1, -1.0);
            }
            if i + 1 < n {
                a.set(i, i + 1, -1.0);
            }
        }
        let x: Vec<f64> = (0..n).map(|i| i as f64 - 2.5).collect();
        let mut b = a.mul_vec(&x);
        a.factor().unwrap().solve_in_place(&mut b);
        for (xi, bi) in x.iter().zip(&b) {
            assert!((xi - bi).abs() < 1e-12);
        }
    }

    #[test]
    fn pivots_through_zero_diagonal() {
        // Zero leading diagonal forces a row interchange.
        let n = 5;
        let mut a = BandMatrix::new(n, 2, 2);
        let dense = [
            [0.0, 1.0, 2.0, 0.0, 0.0],
            [3.0, 1.0, -1.0, 4.0, 0.0],
            [1.0, -2.0, 0.5, 1.0, 2.0],
            [0.0, 1.0, 1.0, -3.0, 1.0],
            [0.0, 0.0, 2.0, 1.0, 1.0],
        ];
        for (i, row) in dense.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    a.set(i, j, v);
                }
            }
        }
        let x = [1.0, -2.0, 0.5, 3.0, -1.0];
        let mut b = a.mul_vec(&x);
        a.factor().unwrap().solve_in_place(&mut b);
        for (xi, bi) in x.iter().zip(&b) {
            assert!((xi - bi).abs() < 1e-12, "{xi} vs {bi}");
        }
    }

    #[test]
    fn complex_pentadiagonal() {
        let n = 40;
        let mut a = BandMatrix::new(n, 2, 2);
        for i in 0..n {
            a.set(i, i, Complex64::new(1.0, 0.3 * i as f64));
            for d in 1..=2 {
                if i >= d {
                    a.set(i, i - d, Complex64::new(0.0, 0.7 / d as f64));
                }
                if i + d < n {
                    a.set(i, i + d, Complex64::new(0.0, 0.7 / d as f64));
                }
            }
        }
        let x: Vec<Complex64> = (0..n)
            .map(|i| Complex64::new((i as f64).sin(), (i as f64 * 0.3).cos()))
            .collect();
        let mut b = a.mul_vec(&x);
        a.factor().unwrap().solve_in_place(&mut b);
        let err = x.iter().zip(&b).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12);
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a: BandMatrix<f64> = BandMatrix::new(3, 1, 1);
        assert!(matches!(a.factor(), Err(Error::SingularMatrix { row: 0 })));
    }
}
