//! Tridiagonal elimination (Thomas algorithm) for real and complex systems.

use num_traits::{One, Zero};
use std::ops::{Div, Mul, Sub};

use crate::error::{Error, Result};

/// Pivots smaller than this (in modulus) abort the elimination.
const PIVOT_FLOOR: f64 = 1e-300;

pub trait Scalar:
    Copy + Zero + One + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self>
{
    fn modulus(self) -> f64;
}

impl Scalar for f64 {
    fn modulus(self) -> f64 {
        self.abs()
    }
}

impl Scalar for num_complex::Complex64 {
    fn modulus(self) -> f64 {
        self.norm()
    }
}

/// LU factors of a tridiagonal matrix, reusable across right-hand sides.
///
/// Row `i` reads `lower[i] * u[i-1] + diag[i] * u[i] + upper[i] * u[i+1]`;
/// `lower[0]` and `upper[n-1]` are ignored.
#[derive(Clone, Debug)]
pub struct Factored<T> {
    lower: Vec<T>,
    inv_pivot: Vec<T>,
    upper_scaled: Vec<T>,
}

impl<T: Scalar> Factored<T> {
    pub fn new(lower: &[T], diag: &[T], upper: &[T]) -> Result<Self> {
        let n = diag.len();
        if lower.len() != n || upper.len() != n {
            return Err(Error::Mismatch(format!(
                "tridiagonal bands have lengths {}, {}, {}",
                lower.len(),
                n,
                upper.len()
            )));
        }
        let mut inv_pivot = Vec::with_capacity(n);
        let mut upper_scaled = Vec::with_capacity(n);
        for i in 0..n {
            let pivot = if i == 0 {
                diag[0]
            } else {
                diag[i] - lower[i] * upper_scaled[i - 1]
            };
            if !(pivot.modulus() > PIVOT_FLOOR) {
                return Err(Error::SolverBreakdown { row: i });
            }
            let inv = T::one() / pivot;
            inv_pivot.push(inv);
            upper_scaled.push(upper[i] * inv);
        }
        Ok(Self {
            lower: lower.to_vec(),
            inv_pivot,
            upper_scaled,
        })
    }

    pub fn len(&self) -> usize {
        self.inv_pivot.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inv_pivot.is_empty()
    }

    /// Solves in place: `rhs` is overwritten with the solution.
    pub fn solve_in_place(&self, rhs: &mut [T]) {
        let n = self.len();
        debug_assert_eq!(rhs.len(), n);
        if n == 0 {
            return;
        }
        rhs[0] = rhs[0] * self.inv_pivot[0];
        for i in 1..n {
            rhs[i] = (rhs[i] - self.lower[i] * rhs[i - 1]) * self.inv_pivot[i];
        }
        for i in (0..n - 1).rev() {
            rhs[i] = rhs[i] - self.upper_scaled[i] * rhs[i + 1];
        }
    }
}

/// One-shot solve of a tridiagonal system.
pub fn solve<T: Scalar>(lower: &[T], diag: &[T], upper: &[T], rhs: &[T]) -> Result<Vec<T>> {
    let factored = Factored::new(lower, diag, upper)?;
    if rhs.len() != factored.len() {
        return Err(Error::Mismatch(format!(
            "right-hand side has length {} but matrix has {} rows",
            rhs.len(),
            factored.len()
        )));
    }
    let mut out = rhs.to_vec();
    factored.solve_in_place(&mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn apply<T: Scalar>(lower: &[T], diag: &[T], upper: &[T], u: &[T]) -> Vec<T> {
        let n = diag.len();
        (0..n)
            .map(|i| {
                let mut acc = diag[i] * u[i];
                if i > 0 {
                    acc = acc + lower[i] * u[i - 1];
                }
                if i + 1 < n {
                    acc = acc + upper[i] * u[i + 1];
                }
                acc
            })
            .collect()
    }

    #[test]
    fn real_system_round_trips() {
        let n = 50;
        let lower: Vec<f64> = (0..n).map(|i| -1.0 - 0.01 * i as f64).collect();
        let upper: Vec<f64> = (0..n).map(|i| -0.5 + 0.02 * i as f64).collect();
        let diag: Vec<f64> = (0..n).map(|i| 4.0 + (i as f64).sin()).collect();
        let x: Vec<f64> = (0..n).map(|i| (0.3 * i as f64).cos()).collect();
        let b = apply(&lower, &diag, &upper, &x);
        let got = solve(&lower, &diag, &upper, &b).unwrap();
        for (g, e) in got.iter().zip(&x) {
            assert!((g - e).abs() < 1e-13);
        }
    }

    #[test]
    fn complex_system_round_trips() {
        let n = 40;
        let i1 = Complex64::new(0.0, 1.0);
        let lower = vec![i1 * 0.3; n];
        let upper = vec![i1 * 0.3; n];
        let diag: Vec<Complex64> = (0..n)
            .map(|k| Complex64::new(1.0, 0.1 * k as f64))
            .collect();
        let x: Vec<Complex64> = (0..n)
            .map(|k| Complex64::new((k as f64).cos(), (k as f64).sin()))
            .collect();
        let b = apply(&lower, &diag, &upper, &x);
        let got = solve(&lower, &diag, &upper, &b).unwrap();
        for (g, e) in got.iter().zip(&x) {
            assert!((g - e).norm() < 1e-13);
        }
    }

    #[test]
    fn zero_pivot_is_reported() {
        let err = solve(&[0.0, 1.0], &[0.0, 1.0], &[1.0, 0.0], &[1.0, 1.0]).unwrap_err();
        assert!(matches!(err, Error::SolverBreakdown { row: 0 }));
    }
}
