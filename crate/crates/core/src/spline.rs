//! Natural cubic spline with analytic derivatives up to third order.

use crate::error::{Error, Result};
use crate::tridiag;

#[derive(Clone, Debug, PartialEq)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    // second derivatives at the knots
    m: Vec<f64>,
}

impl CubicSpline {
    /// Natural boundary conditions: zero second derivative at both ends.
    pub fn natural(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::Mismatch(format!(
                "spline has {} abscissae but {} ordinates",
                x.len(),
                y.len()
            )));
        }
        if x.len() < 3 {
            return Err(Error::Insufficient(
                "a cubic spline needs at least 3 samples".into(),
            ));
        }
        if x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::Insufficient("spline samples must be finite".into()));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Insufficient(
                "spline abscissae must be strictly increasing".into(),
            ));
        }
        let n = x.len();
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let inner = n - 2;
        let mut lower = vec![0.0; inner];
        let mut diag = vec![0.0; inner];
        let mut upper = vec![0.0; inner];
        let mut rhs = vec![0.0; inner];
        for k in 0..inner {
            let i = k + 1;
            lower[k] = h[i - 1];
            diag[k] = 2.0 * (h[i - 1] + h[i]);
            upper[k] = h[i];
            rhs[k] = 6.0 * ((y[i + 1] - y[i]) / h[i] - (y[i] - y[i - 1]) / h[i - 1]);
        }
        let interior = tridiag::solve(&lower, &diag, &upper, &rhs)?;
        let mut m = Vec::with_capacity(n);
        m.push(0.0);
        m.extend(interior);
        m.push(0.0);
        Ok(Self { x, y, m })
    }

    pub fn knots(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    pub fn first_knot(&self) -> f64 {
        self.x[0]
    }

    pub fn last_knot(&self) -> f64 {
        self.x[self.x.len() - 1]
    }

    fn interval(&self, x: f64) -> usize {
        let idx = self.x.partition_point(|&k| k <= x);
        idx.clamp(1, self.x.len() - 1) - 1
    }

    /// Value and first three derivatives at `x`. Outside the knot range the
    /// end cubics are continued.
    pub fn jet(&self, x: f64) -> [f64; 4] {
        let i = self.interval(x);
        let (x0, x1) = (self.x[i], self.x[i + 1]);
        let (y0, y1) = (self.y[i], self.y[i + 1]);
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let h = x1 - x0;
        let a = x1 - x;
        let b = x - x0;
        let c0 = y0 / h - m0 * h / 6.0;
        let c1 = y1 / h - m1 * h / 6.0;
        let value = m0 * a.powi(3) / (6.0 * h) + m1 * b.powi(3) / (6.0 * h) + c0 * a + c1 * b;
        let d1 = -m0 * a * a / (2.0 * h) + m1 * b * b / (2.0 * h) - c0 + c1;
        let d2 = (m0 * a + m1 * b) / h;
        let d3 = (m1 - m0) / h;
        [value, d1, d2, d3]
    }

    pub fn value(&self, x: f64) -> f64 {
        // exact at knots, bypassing the cubic evaluation
        if let Ok(i) = self.x.binary_search_by(|k| k.total_cmp(&x)) {
            return self.y[i];
        }
        self.jet(x)[0]
    }
}
