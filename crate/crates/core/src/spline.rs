//! C² cubic spline interpolation.
//!
//! End curvatures come from a local polynomial fit, so the spline reproduces
//! polynomials up to degree three exactly and keeps second-derivative
//! accuracy at the ends of the range.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const END_FIT_POINTS: usize = 6;

/// Scalar cubic spline through `(x_i, y_i)`, twice continuously differentiable.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    // second derivative at each knot
    m: Vec<f64>,
}

impl CubicSpline {
    /// Requires at least four strictly increasing knots.
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n != y.len() {
            return Err(Error::InvalidInput(format!(
                "spline knot count {} does not match value count {}",
                n,
                y.len()
            )));
        }
        if n < 4 {
            return Err(Error::InvalidInput(format!(
                "cubic spline needs at least 4 samples, got {n}"
            )));
        }
        if let Some(i) = x.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput(format!(
                "sample times must be strictly increasing (index {})",
                i + 1
            )));
        }
        let m = clamped_second_derivatives(&x, &y);
        Ok(Self { x, y, m })
    }

    pub fn knots(&self) -> &[f64] {
        &self.x
    }

    pub fn start(&self) -> f64 {
        self.x[0]
    }

    pub fn end(&self) -> f64 {
        self.x[self.x.len() - 1]
    }

    /// Value, first and second derivative at `t`. `t` must lie within the knot range.
    pub fn eval(&self, t: f64) -> Result<(f64, f64, f64)> {
        if !(t >= self.start() && t <= self.end()) {
            return Err(Error::OutsideHorizon {
                t,
                start: self.start(),
                end: self.end(),
            });
        }
        let i = self.interval(t);
        let (x0, x1) = (self.x[i], self.x[i + 1]);
        let (y0, y1) = (self.y[i], self.y[i + 1]);
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let h = x1 - x0;
        let a = x1 - t;
        let b = t - x0;
        let value = m0 * a * a * a / (6.0 * h)
            + m1 * b * b * b / (6.0 * h)
            + (y0 / h - m0 * h / 6.0) * a
            + (y1 / h - m1 * h / 6.0) * b;
        let slope = -m0 * a * a / (2.0 * h) + m1 * b * b / (2.0 * h) + (y1 - y0) / h
            - (m1 - m0) * h / 6.0;
        let curvature = (m0 * a + m1 * b) / h;
        Ok((value, slope, curvature))
    }

    fn interval(&self, t: f64) -> usize {
        let idx = self.x.partition_point(|&xi| xi <= t);
        idx.saturating_sub(1).min(self.x.len() - 2)
    }
}

fn clamped_second_derivatives(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let d: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();

    let m_first = end_curvature(x, y, 0);
    let m_last = end_curvature(x, y, n - 1);

    let size = n - 2;
    let mut lower = vec![0.0; size];
    let mut diag = vec![0.0; size];
    let mut upper = vec![0.0; size];
    let mut rhs = vec![0.0; size];
    for row in 0..size {
        let i = row + 1;
        lower[row] = h[i - 1];
        diag[row] = 2.0 * (h[i - 1] + h[i]);
        upper[row] = h[i];
        rhs[row] = 6.0 * (d[i] - d[i - 1]);
    }
    rhs[0] -= h[0] * m_first;
    rhs[size - 1] -= h[n - 2] * m_last;

    let inner = solve_tridiagonal(&lower, &diag, &upper, &rhs);
    let mut m = vec![0.0; n];
    m[0] = m_first;
    m[1..n - 1].copy_from_slice(&inner);
    m[n - 1] = m_last;
    m
}

/// Second derivative at knot `at` (first or last) of the polynomial through
/// the nearest `END_FIT_POINTS` knots.
fn end_curvature(x: &[f64], y: &[f64], at: usize) -> f64 {
    let count = END_FIT_POINTS.min(x.len());
    let range = if at == 0 { 0..count } else { x.len() - count..x.len() };
    let xs = &x[range.clone()];
    let ys = &y[range];
    let origin = x[at];
    let scale = (xs[count - 1] - xs[0]).abs();
    let vandermonde = DMatrix::from_fn(count, count, |i, j| ((xs[i] - origin) / scale).powi(j as i32));
    let coeffs = vandermonde
        .lu()
        .solve(&DVector::from_column_slice(ys))
        .expect("distinct knots give a nonsingular Vandermonde matrix");
    2.0 * coeffs[2] / (scale * scale)
}

/// Thomas algorithm. `lower[0]` and `upper[last]` are ignored.
pub(crate) fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = upper[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let denom = diag[i] - lower[i] * c[i - 1];
        c[i] = if i + 1 < n { upper[i] / denom } else { 0.0 };
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / denom;
    }
    let mut out = vec![0.0; n];
    out[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        out[i] = d[i] - c[i] * out[i + 1];
    }
    out
}
