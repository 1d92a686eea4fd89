//! Piecewise-cubic interpolants in Hermite form.
//!
//! Both the C2 spline (used for steady branch profiles) and the
//! monotonicity-preserving Fritsch-Carlson interpolant (used for tabulated
//! nozzle profiles) store node values plus node slopes, so evaluation and
//! differentiation share one code path.

use crate::error::{Error, Result};

/// Cubic Hermite interpolant: node values `y[i]` and slopes `m[i]` on a
/// strictly increasing knot vector.
#[derive(Debug, Clone)]
pub struct CubicHermite {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

fn check_knots(xs: &[f64], ys: &[f64]) -> Result<()> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "interpolant needs >= 2 matching knots, got {} x {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter(
            "interpolation knots must be strictly increasing".into(),
        ));
    }
    if xs.iter().chain(ys.iter()).any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(
            "interpolation data must be finite".into(),
        ));
    }
    Ok(())
}

/// Solve a tridiagonal system in place (Thomas algorithm).
/// `lower[0]` and `upper[n-1]` are unused.
fn solve_tridiagonal(lower: &[f64], diag: &mut [f64], upper: &[f64], rhs: &mut [f64]) {
    let n = diag.len();
    for i in 1..n {
        let w = lower[i] / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for i in (0..n - 1).rev() {
        rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diag[i];
    }
}

impl CubicHermite {
    /// C2 cubic spline with prescribed endpoint slopes.
    ///
    /// Exact end slopes keep the full interior accuracy up to the boundary
    /// (value O(h^4), slope O(h^3)), which the natural spline loses.
    pub fn clamped_spline(xs: Vec<f64>, ys: Vec<f64>, slope_lo: f64, slope_hi: f64) -> Result<Self> {
        check_knots(&xs, &ys)?;
        let n = xs.len();
        if n == 2 {
            // Single interval: the Hermite cubic with the given end data.
            return Ok(CubicHermite {
                slopes: vec![slope_lo, slope_hi],
                xs,
                ys,
            });
        }
        let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
        let sec: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();

        // Continuity of the second derivative gives a tridiagonal system for
        // the slopes m[1..n-1].
        let mut lower = vec![0.0; n];
        let mut diag = vec![1.0; n];
        let mut upper = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        rhs[0] = slope_lo;
        rhs[n - 1] = slope_hi;
        for i in 1..n - 1 {
            lower[i] = h[i];
            diag[i] = 2.0 * (h[i - 1] + h[i]);
            upper[i] = h[i - 1];
            rhs[i] = 3.0 * (h[i] * sec[i - 1] + h[i - 1] * sec[i]);
        }
        solve_tridiagonal(&lower, &mut diag, &upper, &mut rhs);
        Ok(CubicHermite {
            xs,
            ys,
            slopes: rhs,
        })
    }

    /// C2 cubic spline with natural end conditions (second derivative zero).
    pub fn natural_spline(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        check_knots(&xs, &ys)?;
        let n = xs.len();
        if n == 2 {
            let slope = (ys[1] - ys[0]) / (xs[1] - xs[0]);
            return Ok(CubicHermite {
                slopes: vec![slope, slope],
                xs,
                ys,
            });
        }
        let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
        let sec: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();

        let mut lower = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut upper = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        diag[0] = 2.0;
        upper[0] = 1.0;
        rhs[0] = 3.0 * sec[0];
        for i in 1..n - 1 {
            lower[i] = h[i];
            diag[i] = 2.0 * (h[i - 1] + h[i]);
            upper[i] = h[i - 1];
            rhs[i] = 3.0 * (h[i] * sec[i - 1] + h[i - 1] * sec[i]);
        }
        lower[n - 1] = 1.0;
        diag[n - 1] = 2.0;
        rhs[n - 1] = 3.0 * sec[n - 2];
        solve_tridiagonal(&lower, &mut diag, &upper, &mut rhs);
        Ok(CubicHermite {
            xs,
            ys,
            slopes: rhs,
        })
    }

    /// Monotonicity-preserving cubic (Fritsch-Carlson / PCHIP slopes).
    pub fn pchip(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        check_knots(&xs, &ys)?;
        let n = xs.len();
        if n == 2 {
            let slope = (ys[1] - ys[0]) / (xs[1] - xs[0]);
            return Ok(CubicHermite {
                slopes: vec![slope, slope],
                xs,
                ys,
            });
        }
        let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
        let sec: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();

        let mut m = vec![0.0; n];
        for i in 1..n - 1 {
            if sec[i - 1] * sec[i] <= 0.0 {
                m[i] = 0.0;
            } else {
                // Weighted harmonic mean keeps the interpolant monotone.
                let w1 = 2.0 * h[i] + h[i - 1];
                let w2 = h[i] + 2.0 * h[i - 1];
                m[i] = (w1 + w2) / (w1 / sec[i - 1] + w2 / sec[i]);
            }
        }
        m[0] = pchip_end_slope(h[0], h[1], sec[0], sec[1]);
        m[n - 1] = pchip_end_slope(h[n - 2], h[n - 3], sec[n - 2], sec[n - 3]);
        Ok(CubicHermite { xs, ys, slopes: m })
    }

    pub fn x_min(&self) -> f64 {
        self.xs[0]
    }

    pub fn x_max(&self) -> f64 {
        *self.xs.last().unwrap()
    }

    /// The knot vector and node values.
    pub fn knots(&self) -> (&[f64], &[f64]) {
        (&self.xs, &self.ys)
    }

    fn interval(&self, x: f64) -> usize {
        // Index i with xs[i] <= x < xs[i+1], clamped to valid intervals so
        // evaluation just outside the knot range extrapolates the end cubic.
        let n = self.xs.len();
        self.xs.partition_point(|&k| k <= x).clamp(1, n - 1) - 1
    }

    /// Interpolated value at `x` (end cubics extrapolate outside the knots).
    pub fn value(&self, x: f64) -> f64 {
        let i = self.interval(x);
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let (m0, m1) = (self.slopes[i] * h, self.slopes[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        y0 * (2.0 * t3 - 3.0 * t2 + 1.0)
            + m0 * (t3 - 2.0 * t2 + t)
            + y1 * (-2.0 * t3 + 3.0 * t2)
            + m1 * (t3 - t2)
    }

    /// Derivative of the interpolant at `x`.
    pub fn derivative(&self, x: f64) -> f64 {
        let i = self.interval(x);
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let (m0, m1) = (self.slopes[i], self.slopes[i + 1]);
        let t2 = t * t;
        let dy = (y1 - y0) / h;
        dy * (6.0 * t - 6.0 * t2)
            + m0 * (3.0 * t2 - 4.0 * t + 1.0)
            + m1 * (3.0 * t2 - 2.0 * t)
    }
}

/// One-sided three-point end slope, clipped per Fritsch-Carlson so the end
/// interval stays monotone.
fn pchip_end_slope(h0: f64, h1: f64, s0: f64, s1: f64) -> f64 {
    let m = ((2.0 * h0 + h1) * s0 - h0 * s1) / (h0 + h1);
    if m * s0 <= 0.0 {
        0.0
    } else if s0 * s1 <= 0.0 && m.abs() > 3.0 * s0.abs() {
        3.0 * s0
    } else {
        m
    }
}
