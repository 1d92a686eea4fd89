//! Adaptive Dormand-Prince 5(4) integration for the scalar steady-flow ODE.

use crate::error::{Error, Result};

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;
const MAX_STEPS: usize = 1_000_000;

// Butcher tableau of the Dormand-Prince 5(4) embedded pair.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
// Difference between the 5th- and 4th-order weights, used for the error
// estimate.
const E: [f64; 7] = [
    35.0 / 384.0 - 5179.0 / 57600.0,
    0.0,
    500.0 / 1113.0 - 7571.0 / 16695.0,
    125.0 / 192.0 - 393.0 / 640.0,
    -2187.0 / 6784.0 + 92097.0 / 339200.0,
    11.0 / 84.0 - 187.0 / 2100.0,
    -1.0 / 40.0,
];

/// Integrate `dy/dx = f(x, y)` from `(x0, y0)` to `x1` (either direction).
///
/// Returns `y(x1)`. The right-hand side may fail (e.g. a sonic-line guard),
/// which aborts integration with that error.
pub fn integrate_to<F>(f: &mut F, x0: f64, y0: f64, x1: f64, rtol: f64, atol: f64) -> Result<f64>
where
    F: FnMut(f64, f64) -> Result<f64>,
{
    if x0 == x1 {
        return Ok(y0);
    }
    let dir = (x1 - x0).signum();
    let span = (x1 - x0).abs();
    let mut x = x0;
    let mut y = y0;
    let mut k0 = f(x, y)?;
    let mut h = (span * 1e-2).min(span) * dir;

    for _ in 0..MAX_STEPS {
        // Final step lands exactly on x1.
        if (x1 - x) * dir <= h.abs() {
            h = x1 - x;
        }
        let mut k = [k0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        for s in 0..6 {
            let mut yi = y;
            for (j, a) in A[s].iter().enumerate().take(s + 1) {
                yi += h * a * k[j];
            }
            k[s + 1] = f(x + C[s] * h, yi)?;
        }
        // k[6] is the FSAL stage: the 5th-order solution slope at x + h.
        let y_new = {
            let mut acc = y;
            for (j, a) in A[5].iter().enumerate() {
                acc += h * a * k[j];
            }
            acc
        };
        let err_term: f64 = E.iter().zip(k.iter()).map(|(e, ki)| e * ki).sum();
        let scale = atol + rtol * y.abs().max(y_new.abs());
        let err = (h * err_term / scale).abs();

        if err <= 1.0 {
            x += h;
            y = y_new;
            k0 = k[6];
            if (x1 - x) * dir <= 0.0 {
                return Ok(y);
            }
        }
        let factor = if err == 0.0 {
            MAX_FACTOR
        } else {
            (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
        };
        h *= factor;
        if h.abs() < 1e3 * f64::EPSILON * x.abs().max(1.0) {
            return Err(Error::InvalidParameter(format!(
                "step size underflow at x = {x}"
            )));
        }
    }
    Err(Error::NoConvergence { iters: MAX_STEPS })
}

/// Integrate through an ordered sequence of output points, returning `y` at
/// each of them. `xs[0]` is the initial position with value `y0`.
pub fn integrate_dense<F>(
    f: &mut F,
    xs: &[f64],
    y0: f64,
    rtol: f64,
    atol: f64,
) -> Result<Vec<f64>>
where
    F: FnMut(f64, f64) -> Result<f64>,
{
    let mut out = Vec::with_capacity(xs.len());
    out.push(y0);
    let mut y = y0;
    for w in xs.windows(2) {
        y = integrate_to(f, w[0], y, w[1], rtol, atol)?;
        out.push(y);
    }
    Ok(out)
}
