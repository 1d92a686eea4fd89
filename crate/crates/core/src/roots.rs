//! Scalar root finding: Brent's method (bisection with secant /
//! inverse-quadratic polish).

use crate::error::{Error, Result};

/// Find a root of `f` in the bracketing interval `[a, b]`.
///
/// Requires `f(a)` and `f(b)` of opposite sign. Converges to an interval of
/// width `tol_abs + tol_rel * |x|`.
pub fn brent<F>(mut f: F, a: f64, b: f64, tol_abs: f64, tol_rel: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut a, mut b) = (a, b);
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::BracketFailure(format!(
            "no sign change on [{a}, {b}]: f = ({fa:e}, {fb:e})"
        )));
    }

    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;

    for _ in 0..200 {
        if fb.abs() > fc.abs() {
            // b is the best estimate; keep it that way.
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * (tol_abs + tol_rel * b.abs());
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() < tol || fa.abs() <= fb.abs() {
            d = m;
            e = m;
        } else {
            let s = fb / fa;
            let (mut p, mut q) = if a == c {
                // Secant step.
                (2.0 * m * s, 1.0 - s)
            } else {
                // Inverse quadratic interpolation.
                let q = fa / fc;
                let r = fb / fc;
                (
                    s * (2.0 * m * q * (q - r) - (b - a) * (r - 1.0)),
                    (q - 1.0) * (r - 1.0) * (s - 1.0),
                )
            };
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min(e * q / 2.0).abs()
                && 2.0 * p < (3.0 * m * q).abs() - (tol * q).abs()
            {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol * m.signum() };
        fb = f(b)?;
        if (fb > 0.0) == (fc > 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
    }
    Err(Error::NoConvergence { iters: 200 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_simple_root() {
        let r = brent(|x| Ok(x * x - 2.0), 0.0, 2.0, 1e-14, 1e-14).unwrap();
        assert!((r - 2.0_f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn finds_cubic_root() {
        // rho^3 - 10 rho + 9 = 0 has roots 1 and (-1 +- sqrt(37))/2.
        let r = brent(|x| Ok(x * x * x - 10.0 * x + 9.0), 1.5, 10.0, 1e-14, 1e-14).unwrap();
        assert!((r - (37.0_f64.sqrt() - 1.0) / 2.0).abs() < 1e-13);
    }

    #[test]
    fn rejects_unbracketed() {
        assert!(brent(|x| Ok(x * x + 1.0), -1.0, 1.0, 1e-12, 1e-12).is_err());
    }
}
