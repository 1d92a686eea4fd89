//! Nozzle cross-section profiles `a(x)` on `[l, L]` and their slopes.

use std::fmt;

use crate::error::{Error, Result};
use crate::interp::CubicHermite;

/// Fraction of `L - l` by which the domain may be exceeded on each side.
/// Steady branches are extended past the shock and past the inflow boundary
/// (for ghost cells) within this margin.
pub const DEFAULT_EXTENSION_MARGIN: f64 = 0.05;

/// Number of sample points used to verify positivity at construction.
const POSITIVITY_SAMPLES: usize = 2048;

/// Cross-section shape. The canonical 1D / cylindrical / spherical cases are
/// `Constant` (a = 1), `Cone` (a = x) and `Sphere` (a = x^2).
#[derive(Debug, Clone)]
pub enum NozzleShape {
    Constant,
    Cone,
    Sphere,
    /// `a(x) = coeffs[0] + coeffs[1] x + coeffs[2] x^2 + ...`
    Polynomial(Vec<f64>),
    /// Monotone cubic through tabulated `(x, a)` samples.
    Tabulated(CubicHermite),
}

impl fmt::Display for NozzleShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NozzleShape::Constant => write!(f, "constant"),
            NozzleShape::Cone => write!(f, "cone"),
            NozzleShape::Sphere => write!(f, "sphere"),
            NozzleShape::Polynomial(c) => write!(f, "polynomial{c:?}"),
            NozzleShape::Tabulated(_) => write!(f, "tabulated"),
        }
    }
}

/// Nozzle geometry: a C1 area profile on `[l, L]` with a small extension
/// margin past both endpoints.
#[derive(Debug, Clone)]
pub struct Nozzle {
    left: f64,
    right: f64,
    margin: f64,
    shape: NozzleShape,
}

impl Nozzle {
    pub fn new(shape: NozzleShape, left: f64, right: f64) -> Result<Self> {
        Self::with_margin(shape, left, right, DEFAULT_EXTENSION_MARGIN)
    }

    /// `margin` is relative to the length `right - left`.
    pub fn with_margin(shape: NozzleShape, left: f64, right: f64, margin: f64) -> Result<Self> {
        if !(right > left) || !left.is_finite() || !right.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "nozzle needs right > left, got [{left}, {right}]"
            )));
        }
        if !(0.0..=0.5).contains(&margin) {
            return Err(Error::InvalidParameter(format!(
                "extension margin must be in [0, 0.5], got {margin}"
            )));
        }
        let nozzle = Nozzle {
            left,
            right,
            margin: margin * (right - left),
            shape,
        };
        // Reject profiles that dip to zero anywhere on the extended domain.
        let (lo, hi) = nozzle.extended_domain();
        for i in 0..=POSITIVITY_SAMPLES {
            let x = lo + (hi - lo) * i as f64 / POSITIVITY_SAMPLES as f64;
            let a = nozzle.area_raw(x);
            if !(a > 0.0) || !a.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "nozzle area not positive at x = {x} (a = {a})"
                )));
            }
        }
        Ok(nozzle)
    }

    /// Tabulated profile from two-column CSV text (`x, a` per line; `#`
    /// comment lines and an optional non-numeric header are skipped).
    pub fn from_csv_str(text: &str, left: f64, right: f64) -> Result<Self> {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split(',').map(str::trim);
            let (Some(a), Some(b)) = (cols.next(), cols.next()) else {
                return Err(Error::Config(format!(
                    "profile line {} needs two comma-separated columns",
                    lineno + 1
                )));
            };
            match (a.parse::<f64>(), b.parse::<f64>()) {
                (Ok(x), Ok(y)) => {
                    xs.push(x);
                    ys.push(y);
                }
                _ if xs.is_empty() => continue, // header row
                _ => {
                    return Err(Error::Config(format!(
                        "profile line {}: cannot parse '{line}'",
                        lineno + 1
                    )))
                }
            }
        }
        let interp = CubicHermite::pchip(xs, ys)?;
        Self::new(NozzleShape::Tabulated(interp), left, right)
    }

    pub fn left(&self) -> f64 {
        self.left
    }

    pub fn right(&self) -> f64 {
        self.right
    }

    pub fn length(&self) -> f64 {
        self.right - self.left
    }

    pub fn shape(&self) -> &NozzleShape {
        &self.shape
    }

    /// Domain including the extension margin on both sides.
    pub fn extended_domain(&self) -> (f64, f64) {
        (self.left - self.margin, self.right + self.margin)
    }

    fn check_domain(&self, x: f64) -> Result<()> {
        let (lo, hi) = self.extended_domain();
        if (lo..=hi).contains(&x) {
            Ok(())
        } else {
            Err(Error::OutOfDomain { x, lo, hi })
        }
    }

    fn area_raw(&self, x: f64) -> f64 {
        match &self.shape {
            NozzleShape::Constant => 1.0,
            NozzleShape::Cone => x,
            NozzleShape::Sphere => x * x,
            NozzleShape::Polynomial(c) => c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci),
            NozzleShape::Tabulated(t) => t.value(x),
        }
    }

    fn darea_raw(&self, x: f64) -> f64 {
        match &self.shape {
            NozzleShape::Constant => 0.0,
            NozzleShape::Cone => 1.0,
            NozzleShape::Sphere => 2.0 * x,
            NozzleShape::Polynomial(c) => {
                let mut acc = 0.0;
                for (i, &ci) in c.iter().enumerate().skip(1).rev() {
                    acc = acc * x + i as f64 * ci;
                }
                acc
            }
            NozzleShape::Tabulated(t) => t.derivative(x),
        }
    }

    /// Cross-section area `a(x)`.
    pub fn area(&self, x: f64) -> Result<f64> {
        self.check_domain(x)?;
        Ok(self.area_raw(x))
    }

    /// Slope `a'(x)`.
    pub fn darea(&self, x: f64) -> Result<f64> {
        self.check_domain(x)?;
        Ok(self.darea_raw(x))
    }

    /// `a(x)` without the domain check, for hot loops over grid points that
    /// are known to lie in the extended domain.
    #[inline]
    pub(crate) fn area_unchecked(&self, x: f64) -> f64 {
        self.area_raw(x)
    }

    #[inline]
    pub(crate) fn darea_unchecked(&self, x: f64) -> f64 {
        self.darea_raw(x)
    }

    /// Whether the nozzle widens at `x0` (`a'(x0) > 0`), the stability
    /// condition for a shock sitting at `x0`.
    pub fn check_widening(&self, x0: f64) -> bool {
        self.darea_raw(x0) > 0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_areas() {
        let cone = Nozzle::new(NozzleShape::Cone, 1.0, 3.0).unwrap();
        assert_eq!(cone.area(2.0).unwrap(), 2.0);
        let sphere = Nozzle::new(NozzleShape::Sphere, 1.0, 4.0).unwrap();
        assert_eq!(sphere.area(3.0).unwrap(), 9.0);
        let constant = Nozzle::new(NozzleShape::Constant, 0.0, 1.0).unwrap();
        assert_eq!(constant.area(0.77).unwrap(), 1.0);
    }

    #[test]
    fn canonical_slopes() {
        let sphere = Nozzle::new(NozzleShape::Sphere, 1.0, 4.0).unwrap();
        assert_eq!(sphere.darea(3.0).unwrap(), 6.0);
        let constant = Nozzle::new(NozzleShape::Constant, 0.0, 1.0).unwrap();
        assert_eq!(constant.darea(0.5).unwrap(), 0.0);
        let linear = Nozzle::new(NozzleShape::Polynomial(vec![1.0, 1.0]), 1.0, 3.0).unwrap();
        assert_eq!(linear.darea(2.4).unwrap(), 1.0);
    }

    #[test]
    fn widening_check() {
        let widening = Nozzle::new(NozzleShape::Polynomial(vec![1.0, 1.0]), 1.0, 3.0).unwrap();
        assert!(widening.check_widening(2.0));
        let narrowing = Nozzle::new(NozzleShape::Polynomial(vec![3.0, -1.0]), 0.0, 2.0).unwrap();
        assert!(!narrowing.check_widening(2.0 - 1e-9));
        let sphere = Nozzle::new(NozzleShape::Sphere, 1.0, 2.0).unwrap();
        assert!(sphere.check_widening(1.5));
    }

    #[test]
    fn out_of_domain_beyond_margin() {
        let n = Nozzle::new(NozzleShape::Cone, 1.0, 3.0).unwrap();
        // 5% margin on a length-2 domain allows +-0.1.
        assert!(n.area(0.95).is_ok());
        assert!(n.area(3.05).is_ok());
        assert!(matches!(n.area(0.85), Err(Error::OutOfDomain { .. })));
        assert!(matches!(n.darea(3.2), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn rejects_nonpositive_area() {
        // a = x on a domain crossing zero.
        assert!(Nozzle::new(NozzleShape::Cone, -1.0, 1.0).is_err());
        // Polynomial dipping negative inside the domain.
        assert!(Nozzle::new(NozzleShape::Polynomial(vec![1.0, -1.0]), 0.0, 2.0).is_err());
    }

    #[test]
    fn polynomial_slope_matches_centered_difference() {
        let n = Nozzle::new(NozzleShape::Polynomial(vec![2.0, -0.3, 0.5, 0.01]), 0.5, 3.0)
            .unwrap();
        let h = 1e-6;
        for &x in &[0.7, 1.5, 2.9] {
            let fd = (n.area(x + h).unwrap() - n.area(x - h).unwrap()) / (2.0 * h);
            assert!((fd - n.darea(x).unwrap()).abs() < 1e-8);
        }
    }

    #[test]
    fn tabulated_csv_round_trip() {
        let mut text = String::from("x,a\n");
        for i in 0..=40 {
            let x = 1.0 + 2.0 * i as f64 / 40.0;
            text.push_str(&format!("{x},{}\n", 1.0 + x));
        }
        let n = Nozzle::from_csv_str(&text, 1.0, 3.0).unwrap();
        // Linear data reproduced exactly by the monotone interpolant.
        assert!((n.area(1.77).unwrap() - 2.77).abs() < 1e-12);
        assert!((n.darea(2.3).unwrap() - 1.0).abs() < 1e-10);
    }
}
