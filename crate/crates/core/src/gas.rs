//! Isentropic pressure law `p = A rho^gamma`, sound speed, and flow-regime
//! classification.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative half-width of the sonic classification band.
pub const DEFAULT_SONIC_TOL: f64 = 1e-12;

/// Flow regime of a state relative to the local sound speed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    Supersonic,
    Subsonic,
    Sonic,
}

/// Pressure law `p(rho) = A rho^gamma` with `A > 0`, `gamma >= 1`.
///
/// `gamma = 1` is the isothermal gas (constant sound speed `sqrt(A)`),
/// `gamma > 1` the polytropic gas. Both satisfy `p > 0`, `p' > 0`,
/// `p'' >= 0` for `rho > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GasLaw {
    /// Pressure coefficient `A`.
    #[serde(rename = "A")]
    pub coeff: f64,
    /// Adiabatic exponent `gamma`.
    pub gamma: f64,
}

impl GasLaw {
    pub fn new(coeff: f64, gamma: f64) -> Result<Self> {
        if !(coeff > 0.0) || !coeff.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "pressure coefficient must be positive, got {coeff}"
            )));
        }
        if !(gamma >= 1.0) || !gamma.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "adiabatic exponent must be >= 1, got {gamma}"
            )));
        }
        Ok(GasLaw { coeff, gamma })
    }

    /// Isothermal gas, `p = A rho`.
    pub fn isothermal(coeff: f64) -> Self {
        GasLaw { coeff, gamma: 1.0 }
    }

    pub fn is_isothermal(&self) -> bool {
        self.gamma == 1.0
    }

    fn check_density(&self, rho: f64) -> Result<()> {
        if rho > 0.0 && rho.is_finite() {
            Ok(())
        } else {
            Err(Error::NonPositiveDensity(rho))
        }
    }

    /// `p(rho) = A rho^gamma`. Requires `rho > 0`.
    pub fn pressure(&self, rho: f64) -> Result<f64> {
        self.check_density(rho)?;
        Ok(self.pressure_unchecked(rho))
    }

    /// `p'(rho) = A gamma rho^(gamma-1)`. Requires `rho > 0`.
    pub fn dpressure(&self, rho: f64) -> Result<f64> {
        self.check_density(rho)?;
        Ok(self.csq_unchecked(rho))
    }

    /// Sound speed `c(rho) = sqrt(p'(rho))`. Requires `rho > 0`.
    pub fn sound_speed(&self, rho: f64) -> Result<f64> {
        self.check_density(rho)?;
        Ok(self.csq_unchecked(rho).sqrt())
    }

    /// Classify `(rho, u)` with the default sonic tolerance.
    pub fn regime(&self, rho: f64, u: f64) -> Result<Regime> {
        self.regime_with_tol(rho, u, DEFAULT_SONIC_TOL)
    }

    /// Classify `(rho, u)` with a relative sonic band of half-width `tol`:
    /// supersonic iff `|u| > c (1 + tol)`, subsonic iff `|u| < c (1 - tol)`.
    pub fn regime_with_tol(&self, rho: f64, u: f64, tol: f64) -> Result<Regime> {
        self.check_density(rho)?;
        let c = self.csq_unchecked(rho).sqrt();
        let speed = u.abs();
        if speed > c * (1.0 + tol) {
            Ok(Regime::Supersonic)
        } else if speed < c * (1.0 - tol) {
            Ok(Regime::Subsonic)
        } else {
            Ok(Regime::Sonic)
        }
    }

    // Unchecked kernels for hot loops; callers guarantee rho > 0.

    #[inline]
    pub(crate) fn pressure_unchecked(&self, rho: f64) -> f64 {
        if self.gamma == 1.0 {
            self.coeff * rho
        } else {
            self.coeff * rho.powf(self.gamma)
        }
    }

    /// `c^2(rho) = p'(rho)`, no density check.
    #[inline]
    pub(crate) fn csq_unchecked(&self, rho: f64) -> f64 {
        if self.gamma == 1.0 {
            self.coeff
        } else {
            self.coeff * self.gamma * rho.powf(self.gamma - 1.0)
        }
    }

    /// `p''(rho)`, no density check.
    #[inline]
    pub(crate) fn d2pressure_unchecked(&self, rho: f64) -> f64 {
        if self.gamma == 1.0 {
            0.0
        } else {
            self.coeff * self.gamma * (self.gamma - 1.0) * rho.powf(self.gamma - 2.0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn isothermal_pressure_is_linear() {
        let gas = GasLaw::isothermal(1.0);
        assert_eq!(gas.pressure(3.0).unwrap(), 3.0);
    }

    #[test]
    fn unit_polytropic_pressure() {
        let gas = GasLaw::new(1.0, 2.0).unwrap();
        assert_eq!(gas.pressure(1.0).unwrap(), 1.0);
    }

    #[test]
    fn polytropic_pressure_matches_pow() {
        // A = 0.5, gamma = 1.4, rho = 2: p = 0.5 * 2^1.4.
        // 2^1.4 = exp(1.4 ln 2); frozen from high-precision evaluation.
        let gas = GasLaw::new(0.5, 1.4).unwrap();
        let expected = 1.319_507_910_772_894_2; // 0.5 * 2^1.4
        assert!((gas.pressure(2.0).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn isothermal_sound_speed_constant() {
        let gas = GasLaw::isothermal(1.0);
        for rho in [0.1, 1.0, 7.3] {
            assert!((gas.sound_speed(rho).unwrap() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn sound_speed_values() {
        let gas = GasLaw::new(1.0, 2.0).unwrap();
        assert!((gas.sound_speed(1.0).unwrap() - 2.0_f64.sqrt()).abs() < 1e-15);

        // gamma = 1.4, rho = 0.5: c = sqrt(1.4 * 0.5^0.4).
        let gas = GasLaw::new(1.0, 1.4).unwrap();
        let expected = (1.4_f64 * 0.5_f64.powf(0.4)).sqrt();
        assert!((gas.sound_speed(0.5).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn regime_classification() {
        let gas = GasLaw::isothermal(1.0);
        assert_eq!(gas.regime(1.0, 2.0).unwrap(), Regime::Supersonic);
        assert_eq!(gas.regime(1.0, 0.5).unwrap(), Regime::Subsonic);
        assert_eq!(gas.regime(1.0, 1.0).unwrap(), Regime::Sonic);
        // Sign of u does not matter.
        assert_eq!(gas.regime(1.0, -2.0).unwrap(), Regime::Supersonic);
    }

    #[test]
    fn rejects_nonpositive_density() {
        let gas = GasLaw::isothermal(1.0);
        assert!(matches!(
            gas.pressure(0.0),
            Err(Error::NonPositiveDensity(_))
        ));
        assert!(matches!(
            gas.sound_speed(-1.0),
            Err(Error::NonPositiveDensity(_))
        ));
        assert!(matches!(
            gas.regime(0.0, 1.0),
            Err(Error::NonPositiveDensity(_))
        ));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(GasLaw::new(0.0, 1.4).is_err());
        assert!(GasLaw::new(1.0, 0.9).is_err());
    }

    #[test]
    fn sound_speed_squared_matches_pressure_difference_quotient() {
        // c^2 = p' checked against a centered difference, O(h^2).
        let gas = GasLaw::new(0.7, 1.4).unwrap();
        let h = 1e-6;
        for rho in [0.5, 1.0, 2.5] {
            let fd =
                (gas.pressure(rho + h).unwrap() - gas.pressure(rho - h).unwrap()) / (2.0 * h);
            let csq = gas.sound_speed(rho).unwrap().powi(2);
            assert!((fd - csq).abs() < 1e-8, "rho = {rho}: fd {fd} vs c^2 {csq}");
        }
    }

    proptest! {
        #[test]
        fn pressure_and_sound_speed_monotone(
            coeff in 0.1f64..10.0,
            gamma in 1.0f64..3.0,
            rho1 in 0.05f64..20.0,
            scale in 1.001f64..5.0,
        ) {
            let gas = GasLaw::new(coeff, gamma).unwrap();
            let rho2 = rho1 * scale;
            prop_assert!(gas.pressure(rho1).unwrap() < gas.pressure(rho2).unwrap());
            prop_assert!(gas.sound_speed(rho1).unwrap() <= gas.sound_speed(rho2).unwrap());
        }

        #[test]
        fn pressure_is_convex(
            coeff in 0.1f64..10.0,
            gamma in 1.0f64..3.0,
            rho in 0.1f64..10.0,
        ) {
            let gas = GasLaw::new(coeff, gamma).unwrap();
            let h = rho * 1e-4;
            let second = (gas.pressure(rho + h).unwrap()
                - 2.0 * gas.pressure(rho).unwrap()
                + gas.pressure(rho - h).unwrap())
                / (h * h);
            prop_assert!(second >= -1e-6);
        }
    }
}
