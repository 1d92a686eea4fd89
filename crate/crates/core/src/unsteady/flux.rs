//! Interface fluxes for the homogeneous isentropic system
//! `q_t + F(q)_x = 0`, `q = (rho, rho u)`, `F = (rho u, rho u^2 + p)`.

use crate::error::{Error, Result};
use crate::gas::GasLaw;

/// Exact flux of a state `(rho, m)`.
#[inline]
pub fn exact_flux(gas: &GasLaw, rho: f64, m: f64) -> (f64, f64) {
    (m, m * m / rho + gas.pressure_unchecked(rho))
}

/// HLL flux with Davis wave-speed bounds `u -+ c` taken over both states.
///
/// Two-wave system, so the two-wave HLL fan is complete; the flux is
/// consistent (`flux(q, q)` equals the exact flux) and reduces to upwinding
/// when both signal speeds have one sign.
pub fn hll_flux(gas: &GasLaw, left: (f64, f64), right: (f64, f64)) -> Result<(f64, f64)> {
    let (rho_l, m_l) = left;
    let (rho_r, m_r) = right;
    if !(rho_l > 0.0) {
        return Err(Error::NonPositiveDensity(rho_l));
    }
    if !(rho_r > 0.0) {
        return Err(Error::NonPositiveDensity(rho_r));
    }
    let u_l = m_l / rho_l;
    let u_r = m_r / rho_r;
    let c_l = gas.csq_unchecked(rho_l).sqrt();
    let c_r = gas.csq_unchecked(rho_r).sqrt();

    let s_l = (u_l - c_l).min(u_r - c_r);
    let s_r = (u_l + c_l).max(u_r + c_r);

    if s_l >= 0.0 {
        return Ok(exact_flux(gas, rho_l, m_l));
    }
    if s_r <= 0.0 {
        return Ok(exact_flux(gas, rho_r, m_r));
    }
    let f_l = exact_flux(gas, rho_l, m_l);
    let f_r = exact_flux(gas, rho_r, m_r);
    let inv = 1.0 / (s_r - s_l);
    Ok((
        (s_r * f_l.0 - s_l * f_r.0 + s_l * s_r * (rho_r - rho_l)) * inv,
        (s_r * f_l.1 - s_l * f_r.1 + s_l * s_r * (m_r - m_l)) * inv,
    ))
}
