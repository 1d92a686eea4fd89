//! Shared fixtures for unit tests.

use crate::gas::GasLaw;
use crate::nozzle::{Nozzle, NozzleShape};
use crate::steady::{
    build_steady_shock, forward_outflow_density, BoundaryData, SteadyOptions, SteadyShock,
};

/// Boundary data with the outflow density forward-constructed so the shock
/// sits at `x0`.
pub fn forward_constructed_bc(
    gas: &GasLaw,
    nozzle: &Nozzle,
    rho_left: f64,
    u_left: f64,
    x0: f64,
    opts: &SteadyOptions,
) -> BoundaryData {
    let rho_right = forward_outflow_density(gas, nozzle, rho_left, u_left, x0, opts).unwrap();
    BoundaryData {
        rho_left,
        u_left,
        rho_right,
    }
}

/// The widening isothermal reference configuration: `gamma = 1`, `A = 1`,
/// `a = 1 + x` on `[1, 3]`, inflow `(1, 2)`, outflow forward-constructed
/// so the shock sits at `x0 = 2`.
pub fn stable_iso_shock() -> SteadyShock {
    let gas = GasLaw::isothermal(1.0);
    let nozzle = Nozzle::new(NozzleShape::Polynomial(vec![1.0, 1.0]), 1.0, 3.0).unwrap();
    let opts = SteadyOptions::default();
    let bc = forward_constructed_bc(&gas, &nozzle, 1.0, 2.0, 2.0, &opts);
    build_steady_shock(&gas, &nozzle, &bc, &opts).unwrap()
}

/// The narrowing mirror configuration: `a = 5 - x` on `[1, 3]`, inflow
/// `(1, 2.5)`, shock forward-constructed at `x0 = 2`.
pub fn unstable_iso_shock() -> SteadyShock {
    let gas = GasLaw::isothermal(1.0);
    let nozzle = Nozzle::new(NozzleShape::Polynomial(vec![5.0, -1.0]), 1.0, 3.0).unwrap();
    let opts = SteadyOptions::default();
    let bc = forward_constructed_bc(&gas, &nozzle, 1.0, 2.5, 2.0, &opts);
    build_steady_shock(&gas, &nozzle, &bc, &opts).unwrap()
}
