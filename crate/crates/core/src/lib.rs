//! Numerical laboratory for transonic shocks in quasi-one-dimensional
//! nozzle flow.
//!
//! The crate constructs steady transonic shock solutions of the isentropic
//! Euler system with a geometric source term, evolves perturbed initial data
//! with a shock-capturing finite-volume scheme, and analyzes the linearized
//! dynamics around the steady shock: the energy-dissipation balance of the
//! linearized problem, the spectral radius of its time-`T` evolution
//! operator, and the exponential relaxation rate of the shock position.
//!
//! Pipeline overview:
//!
//! 1. [`gas`] / [`nozzle`] — pressure law and duct geometry.
//! 2. [`steady`] — steady shock construction by shooting on the shock
//!    position.
//! 3. [`unsteady`] — finite-volume evolution of perturbed data, shock path
//!    extraction and decay-rate fitting.
//! 4. [`linear`] — linearized wave problem on the subsonic side: energy
//!    ledger, evolution operator, spectral radius.
//! 5. [`harness`] — scenario configs, experiment orchestration, reports.

pub mod error;
pub mod fitting;
pub mod gas;
pub mod harness;
pub mod interp;
pub mod linear;
pub mod nozzle;
pub mod ode;
pub mod roots;
pub mod scenario;
pub mod steady;
#[cfg(test)]
pub(crate) mod testutil;
pub mod unsteady;

pub use error::{Error, Result};
pub use gas::{GasLaw, Regime};
pub use nozzle::{Nozzle, NozzleShape};
pub use steady::{build_steady_shock, BoundaryData, Side, SteadyOptions, SteadyShock};
