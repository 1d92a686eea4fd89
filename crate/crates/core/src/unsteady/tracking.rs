//! Shock-path extraction, Lax-condition checks, and the potential-difference
//! energy diagnostic.

use crate::error::{Error, Result};
use crate::gas::GasLaw;
use crate::steady::{Side, SteadyShock};

use super::{FlowState, Grid};

/// Cells skipped past the located shock before trusting cell data for the
/// potential integral (the captured layer is ~2-3 cells wide).
const LAYER_SKIP_CELLS: f64 = 3.0;

/// Locate the shock as the midpoint-density crossing, refined by sub-cell
/// linear interpolation, and estimate its speed from the Rankine-Hugoniot
/// jump of states three cells off the layer.
pub fn locate_shock(shock: &SteadyShock, grid: &Grid, state: &FlowState) -> Result<(f64, f64)> {
    let (rho_minus, rho_plus) = shock.densities_at_shock();
    let mid = 0.5 * (rho_minus + rho_plus);
    let n = state.n_cells();

    let mut crossings: Vec<usize> = Vec::new();
    for i in 0..n - 1 {
        if state.rho[i] <= mid && state.rho[i + 1] > mid {
            crossings.push(i);
        }
    }
    let Some(&first) = crossings.first() else {
        return Err(Error::ShockLost);
    };
    if let Some(&last) = crossings.last() {
        if last - first > 5 {
            return Err(Error::MultipleShocks {
                count: crossings.len(),
            });
        }
    }

    let i = first;
    let frac = (mid - state.rho[i]) / (state.rho[i + 1] - state.rho[i]);
    let s = grid.center(i) + frac * grid.dx();

    // Shock speed from the jump relation [rho u] = [rho] sdot using states
    // clear of the numerical layer.
    let il = i.saturating_sub(3);
    let ir = (i + 1 + 3).min(n - 1);
    let drho = state.rho[ir] - state.rho[il];
    let sdot = if drho.abs() < 1e-12 * (state.rho[il].abs() + 1.0) {
        0.0
    } else {
        (state.momentum[ir] - state.momentum[il]) / drho
    };
    Ok((s, sdot))
}

/// Alternative locator: the interface with the steepest density rise.
pub fn locate_shock_gradient(
    _shock: &SteadyShock,
    grid: &Grid,
    state: &FlowState,
) -> Result<(f64, f64)> {
    let n = state.n_cells();
    let mut best = 0;
    let mut best_jump = f64::NEG_INFINITY;
    for i in 0..n - 1 {
        let jump = state.rho[i + 1] - state.rho[i];
        if jump > best_jump {
            best_jump = jump;
            best = i;
        }
    }
    if !(best_jump > 0.0) {
        return Err(Error::ShockLost);
    }
    Ok((grid.edge(best + 1), 0.0))
}

/// Lax geometric shock conditions with a strictness margin:
///
/// ```text
/// (u - c)(s-) > sdot + margin,  sdot > (u - c)(s+) + margin,
/// (u + c)(s+) > sdot + margin.
/// ```
///
/// A positive margin (proportional to `dx` in the solver) makes the strict
/// inequalities robust against noise in the measured speed; degenerate
/// pairs (equal states, reversed expansion shocks) fail for any margin.
pub fn check_lax(gas: &GasLaw, left: (f64, f64), right: (f64, f64), sdot: f64, margin: f64) -> bool {
    let (rho_l, u_l) = left;
    let (rho_r, u_r) = right;
    if !(rho_l > 0.0) || !(rho_r > 0.0) {
        return false;
    }
    let c_l = gas.csq_unchecked(rho_l).sqrt();
    let c_r = gas.csq_unchecked(rho_r).sqrt();
    (u_l - c_l) - sdot > margin && sdot - (u_r - c_r) > margin && (u_r + c_r) - sdot > margin
}

/// Discrete potential-difference field on the subsonic side and its energy.
#[derive(Debug, Clone)]
pub struct PsiDiagnostic {
    /// Shock-anchored value `Psi(t, s)`.
    pub psi_anchor: f64,
    /// `(x, Psi, Psi_t, Psi_x)` at cell centers right of the layer.
    pub cells: Vec<(f64, f64, f64, f64)>,
    /// Energy functional of the diagnostic field.
    pub e0: f64,
}

/// Potential-difference diagnostic
/// `Psi_x = a rho - a rho_bar_plus` anchored at the shock by
/// `Psi(t, s) = integral_{x0}^{s} a (rho_bar_minus - rho_bar_plus) dy`,
/// with `Psi_t = M_bar - a rho u` read from the state. The energy combines
/// the shock boundary term (coefficients frozen at `x0`) with the weighted
/// interior quadratic form.
pub fn psi_diagnostic(
    shock: &SteadyShock,
    grid: &Grid,
    state: &FlowState,
    s: f64,
) -> Result<PsiDiagnostic> {
    let gas = shock.gas();
    let nozzle = shock.nozzle();
    let mass_flux = shock.mass_flux();
    let x0 = shock.x0();
    let minus = shock.branch(Side::Minus);
    let plus = shock.branch(Side::Plus);

    // Anchor value by Simpson quadrature between x0 and s on the steady
    // extensions (clamped if the shock wandered past the stored margin).
    let anchor = {
        let m = 64;
        let h = (s - x0) / m as f64;
        let f = |x: f64| {
            nozzle.area_unchecked(x.clamp(nozzle.extended_domain().0, nozzle.extended_domain().1))
                * (minus.rho_clamped(x) - plus.rho_clamped(x))
        };
        let mut acc = f(x0) + f(s);
        for k in 1..m {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(x0 + k as f64 * h);
        }
        acc * h / 3.0
    };

    // Boundary coefficient (a' u+^2 u- / a) at x0.
    let (rho_m0, rho_p0) = shock.densities_at_shock();
    let a0 = nozzle.area_unchecked(x0);
    let u_plus_0 = mass_flux / (a0 * rho_p0);
    let u_minus_0 = mass_flux / (a0 * rho_m0);
    let boundary_coeff = nozzle.darea_unchecked(x0) * u_plus_0 * u_plus_0 * u_minus_0 / a0;

    let n = state.n_cells();
    let dx = grid.dx();
    let start = ((s + LAYER_SKIP_CELLS * dx - grid.left()) / dx - 0.5).ceil().max(0.0) as usize;

    let mut cells = Vec::new();
    let mut e_interior = 0.0;
    if start < n {
        // Psi_x and Psi_t at cell centers.
        let g: Vec<f64> = (start..n)
            .map(|i| {
                let x = grid.center(i);
                nozzle.area_unchecked(x) * (state.rho[i] - plus.rho_clamped(x))
            })
            .collect();
        let mut psi = anchor; // steady stretch between s and the first center
        for (k, i) in (start..n).enumerate() {
            if k > 0 {
                psi += 0.5 * dx * (g[k - 1] + g[k]);
            }
            let x = grid.center(i);
            let psi_t = mass_flux - nozzle.area_unchecked(x) * state.momentum[i];
            let rho_bar = plus.rho_clamped(x);
            let u_bar = mass_flux / (nozzle.area_unchecked(x) * rho_bar);
            let weight = gas.csq_unchecked(rho_bar) - u_bar * u_bar;
            e_interior += dx * u_bar * (psi_t * psi_t + weight * g[k] * g[k]);
            cells.push((x, psi, psi_t, g[k]));
        }
    }

    Ok(PsiDiagnostic {
        psi_anchor: anchor,
        cells,
        e0: boundary_coeff * anchor * anchor + e_interior,
    })
}
