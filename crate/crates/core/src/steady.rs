//! Steady transonic shock construction.
//!
//! Steady flow with mass flux `M = a rho u` satisfies the scalar ODE
//!
//! ```text
//! d(rho)/dx = (a'/a) rho u^2 / (c^2 - u^2),      u = M / (a rho),
//! ```
//!
//! obtained by eliminating `u` from the steady momentum equation
//! `(M^2/(a rho))' + a p(rho)' = 0` (substituting the expansion back into
//! that form is covered by tests). A transonic shock solution integrates a
//! supersonic branch from the inflow data, jumps to the subsonic
//! Rankine-Hugoniot root at the shock position `x0`, and continues to the
//! outflow; `x0` is found by shooting on the outflow density.

use serde::Serialize;

use crate::error::{Error, Result, ShockSearchFailure};
use crate::gas::{GasLaw, Regime};
use crate::interp::CubicHermite;
use crate::nozzle::Nozzle;
use crate::ode;
use crate::roots::brent;

/// Relative sonic guard: the steady ODE is abandoned when
/// `|c^2 - u^2| < SONIC_GUARD_REL * c^2`.
pub const SONIC_GUARD_REL: f64 = 1e-6;

/// Inflow/outflow data: supersonic `(rho_l, u_l)` at the left end, outflow
/// density `rho_r` at the right end.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryData {
    pub rho_left: f64,
    pub u_left: f64,
    pub rho_right: f64,
}

/// Construction knobs. Defaults implement the documented choices: adaptive
/// 4(5) integration at relative tolerance 1e-10, ~2048 profile samples per
/// unit domain, branch extensions of 5% of the domain length.
#[derive(Debug, Clone, Copy)]
pub struct SteadyOptions {
    /// Profile samples across the whole domain (branches get a
    /// length-proportional share).
    pub branch_samples: usize,
    pub ode_rtol: f64,
    pub ode_atol: f64,
    /// Branch extension past the shock, as a fraction of `L - l`.
    pub delta_frac: f64,
    /// Scan resolution for locating sign changes of the shooting residual.
    pub scan_points: usize,
    /// Absolute tolerance on the shock position.
    pub x0_tol: f64,
}

impl Default for SteadyOptions {
    fn default() -> Self {
        SteadyOptions {
            branch_samples: 2048,
            ode_rtol: 1e-10,
            ode_atol: 1e-13,
            delta_frac: 0.05,
            scan_points: 128,
            x0_tol: 1e-12,
        }
    }
}

/// Which side of the shock a query refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Minus,
    Plus,
}

/// Dense samples of one steady branch with a C2 interpolant whose end slopes
/// are the exact ODE right-hand side.
#[derive(Debug, Clone)]
pub struct BranchProfile {
    interp: CubicHermite,
}

impl BranchProfile {
    fn from_samples(xs: Vec<f64>, rhos: Vec<f64>, slope_lo: f64, slope_hi: f64) -> Result<Self> {
        Ok(BranchProfile {
            interp: CubicHermite::clamped_spline(xs, rhos, slope_lo, slope_hi)?,
        })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.interp.x_min(), self.interp.x_max())
    }

    pub fn contains(&self, x: f64) -> bool {
        let (lo, hi) = self.domain();
        // Tolerate round-off at the ends.
        let slack = 1e-12 * (hi - lo).max(1.0);
        x >= lo - slack && x <= hi + slack
    }

    /// Interpolated density; errors outside the stored domain.
    pub fn rho(&self, x: f64) -> Result<f64> {
        if self.contains(x) {
            Ok(self.interp.value(x))
        } else {
            let (lo, hi) = self.domain();
            Err(Error::OutOfDomain { x, lo, hi })
        }
    }

    /// Density with the query clamped into the stored domain (used for ghost
    /// cells that may poke slightly past a truncated extension).
    pub fn rho_clamped(&self, x: f64) -> f64 {
        let (lo, hi) = self.domain();
        self.interp.value(x.clamp(lo, hi))
    }

    /// Interpolated `d rho / dx`.
    pub fn drho(&self, x: f64) -> Result<f64> {
        if self.contains(x) {
            Ok(self.interp.derivative(x))
        } else {
            let (lo, hi) = self.domain();
            Err(Error::OutOfDomain { x, lo, hi })
        }
    }
}

/// Right-hand side of the steady density ODE.
///
/// `d(rho)/dx = (a'/a) rho u^2 / (c^2 - u^2)` with `u = M/(a rho)`. Fails
/// with [`Error::SonicSingularity`] when the state is within the sonic guard
/// band, where the equation degenerates.
pub fn steady_rhs(gas: &GasLaw, nozzle: &Nozzle, mass_flux: f64, x: f64, rho: f64) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(Error::NonPositiveDensity(rho));
    }
    let a = nozzle.area(x)?;
    let da = nozzle.darea_unchecked(x);
    let u = mass_flux / (a * rho);
    let csq = gas.csq_unchecked(rho);
    let gap = csq - u * u;
    if gap.abs() < SONIC_GUARD_REL * csq {
        return Err(Error::SonicSingularity { x, gap });
    }
    Ok(da / a * rho * u * u / gap)
}

/// Integrate one steady branch from `(x_start, rho_start)` to `x_end`
/// (either direction), storing `samples + 1` points on a uniform grid.
pub fn integrate_branch(
    gas: &GasLaw,
    nozzle: &Nozzle,
    mass_flux: f64,
    rho_start: f64,
    x_start: f64,
    x_end: f64,
    samples: usize,
    opts: &SteadyOptions,
) -> Result<BranchProfile> {
    let samples = samples.max(8);
    let xs: Vec<f64> = (0..=samples)
        .map(|i| x_start + (x_end - x_start) * i as f64 / samples as f64)
        .collect();
    let mut rhs = |x: f64, rho: f64| steady_rhs(gas, nozzle, mass_flux, x, rho);
    let rhos = ode::integrate_dense(&mut rhs, &xs, rho_start, opts.ode_rtol, opts.ode_atol)?;

    let slope_first = steady_rhs(gas, nozzle, mass_flux, xs[0], rhos[0])?;
    let slope_last = steady_rhs(gas, nozzle, mass_flux, *xs.last().unwrap(), *rhos.last().unwrap())?;
    if x_end >= x_start {
        BranchProfile::from_samples(xs, rhos, slope_first, slope_last)
    } else {
        let xs: Vec<f64> = xs.into_iter().rev().collect();
        let rhos: Vec<f64> = rhos.into_iter().rev().collect();
        BranchProfile::from_samples(xs, rhos, slope_last, slope_first)
    }
}

/// Final value of a branch integration, without storing a profile.
fn integrate_endpoint(
    gas: &GasLaw,
    nozzle: &Nozzle,
    mass_flux: f64,
    rho_start: f64,
    x_start: f64,
    x_end: f64,
    opts: &SteadyOptions,
) -> Result<f64> {
    let mut rhs = |x: f64, rho: f64| steady_rhs(gas, nozzle, mass_flux, x, rho);
    ode::integrate_to(&mut rhs, x_start, rho_start, x_end, opts.ode_rtol, opts.ode_atol)
}

/// Subsonic Rankine-Hugoniot partner of a supersonic state.
///
/// Solves `p(rho+) + M^2/(a^2 rho+) = p(rho-) + M^2/(a^2 rho-)` for the root
/// on the subsonic side of the sonic density. The returned root satisfies
/// `rho+ > rho-` (the entropy condition).
pub fn rh_jump(gas: &GasLaw, mass_flux: f64, area: f64, rho_minus: f64) -> Result<f64> {
    if !(rho_minus > 0.0) {
        return Err(Error::NonPositiveDensity(rho_minus));
    }
    let u_minus = mass_flux / (area * rho_minus);
    let csq = gas.csq_unchecked(rho_minus);
    if u_minus * u_minus - csq < SONIC_GUARD_REL * csq {
        // At or below sonic there is no distinct subsonic root.
        return Err(Error::NoSubsonicRoot { rho_minus });
    }

    let momentum = |rho: f64| gas.pressure_unchecked(rho) + mass_flux * mass_flux / (area * area * rho);
    let target = momentum(rho_minus);

    // The momentum flux is minimized at the sonic density
    // rho_s = (M^2 / (A gamma a^2))^(1/(gamma+1)); the subsonic root is the
    // unique solution above it.
    let rho_sonic =
        (mass_flux * mass_flux / (gas.coeff * gas.gamma * area * area)).powf(1.0 / (gas.gamma + 1.0));
    let mut hi = 2.0 * rho_sonic;
    let mut doublings = 0;
    while momentum(hi) <= target {
        hi *= 2.0;
        doublings += 1;
        if doublings > 200 {
            return Err(Error::BracketFailure(format!(
                "no subsonic momentum-flux match above rho_sonic = {rho_sonic}"
            )));
        }
    }
    let mut rho_plus = brent(
        |rho| Ok(momentum(rho) - target),
        rho_sonic,
        hi,
        0.0,
        1e-13,
    )?;
    // Newton polish; the derivative of the momentum flux is c^2 - u^2.
    for _ in 0..3 {
        let u = mass_flux / (area * rho_plus);
        let deriv = gas.csq_unchecked(rho_plus) - u * u;
        if deriv <= 0.0 {
            break;
        }
        rho_plus -= (momentum(rho_plus) - target) / deriv;
    }
    if !(rho_plus > rho_minus) {
        return Err(Error::NoSubsonicRoot { rho_minus });
    }
    Ok(rho_plus)
}

/// Outflow density produced by placing the shock at `x0` and integrating
/// both branches (forward construction of admissible boundary data).
pub fn forward_outflow_density(
    gas: &GasLaw,
    nozzle: &Nozzle,
    rho_left: f64,
    u_left: f64,
    x0: f64,
    opts: &SteadyOptions,
) -> Result<f64> {
    let l = nozzle.left();
    let mass_flux = nozzle.area(l)? * rho_left * u_left;
    let rho_minus = integrate_endpoint(gas, nozzle, mass_flux, rho_left, l, x0, opts)?;
    let rho_plus = rh_jump(gas, mass_flux, nozzle.area(x0)?, rho_minus)?;
    integrate_endpoint(gas, nozzle, mass_flux, rho_plus, x0, nozzle.right(), opts)
}

/// A constructed steady transonic shock solution.
#[derive(Debug, Clone)]
pub struct SteadyShock {
    gas: GasLaw,
    nozzle: Nozzle,
    bc: BoundaryData,
    mass_flux: f64,
    x0: f64,
    delta: f64,
    /// Supersonic branch on `[l - margin, x0 + delta-]`.
    minus: BranchProfile,
    /// Subsonic branch on `[x0 - delta+, L]`.
    plus: BranchProfile,
    rho_minus_x0: f64,
    rho_plus_x0: f64,
    warnings: Vec<String>,
}

impl SteadyShock {
    pub fn gas(&self) -> &GasLaw {
        &self.gas
    }

    pub fn nozzle(&self) -> &Nozzle {
        &self.nozzle
    }

    pub fn boundary_data(&self) -> BoundaryData {
        self.bc
    }

    /// Steady mass flux `M = a(l) rho_l u_l`.
    pub fn mass_flux(&self) -> f64 {
        self.mass_flux
    }

    /// Shock position.
    pub fn x0(&self) -> f64 {
        self.x0
    }

    /// Extension half-width actually achieved.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn branch(&self, side: Side) -> &BranchProfile {
        match side {
            Side::Minus => &self.minus,
            Side::Plus => &self.plus,
        }
    }

    /// Densities immediately left/right of the shock.
    pub fn densities_at_shock(&self) -> (f64, f64) {
        (self.rho_minus_x0, self.rho_plus_x0)
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// `(rho, u)` of the requested branch at `x`, with `u = M/(a rho)`.
    pub fn state_at(&self, x: f64, side: Side) -> Result<(f64, f64)> {
        let rho = self.branch(side).rho(x)?;
        let u = self.mass_flux / (self.nozzle.area(x)? * rho);
        Ok((rho, u))
    }

    /// Branch velocity at `x`.
    pub fn velocity_at(&self, x: f64, side: Side) -> Result<f64> {
        Ok(self.state_at(x, side)?.1)
    }

    /// Residual of the Rankine-Hugoniot momentum balance at the shock,
    /// relative to the momentum flux scale.
    pub fn rh_residual(&self) -> f64 {
        let a = self.nozzle.area_unchecked(self.x0);
        let m2 = self.mass_flux * self.mass_flux;
        let phi = |rho: f64| self.gas.pressure_unchecked(rho) + m2 / (a * a * rho);
        (phi(self.rho_minus_x0) - phi(self.rho_plus_x0)).abs() / phi(self.rho_minus_x0)
    }

    /// Steady state sampled on a uniform grid, labeled by side (used by the
    /// CLI `steady` output).
    pub fn sample_table(&self, points_per_branch: usize) -> Vec<SteadySample> {
        let n = points_per_branch.max(2);
        let mut rows = Vec::with_capacity(2 * n);
        for (side, lo, hi) in [
            (Side::Minus, self.nozzle.left(), self.x0),
            (Side::Plus, self.x0, self.nozzle.right()),
        ] {
            for i in 0..n {
                let x = lo + (hi - lo) * i as f64 / (n - 1) as f64;
                if let Ok((rho, u)) = self.state_at(x, side) {
                    let area = self.nozzle.area_unchecked(x);
                    let mach = u.abs() / self.gas.csq_unchecked(rho).sqrt();
                    rows.push(SteadySample {
                        x,
                        side,
                        rho,
                        u,
                        area,
                        mach,
                    });
                }
            }
        }
        rows
    }
}

/// One row of the steady profile table.
#[derive(Debug, Clone, Copy)]
pub struct SteadySample {
    pub x: f64,
    pub side: Side,
    pub rho: f64,
    pub u: f64,
    pub area: f64,
    pub mach: f64,
}

/// Construct the steady transonic shock matching the boundary data.
///
/// Shoots on the shock position: supersonic branch from the left data,
/// Rankine-Hugoniot jump at the candidate `x0`, subsonic branch to `L`, and
/// a root solve so the outflow density matches `rho_right`. If several sign
/// changes exist the smallest `x0` is returned and a warning recorded.
pub fn build_steady_shock(
    gas: &GasLaw,
    nozzle: &Nozzle,
    bc: &BoundaryData,
    opts: &SteadyOptions,
) -> Result<SteadyShock> {
    if gas.regime(bc.rho_left, bc.u_left)? != Regime::Supersonic {
        return Err(Error::RegimeViolation(format!(
            "inflow state (rho = {}, u = {}) is not supersonic",
            bc.rho_left, bc.u_left
        )));
    }
    if !(bc.rho_right > 0.0) {
        return Err(Error::NonPositiveDensity(bc.rho_right));
    }
    let (l, big_l) = (nozzle.left(), nozzle.right());
    let mass_flux = nozzle.area(l)? * bc.rho_left * bc.u_left;

    // Shooting residual: outflow density produced by a shock at x0, minus
    // the target. Either branch may hit the sonic guard for bad candidates,
    // which just invalidates that candidate.
    let residual = |x0: f64| -> Result<f64> {
        let rho_minus = integrate_endpoint(gas, nozzle, mass_flux, bc.rho_left, l, x0, opts)?;
        let rho_plus = rh_jump(gas, mass_flux, nozzle.area(x0)?, rho_minus)?;
        let rho_out = integrate_endpoint(gas, nozzle, mass_flux, rho_plus, x0, big_l, opts)?;
        Ok(rho_out - bc.rho_right)
    };

    // Scan for sign changes strictly inside (l, L).
    let n_scan = opts.scan_points.max(8);
    let pad = (big_l - l) * 1e-4;
    let mut scan: Vec<(f64, f64)> = Vec::with_capacity(n_scan);
    for i in 0..n_scan {
        let x0 = (l + pad) + (big_l - l - 2.0 * pad) * i as f64 / (n_scan - 1) as f64;
        if let Ok(r) = residual(x0) {
            scan.push((x0, r));
        }
    }
    if scan.len() < 2 {
        return Err(Error::NoShockPosition {
            reason: ShockSearchFailure::NoSignChange,
        });
    }

    // A residual that does not depend on x0 (constant-area nozzle) means the
    // shock position is not determined by the outflow condition.
    let res_lo = scan.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let res_hi = scan.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let res_scale = res_lo.abs().max(res_hi.abs()).max(bc.rho_right.abs());
    if res_hi - res_lo < 1e-8 * res_scale {
        return Err(Error::NoShockPosition {
            reason: ShockSearchFailure::NonUnique,
        });
    }

    let mut brackets = Vec::new();
    for w in scan.windows(2) {
        if w[0].1 == 0.0 || w[0].1.signum() != w[1].1.signum() {
            brackets.push((w[0].0, w[1].0));
        }
    }
    let Some(&(xa, xb)) = brackets.first() else {
        return Err(Error::NoShockPosition {
            reason: ShockSearchFailure::NoSignChange,
        });
    };
    let mut warnings = Vec::new();
    if brackets.len() > 1 {
        warnings.push(format!(
            "multiple shock-position candidates ({} sign changes); returning the smallest",
            brackets.len()
        ));
    }

    let x0 = brent(residual, xa, xb, opts.x0_tol, 0.0)?;

    // Final branch construction with the extensions.
    let delta = opts.delta_frac * (big_l - l);
    let (lo_margin, _) = nozzle.extended_domain();
    let samples_per_len = opts.branch_samples as f64 / (big_l - l);
    let n_for = |len: f64| ((len * samples_per_len).ceil() as usize).max(16);

    let rho_minus_x0 = integrate_endpoint(gas, nozzle, mass_flux, bc.rho_left, l, x0, opts)?;
    let rho_plus_x0 = rh_jump(gas, mass_flux, nozzle.area(x0)?, rho_minus_x0)?;

    // Supersonic branch [l - margin, x0 + delta_m]; extensions shrink if the
    // sonic guard trips.
    let delta_m = shrink_until_ok(delta, |d| {
        integrate_endpoint(gas, nozzle, mass_flux, rho_minus_x0, x0, x0 + d, opts)
    })?;
    let left_ext = shrink_until_ok(l - lo_margin, |d| {
        integrate_endpoint(gas, nozzle, mass_flux, bc.rho_left, l, l - d, opts)
    })?;
    let minus = {
        let back = integrate_branch(
            gas,
            nozzle,
            mass_flux,
            bc.rho_left,
            l,
            l - left_ext,
            n_for(left_ext),
            opts,
        )?;
        let fwd = integrate_branch(
            gas,
            nozzle,
            mass_flux,
            bc.rho_left,
            l,
            x0 + delta_m,
            n_for(x0 + delta_m - l),
            opts,
        )?;
        join_branches(&back, &fwd)?
    };

    // Subsonic branch [x0 - delta_p, L].
    let delta_p = shrink_until_ok(delta, |d| {
        integrate_endpoint(gas, nozzle, mass_flux, rho_plus_x0, x0, x0 - d, opts)
    })?;
    let plus = {
        let back = integrate_branch(
            gas,
            nozzle,
            mass_flux,
            rho_plus_x0,
            x0,
            x0 - delta_p,
            n_for(delta_p),
            opts,
        )?;
        let fwd = integrate_branch(
            gas,
            nozzle,
            mass_flux,
            rho_plus_x0,
            x0,
            big_l,
            n_for(big_l - x0),
            opts,
        )?;
        join_branches(&back, &fwd)?
    };

    let shock = SteadyShock {
        gas: *gas,
        nozzle: nozzle.clone(),
        bc: *bc,
        mass_flux,
        x0,
        delta: delta_m.min(delta_p),
        minus,
        plus,
        rho_minus_x0,
        rho_plus_x0,
        warnings,
    };
    validate_shock(&shock)?;
    Ok(shock)
}

/// Halve `d` until `attempt(d)` succeeds (the extension may hit the sonic
/// guard); gives up below 1/64 of the requested width.
fn shrink_until_ok<F>(mut d: f64, mut attempt: F) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let floor = d / 64.0;
    loop {
        match attempt(d) {
            Ok(_) => return Ok(d),
            Err(Error::SonicSingularity { .. }) if d > floor => d *= 0.5,
            Err(e) => return Err(e),
        }
    }
}

/// Merge a backward and a forward integration sharing their start point into
/// one profile on the combined domain. The knot values are exact integration
/// outputs, so rebuilding the spline from them loses nothing.
fn join_branches(back: &BranchProfile, fwd: &BranchProfile) -> Result<BranchProfile> {
    let (bx, by) = back.interp.knots();
    let (fx, fy) = fwd.interp.knots();
    let x_join = fx[0];
    let mut xs = Vec::with_capacity(bx.len() + fx.len());
    let mut ys = Vec::with_capacity(bx.len() + fx.len());
    for (xi, yi) in bx.iter().zip(by.iter()) {
        if *xi < x_join - 1e-13 * (1.0 + x_join.abs()) {
            xs.push(*xi);
            ys.push(*yi);
        }
    }
    xs.extend_from_slice(fx);
    ys.extend_from_slice(fy);
    let slope_lo = back.interp.derivative(back.interp.x_min());
    let slope_hi = fwd.interp.derivative(fwd.interp.x_max());
    BranchProfile::from_samples(xs, ys, slope_lo, slope_hi)
}

/// Construction-time invariant checks: regimes, entropy, jump balance,
/// vacuum avoidance.
fn validate_shock(shock: &SteadyShock) -> Result<()> {
    if !(shock.rho_minus_x0 < shock.rho_plus_x0) {
        return Err(Error::NoSubsonicRoot {
            rho_minus: shock.rho_minus_x0,
        });
    }
    let rh = shock.rh_residual();
    if rh > 1e-10 {
        return Err(Error::BracketFailure(format!(
            "Rankine-Hugoniot residual {rh:e} above 1e-10"
        )));
    }
    for (side, expect) in [(Side::Minus, Regime::Supersonic), (Side::Plus, Regime::Subsonic)] {
        let (lo, hi) = shock.branch(side).domain();
        for i in 0..=256 {
            let x = lo + (hi - lo) * i as f64 / 256.0;
            let (rho, u) = shock.state_at(x, side)?;
            if !(rho > 0.0) {
                return Err(Error::NonPositiveDensity(rho));
            }
            // The extensions may approach (never cross) the sonic line, so
            // accept Sonic at the extreme sample only.
            let regime = shock.gas.regime(rho, u)?;
            if regime != expect && regime != Regime::Sonic {
                return Err(Error::RegimeViolation(format!(
                    "{side:?} branch is {regime:?} at x = {x}"
                )));
            }
        }
    }
    Ok(())
}
