//! Rankine-Hugoniot consistent perturbed initial data.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gas::GasLaw;
use crate::steady::{rh_jump, Side, SteadyShock};

use super::{FlowState, Grid};

/// A single smooth compactly-supported bump.
#[derive(Debug, Clone, Copy)]
pub struct BumpSpec {
    pub center: f64,
    pub width: f64,
}

impl BumpSpec {
    /// Mollifier profile: `exp(1 - 1/(1 - xi^2))` inside `|xi| < 1`, zero
    /// outside; peak value 1 at the center.
    pub fn eval(&self, x: f64) -> f64 {
        let xi = (x - self.center) / self.width;
        let r2 = xi * xi;
        if r2 >= 1.0 {
            0.0
        } else {
            (1.0 - 1.0 / (1.0 - r2)).exp()
        }
    }
}

/// Shape of the density perturbation applied to the subsonic branch.
#[derive(Debug, Clone)]
pub enum BumpKind {
    None,
    Single(BumpSpec),
    /// `count` random bumps with signs and positions drawn from the seed.
    Random { count: usize, seed: u64 },
}

/// Perturbation of the steady shock: a shock displacement plus a smooth
/// density bump on the subsonic side. The state just downstream of the
/// displaced shock is corrected to the static Rankine-Hugoniot partner of
/// the upstream state, then blended into the bumped profile over
/// `blend_width`.
#[derive(Debug, Clone)]
pub struct PerturbationSpec {
    /// Bump amplitude.
    pub epsilon: f64,
    /// Initial shock displacement `x~0 - x0`.
    pub x0_shift: f64,
    pub bump: BumpKind,
    /// Width of the blend between the jump-corrected and bumped profiles,
    /// as a fraction of the domain length.
    pub blend_frac: f64,
}

impl PerturbationSpec {
    pub fn pure_shift(x0_shift: f64) -> Self {
        PerturbationSpec {
            epsilon: 0.0,
            x0_shift,
            bump: BumpKind::None,
            blend_frac: 0.1,
        }
    }

    pub fn bump(epsilon: f64, center: f64, width: f64) -> Self {
        PerturbationSpec {
            epsilon,
            x0_shift: 0.0,
            bump: BumpKind::Single(BumpSpec { center, width }),
            blend_frac: 0.1,
        }
    }
}

/// Residual of the unsteady jump relation
/// `[p + rho u^2][rho] = [rho u]^2` for a pair of states.
pub fn rh2_residual(gas: &GasLaw, left: (f64, f64), right: (f64, f64)) -> f64 {
    let (rho_l, u_l) = left;
    let (rho_r, u_r) = right;
    let momentum_jump = (gas.pressure_unchecked(rho_r) + rho_r * u_r * u_r)
        - (gas.pressure_unchecked(rho_l) + rho_l * u_l * u_l);
    let mass_flux_jump = rho_r * u_r - rho_l * u_l;
    momentum_jump * (rho_r - rho_l) - mass_flux_jump * mass_flux_jump
}

/// Quintic smoothstep: 0 at 0, 1 at 1, C2 at both ends.
fn smoothstep(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x * x * x * (10.0 + x * (-15.0 + 6.0 * x))
}

/// Build the cell-averaged perturbed initial state.
///
/// Left of the displaced shock the state is the supersonic steady extension.
/// Right of it, the subsonic extension plus `epsilon * bump` is blended with
/// the displacement-corrected Rankine-Hugoniot state so that the jump
/// relation holds exactly at the displaced shock position.
pub fn perturb_initial(
    shock: &SteadyShock,
    grid: &Grid,
    spec: &PerturbationSpec,
) -> Result<FlowState> {
    let gas = shock.gas();
    let nozzle = shock.nozzle();
    let x_tilde = shock.x0() + spec.x0_shift;
    let minus = shock.branch(Side::Minus);
    let plus = shock.branch(Side::Plus);
    if !minus.contains(x_tilde) || !plus.contains(x_tilde) {
        return Err(Error::InvalidParameter(format!(
            "shock displacement {} exceeds the stored branch extensions (delta = {})",
            spec.x0_shift,
            shock.delta()
        )));
    }

    let mass_flux = shock.mass_flux();
    let area_tilde = nozzle.area(x_tilde)?;
    let rho_minus_tilde = minus.rho(x_tilde)?;
    // Static jump partner at the displaced position; its existence is the
    // repairability condition.
    let rho_plus_star = rh_jump(gas, mass_flux, area_tilde, rho_minus_tilde)
        .map_err(|_| Error::RhRepairFailed { x: x_tilde })?;
    let u_plus_star = mass_flux / (area_tilde * rho_plus_star);

    let bumps: Vec<(f64, BumpSpec)> = match &spec.bump {
        BumpKind::None => Vec::new(),
        BumpKind::Single(b) => vec![(1.0, *b)],
        BumpKind::Random { count, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let span = grid.right() - x_tilde;
            (0..*count)
                .map(|_| {
                    let center = x_tilde + span * rng.gen_range(0.2..0.8);
                    let width = span * rng.gen_range(0.05..0.15);
                    let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                    (sign, BumpSpec { center, width })
                })
                .collect()
        }
    };
    let bump_of = |x: f64| -> f64 {
        bumps.iter().map(|(sign, b)| sign * b.eval(x)).sum::<f64>()
    };

    // Point values of the initial profiles.
    let left_profile = |x: f64| -> (f64, f64) {
        let rho = minus.rho_clamped(x);
        let u = mass_flux / (nozzle.area_unchecked(x) * rho);
        (rho, rho * u)
    };
    let blend_width = spec.blend_frac * nozzle.length();
    let rho_plus_at_tilde = plus.rho_clamped(x_tilde);
    let u_plus_at_tilde = mass_flux / (area_tilde * rho_plus_at_tilde);
    let right_profile = |x: f64| -> (f64, f64) {
        let rho_steady = plus.rho_clamped(x);
        let u_steady = mass_flux / (nozzle.area_unchecked(x) * rho_steady);
        // Bumped branch profile vs the jump-corrected profile (steady shape
        // offset to pass through the displaced jump state).
        let rho_bumped = rho_steady + spec.epsilon * bump_of(x);
        let rho_anchored = rho_steady + (rho_plus_star - rho_plus_at_tilde);
        let u_anchored = u_steady + (u_plus_star - u_plus_at_tilde);
        let eta = smoothstep((x - x_tilde) / blend_width);
        let rho = (1.0 - eta) * rho_anchored + eta * rho_bumped;
        let u = (1.0 - eta) * u_anchored + eta * u_steady;
        (rho, rho * u)
    };

    // Cell averages by 3-point Gauss quadrature, splitting the straddling
    // cell at the shock.
    let gauss = |f: &dyn Fn(f64) -> (f64, f64), a: f64, b: f64| -> (f64, f64) {
        const T: f64 = 0.774_596_669_241_483_4; // sqrt(3/5)
        const W: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut acc = (0.0, 0.0);
        for (w, t) in W.iter().zip([-T, 0.0, T]) {
            let v = f(mid + half * t);
            acc.0 += w * v.0;
            acc.1 += w * v.1;
        }
        (0.5 * acc.0, 0.5 * acc.1)
    };

    let n = grid.n_cells();
    let mut rho = vec![0.0; n];
    let mut momentum = vec![0.0; n];
    for i in 0..n {
        let (xl, xr) = (grid.edge(i), grid.edge(i + 1));
        let avg = if xr <= x_tilde {
            gauss(&left_profile, xl, xr)
        } else if xl >= x_tilde {
            gauss(&right_profile, xl, xr)
        } else {
            let wl = (x_tilde - xl) / (xr - xl);
            let a = gauss(&left_profile, xl, x_tilde);
            let b = gauss(&right_profile, x_tilde, xr);
            (wl * a.0 + (1.0 - wl) * b.0, wl * a.1 + (1.0 - wl) * b.1)
        };
        rho[i] = avg.0;
        momentum[i] = avg.1;
    }
    let state = FlowState {
        t: 0.0,
        rho,
        momentum,
    };
    state.check_positive(grid)?;
    Ok(state)
}
