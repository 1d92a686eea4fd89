//! Experiment orchestration: full stability experiments, sweeps over
//! scenario collections, refinement studies, and file emission.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fitting::ExpFit;
use crate::linear::{
    assemble_coefficients, assemble_st, bump_initial_data, check_dissipation_identity,
    linearized_shock_rate, spectral_radius, EnergyLedger, SpectrumOptions, SpectrumReport,
};
use crate::scenario::ScenarioConfig;
use crate::steady::{build_steady_shock, SteadyOptions, SteadyShock};
use crate::unsteady::{
    fast_transit_time, simulate, Grid, SimOutput, SimulateOptions,
};

/// Outcome of a stability experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Stable,
    Unstable,
    Inconclusive,
}

/// Full report of one scenario run.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub scenario: ScenarioConfig,
    // Steady summary.
    pub x0: f64,
    pub mass_flux: f64,
    pub rh_residual: f64,
    pub rho_minus_at_x0: f64,
    pub rho_plus_at_x0: f64,
    pub widening_at_shock: bool,
    // Linear suite.
    pub identity_residual: f64,
    pub spectrum: SpectrumReport,
    pub linearized_shock_rate: f64,
    // Nonlinear run.
    pub lambda_fit: Option<f64>,
    pub fit_r_squared: Option<f64>,
    pub initial_offset: f64,
    pub final_offset: f64,
    pub offset_at_5_transits: Option<f64>,
    pub lax_all_ok: bool,
    pub verdict: Verdict,
    pub verdict_reason: String,
    pub wall_seconds: f64,
    pub warnings: Vec<String>,
}

/// Stage-labeled error wrapper.
fn stage<T>(name: &'static str, r: Result<T>) -> Result<T> {
    r.map_err(|e| e.in_stage(name))
}

/// Build the steady shock described by a scenario.
pub fn build_shock_for(config: &ScenarioConfig) -> Result<SteadyShock> {
    let gas = config.build_gas()?;
    let nozzle = config.build_nozzle()?;
    let bc = config.resolve_boundary(&gas, &nozzle)?;
    build_steady_shock(&gas, &nozzle, &bc, &SteadyOptions::default())
}

/// Run the complete experiment: steady construction, linear energy
/// identity and spectrum, nonlinear simulation, rate fits, and the
/// stability verdict.
pub fn run_scenario(config: &ScenarioConfig) -> Result<RunReport> {
    config.validate()?;
    let started = Instant::now();
    let mut warnings = Vec::new();

    let shock = stage("steady", build_shock_for(config))?;
    warnings.extend(shock.warnings().iter().cloned());
    let (rho_minus_at_x0, rho_plus_at_x0) = shock.densities_at_shock();
    let widening = shock.nozzle().check_widening(shock.x0());

    // Linear suite.
    let n_nodes = config.linear.n_nodes;
    let coeffs = stage("linear", assemble_coefficients(shock.gas(), &shock, n_nodes))?;
    let slow_transit = coeffs.default_horizon() / 2.0;
    let identity_residual = stage(
        "linear",
        check_dissipation_identity(
            &coeffs,
            bump_initial_data(&coeffs, 0.5, 0.2),
            vec![0.0; n_nodes],
            config.linear.identity_transits * slow_transit,
        ),
    )?;
    let op = stage("spectrum", assemble_st(&coeffs, config.linear.t_horizon))?;
    let spectrum = stage(
        "spectrum",
        spectral_radius(&op, &SpectrumOptions::default()),
    )?;
    let shock_rate = linearized_shock_rate(&shock);

    // Nonlinear run.
    let grid = stage("simulate", Grid::for_nozzle(shock.nozzle(), config.grid.n_cells))?;
    let transit = fast_transit_time(&shock);
    let t_end = config.run.t_end.unwrap_or(10.0 * transit);
    let sample_dt = config.run.sample_dt.unwrap_or(t_end / 400.0);
    let mut sim_opts = SimulateOptions::new(t_end, sample_dt);
    sim_opts.cfl = config.run.cfl;
    sim_opts.snapshot_times = config.run.snapshot_times.clone();
    let spec = config.build_perturbation();
    let sim = stage("simulate", simulate(&shock, &grid, &spec, &sim_opts))?;
    warnings.extend(sim.warnings.iter().cloned());

    let initial_offset = sim.trace.initial_offset();
    let final_offset = sim
        .trace
        .samples
        .last()
        .map(|s| (s.s - shock.x0()).abs())
        .unwrap_or(f64::NAN);
    let offset_at_5_transits = sim.trace.offset_at(5.0 * transit);
    let lax_all_ok = sim.trace.all_lax_ok();
    let (lambda_fit, fit_r_squared) = match &sim.trace.fit {
        Some(fit) => (Some(fit.lambda), Some(fit.r_squared)),
        None => (None, None),
    };

    // Verdict.
    let thresholds = config.verdict;
    let radius = spectrum.spectral_radius;
    let dx_nodes = coeffs.dx();
    let (verdict, verdict_reason) = if radius < thresholds.radius_max
        && lambda_fit.map_or(false, |l| l > 0.0)
        && initial_offset > 0.0
        && final_offset < thresholds.shrink_frac * initial_offset
    {
        (
            Verdict::Stable,
            format!(
                "radius {radius:.4} < {}, lambda_fit {:.4} > 0, offset shrank {initial_offset:.3e} -> {final_offset:.3e}",
                thresholds.radius_max,
                lambda_fit.unwrap_or(f64::NAN)
            ),
        )
    } else if radius >= 1.0 - 2.0 * dx_nodes
        && initial_offset > 0.0
        && offset_at_5_transits.map_or(false, |o| o >= thresholds.growth_factor * initial_offset)
    {
        (
            Verdict::Unstable,
            format!(
                "radius {radius:.4} >= 1 - 2dx, offset grew {initial_offset:.3e} -> {:.3e} by 5 transits",
                offset_at_5_transits.unwrap_or(f64::NAN)
            ),
        )
    } else {
        let mut reason = format!(
            "radius {radius:.4}, lambda_fit {lambda_fit:?}, offset {initial_offset:.3e} -> {final_offset:.3e}"
        );
        if !warnings.is_empty() {
            reason.push_str(&format!("; warnings: {}", warnings.join(" | ")));
        }
        (Verdict::Inconclusive, reason)
    };

    Ok(RunReport {
        scenario: config.clone(),
        x0: shock.x0(),
        mass_flux: shock.mass_flux(),
        rh_residual: shock.rh_residual(),
        rho_minus_at_x0,
        rho_plus_at_x0,
        widening_at_shock: widening,
        identity_residual,
        spectrum,
        linearized_shock_rate: shock_rate,
        lambda_fit,
        fit_r_squared,
        initial_offset,
        final_offset,
        offset_at_5_transits,
        lax_all_ok,
        verdict,
        verdict_reason,
        wall_seconds: started.elapsed().as_secs_f64(),
        warnings,
    })
}

/// Run independent scenarios concurrently; failures are collected, not
/// fatal.
pub fn sweep(configs: &[ScenarioConfig]) -> Vec<Result<RunReport>> {
    configs.par_iter().map(run_scenario).collect()
}

/// One level of a refinement study.
#[derive(Debug, Clone, Serialize)]
pub struct RefinementRow {
    pub n_cells: usize,
    pub n_nodes: usize,
    pub identity_residual: f64,
    /// Max-norm density drift after one time unit from exact steady data.
    pub steady_drift: f64,
    pub lambda_fit: Option<f64>,
}

/// Repeat a scenario at `n, 2n, 4n, ...` cells (and nodes), reporting the
/// per-level residuals. `levels >= 3` so observed orders are meaningful.
pub fn refinement_study(config: &ScenarioConfig, levels: usize) -> Result<Vec<RefinementRow>> {
    if levels < 3 {
        return Err(Error::InvalidParameter(format!(
            "refinement study needs >= 3 levels, got {levels}"
        )));
    }
    let shock = build_shock_for(config)?;
    let mut rows = Vec::new();
    for level in 0..levels {
        let factor = 1usize << level;
        let n_cells = config.grid.n_cells * factor;
        let n_nodes = config.linear.n_nodes * factor;

        let coeffs = assemble_coefficients(shock.gas(), &shock, n_nodes)?;
        let slow_transit = coeffs.default_horizon() / 2.0;
        let identity_residual = check_dissipation_identity(
            &coeffs,
            bump_initial_data(&coeffs, 0.5, 0.2),
            vec![0.0; n_nodes],
            config.linear.identity_transits * slow_transit,
        )?;

        let grid = Grid::for_nozzle(shock.nozzle(), n_cells)?;
        let steady_drift = {
            use crate::unsteady::{cfl_dt, perturb_initial, step, BcMode, PerturbationSpec};
            let spec = PerturbationSpec::pure_shift(0.0);
            let state0 = perturb_initial(&shock, &grid, &spec)?;
            let mut state = state0.clone();
            let gas = shock.gas();
            let nozzle = shock.nozzle();
            while state.t < 1.0 {
                let dt = cfl_dt(gas, &state, grid.dx(), config.run.cfl).min(1.0 - state.t);
                state = step(gas, nozzle, &BcMode::Shock(&shock), &grid, &state, dt)?;
            }
            state
                .rho
                .iter()
                .zip(state0.rho.iter())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0_f64, f64::max)
        };

        let transit = fast_transit_time(&shock);
        let t_end = config.run.t_end.unwrap_or(10.0 * transit);
        let mut sim_opts = SimulateOptions::new(t_end, config.run.sample_dt.unwrap_or(t_end / 400.0));
        sim_opts.cfl = config.run.cfl;
        let sim = simulate(&shock, &grid, &config.build_perturbation(), &sim_opts)?;
        rows.push(RefinementRow {
            n_cells,
            n_nodes,
            identity_residual,
            steady_drift,
            lambda_fit: sim.trace.fit.as_ref().map(|f| f.lambda),
        });
    }
    Ok(rows)
}

/// Observed convergence orders (log2 ratios) of a per-level quantity.
pub fn observed_orders(values: &[f64]) -> Vec<f64> {
    values
        .windows(2)
        .map(|w| (w[0] / w[1]).log2())
        .collect()
}

// ---------------------------------------------------------------------
// File emission (CSV with a header row; summaries as JSON).
// ---------------------------------------------------------------------

pub fn write_steady_csv(shock: &SteadyShock, points_per_branch: usize, path: &Path) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "x,side,rho,u,a,mach")?;
    for row in shock.sample_table(points_per_branch) {
        let side = match row.side {
            crate::steady::Side::Minus => "minus",
            crate::steady::Side::Plus => "plus",
        };
        writeln!(
            f,
            "{},{},{},{},{},{}",
            row.x, side, row.rho, row.u, row.area, row.mach
        )?;
    }
    Ok(())
}

#[derive(Serialize)]
struct SteadySummary {
    x0: f64,
    #[serde(rename = "M")]
    mass_flux: f64,
    rho_minus_at_x0: f64,
    rho_plus_at_x0: f64,
    rh_residual: f64,
}

pub fn write_steady_summary(shock: &SteadyShock, path: &Path) -> Result<()> {
    let (rho_minus_at_x0, rho_plus_at_x0) = shock.densities_at_shock();
    let summary = SteadySummary {
        x0: shock.x0(),
        mass_flux: shock.mass_flux(),
        rho_minus_at_x0,
        rho_plus_at_x0,
        rh_residual: shock.rh_residual(),
    };
    write_json(&summary, path)
}

pub fn write_trace_csv(sim: &SimOutput, path: &Path) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "t,s,sdot,lax_ok,E0")?;
    for (sample, psi) in sim.trace.samples.iter().zip(sim.psi.iter()) {
        writeln!(
            f,
            "{},{},{},{},{}",
            sample.t, sample.s, sample.sdot, sample.lax_ok as u8, psi.e0
        )?;
    }
    Ok(())
}

pub fn write_snapshots(sim: &SimOutput, grid: &Grid, dir: &Path) -> Result<()> {
    for (k, snap) in sim.snapshots.iter().enumerate() {
        let path = dir.join(format!("snapshot_{k:03}.csv"));
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(f, "# t = {}", snap.t)?;
        writeln!(f, "x,rho,u")?;
        for i in 0..snap.rho.len() {
            writeln!(f, "{},{},{}", grid.center(i), snap.rho[i], snap.u[i])?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct SimSummary {
    lambda_fit: Option<f64>,
    #[serde(rename = "C_fit")]
    c_fit: Option<f64>,
    r_squared: Option<f64>,
    stable: bool,
    fit_window: Option<(f64, f64)>,
}

pub fn write_sim_summary(sim: &SimOutput, path: &Path) -> Result<()> {
    let fit: Option<&ExpFit> = sim.trace.fit.as_ref();
    let summary = SimSummary {
        lambda_fit: fit.map(|f| f.lambda),
        c_fit: fit.map(|f| f.amplitude),
        r_squared: fit.map(|f| f.r_squared),
        stable: fit.map_or(false, |f| f.lambda > 0.0),
        fit_window: fit.map(|f| f.t_range),
    };
    write_json(&summary, path)
}

pub fn write_ledger_csv(ledger: &EnergyLedger, path: &Path) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "t,E,D,E_plus_D_minus_E0")?;
    let e0 = ledger.samples.first().map(|s| s.energy).unwrap_or(0.0);
    for s in &ledger.samples {
        writeln!(
            f,
            "{},{},{},{}",
            s.t,
            s.energy,
            s.dissipation,
            s.energy + s.dissipation - e0
        )?;
    }
    Ok(())
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Config(format!("serialization failed: {e}")))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario;

    #[test]
    fn observed_orders_of_clean_sequence() {
        let orders = observed_orders(&[1.0, 0.25, 0.0625]);
        assert!((orders[0] - 2.0).abs() < 1e-12);
        assert!((orders[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn refinement_study_requires_three_levels() {
        let config = scenario::stable_iso();
        assert!(matches!(
            refinement_study(&config, 2),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn empty_sweep_is_empty() {
        assert!(sweep(&[]).is_empty());
    }

    /// Small end-to-end run; verdicts on the reference pair. Kept at coarse
    /// resolution so the full pipeline stays fast in unit tests.
    #[test]
    fn verdict_dichotomy_coarse() {
        let mut stable = scenario::stable_iso();
        stable.grid.n_cells = 200;
        stable.linear.n_nodes = 101;
        stable.linear.identity_transits = 2.0;
        let report = run_scenario(&stable).unwrap();
        assert_eq!(report.verdict, Verdict::Stable, "{}", report.verdict_reason);
        assert!(report.lax_all_ok);
        assert!(report.spectrum.spectral_radius < 1.0);
        assert!(report.widening_at_shock);

        let mut unstable = scenario::unstable_iso();
        unstable.grid.n_cells = 200;
        unstable.linear.n_nodes = 101;
        unstable.linear.identity_transits = 2.0;
        // Limit the run before the shock escapes the domain.
        unstable.run.t_end = Some(5.0);
        let report = run_scenario(&unstable).unwrap();
        assert_eq!(
            report.verdict,
            Verdict::Unstable,
            "{}",
            report.verdict_reason
        );
        assert!(report.spectrum.spectral_radius > 1.0);
        assert!(!report.widening_at_shock);
        assert!(report.linearized_shock_rate < 0.0);
    }
}
