//! Scenario configuration: TOML-backed description of gas, nozzle, boundary
//! data, grids, perturbation, and run controls, plus the bundled reference
//! scenarios.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gas::GasLaw;
use crate::nozzle::{Nozzle, NozzleShape};
use crate::steady::{forward_outflow_density, BoundaryData, SteadyOptions};
use crate::unsteady::{BumpKind, BumpSpec, PerturbationSpec};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub name: String,
    pub gas: GasSection,
    pub nozzle: NozzleSection,
    pub boundary: BoundarySection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub perturbation: PerturbationSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub linear: LinearSection,
    #[serde(default)]
    pub verdict: VerdictSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GasSection {
    #[serde(rename = "A")]
    pub coeff: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NozzleSection {
    /// `constant`, `cone`, `sphere`, `polynomial`, or `tabulated`.
    pub shape: String,
    #[serde(default)]
    pub coeffs: Vec<f64>,
    /// CSV path for tabulated profiles (relative to the config file).
    #[serde(default)]
    pub csv: Option<String>,
    pub left: f64,
    pub right: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundarySection {
    pub rho_left: f64,
    pub u_left: f64,
    /// Either given directly...
    #[serde(default)]
    pub rho_right: Option<f64>,
    /// ...or forward-constructed so the steady shock sits here.
    #[serde(default)]
    pub forward_x0: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n_cells: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection { n_cells: 800 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationSection {
    #[serde(default)]
    pub epsilon: f64,
    #[serde(default)]
    pub x0_shift: f64,
    #[serde(default)]
    pub bump: Option<BumpSection>,
    /// Number of seeded random bumps (exclusive with `bump`).
    #[serde(default)]
    pub random_bumps: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_blend_frac")]
    pub blend_frac: f64,
}

fn default_blend_frac() -> f64 {
    0.1
}

impl Default for PerturbationSection {
    fn default() -> Self {
        PerturbationSection {
            epsilon: 0.0,
            x0_shift: 0.0,
            bump: None,
            random_bumps: None,
            seed: 0,
            blend_frac: default_blend_frac(),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BumpSection {
    pub center: f64,
    pub width: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    /// Simulation end time; default: 10 fast transit times.
    #[serde(default)]
    pub t_end: Option<f64>,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    /// Trace sampling interval; default: t_end / 400.
    #[serde(default)]
    pub sample_dt: Option<f64>,
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
}

fn default_cfl() -> f64 {
    0.45
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            t_end: None,
            cfl: default_cfl(),
            sample_dt: None,
            snapshot_times: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearSection {
    pub n_nodes: usize,
    /// Horizon of the evolution operator; default: two slow transits.
    #[serde(default)]
    pub t_horizon: Option<f64>,
    /// End time of the dissipation-identity run, in slow-transit units.
    #[serde(default = "default_identity_transits")]
    pub identity_transits: f64,
}

fn default_identity_transits() -> f64 {
    5.0
}

impl Default for LinearSection {
    fn default() -> Self {
        LinearSection {
            n_nodes: 400,
            t_horizon: None,
            identity_transits: default_identity_transits(),
        }
    }
}

/// Verdict thresholds (fixed defaults, overridable per scenario).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerdictSection {
    /// Stable requires spectral radius below this.
    #[serde(default = "default_radius_max")]
    pub radius_max: f64,
    /// Stable requires the final shock offset below this fraction of the
    /// initial offset.
    #[serde(default = "default_shrink_frac")]
    pub shrink_frac: f64,
    /// Unstable requires the offset at 5 transits to exceed this multiple
    /// of the initial offset.
    #[serde(default = "default_growth_factor")]
    pub growth_factor: f64,
}

fn default_radius_max() -> f64 {
    1.0
}
fn default_shrink_frac() -> f64 {
    0.5
}
fn default_growth_factor() -> f64 {
    2.0
}

impl Default for VerdictSection {
    fn default() -> Self {
        VerdictSection {
            radius_max: default_radius_max(),
            shrink_frac: default_shrink_frac(),
            growth_factor: default_growth_factor(),
        }
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: ScenarioConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut config = Self::from_toml_str(&text)?;
        // Resolve a tabulated-profile CSV relative to the config location.
        if let Some(csv) = &config.nozzle.csv {
            if let Some(dir) = path.parent() {
                config.nozzle.csv = Some(dir.join(csv).to_string_lossy().into_owned());
            }
        }
        if config.name.is_empty() {
            config.name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
        }
        Ok(config)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).unwrap_or_default()
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if !(self.gas.coeff > 0.0) || !(self.gas.gamma >= 1.0) {
            return fail(format!(
                "gas requires A > 0 and gamma >= 1, got A = {}, gamma = {}",
                self.gas.coeff, self.gas.gamma
            ));
        }
        if !(self.boundary.rho_left > 0.0) || !(self.boundary.u_left > 0.0) {
            return fail("boundary requires rho_left > 0 and u_left > 0".into());
        }
        if self.boundary.rho_right.is_none() && self.boundary.forward_x0.is_none() {
            return fail("boundary needs rho_right or forward_x0".into());
        }
        if let Some(r) = self.boundary.rho_right {
            if !(r > 0.0) {
                return fail(format!("rho_right must be positive, got {r}"));
            }
        }
        if self.grid.n_cells < 16 {
            return fail(format!("grid.n_cells must be >= 16, got {}", self.grid.n_cells));
        }
        if !(self.run.cfl > 0.0 && self.run.cfl < 1.0) {
            return fail(format!("run.cfl must be in (0, 1), got {}", self.run.cfl));
        }
        if self.linear.n_nodes < 8 {
            return fail(format!(
                "linear.n_nodes must be >= 8, got {}",
                self.linear.n_nodes
            ));
        }
        if self.perturbation.epsilon < 0.0 {
            return fail("perturbation.epsilon must be >= 0".into());
        }
        if self.perturbation.bump.is_some() && self.perturbation.random_bumps.is_some() {
            return fail("give either perturbation.bump or random_bumps, not both".into());
        }
        Ok(())
    }

    pub fn build_gas(&self) -> Result<GasLaw> {
        GasLaw::new(self.gas.coeff, self.gas.gamma)
    }

    pub fn build_nozzle(&self) -> Result<Nozzle> {
        let shape = match self.nozzle.shape.as_str() {
            "constant" => NozzleShape::Constant,
            "cone" => NozzleShape::Cone,
            "sphere" => NozzleShape::Sphere,
            "polynomial" => {
                if self.nozzle.coeffs.is_empty() {
                    return Err(Error::Config("polynomial shape needs coeffs".into()));
                }
                NozzleShape::Polynomial(self.nozzle.coeffs.clone())
            }
            "tabulated" => {
                let Some(csv) = &self.nozzle.csv else {
                    return Err(Error::Config("tabulated shape needs csv".into()));
                };
                let text = std::fs::read_to_string(csv)?;
                return Nozzle::from_csv_str(&text, self.nozzle.left, self.nozzle.right);
            }
            other => {
                return Err(Error::Config(format!("unknown nozzle shape '{other}'")));
            }
        };
        Nozzle::new(shape, self.nozzle.left, self.nozzle.right)
    }

    /// Boundary data, forward-constructing the outflow density when the
    /// scenario pins the shock position instead.
    pub fn resolve_boundary(&self, gas: &GasLaw, nozzle: &Nozzle) -> Result<BoundaryData> {
        let rho_right = match (self.boundary.rho_right, self.boundary.forward_x0) {
            (Some(r), _) => r,
            (None, Some(x0)) => forward_outflow_density(
                gas,
                nozzle,
                self.boundary.rho_left,
                self.boundary.u_left,
                x0,
                &SteadyOptions::default(),
            )?,
            (None, None) => unreachable!("validated"),
        };
        Ok(BoundaryData {
            rho_left: self.boundary.rho_left,
            u_left: self.boundary.u_left,
            rho_right,
        })
    }

    pub fn build_perturbation(&self) -> PerturbationSpec {
        let bump = if let Some(b) = &self.perturbation.bump {
            BumpKind::Single(BumpSpec {
                center: b.center,
                width: b.width,
            })
        } else if let Some(count) = self.perturbation.random_bumps {
            BumpKind::Random {
                count,
                seed: self.perturbation.seed,
            }
        } else {
            BumpKind::None
        };
        PerturbationSpec {
            epsilon: self.perturbation.epsilon,
            x0_shift: self.perturbation.x0_shift,
            bump,
            blend_frac: self.perturbation.blend_frac,
        }
    }
}

/// Reference scenario: widening isothermal nozzle `a = 1 + x` on `[1, 3]`,
/// inflow `(rho, u) = (1, 2)`, shock forward-constructed at `x0 = 2`, with
/// a small initial shock displacement.
pub fn stable_iso() -> ScenarioConfig {
    ScenarioConfig {
        name: "stable_iso".into(),
        gas: GasSection {
            coeff: 1.0,
            gamma: 1.0,
        },
        nozzle: NozzleSection {
            shape: "polynomial".into(),
            coeffs: vec![1.0, 1.0],
            csv: None,
            left: 1.0,
            right: 3.0,
        },
        boundary: BoundarySection {
            rho_left: 1.0,
            u_left: 2.0,
            rho_right: None,
            forward_x0: Some(2.0),
        },
        grid: GridSection::default(),
        perturbation: PerturbationSection {
            x0_shift: 0.05,
            ..Default::default()
        },
        run: RunSection::default(),
        linear: LinearSection::default(),
        verdict: VerdictSection::default(),
    }
}

/// Mirror of [`stable_iso`]: narrowing nozzle `a = 5 - x` (the reflection
/// of `1 + x` about the domain midpoint), inflow `(1, 2.5)` so the
/// supersonic branch clears the contraction, shock forward-constructed at
/// `x0 = 2`.
pub fn unstable_iso() -> ScenarioConfig {
    let mut config = stable_iso();
    config.name = "unstable_iso".into();
    config.nozzle.coeffs = vec![5.0, -1.0];
    config.boundary.u_left = 2.5;
    config
}

/// Polytropic variant of the widening scenario (`gamma = 1.4`).
pub fn stable_poly() -> ScenarioConfig {
    let mut config = stable_iso();
    config.name = "stable_poly".into();
    config.gas.gamma = 1.4;
    config.boundary.u_left = 2.5;
    config
}

/// All bundled reference scenarios.
pub fn bundled() -> Vec<ScenarioConfig> {
    vec![stable_iso(), unstable_iso(), stable_poly()]
}

/// Look a bundled scenario up by name.
pub fn bundled_by_name(name: &str) -> Option<ScenarioConfig> {
    bundled().into_iter().find(|s| s.name == name)
}
