//! JSON system definitions.
//!
//! A file names the algebra (inline, or as a path relative to the config
//! file), the derivation as a list of rows, the control vectors, the control
//! range, group flags and optional tolerance and simulation overrides.
//! Bracket indices in algebra files are 1-based.
//!
//! Defaults for everything under `simulation`:
//!
//! | key                  | default          |
//! |----------------------|------------------|
//! | `box`                | `[-3, 3]` per axis |
//! | `cells`              | 151 per axis     |
//! | `horizon`            | 8.0              |
//! | `dwell`              | 0.1              |
//! | `dt`                 | 0.01 (grids)     |
//! | `trajectory_dt`      | 0.001            |
//! | `max_exit_dwells`    | 50               |
//! | `safety_radius`      | 1e6              |
//! | `duality_horizon`    | 1.0              |
//! | `semigroup_horizons` | `[1.0, 1.0]`     |

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraFile, Derivation, Vector};
use crate::analysis::{ControlRange, LinearSystemSpec, SystemFlags};
use crate::error::{Error, Result};
use crate::simulation::{ControlSample, GridLayout, GridProblem, Stepping};
use crate::tolerance::Tolerances;

pub const DEFAULT_HALF_WIDTH: f64 = 3.0;
pub const DEFAULT_CELLS: usize = 151;
pub const DEFAULT_HORIZON: f64 = 8.0;
pub const DEFAULT_DWELL: f64 = 0.1;
pub const DEFAULT_GRID_DT: f64 = 1e-2;
pub const DEFAULT_TRAJECTORY_DT: f64 = 1e-3;
pub const DEFAULT_MAX_EXIT_DWELLS: usize = 50;
pub const DEFAULT_SAFETY_RADIUS: f64 = 1e6;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlgebraSource {
    Inline(AlgebraFile),
    File(PathBuf),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    /// Per-axis `[lo, hi]` bounds; `None` means the default cube.
    #[serde(rename = "box", skip_serializing_if = "Option::is_none")]
    pub bounds: Option<Vec<[f64; 2]>>,
    pub cells: usize,
    pub horizon: f64,
    pub dwell: f64,
    pub dt: f64,
    pub trajectory_dt: f64,
    pub max_exit_dwells: usize,
    pub safety_radius: f64,
    pub duality_horizon: f64,
    pub semigroup_horizons: [f64; 2],
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            bounds: None,
            cells: DEFAULT_CELLS,
            horizon: DEFAULT_HORIZON,
            dwell: DEFAULT_DWELL,
            dt: DEFAULT_GRID_DT,
            trajectory_dt: DEFAULT_TRAJECTORY_DT,
            max_exit_dwells: DEFAULT_MAX_EXIT_DWELLS,
            safety_radius: DEFAULT_SAFETY_RADIUS,
            duality_horizon: 1.0,
            semigroup_horizons: [1.0, 1.0],
        }
    }
}

impl SimulationConfig {
    pub fn layout(&self, dim: usize) -> Result<GridLayout> {
        let bounds = match &self.bounds {
            Some(b) => {
                if b.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: b.len(),
                    });
                }
                b.iter().map(|&[lo, hi]| (lo, hi)).collect()
            }
            None => vec![(-DEFAULT_HALF_WIDTH, DEFAULT_HALF_WIDTH); dim],
        };
        let layout = GridLayout::new(bounds, vec![self.cells; dim])?;
        if !layout.contains(&vec![0.0; dim]) {
            return Err(Error::invalid("simulation box must contain the origin"));
        }
        Ok(layout)
    }

    pub fn problem(&self, spec: &LinearSystemSpec) -> Result<GridProblem> {
        let controls = ControlSample::from_range(&spec.omega, self.dwell);
        controls.validate(&spec.omega)?;
        Ok(GridProblem {
            layout: self.layout(spec.dim())?,
            controls,
            stepping: Stepping {
                dt: self.dt,
                max_exit_dwells: self.max_exit_dwells,
            },
        })
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64, what: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(format!("{what} must be positive, got {v}")))
            }
        };
        positive(self.dwell, "dwell")?;
        positive(self.dt, "dt")?;
        positive(self.trajectory_dt, "trajectory_dt")?;
        positive(self.safety_radius, "safety_radius")?;
        if !(self.horizon >= 0.0 && self.horizon.is_finite()) {
            return Err(Error::invalid("horizon must be a non-negative number"));
        }
        if self.duality_horizon < 0.0 || self.semigroup_horizons.iter().any(|&t| t < 0.0) {
            return Err(Error::invalid("check horizons must be non-negative"));
        }
        if self.cells == 0 {
            return Err(Error::invalid("cells must be positive"));
        }
        if self.max_exit_dwells == 0 {
            return Err(Error::invalid("max_exit_dwells must be positive"));
        }
        Ok(())
    }
}

/// On-disk form of a system definition.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    #[serde(default)]
    pub name: String,
    pub algebra: AlgebraSource,
    pub derivation: Vec<Vec<f64>>,
    pub controls: Vec<Vec<f64>>,
    pub omega: ControlRange,
    #[serde(default)]
    pub flags: SystemFlags,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub simulation: SimulationConfig,
}

/// A validated system ready for analysis and simulation.
#[derive(Clone, Debug)]
pub struct LoadedSystem {
    pub name: String,
    pub spec: LinearSystemSpec,
    pub tolerances: Tolerances,
    pub simulation: SimulationConfig,
}

impl SystemConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Builds the system; relative algebra paths resolve against `base`.
    pub fn build(self, base: &Path) -> Result<LoadedSystem> {
        let algebra = match self.algebra {
            AlgebraSource::Inline(a) => a.into_algebra()?,
            AlgebraSource::File(p) => {
                let path = if p.is_absolute() { p } else { base.join(p) };
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| Error::invalid(format!("cannot read algebra file {}: {e}", path.display())))?;
                serde_json::from_str::<AlgebraFile>(&text)?.into_algebra()?
            }
        };
        let d = algebra.dim();
        if self.derivation.len() != d || self.derivation.iter().any(|r| r.len() != d) {
            return Err(Error::invalid(format!("derivation must be a {d}x{d} matrix")));
        }
        let derivation = Derivation::from_rows(&self.derivation)?;
        let controls = self
            .controls
            .into_iter()
            .map(|c| {
                if c.len() == d {
                    Ok(Vector::from_vec(c))
                } else {
                    Err(Error::DimensionMismatch {
                        expected: d,
                        found: c.len(),
                    })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let spec = LinearSystemSpec::new(algebra, derivation, controls, self.omega, self.flags)?;
        self.simulation.validate()?;
        self.simulation.layout(d)?;
        Ok(LoadedSystem {
            name: self.name,
            spec,
            tolerances: self.tolerances,
            simulation: self.simulation,
        })
    }
}

/// Reads and validates a system definition file.
pub fn load(path: &Path) -> Result<LoadedSystem> {
    let text = std::fs::read_to_string(path)?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    SystemConfig::from_json(&text)?.build(base)
}
