//! Named initial conditions and the two reference configurations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fd::{Boundary, FdConfig, Model};
use crate::grid::{Field, Grid};
use crate::nonlocal::{Bump, Cosine, Gaussian, SmoothProfile};
use crate::spectral::SimConfig;

/// Initial data, selected by `kind` in JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialCondition {
    Zero,
    /// `A exp(−1/(1 − ((x−c)/r)²))` on `|x − c| < r`.
    Dune {
        #[serde(default = "default_center")]
        center: f64,
        #[serde(default = "one")]
        radius: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    Gaussian {
        center: f64,
        width: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// `A cos(2πm x/L)` on the grid's period.
    Cosine {
        mode: u32,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// `½[1 − tanh((x − t/2)/(4ε))]` at `t = 0`.
    TravelingWave {
        #[serde(default = "one")]
        viscosity: f64,
    },
}

fn default_center() -> f64 {
    15.0
}

fn one() -> f64 {
    1.0
}

impl Default for InitialCondition {
    fn default() -> Self {
        InitialCondition::Dune {
            center: default_center(),
            radius: 1.0,
            amplitude: 1.0,
        }
    }
}

/// Viscous Burgers shock joining 1 (left) to 0 (right), speed ½.
pub fn traveling_wave(t: f64, x: f64, viscosity: f64) -> f64 {
    0.5 * (1.0 - ((x - 0.5 * t) / (4.0 * viscosity)).tanh())
}

impl InitialCondition {
    /// Value at `x` on a domain of the given period length.
    pub fn value(&self, x: f64, length: f64) -> f64 {
        match *self {
            InitialCondition::Zero => 0.0,
            InitialCondition::Dune {
                center,
                radius,
                amplitude,
            } => {
                Bump {
                    center,
                    radius,
                    amplitude,
                }
                .eval(x)
                .0
            }
            InitialCondition::Gaussian {
                center,
                width,
                amplitude,
            } => {
                Gaussian {
                    center,
                    width,
                    amplitude,
                }
                .eval(x)
                .0
            }
            InitialCondition::Cosine { mode, amplitude } => {
                Cosine {
                    amplitude,
                    mode,
                    length,
                }
                .eval(x)
                .0
            }
            InitialCondition::TravelingWave { viscosity } => traveling_wave(0.0, x, viscosity),
        }
    }

    pub fn sample(&self, grid: Grid) -> Result<Field> {
        Field::from_fn(grid, |x| self.value(x, grid.length()))
    }

    /// The profile as a [`SmoothProfile`], when it has one with compact support.
    pub fn bump(&self) -> Option<Bump> {
        match *self {
            InitialCondition::Dune {
                center,
                radius,
                amplitude,
            } => Some(Bump {
                center,
                radius,
                amplitude,
            }),
            _ => None,
        }
    }
}

/// A named configuration for both solvers.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Preset {
    pub name: &'static str,
    pub spectral: SimConfig,
    pub fd: FdConfig,
}

pub const PRESET_NAMES: [&str; 2] = ["dune", "traveling-wave"];

/// `dune`: L = 30, M = 4001, ε = 0.1, unit bump at L/2.
/// `traveling-wave`: ε = 1 Burgers shock on [−15, 15].
pub fn load_preset(name: &str) -> Result<Preset> {
    match name {
        "dune" => {
            let initial = InitialCondition::default();
            Ok(Preset {
                name: "dune",
                spectral: SimConfig {
                    grid: Grid::new(30.0, 4096)?,
                    t_end: 1.0,
                    dt: 1e-3,
                    dealias: true,
                    snapshot_stride: 100,
                    viscosity: 0.1,
                    nonlinear: true,
                    initial: initial.clone(),
                },
                fd: FdConfig {
                    model: Model::Fowler,
                    length: 30.0,
                    origin: 0.0,
                    points: 4001,
                    viscosity: 0.1,
                    t_end: 1.0,
                    initial,
                    ..FdConfig::default()
                },
            })
        }
        "traveling-wave" => {
            let initial = InitialCondition::TravelingWave { viscosity: 1.0 };
            Ok(Preset {
                name: "traveling-wave",
                spectral: SimConfig {
                    grid: Grid::new(30.0, 4096)?,
                    t_end: 1.0,
                    dt: 1e-3,
                    dealias: true,
                    snapshot_stride: 100,
                    viscosity: 1.0,
                    nonlinear: true,
                    initial: initial.clone(),
                },
                fd: FdConfig {
                    model: Model::Burgers,
                    length: 30.0,
                    origin: -15.0,
                    points: 4001,
                    viscosity: 1.0,
                    t_end: 1.0,
                    boundary: Boundary::TravelingWave,
                    initial,
                    ..FdConfig::default()
                },
            })
        }
        other => Err(Error::UnknownPreset {
            name: other.to_string(),
            available: PRESET_NAMES.join(", "),
        }),
    }
}
