//! Erosion at a flat point: where `u₀ = u₀' = u₀'' = 0` every local term of
//! the equation vanishes, and
//!
//! ```text
//! u_t(0, x*) = −C_I ∫_{−∞}^0 u₀(x* + z) |z|^{−7/3} dz,
//! ```
//!
//! which is negative as soon as there is mass upstream of `x*`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::nonlocal::SmoothProfile;
use crate::quadrature::{integrate_pieces, Tolerance};
use crate::spectral::{simulate_observed, SimConfig, SimReport};
use crate::symbol::{SymbolTable, C_I};

/// Tolerance on `|u₀|, |u₀'|, |u₀''|` at the flat point.
pub const FLATNESS_TOLERANCE: f64 = 1e-10;

/// `−C_I ∫_0^∞ u₀(x* − r) r^{−7/3} dr`.
pub fn erosion_rate<P: SmoothProfile>(u0: &P, x_star: f64) -> Result<f64> {
    if !x_star.is_finite() {
        return Err(Error::invalid("x_star", format!("must be finite, got {x_star}")));
    }
    let (v, d1, d2) = u0.eval(x_star);
    for (name, value) in [("u0", v), ("u0'", d1), ("u0''", d2)] {
        if value.abs() > FLATNESS_TOLERANCE {
            return Err(Error::Precondition(format!(
                "{name}(x*) = {value:e} at x* = {x_star}; the rate formula needs a flat point"
            )));
        }
    }
    let (lo, hi) = u0.support();
    if x_star <= lo {
        return Ok(0.0);
    }
    let start = if hi.is_finite() { (x_star - hi).max(0.0) } else { 0.0 };
    let z = u0.truncation(x_star);
    let pieces = 32;
    let breaks: Vec<f64> = (0..=pieces)
        .map(|i| start + (z - start) * i as f64 / pieces as f64)
        .collect();
    let body = integrate_pieces(
        |r| {
            if r == 0.0 {
                0.0
            } else {
                u0.eval(x_star - r).0 * r.powf(-7.0 / 3.0)
            }
        },
        &breaks,
        Tolerance {
            abs: 1e-14,
            rel: 1e-12,
            max_panels: 4000,
        },
    )?;
    Ok(-C_I * (body.value + u0.tail_integrals(x_star, z)[0]))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErosionConfig {
    pub sim: SimConfig,
    #[serde(default = "default_x_star")]
    pub x_star: f64,
    /// The early-time slope is fitted on steps `1..=slope_steps`.
    #[serde(default = "default_slope_steps")]
    pub slope_steps: usize,
}

fn default_x_star() -> f64 {
    17.0
}

fn default_slope_steps() -> usize {
    100
}

impl ErosionConfig {
    /// Dune at 15 on `[0, 30)` with 4096 points, `dt = 10⁻⁴`, `ε = 1`, up to `t = 1`.
    pub fn dune() -> Result<Self> {
        let mut sim = SimConfig::new(Grid::new(30.0, 4096)?, 1.0);
        sim.dt = 1e-4;
        sim.snapshot_stride = 1000;
        Ok(ErosionConfig {
            sim,
            x_star: default_x_star(),
            slope_steps: default_slope_steps(),
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ErosionReport {
    pub x_star: f64,
    /// Grid node nearest to `x*`, where everything is measured.
    pub x_node: f64,
    pub predicted_rate: f64,
    /// Least-squares slope of `u(t, x_node)` against `t` through the origin.
    pub measured_rate: f64,
    pub relative_error: f64,
    /// First step time with `u(t, x_node) < 0`.
    pub t_star: Option<f64>,
    pub u_at_t_star: Option<f64>,
    pub min_value: f64,
    /// Argmin of the final snapshot.
    pub min_location: f64,
    pub support_right_edge: f64,
    /// `(t, u(t, x_node))` over the slope window.
    pub early_series: Vec<(f64, f64)>,
    #[serde(skip)]
    pub run: Option<SimReport>,
}

/// Run the spectral solver from `profile` and compare the observed rate at
/// `x*` with [`erosion_rate`].
pub fn verify_erosion<P: SmoothProfile>(profile: &P, cfg: &ErosionConfig) -> Result<ErosionReport> {
    let grid = cfg.sim.grid;
    let u0 = Field::from_fn(grid, |x| profile.eval(x).0)?;
    if let Some(j) = u0.values().iter().position(|&v| v < 0.0) {
        return Err(Error::Precondition(format!(
            "u0 must be >= 0; u0({}) = {:e}",
            grid.x(j),
            u0.values()[j]
        )));
    }
    let node = grid.nearest_node(cfg.x_star);
    let x_node = grid.x(node);
    let predicted_rate = erosion_rate(profile, x_node)?;
    if cfg.slope_steps == 0 || cfg.slope_steps > cfg.sim.steps() {
        return Err(Error::invalid(
            "slope_steps",
            format!("must be in 1..={}, got {}", cfg.sim.steps(), cfg.slope_steps),
        ));
    }

    let table = Arc::new(SymbolTable::new(grid, cfg.sim.viscosity)?);
    let mut early = Vec::with_capacity(cfg.slope_steps);
    let mut t_star: Option<(f64, f64)> = None;
    let mut observer = |t: f64, u: &Field| {
        let v = u.values()[node];
        if early.len() < cfg.slope_steps {
            early.push((t, v));
        }
        if t_star.is_none() && v < 0.0 {
            t_star = Some((t, v));
        }
    };
    let run = simulate_observed(&cfg.sim, &u0, table, &mut observer)?;

    let (num, den) = early.iter().fold((0.0, 0.0), |(n, d), (t, v)| (n + t * v, d + t * t));
    let measured_rate = num / den;
    let (min_value, min_location) = run.final_snapshot().field.min_with_location();
    Ok(ErosionReport {
        x_star: cfg.x_star,
        x_node,
        predicted_rate,
        measured_rate,
        relative_error: ((measured_rate - predicted_rate) / predicted_rate).abs(),
        t_star: t_star.map(|p| p.0),
        u_at_t_star: t_star.map(|p| p.1),
        min_value,
        min_location,
        support_right_edge: profile.support().1,
        early_series: early,
        run: Some(run),
    })
}
