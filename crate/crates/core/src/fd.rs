//! Explicit centred finite differences on `[x₀, x₀ + L]` with `M` nodes,
//! `Δx = L/(M−1)`:
//!
//! ```text
//! u_i⁺ = u_i + Δt [ −(u_{i+1}² − u_{i−1}²)/(4Δx) − (L_{i+1} − L_{i−1})/(2Δx)
//!                   + ε (u_{i+1} − 2u_i + u_{i−1})/Δx² ]
//! ```
//!
//! where the nonlocal term is dropped for viscous Burgers and, for the
//! Fowler model, `L_i = Σ_{j=0}^{i} w_j (u_{i−j+1} − u_{i−j−1})/(2Δx)` is a
//! one-sided quadrature of `∫_0^x ζ^{−1/3} u_x(x − ζ) dζ`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Field;
use crate::presets::{traveling_wave, InitialCondition};
use crate::special::riemann_zeta;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    Burgers,
    Fowler,
}

/// Weight of the `j = 0` term, where `(jΔx)^{−1/3}` is undefined.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum OriginWeight {
    /// `−ζ(1/3) Δx^{−1/3}`: the generalized Euler–Maclaurin correction, which
    /// makes the sum accurate to `O(Δx^{5/3})` for smooth integrands.
    #[default]
    ZetaCorrected,
    /// `(3/2) Δx^{−1/3}`, the cell average of `ζ^{−1/3}` over `[0, Δx]`.
    CellAverage,
    /// Start the sum at `j = 1`.
    Skip,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    /// `u = 0` at both ends.
    #[default]
    Zero,
    /// End values follow the exact Burgers shock `½[1 − tanh((x − t/2)/(4ε))]`.
    TravelingWave,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FdConfig {
    pub model: Model,
    pub length: f64,
    /// Position of node 0.
    pub origin: f64,
    pub points: usize,
    pub viscosity: f64,
    pub t_end: f64,
    /// Fraction of the CFL-Peclet step actually taken.
    pub cfl_fraction: f64,
    /// Fixed step; overrides `cfl_fraction` when set.
    pub dt: Option<f64>,
    pub origin_weight: OriginWeight,
    /// Multiply the nonlocal series by `Δx` so it approximates the integral.
    pub riemann_weight: bool,
    /// Reject steps above the CFL-Peclet bound instead of warning.
    pub strict: bool,
    /// Time between stored snapshots; output times land on its multiples.
    pub snapshot_interval: f64,
    pub boundary: Boundary,
    pub initial: InitialCondition,
}

impl Default for FdConfig {
    fn default() -> Self {
        FdConfig {
            model: Model::Fowler,
            length: 30.0,
            origin: 0.0,
            points: 4001,
            viscosity: 0.1,
            t_end: 1.0,
            cfl_fraction: 1.0,
            dt: None,
            origin_weight: OriginWeight::ZetaCorrected,
            riemann_weight: true,
            strict: false,
            snapshot_interval: 0.1,
            boundary: Boundary::Zero,
            initial: InitialCondition::default(),
        }
    }
}

impl FdConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.length.is_finite() && self.length > 0.0) {
            return Err(Error::invalid("length", format!("must be > 0, got {}", self.length)));
        }
        if self.points < 3 {
            return Err(Error::invalid("points", format!("must be >= 3, got {}", self.points)));
        }
        if !(self.viscosity.is_finite() && self.viscosity > 0.0) {
            return Err(Error::invalid(
                "viscosity",
                format!("must be > 0, got {}", self.viscosity),
            ));
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(Error::invalid("t_end", format!("must be > 0, got {}", self.t_end)));
        }
        if !(self.cfl_fraction > 0.0 && self.cfl_fraction <= 1.0) {
            return Err(Error::invalid(
                "cfl_fraction",
                format!("must be in (0, 1], got {}", self.cfl_fraction),
            ));
        }
        if let Some(dt) = self.dt {
            if !(dt.is_finite() && dt > 0.0) {
                return Err(Error::invalid("dt", format!("must be > 0, got {dt}")));
            }
        }
        if !(self.snapshot_interval.is_finite() && self.snapshot_interval > 0.0) {
            return Err(Error::invalid(
                "snapshot_interval",
                format!("must be > 0, got {}", self.snapshot_interval),
            ));
        }
        if self.boundary == Boundary::TravelingWave && self.model != Model::Burgers {
            return Err(Error::invalid(
                "boundary",
                "traveling-wave boundary values are exact only for burgers",
            ));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        self.length / (self.points - 1) as f64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FdState {
    pub t: f64,
    pub u: Vec<f64>,
    pub dx: f64,
    pub origin: f64,
    pub viscosity: f64,
}

impl FdState {
    pub fn x(&self, i: usize) -> f64 {
        self.origin + i as f64 * self.dx
    }

    pub fn mass(&self) -> f64 {
        self.u.iter().sum::<f64>() * self.dx
    }
}

/// `min(Δx / max|u|, Δx² / (2ε))`, with the first term infinite for `u ≡ 0`.
pub fn cfl_dt(state: &FdState) -> f64 {
    let umax = state.u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let advective = if umax == 0.0 { f64::INFINITY } else { state.dx / umax };
    advective.min(state.dx * state.dx / (2.0 * state.viscosity))
}

/// Weights `w_j`, `j = 0..m`, of the one-sided nonlocal sum.
pub fn nonlocal_weights(m: usize, dx: f64, origin: OriginWeight, riemann_weight: bool) -> Vec<f64> {
    let scale = if riemann_weight { dx } else { 1.0 };
    let mut w: Vec<f64> = (0..m).map(|j| scale * (j as f64 * dx).powf(-1.0 / 3.0)).collect();
    if m > 0 {
        let w0 = match origin {
            OriginWeight::ZetaCorrected => -riemann_zeta(1.0 / 3.0) * dx.powf(-1.0 / 3.0),
            OriginWeight::CellAverage => 1.5 * dx.powf(-1.0 / 3.0),
            OriginWeight::Skip => 0.0,
        };
        w[0] = scale * w0;
    }
    w
}

/// Centred differences `(u_{i+1} − u_{i−1})/(2Δx)` for all `i`, with zero padding.
fn centred_differences(u: &[f64], dx: f64) -> Vec<f64> {
    let m = u.len();
    let at = |i: isize| if i < 0 || i as usize >= m { 0.0 } else { u[i as usize] };
    (0..m as isize).map(|i| (at(i + 1) - at(i - 1)) / (2.0 * dx)).collect()
}

/// `Σ a_k b_k` with eight interleaved accumulators; the summation order is fixed.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 8];
    let chunks = a.len() / 8;
    for c in 0..chunks {
        let (x, y) = (&a[8 * c..8 * c + 8], &b[8 * c..8 * c + 8]);
        for k in 0..8 {
            acc[k] += x[k] * y[k];
        }
    }
    let mut tail = 0.0;
    for k in 8 * chunks..a.len() {
        tail += a[k] * b[k];
    }
    ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7])) + tail
}

/// `L_i` for every node, given the weights from [`nonlocal_weights`].
pub fn nonlocal_sums(u: &[f64], dx: f64, weights: &[f64]) -> Vec<f64> {
    let m = u.len();
    assert_eq!(weights.len(), m, "one weight per node");
    let d = centred_differences(u, dx);
    let reversed: Vec<f64> = weights.iter().rev().copied().collect();
    // L_i = Σ_{k=0}^{i} w_{i−k} d_k, and w_{i−k} = reversed[m−1−i+k].
    (0..m).map(|i| dot(&reversed[m - 1 - i..], &d[..=i])).collect()
}

/// `L_i` at a single interior node.
pub fn nonlocal_sum(state: &FdState, i: usize, origin: OriginWeight, riemann_weight: bool) -> Result<f64> {
    let m = state.u.len();
    if i == 0 || i + 1 >= m {
        return Err(Error::invalid("i", format!("must satisfy 0 < i < {}, got {i}", m - 1)));
    }
    let w = nonlocal_weights(i + 1, state.dx, origin, riemann_weight);
    let d = centred_differences(&state.u, state.dx);
    Ok((0..=i).map(|j| w[j] * d[i - j]).sum())
}

fn check_dt(state: &FdState, dt: f64, strict: bool) -> Result<bool> {
    let limit = cfl_dt(state);
    if dt > limit * (1.0 + 1e-12) {
        if strict {
            return Err(Error::Precondition(format!(
                "dt = {dt:e} exceeds the CFL-Peclet bound {limit:e}"
            )));
        }
        log::warn!("dt = {dt:e} exceeds the CFL-Peclet bound {limit:e}");
        return Ok(true);
    }
    Ok(false)
}

fn explicit_update(state: &FdState, dt: f64, nonlocal: Option<&[f64]>) -> Vec<f64> {
    let u = &state.u;
    let m = u.len();
    let dx = state.dx;
    let eps = state.viscosity;
    let mut next = u.clone();
    for i in 1..m - 1 {
        let conv = -(u[i + 1] * u[i + 1] - u[i - 1] * u[i - 1]) / (4.0 * dx);
        let diff = eps * (u[i + 1] - 2.0 * u[i] + u[i - 1]) / (dx * dx);
        let nl = nonlocal.map_or(0.0, |l| -(l[i + 1] - l[i - 1]) / (2.0 * dx));
        next[i] = u[i] + dt * (conv + nl + diff);
    }
    next
}

fn finish(state: &FdState, mut u: Vec<f64>, dt: f64, boundary: Boundary) -> Result<FdState> {
    let t = state.t + dt;
    let m = u.len();
    match boundary {
        Boundary::Zero => {
            u[0] = 0.0;
            u[m - 1] = 0.0;
        }
        Boundary::TravelingWave => {
            u[0] = traveling_wave(t, state.x(0), state.viscosity);
            u[m - 1] = traveling_wave(t, state.x(m - 1), state.viscosity);
        }
    }
    if let Some(index) = u.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            what: "fd state",
            index,
        });
    }
    Ok(FdState { t, u, ..state.clone() })
}

/// One explicit viscous Burgers step.
pub fn step_burgers(state: &FdState, dt: f64, boundary: Boundary, strict: bool) -> Result<FdState> {
    check_dt(state, dt, strict)?;
    finish(state, explicit_update(state, dt, None), dt, boundary)
}

/// One explicit Fowler step with the nonlocal sum built from `weights`.
pub fn step_fowler(state: &FdState, dt: f64, weights: &[f64], strict: bool) -> Result<FdState> {
    check_dt(state, dt, strict)?;
    let l = nonlocal_sums(&state.u, state.dx, weights);
    finish(state, explicit_update(state, dt, Some(&l)), dt, Boundary::Zero)
}

#[derive(Clone, Debug, Serialize)]
pub struct FdSnapshot {
    pub t: f64,
    pub u: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FdReport {
    pub config: FdConfig,
    pub dx: f64,
    pub steps: usize,
    #[serde(skip)]
    pub snapshots: Vec<FdSnapshot>,
    /// `(t, Σ u_i Δx)` at every snapshot.
    pub mass: Vec<(f64, f64)>,
    /// Minimum over all nodes and steps, with its time and position.
    pub min_value: f64,
    pub min_time: f64,
    pub min_position: f64,
    pub max_value: f64,
    /// `max |u − exact|` over all steps, for the traveling-wave boundary.
    pub traveling_wave_error: Option<f64>,
    pub cfl_violations: usize,
}

impl FdReport {
    pub fn xs(&self) -> Vec<f64> {
        (0..self.config.points)
            .map(|i| self.config.origin + i as f64 * self.dx)
            .collect()
    }

    pub fn final_snapshot(&self) -> &FdSnapshot {
        self.snapshots.last().expect("the initial state is always stored")
    }

    /// `|mass(t_end) − mass(0)| / |mass(0)|`
    pub fn mass_drift(&self) -> f64 {
        let m0 = self.mass.first().map_or(0.0, |m| m.1);
        let m1 = self.mass.last().map_or(0.0, |m| m.1);
        if m0 == 0.0 {
            (m1 - m0).abs()
        } else {
            ((m1 - m0) / m0).abs()
        }
    }
}

/// Initial state sampled from `cfg.initial`.
pub fn initial_state(cfg: &FdConfig) -> Result<FdState> {
    let dx = cfg.dx();
    let u: Vec<f64> = (0..cfg.points)
        .map(|i| cfg.initial.value(cfg.origin + i as f64 * dx, cfg.length))
        .collect();
    if let Some(index) = u.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            what: "initial condition",
            index,
        });
    }
    Ok(FdState {
        t: 0.0,
        u,
        dx,
        origin: cfg.origin,
        viscosity: cfg.viscosity,
    })
}

/// Run to `t_end`, landing exactly on every multiple of the snapshot interval.
pub fn run(cfg: &FdConfig) -> Result<FdReport> {
    cfg.validate()?;
    let mut state = initial_state(cfg)?;
    if cfg.boundary == Boundary::Zero && (state.u[0] != 0.0 || state.u[cfg.points - 1] != 0.0) {
        log::warn!("initial data is nonzero at the boundary; the zero boundary condition overrides it");
    }
    let weights = match cfg.model {
        Model::Fowler => nonlocal_weights(cfg.points, state.dx, cfg.origin_weight, cfg.riemann_weight),
        Model::Burgers => Vec::new(),
    };
    let tw_error = |s: &FdState| {
        (0..s.u.len())
            .map(|i| (s.u[i] - traveling_wave(s.t, s.x(i), s.viscosity)).abs())
            .fold(0.0, f64::max)
    };

    let mut report = FdReport {
        config: cfg.clone(),
        dx: state.dx,
        steps: 0,
        snapshots: vec![FdSnapshot {
            t: 0.0,
            u: state.u.clone(),
        }],
        mass: vec![(0.0, state.mass())],
        min_value: f64::INFINITY,
        min_time: 0.0,
        min_position: 0.0,
        max_value: f64::NEG_INFINITY,
        traveling_wave_error: (cfg.boundary == Boundary::TravelingWave).then_some(0.0),
        cfl_violations: 0,
    };
    let track = |s: &FdState, r: &mut FdReport| {
        for (i, &v) in s.u.iter().enumerate() {
            if v < r.min_value {
                r.min_value = v;
                r.min_time = s.t;
                r.min_position = s.x(i);
            }
            r.max_value = r.max_value.max(v);
        }
        if let Some(e) = r.traveling_wave_error.as_mut() {
            *e = e.max(tw_error(s));
        }
    };
    track(&state, &mut report);

    let mut next_snapshot = 1usize;
    let snapshot_time = |k: usize| (k as f64 * cfg.snapshot_interval).min(cfg.t_end);
    let tol = 1e-12 * cfg.t_end;
    while state.t < cfg.t_end - tol {
        let target = snapshot_time(next_snapshot);
        let base = cfg.dt.unwrap_or_else(|| cfg.cfl_fraction * cfl_dt(&state));
        let dt = base.min(target - state.t);
        if check_dt(&state, dt, cfg.strict)? {
            report.cfl_violations += 1;
        }
        let next = match cfg.model {
            Model::Burgers => finish(&state, explicit_update(&state, dt, None), dt, cfg.boundary),
            Model::Fowler => {
                let l = nonlocal_sums(&state.u, state.dx, &weights);
                finish(&state, explicit_update(&state, dt, Some(&l)), dt, Boundary::Zero)
            }
        };
        state = match next {
            Ok(s) => s,
            Err(Error::NonFinite { .. }) => {
                if report.final_snapshot().t != state.t {
                    report.snapshots.push(FdSnapshot {
                        t: state.t,
                        u: state.u.clone(),
                    });
                    report.mass.push((state.t, state.mass()));
                }
                return Err(Error::FdBlowUp {
                    time: state.t + dt,
                    partial: Box::new(report),
                });
            }
            Err(e) => return Err(e),
        };
        report.steps += 1;
        if (state.t - target).abs() <= tol {
            state.t = target;
            report.snapshots.push(FdSnapshot {
                t: state.t,
                u: state.u.clone(),
            });
            report.mass.push((state.t, state.mass()));
            next_snapshot += 1;
        }
        track(&state, &mut report);
    }
    Ok(report)
}

/// Relative L² difference between FD values and a periodic field, the
/// latter linearly interpolated to the FD nodes.
pub fn relative_l2_against(xs: &[f64], u: &[f64], field: &Field) -> f64 {
    let g = field.grid();
    let v = field.values();
    let n = v.len();
    let (mut num, mut den) = (0.0, 0.0);
    for (&x, &a) in xs.iter().zip(u) {
        let s = (x / g.dx()).rem_euclid(n as f64);
        let j = s.floor() as usize % n;
        let f = s - s.floor();
        let b = (1.0 - f) * v[j] + f * v[(j + 1) % n];
        num += (a - b) * (a - b);
        den += b * b;
    }
    (num / den).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlocal::SmoothProfile;
    use crate::nonlocal::{apply_L_definition, Bump};

    fn state(u: Vec<f64>, dx: f64, eps: f64) -> FdState {
        FdState {
            t: 0.0,
            u,
            dx,
            origin: 0.0,
            viscosity: eps,
        }
    }

    #[test]
    fn cfl_limits() {
        assert!((cfl_dt(&state(vec![0.0; 10], 0.1, 0.1)) - 0.05).abs() < 1e-15);
        let mut u = vec![0.0; 10];
        u[3] = -1.0;
        let s = state(u.clone(), 0.0075, 0.1);
        assert!((cfl_dt(&s) - 2.8125e-4).abs() < 1e-15);
        let s2 = state(vec![0.0; 10], 0.1, 0.2);
        assert!((cfl_dt(&s2) - 0.025).abs() < 1e-15);
    }

    #[test]
    fn constant_interior_unchanged() {
        let s = state(vec![0.0, 2.0, 2.0, 2.0, 2.0, 0.0], 0.1, 0.1);
        let next = step_burgers(&s, 1e-3, Boundary::Zero, true).unwrap();
        assert_eq!(next.u[2], 2.0);
        assert_eq!(next.u[3], 2.0);
    }

    #[test]
    fn zero_stays_zero() {
        let s = state(vec![0.0; 50], 0.1, 0.1);
        let w = nonlocal_weights(50, 0.1, OriginWeight::ZetaCorrected, true);
        assert!(step_fowler(&s, 1e-3, &w, true).unwrap().u.iter().all(|&v| v == 0.0));
        assert_eq!(nonlocal_sum(&s, 10, OriginWeight::ZetaCorrected, true).unwrap(), 0.0);
    }

    #[test]
    fn nonlocal_sum_sees_only_upstream() {
        let mut u = vec![0.0; 100];
        for v in u.iter_mut().skip(60).take(20) {
            *v = 1.0;
        }
        let s = state(u, 0.1, 0.1);
        assert_eq!(nonlocal_sum(&s, 40, OriginWeight::ZetaCorrected, true).unwrap(), 0.0);
        assert!(nonlocal_sum(&s, 0, OriginWeight::ZetaCorrected, true).is_err());
        assert!(nonlocal_sum(&s, 99, OriginWeight::ZetaCorrected, true).is_err());
    }

    #[test]
    fn single_point_matches_vectorized() {
        let dx = 0.05;
        let u: Vec<f64> = (0..137)
            .map(|i| ((i as f64) * 0.3).sin() * (i as f64 * dx).min(2.0))
            .collect();
        let s = state(u.clone(), dx, 0.1);
        let w = nonlocal_weights(137, dx, OriginWeight::CellAverage, true);
        let all = nonlocal_sums(&u, dx, &w);
        for i in [1, 7, 50, 135] {
            let one = nonlocal_sum(&s, i, OriginWeight::CellAverage, true).unwrap();
            assert!((one - all[i]).abs() < 1e-12 * (1.0 + one.abs()));
        }
    }

    #[test]
    fn nonlocal_sum_converges_to_l_operator() {
        let bump = Bump {
            center: 4.0,
            radius: 1.5,
            amplitude: 1.0,
        };
        let probe = 4.5;
        let exact = apply_L_definition(&bump, probe).unwrap();
        let errs: Vec<f64> = [200usize, 400, 800]
            .iter()
            .map(|&cells| {
                let dx = 10.0 / cells as f64;
                let u: Vec<f64> = (0..=cells).map(|i| bump.eval(i as f64 * dx).0).collect();
                let i = (probe / dx).round() as usize;
                let s = state(u, dx, 0.1);
                (nonlocal_sum(&s, i, OriginWeight::ZetaCorrected, true).unwrap() - exact).abs()
            })
            .collect();
        assert!(errs[0] / errs[1] >= 1.5 && errs[1] / errs[2] >= 1.5, "{errs:?}");
    }

    #[test]
    fn strict_mode_rejects_large_steps() {
        let s = state(vec![0.0, 1.0, 0.0], 0.1, 0.1);
        assert!(step_burgers(&s, 1.0, Boundary::Zero, true).is_err());
        assert!(step_burgers(&s, 1.0, Boundary::Zero, false).is_ok());
    }

    #[test]
    fn blow_up_keeps_last_finite_state() {
        let cfg = FdConfig {
            model: Model::Burgers,
            points: 101,
            dt: Some(10.0),
            t_end: 1000.0,
            snapshot_interval: 1000.0,
            ..FdConfig::default()
        };
        match run(&cfg) {
            Err(Error::FdBlowUp { time, partial }) => {
                let last = partial.final_snapshot();
                assert!(last.t > 0.0 && last.t < time);
                assert!(last.u.iter().all(|v| v.is_finite()));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn config_rejects_bad_keys_and_values() {
        assert!(serde_json::from_str::<FdConfig>(r#"{"modle": "burgers"}"#).is_err());
        let c: FdConfig = serde_json::from_str(r#"{"model": "burgers", "points": 101}"#).unwrap();
        assert_eq!(c.model, Model::Burgers);
        assert!(c.validate().is_ok());
        let bad = FdConfig {
            viscosity: 0.0,
            ..FdConfig::default()
        };
        assert!(matches!(
            bad.validate(),
            Err(Error::InvalidArgument { key: "viscosity", .. })
        ));
    }

    #[test]
    fn snapshots_land_on_interval() {
        let cfg = FdConfig {
            model: Model::Burgers,
            points: 201,
            t_end: 0.25,
            snapshot_interval: 0.1,
            ..FdConfig::default()
        };
        let r = run(&cfg).unwrap();
        let ts: Vec<f64> = r.snapshots.iter().map(|s| s.t).collect();
        assert_eq!(ts.len(), 4);
        assert!((ts[1] - 0.1).abs() < 1e-15 && (ts[3] - 0.25).abs() < 1e-15);
    }
}
