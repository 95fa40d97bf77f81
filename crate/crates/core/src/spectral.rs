//! Pseudo-spectral time stepping of
//!
//! ```text
//! u_t + (u²/2)_x + I[u] − ε u_xx = 0
//! ```
//!
//! in mild form: the linear part is propagated exactly by `e^{−tψ}` and the
//! quadratic term by second-order exponential time differencing (ETD2).

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{forward, forward_unchecked, inverse_unchecked, Field, Grid, Spectrum};
use crate::presets::InitialCondition;
use crate::symbol::{SymbolConstants, SymbolTable};

/// Tail fraction above which the quadratic term is considered under-resolved.
pub const TAIL_WARNING: f64 = 1e-6;

/// Relative slack allowed on `‖u(t)‖ ≤ e^{ω₀t}‖u₀‖`.
pub const ENERGY_SLACK: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub grid: Grid,
    pub t_end: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "yes")]
    pub dealias: bool,
    /// Steps between stored snapshots; the first and last state are always stored.
    #[serde(default = "default_stride")]
    pub snapshot_stride: usize,
    /// Coefficient `ε` of `−ε u_xx`.
    #[serde(default = "one")]
    pub viscosity: f64,
    /// When false the quadratic term is dropped and only `e^{−tψ}` acts.
    #[serde(default = "yes")]
    pub nonlinear: bool,
    #[serde(default)]
    pub initial: InitialCondition,
}

fn default_dt() -> f64 {
    1e-3
}

fn default_stride() -> usize {
    100
}

fn one() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

impl SimConfig {
    /// Dune defaults on `N` points of `[0, 30)`.
    pub fn new(grid: Grid, t_end: f64) -> Self {
        SimConfig {
            grid,
            t_end,
            dt: default_dt(),
            dealias: true,
            snapshot_stride: default_stride(),
            viscosity: 1.0,
            nonlinear: true,
            initial: InitialCondition::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::invalid("dt", format!("must be > 0, got {}", self.dt)));
        }
        if !(self.t_end.is_finite() && self.t_end >= self.dt) {
            return Err(Error::invalid(
                "t_end",
                format!("must be >= dt = {}, got {}", self.dt, self.t_end),
            ));
        }
        if self.snapshot_stride == 0 {
            return Err(Error::invalid("snapshot_stride", "must be >= 1"));
        }
        if !(self.viscosity.is_finite() && self.viscosity > 0.0) {
            return Err(Error::invalid(
                "viscosity",
                format!("must be > 0, got {}", self.viscosity),
            ));
        }
        Ok(())
    }

    /// Number of steps; `dt` is adjusted to `t_end / steps`.
    pub fn steps(&self) -> usize {
        ((self.t_end / self.dt).round() as usize).max(1)
    }
}

#[derive(Clone, Debug)]
pub struct SpectralState {
    pub t: f64,
    pub uhat: Spectrum,
    pub table: Arc<SymbolTable>,
}

impl SpectralState {
    pub fn new(u0: &Field, table: Arc<SymbolTable>) -> Result<Self> {
        u0.grid().ensure_same(table.grid())?;
        Ok(SpectralState {
            t: 0.0,
            uhat: forward(u0)?,
            table,
        })
    }

    pub fn field(&self) -> Field {
        inverse_unchecked(&self.uhat)
    }
}

/// Zero every mode with `|k| > N/3`.
fn dealias_in_place(coeffs: &mut [Complex64], grid: &Grid) {
    let cut = grid.points() as i64 / 3;
    for (i, c) in coeffs.iter_mut().enumerate() {
        if grid.wavenumber(i).abs() > cut {
            *c = Complex64::new(0.0, 0.0);
        }
    }
}

/// `−iπξ F(u²)`, the transform of `−∂ₓ(u²/2)`.
pub fn nonlinear_rhs(uhat: &Spectrum, dealias: bool) -> Spectrum {
    let grid = *uhat.grid();
    let u = if dealias {
        let mut c = uhat.coeffs().to_vec();
        dealias_in_place(&mut c, &grid);
        inverse_unchecked(&Spectrum::from_parts_unchecked(grid, c))
    } else {
        inverse_unchecked(uhat)
    };
    let sq: Vec<f64> = u.values().iter().map(|v| v * v).collect();
    let mut out = forward_unchecked(&grid, &sq).into_coeffs();
    let nyq = grid.nyquist_index();
    for (i, c) in out.iter_mut().enumerate() {
        *c *= if i == nyq {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, -PI * grid.frequency(i))
        };
    }
    if dealias {
        dealias_in_place(&mut out, &grid);
    }
    Spectrum::from_parts_unchecked(grid, out)
}

/// `(e^z, φ₁(z), φ₂(z))` with `φ₁ = (e^z−1)/z`, `φ₂ = (e^z−1−z)/z²`.
pub fn phi_functions(z: Complex64) -> (Complex64, Complex64, Complex64) {
    let e = z.exp();
    if z.norm() < 1e-2 {
        // Σ z^k/(k+1)! and Σ z^k/(k+2)!, six terms each.
        let mut p1 = Complex64::new(0.0, 0.0);
        let mut p2 = Complex64::new(0.0, 0.0);
        let mut zk = Complex64::new(1.0, 0.0);
        let mut fact = 1.0; // (k+1)!
        for k in 0..6 {
            fact *= (k + 1) as f64;
            p1 += zk / fact;
            p2 += zk / (fact * (k + 2) as f64);
            zk *= z;
        }
        (e, p1, p2)
    } else {
        let em1 = e - 1.0;
        (e, em1 / z, (em1 - z) / (z * z))
    }
}

/// Per-mode ETD2 coefficients for a fixed step.
#[derive(Clone, Debug)]
pub struct Etd2 {
    dt: f64,
    decay: Vec<Complex64>,
    phi1: Vec<Complex64>,
    phi2: Vec<Complex64>,
}

impl Etd2 {
    pub fn new(table: &SymbolTable, dt: f64) -> Self {
        let n = table.psi().len();
        let mut decay = Vec::with_capacity(n);
        let mut phi1 = Vec::with_capacity(n);
        let mut phi2 = Vec::with_capacity(n);
        for p in table.psi() {
            let (e, f1, f2) = phi_functions(-dt * p);
            decay.push(e);
            phi1.push(f1 * dt);
            phi2.push(f2 * dt);
        }
        Etd2 { dt, decay, phi1, phi2 }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }
}

/// One ETD2 step:
/// `a = e^{−dtψ}û + dt φ₁ N(û)`, `û⁺ = a + dt φ₂ (N(a) − N(û))`.
pub fn step(state: &SpectralState, coeffs: &Etd2, dealias: bool, nonlinear: bool) -> Result<SpectralState> {
    let grid = *state.uhat.grid();
    let u = state.uhat.coeffs();
    let next: Vec<Complex64> = if nonlinear {
        let n0 = nonlinear_rhs(&state.uhat, dealias);
        let a: Vec<Complex64> = (0..u.len())
            .map(|i| coeffs.decay[i] * u[i] + coeffs.phi1[i] * n0.coeffs()[i])
            .collect();
        let a = Spectrum::from_parts_unchecked(grid, a);
        let na = nonlinear_rhs(&a, dealias);
        (0..u.len())
            .map(|i| a.coeffs()[i] + coeffs.phi2[i] * (na.coeffs()[i] - n0.coeffs()[i]))
            .collect()
    } else {
        u.iter().zip(&coeffs.decay).map(|(c, e)| c * e).collect()
    };
    let uhat = Spectrum::new(grid, next)?;
    Ok(SpectralState {
        t: state.t + coeffs.dt,
        uhat,
        table: state.table.clone(),
    })
}

#[derive(Clone, Debug)]
pub struct Snapshot {
    pub t: f64,
    pub field: Field,
}

#[derive(Clone, Debug, Serialize)]
pub struct DiagnosticRow {
    pub t: f64,
    pub l2: f64,
    /// Mode-0 coefficient.
    pub mass: f64,
    pub min: f64,
    pub argmin: f64,
    pub tail_fraction: f64,
    /// `e^{ω₀t}‖u₀‖₂`
    pub energy_bound: f64,
}

#[derive(Clone, Debug)]
pub struct SimReport {
    pub config: SimConfig,
    /// Step actually used (`t_end / steps`).
    pub dt: f64,
    pub constants: SymbolConstants,
    pub omega0: f64,
    pub snapshots: Vec<Snapshot>,
    pub diagnostics: Vec<DiagnosticRow>,
    /// Snapshots whose norm exceeded the energy bound by more than [`ENERGY_SLACK`].
    pub energy_violations: usize,
    pub under_resolved_steps: usize,
    pub warnings: Vec<String>,
    pub(crate) final_uhat: Spectrum,
}

impl SimReport {
    pub fn final_snapshot(&self) -> &Snapshot {
        self.snapshots
            .last()
            .expect("a report always holds the initial snapshot")
    }

    /// Keep every `stride`-th snapshot (counting from the first); the
    /// diagnostics series is kept whole.
    pub fn subsample(&self, stride: usize) -> SimReport {
        let stride = stride.max(1);
        let mut out = self.clone();
        out.snapshots = self.snapshots.iter().step_by(stride).cloned().collect();
        out
    }

    /// Final state in the spectral domain.
    pub fn final_spectrum(&self) -> &Spectrum {
        &self.final_uhat
    }
}

fn diagnostic_row(state: &SpectralState, field: &Field, bound: f64) -> DiagnosticRow {
    let (min, argmin) = field.min_with_location();
    DiagnosticRow {
        t: state.t,
        l2: state.uhat.l2_norm(),
        mass: state.uhat.mass(),
        min,
        argmin,
        tail_fraction: state.uhat.tail_fraction(),
        energy_bound: bound,
    }
}

/// Run `cfg` from `u0`, recording diagnostics every step.
pub fn simulate(cfg: &SimConfig, u0: &Field) -> Result<SimReport> {
    cfg.validate()?;
    cfg.grid.ensure_same(u0.grid())?;
    let table = Arc::new(SymbolTable::new(cfg.grid, cfg.viscosity)?);
    simulate_with_table(cfg, u0, table)
}

/// As [`simulate`], reusing a prebuilt symbol table.
pub fn simulate_with_table(cfg: &SimConfig, u0: &Field, table: Arc<SymbolTable>) -> Result<SimReport> {
    simulate_observed(cfg, u0, table, &mut |_, _| {})
}

/// As [`simulate_with_table`], calling `observer(t, u)` after every step.
pub fn simulate_observed(
    cfg: &SimConfig,
    u0: &Field,
    table: Arc<SymbolTable>,
    observer: &mut dyn FnMut(f64, &Field),
) -> Result<SimReport> {
    cfg.validate()?;
    cfg.grid.ensure_same(u0.grid())?;
    if table.grid() != &cfg.grid || table.viscosity() != cfg.viscosity {
        return Err(Error::invalid(
            "table",
            "symbol table does not match the configured grid and viscosity",
        ));
    }
    let steps = cfg.steps();
    let dt = cfg.t_end / steps as f64;
    let coeffs = Etd2::new(&table, dt);
    let mut state = SpectralState::new(u0, table.clone())?;
    let norm0 = state.uhat.l2_norm();
    let omega0 = table.omega0();

    let mut report = SimReport {
        config: cfg.clone(),
        dt,
        constants: table.constants().clone(),
        omega0,
        snapshots: vec![Snapshot {
            t: 0.0,
            field: u0.clone(),
        }],
        diagnostics: vec![diagnostic_row(&state, u0, norm0)],
        energy_violations: 0,
        under_resolved_steps: 0,
        warnings: Vec::new(),
        final_uhat: state.uhat.clone(),
    };

    for n in 1..=steps {
        let next = match step(&state, &coeffs, cfg.dealias, cfg.nonlinear) {
            Ok(s) => s,
            Err(_) => {
                report.final_uhat = state.uhat.clone();
                let time = state.t + dt;
                report
                    .warnings
                    .push(format!("non-finite state at t = {time}; reduce dt"));
                return Err(Error::BlowUp {
                    time,
                    partial: Box::new(report),
                });
            }
        };
        state = next;
        // Pin the time to the step grid so snapshots line up across runs.
        state.t = n as f64 * dt;
        let field = state.field();
        let bound = (omega0 * state.t).exp() * norm0;
        observer(state.t, &field);
        let row = diagnostic_row(&state, &field, bound);
        if row.l2 > bound * (1.0 + ENERGY_SLACK) {
            report.energy_violations += 1;
        }
        if cfg.nonlinear && row.tail_fraction > TAIL_WARNING {
            if report.under_resolved_steps == 0 {
                let w = format!(
                    "spectral tail fraction {:.3e} above {TAIL_WARNING:e} at t = {}",
                    row.tail_fraction, state.t
                );
                log::warn!("{w}");
                report.warnings.push(w);
            }
            report.under_resolved_steps += 1;
        }
        report.diagnostics.push(row);
        if n % cfg.snapshot_stride == 0 || n == steps {
            report.snapshots.push(Snapshot { t: state.t, field });
        }
    }
    report.final_uhat = state.uhat;
    Ok(report)
}

/// Relative L² gap between the final snapshot and the right side of the
/// Duhamel formula
///
/// ```text
/// e^{−tψ} F u₀ + ∫_0^t e^{−(t−s)ψ} (−iπξ) F(u²(s)) ds,
/// ```
///
/// with the `s`-integral taken by the trapezoid rule over the stored
/// snapshots, which must be equally spaced.
pub fn duhamel_residual(report: &SimReport, u0: &Field) -> Result<f64> {
    let snaps = &report.snapshots;
    if snaps.len() < 8 {
        return Err(Error::invalid(
            "snapshots",
            format!("need at least 8 snapshots, got {}", snaps.len()),
        ));
    }
    let h = snaps[1].t - snaps[0].t;
    for w in snaps.windows(2) {
        if ((w[1].t - w[0].t) - h).abs() > 1e-9 * h.max(1.0) {
            return Err(Error::invalid("snapshots", "snapshot times must be equally spaced"));
        }
    }
    let grid = report.config.grid;
    u0.grid().ensure_same(&grid)?;
    let table = SymbolTable::with_constants(grid, report.config.viscosity, report.constants.clone())?;
    let t = snaps.last().unwrap().t;
    let psi = table.psi();
    let mut rhs: Vec<Complex64> = forward(u0)?
        .coeffs()
        .iter()
        .zip(psi)
        .map(|(c, p)| c * (-t * p).exp())
        .collect();
    if report.config.nonlinear {
        let m = snaps.len() - 1;
        for (j, s) in snaps.iter().enumerate() {
            let weight = if j == 0 || j == m { 0.5 * h } else { h };
            let n = nonlinear_rhs(&forward(&s.field)?, report.config.dealias);
            for ((r, c), p) in rhs.iter_mut().zip(n.coeffs()).zip(psi) {
                *r += weight * c * (-(t - s.t) * p).exp();
            }
        }
    }
    let target = forward(&snaps.last().unwrap().field)?;
    let diff: f64 = rhs.iter().zip(target.coeffs()).map(|(a, b)| (a - b).norm_sqr()).sum();
    let norm: f64 = target.coeffs().iter().map(|c| c.norm_sqr()).sum();
    if norm == 0.0 {
        return Ok(diff.sqrt());
    }
    Ok((diff / norm).sqrt())
}

#[derive(Clone, Debug, Serialize)]
pub struct StabilityRow {
    /// `‖u₀ − v₀‖₂`
    pub size: f64,
    /// `sup_t ‖u(t) − v(t)‖₂ / ‖u₀ − v₀‖₂`
    pub sup_ratio: f64,
    /// Running supremum at every snapshot time, as `(t, ratio)`.
    pub running_sup: Vec<(f64, f64)>,
}

/// Sup-in-time amplification of `‖u − v‖₂` for a pair of runs.
pub fn stability_ratio(u0: &Field, v0: &Field, cfg: &SimConfig) -> Result<StabilityRow> {
    u0.grid().ensure_same(v0.grid())?;
    let table = Arc::new(SymbolTable::new(cfg.grid, cfg.viscosity)?);
    let a = simulate_with_table(cfg, u0, table.clone())?;
    let b = simulate_with_table(cfg, v0, table)?;
    let size = u0.sub(v0)?.l2_norm();
    let mut sup = 0.0f64;
    let mut running_sup = Vec::with_capacity(a.snapshots.len());
    for (sa, sb) in a.snapshots.iter().zip(&b.snapshots) {
        let d = sa.field.sub(&sb.field)?.l2_norm();
        let r = if size == 0.0 { d } else { d / size };
        sup = sup.max(r);
        running_sup.push((sa.t, sup));
    }
    Ok(StabilityRow {
        size,
        sup_ratio: sup,
        running_sup,
    })
}

/// [`stability_ratio`] for `v₀ = u₀ + s·(d/‖d‖)`, `d = v₀ − u₀`, for each `s` in `sizes`.
pub fn stability_probe(u0: &Field, v0: &Field, cfg: &SimConfig, sizes: &[f64]) -> Result<Vec<StabilityRow>> {
    let d = v0.sub(u0)?;
    let n = d.l2_norm();
    if n == 0.0 {
        return Ok(vec![stability_ratio(u0, v0, cfg)?]);
    }
    sizes
        .iter()
        .map(|&s| {
            let v = u0.add(&d.scaled(s / n))?;
            stability_ratio(u0, &v, cfg)
        })
        .collect()
}
