//! Python bindings. Configurations cross the boundary as JSON strings with
//! the same schema the CLI accepts; arrays come back as lists of floats.

use std::sync::Arc;

use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyComplex, PyDict};

use fowler::erosion::erosion_rate as core_erosion_rate;
use fowler::fd::{self, FdConfig};
use fowler::kernel::build_kernel;
use fowler::nonlocal::{apply_I_definition, apply_I_formula, apply_I_spectral, Bump, Gaussian, SmoothProfile};
use fowler::spectral::{simulate_with_table, SimConfig};
use fowler::symbol::{canonical_constants, psi_closed, psi_oracle_nonlocal};
use fowler::{Field, Grid, SymbolTable};

fn py_err(e: fowler::Error) -> PyErr {
    if e.is_numerical() {
        PyArithmeticError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn parse<T: serde::de::DeserializeOwned>(json: &str) -> PyResult<T> {
    serde_json::from_str(json).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Selected `(name, a, b)` constant set.
#[pyfunction]
fn symbol_constants() -> PyResult<(String, f64, f64)> {
    let c = canonical_constants().map_err(py_err)?;
    Ok((c.name, c.a, c.b))
}

/// `ψ(ξ)` in closed form.
#[pyfunction]
#[pyo3(signature = (xi, viscosity = 1.0))]
fn psi(py: Python<'_>, xi: f64, viscosity: f64) -> PyResult<Bound<'_, PyComplex>> {
    let c = canonical_constants().map_err(py_err)?;
    let v = psi_closed(xi, &c, viscosity);
    Ok(PyComplex::from_doubles(py, v.re, v.im))
}

/// Quadrature value of the nonlocal part of `ψ(ξ)` and its error bound.
#[pyfunction]
fn psi_oracle(py: Python<'_>, xi: f64) -> PyResult<(Bound<'_, PyComplex>, f64)> {
    let o = psi_oracle_nonlocal(xi).map_err(py_err)?;
    Ok((PyComplex::from_doubles(py, o.value.re, o.value.im), o.error))
}

enum Profile {
    Gaussian(Gaussian),
    Bump(Bump),
}

fn profile(kind: &str, center: f64, width: f64, amplitude: f64) -> PyResult<Profile> {
    if width.is_nan() || width <= 0.0 {
        return Err(PyValueError::new_err(format!("width must be > 0, got {width}")));
    }
    match kind {
        "gaussian" => Ok(Profile::Gaussian(Gaussian {
            center,
            width,
            amplitude,
        })),
        "bump" => Ok(Profile::Bump(Bump {
            center,
            radius: width,
            amplitude,
        })),
        other => Err(PyValueError::new_err(format!(
            "profile must be `gaussian` or `bump`, got `{other}`"
        ))),
    }
}

fn pointwise<P: SmoothProfile>(p: &P, route: &str, xs: &[f64]) -> PyResult<Vec<f64>> {
    xs.iter()
        .map(|&x| match route {
            "def" => apply_I_definition(p, x),
            "formula" => apply_I_formula(p, x),
            _ => unreachable!(),
        })
        .collect::<Result<_, _>>()
        .map_err(py_err)
}

/// `I[u]` at `xs` for a Gaussian or bump profile, by the `def` or `formula` route.
#[pyfunction]
#[pyo3(signature = (kind, xs, route = "formula", center = 15.0, width = 1.0, amplitude = 1.0))]
fn apply_nonlocal(
    kind: &str,
    xs: Vec<f64>,
    route: &str,
    center: f64,
    width: f64,
    amplitude: f64,
) -> PyResult<Vec<f64>> {
    if route != "def" && route != "formula" {
        return Err(PyValueError::new_err(format!(
            "route must be `def` or `formula`, got `{route}`"
        )));
    }
    match profile(kind, center, width, amplitude)? {
        Profile::Gaussian(g) => pointwise(&g, route, &xs),
        Profile::Bump(b) => pointwise(&b, route, &xs),
    }
}

/// `I[u]` for grid values of one period, through the Fourier multiplier.
#[pyfunction]
fn apply_nonlocal_spectral(values: Vec<f64>, length: f64) -> PyResult<Vec<f64>> {
    let grid = Grid::new(length, values.len()).map_err(py_err)?;
    let table = SymbolTable::new(grid, 1.0).map_err(py_err)?;
    let f = Field::new(grid, values).map_err(py_err)?;
    Ok(apply_I_spectral(&f, &table).map_err(py_err)?.field.into_values())
}

/// Kernel `K(t, ·)` on `points` nodes of `[0, length)`, as `(xs, values)`.
#[pyfunction]
#[pyo3(signature = (t, points = 4096, length = 30.0, viscosity = 1.0))]
fn kernel(t: f64, points: usize, length: f64, viscosity: f64) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let grid = Grid::new(length, points).map_err(py_err)?;
    let table = SymbolTable::new(grid, viscosity).map_err(py_err)?;
    let k = build_kernel(t, &table).map_err(py_err)?;
    Ok((grid.xs(), k.values().values().to_vec()))
}

/// Predicted `u_t(0, x*)` for a bump that is flat at `x*`.
#[pyfunction]
#[pyo3(signature = (x_star, center = 15.0, radius = 1.0, amplitude = 1.0))]
fn erosion_rate(x_star: f64, center: f64, radius: f64, amplitude: f64) -> PyResult<f64> {
    let b = Bump {
        center,
        radius,
        amplitude,
    };
    core_erosion_rate(&b, x_star).map_err(py_err)
}

/// Spectral run from a JSON `SimConfig`. Returns a dict with `xs`, `times`,
/// `snapshots` (list of lists) and per-step `mass` and `min`.
#[pyfunction]
fn simulate_spectral<'py>(py: Python<'py>, config: &str) -> PyResult<Bound<'py, PyDict>> {
    let cfg: SimConfig = parse(config)?;
    let u0 = cfg.initial.sample(cfg.grid).map_err(py_err)?;
    let table = Arc::new(SymbolTable::new(cfg.grid, cfg.viscosity).map_err(py_err)?);
    let r = py.detach(|| simulate_with_table(&cfg, &u0, table)).map_err(py_err)?;
    let out = PyDict::new(py);
    out.set_item("xs", cfg.grid.xs())?;
    out.set_item("times", r.snapshots.iter().map(|s| s.t).collect::<Vec<_>>())?;
    out.set_item(
        "snapshots",
        r.snapshots
            .iter()
            .map(|s| s.field.values().to_vec())
            .collect::<Vec<_>>(),
    )?;
    out.set_item("mass", r.diagnostics.iter().map(|d| d.mass).collect::<Vec<_>>())?;
    out.set_item("min", r.diagnostics.iter().map(|d| d.min).collect::<Vec<_>>())?;
    out.set_item("omega0", r.omega0)?;
    Ok(out)
}

/// Finite-difference run from a JSON `FdConfig`; same keys as
/// [`simulate_spectral`] plus `min_value` and `traveling_wave_error`.
#[pyfunction]
fn simulate_fd<'py>(py: Python<'py>, config: &str) -> PyResult<Bound<'py, PyDict>> {
    let cfg: FdConfig = parse(config)?;
    let r = py.detach(|| fd::run(&cfg)).map_err(py_err)?;
    let out = PyDict::new(py);
    out.set_item("xs", r.xs())?;
    out.set_item("times", r.snapshots.iter().map(|s| s.t).collect::<Vec<_>>())?;
    out.set_item("snapshots", r.snapshots.iter().map(|s| s.u.clone()).collect::<Vec<_>>())?;
    out.set_item("mass", r.mass.iter().map(|m| m.1).collect::<Vec<_>>())?;
    out.set_item("min_value", r.min_value)?;
    out.set_item("traveling_wave_error", r.traveling_wave_error)?;
    Ok(out)
}

/// JSON for the named preset, with `spectral` and `fd` blocks.
#[pyfunction]
fn load_preset(name: &str) -> PyResult<String> {
    let p = fowler::presets::load_preset(name).map_err(py_err)?;
    serde_json::to_string(&p).map_err(|e| PyValueError::new_err(e.to_string()))
}

#[pymodule]
#[pyo3(name = "fowler")]
fn fowler_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("C_I", fowler::symbol::C_I)?;
    m.add_function(wrap_pyfunction!(symbol_constants, m)?)?;
    m.add_function(wrap_pyfunction!(psi, m)?)?;
    m.add_function(wrap_pyfunction!(psi_oracle, m)?)?;
    m.add_function(wrap_pyfunction!(apply_nonlocal, m)?)?;
    m.add_function(wrap_pyfunction!(apply_nonlocal_spectral, m)?)?;
    m.add_function(wrap_pyfunction!(kernel, m)?)?;
    m.add_function(wrap_pyfunction!(erosion_rate, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_spectral, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_fd, m)?)?;
    m.add_function(wrap_pyfunction!(load_preset, m)?)?;
    Ok(())
}
