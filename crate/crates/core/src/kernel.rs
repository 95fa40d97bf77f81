//! The semigroup kernel `K(t,·) = F⁻¹(e^{−tψ})` on a periodic grid.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{forward, inverse, inverse_complex, Field, Grid, Spectrum};
use crate::quadrature::{integrate_pieces, Tolerance};
use crate::symbol::{sign_change_frequency, SymbolTable};

/// Pointwise values are trusted only when `e^{−t Re ψ}` at Nyquist is below this.
pub const RESOLUTION_THRESHOLD: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct Kernel {
    t: f64,
    values: Field,
    spectrum: Spectrum,
}

/// `e^{−tψ}` on the table's grid.
fn propagator(t: f64, table: &SymbolTable) -> Vec<Complex64> {
    table.psi().iter().map(|p| (-t * p).exp()).collect()
}

/// Build `K(t,·)`; rejects `t ≤ 0`.
pub fn build_kernel(t: f64, table: &SymbolTable) -> Result<Kernel> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::invalid("t", format!("kernel time must be > 0, got {t}")));
    }
    let spectrum = Spectrum::new(*table.grid(), propagator(t, table))?;
    let values = inverse(&spectrum)?;
    Ok(Kernel { t, values, spectrum })
}

impl Kernel {
    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn grid(&self) -> &Grid {
        self.values.grid()
    }

    pub fn values(&self) -> &Field {
        &self.values
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    /// `Σ K_j dx`
    pub fn mass(&self) -> f64 {
        self.values.mass()
    }

    pub fn min(&self) -> f64 {
        self.values.min_with_location().0
    }

    /// `e^{−t Re ψ}` at the Nyquist mode.
    pub fn nyquist_magnitude(&self) -> f64 {
        self.spectrum.coeffs()[self.grid().nyquist_index()].norm()
    }

    pub fn is_resolved(&self) -> bool {
        self.nyquist_magnitude() < RESOLUTION_THRESHOLD
    }

    /// `max |Im F⁻¹(e^{−tψ})| / ‖K‖_∞` over the grid.
    pub fn imaginary_residue(&self) -> f64 {
        let full = inverse_complex(&self.spectrum);
        let im = full.iter().fold(0.0f64, |m, c| m.max(c.im.abs()));
        let re = full.iter().fold(0.0f64, |m, c| m.max(c.re.abs()));
        im / re
    }

    /// `∂ₓK` by spectral differentiation.
    pub fn gradient(&self) -> Field {
        let g = *self.grid();
        let nyq = g.nyquist_index();
        let mult: Vec<Complex64> = (0..g.points())
            .map(|i| {
                if i == nyq {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(0.0, 2.0 * PI * g.frequency(i))
                }
            })
            .collect();
        crate::grid::inverse_unchecked(&self.spectrum.multiplied(&mult))
    }

    /// `K(s)` composed with `K(t)` in the spectral domain: `K(s+t)`.
    pub fn compose(&self, other: &Kernel) -> Result<Kernel> {
        self.grid().ensure_same(other.grid())?;
        let coeffs = self
            .spectrum
            .coeffs()
            .iter()
            .zip(other.spectrum.coeffs())
            .map(|(a, b)| a * b)
            .collect();
        let spectrum = Spectrum::new(*self.grid(), coeffs)?;
        let values = inverse(&spectrum)?;
        Ok(Kernel {
            t: self.t + other.t,
            values,
            spectrum,
        })
    }

    /// `max x²|K(t,x)|` over periodic distances `|x| ∈ [1, L/2]` from the origin.
    pub fn far_field_weighted_max(&self) -> f64 {
        let g = self.grid();
        let l = g.length();
        self.values
            .values()
            .iter()
            .enumerate()
            .filter_map(|(j, v)| {
                let x = g.x(j);
                let d = x.min(l - x);
                (d >= 1.0).then_some(d * d * v.abs())
            })
            .fold(0.0, f64::max)
    }
}

/// `K(t) ∗ f`, computed as `F⁻¹(e^{−tψ} F f)`.
pub fn convolve(k: &Kernel, f: &Field) -> Result<Field> {
    k.grid().ensure_same(f.grid())?;
    inverse(&forward(f)?.multiplied(k.spectrum.coeffs()))
}

/// Whole-line bound `C(t) = (1/4π²) ∫ |∂²_ξ e^{−tψ(ξ)}| dξ`, so that
/// `x² |K(t,x)| ≤ C(t)`.
pub fn far_field_constant(t: f64, table: &SymbolTable) -> Result<f64> {
    let (a, b, eps) = (table.a(), table.b(), table.viscosity());
    let integrand = |xi: f64| {
        let c13 = xi.cbrt();
        let psi = Complex64::new(4.0 * PI * PI * eps * xi * xi - a * c13.powi(4), b * c13.powi(4));
        let d1 = Complex64::new(8.0 * PI * PI * eps * xi - 4.0 / 3.0 * a * c13, 4.0 / 3.0 * b * c13);
        let d2 = Complex64::new(
            8.0 * PI * PI * eps - 4.0 / 9.0 * a / (c13 * c13),
            4.0 / 9.0 * b / (c13 * c13),
        );
        ((t * t * d1 * d1 - t * d2) * (-t * psi).exp()).norm()
    };
    // ξ = s³ absorbs the ξ^{−2/3} singularity of ψ''.
    let xi_max = (2.0 * sign_change_frequency(a, eps)).max((80.0 / (4.0 * PI * PI * eps * t)).sqrt());
    let s_max = xi_max.cbrt();
    let breaks: Vec<f64> = (0..=32).map(|i| s_max * i as f64 / 32.0).collect();
    let half = integrate_pieces(
        |s| {
            if s == 0.0 {
                0.0
            } else {
                3.0 * s * s * integrand(s * s * s)
            }
        },
        &breaks,
        Tolerance {
            abs: 1e-10,
            rel: 1e-8,
            max_panels: 4000,
        },
    )?;
    Ok(2.0 * half.value / (4.0 * PI * PI))
}

#[derive(Clone, Debug, Serialize)]
pub struct KernelRow {
    pub t: f64,
    pub mass: f64,
    pub min: f64,
    pub grad_l1: f64,
    pub grad_l2: f64,
    /// `‖K(t) ∗ K(t) − K(2t)‖_{L²}`
    pub semigroup_residual: f64,
    pub nyquist_magnitude: f64,
    /// False when `e^{−t Re ψ}` at Nyquist exceeds [`RESOLUTION_THRESHOLD`].
    pub resolved: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct KernelDiagnostics {
    pub rows: Vec<KernelRow>,
    /// Log-log slope of `‖∂ₓK‖_{L²}` against `t`.
    pub grad_l2_slope: f64,
    /// Log-log slope of `‖∂ₓK‖_{L¹}` against `t`.
    pub grad_l1_slope: f64,
}

/// Diagnostics at `n` geometrically spaced times in `[tmin, tmax]`.
pub fn kernel_diagnostics(table: &SymbolTable, tmin: f64, tmax: f64, n: usize) -> Result<KernelDiagnostics> {
    if !(tmin > 0.0 && tmax > tmin && tmax.is_finite()) {
        return Err(Error::invalid(
            "t",
            format!("need 0 < tmin < tmax, got [{tmin}, {tmax}]"),
        ));
    }
    if n < 2 {
        return Err(Error::invalid("n", format!("need at least 2 sample times, got {n}")));
    }
    let ratio = (tmax / tmin).ln();
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let t = tmin * (ratio * i as f64 / (n - 1) as f64).exp();
        let k = build_kernel(t, table)?;
        let grad = k.gradient();
        let dx = table.grid().dx();
        let grad_l1 = grad.values().iter().map(|v| v.abs()).sum::<f64>() * dx;
        let twice = convolve(&k, k.values())?;
        let k2 = build_kernel(2.0 * t, table)?;
        let semigroup_residual = twice.sub(k2.values())?.l2_norm();
        let resolved = k.is_resolved();
        if !resolved {
            log::warn!(
                "kernel at t = {t:e} is under-resolved (Nyquist magnitude {:e})",
                k.nyquist_magnitude()
            );
        }
        rows.push(KernelRow {
            t,
            mass: k.mass(),
            min: k.min(),
            grad_l1,
            grad_l2: grad.l2_norm(),
            semigroup_residual,
            nyquist_magnitude: k.nyquist_magnitude(),
            resolved,
        });
    }
    let ts: Vec<f64> = rows.iter().map(|r| r.t).collect();
    let grad_l2_slope = loglog_slope(&ts, &rows.iter().map(|r| r.grad_l2).collect::<Vec<_>>());
    let grad_l1_slope = loglog_slope(&ts, &rows.iter().map(|r| r.grad_l1).collect::<Vec<_>>());
    Ok(KernelDiagnostics {
        rows,
        grad_l2_slope,
        grad_l1_slope,
    })
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::SymbolConstants;

    fn table(n: usize) -> SymbolTable {
        SymbolTable::new(Grid::new(30.0, n).unwrap(), 1.0).unwrap()
    }

    #[test]
    fn rejects_nonpositive_time() {
        let t = table(64);
        assert!(build_kernel(0.0, &t).is_err());
        assert!(build_kernel(-1.0, &t).is_err());
        assert!(build_kernel(f64::NAN, &t).is_err());
    }

    #[test]
    fn unit_mass_and_negative_part() {
        let t = table(4096);
        for &time in &[0.05, 0.1, 0.5] {
            let k = build_kernel(time, &t).unwrap();
            assert!((k.mass() - 1.0).abs() < 1e-8);
            assert!(k.min() < 0.0);
            assert!(k.imaginary_residue() < 1e-12);
        }
    }

    #[test]
    fn heat_kernel_when_nonlocal_part_removed() {
        let g = Grid::new(30.0, 1024).unwrap();
        let heat = SymbolTable::with_constants(g, 1.0, SymbolConstants::new("heat", 0.0, 0.0)).unwrap();
        let t = 0.1;
        let k = build_kernel(t, &heat).unwrap();
        for (j, v) in k.values().values().iter().enumerate() {
            let x = g.x(j);
            let d = x.min(g.length() - x);
            let exact = (-d * d / (4.0 * t)).exp() / (4.0 * PI * t).sqrt();
            assert!((v - exact).abs() < 1e-8, "x={x}");
        }
    }

    #[test]
    fn convolving_a_constant_returns_it() {
        let t = table(256);
        let k = build_kernel(0.1, &t).unwrap();
        let c = Field::from_fn(*t.grid(), |_| 2.5).unwrap();
        let out = convolve(&k, &c).unwrap();
        assert!(out.values().iter().all(|v| (v - 2.5).abs() < 1e-12));
    }

    #[test]
    fn composition_is_exact() {
        let t = table(1024);
        let a = build_kernel(0.1, &t).unwrap();
        let b = build_kernel(0.2, &t).unwrap();
        let ab = a.compose(&b).unwrap();
        let direct = build_kernel(0.3, &t).unwrap();
        assert!(ab.values().sub(direct.values()).unwrap().l2_norm() < 1e-12);
        assert!((ab.mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn far_field_weighted_values_bounded() {
        let t = table(4096);
        let k = build_kernel(0.1, &t).unwrap();
        let c = far_field_constant(0.1, &t).unwrap();
        assert!(c.is_finite() && c > 0.0);
        // Periodic images add at most a comparable amount on |x| ≤ L/2.
        assert!(
            k.far_field_weighted_max() <= 2.0 * c,
            "{} vs {c}",
            k.far_field_weighted_max()
        );
    }

    #[test]
    fn slope_of_power_law() {
        let x = [1.0, 2.0, 4.0, 8.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(-0.75)).collect();
        assert!((loglog_slope(&x, &y) + 0.75).abs() < 1e-12);
    }

    #[test]
    fn diagnostics_flag_under_resolution() {
        let t = table(64);
        let d = kernel_diagnostics(&t, 1e-4, 1.0, 5).unwrap();
        assert!(!d.rows[0].resolved);
        assert!(d.rows[4].resolved);
        assert!(kernel_diagnostics(&t, 0.1, 0.01, 4).is_err());
    }
}
