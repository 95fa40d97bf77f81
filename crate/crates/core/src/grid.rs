//! Periodic grid on `[0, L)`, real fields on it, and the discrete Fourier
//! transform pair.
//!
//! Coefficients follow the continuum convention `F f(ξ) = ∫ e^{-2iπxξ} f(x) dx`
//! sampled at `ξ_k = k/L`: the forward transform is the DFT sum times `dx`
//! and the inverse is the conjugate sum times `1/L`. Symbol formulas can
//! therefore be applied verbatim at the grid frequencies.
//!
//! Spectra are stored in FFT order: index `j < N/2` holds wavenumber `j`,
//! index `j >= N/2` holds `j - N`. The single Nyquist mode is `k = -N/2`.

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance used by [`inverse`] to decide Hermitian symmetry.
pub const HERMITIAN_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridSpec", into = "GridSpec")]
pub struct Grid {
    length: f64,
    points: usize,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridSpec {
    points: usize,
    length: f64,
}

impl TryFrom<GridSpec> for Grid {
    type Error = Error;

    fn try_from(spec: GridSpec) -> Result<Self> {
        Grid::new(spec.length, spec.points)
    }
}

impl From<Grid> for GridSpec {
    fn from(g: Grid) -> Self {
        GridSpec {
            points: g.points,
            length: g.length,
        }
    }
}

impl Grid {
    pub fn new(length: f64, points: usize) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::invalid(
                "length",
                format!("must be finite and > 0, got {length}"),
            ));
        }
        if points < 8 || !points.is_multiple_of(2) {
            return Err(Error::invalid("points", format!("must be even and >= 8, got {points}")));
        }
        Ok(Grid { length, points })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn dx(&self) -> f64 {
        self.length / self.points as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        j as f64 * self.dx()
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.points).map(|j| self.x(j)).collect()
    }

    /// Signed wavenumber stored at FFT index `idx`.
    pub fn wavenumber(&self, idx: usize) -> i64 {
        let n = self.points as i64;
        let i = idx as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    /// FFT index holding signed wavenumber `k`, for `-N/2 <= k < N/2`.
    pub fn index_of(&self, k: i64) -> usize {
        let n = self.points as i64;
        debug_assert!(-n / 2 <= k && k < n / 2, "wavenumber {k} out of range");
        k.rem_euclid(n) as usize
    }

    /// Frequency `ξ = k/L` at FFT index `idx`.
    pub fn frequency(&self, idx: usize) -> f64 {
        self.wavenumber(idx) as f64 / self.length
    }

    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.frequency(i)).collect()
    }

    pub fn nyquist_index(&self) -> usize {
        self.points / 2
    }

    /// Index of the grid node nearest to `x` (periodic).
    pub fn nearest_node(&self, x: f64) -> usize {
        let j = (x / self.dx()).round() as i64;
        j.rem_euclid(self.points as i64) as usize
    }

    pub(crate) fn ensure_same(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "(N={}, L={}) vs (N={}, L={})",
                self.points, self.length, other.points, other.length
            )))
        }
    }
}

/// Real samples of a function on a [`Grid`].
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.points() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.points()
            )));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "field", index });
        }
        Ok(Field { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        Field {
            grid,
            values: vec![0.0; grid.points()],
        }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Field::new(grid, grid.xs().into_iter().map(f).collect())
    }

    pub(crate) fn from_parts_unchecked(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.points());
        Field { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// `(Σ f_j² dx)^{1/2}`
    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() * self.grid.dx()).sqrt()
    }

    /// `Σ f_j dx`
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.dx()
    }

    /// Minimum value and the position where it is attained.
    pub fn min_with_location(&self) -> (f64, f64) {
        let (j, v) = self
            .values
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (j, v)| if v < acc.1 { (j, v) } else { acc });
        (v, self.grid.x(j))
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn scaled(&self, s: f64) -> Field {
        Field::from_parts_unchecked(self.grid, self.values.iter().map(|v| v * s).collect())
    }

    /// `self - other`, on the same grid.
    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.grid.ensure_same(&other.grid)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Ok(Field::from_parts_unchecked(self.grid, values))
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.grid.ensure_same(&other.grid)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(Field::from_parts_unchecked(self.grid, values))
    }
}

/// Fourier coefficients of a field, in FFT order.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(grid: Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.points() {
            return Err(Error::GridMismatch(format!(
                "{} coefficients for a grid of {} points",
                coeffs.len(),
                grid.points()
            )));
        }
        if let Some(index) = coeffs.iter().position(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::NonFinite {
                what: "spectrum",
                index,
            });
        }
        Ok(Spectrum { grid, coeffs })
    }

    pub fn zeros(grid: Grid) -> Self {
        Spectrum {
            grid,
            coeffs: vec![Complex64::new(0.0, 0.0); grid.points()],
        }
    }

    pub(crate) fn from_parts_unchecked(grid: Grid, coeffs: Vec<Complex64>) -> Self {
        debug_assert_eq!(coeffs.len(), grid.points());
        Spectrum { grid, coeffs }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    #[cfg(test)]
    pub(crate) fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient of signed wavenumber `k`.
    pub fn at(&self, k: i64) -> Complex64 {
        self.coeffs[self.grid.index_of(k)]
    }

    /// Mode-0 coefficient, i.e. the mass `∫ u dx` of a real field.
    pub fn mass(&self) -> f64 {
        self.coeffs[0].re
    }

    /// L² norm of the represented field, via Parseval: `((1/L) Σ |c_k|²)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        (self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>() / self.grid.length()).sqrt()
    }

    /// Pointwise product with a multiplier sampled at the same indices.
    pub fn multiplied(&self, multiplier: &[Complex64]) -> Spectrum {
        debug_assert_eq!(multiplier.len(), self.coeffs.len());
        let coeffs = self.coeffs.iter().zip(multiplier).map(|(c, m)| c * m).collect();
        Spectrum::from_parts_unchecked(self.grid, coeffs)
    }

    /// Largest deviation from `c[-k] = conj(c[k])` (mode 0 and Nyquist must
    /// be real), relative to the largest coefficient magnitude.
    pub fn hermitian_asymmetry(&self) -> f64 {
        let scale = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if scale == 0.0 {
            return 0.0;
        }
        let n = self.coeffs.len();
        let mut worst = self.coeffs[0].im.abs().max(self.coeffs[n / 2].im.abs());
        for i in 1..n / 2 {
            let d = (self.coeffs[n - i] - self.coeffs[i].conj()).norm();
            worst = worst.max(d);
        }
        worst / scale
    }

    /// Fraction of spectral energy carried by modes with `|k| > N/4`.
    pub fn tail_fraction(&self) -> f64 {
        let n = self.grid.points() as i64;
        let mut total = 0.0;
        let mut tail = 0.0;
        for (i, c) in self.coeffs.iter().enumerate() {
            let e = c.norm_sqr();
            total += e;
            if self.grid.wavenumber(i).abs() > n / 4 {
                tail += e;
            }
        }
        if total == 0.0 {
            0.0
        } else {
            tail / total
        }
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    })
}

/// Forward transform: `c_k = dx Σ_j f_j e^{-2iπ jk/N}`.
pub fn forward(f: &Field) -> Result<Spectrum> {
    if let Some(index) = f.values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { what: "field", index });
    }
    Ok(forward_unchecked(f.grid(), f.values()))
}

pub(crate) fn forward_unchecked(grid: &Grid, values: &[f64]) -> Spectrum {
    let dx = grid.dx();
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    plan(buf.len(), false).process(&mut buf);
    for c in &mut buf {
        *c *= dx;
    }
    Spectrum::from_parts_unchecked(*grid, buf)
}

/// Inverse transform of a Hermitian spectrum: `f_j = (1/L) Σ_k c_k e^{2iπ jk/N}`.
///
/// Spectra that do not represent a real field are rejected rather than
/// silently symmetrized.
pub fn inverse(s: &Spectrum) -> Result<Field> {
    let asym = s.hermitian_asymmetry();
    if asym > HERMITIAN_TOLERANCE {
        return Err(Error::NotHermitian {
            asymmetry: asym,
            tolerance: HERMITIAN_TOLERANCE,
        });
    }
    Ok(inverse_unchecked(s))
}

/// Real part of the inverse transform, without the symmetry check.
pub(crate) fn inverse_unchecked(s: &Spectrum) -> Field {
    let buf = inverse_complex(s);
    Field::from_parts_unchecked(*s.grid(), buf.into_iter().map(|c| c.re).collect())
}

/// Full complex inverse transform (used to measure imaginary residue).
pub fn inverse_complex(s: &Spectrum) -> Vec<Complex64> {
    let mut buf = s.coeffs().to_vec();
    plan(buf.len(), true).process(&mut buf);
    let scale = 1.0 / s.grid().length();
    for c in &mut buf {
        *c *= scale;
    }
    buf
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid() -> Grid {
        Grid::new(30.0, 64).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(Grid::new(0.0, 64).is_err());
        assert!(Grid::new(-1.0, 64).is_err());
        assert!(Grid::new(f64::NAN, 64).is_err());
        assert!(Grid::new(1.0, 6).is_err());
        assert!(Grid::new(1.0, 9).is_err());
        assert!(Grid::new(1.0, 8).is_ok());
    }

    #[test]
    fn spacing_times_points_is_length() {
        for &(l, n) in &[(30.0, 4096), (1.0, 10), (std::f64::consts::E, 1 << 14)] {
            let g = Grid::new(l, n).unwrap();
            let ulp = f64::EPSILON * l;
            assert!((g.dx() * n as f64 - l).abs() <= ulp);
        }
    }

    #[test]
    fn frequencies_symmetric_except_nyquist() {
        let g = grid();
        let n = g.points() as i64;
        let ks: Vec<i64> = (0..g.points()).map(|i| g.wavenumber(i)).collect();
        assert_eq!(ks.iter().min(), Some(&(-n / 2)));
        assert_eq!(ks.iter().max(), Some(&(n / 2 - 1)));
        for k in 1..n / 2 {
            assert!(ks.contains(&k) && ks.contains(&-k));
        }
        assert_eq!(g.wavenumber(g.nyquist_index()), -n / 2);
        for k in -n / 2..n / 2 {
            assert_eq!(g.wavenumber(g.index_of(k)), k);
        }
    }

    #[test]
    fn constant_has_only_mean_mode() {
        let g = grid();
        let c = 2.5;
        let s = forward(&Field::from_fn(g, |_| c).unwrap()).unwrap();
        assert!((s.at(0) - Complex64::new(c * g.length(), 0.0)).norm() < 1e-12);
        for i in 1..g.points() {
            assert!(s.coeffs()[i].norm() < 1e-12);
        }
    }

    #[test]
    fn cosine_single_mode() {
        let g = grid();
        let m = 3;
        let f = Field::from_fn(g, |x| (2.0 * PI * m as f64 * x / g.length()).cos()).unwrap();
        let s = forward(&f).unwrap();
        let half = g.length() / 2.0;
        for i in 0..g.points() {
            let k = g.wavenumber(i);
            let expected = if k.abs() == m { half } else { 0.0 };
            assert!((s.coeffs()[i] - Complex64::new(expected, 0.0)).norm() < 1e-12, "k={k}");
        }
    }

    #[test]
    fn inverse_trivial_cases() {
        let g = grid();
        let zero = inverse(&Spectrum::zeros(g)).unwrap();
        assert!(zero.values().iter().all(|&v| v == 0.0));

        let mut s = Spectrum::zeros(g);
        s.coeffs_mut()[0] = Complex64::new(g.length(), 0.0);
        let one = inverse(&s).unwrap();
        assert!(one.values().iter().all(|&v| (v - 1.0).abs() < 1e-14));
    }

    #[test]
    fn rejects_non_finite_and_asymmetric() {
        let g = grid();
        let mut v = vec![0.0; g.points()];
        v[5] = f64::NAN;
        assert!(matches!(Field::new(g, v), Err(Error::NonFinite { index: 5, .. })));

        let mut s = Spectrum::zeros(g);
        s.coeffs_mut()[3] = Complex64::new(1.0, 0.0);
        assert!(matches!(inverse(&s), Err(Error::NotHermitian { .. })));
        s.coeffs_mut()[g.index_of(-3)] = Complex64::new(1.0, 0.0);
        assert!(inverse(&s).is_ok());
    }

    #[test]
    fn grid_mismatch_rejected() {
        let a = Field::zeros(grid());
        let b = Field::zeros(Grid::new(30.0, 32).unwrap());
        assert!(matches!(a.sub(&b), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn grid_json_roundtrip_validates() {
        let g: Grid = serde_json::from_str(r#"{"points": 128, "length": 30.0}"#).unwrap();
        assert_eq!(g, Grid::new(30.0, 128).unwrap());
        assert!(serde_json::from_str::<Grid>(r#"{"points": 7, "length": 30.0}"#).is_err());
        assert!(serde_json::from_str::<Grid>(r#"{"points": 8, "length": 30.0, "x": 1}"#).is_err());
    }
}
