//! The nonlocal operator
//!
//! ```text
//! I[φ](x) = ∫_0^∞ ζ^{−1/3} φ''(x − ζ) dζ,     L[φ](x) = ∫_0^∞ ζ^{−1/3} φ'(x − ζ) dζ,
//! ```
//!
//! evaluated three ways: from the definition, from the singular-integral
//! formula `C_I ∫_{−∞}^0 (φ(x+z) − φ(x) − φ'(x)z)|z|^{−7/3} dz`, and as a
//! Fourier multiplier on a periodic grid.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{forward, inverse, Field};
use crate::quadrature::{integrate_pieces, Tolerance};
use crate::symbol::{oscillatory_tail, SymbolTable, C_I};

/// Target absolute error of the quadrature routes. Cancellation in the
/// formula's numerator near `r = δ` leaves noise of order `1e−16·δ^{−4/3}`,
/// so much tighter targets are not reachable.
const ROUTE_TOLERANCE: f64 = 1e-9;

/// A smooth function with its first two derivatives.
///
/// The quadrature routes integrate over `[0, Z]` upstream of `x`, with
/// `Z = truncation(x)`; whatever lies beyond is supplied by `tail_integrals`.
pub trait SmoothProfile {
    /// `(φ(x), φ'(x), φ''(x))`
    fn eval(&self, x: f64) -> (f64, f64, f64);

    /// Interval outside of which `φ` is zero to roundoff. May be unbounded.
    fn support(&self) -> (f64, f64);

    /// Length scale of the profile's variations.
    fn width(&self) -> f64 {
        let (lo, hi) = self.support();
        hi - lo
    }

    /// `φ'''(x)`, by default a central difference of `φ''`.
    fn third(&self, x: f64) -> f64 {
        let h = 1e-4 * self.width();
        (self.eval(x + h).2 - self.eval(x - h).2) / (2.0 * h)
    }

    /// Upstream distance covered by quadrature. The default reaches one
    /// width past the far edge of the support.
    fn truncation(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        (x - lo) + (hi - lo)
    }

    /// `[∫_Z^∞ r^{−7/3} φ(x−r) dr, ∫_Z^∞ r^{−1/3} φ'(x−r) dr, ∫_Z^∞ r^{−1/3} φ''(x−r) dr]`.
    fn tail_integrals(&self, _x: f64, _z: f64) -> [f64; 3] {
        [0.0; 3]
    }

    /// Samples of `φ` on a grid.
    fn sample(&self, grid: crate::grid::Grid) -> Result<Field>
    where
        Self: Sized,
    {
        Field::from_fn(grid, |x| self.eval(x).0)
    }
}

/// `A exp(−((x − c)/w)²)`
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Gaussian {
    pub center: f64,
    pub width: f64,
    pub amplitude: f64,
}

impl Gaussian {
    pub fn standard() -> Self {
        Gaussian {
            center: 0.0,
            width: 1.0,
            amplitude: 1.0,
        }
    }
}

impl SmoothProfile for Gaussian {
    fn eval(&self, x: f64) -> (f64, f64, f64) {
        let y = (x - self.center) / self.width;
        let e = self.amplitude * (-y * y).exp();
        let w = self.width;
        (e, -2.0 * y * e / w, (4.0 * y * y - 2.0) * e / (w * w))
    }

    fn third(&self, x: f64) -> f64 {
        let y = (x - self.center) / self.width;
        let e = self.amplitude * (-y * y).exp();
        (12.0 * y - 8.0 * y.powi(3)) * e / self.width.powi(3)
    }

    fn support(&self) -> (f64, f64) {
        // exp(−6.5²) ≈ 4e−19
        (self.center - 6.5 * self.width, self.center + 6.5 * self.width)
    }

    fn width(&self) -> f64 {
        self.width
    }
}

/// `A exp(−1/(1 − ((x − c)/r)²))` on `|x − c| < r`, zero elsewhere.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Bump {
    pub center: f64,
    pub radius: f64,
    pub amplitude: f64,
}

impl Bump {
    /// Unit bump centred at `center`.
    pub fn dune(center: f64) -> Self {
        Bump {
            center,
            radius: 1.0,
            amplitude: 1.0,
        }
    }
}

impl SmoothProfile for Bump {
    fn eval(&self, x: f64) -> (f64, f64, f64) {
        let r = self.radius;
        let y = (x - self.center) / r;
        let d = 1.0 - y * y;
        // Below this every derivative is under 1e−270.
        if d <= 1.5e-3 {
            return (0.0, 0.0, 0.0);
        }
        let e = self.amplitude * (-1.0 / d).exp();
        let g1 = -2.0 * y / (d * d);
        let g2 = -2.0 / (d * d) - 8.0 * y * y / (d * d * d);
        (e, e * g1 / r, e * (g1 * g1 + g2) / (r * r))
    }

    fn support(&self) -> (f64, f64) {
        (self.center - self.radius, self.center + self.radius)
    }
}

/// `A cos(2πm x / L)`, periodic; tails are handled analytically.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Cosine {
    pub amplitude: f64,
    pub mode: u32,
    pub length: f64,
}

impl Cosine {
    fn k(&self) -> f64 {
        2.0 * PI * self.mode as f64 / self.length
    }
}

impl SmoothProfile for Cosine {
    fn eval(&self, x: f64) -> (f64, f64, f64) {
        let k = self.k();
        let (s, c) = (k * x).sin_cos();
        let a = self.amplitude;
        (a * c, -a * k * s, -a * k * k * c)
    }

    fn third(&self, x: f64) -> f64 {
        let k = self.k();
        self.amplitude * k.powi(3) * (k * x).sin()
    }

    fn support(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }

    fn width(&self) -> f64 {
        self.length / self.mode.max(1) as f64
    }

    fn truncation(&self, _x: f64) -> f64 {
        64.0 * self.width()
    }

    fn tail_integrals(&self, x: f64, z: f64) -> [f64; 3] {
        if self.mode == 0 {
            return [self.amplitude * 0.75 * z.powf(-4.0 / 3.0), 0.0, 0.0];
        }
        let (k, a) = (self.k(), self.amplitude);
        let (s, c) = (k * x).sin_cos();
        // cos(k(x−r)) = cos kx cos kr + sin kx sin kr, likewise for sin.
        let (c7, s7) = oscillatory_tail(k, z, 7.0 / 3.0);
        let (c1, s1) = oscillatory_tail(k, z, 1.0 / 3.0);
        [
            a * (c * c7 + s * s7),
            -a * k * (s * c1 - c * s1),
            -a * k * k * (c * c1 + s * s1),
        ]
    }
}

/// `α + βx` on the whole line.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Affine {
    pub intercept: f64,
    pub slope: f64,
}

impl SmoothProfile for Affine {
    fn eval(&self, x: f64) -> (f64, f64, f64) {
        (self.intercept + self.slope * x, self.slope, 0.0)
    }

    fn third(&self, _x: f64) -> f64 {
        0.0
    }

    fn support(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }

    fn width(&self) -> f64 {
        1.0
    }

    fn truncation(&self, _x: f64) -> f64 {
        1.0
    }

    fn tail_integrals(&self, x: f64, z: f64) -> [f64; 3] {
        let l_tail = if self.slope == 0.0 { 0.0 } else { f64::INFINITY };
        [
            (self.intercept + self.slope * x) * 0.75 * z.powf(-4.0 / 3.0) - 3.0 * self.slope * z.powf(-1.0 / 3.0),
            l_tail,
            0.0,
        ]
    }
}

impl<P: SmoothProfile + ?Sized> SmoothProfile for &P {
    fn eval(&self, x: f64) -> (f64, f64, f64) {
        (**self).eval(x)
    }
    fn support(&self) -> (f64, f64) {
        (**self).support()
    }
    fn width(&self) -> f64 {
        (**self).width()
    }
    fn third(&self, x: f64) -> f64 {
        (**self).third(x)
    }
    fn truncation(&self, x: f64) -> f64 {
        (**self).truncation(x)
    }
    fn tail_integrals(&self, x: f64, z: f64) -> [f64; 3] {
        (**self).tail_integrals(x, z)
    }
}

fn check_x(x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid("x", format!("must be finite, got {x}")))
    }
}

/// `[ζ_lo, ζ_hi]` where `φ(x − ζ)` can be nonzero, clipped to `[0, Z]`.
fn upstream_window<P: SmoothProfile>(p: &P, x: f64) -> (f64, f64) {
    let (_, hi) = p.support();
    let z = p.truncation(x);
    let start = if hi.is_finite() { (x - hi).max(0.0) } else { 0.0 };
    (start.min(z), z)
}

/// `∫_0^∞ ζ^{−1/3} g(x − ζ) dζ` for `g = φ'` (`order = 1`) or `φ''` (`order = 2`).
fn weighted_upstream<P: SmoothProfile>(p: &P, x: f64, order: usize) -> Result<f64> {
    check_x(x)?;
    let (lo, _) = p.support();
    if x <= lo {
        return Ok(0.0);
    }
    let (start, z) = upstream_window(p, x);
    let pick = |y: f64| {
        let v = p.eval(y);
        if order == 1 {
            v.1
        } else {
            v.2
        }
    };
    // ζ = s³ turns ζ^{−1/3} dζ into 3s ds.
    let (s0, s1) = (start.cbrt(), z.cbrt());
    let pieces = 16;
    let breaks: Vec<f64> = (0..=pieces)
        .map(|i| s0 + (s1 - s0) * i as f64 / pieces as f64)
        .collect();
    let body = integrate_pieces(
        |s| 3.0 * s * pick(x - s * s * s),
        &breaks,
        Tolerance::abs(ROUTE_TOLERANCE),
    )?;
    let tail = p.tail_integrals(x, z)[order];
    let value = body.value + tail;
    if !value.is_finite() {
        return Err(Error::Precondition(format!(
            "the upstream integral of φ^({order}) diverges for this profile"
        )));
    }
    Ok(value)
}

/// `I[φ](x)` from the definition, via `ζ = s³`.
pub fn apply_I_definition<P: SmoothProfile>(p: &P, x: f64) -> Result<f64> {
    weighted_upstream(p, x, 2)
}

/// `L[φ](x)` from the definition, via `ζ = s³`.
pub fn apply_L_definition<P: SmoothProfile>(p: &P, x: f64) -> Result<f64> {
    weighted_upstream(p, x, 1)
}

/// `I[φ](x)` from the singular-integral formula with `C_I = 4/9`.
///
/// On `r = −z ∈ [0, δ]` the numerator is replaced by `½φ''r² − ⅙φ'''r³`,
/// integrated exactly; `δ = min(10⁻³·width, 10⁻⁴)`.
pub fn apply_I_formula<P: SmoothProfile>(p: &P, x: f64) -> Result<f64> {
    check_x(x)?;
    let (lo, _) = p.support();
    if x <= lo {
        return Ok(0.0);
    }
    let (f0, f1, f2) = p.eval(x);
    let z = p.truncation(x);
    let delta = (1e-3 * p.width()).min(1e-4).min(0.5 * z);

    let inner = 0.5 * f2 * 1.5 * delta.powf(2.0 / 3.0) - p.third(x) / 6.0 * 0.6 * delta.powf(5.0 / 3.0);

    let mut breaks = vec![delta];
    let mut r = 2.0 * delta;
    while r < z {
        breaks.push(r);
        r *= 2.0;
    }
    breaks.push(z);
    let body = integrate_pieces(
        |r| (p.eval(x - r).0 - f0 + f1 * r) * r.powf(-7.0 / 3.0),
        &breaks,
        Tolerance::abs(ROUTE_TOLERANCE),
    )?;

    let tail = p.tail_integrals(x, z)[0] - f0 * 0.75 * z.powf(-4.0 / 3.0) + f1 * 3.0 * z.powf(-1.0 / 3.0);
    Ok(C_I * (inner + body.value + tail))
}

/// Result of the spectral route.
#[derive(Clone, Debug)]
pub struct SpectralApplication {
    pub field: Field,
    /// Distance from the field's numerical support to the periodic seam.
    pub seam_clearance: f64,
    pub warnings: Vec<String>,
}

/// Distance between the numerical support of `f` (|f| above `1e−12·max|f|`)
/// and the points `0 ≡ L`.
pub fn seam_clearance(f: &Field) -> f64 {
    let g = f.grid();
    let peak = f.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        return 0.5 * g.length();
    }
    let cut = 1e-12 * peak;
    let mut inside = f
        .values()
        .iter()
        .enumerate()
        .filter(|(_, v)| v.abs() > cut)
        .map(|(j, _)| g.x(j));
    let first = inside.next().unwrap_or(0.0);
    let last = inside.next_back().unwrap_or(first);
    first.min(g.length() - last)
}

/// `I[f]` as the multiplier `−a|ξ|^{4/3} + i b ξ|ξ|^{1/3}` on the grid.
pub fn apply_I_spectral(f: &Field, table: &SymbolTable) -> Result<SpectralApplication> {
    f.grid().ensure_same(table.grid())?;
    let spectrum = forward(f)?.multiplied(&table.nonlocal_multiplier());
    let field = inverse(&spectrum)?;
    let clearance = seam_clearance(f);
    let mut warnings = Vec::new();
    if clearance < 0.25 * f.grid().length() {
        let w = format!(
            "support is {clearance:.3} from the periodic seam (< L/4 = {:.3}); wraparound may dominate",
            0.25 * f.grid().length()
        );
        log::warn!("{w}");
        warnings.push(w);
    }
    Ok(SpectralApplication {
        field,
        seam_clearance: clearance,
        warnings,
    })
}

/// `((1/L) Σ (1+ξ²)^s |f̂(ξ)|²)^{1/2}`
pub fn sobolev_norm(f: &Field, s: f64) -> Result<f64> {
    let spec = forward(f)?;
    let g = *f.grid();
    let sum: f64 = spec
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, c)| (1.0 + g.frequency(i).powi(2)).powf(s) * c.norm_sqr())
        .sum();
    Ok((sum / g.length()).sqrt())
}
