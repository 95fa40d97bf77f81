//! The Fourier symbol of `I - ε ∂²ₓₓ`,
//!
//! ```text
//! ψ(ξ) = 4π²ε ξ² − a |ξ|^{4/3} + i b ξ |ξ|^{1/3},
//! ```
//!
//! its constants, and an independent quadrature oracle built from the
//! singular-integral representation of the nonlocal part,
//!
//! ```text
//! ψ_I(ξ) = C_I ∫_{−∞}^0 (e^{2iπξz} − 1 − 2iπξz) / |z|^{7/3} dz,   C_I = 4/9.
//! ```
//!
//! The constants `a`, `b` are not trusted from any closed form: several
//! candidate sets are shipped and [`adjudicate`] keeps the one that
//! reproduces the oracle.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::quadrature::{integrate, integrate_pieces, QuadResult, Tolerance};
use crate::special::gamma;

/// Constant of the singular-integral representation of `I`.
pub const C_I: f64 = 4.0 / 9.0;

/// Frequencies at which candidate constants are compared with the oracle.
pub const ADJUDICATION_FREQUENCIES: [f64; 4] = [0.5, 1.0, 2.0, 4.0];

/// Maximum relative residual for a candidate set to be accepted.
pub const ACCEPT_RESIDUAL: f64 = 1e-6;

/// A named pair `(a, b)` for the nonlocal part `−a|ξ|^{4/3} + i b ξ|ξ|^{1/3}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolConstants {
    pub name: String,
    pub a: f64,
    pub b: f64,
}

impl SymbolConstants {
    pub fn new(name: impl Into<String>, a: f64, b: f64) -> Self {
        SymbolConstants {
            name: name.into(),
            a,
            b,
        }
    }

    /// `Γ(2/3)/2`, `Γ(2/3)√3/2`: correct for the angular-frequency transform `e^{−ixω}`.
    pub fn angular_frequency() -> Self {
        let g = gamma(2.0 / 3.0);
        Self::new("angular-frequency", 0.5 * g, 0.5 * 3f64.sqrt() * g)
    }

    /// The literal pair multiplied by the `4π²` carried by `F(φ'') = −4π²ξ² Fφ`.
    pub fn four_pi_squared() -> Self {
        let g = gamma(2.0 / 3.0);
        Self::new("four-pi-squared", 2.0 * PI * PI * g, 2.0 * 3f64.sqrt() * PI * PI * g)
    }

    /// `F(1_{ℝ+}|·|^{−1/3})(ξ) = Γ(2/3)(2πiξ)^{−2/3}` combined with `−4π²ξ²`,
    /// giving the factor `(2π)^{4/3} Γ(2/3) (1/2, √3/2)`.
    pub fn fourier_two_pi() -> Self {
        let g = gamma(2.0 / 3.0);
        let s = (2.0 * PI).powf(4.0 / 3.0) * g;
        Self::new("fourier-2pi", 0.5 * s, 0.5 * 3f64.sqrt() * s)
    }

    /// The two readings of the closed form that differ by `4π²`.
    pub fn literal_candidates() -> Vec<Self> {
        vec![Self::angular_frequency(), Self::four_pi_squared()]
    }

    /// All shipped candidates.
    pub fn candidates() -> Vec<Self> {
        vec![
            Self::angular_frequency(),
            Self::four_pi_squared(),
            Self::fourier_two_pi(),
        ]
    }

    /// Nonlocal part `−a|ξ|^{4/3} + i b ξ|ξ|^{1/3}`.
    pub fn nonlocal(&self, xi: f64) -> Complex64 {
        let m = xi.abs().powf(4.0 / 3.0);
        Complex64::new(-self.a * m, self.b * xi.signum() * m)
    }
}

/// Full symbol `4π²ε ξ² − a|ξ|^{4/3} + i b ξ|ξ|^{1/3}`.
pub fn psi_closed(xi: f64, constants: &SymbolConstants, viscosity: f64) -> Complex64 {
    if xi == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    Complex64::new(4.0 * PI * PI * viscosity * xi * xi, 0.0) + constants.nonlocal(xi)
}

/// Oracle value with its quadrature error bound (absolute, on each component).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleValue {
    pub value: Complex64,
    pub error: f64,
}

/// Symbol of `I − ∂²ₓₓ` from the singular integral, plus `4π²ξ²`.
pub fn psi_oracle(xi: f64) -> Result<OracleValue> {
    let nl = psi_oracle_nonlocal(xi)?;
    Ok(OracleValue {
        value: nl.value + Complex64::new(4.0 * PI * PI * xi * xi, 0.0),
        error: nl.error,
    })
}

/// `C_I ∫_{−∞}^0 (e^{2iπξz} − 1 − 2iπξz)|z|^{−7/3} dz`, integrated directly at `ξ`.
///
/// With `z = −r`, `w = 2π|ξ|` the real part is `C_I ∫_0^∞ (cos wr − 1) r^{−7/3}`
/// and the imaginary part `sgn(ξ) C_I ∫_0^∞ (wr − sin wr) r^{−7/3}`. The
/// half-line is split at `δ = 10⁻³/w` (Taylor series below), and at
/// `Z = 64` periods (analytic and asymptotic tails above); the middle is
/// integrated period by period.
pub fn psi_oracle_nonlocal(xi: f64) -> Result<OracleValue> {
    if !xi.is_finite() {
        return Err(Error::invalid("xi", format!("must be finite, got {xi}")));
    }
    if xi == 0.0 {
        return Ok(OracleValue {
            value: Complex64::new(0.0, 0.0),
            error: 0.0,
        });
    }
    let w = 2.0 * PI * xi.abs();
    let delta = 1e-3 / w;
    let period = 2.0 * PI / w;
    let z_cut = 64.0 * period;

    let mut breaks = vec![delta];
    let mut r = 2.0 * delta;
    while r < period {
        breaks.push(r);
        r *= 2.0;
    }
    breaks.extend((1..=64).map(|m| m as f64 * period));

    let scale = w.powf(4.0 / 3.0).max(1.0);
    let tol = Tolerance {
        abs: 1e-13 * scale,
        rel: 0.0,
        max_panels: 2000,
    };

    let re_mid = integrate_pieces(
        |r| {
            let s = (0.5 * w * r).sin();
            -2.0 * s * s * r.powf(-7.0 / 3.0)
        },
        &breaks,
        tol,
    )?;
    let im_mid = integrate_pieces(|r| wr_minus_sin(w * r) * r.powf(-7.0 / 3.0), &breaks, tol)?;

    let d = delta;
    let re_inner = -(w * w / 2.0) * 1.5 * d.powf(2.0 / 3.0) + (w.powi(4) / 24.0) * (3.0 / 8.0) * d.powf(8.0 / 3.0)
        - (w.powi(6) / 720.0) * (3.0 / 14.0) * d.powf(14.0 / 3.0);
    let im_inner = (w.powi(3) / 6.0) * 0.6 * d.powf(5.0 / 3.0)
        - (w.powi(5) / 120.0) * (3.0 / 11.0) * d.powf(11.0 / 3.0)
        + (w.powi(7) / 5040.0) * (3.0 / 17.0) * d.powf(17.0 / 3.0);

    let (ic, is) = oscillatory_tail(w, z_cut, 7.0 / 3.0);
    let re_tail = ic - 0.75 * z_cut.powf(-4.0 / 3.0);
    let im_tail = 3.0 * w * z_cut.powf(-1.0 / 3.0) - is;

    let re = C_I * (re_inner + re_mid.value + re_tail);
    let im = C_I * xi.signum() * (im_inner + im_mid.value + im_tail);
    Ok(OracleValue {
        value: Complex64::new(re, im),
        error: C_I * re_mid.error.max(im_mid.error),
    })
}

/// `x − sin x`, without cancellation for small `x`.
fn wr_minus_sin(x: f64) -> f64 {
    if x.abs() < 0.5 {
        let x2 = x * x;
        // x³/3! − x⁵/5! + x⁷/7! − x⁹/9! + x¹¹/11! − x¹³/13!
        x * x2
            * (1.0 / 6.0
                - x2 * (1.0 / 120.0
                    - x2 * (1.0 / 5040.0 - x2 * (1.0 / 362_880.0 - x2 * (1.0 / 39_916_800.0 - x2 / 6_227_020_800.0)))))
    } else {
        x - x.sin()
    }
}

/// `(∫_Z^∞ cos(wr) r^{−p} dr, ∫_Z^∞ sin(wr) r^{−p} dr)` by repeated
/// integration by parts. Each level gains a factor `~p/(wZ)`; callers use
/// `wZ` in the hundreds, where eight levels reach roundoff.
pub(crate) fn oscillatory_tail(w: f64, z: f64, p: f64) -> (f64, f64) {
    fn level(w: f64, z: f64, p: f64, depth: u32) -> (f64, f64) {
        let (s, c) = (w * z).sin_cos();
        let zp = z.powf(-p) / w;
        if depth == 0 {
            return (-s * zp, c * zp);
        }
        let (ic1, is1) = level(w, z, p + 1.0, depth - 1);
        (-s * zp + p / w * is1, c * zp - p / w * ic1)
    }
    level(w, z, p, 8)
}

/// Numerical value of `∫_0^1 (1 − τ) τ^{−2/3} dτ`, which must equal `1/C_I = 9/4`.
///
/// The substitution `τ = s³` removes the endpoint singularity.
pub fn taylor_reduction_constant() -> Result<QuadResult> {
    integrate(|s| 3.0 * (1.0 - s * s * s), 0.0, 1.0, Tolerance::default())
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleSample {
    pub xi: f64,
    pub nonlocal: Complex64,
    pub error: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CandidateResidual {
    pub constants: SymbolConstants,
    /// `max_ξ |closed(ξ) − oracle(ξ)| / |oracle(ξ)|` over the sample set.
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Adjudication {
    pub samples: Vec<OracleSample>,
    /// Least-squares fit of `a`, `b` to the oracle samples.
    pub fitted_a: f64,
    pub fitted_b: f64,
    pub candidates: Vec<CandidateResidual>,
    pub selected: Option<SymbolConstants>,
}

/// Oracle samples at `±ξ` for every `ξ` in [`ADJUDICATION_FREQUENCIES`].
pub fn oracle_samples() -> Result<Vec<OracleSample>> {
    ADJUDICATION_FREQUENCIES
        .iter()
        .flat_map(|&x| [x, -x])
        .map(|xi| {
            let o = psi_oracle_nonlocal(xi)?;
            Ok(OracleSample {
                xi,
                nonlocal: o.value,
                error: o.error,
            })
        })
        .collect()
}

/// Compare `candidates` with the oracle. `selected` is set only when exactly
/// one candidate has residual ≤ [`ACCEPT_RESIDUAL`].
pub fn adjudicate(candidates: &[SymbolConstants]) -> Result<Adjudication> {
    let samples = oracle_samples()?;
    let (mut num_a, mut num_b, mut den) = (0.0, 0.0, 0.0);
    for s in &samples {
        let m = s.xi.abs().powf(4.0 / 3.0);
        num_a += -s.nonlocal.re * m;
        num_b += s.nonlocal.im * s.xi.signum() * m;
        den += m * m;
    }
    let candidates: Vec<CandidateResidual> = candidates
        .iter()
        .map(|c| {
            let residual = samples
                .iter()
                .map(|s| (c.nonlocal(s.xi) - s.nonlocal).norm() / s.nonlocal.norm())
                .fold(0.0, f64::max);
            CandidateResidual {
                constants: c.clone(),
                residual,
            }
        })
        .collect();
    let accepted: Vec<&CandidateResidual> = candidates.iter().filter(|c| c.residual <= ACCEPT_RESIDUAL).collect();
    let selected = match accepted.as_slice() {
        [one] => Some(one.constants.clone()),
        _ => None,
    };
    Ok(Adjudication {
        samples,
        fitted_a: num_a / den,
        fitted_b: num_b / den,
        candidates,
        selected,
    })
}

/// Constants selected by the oracle among [`SymbolConstants::candidates`];
/// computed once per process.
pub fn canonical_constants() -> Result<SymbolConstants> {
    static CANONICAL: OnceLock<std::result::Result<SymbolConstants, String>> = OnceLock::new();
    CANONICAL
        .get_or_init(|| {
            let adj = adjudicate(&SymbolConstants::candidates()).map_err(|e| e.to_string())?;
            adj.selected.ok_or_else(|| {
                let r: Vec<String> = adj
                    .candidates
                    .iter()
                    .map(|c| format!("{}: {:.3e}", c.constants.name, c.residual))
                    .collect();
                r.join(", ")
            })
        })
        .clone()
        .map_err(Error::Adjudication)
}

/// `−min_ξ Re ψ(ξ)`. The minimum of `4π²εξ² − aξ^{4/3}` sits at
/// `ξ^{2/3} = a/(6π²ε)`, giving `a³/(108π⁴ε²)`.
pub fn omega0_closed(a: f64, viscosity: f64) -> f64 {
    if a <= 0.0 {
        return 0.0;
    }
    a.powi(3) / (108.0 * PI.powi(4) * viscosity * viscosity)
}

/// Frequency of the minimum of `Re ψ` on `ξ > 0`.
pub fn most_unstable_frequency(a: f64, viscosity: f64) -> f64 {
    (a.max(0.0) / (6.0 * PI * PI * viscosity)).powf(1.5)
}

/// The single positive root of `Re ψ`: `a^{3/2} / (8π³ ε^{3/2})`.
pub fn sign_change_frequency(a: f64, viscosity: f64) -> f64 {
    (a.max(0.0) / (4.0 * PI * PI * viscosity)).powf(1.5)
}

/// `ψ` sampled on a grid, with its constants and growth bound.
#[derive(Clone, Debug)]
pub struct SymbolTable {
    grid: Grid,
    viscosity: f64,
    constants: SymbolConstants,
    psi: Vec<Complex64>,
    omega0: f64,
}

impl SymbolTable {
    /// Table with the oracle-selected constants.
    pub fn new(grid: Grid, viscosity: f64) -> Result<Self> {
        Self::with_constants(grid, viscosity, canonical_constants()?)
    }

    pub fn with_constants(grid: Grid, viscosity: f64, constants: SymbolConstants) -> Result<Self> {
        if !(viscosity.is_finite() && viscosity > 0.0) {
            return Err(Error::invalid("viscosity", format!("must be > 0, got {viscosity}")));
        }
        if !(constants.a >= 0.0 && constants.b.is_finite() && constants.a.is_finite()) {
            return Err(Error::invalid(
                "constants",
                format!("need finite a >= 0, got {constants:?}"),
            ));
        }
        let nyq = grid.nyquist_index();
        let psi = (0..grid.points())
            .map(|i| {
                let p = psi_closed(grid.frequency(i), &constants, viscosity);
                // The Nyquist mode has no partner; keep it real.
                if i == nyq {
                    Complex64::new(p.re, 0.0)
                } else {
                    p
                }
            })
            .collect();
        let omega0 = omega0_closed(constants.a, viscosity);
        Ok(SymbolTable {
            grid,
            viscosity,
            constants,
            psi,
            omega0,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn psi(&self) -> &[Complex64] {
        &self.psi
    }

    pub fn a(&self) -> f64 {
        self.constants.a
    }

    pub fn b(&self) -> f64 {
        self.constants.b
    }

    pub fn c_i(&self) -> f64 {
        C_I
    }

    pub fn viscosity(&self) -> f64 {
        self.viscosity
    }

    pub fn constants(&self) -> &SymbolConstants {
        &self.constants
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    /// Multiplier of `I` alone: `ψ − 4π²εξ²` (real at Nyquist).
    pub fn nonlocal_multiplier(&self) -> Vec<Complex64> {
        self.psi
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let xi = self.grid.frequency(i);
                p - 4.0 * PI * PI * self.viscosity * xi * xi
            })
            .collect()
    }
}
