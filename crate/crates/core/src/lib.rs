//! Numerics for the nonlocal dune equation
//!
//! ```text
//! u_t + (u²/2)_x + I[u] − ε u_xx = 0,    I[u](x) = ∫_0^∞ ζ^{−1/3} u_xx(x − ζ) dζ.
//! ```
//!
//! The crate is layered bottom-up: [`grid`] (periodic grids and the Fourier
//! pair), [`symbol`] (the multiplier `ψ` and its constants), [`nonlocal`]
//! (three routes to `I`), [`kernel`] (`K(t) = F⁻¹ e^{−tψ}`), the two solvers
//! [`spectral`] and [`fd`], and [`erosion`].

pub mod erosion;
pub mod error;
pub mod fd;
pub mod grid;
pub mod kernel;
#[allow(non_snake_case)]
pub mod nonlocal;
pub mod presets;
pub mod quadrature;
pub mod special;
pub mod spectral;
pub mod symbol;

pub use error::{Error, Result};
pub use grid::{forward, inverse, Field, Grid, Spectrum};
pub use symbol::{SymbolConstants, SymbolTable};
