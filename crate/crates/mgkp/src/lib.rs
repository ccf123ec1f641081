//! Numerical toolkit for a modified gKP-type wave equation
//! (2+1-dimensional, p-power nonlinearity, two transverse terms):
//! exact line-soliton/line-shock construction and verification, kinematic
//! admissibility regions, off-shell verification of all fifteen low-order
//! conservation laws, and a 2D Fourier pseudo-spectral time evolution used
//! as an independent cross-check.
//!
//! The scaled potential equation handled throughout is
//!
//! ```text
//!   w_tx + (σ₁ w_x^{2q} + a w_x^{q−1} w_y) w_xx + b w_x^q w_xy
//!        + w_xxxx + σ₂ w_yy = 0,    σ₁, σ₂ = ±1,  q > 0,
//! ```
//!
//! equivalently, with u = w_x,
//!
//! ```text
//!   u_t + (σ₁ u^{2q} + a u^{q−1} ∂ₓ⁻¹u_y) u_x + b u^q u_y
//!       + u_xxx + σ₂ ∂ₓ⁻¹u_yy = 0.
//! ```
//!
//! Module map:
//! - [`params`]: coefficients, scaling normalization, structural queries.
//! - [`jet`] / [`analytic`]: jet points and exact closed-form test fields.
//! - [`wave`]: travelling-wave reduction, solution families, evaluation.
//! - [`kinematics`]: (speed, angle) admissibility regions and constructors.
//! - [`conservation`]: the fifteen multipliers and density/flux triples,
//!   off-shell identity checking, conserved integrals, charges, constraints.
//! - [`field2d`] / [`solver`]: periodic grids, spectral operators, and the
//!   integrating-factor RK4 evolution.

pub mod analytic;
pub mod conservation;
pub mod error;
pub mod field2d;
pub mod jet;
pub mod kinematics;
pub mod params;
pub mod rational;
pub mod solver;
pub mod wave;

pub use error::{Error, Result};

/// `base^exponent` for real exponents, refusing negative bases with
/// non-integer exponents (which would be NaN or complex) rather than
/// silently propagating NaN. Integer exponents are detected exactly
/// (all exponents in this crate derive from half-integer q).
pub fn powf_checked(base: f64, exponent: f64) -> Result<f64> {
    if base >= 0.0 {
        return Ok(base.powf(exponent));
    }
    let rounded = exponent.round();
    if (exponent - rounded).abs() < 1e-9 {
        let e = rounded as i64;
        let mag = base.abs().powf(exponent);
        Ok(if e % 2 == 0 { mag } else { -mag })
    } else {
        Err(Error::NumericAbort(format!(
            "fractional power {exponent} of negative base {base}"
        )))
    }
}
