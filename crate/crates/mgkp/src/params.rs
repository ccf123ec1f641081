//! Equation coefficients, scaling normalization, and structural queries.
//!
//! The governing wave equation in potential form, before scaling, is
//!
//! ```text
//!   w_tx + α w_x^{2q} w_xx + ε w_x^q w_xy + κ w_x^{q−1} w_y w_xx
//!        + β w_xxxx + γ w_yy = 0,            q = p/2 > 0.
//! ```
//!
//! A scaling of (t, x, y, w) fixes three of the five coefficients so that
//! |α′| = |γ′| = β′ = 1, leaving the canonical parameter set
//! [`ScaledParams`] (σ₁, σ₂, a, b, q) with a ← transformed κ and
//! b ← transformed ε. All other modules consume only [`ScaledParams`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::JetPoint;
use crate::rational::HalfInt;

/// Raw coefficients of the unscaled equation.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RawCoefficients {
    pub alpha: f64,
    pub epsilon: f64,
    pub kappa: f64,
    pub beta: f64,
    pub gamma: f64,
    /// Nonlinearity power p ≥ 1 (q = p/2).
    pub p: u32,
}

/// Canonical parameters of the scaled equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledParams {
    /// Sign of the leading nonlinearity: +1 focussing, −1 defocussing.
    pub sigma1: i8,
    /// Sign of the transverse dispersion: +1 normal, −1 sign-changing.
    pub sigma2: i8,
    /// Coefficient of the nonlocal transverse term (w_x^{q−1} w_y w_xx).
    pub a: f64,
    /// Coefficient of the local transverse term (w_x^q w_xy).
    pub b: f64,
    /// Nonlinearity power, exactly rational (integer or half-integer).
    pub q: HalfInt,
}

impl ScaledParams {
    /// Construct with validation of the sign fields and q > 0.
    pub fn new(sigma1: i8, sigma2: i8, a: f64, b: f64, q: HalfInt) -> Result<Self> {
        if sigma1.abs() != 1 || sigma2.abs() != 1 {
            return Err(Error::InvalidParams(format!(
                "sigma1, sigma2 must be ±1, got ({sigma1}, {sigma2})"
            )));
        }
        if !q.is_positive() {
            return Err(Error::InvalidParams(format!("q must be positive, got {q}")));
        }
        Ok(ScaledParams {
            sigma1,
            sigma2,
            a,
            b,
            q,
        })
    }

    /// Like [`ScaledParams::new`] but allowing q ≤ 0; used only by the
    /// conservation-law identity checker, which must evaluate one family
    /// stated at q = −2 (outside the equation's own domain).
    pub fn new_unchecked_q(sigma1: i8, sigma2: i8, a: f64, b: f64, q: HalfInt) -> Result<Self> {
        if sigma1.abs() != 1 || sigma2.abs() != 1 {
            return Err(Error::InvalidParams(format!(
                "sigma1, sigma2 must be ±1, got ({sigma1}, {sigma2})"
            )));
        }
        Ok(ScaledParams {
            sigma1,
            sigma2,
            a,
            b,
            q,
        })
    }

    pub fn s1(&self) -> f64 {
        f64::from(self.sigma1)
    }
    pub fn s2(&self) -> f64 {
        f64::from(self.sigma2)
    }
    pub fn qf(&self) -> f64 {
        self.q.as_f64()
    }
}

/// The (t, x, y, w) scale factors of a normalization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingTransform {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    pub lambda4: f64,
}

impl ScalingTransform {
    pub const IDENTITY: ScalingTransform = ScalingTransform {
        lambda1: 1.0,
        lambda2: 1.0,
        lambda3: 1.0,
        lambda4: 1.0,
    };

    /// Apply the transform to raw coefficients (the forward coefficient
    /// transformation law). Used by tests to confirm round trips.
    pub fn apply(&self, raw: &RawCoefficients) -> RawCoefficients {
        let q = f64::from(raw.p) / 2.0;
        let (l1, l2, l3, l4) = (self.lambda1, self.lambda2, self.lambda3, self.lambda4);
        RawCoefficients {
            alpha: l1 * l4.powf(2.0 * q) * l2.powf(-(2.0 * q + 1.0)) * raw.alpha,
            epsilon: l1 * l4.powf(q) * l2.powf(-q) / l3 * raw.epsilon,
            kappa: l1 * l4.powf(q) * l2.powf(-q) / l3 * raw.kappa,
            beta: l1 * l2.powi(-3) * raw.beta,
            gamma: l1 * l2 * l3.powi(-2) * raw.gamma,
            p: raw.p,
        }
    }
}

/// Normalize raw coefficients to the canonical form |α′| = |γ′| = β′ = 1.
///
/// Convention (deterministic): λ₂ = sgn β (x-reflection makes β′ = +1),
/// λ₁ = 1/|β|, λ₃ = √|γ/β| > 0, λ₄ = |β/α|^{1/(2q)} > 0. The sign of α
/// is never flipped.
pub fn normalize(raw: &RawCoefficients) -> Result<(ScaledParams, ScalingTransform)> {
    if raw.beta == 0.0 || raw.gamma == 0.0 || raw.alpha == 0.0 {
        return Err(Error::InvalidParams(
            "alpha, beta, gamma must all be nonzero".into(),
        ));
    }
    if raw.p == 0 {
        return Err(Error::InvalidParams("p must be >= 1".into()));
    }
    let q = HalfInt::new(raw.p as i32, 2)?;
    // Half-integer q puts square roots of w_x into the ε/κ terms, which
    // requires a positivity-preserving scaling; a negative leading
    // coefficient cannot then be accommodated.
    if q.is_half_integer() && raw.alpha < 0.0 && (raw.epsilon != 0.0 || raw.kappa != 0.0) {
        return Err(Error::InvalidParams(
            "half-integer q with alpha < 0 and a transverse nonlinearity \
             cannot be normalized (fractional powers require lambda4 > 0)"
                .into(),
        ));
    }
    let qf = q.as_f64();
    let lambda2 = raw.beta.signum();
    let lambda1 = 1.0 / raw.beta.abs();
    let lambda3 = (raw.gamma / raw.beta).abs().sqrt();
    let lambda4 = (raw.beta / raw.alpha).abs().powf(1.0 / (2.0 * qf));
    let transform = ScalingTransform {
        lambda1,
        lambda2,
        lambda3,
        lambda4,
    };
    let scaled = transform.apply(raw);
    let sigma1 = if scaled.alpha >= 0.0 { 1 } else { -1 };
    let sigma2 = if scaled.gamma >= 0.0 { 1 } else { -1 };
    let params = ScaledParams::new(sigma1, sigma2, scaled.kappa, scaled.epsilon, q)?;
    Ok((params, transform))
}

/// True iff the equation has a local Lagrangian in terms of the potential:
/// the exact condition is a = b·q/2 (checked to absolute tolerance 1e−12
/// to absorb representation error of floating inputs).
pub fn is_variational(sp: &ScaledParams) -> bool {
    (sp.a - 0.5 * sp.b * sp.qf()).abs() <= 1e-12
}

/// Lagrangian density
/// L = −½w_t w_x − σ₁ w_x^{2q+2}/((2q+2)(2q+1)) − b w_x^{q+1} w_y/(2q+2)
///     − ½σ₂ w_y² + ½ w_xx².
pub fn lagrangian_density(sp: &ScaledParams, jet: &JetPoint) -> Result<f64> {
    if !is_variational(sp) {
        return Err(Error::InvalidParams(format!(
            "no local Lagrangian: requires a = b*q/2, got a={}, b*q/2={}",
            sp.a,
            0.5 * sp.b * sp.qf()
        )));
    }
    let q = sp.qf();
    let wt = jet.wt()?;
    let wx = jet.wx()?;
    let wy = jet.wy()?;
    let wxx = jet.wxx()?;
    Ok(-0.5 * wt * wx
        - sp.s1() * crate::powf_checked(wx, 2.0 * q + 2.0)? / ((2.0 * q + 2.0) * (2.0 * q + 1.0))
        - sp.b * crate::powf_checked(wx, q + 1.0)? * wy / (2.0 * q + 2.0)
        - 0.5 * sp.s2() * wy * wy
        + 0.5 * wxx * wxx)
}

/// Hamiltonian density of the variational case, in potential variables
/// (u = w_x, ∂ₓ⁻¹u_y = w_y, u_x = w_xx):
/// ½u_x² − ½σ₂(∂ₓ⁻¹u_y)² − b u^{q+1}∂ₓ⁻¹u_y/(2(q+1)) − σ₁u^{2q+2}/(2(q+1)(2q+1)).
pub fn hamiltonian_density(sp: &ScaledParams, jet: &JetPoint) -> Result<f64> {
    if !is_variational(sp) {
        return Err(Error::InvalidParams(
            "no Hamiltonian structure: requires a = b*q/2".into(),
        ));
    }
    let q = sp.qf();
    let wx = jet.wx()?;
    let wy = jet.wy()?;
    let wxx = jet.wxx()?;
    Ok(0.5 * wxx * wxx
        - 0.5 * sp.s2() * wy * wy
        - sp.b * crate::powf_checked(wx, q + 1.0)? * wy / (2.0 * (q + 1.0))
        - sp.s1() * crate::powf_checked(wx, 2.0 * q + 2.0)? / (2.0 * (q + 1.0) * (2.0 * q + 1.0)))
}

/// Dispersion relation of the linearized equation and its x-group-velocity:
/// ω = −k₁³ + σ₂k₂²/k₁ and ∂ω/∂k₁ = −(3k₁² + σ₂k₂²/k₁²), returned exactly
/// as printed (which coincides with the analytic derivative of ω).
pub fn dispersion(sp: &ScaledParams, k1: f64, k2: f64) -> Result<(f64, f64)> {
    if k1 == 0.0 {
        return Err(Error::InvalidParams(
            "k1 = 0: the nonlocal operator is singular there".into(),
        ));
    }
    let s2 = sp.s2();
    let omega = -k1.powi(3) + s2 * k2 * k2 / k1;
    let group_velocity_x = -(3.0 * k1 * k1 + s2 * k2 * k2 / (k1 * k1));
    Ok((omega, group_velocity_x))
}

/// Recognized special cases of the scaled equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpecialCase {
    Kp,
    MKp,
    /// mKP after the analytic continuation y → iy, u → iu (σ₁σ₂ = −1).
    MKpContinued,
    GKp,
    Generic,
}

/// Classify the parameter set against the named special cases.
pub fn detect_special_case(sp: &ScaledParams) -> SpecialCase {
    let a_sq_is_2 = (sp.a * sp.a - 2.0).abs() <= 1e-12;
    if sp.q.eq_ratio(1, 2) && sp.a == 0.0 && sp.b == 0.0 && sp.sigma1 == 1 {
        SpecialCase::Kp
    } else if sp.q.eq_int(1) && a_sq_is_2 && sp.b == 0.0 && sp.sigma1 == -1 && sp.sigma2 == 1 {
        SpecialCase::MKp
    } else if sp.q.eq_int(1) && a_sq_is_2 && sp.b == 0.0 && sp.sigma1 * sp.sigma2 == -1 {
        SpecialCase::MKpContinued
    } else if sp.a == 0.0 && sp.b == 0.0 {
        SpecialCase::GKp
    } else {
        SpecialCase::Generic
    }
}

/// The conserved quantity whose scaling weight is requested.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalingKind {
    Momentum,
    EnergyVar,
    EnergyNonVar,
}

/// Exact rational scaling weight (numerator, denominator) of a conserved
/// quantity under the equation's scaling symmetry:
/// momentum → 3 − 2/q, variational energy → 1 − 2/q, non-variational
/// energy (q = 1 only) → −1.
///
/// q is passed as a general exact rational `q_num/q_den` (the criticality
/// table quotes critical powers such as q = 2/3 that are not themselves
/// half-integers); the arithmetic is integer-exact throughout.
pub fn scaling_weight(kind: ScalingKind, q_num: i64, q_den: i64) -> Result<(i64, i64)> {
    if q_den == 0 || q_num * q_den <= 0 {
        return Err(Error::InvalidParams(format!(
            "q must be positive, got {q_num}/{q_den}"
        )));
    }
    let (n, d) = if q_den < 0 { (-q_num, -q_den) } else { (q_num, q_den) };
    let reduced = |num: i64, den: i64| -> (i64, i64) {
        let g = gcd(num.unsigned_abs(), den.unsigned_abs()) as i64;
        let sign = if den < 0 { -1 } else { 1 };
        (sign * num / g, sign * den / g)
    };
    match kind {
        ScalingKind::Momentum => Ok(reduced(3 * n - 2 * d, n)),
        ScalingKind::EnergyVar => Ok(reduced(n - 2 * d, n)),
        ScalingKind::EnergyNonVar => {
            if n != d {
                return Err(Error::InvalidParams(
                    "non-variational energy exists only for q = 1".into(),
                ));
            }
            Ok((-1, 1))
        }
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a.max(1)
}
