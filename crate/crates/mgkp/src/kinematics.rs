//! Kinematics of line-solitons and line-shocks in speed–angle form.
//!
//! A travelling wave with frame parameters (μ, ν) propagates along the
//! direction θ = arctan μ at speed c = ν/√(1+μ²). The admissibility
//! conditions on the oscillator constants translate into conditions on
//! (c, θ):
//!
//! - A > 0 ⇔ c > c_min(θ) = σ₂ sin²θ/cosθ (all solitary waves);
//! - Δ > 0 (defocussing, σ₁ = −1) ⇔ c < c_max(θ) = (σ₂ + k²) sin²θ/cosθ;
//! - C > 0 ⇔ sgn θ = sgn k (required by the even-q and half-integer-q
//!   defocussing families), with k the coupling constant `kcoef`;
//! - shocks live exactly on the curve c = (σ₂ + k²) sin²θ/cosθ, σ₁ = −1.
//!
//! For a fixed speed the angular window is expressed through
//! ϑ(c) = arctan√(½c(√(c²+4)+c)), the inverse of c_min on θ ≥ 0.
//!
//! Besides region queries, this module evaluates the speed–angle
//! *closed forms* of the solutions (numerator/denominator written directly
//! in c and θ with the sign tables). These are implemented independently of
//! the (μ, ν) construction in [`crate::wave`] so the two routes can be
//! cross-checked against each other; they are intentionally not derived
//! from one another.
//!
//! θ = ±π/2 (pure-y propagation) is excluded from every numeric path:
//! although it belongs to the nominal angular domain, every closed form
//! here divides by cosθ.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::ScaledParams;
use crate::powf_checked;
use crate::wave::{
    self, construct, kcoef, reduced_constants, BranchSelect, LineWaveSolution, SolutionKind,
    WaveFrame,
};

/// Relative tolerance for membership on the shock curve in (c, θ): the
/// curve has measure zero, so an exact floating-point test is unusable.
pub const SHOCK_CURVE_RTOL: f64 = 1e-8;

/// Bisection tolerance (in c) for region-boundary refinement.
pub const BOUNDARY_BISECTION_TOL: f64 = 1e-10;

fn check_theta(theta: f64) -> Result<()> {
    if !theta.is_finite() || theta.abs() >= std::f64::consts::FRAC_PI_2 {
        return Err(Error::InvalidParams(format!(
            "direction angle must satisfy |theta| < pi/2, got {theta}"
        )));
    }
    Ok(())
}

/// ϑ(c) = arctan√(½c(√(c²+4)+c)) for c ≥ 0: the angle at which the
/// minimum-speed curve reaches speed c. Strictly increasing, ϑ(0) = 0.
pub fn vartheta(c: f64) -> Result<f64> {
    if !(c >= 0.0) {
        return Err(Error::InvalidParams(format!(
            "vartheta is defined for c >= 0, got {c}"
        )));
    }
    Ok((0.5 * c * ((c * c + 4.0).sqrt() + c)).sqrt().atan())
}

/// sin²θ/cosθ, the shape factor of every kinematic bound.
fn angle_factor(theta: f64) -> f64 {
    theta.sin() * theta.sin() / theta.cos()
}

/// Kinematic speed bounds at a fixed angle.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SpeedBounds {
    /// c_min = σ₂ sin²θ/cosθ (A > 0 below fails).
    pub c_min: f64,
    /// c_max = (σ₂ + k²) sin²θ/cosθ, present only in the defocussing case.
    pub c_max: Option<f64>,
}

/// Speed bounds for solitary waves at angle θ.
pub fn speed_bounds(sp: &ScaledParams, theta: f64) -> Result<SpeedBounds> {
    check_theta(theta)?;
    let f = angle_factor(theta);
    let c_min = sp.s2() * f;
    let c_max = if sp.sigma1 < 0 {
        let k = kcoef(sp);
        Some((sp.s2() + k * k) * f)
    } else {
        None
    };
    Ok(SpeedBounds { c_min, c_max })
}

/// The shock curve c(θ) = (σ₂ + k²) sin²θ/cosθ (σ₁ = −1 only).
pub fn shock_curve_speed(sp: &ScaledParams, theta: f64) -> Result<f64> {
    check_theta(theta)?;
    if sp.sigma1 >= 0 {
        return Err(Error::Inadmissible(
            "line-shocks exist only in the defocussing case (sigma1 = -1)".into(),
        ));
    }
    let k = kcoef(sp);
    Ok((sp.s2() + k * k) * angle_factor(theta))
}

/// The shock curve with k² given directly: c(θ) = (σ₂ + k²) sin²θ/cosθ.
///
/// Realizing a target k² through (a, b) rounds twice (k is irrational in
/// a + b for most targets); taking k² as the input keeps distinguished
/// values exact — in particular the stationary case σ₂ = −1, k² = 1 gives
/// c(θ) = 0 with no roundoff.
pub fn shock_curve_speed_k2(sigma2: i8, k2: f64, theta: f64) -> Result<f64> {
    check_theta(theta)?;
    if !(k2 >= 0.0) {
        return Err(Error::InvalidParams(format!(
            "k^2 must be nonnegative, got {k2}"
        )));
    }
    Ok((f64::from(sigma2) + k2) * angle_factor(theta))
}

/// A speed–angle query.
#[derive(Debug, Clone, Copy)]
pub struct KinematicQuery {
    pub c: f64,
    pub theta: f64,
}

/// Families admitted at one (c, θ) point, with the binding bounds.
#[derive(Debug, Clone, Serialize)]
pub struct AdmissibilityResult {
    pub c_min: f64,
    pub c_max: Option<f64>,
    /// The shock-curve speed at this angle (defocussing only).
    pub shock_c: Option<f64>,
    /// Solitary-wave families admitted strictly inside the bounds.
    pub soliton_kinds: Vec<SolutionKind>,
    /// Shock families admitted on the curve (within [`SHOCK_CURVE_RTOL`]).
    pub shock_kinds: Vec<SolutionKind>,
    /// Required sign of θ (= sgn kcoef) when the admitted defocussing
    /// family demands C > 0; None when no sign constraint applies.
    pub theta_sign_constraint: Option<i8>,
}

/// Classify the families available at (c, θ).
pub fn admissible(sp: &ScaledParams, query: &KinematicQuery) -> Result<AdmissibilityResult> {
    check_theta(query.theta)?;
    let bounds = speed_bounds(sp, query.theta)?;
    let k = kcoef(sp);
    let shock_c = if sp.sigma1 < 0 {
        Some((sp.s2() + k * k) * angle_factor(query.theta))
    } else {
        None
    };

    let on_curve = shock_c
        .map(|sc| (query.c - sc).abs() <= SHOCK_CURVE_RTOL * (1.0 + query.c.abs()))
        .unwrap_or(false);

    let mut soliton_kinds = Vec::new();
    let mut shock_kinds = Vec::new();
    if on_curve && query.theta != 0.0 {
        let sgn_match = query.theta.signum() == k.signum();
        let q = sp.q;
        if q.is_half_integer() {
            if sgn_match {
                shock_kinds.push(SolutionKind::BrightShock);
            }
        } else if q.is_even_integer() {
            if sgn_match {
                shock_kinds.push(SolutionKind::SymmetricShockPair);
            }
        } else if k != 0.0 {
            shock_kinds.push(SolutionKind::SingleShock);
        }
    } else {
        let frame = WaveFrame::from_ctheta(query.c, query.theta)?;
        let rc = reduced_constants(sp, &frame);
        for kind in wave::classify(sp, &rc) {
            if kind.is_shock() {
                shock_kinds.push(kind);
            } else {
                soliton_kinds.push(kind);
            }
        }
    }

    let theta_sign_constraint = if sp.sigma1 < 0
        && k != 0.0
        && (sp.q.is_even_integer() || sp.q.is_half_integer())
    {
        Some(if k > 0.0 { 1 } else { -1 })
    } else {
        None
    };

    Ok(AdmissibilityResult {
        c_min: bounds.c_min,
        c_max: bounds.c_max,
        shock_c,
        soliton_kinds,
        shock_kinds,
        theta_sign_constraint,
    })
}

/// Rasterized admissibility over a (c, θ) window, with refined boundary
/// polylines (points where soliton admissibility flips, bisected in c to
/// [`BOUNDARY_BISECTION_TOL`]).
#[derive(Debug, Clone, Serialize)]
pub struct RegionGrid {
    /// Cell-center speeds (length = resolution.0).
    pub c_values: Vec<f64>,
    /// Cell-center angles (length = resolution.1).
    pub theta_values: Vec<f64>,
    /// Row-major [theta index][c index]: solitary wave admitted at center.
    pub admissible: Vec<Vec<bool>>,
    /// Boundary polylines as (theta, c) points; one polyline per flip index.
    pub boundaries: Vec<Vec<(f64, f64)>>,
}

/// Sample the admissible region on a uniform grid of cell centers.
pub fn sample_region(
    sp: &ScaledParams,
    c_range: (f64, f64),
    theta_range: (f64, f64),
    resolution: (usize, usize),
) -> Result<RegionGrid> {
    let (nc, nt) = resolution;
    if nc < 2 || nt < 2 {
        return Err(Error::InvalidParams(format!(
            "resolution must be at least 2x2, got {nc}x{nt}"
        )));
    }
    if !(c_range.0 < c_range.1) || !(theta_range.0 < theta_range.1) {
        return Err(Error::InvalidParams(
            "ranges must be finite nonempty intervals".into(),
        ));
    }
    check_theta(theta_range.0)?;
    check_theta(theta_range.1)?;

    let centers = |lo: f64, hi: f64, n: usize| -> Vec<f64> {
        let dx = (hi - lo) / n as f64;
        (0..n).map(|i| lo + dx * (i as f64 + 0.5)).collect()
    };
    let c_values = centers(c_range.0, c_range.1, nc);
    let theta_values = centers(theta_range.0, theta_range.1, nt);

    let soliton_ok = |c: f64, theta: f64| -> bool {
        admissible(sp, &KinematicQuery { c, theta })
            .map(|r| !r.soliton_kinds.is_empty())
            .unwrap_or(false)
    };

    let mut grid = Vec::with_capacity(nt);
    let mut boundaries: Vec<Vec<(f64, f64)>> = Vec::new();
    for &theta in &theta_values {
        let row: Vec<bool> = c_values.iter().map(|&c| soliton_ok(c, theta)).collect();
        // refine each admissibility flip between adjacent centers
        let mut flip_idx = 0usize;
        for i in 1..nc {
            if row[i] != row[i - 1] {
                let (mut lo, mut hi) = (c_values[i - 1], c_values[i]);
                let lo_state = row[i - 1];
                while hi - lo > BOUNDARY_BISECTION_TOL {
                    let mid = 0.5 * (lo + hi);
                    if soliton_ok(mid, theta) == lo_state {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                if boundaries.len() <= flip_idx {
                    boundaries.push(Vec::new());
                }
                boundaries[flip_idx].push((theta, 0.5 * (lo + hi)));
                flip_idx += 1;
            }
        }
        grid.push(row);
    }

    Ok(RegionGrid {
        c_values,
        theta_values,
        admissible: grid,
        boundaries,
    })
}

/// Build a solitary-wave solution directly from (c, θ).
///
/// θ = 0 is rejected (the speed–angle closed forms degenerate there; use
/// the (μ, ν) construction directly for straight waves). The result is the
/// (μ, ν)-constructed solution for μ = tanθ, ν = c/cosθ; the independent
/// speed–angle closed form is available via [`soliton_ctheta_closed_form`].
pub fn soliton_from_ctheta(
    sp: &ScaledParams,
    c: f64,
    theta: f64,
    kind: SolutionKind,
    branch: BranchSelect,
) -> Result<LineWaveSolution> {
    check_theta(theta)?;
    if theta == 0.0 {
        return Err(Error::InvalidParams(
            "theta = 0 is excluded from the speed-angle parameterization".into(),
        ));
    }
    let adm = admissible(sp, &KinematicQuery { c, theta })?;
    if !adm.soliton_kinds.contains(&kind) {
        return Err(Error::Inadmissible(format!(
            "{kind:?} not admitted at (c={c}, theta={theta}); admitted: {:?}",
            adm.soliton_kinds
        )));
    }
    let frame = WaveFrame::from_ctheta(c, theta)?;
    construct(sp, &frame, kind, branch)
}

/// Build the shock at angle θ (its speed is fixed by the shock curve).
pub fn shock_from_theta(
    sp: &ScaledParams,
    theta: f64,
    branch: BranchSelect,
) -> Result<LineWaveSolution> {
    check_theta(theta)?;
    if theta == 0.0 {
        return Err(Error::InvalidParams(
            "theta = 0 gives the zero shock; excluded".into(),
        ));
    }
    if sp.sigma1 >= 0 {
        return Err(Error::Inadmissible(
            "line-shocks exist only in the defocussing case (sigma1 = -1)".into(),
        ));
    }
    let mu = theta.tan();
    let k = kcoef(sp);
    // Δ = 0 exactly at ν = (σ₂ + k²)μ².
    let nu = (sp.s2() + k * k) * mu * mu;
    let frame = WaveFrame::new(mu, nu);
    let kind = if sp.q.is_half_integer() {
        SolutionKind::BrightShock
    } else if sp.q.is_even_integer() {
        SolutionKind::SymmetricShockPair
    } else {
        SolutionKind::SingleShock
    };
    construct(sp, &frame, kind, branch)
}

/// Validate the table signs (s, s̃) for the solitary-wave closed forms.
///
/// Focussing (σ₁ = 1): even q needs s̃ = sgn θ (s free); odd q needs
/// s̃ = s·sgn θ; half-integer q needs s = 1 and s̃ = sgn θ.
/// Defocussing (σ₁ = −1, s̃ unused): even q needs sgn θ = sgn k (s free);
/// odd q needs s = sgn(kθ); half-integer q needs s = 1 and sgn θ = sgn k.
pub fn validate_soliton_signs(sp: &ScaledParams, theta: f64, s: i8, s_tilde: i8) -> Result<()> {
    if s.abs() != 1 {
        return Err(Error::InvalidParams(format!("s must be ±1, got {s}")));
    }
    let sgn_theta: i8 = if theta > 0.0 { 1 } else { -1 };
    let k = kcoef(sp);
    let sgn_k: i8 = if k > 0.0 {
        1
    } else if k < 0.0 {
        -1
    } else {
        0
    };
    let fail = |msg: String| Err(Error::InvalidParams(msg));
    if sp.sigma1 > 0 {
        if sp.q.is_half_integer() {
            if s != 1 || s_tilde != sgn_theta {
                return fail(format!(
                    "half-integer q (focussing) requires s=1, s_tilde=sgn(theta)={sgn_theta}"
                ));
            }
        } else if sp.q.is_even_integer() {
            if s_tilde != sgn_theta {
                return fail(format!(
                    "even q (focussing) requires s_tilde=sgn(theta)={sgn_theta}"
                ));
            }
        } else if s_tilde != s * sgn_theta {
            return fail(format!(
                "odd q (focussing) requires s_tilde = s*sgn(theta) = {}",
                s * sgn_theta
            ));
        }
    } else {
        if sp.q.is_half_integer() {
            if s != 1 || sgn_theta != sgn_k {
                return fail("half-integer q (defocussing) requires s=1, sgn(theta)=sgn(k)".into());
            }
        } else if sp.q.is_even_integer() {
            if sgn_theta != sgn_k {
                return fail("even q (defocussing) requires sgn(theta)=sgn(k)".into());
            }
        } else if i32::from(s) != (sgn_k * sgn_theta) as i32 {
            return fail(format!(
                "odd q (defocussing) requires s = sgn(k*theta) = {}",
                sgn_k * sgn_theta
            ));
        }
    }
    Ok(())
}

/// Validate the table signs for the shock closed form: s = 1 always;
/// s̃ = ±1 for even q (pair member) else s̃ = 1; sgn θ = sgn k except for
/// odd q (where the sign of kθ sets the polarity instead).
pub fn validate_shock_signs(sp: &ScaledParams, theta: f64, s: i8, s_tilde: i8) -> Result<()> {
    if s != 1 {
        return Err(Error::InvalidParams("shock forms require s = 1".into()));
    }
    let k = kcoef(sp);
    let sgn_theta = if theta > 0.0 { 1.0 } else { -1.0 };
    if sp.q.is_even_integer() {
        if s_tilde.abs() != 1 {
            return Err(Error::InvalidParams("even q shocks require s_tilde = ±1".into()));
        }
        if sgn_theta != k.signum() {
            return Err(Error::InvalidParams(
                "even q shocks require sgn(theta) = sgn(k)".into(),
            ));
        }
    } else if sp.q.is_half_integer() {
        if s_tilde != 1 {
            return Err(Error::InvalidParams("half-integer q shocks require s_tilde = 1".into()));
        }
        if sgn_theta != k.signum() {
            return Err(Error::InvalidParams(
                "half-integer q shocks require sgn(theta) = sgn(k)".into(),
            ));
        }
    } else if s_tilde != 1 {
        return Err(Error::InvalidParams("odd q shocks require s_tilde = 1".into()));
    }
    Ok(())
}

/// Internal pieces shared by the four speed–angle solitary closed forms.
/// `growth` = (c − c_min)/|c_min| (> 0 inside the region) and `radicand`
/// is the case-dependent expression under the square root multiplying
/// cosh, written exactly as printed per (σ₁, σ₂) case.
fn ctheta_pieces(sp: &ScaledParams, c: f64, theta: f64) -> Result<(f64, f64, f64)> {
    check_theta(theta)?;
    if theta == 0.0 {
        return Err(Error::InvalidParams(
            "theta = 0 is excluded from the speed-angle parameterization".into(),
        ));
    }
    let f = angle_factor(theta); // = |c_min|
    let k = kcoef(sp);
    let growth = if sp.sigma2 > 0 { c / f - 1.0 } else { 1.0 + c / f };
    if !(growth > 0.0) {
        return Err(Error::Inadmissible(format!(
            "speed below the minimum at this angle (c={c}, c_min={})",
            sp.s2() * f
        )));
    }
    let radicand = if sp.sigma1 > 0 {
        // focussing: k² − 1 + c/c_min (σ₂=1) or k² + 1 + c/|c_min| (σ₂=−1),
        // both equal k² + growth.
        k * k + growth
    } else {
        let c_max = (sp.s2() + k * k) * f;
        if sp.sigma2 > 0 {
            (k * k + 1.0) * (1.0 - c / c_max)
        } else {
            (k * k - 1.0) * (1.0 - c / c_max)
        }
    };
    if radicand < 0.0 {
        return Err(Error::Inadmissible(format!(
            "speed beyond the maximum at this angle (c={c})"
        )));
    }
    Ok((growth, radicand, k))
}

/// The solitary-wave speed–angle closed form evaluated at phase ξ:
///
/// ```text
///   u = s·((q+1)(2q+1))^{1/2q}·(g·tan|θ|)^{1/q}
///       / (S + √R·cosh(q√g·tan|θ|·ξ))^{1/q},
/// ```
///
/// with g the speed excess (c/c_min − 1, resp. 1 + c/|c_min|), R the
/// case-dependent radicand, and S = s̃k (focussing) or |k| (defocussing).
/// This is an independent evaluation route from [`crate::wave::construct`];
/// the two must agree pointwise for admissible queries.
pub fn soliton_ctheta_closed_form(
    sp: &ScaledParams,
    c: f64,
    theta: f64,
    s: i8,
    s_tilde: i8,
    xi: f64,
) -> Result<f64> {
    validate_soliton_signs(sp, theta, s, s_tilde)?;
    let (growth, radicand, k) = ctheta_pieces(sp, c, theta)?;
    let q = sp.qf();
    let tan_abs = theta.tan().abs();
    let shift = if sp.sigma1 > 0 {
        f64::from(s_tilde) * k
    } else {
        k.abs()
    };
    let dcoef = radicand.sqrt();
    let arg = q * growth.sqrt() * tan_abs * xi;
    // log-domain for large phases (cosh would overflow near 710)
    let ln_bracket = if arg.abs() <= 30.0 {
        let bracket = shift + dcoef * arg.cosh();
        if !(bracket > 0.0) {
            return Err(Error::NumericAbort(format!(
                "nonpositive bracket {bracket} in the closed form"
            )));
        }
        bracket.ln()
    } else {
        let az = arg.abs();
        az + (dcoef / 2.0).ln()
            + ((2.0 * shift / dcoef) * (-az).exp() + (-2.0 * az).exp()).ln_1p()
    };
    let pref = ((q + 1.0) * (2.0 * q + 1.0)).powf(0.5 / q);
    let num = powf_checked(growth * tan_abs, 1.0 / q)?;
    Ok(f64::from(s) * pref * num * (-ln_bracket / q).exp())
}

/// Width from the speed–angle form: w = 1/(q·√g·tan|θ|). Symmetric under
/// θ → −θ at fixed speed.
pub fn soliton_width_ctheta(sp: &ScaledParams, c: f64, theta: f64) -> Result<f64> {
    let (growth, _, _) = ctheta_pieces(sp, c, theta)?;
    Ok(1.0 / (sp.qf() * growth.sqrt() * theta.tan().abs()))
}

/// Height from the speed–angle form:
/// focussing h = P^{1/2q}(|√(g+k²) − s̃k|·tan|θ|)^{1/q};
/// defocussing h = P^{1/2q}(|√R − |k||·tan|θ|)^{1/q}.
/// Asymmetric under θ → −θ in the focussing case when k ≠ 0 (s̃ flips).
pub fn soliton_height_ctheta(sp: &ScaledParams, c: f64, theta: f64, s_tilde: i8) -> Result<f64> {
    let (growth, radicand, k) = ctheta_pieces(sp, c, theta)?;
    let q = sp.qf();
    let inner = if sp.sigma1 > 0 {
        ((growth + k * k).sqrt() - f64::from(s_tilde) * k).abs()
    } else {
        (radicand.sqrt() - k.abs()).abs()
    };
    let pref = ((q + 1.0) * (2.0 * q + 1.0)).powf(0.5 / q);
    Ok(pref * (inner * theta.tan().abs()).powf(1.0 / q))
}

/// The shock speed–angle closed form at phase ξ:
///
/// ```text
///   u = s̃·((q+1)(2q+1))^{1/2q}·(s·k·tanθ)^{1/q}
///       / (1 + exp(q|k|·tan|θ|·ξ))^{1/q}.
/// ```
///
/// Note the orientation: this form decays as ξ → +∞, i.e. it is the
/// ξ → −ξ reflection of the (μ, ν)-constructed shock (both orientations
/// solve the reduction, whose first integral is even in ξ).
pub fn shock_ctheta_closed_form(
    sp: &ScaledParams,
    theta: f64,
    s: i8,
    s_tilde: i8,
    xi: f64,
) -> Result<f64> {
    if sp.sigma1 >= 0 {
        return Err(Error::Inadmissible(
            "line-shocks exist only in the defocussing case (sigma1 = -1)".into(),
        ));
    }
    check_theta(theta)?;
    if theta == 0.0 {
        return Err(Error::InvalidParams("theta = 0 gives the zero shock".into()));
    }
    validate_shock_signs(sp, theta, s, s_tilde)?;
    let q = sp.qf();
    let k = kcoef(sp);
    let pref = ((q + 1.0) * (2.0 * q + 1.0)).powf(0.5 / q);
    let num = powf_checked(f64::from(s) * k * theta.tan(), 1.0 / q)?;
    let arg = q * k.abs() * theta.tan().abs() * xi;
    // ln(1 + e^{arg}) = softplus(arg), overflow-safe.
    let ln_den = arg.max(0.0) + (-arg.abs()).exp().ln_1p();
    Ok(f64::from(s_tilde) * pref * num * (-ln_den / q).exp())
}

/// Shock width w = 1/(q|k|tan|θ|) from the angle alone.
pub fn shock_width_theta(sp: &ScaledParams, theta: f64) -> Result<f64> {
    check_theta(theta)?;
    let k = kcoef(sp);
    if k == 0.0 || theta == 0.0 {
        return Err(Error::Inadmissible(
            "shock width needs k != 0 and theta != 0".into(),
        ));
    }
    Ok(1.0 / (sp.qf() * k.abs() * theta.tan().abs()))
}

/// Shock height h = ((q+1)(2q+1))^{1/2q}·(|k|tan|θ|)^{1/q}.
pub fn shock_height_theta(sp: &ScaledParams, theta: f64) -> Result<f64> {
    check_theta(theta)?;
    let q = sp.qf();
    let k = kcoef(sp);
    let pref = ((q + 1.0) * (2.0 * q + 1.0)).powf(0.5 / q);
    Ok(pref * (k.abs() * theta.tan().abs()).powf(1.0 / q))
}
