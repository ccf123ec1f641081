//! Travelling-wave reduction: line-soliton and line-shock solutions.
//!
//! A line travelling wave `u = U(ξ)`, `ξ = x + μy − νt`, reduces the scaled
//! equation (in u-form, with the half-line antiderivative gauge giving
//! `∂ₓ⁻¹u_y = μU`) to the third-order ODE
//!
//! ```text
//!   (σ₂μ² − ν) U′ + (σ₁ U^{2q} + (a+b)μ U^q) U′ + U‴ = 0,
//! ```
//!
//! whose decaying first integral is the nonlinear oscillator
//!
//! ```text
//!   U′² + V(U) = 0,   V(U) = −A U² + B U^{2q+2} + 2C U^{q+2},
//!   A = ν − σ₂μ²,  B = σ₁/((q+1)(2q+1)),  C = (a+b)μ/((q+1)(q+2)),
//! ```
//!
//! with discriminant Δ = C² + AB. Solitary waves need A > 0 and a simple
//! nonzero root of V; shocks arise on the measure-zero set Δ = 0 where the
//! root is repeated (defocussing only, since Δ = 0 with A > 0 needs B < 0).
//! Every closed-form family below is the quadrature of this oscillator:
//!
//! - q even:  symmetric bright/dark pairs `±A^{1/q}/(C + √Δ cosh(q√A ξ))^{1/q}`
//!   (σ₁ = −1 additionally needs C > 0 and C²/|B| > A), and for Δ = 0 a
//!   symmetric pair of shocks `±A^{1/q}/(C(1+e^{−q√A ξ}))^{1/q}`.
//! - q odd:   a nonsymmetric bright/dark pair (σ₁ = 1, branch `C ± √Δ cosh`),
//!   or a single soliton/shock of polarity sgn C (σ₁ = −1).
//! - q half-integer: the odd-q forms restricted to the positive (bright)
//!   branch; all intermediate bases under the 1/q power must stay positive.
//!
//! The same solutions are re-parameterized by height h and width w
//! ([`profile_hw`], [`shock_profile_hw`]) with the conversion formulas back
//! to direction angle and speed ([`hw_to_angle_speed`],
//! [`shock_hw_to_angle_speed`]). The printed shock speed formula is
//! internally inconsistent (one term carries h^{2q}, the radical carries
//! h²); [`shock_hw_to_angle_speed`] therefore reports both the formula as
//! printed and an independently composed value (angle formula + kinematic
//! shock curve) together with a mismatch flag, rather than silently
//! correcting either one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ScaledParams;
use crate::powf_checked;
use crate::rational::HalfInt;

/// Default number of uniform ξ-samples for residual scans on [−10w, 10w].
pub const DEFAULT_RESIDUAL_SAMPLES: usize = 2001;

/// Relative tolerance on Δ below which parameters are classified as lying
/// on the shock curve (shocks occupy a measure-zero set; an exact test is
/// unusable in floating point).
pub const SHOCK_DELTA_RTOL: f64 = 1e-10;

/// Travelling-wave frame: `ξ = x + μy − νt`.
///
/// Geometrically the wave propagates along the unit vector
/// (cosθ, sinθ) with tanθ = μ, at speed c = ν/√(1+μ²).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveFrame {
    /// Transverse slope μ = tanθ.
    pub mu: f64,
    /// Phase-speed parameter ν (signed).
    pub nu: f64,
}

impl WaveFrame {
    pub fn new(mu: f64, nu: f64) -> Self {
        WaveFrame { mu, nu }
    }

    /// Direction angle θ = arctan μ ∈ (−π/2, π/2).
    pub fn theta(&self) -> f64 {
        self.mu.atan()
    }

    /// Propagation speed along the direction of motion, c = ν/√(1+μ²).
    pub fn speed(&self) -> f64 {
        self.nu / self.k_magnitude()
    }

    /// Wavevector magnitude |𝐤| = √(1+μ²) for 𝐤 = (1, μ).
    pub fn k_magnitude(&self) -> f64 {
        self.mu.hypot(1.0)
    }

    /// Frame from speed and direction angle: μ = tanθ, ν = c/cosθ.
    /// θ = ±π/2 is rejected: every closed form divides by cosθ.
    pub fn from_ctheta(c: f64, theta: f64) -> Result<Self> {
        if !theta.is_finite() || theta.abs() >= std::f64::consts::FRAC_PI_2 {
            return Err(Error::InvalidParams(format!(
                "direction angle must satisfy |theta| < pi/2, got {theta}"
            )));
        }
        Ok(WaveFrame {
            mu: theta.tan(),
            nu: c / theta.cos(),
        })
    }

    /// Phase ξ = x + μy − νt.
    pub fn xi(&self, t: f64, x: f64, y: f64) -> f64 {
        x + self.mu * y - self.nu * t
    }
}

/// Constants of the reduced oscillator and the derived kinematic constants.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ReducedConstants {
    /// A = ν − σ₂μ² (linear restoring coefficient; solitons need A > 0).
    pub cap_a: f64,
    /// B = σ₁/((q+1)(2q+1)).
    pub cap_b: f64,
    /// C = (a+b)μ/((q+1)(q+2)).
    pub cap_c: f64,
    /// Δ = C² + AB (root discriminant of V).
    pub delta: f64,
    /// kcoef = √(2q+1)·(a+b)/(√(q+1)·(q+2)); controls the kinematic bounds.
    /// (The source material reuses the letter k for both this constant and
    /// the wavevector (1, μ); here the wavevector lives in [`WaveFrame`]
    /// and `kcoef` always means this constant.)
    pub kcoef: f64,
    /// l² = (2q+1)(q+1)/q² (width–height bound for defocussing solitons).
    pub l2: f64,
    /// m² = (q+1)(q+2)/q².
    pub m2: f64,
}

/// Oscillator and kinematic constants for the given parameters and frame.
pub fn reduced_constants(sp: &ScaledParams, frame: &WaveFrame) -> ReducedConstants {
    let q = sp.qf();
    let cap_a = frame.nu - sp.s2() * frame.mu * frame.mu;
    let cap_b = sp.s1() / ((q + 1.0) * (2.0 * q + 1.0));
    let cap_c = (sp.a + sp.b) * frame.mu / ((q + 1.0) * (q + 2.0));
    ReducedConstants {
        cap_a,
        cap_b,
        cap_c,
        delta: cap_c * cap_c + cap_a * cap_b,
        kcoef: kcoef(sp),
        l2: (2.0 * q + 1.0) * (q + 1.0) / (q * q),
        m2: (q + 1.0) * (q + 2.0) / (q * q),
    }
}

/// kcoef = √(2q+1)·(a+b)/(√(q+1)·(q+2)), independent of the frame.
pub fn kcoef(sp: &ScaledParams) -> f64 {
    let q = sp.qf();
    (2.0 * q + 1.0).sqrt() / ((q + 1.0).sqrt() * (q + 2.0)) * (sp.a + sp.b)
}

/// The closed-form solution families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolutionKind {
    /// q even, bright/dark pair U and −U (σ₁ = ±1 variants).
    SymmetricSolitonPair,
    /// q odd, σ₁ = 1: bright and dark branches with different heights.
    NonsymmetricSolitonPair,
    /// q odd, σ₁ = −1: one soliton of polarity sgn C.
    SingleSoliton,
    /// q half-integer: the single bright soliton.
    BrightSoliton,
    /// q even, σ₁ = −1, Δ = 0: shock pair U and −U.
    SymmetricShockPair,
    /// q odd, σ₁ = −1, Δ = 0: one shock of polarity sgn C.
    SingleShock,
    /// q half-integer, σ₁ = −1, Δ = 0: the single bright shock.
    BrightShock,
}

impl SolutionKind {
    pub fn is_shock(&self) -> bool {
        matches!(
            self,
            SolutionKind::SymmetricShockPair | SolutionKind::SingleShock | SolutionKind::BrightShock
        )
    }
}

/// Polarity of one constructed wave.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Polarity {
    Bright,
    Dark,
}

/// Branch selector for pair families (bright member or dark member).
/// For single/bright families the selector must match the polarity that
/// the parameters dictate.
pub type BranchSelect = Polarity;

fn q_parity(q: HalfInt) -> Result<Parity> {
    if !q.is_positive() {
        return Err(Error::InvalidParams(format!(
            "travelling-wave construction requires q > 0, got {q}"
        )));
    }
    Ok(if q.is_half_integer() {
        Parity::Half
    } else if q.is_even_integer() {
        Parity::Even
    } else {
        Parity::Odd
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Parity {
    Even,
    Odd,
    Half,
}

/// True when Δ lies on the shock curve within [`SHOCK_DELTA_RTOL`].
pub fn on_shock_curve(rc: &ReducedConstants) -> bool {
    let scale = (rc.cap_c * rc.cap_c).max((rc.cap_a * rc.cap_b).abs());
    scale > 0.0 && rc.delta.abs() <= SHOCK_DELTA_RTOL * scale
}

/// The families admitted by the given parameters and oscillator constants.
///
/// Returns the empty list when A ≤ 0 (no decaying solutions exist), and the
/// shock kinds only when Δ = 0 within [`SHOCK_DELTA_RTOL`] (which requires
/// σ₁ = −1 for A > 0).
pub fn classify(sp: &ScaledParams, rc: &ReducedConstants) -> Vec<SolutionKind> {
    let Ok(parity) = q_parity(sp.q) else {
        return Vec::new();
    };
    if !(rc.cap_a > 0.0) {
        return Vec::new();
    }
    if sp.sigma1 < 0 && on_shock_curve(rc) {
        return match parity {
            Parity::Even if rc.cap_c > 0.0 => vec![SolutionKind::SymmetricShockPair],
            Parity::Odd if rc.cap_c != 0.0 => vec![SolutionKind::SingleShock],
            Parity::Half if rc.cap_c > 0.0 => vec![SolutionKind::BrightShock],
            _ => Vec::new(),
        };
    }
    if rc.delta <= 0.0 {
        return Vec::new();
    }
    if sp.sigma1 > 0 {
        // B > 0: Δ > 0 automatically once A > 0; no C condition.
        match parity {
            Parity::Even => vec![SolutionKind::SymmetricSolitonPair],
            Parity::Odd => vec![SolutionKind::NonsymmetricSolitonPair],
            Parity::Half => vec![SolutionKind::BrightSoliton],
        }
    } else {
        // B < 0: Δ > 0 means C²/|B| > A; the even and half-integer
        // families additionally require C > 0.
        match parity {
            Parity::Even if rc.cap_c > 0.0 => vec![SolutionKind::SymmetricSolitonPair],
            Parity::Odd if rc.cap_c != 0.0 => vec![SolutionKind::SingleSoliton],
            Parity::Half if rc.cap_c > 0.0 => vec![SolutionKind::BrightSoliton],
            _ => Vec::new(),
        }
    }
}

/// Oscillator potential V(U) = −A U² + B U^{2q+2} + 2C U^{q+2}.
pub fn potential_v(rc: &ReducedConstants, q: HalfInt, u: f64) -> Result<f64> {
    let qf = q.as_f64();
    let u_q2 = powf_checked(u, qf + 2.0)?;
    let u_2q2 = powf_checked(u, 2.0 * qf + 2.0)?;
    Ok(-rc.cap_a * u * u + rc.cap_b * u_2q2 + 2.0 * rc.cap_c * u_q2)
}

/// Nonzero real roots of V with multiplicity, from the factorization
/// V(U) = (1/B)·U²·((B U^q + C)² − Δ): the candidates satisfy
/// U^q = (±√Δ − C)/B, with the real-branch selection depending on the
/// parity of q (odd q keeps both signed branches; even q turns each
/// positive branch value into a ± pair; half-integer q keeps only
/// positive branch values). Δ < 0 gives no roots; Δ = 0 (within the shock
/// tolerance) gives each root with multiplicity two.
pub fn roots_of_v(rc: &ReducedConstants, q: HalfInt) -> Result<Vec<f64>> {
    let parity = q_parity(q)?;
    let inv_q = 1.0 / q.as_f64();
    let repeated = on_shock_curve(rc);
    let mut roots = Vec::new();
    if rc.delta < 0.0 && !repeated {
        return Ok(roots);
    }
    let sqrt_delta = rc.delta.max(0.0).sqrt();
    let branch_values: Vec<f64> = if repeated {
        vec![-rc.cap_c / rc.cap_b]
    } else {
        vec![
            (sqrt_delta - rc.cap_c) / rc.cap_b,
            (-sqrt_delta - rc.cap_c) / rc.cap_b,
        ]
    };
    for v in branch_values {
        // v is the candidate value of U^q.
        match parity {
            Parity::Odd => {
                let root = v.signum() * v.abs().powf(inv_q);
                push_with_multiplicity(&mut roots, root, repeated);
            }
            Parity::Even => {
                if v > 0.0 {
                    let mag = v.powf(inv_q);
                    push_with_multiplicity(&mut roots, mag, repeated);
                    push_with_multiplicity(&mut roots, -mag, repeated);
                }
            }
            Parity::Half => {
                if v > 0.0 {
                    push_with_multiplicity(&mut roots, v.powf(inv_q), repeated);
                }
            }
        }
    }
    Ok(roots)
}

fn push_with_multiplicity(roots: &mut Vec<f64>, root: f64, repeated: bool) {
    roots.push(root);
    if repeated {
        roots.push(root);
    }
}

/// Metadata view of a solution, for JSON export.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolutionMetadata {
    pub kind: SolutionKind,
    pub s: i8,
    pub s_tilde: i8,
    pub mu: f64,
    pub nu: f64,
    pub theta: f64,
    pub c: f64,
    pub h: f64,
    pub h_plus: Option<f64>,
    pub h_minus: Option<f64>,
    pub w: f64,
    #[serde(rename = "A")]
    pub cap_a: f64,
    #[serde(rename = "B")]
    pub cap_b: f64,
    #[serde(rename = "C")]
    pub cap_c: f64,
    #[serde(rename = "Delta")]
    pub delta: f64,
    pub kcoef: f64,
}

/// One constructed line-soliton or line-shock. Immutable after
/// construction; `eval` and the derivative evaluators are reentrant and
/// safe to sample from multiple threads.
#[derive(Debug, Clone)]
pub struct LineWaveSolution {
    pub params: ScaledParams,
    pub frame: WaveFrame,
    pub constants: ReducedConstants,
    pub kind: SolutionKind,
    pub branch: BranchSelect,
    /// Signed extreme value: U(0) for solitons, the ξ → +∞ limit for shocks.
    pub peak: f64,
    /// Height |peak| of this branch.
    pub height: f64,
    /// Heights of the two branches of the nonsymmetric pair (q odd, σ₁ = 1).
    pub h_plus: Option<f64>,
    pub h_minus: Option<f64>,
    /// Width w = 1/(q√A).
    pub width: f64,
    // --- evaluation internals: U(ξ) = sign_out · amp / den(ξ)^{1/q} with
    //     den(ξ) = c0 + dcosh·cosh(rate·ξ)           (solitons)
    //     den(ξ) = c0 · (1 + exp(−rate·ξ))           (shocks)
    sign_out: f64,
    c0: f64,
    dcosh: f64,
    rate: f64,
    inv_q: f64,
    amp: f64,
}

/// Build the requested solution family for the given frame.
///
/// `branch` picks the member of pair families; for single/bright families
/// it must match the polarity dictated by sgn C (bright solutions only for
/// half-integer q).
pub fn construct(
    sp: &ScaledParams,
    frame: &WaveFrame,
    kind: SolutionKind,
    branch: BranchSelect,
) -> Result<LineWaveSolution> {
    let rc = reduced_constants(sp, frame);
    let admitted = classify(sp, &rc);
    if !admitted.contains(&kind) {
        return Err(Error::Inadmissible(format!(
            "{kind:?} is not admitted (A={}, C={}, Delta={}); admitted: {admitted:?}",
            rc.cap_a, rc.cap_c, rc.delta
        )));
    }
    let q = sp.qf();
    let inv_q = 1.0 / q;
    let sqrt_a = rc.cap_a.sqrt();
    let rate = q * sqrt_a;
    let width = 1.0 / rate;
    let amp = rc.cap_a.powf(inv_q);
    let sqrt_delta = rc.delta.max(0.0).sqrt();
    let branch_sign = match branch {
        Polarity::Bright => 1.0,
        Polarity::Dark => -1.0,
    };

    let polarity_of_c = || -> Result<f64> {
        let s = rc.cap_c.signum();
        if (s > 0.0) != (branch == Polarity::Bright) {
            return Err(Error::InvalidParams(format!(
                "requested {branch:?} branch but sgn C = {s} dictates the other polarity"
            )));
        }
        Ok(s)
    };
    let require_bright = || -> Result<()> {
        if branch != Polarity::Bright {
            return Err(Error::InvalidParams(
                "this family admits only the bright branch".into(),
            ));
        }
        Ok(())
    };

    let (sign_out, c0, dcosh, height, h_plus, h_minus) = match kind {
        SolutionKind::SymmetricSolitonPair => {
            let h = amp / (rc.cap_c + sqrt_delta).powf(inv_q);
            (branch_sign, rc.cap_c, sqrt_delta, h, None, None)
        }
        SolutionKind::NonsymmetricSolitonPair => {
            // Bright branch: den = C + √Δ cosh (positive since √Δ > |C|).
            // Dark branch: den = C − √Δ cosh < 0; the odd root flips the
            // sign, equivalent to −amp/(−C + √Δ cosh)^{1/q}.
            let hp = amp / (rc.cap_c + sqrt_delta).powf(inv_q);
            let hm = amp / (sqrt_delta - rc.cap_c).powf(inv_q);
            let (c0, h) = match branch {
                Polarity::Bright => (rc.cap_c, hp),
                Polarity::Dark => (-rc.cap_c, hm),
            };
            (branch_sign, c0, sqrt_delta, h, Some(hp), Some(hm))
        }
        SolutionKind::SingleSoliton => {
            let s = polarity_of_c()?;
            let h = amp / (rc.cap_c.abs() + sqrt_delta).powf(inv_q);
            (s, rc.cap_c.abs(), sqrt_delta, h, None, None)
        }
        SolutionKind::BrightSoliton => {
            require_bright()?;
            let h = amp / (rc.cap_c + sqrt_delta).powf(inv_q);
            (1.0, rc.cap_c, sqrt_delta, h, None, None)
        }
        SolutionKind::SymmetricShockPair => {
            let h = (rc.cap_a / rc.cap_c).powf(inv_q);
            (branch_sign, rc.cap_c, 0.0, h, None, None)
        }
        SolutionKind::SingleShock => {
            let s = polarity_of_c()?;
            let h = (rc.cap_a / rc.cap_c.abs()).powf(inv_q);
            (s, rc.cap_c.abs(), 0.0, h, None, None)
        }
        SolutionKind::BrightShock => {
            require_bright()?;
            let h = (rc.cap_a / rc.cap_c).powf(inv_q);
            (1.0, rc.cap_c, 0.0, h, None, None)
        }
    };

    let peak = sign_out * height;
    Ok(LineWaveSolution {
        params: sp.clone(),
        frame: *frame,
        constants: rc,
        kind,
        branch,
        peak,
        height,
        h_plus,
        h_minus,
        width,
        sign_out,
        c0,
        dcosh,
        rate,
        inv_q,
        amp,
    })
}

impl LineWaveSolution {
    /// U(ξ). Numerically stable for arbitrarily large |ξ|: beyond
    /// |rate·ξ| ≈ 30 the denominator is evaluated in the log domain via its
    /// dominant exponential, so cosh never overflows.
    pub fn eval(&self, xi: f64) -> f64 {
        let z = self.rate * xi;
        let ln_den = if self.kind.is_shock() {
            // den = c0 (1 + e^{−z});  ln(1+e^{−z}) = softplus(−z).
            self.c0.ln() + softplus(-z)
        } else {
            let az = z.abs();
            if az <= 30.0 {
                (self.c0 + self.dcosh * z.cosh()).ln()
            } else {
                // den = (d/2) e^{|z|} (1 + (2c0/d) e^{−|z|} + e^{−2|z|})
                az + (self.dcosh / 2.0).ln()
                    + ((2.0 * self.c0 / self.dcosh) * (-az).exp() + (-2.0 * az).exp()).ln_1p()
            }
        };
        self.sign_out * self.amp * (-self.inv_q * ln_den).exp()
    }

    /// d^n U/dξ^n for n = 0..=3, by the chain rule on the closed-form
    /// denominator. For |rate·ξ| > 300 the value is below ~1e−43 of the
    /// height on the decaying side and 0.0 is returned (the direct cosh
    /// would overflow there).
    pub fn eval_deriv(&self, xi: f64, order: u8) -> f64 {
        if order == 0 {
            return self.eval(xi);
        }
        assert!(order <= 3, "derivatives implemented up to order 3");
        let z = self.rate * xi;
        // (den, den', den'', den''') with respect to ξ.
        let (den, d1, d2, d3) = if self.kind.is_shock() {
            if -z > 300.0 {
                return 0.0;
            }
            let e = (-z).exp();
            let k = self.rate;
            (
                self.c0 * (1.0 + e),
                -self.c0 * k * e,
                self.c0 * k * k * e,
                -self.c0 * k * k * k * e,
            )
        } else {
            if z.abs() > 300.0 {
                return 0.0;
            }
            let k = self.rate;
            let (ch, sh) = (z.cosh(), z.sinh());
            (
                self.c0 + self.dcosh * ch,
                self.dcosh * k * sh,
                self.dcosh * k * k * ch,
                self.dcosh * k * k * k * sh,
            )
        };
        // U = S·amp·f(den), f(d) = sgn(d)|d|^{−r}; derivatives of f at den:
        // f^{(n)}(d) = sgn(d)^{n+1} (−1)^n r(r+1)…(r+n−1) |d|^{−r−n}.
        let r = self.inv_q;
        let ad = den.abs();
        let sg = den.signum();
        let f1 = -r * ad.powf(-r - 1.0);
        let f2 = sg * r * (r + 1.0) * ad.powf(-r - 2.0);
        let f3 = -r * (r + 1.0) * (r + 2.0) * ad.powf(-r - 3.0);
        let scale = self.sign_out * self.amp;
        match order {
            1 => scale * f1 * d1,
            2 => scale * (f2 * d1 * d1 + f1 * d2),
            _ => scale * (f3 * d1 * d1 * d1 + 3.0 * f2 * d1 * d2 + f1 * d3),
        }
    }

    /// Metadata for JSON export. The table signs: `s` is the branch sign of
    /// this member; `s_tilde` is the focussing-case cosh-shift sign (sgn θ
    /// for even/half-integer q, s·sgn θ for odd q) and 0 when the family
    /// has no s̃ (defocussing solitons) or θ = 0.
    pub fn metadata(&self) -> SolutionMetadata {
        let s = if self.sign_out >= 0.0 { 1 } else { -1 };
        let sgn_theta = if self.frame.mu > 0.0 {
            1i8
        } else if self.frame.mu < 0.0 {
            -1
        } else {
            0
        };
        let s_tilde = if self.kind.is_shock() {
            match q_parity(self.params.q) {
                Ok(Parity::Even) => s,
                _ => 1,
            }
        } else if self.params.sigma1 > 0 {
            match q_parity(self.params.q) {
                Ok(Parity::Odd) => s * sgn_theta,
                _ => sgn_theta,
            }
        } else {
            0
        };
        SolutionMetadata {
            kind: self.kind,
            s,
            s_tilde,
            mu: self.frame.mu,
            nu: self.frame.nu,
            theta: self.frame.theta(),
            c: self.frame.speed(),
            h: self.height,
            h_plus: self.h_plus,
            h_minus: self.h_minus,
            w: self.width,
            cap_a: self.constants.cap_a,
            cap_b: self.constants.cap_b,
            cap_c: self.constants.cap_c,
            delta: self.constants.delta,
            kcoef: self.constants.kcoef,
        }
    }
}

/// ln(1 + e^x) without overflow.
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// U^e for the half-integer exponents appearing in the reduction: exact
/// sign handling for integer exponents, error for a fractional power of a
/// negative base.
fn signed_pow(u: f64, e: f64) -> Result<f64> {
    powf_checked(u, e)
}

/// Max |ODE residual| of (σ₂μ²−ν)U′ + (σ₁U^{2q} + (a+b)μU^q)U′ + U‴
/// over `n_samples` uniform points on ξ ∈ [−10w, 10w].
pub fn ode_residual(sol: &LineWaveSolution, n_samples: usize) -> Result<f64> {
    let sp = &sol.params;
    let q = sp.qf();
    let lin = sp.s2() * sol.frame.mu * sol.frame.mu - sol.frame.nu;
    let ab_mu = (sp.a + sp.b) * sol.frame.mu;
    let mut max_res: f64 = 0.0;
    for xi in sample_xi(sol.width, n_samples) {
        let u = sol.eval(xi);
        let u1 = sol.eval_deriv(xi, 1);
        let u3 = sol.eval_deriv(xi, 3);
        let res = lin * u1
            + (sp.s1() * signed_pow(u, 2.0 * q)? + ab_mu * signed_pow(u, q)?) * u1
            + u3;
        max_res = max_res.max(res.abs());
    }
    Ok(max_res)
}

/// Max |first-integral residual| of U′² − (A U² − B U^{2q+2} − 2C U^{q+2})
/// over `n_samples` uniform points on ξ ∈ [−10w, 10w].
pub fn first_integral_residual(sol: &LineWaveSolution, n_samples: usize) -> Result<f64> {
    let rc = &sol.constants;
    let q = sol.params.qf();
    let mut max_res: f64 = 0.0;
    for xi in sample_xi(sol.width, n_samples) {
        let u = sol.eval(xi);
        let u1 = sol.eval_deriv(xi, 1);
        let rhs = rc.cap_a * u * u
            - rc.cap_b * signed_pow(u, 2.0 * q + 2.0)?
            - 2.0 * rc.cap_c * signed_pow(u, q + 2.0)?;
        max_res = max_res.max((u1 * u1 - rhs).abs());
    }
    Ok(max_res)
}

fn sample_xi(width: f64, n: usize) -> impl Iterator<Item = f64> {
    let n = n.max(2);
    let lo = -10.0 * width;
    let step = 20.0 * width / (n - 1) as f64;
    (0..n).map(move |i| lo + step * i as f64)
}

/// Soliton profile in height–width form:
/// |U| = h/((1 + σ₁ρ²)cosh²(ξ/2w) − σ₁ρ²)^{1/q} with ρ = w·h^q/l.
/// The defocussing case requires w·h^q < l, otherwise the denominator
/// vanishes at finite ξ.
pub fn profile_hw(sp: &ScaledParams, h: f64, w: f64, xi: f64) -> Result<f64> {
    let (rho2, inv_q) = profile_rho2(sp, h, w)?;
    let s1 = sp.s1();
    let ch = stable_cosh_sq(xi / (2.0 * w));
    let den = (1.0 + s1 * rho2) * ch - s1 * rho2;
    Ok(h * den.powf(-inv_q))
}

fn profile_rho2(sp: &ScaledParams, h: f64, w: f64) -> Result<(f64, f64)> {
    if !(h > 0.0 && w > 0.0) {
        return Err(Error::InvalidParams(format!(
            "height and width must be positive, got h={h}, w={w}"
        )));
    }
    let q = sp.qf();
    let l2 = (2.0 * q + 1.0) * (q + 1.0) / (q * q);
    let rho2 = w * w * h.powf(2.0 * q) / l2;
    if sp.sigma1 < 0 && rho2 >= 1.0 {
        return Err(Error::Inadmissible(format!(
            "defocussing profile requires w·h^q < l = {}, got w·h^q = {}",
            l2.sqrt(),
            w * h.powf(q)
        )));
    }
    Ok((rho2, 1.0 / q))
}

/// cosh²(x) without overflow for large |x| (saturates to f64::MAX, which
/// only occurs where the profile has already underflowed to 0).
fn stable_cosh_sq(x: f64) -> f64 {
    if x.abs() > 350.0 {
        f64::MAX
    } else {
        let c = x.cosh();
        c * c
    }
}

/// Shock profile in height–width form: |U| = h/(1 + e^{−ξ/w})^{1/q}.
/// Shocks exist only for σ₁ = −1.
pub fn shock_profile_hw(sp: &ScaledParams, h: f64, w: f64, xi: f64) -> Result<f64> {
    if sp.sigma1 >= 0 {
        return Err(Error::Inadmissible(
            "line-shocks exist only in the defocussing case (sigma1 = -1)".into(),
        ));
    }
    if !(h > 0.0 && w > 0.0) {
        return Err(Error::InvalidParams(format!(
            "height and width must be positive, got h={h}, w={w}"
        )));
    }
    let inv_q = 1.0 / sp.qf();
    Ok(h * (-inv_q * softplus(-xi / w)).exp())
}

/// Soliton (h, w) → (|θ|, c):
/// |θ| = arctan(m²|1 − σ₁w²h^{2q}/l²| / (2|a+b|w²h^q)) and the matching
/// closed-form speed. The sign of θ is kinematic information not contained
/// in (h, w); see the kinematics module.
pub fn hw_to_angle_speed(sp: &ScaledParams, h: f64, w: f64) -> Result<(f64, f64)> {
    let (rho2, _) = profile_rho2(sp, h, w)?;
    let q = sp.qf();
    if sp.a + sp.b == 0.0 {
        return Err(Error::InvalidParams(
            "angle/speed from (h, w) requires a + b != 0".into(),
        ));
    }
    let m2 = (q + 1.0) * (q + 2.0) / (q * q);
    let ab = sp.a + sp.b;
    let h_q = h.powf(q);
    let h_2q = h_q * h_q;
    let w2 = w * w;
    // 1 − σ₁ w²h^{2q}/l² = 1 − σ₁ρ².
    let one_minus = 1.0 - sp.s1() * rho2;
    let theta = (m2 * one_minus.abs() / (2.0 * ab.abs() * w2 * h_q)).atan();
    let m4 = m2 * m2;
    let c = (sp.s2() * q * q * m4 * one_minus * one_minus + 4.0 * ab * ab * w2 * h_2q)
        / (2.0
            * ab
            * q
            * q
            * w2
            * h_q
            * (m4 * one_minus * one_minus + 4.0 * ab * ab * w2 * w2 * h_2q).sqrt());
    Ok((theta, c))
}

/// Shock (h, w) → angle and speed, with the suspected-typo protocol.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ShockAngleSpeed {
    /// θ = arctan(m²h^q/(l²(a+b))), signed.
    pub theta: f64,
    /// The speed formula exactly as printed in the source theorem,
    /// c = (k²l⁴ + σ₂q²m⁴w²h^{2q}) / ((a+b)q²l²w²√((a+b)²l⁴ + m⁴h²)).
    /// Note the mixed powers of h (h^{2q} in the numerator but h² in the
    /// radical), which is dimensionally inconsistent for q ≠ 1.
    pub c_printed: f64,
    /// Independent composition: θ from the angle formula, then the shock
    /// kinematic curve c = (σ₂ + k²) sin²θ/cosθ.
    pub c_composed: f64,
    /// True when printed and composed values disagree beyond 1e−6 relative;
    /// callers should prefer `c_composed` but the disagreement is surfaced
    /// instead of silently corrected.
    pub mismatch: bool,
}

pub fn shock_hw_to_angle_speed(sp: &ScaledParams, h: f64, w: f64) -> Result<ShockAngleSpeed> {
    if sp.sigma1 >= 0 {
        return Err(Error::Inadmissible(
            "line-shocks exist only in the defocussing case (sigma1 = -1)".into(),
        ));
    }
    if !(h > 0.0 && w > 0.0) {
        return Err(Error::InvalidParams(format!(
            "height and width must be positive, got h={h}, w={w}"
        )));
    }
    if sp.a + sp.b == 0.0 {
        return Err(Error::InvalidParams(
            "angle/speed from (h, w) requires a + b != 0".into(),
        ));
    }
    let q = sp.qf();
    let ab = sp.a + sp.b;
    let l2 = (2.0 * q + 1.0) * (q + 1.0) / (q * q);
    let m2 = (q + 1.0) * (q + 2.0) / (q * q);
    let (l4, m4) = (l2 * l2, m2 * m2);
    let k = kcoef(sp);
    let h_q = h.powf(q);
    let theta = (m2 * h_q / (l2 * ab)).atan();
    let c_printed = (k * k * l4 + sp.s2() * q * q * m4 * w * w * h_q * h_q)
        / (ab * q * q * l2 * w * w * (ab * ab * l4 + m4 * h * h).sqrt());
    let c_composed = (sp.s2() + k * k) * theta.sin() * theta.sin() / theta.cos();
    let mismatch = (c_printed - c_composed).abs() > 1e-6 * (1.0 + c_composed.abs());
    Ok(ShockAngleSpeed {
        theta,
        c_printed,
        c_composed,
        mismatch,
    })
}
