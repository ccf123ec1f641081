//! Closed-form smooth test fields with exact derivatives of any order.
//!
//! Off-shell verification of the conservation-law identities needs smooth
//! fields `w(t,x,y)` whose partial derivatives are available exactly (the
//! finite differencing is reserved for the outer total derivatives, so the
//! jet itself must not contribute truncation error). A field here is a
//! finite sum of terms, each
//!
//! ```text
//!   coeff · g(k_t·t + k_x·x + k_y·y + φ),   g ∈ {sin, cos, exp, identity}
//! ```
//!
//! which is closed under partial differentiation of any order. The
//! `identity` kind contributes an affine ramp; it is used to keep `w_x`
//! bounded inside a positive window when evaluators contain fractional or
//! negative powers of `w_x`.

use rand::Rng;

use crate::jet::JetPoint;

/// The outer function of one term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TermKind {
    Sin,
    Cos,
    /// exp of the affine form; wave numbers should be kept small to avoid
    /// overflow on the sampled domain.
    Exp,
    /// the affine form itself (first derivatives constant, higher zero).
    Identity,
}

/// One summand of an analytic field.
#[derive(Debug, Clone, Copy)]
pub struct Term {
    pub kind: TermKind,
    pub coeff: f64,
    pub kt: f64,
    pub kx: f64,
    pub ky: f64,
    pub phase: f64,
}

impl Term {
    fn eval_deriv(&self, dt: u8, dx: u8, dy: u8, t: f64, x: f64, y: f64) -> f64 {
        let n = u32::from(dt) + u32::from(dx) + u32::from(dy);
        let chain = self.kt.powi(dt as i32) * self.kx.powi(dx as i32) * self.ky.powi(dy as i32);
        let arg = self.kt * t + self.kx * x + self.ky * y + self.phase;
        let outer = match self.kind {
            TermKind::Exp => arg.exp(),
            TermKind::Sin => match n % 4 {
                0 => arg.sin(),
                1 => arg.cos(),
                2 => -arg.sin(),
                _ => -arg.cos(),
            },
            TermKind::Cos => match n % 4 {
                0 => arg.cos(),
                1 => -arg.sin(),
                2 => -arg.cos(),
                _ => arg.sin(),
            },
            TermKind::Identity => match n {
                0 => arg,
                1 => 1.0,
                _ => return 0.0,
            },
        };
        // For Identity with n == 1 the chain factor is exactly the single
        // wave number, which powi already produced.
        self.coeff * chain * outer
    }
}

/// A finite sum of closed-form terms; derivatives of any order are exact.
#[derive(Debug, Clone, Default)]
pub struct AnalyticField {
    pub terms: Vec<Term>,
}

impl AnalyticField {
    /// Exact value of ∂_t^dt ∂_x^dx ∂_y^dy w at (t, x, y).
    pub fn deriv(&self, dt: u8, dx: u8, dy: u8, t: f64, x: f64, y: f64) -> f64 {
        self.terms
            .iter()
            .map(|term| term.eval_deriv(dt, dx, dy, t, x, y))
            .sum()
    }

    /// Field value at (t, x, y).
    pub fn value(&self, t: f64, x: f64, y: f64) -> f64 {
        self.deriv(0, 0, 0, t, x, y)
    }

    /// Build the full jet of all derivatives with total order ≤ `max_order`.
    pub fn jet_at(&self, t: f64, x: f64, y: f64, max_order: u8) -> JetPoint {
        let mut jet = JetPoint::new(t, x, y);
        for dt in 0..=max_order {
            for dx in 0..=(max_order - dt) {
                for dy in 0..=(max_order - dt - dx) {
                    jet.set(dt, dx, dy, self.deriv(dt, dx, dy, t, x, y));
                }
            }
        }
        jet
    }

    /// A random oscillatory field: a handful of sin/cos terms with O(1)
    /// wave numbers plus one mild exp term. Suitable when the evaluators
    /// are polynomial in the jet (integer q ≥ 1, no negative powers).
    pub fn random_generic<R: Rng>(rng: &mut R) -> Self {
        let mut terms = Vec::new();
        let n_osc = rng.gen_range(2..=3);
        for _ in 0..n_osc {
            terms.push(Term {
                kind: if rng.gen_bool(0.5) {
                    TermKind::Sin
                } else {
                    TermKind::Cos
                },
                coeff: rng.gen_range(0.3..1.2),
                kt: rng.gen_range(-1.0..1.0),
                kx: rng.gen_range(-1.0..1.0),
                ky: rng.gen_range(-1.0..1.0),
                phase: rng.gen_range(0.0..std::f64::consts::TAU),
            });
        }
        // a gentle exponential keeps the family from being trigonometric-only
        terms.push(Term {
            kind: TermKind::Exp,
            coeff: rng.gen_range(0.05..0.2),
            kt: rng.gen_range(-0.2..0.2),
            kx: rng.gen_range(-0.2..0.2),
            ky: rng.gen_range(-0.2..0.2),
            phase: 0.0,
        });
        AnalyticField { terms }
    }

    /// A random field whose `w_x` stays inside [0.5, 1.5] everywhere:
    /// a unit ramp in x plus oscillations whose x-slopes sum below 1/2.
    /// Required when evaluators take fractional or negative powers of `w_x`.
    pub fn random_bounded_slope<R: Rng>(rng: &mut R) -> Self {
        let mut terms = vec![Term {
            kind: TermKind::Identity,
            coeff: 1.0,
            kt: rng.gen_range(-0.3..0.3),
            kx: 1.0,
            ky: rng.gen_range(-0.3..0.3),
            phase: rng.gen_range(-0.5..0.5),
        }];
        let n_osc = rng.gen_range(2..=3);
        // budget the total |coeff·kx| so the slope window is guaranteed
        let budget = 0.4 / n_osc as f64;
        for _ in 0..n_osc {
            let kx: f64 = rng.gen_range(-1.0..1.0);
            let max_amp = budget / kx.abs().max(0.2);
            terms.push(Term {
                kind: if rng.gen_bool(0.5) {
                    TermKind::Sin
                } else {
                    TermKind::Cos
                },
                coeff: rng.gen_range(0.2 * max_amp..max_amp),
                kt: rng.gen_range(-0.8..0.8),
                kx,
                ky: rng.gen_range(-0.8..0.8),
                phase: rng.gen_range(0.0..std::f64::consts::TAU),
            });
        }
        AnalyticField { terms }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Central finite difference of a partial derivative, used only here to
    /// cross-check the closed-form derivative implementation.
    fn fd_dx(field: &AnalyticField, dt: u8, dx: u8, dy: u8, t: f64, x: f64, y: f64) -> f64 {
        let h = 1e-5;
        (field.deriv(dt, dx - 1, dy, t, x + h, y) - field.deriv(dt, dx - 1, dy, t, x - h, y))
            / (2.0 * h)
    }

    #[test]
    fn exact_derivatives_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let field = AnalyticField::random_generic(&mut rng);
            let (t, x, y) = (0.3, -0.7, 1.1);
            for (dt, dx, dy) in [(0u8, 1u8, 0u8), (0, 2, 1), (1, 3, 0), (0, 4, 0)] {
                let exact = field.deriv(dt, dx, dy, t, x, y);
                let approx = fd_dx(&field, dt, dx, dy, t, x, y);
                assert!(
                    (exact - approx).abs() <= 1e-6 * (1.0 + exact.abs()),
                    "({dt},{dx},{dy}): exact {exact} vs fd {approx}"
                );
            }
        }
    }

    #[test]
    fn bounded_slope_window_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let field = AnalyticField::random_bounded_slope(&mut rng);
            for i in 0..200 {
                let t = -1.0 + 0.02 * i as f64;
                let wx = field.deriv(0, 1, 0, t, 2.0 * t, -t);
                assert!((0.5..=1.5).contains(&wx), "w_x = {wx} escaped window");
            }
        }
    }

    #[test]
    fn jet_contains_all_orders() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let field = AnalyticField::random_generic(&mut rng);
        let jet = field.jet_at(0.0, 0.0, 0.0, 6);
        // number of multi-indices with total order <= 6 in 3 variables
        assert_eq!(jet.len(), 84);
        assert!(jet.get(0, 4, 2).is_ok());
        assert!(jet.get(0, 0, 7).is_err());
    }
}
