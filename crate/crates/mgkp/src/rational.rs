//! Exact half-integer arithmetic for the nonlinearity power `q`.
//!
//! The case analysis throughout the crate (even/odd integer q, half-integer
//! q) must be exact: classifying solution families or conservation-law
//! applicability from a floating-point q would be fragile. `q` is therefore
//! stored as a rational with denominator 1 or 2 and compared exactly.
//!
//! Negative values are representable because one conservation-law family is
//! stated for q = −2; such values are outside the equation's own domain
//! (q > 0) and are gated by the callers.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

/// A half-integer: `num/den` with `den ∈ {1, 2}`, stored as `2q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HalfInt {
    /// Twice the value; even ⇔ integer, odd ⇔ proper half-integer.
    twice: i32,
}

impl HalfInt {
    /// Construct from numerator and denominator. `den` must be 1 or 2.
    pub fn new(num: i32, den: i32) -> Result<Self> {
        match den {
            1 => Ok(HalfInt { twice: 2 * num }),
            2 => Ok(HalfInt { twice: num }),
            _ => Err(Error::InvalidParams(format!(
                "q denominator must be 1 or 2, got {den}"
            ))),
        }
    }

    /// The integer `n` as a half-integer.
    pub const fn from_int(n: i32) -> Self {
        HalfInt { twice: 2 * n }
    }

    /// `n/2` as a half-integer (n odd gives a proper half-integer).
    pub const fn from_halves(n: i32) -> Self {
        HalfInt { twice: n }
    }

    /// Numerator after reduction (odd `twice` → numerator is `twice`).
    pub fn numerator(&self) -> i32 {
        if self.twice % 2 == 0 {
            self.twice / 2
        } else {
            self.twice
        }
    }

    /// Denominator after reduction: 1 for integers, 2 otherwise.
    pub fn denominator(&self) -> i32 {
        if self.twice % 2 == 0 {
            1
        } else {
            2
        }
    }

    /// Twice the value (always exact).
    pub const fn twice(&self) -> i32 {
        self.twice
    }

    /// Value as f64 (exact for this range).
    pub fn as_f64(&self) -> f64 {
        f64::from(self.twice) / 2.0
    }

    /// True when the value is an integer.
    pub fn is_integer(&self) -> bool {
        self.twice % 2 == 0
    }

    /// True when the value is a proper half-integer (denominator 2).
    pub fn is_half_integer(&self) -> bool {
        self.twice % 2 != 0
    }

    /// True for even integers (2, 4, ...; also 0, −2).
    pub fn is_even_integer(&self) -> bool {
        self.twice % 4 == 0
    }

    /// True for odd integers (1, 3, ...; also −1).
    pub fn is_odd_integer(&self) -> bool {
        self.is_integer() && !self.is_even_integer()
    }

    /// True when the value is strictly positive.
    pub fn is_positive(&self) -> bool {
        self.twice > 0
    }

    /// Exact equality with the integer `n`.
    pub fn eq_int(&self, n: i32) -> bool {
        self.twice == 2 * n
    }

    /// Exact equality with the ratio `num/den`.
    pub fn eq_ratio(&self, num: i32, den: i32) -> bool {
        // cross-multiply; den is small so overflow is not a concern here
        self.twice * den == 2 * num
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parity_classification_is_exact() {
        let half = HalfInt::new(1, 2).unwrap();
        assert!(half.is_half_integer() && !half.is_integer());
        assert_eq!(half.as_f64(), 0.5);

        let one = HalfInt::from_int(1);
        assert!(one.is_odd_integer() && !one.is_even_integer());

        let two = HalfInt::from_int(2);
        assert!(two.is_even_integer());
        assert_eq!(two.numerator(), 2);
        assert_eq!(two.denominator(), 1);

        let three_halves = HalfInt::new(3, 2).unwrap();
        assert_eq!(three_halves.numerator(), 3);
        assert_eq!(three_halves.denominator(), 2);
        assert_eq!(format!("{three_halves}"), "3/2");
    }

    #[test]
    fn rejects_bad_denominator() {
        assert!(HalfInt::new(1, 3).is_err());
    }

    #[test]
    fn ratio_equality() {
        let q = HalfInt::new(2, 1).unwrap();
        assert!(q.eq_ratio(2, 1));
        assert!(q.eq_ratio(4, 2));
        assert!(!q.eq_ratio(3, 2));
        assert!(HalfInt::from_int(-2).eq_int(-2));
    }
}
