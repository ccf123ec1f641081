//! Jet points: the values of a scalar field `w` and its partial
//! derivatives at a single space-time point.
//!
//! Every closed-form evaluator in this crate (equation left-hand side,
//! Lagrangian density, conservation-law multipliers and fluxes) is a pure
//! function of a jet point. Entries are keyed by derivative multi-index
//! `(∂_t order, ∂_x order, ∂_y order)`; mixed partials commute so the
//! ordered triple is a complete key. A lookup for an entry the jet does not
//! carry is an error, never a silent zero — silent zeros mask evaluator
//! bugs.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// Derivative multi-index: orders in (t, x, y).
pub type MultiIndex = (u8, u8, u8);

/// Values of `w` and its partials at one point, plus the point itself.
#[derive(Debug, Clone, Default)]
pub struct JetPoint {
    /// Point coordinates (t, x, y).
    pub t: f64,
    pub x: f64,
    pub y: f64,
    entries: HashMap<MultiIndex, f64>,
}

impl JetPoint {
    /// Empty jet at the given point.
    pub fn new(t: f64, x: f64, y: f64) -> Self {
        JetPoint {
            t,
            x,
            y,
            entries: HashMap::new(),
        }
    }

    /// Insert the value of ∂_t^dt ∂_x^dx ∂_y^dy w.
    pub fn set(&mut self, dt: u8, dx: u8, dy: u8, value: f64) {
        self.entries.insert((dt, dx, dy), value);
    }

    /// Look up a derivative value; absent entries fail loudly.
    pub fn get(&self, dt: u8, dx: u8, dy: u8) -> Result<f64> {
        self.entries
            .get(&(dt, dx, dy))
            .copied()
            .ok_or(Error::MissingJetEntry(dt, dx, dy))
    }

    /// Number of stored derivative entries.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// True when no entries are stored.
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    // Named accessors for the derivatives the formulas actually use.
    pub fn w(&self) -> Result<f64> {
        self.get(0, 0, 0)
    }
    pub fn wt(&self) -> Result<f64> {
        self.get(1, 0, 0)
    }
    pub fn wx(&self) -> Result<f64> {
        self.get(0, 1, 0)
    }
    pub fn wy(&self) -> Result<f64> {
        self.get(0, 0, 1)
    }
    pub fn wtx(&self) -> Result<f64> {
        self.get(1, 1, 0)
    }
    pub fn wxx(&self) -> Result<f64> {
        self.get(0, 2, 0)
    }
    pub fn wxy(&self) -> Result<f64> {
        self.get(0, 1, 1)
    }
    pub fn wyy(&self) -> Result<f64> {
        self.get(0, 0, 2)
    }
    pub fn wxxx(&self) -> Result<f64> {
        self.get(0, 3, 0)
    }
    pub fn wxxy(&self) -> Result<f64> {
        self.get(0, 2, 1)
    }
    pub fn wxxxx(&self) -> Result<f64> {
        self.get(0, 4, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_entries_fail_loudly() {
        let mut jet = JetPoint::new(0.0, 1.0, 2.0);
        jet.set(0, 1, 0, 3.5);
        assert_eq!(jet.wx().unwrap(), 3.5);
        assert!(matches!(
            jet.wyy(),
            Err(Error::MissingJetEntry(0, 0, 2))
        ));
    }
}
