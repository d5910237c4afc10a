use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The lattice `αZ × βZ` with rational density `αβ = p/q`.
///
/// `β` is never stored; it is derived from `(α, p, q)` so the density is
/// exact by construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RationalLattice {
    alpha: f64,
    p: u32,
    q: u32,
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl RationalLattice {
    pub fn new(alpha: f64, p: u32, q: u32) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidLattice(format!(
                "alpha must be positive and finite, got {alpha}"
            )));
        }
        if p == 0 || q == 0 {
            return Err(Error::InvalidLattice(format!(
                "p and q must be positive, got p={p}, q={q}"
            )));
        }
        let d = gcd(p, q);
        Ok(Self {
            alpha,
            p: p / d,
            q: q / d,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.p as f64 / (self.q as f64 * self.alpha)
    }

    pub fn p(&self) -> usize {
        self.p as usize
    }

    pub fn q(&self) -> usize {
        self.q as usize
    }

    /// `αβ = p/q`.
    pub fn density(&self) -> f64 {
        self.p as f64 / self.q as f64
    }

    /// True when `p > q`; such systems can never be complete.
    pub fn is_undersampled(&self) -> bool {
        self.p > self.q
    }

    /// Width of the fundamental domain in `x`, `α/p`.
    pub fn x_period(&self) -> f64 {
        self.alpha / self.p as f64
    }

    /// Height of the fundamental domain in `ξ`, `1/α`.
    pub fn xi_period(&self) -> f64 {
        1.0 / self.alpha
    }
}
