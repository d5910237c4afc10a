//! Truncated Zak transform `Z_α g(x, ξ) = Σ_k g(x - αk) e^{2πiαkξ}` with a
//! certified bound on the omitted tail.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::RationalLattice;
use crate::window::{compact_k_range, DecayEnvelope, Window};

/// Default truncation tolerance for every Zak-based quantity.
pub const DEFAULT_EPS: f64 = 1e-12;

/// Hard cap on the truncation index.
pub const MAX_TERMS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZakValue {
    pub value: Complex64,
    pub truncation_bound: f64,
    pub terms_used: usize,
}

/// Smallest `K` with `Σ_{|k|>K} envelope(x - αk) <= eps`, and that bound.
pub fn truncation_index(env: &DecayEnvelope, alpha: f64, x: f64, eps: f64) -> Result<(usize, f64)> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    match *env {
        DecayEnvelope::Exponential { c, rate, .. } => {
            if c == 0.0 {
                return Ok((0, 0.0));
            }
            let step = rate * alpha;
            let lead = (2.0 * c / (1.0 - (-step).exp())).ln() + rate * x.abs();
            let guess = ((lead - eps.ln()) / step - 1.0).ceil().max(0.0);
            if guess > MAX_TERMS as f64 {
                return Err(Error::TruncationCap {
                    cap: MAX_TERMS,
                    achieved: env.lattice_tail(x, alpha, MAX_TERMS),
                    requested: eps,
                });
            }
            let mut k = guess as usize;
            while env.lattice_tail(x, alpha, k) > eps {
                k += 1;
            }
            while k > 0 && env.lattice_tail(x, alpha, k - 1) <= eps {
                k -= 1;
            }
            Ok((k, env.lattice_tail(x, alpha, k)))
        }
        DecayEnvelope::Compact { lo, hi, .. } => {
            let (kmin, kmax) = compact_k_range(lo, hi, x, alpha);
            let k = if kmin > kmax {
                0
            } else {
                kmin.unsigned_abs().max(kmax.unsigned_abs()) as usize
            };
            Ok((k, 0.0))
        }
    }
}

/// `0, 1, -1, 2, -2, …, K, -K`.
pub(crate) fn symmetric_order(k: usize) -> impl Iterator<Item = i64> {
    std::iter::once(0).chain((1..=k as i64).flat_map(|j| [j, -j]))
}

/// The window samples `g(x - αk)` entering the Zak sum at a fixed `x`.
///
/// Building the series once per `x` and evaluating it for many `ξ` is how
/// grid scans avoid re-evaluating the window.
#[derive(Debug, Clone)]
pub struct ZakSeries {
    alpha: f64,
    terms: Vec<(i64, Complex64)>,
    bound: f64,
}

impl ZakSeries {
    pub fn new(w: &Window, alpha: f64, x: f64, eps: f64) -> Result<Self> {
        let env = w.envelope();
        let (k, bound) = truncation_index(&env, alpha, x, eps)?;
        let terms = symmetric_order(k)
            .filter(|&j| env.bound(x - alpha * j as f64) > 0.0)
            .map(|j| (j, w.eval(x - alpha * j as f64)))
            .collect();
        Ok(Self {
            alpha,
            terms,
            bound,
        })
    }

    pub fn eval(&self, xi: f64) -> ZakValue {
        let value = self
            .terms
            .iter()
            .map(|&(k, g)| g * Complex64::from_polar(1.0, 2.0 * PI * self.alpha * k as f64 * xi))
            .sum();
        ZakValue {
            value,
            truncation_bound: self.bound,
            terms_used: self.terms.len(),
        }
    }

    pub fn truncation_bound(&self) -> f64 {
        self.bound
    }
}

pub fn zak(w: &Window, alpha: f64, x: f64, xi: f64, eps: f64) -> Result<ZakValue> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
    }
    Ok(ZakSeries::new(w, alpha, x, eps)?.eval(xi))
}

/// `(Z_α g(x + αr/p, ξ))_{r=0..p-1}`.
pub fn vector_zak(
    w: &Window,
    lattice: &RationalLattice,
    x: f64,
    xi: f64,
    eps: f64,
) -> Result<Vec<Complex64>> {
    let alpha = lattice.alpha();
    (0..lattice.p())
        .map(|r| Ok(zak(w, alpha, x + alpha * r as f64 / lattice.p() as f64, xi, eps)?.value))
        .collect()
}
