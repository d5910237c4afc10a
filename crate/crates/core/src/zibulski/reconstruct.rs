//! Reconstruction of `f` from its Gabor correlations by inverting
//! `Z_vec(Sf) = (α/p)·A_g·Z_vec(f)` cell by cell on a discrete Zak grid.
//!
//! The `x` grid is the sampling grid restricted to `[0, α/p)`, the `ξ` grid
//! `ξ_j = j/(αM)`. With `M` at least the number of `α`-translates covering the
//! sampled interval, the discrete inverse Zak transform
//! `f(x - αk) = (1/M) Σ_j Zf(x, ξ_j) e^{-2πikj/M}` is exact on the samples.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::RationalLattice;
use crate::signal::SampledSignal;
use crate::window::{DecayEnvelope, Window};

use super::{frame_operator_scale, RowSeries};

/// Pseudo-inverse cutoff relative to the largest eigenvalue of `A_g` on the grid.
pub const DEFAULT_PINV_TOL: f64 = 1e-10;

/// Gabor coefficients below this magnitude may be dropped.
const COEFF_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub signal: SampledSignal,
    /// Grid cells `(x, ξ)` where the pseudo-inverse discarded an eigenvalue.
    pub cutoff_cells: Vec<(f64, f64)>,
    pub cutoff_fraction: f64,
    /// More than half of the cells needed the cutoff.
    pub unstable: bool,
    /// Largest `|k|` and `|l|` of the analysis coefficients used.
    pub k_max: i64,
    pub l_max: i64,
    pub grid: (usize, usize),
}

fn integer_ratio(a: f64, b: f64, what: &str) -> Result<i64> {
    let r = a / b;
    if (r - r.round()).abs() > 1e-9 * r.abs().max(1.0) {
        return Err(Error::SamplingMismatch(format!(
            "{what}: {a} is not an integer multiple of the step {b}"
        )));
    }
    Ok(r.round() as i64)
}

/// Applies the frame operator `S` through analysis and synthesis with
/// coefficients `|k| <= K`, `|l| <= Λ`, integrals by the sampling rule.
fn frame_operator(f: &SampledSignal, w: &Window, lattice: &RationalLattice) -> (Vec<Complex64>, i64, i64) {
    let h = f.step();
    let (t0, t1) = (f.start(), f.end());
    let alpha = lattice.alpha();
    let beta = lattice.beta();
    let mass: f64 = h * f.values().iter().map(|v| v.norm()).sum::<f64>();
    let n = f.len();

    let (k_lo, k_hi) = match w.envelope() {
        DecayEnvelope::Exponential { c, rate, .. } => {
            let reach = if mass * c > 0.0 {
                ((mass * c / COEFF_TOL).ln() / rate).max(0.0)
            } else {
                0.0
            };
            (((t0 - reach) / alpha).floor() as i64, ((t1 + reach) / alpha).ceil() as i64)
        }
        DecayEnvelope::Compact { lo, hi, .. } => {
            (((t0 - hi) / alpha).floor() as i64, ((t1 - lo) / alpha).ceil() as i64)
        }
    };

    // windowed signals f·conj(T_{αk} g) and the translates T_{αk} g
    let atoms: Vec<(Vec<Complex64>, Vec<Complex64>)> = (k_lo..=k_hi)
        .into_par_iter()
        .map(|k| {
            let g: Vec<Complex64> = f.points().map(|t| w.eval(t - alpha * k as f64)).collect();
            let u = f.values().iter().zip(&g).map(|(fv, gv)| fv * gv.conj()).collect();
            (u, g)
        })
        .collect();

    let nyquist = ((0.5 / h) / beta).floor().max(1.0) as i64;
    let mut l_max = ((4.0 / beta).ceil() as i64).clamp(1, nyquist);
    let coeffs = loop {
        let phases: Vec<Vec<Complex64>> = (-l_max..=l_max)
            .map(|l| f.points().map(|t| Complex64::from_polar(1.0, -2.0 * PI * beta * l as f64 * t)).collect())
            .collect();
        let coeffs: Vec<Vec<Complex64>> = atoms
            .par_iter()
            .map(|(u, _)| {
                phases
                    .iter()
                    .map(|e| h * u.iter().zip(e).map(|(a, b)| a * b).sum::<Complex64>())
                    .collect()
            })
            .collect();
        let edge = coeffs
            .iter()
            .map(|c| c[0].norm().max(c[c.len() - 1].norm()))
            .fold(0.0f64, f64::max);
        if edge <= COEFF_TOL || l_max >= nyquist {
            break coeffs;
        }
        l_max = (2 * l_max).min(nyquist);
    };

    let mut sf = vec![Complex64::new(0.0, 0.0); n];
    for ((_, g), c) in atoms.iter().zip(&coeffs) {
        for (i, t) in f.points().enumerate() {
            if g[i] == Complex64::new(0.0, 0.0) {
                continue;
            }
            let mut acc = Complex64::new(0.0, 0.0);
            for (li, l) in (-l_max..=l_max).enumerate() {
                acc += c[li] * Complex64::from_polar(1.0, 2.0 * PI * beta * l as f64 * t);
            }
            sf[i] += acc * g[i];
        }
    }
    let k_abs = k_lo.abs().max(k_hi.abs());
    (sf, k_abs, l_max)
}

/// Reconstructs `f` from `Sf` by `(p/α) Z_vec^{-1}(pinv(A_g) Z_vec Sf)`.
///
/// The sampling grid must contain the origin and `α/p` must be a whole number
/// of steps.
pub fn reconstruct(
    f: &SampledSignal,
    w: &Window,
    lattice: &RationalLattice,
    eps: f64,
    pinv_tol: f64,
) -> Result<Reconstruction> {
    let h = f.step();
    let alpha = lattice.alpha();
    let p = lattice.p();
    let n_alpha = integer_ratio(alpha, h, "alpha")?;
    if n_alpha % p as i64 != 0 {
        return Err(Error::SamplingMismatch(format!(
            "alpha/p is not a whole number of steps ({n_alpha} steps per alpha, p = {p})"
        )));
    }
    let n0 = integer_ratio(f.start(), h, "grid start")?;
    let nx = (n_alpha / p as i64) as usize;

    let (sf, k_max, l_max) = frame_operator(f, w, lattice);

    // sample n sits at x' = (n0 + n) mod n_alpha, translate k = (x' - t)/α
    let place = |n: usize| -> (usize, i64) {
        let g = n0 + n as i64;
        let i = g.rem_euclid(n_alpha);
        (i as usize, (i - g) / n_alpha)
    };
    let (k_lo, k_hi) = (place(f.len() - 1).1, place(0).1);
    let span = (k_hi - k_lo + 1) as usize;
    let m = span + span % 2;

    let mut zsf = vec![Complex64::new(0.0, 0.0); n_alpha as usize * m];
    for (n, v) in sf.iter().enumerate() {
        let (i, k) = place(n);
        for j in 0..m {
            let phase = 2.0 * PI * ((k * j as i64).rem_euclid(m as i64)) as f64 / m as f64;
            zsf[i * m + j] += v * Complex64::from_polar(1.0, phase);
        }
    }

    let xis: Vec<f64> = (0..m).map(|j| j as f64 / (alpha * m as f64)).collect();
    let cells: Vec<Vec<(Vec<f64>, DMatrix<Complex64>)>> = (0..nx)
        .into_par_iter()
        .map(|i| {
            let series = RowSeries::new(w, lattice, i as f64 * h, eps)?;
            Ok(xis
                .iter()
                .map(|&xi| {
                    let a = series.matrices(xi).a;
                    let eig = a.symmetric_eigen();
                    (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let lambda_max = cells
        .iter()
        .flatten()
        .flat_map(|(ev, _)| ev.iter().copied())
        .fold(0.0f64, f64::max);
    let cutoff = pinv_tol * lambda_max;
    let scale = frame_operator_scale(lattice);

    let mut zf = vec![Complex64::new(0.0, 0.0); n_alpha as usize * m];
    let mut cutoff_cells = Vec::new();
    for (i, row) in cells.iter().enumerate() {
        for (j, (ev, vecs)) in row.iter().enumerate() {
            let v = DVector::from_fn(p, |r, _| zsf[(i + r * nx) * m + j]);
            let mut u = DVector::zeros(p);
            let mut dropped = false;
            for (s, &lambda) in ev.iter().enumerate() {
                if lambda > cutoff {
                    let e = vecs.column(s);
                    u += e * (e.dotc(&v) / lambda);
                } else {
                    dropped = true;
                }
            }
            if dropped {
                cutoff_cells.push((i as f64 * h, xis[j]));
            }
            for r in 0..p {
                zf[(i + r * nx) * m + j] = u[r] / scale;
            }
        }
    }

    let values = (0..f.len())
        .map(|n| {
            let (i, k) = place(n);
            let acc: Complex64 = (0..m)
                .map(|j| {
                    let phase = -2.0 * PI * ((k * j as i64).rem_euclid(m as i64)) as f64 / m as f64;
                    zf[i * m + j] * Complex64::from_polar(1.0, phase)
                })
                .sum();
            acc / m as f64
        })
        .collect();

    let total = nx * m;
    let cutoff_fraction = cutoff_cells.len() as f64 / total as f64;
    Ok(Reconstruction {
        signal: f.with_values(values),
        unstable: cutoff_fraction > 0.5,
        cutoff_cells,
        cutoff_fraction,
        k_max,
        l_max,
        grid: (nx, m),
    })
}
