//! Zibulski–Zeevi matrices `Q_g(x, ξ)` (`p × q`) and `A_g = Q_g Q_g*`.
//!
//! Completeness of `G(g, α, β)` is equivalent to `Q_g` having full rank `p`
//! almost everywhere; the frame property to full rank everywhere. Sampling
//! cannot decide an almost-everywhere statement, so the verdicts here are
//! numerical evidence only. Rigorous completeness certificates live in
//! [`crate::theta`].

mod reconstruct;

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::lattice::RationalLattice;
use crate::window::Window;
use crate::zak::ZakSeries;

pub use reconstruct::{reconstruct, Reconstruction, DEFAULT_PINV_TOL};

/// Relative singular-value threshold below which `Q_g` counts as rank deficient.
pub const DEFAULT_TAU_RANK: f64 = 1e-8;

/// `Q_g`, `A_g` and the singular values of `Q_g` at one point.
#[derive(Debug, Clone)]
pub struct ZZMatrices {
    pub q: DMatrix<Complex64>,
    pub a: DMatrix<Complex64>,
    /// Singular values of `Q_g`, descending, length `min(p, q)`.
    pub singular_values: Vec<f64>,
}

impl ZZMatrices {
    fn from_q(q: DMatrix<Complex64>) -> Self {
        let a = &q * q.adjoint();
        let mut singular_values: Vec<f64> = q.clone().svd(false, false).singular_values.iter().copied().collect();
        singular_values.sort_by(|x, y| y.total_cmp(x));
        Self {
            q,
            a,
            singular_values,
        }
    }

    /// `|det A_g|` from an LU factorisation of `A_g`.
    pub fn det_a(&self) -> f64 {
        self.a.clone().determinant().norm()
    }

    pub fn sigma_max(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }

    /// The `p`-th singular value of `Q_g`; zero when `p > q`.
    pub fn sigma_p(&self) -> f64 {
        if self.q.nrows() > self.q.ncols() {
            0.0
        } else {
            self.singular_values.last().copied().unwrap_or(0.0)
        }
    }

    pub fn rank_deficient(&self, tau: f64) -> bool {
        let s1 = self.sigma_max();
        s1 < tau || self.sigma_p() < tau * s1
    }
}

/// Zak series for the `p` rows `x + αj/p`, reusable for every `ξ`.
pub(crate) struct RowSeries {
    lattice: RationalLattice,
    rows: Vec<ZakSeries>,
}

impl RowSeries {
    pub(crate) fn new(w: &Window, lattice: &RationalLattice, x: f64, eps: f64) -> Result<Self> {
        let alpha = lattice.alpha();
        let p = lattice.p();
        let rows = (0..p)
            .map(|j| ZakSeries::new(w, alpha, x + alpha * j as f64 / p as f64, eps))
            .collect::<Result<_>>()?;
        Ok(Self {
            lattice: *lattice,
            rows,
        })
    }

    /// `Q_{jk} = Z_α g(x + αj/p, ξ - βk) e^{2πijk/q}`.
    pub(crate) fn q_matrix(&self, xi: f64) -> DMatrix<Complex64> {
        let (p, q) = (self.lattice.p(), self.lattice.q());
        let beta = self.lattice.beta();
        DMatrix::from_fn(p, q, |j, k| {
            let phase = Complex64::from_polar(1.0, 2.0 * PI * ((j * k) % q) as f64 / q as f64);
            self.rows[j].eval(xi - beta * k as f64).value * phase
        })
    }

    pub(crate) fn matrices(&self, xi: f64) -> ZZMatrices {
        ZZMatrices::from_q(self.q_matrix(xi))
    }
}

pub fn assemble(
    w: &Window,
    lattice: &RationalLattice,
    x: f64,
    xi: f64,
    eps: f64,
) -> Result<ZZMatrices> {
    Ok(RowSeries::new(w, lattice, x, eps)?.matrices(xi))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldPoint {
    pub x: f64,
    pub xi: f64,
    pub det_a_abs: f64,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub deficient: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stats {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

impl Stats {
    fn of(values: impl Iterator<Item = f64>) -> Self {
        let (mut min, mut max, mut sum, mut n) = (f64::INFINITY, f64::NEG_INFINITY, 0.0, 0usize);
        for v in values {
            min = min.min(v);
            max = max.max(v);
            sum += v;
            n += 1;
        }
        Self {
            min,
            max,
            mean: sum / n as f64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldSummary {
    pub det_a_abs: Stats,
    pub sigma_min: Stats,
    pub sigma_max: Stats,
    pub deficient_fraction: f64,
}

/// Sampled `Q_g` diagnostics over the midpoint grid of the fundamental domain
/// `[0, α/p) × [0, 1/α)`.
#[derive(Debug, Clone)]
pub struct ZZField {
    pub lattice: RationalLattice,
    pub window_id: String,
    pub nx: usize,
    pub nxi: usize,
    pub eps: f64,
    pub tau_rank: f64,
    /// Row-major in `x`: point `(i, j)` is at index `i * nxi + j`.
    pub points: Vec<FieldPoint>,
    pub summary: FieldSummary,
}

/// Midpoints `(i + 1/2)·width/n`.
pub fn midpoints(width: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| (i as f64 + 0.5) * width / n as f64)
}

pub fn grid_scan(
    w: &Window,
    lattice: &RationalLattice,
    nx: usize,
    nxi: usize,
    eps: f64,
    tau_rank: f64,
) -> Result<ZZField> {
    if nx < 2 || nxi < 2 {
        return Err(crate::Error::InvalidArgument(format!(
            "grid needs at least 2x2 points, got {nx}x{nxi}"
        )));
    }
    let xs: Vec<f64> = midpoints(lattice.x_period(), nx).collect();
    let xis: Vec<f64> = midpoints(lattice.xi_period(), nxi).collect();
    let rows: Vec<Vec<FieldPoint>> = xs
        .par_iter()
        .map(|&x| {
            let series = RowSeries::new(w, lattice, x, eps)?;
            Ok(xis
                .iter()
                .map(|&xi| {
                    let m = series.matrices(xi);
                    FieldPoint {
                        x,
                        xi,
                        det_a_abs: m.det_a(),
                        sigma_min: m.sigma_p(),
                        sigma_max: m.sigma_max(),
                        deficient: m.rank_deficient(tau_rank),
                    }
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let points: Vec<FieldPoint> = rows.into_iter().flatten().collect();
    let summary = FieldSummary {
        det_a_abs: Stats::of(points.iter().map(|p| p.det_a_abs)),
        sigma_min: Stats::of(points.iter().map(|p| p.sigma_min)),
        sigma_max: Stats::of(points.iter().map(|p| p.sigma_max)),
        deficient_fraction: points.iter().filter(|p| p.deficient).count() as f64 / points.len() as f64,
    };
    Ok(ZZField {
        lattice: *lattice,
        window_id: w.spec().id(),
        nx,
        nxi,
        eps,
        tau_rank,
        points,
        summary,
    })
}

/// The scalar `α/p = 1/(qβ)` in `Z_vec(Sf) = (α/p)·A_g·Z_vec(f)`.
pub fn frame_operator_scale(lattice: &RationalLattice) -> f64 {
    lattice.alpha() / lattice.p() as f64
}

/// Grid estimates of the optimal frame bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrameBounds {
    pub lower: f64,
    pub upper: f64,
}

/// `(s·min σ_p², s·max σ_1²)` over the grid, `s` from [`frame_operator_scale`].
pub fn frame_bounds(field: &ZZField) -> FrameBounds {
    let s = frame_operator_scale(&field.lattice);
    FrameBounds {
        lower: s * field.summary.sigma_min.min.powi(2),
        upper: s * field.summary.sigma_max.max.powi(2),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Yes,
    No,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerdictConfig {
    /// Deficient fraction above which (on both grids) completeness is refuted.
    pub deficient_threshold: f64,
    /// Minimum ratio `A_coarse / A_fine` per grid doubling read as a zero of `det A_g`.
    pub decay_factor: f64,
    /// Relative change of `A_est` accepted as stabilised.
    pub stable_tolerance: f64,
}

impl Default for VerdictConfig {
    fn default() -> Self {
        Self {
            deficient_threshold: 0.01,
            decay_factor: 3.0,
            stable_tolerance: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerdictEvidence {
    pub deficient_fraction: [f64; 2],
    pub min_det_a: [f64; 2],
    pub lower_bound: [f64; 2],
    pub upper_bound: [f64; 2],
    pub det_noise_floor: f64,
    pub lower_noise_floor: f64,
    pub notes: Vec<String>,
}

/// Numerical (non-rigorous) verdicts from a grid and its refinement.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub complete: Decision,
    pub frame: Decision,
    pub evidence: VerdictEvidence,
}

/// Compares a grid scan with its refinement (the second field should have
/// twice the points per axis).
pub fn verdict(coarse: &ZZField, fine: &ZZField, cfg: &VerdictConfig) -> Verdict {
    let lattice = fine.lattice;
    let (p, q) = (lattice.p() as f64, lattice.q() as f64);
    let bc = frame_bounds(coarse);
    let bf = frame_bounds(fine);
    // singular values move by at most the accumulated truncation error
    let s_noise = 10.0 * fine.eps * (p * q).sqrt();
    let s_max = fine.summary.sigma_max.max;
    let det_noise = (s_max + s_noise).powf(2.0 * p) - s_max.powf(2.0 * p);
    let lower_noise = frame_operator_scale(&lattice) * s_noise * s_noise;
    let mut notes = Vec::new();

    let fc = coarse.summary.deficient_fraction;
    let ff = fine.summary.deficient_fraction;
    let complete = if lattice.is_undersampled() {
        notes.push("p > q: rank of Q_g is at most q < p everywhere".into());
        Decision::No
    } else if fc > cfg.deficient_threshold && ff > cfg.deficient_threshold {
        notes.push(format!(
            "rank deficient on {:.1}% / {:.1}% of the coarse / fine grid",
            100.0 * fc,
            100.0 * ff
        ));
        Decision::No
    } else if fc == 0.0 && ff == 0.0 && fine.summary.det_a_abs.min > det_noise {
        Decision::Yes
    } else {
        Decision::Inconclusive
    };

    let frame = if complete == Decision::No {
        Decision::No
    } else if bf.lower <= lower_noise || bc.lower >= cfg.decay_factor * bf.lower {
        notes.push(format!(
            "lower bound estimate decays {:.2}x under refinement",
            bc.lower / bf.lower
        ));
        Decision::No
    } else if (bc.lower - bf.lower).abs() <= cfg.stable_tolerance * bf.lower {
        Decision::Yes
    } else {
        Decision::Inconclusive
    };

    Verdict {
        complete,
        frame,
        evidence: VerdictEvidence {
            deficient_fraction: [fc, ff],
            min_det_a: [coarse.summary.det_a_abs.min, fine.summary.det_a_abs.min],
            lower_bound: [bc.lower, bf.lower],
            upper_bound: [bc.upper, bf.upper],
            det_noise_floor: det_noise,
            lower_noise_floor: lower_noise,
            notes,
        },
    }
}
