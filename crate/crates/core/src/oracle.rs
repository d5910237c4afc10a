//! Brute-force completeness check: least-squares approximation of a test
//! function by the finite section
//! `{e^{2πiβlx} g(x - αk) : |k| <= K, |l| <= Λ}` of the Gabor system.
//!
//! Inner products are Riemann sums on a uniform grid of `[-T, T]`, so the
//! residual is that of an exact discrete least-squares problem.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::RationalLattice;
use crate::signal::SampledSignal;
use crate::window::{DecayEnvelope, Window};

/// Quadrature step of the section grid.
pub const GRID_STEP: f64 = 1.0 / 64.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GramDiagnostics {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub trace: f64,
    /// Bound on `max_i ∫_{|t|>T} |atom_i|²` from the window envelope.
    pub truncation_bound: f64,
}

/// A finite Gabor section sampled on a grid, with its Gram matrix.
#[derive(Debug, Clone)]
pub struct GaborSection {
    pub window_id: String,
    pub lattice: RationalLattice,
    pub k_max: usize,
    pub l_max: usize,
    grid: SampledSignal,
    /// Atoms in `(k, l)` order, `k` outer; `atoms[(n, i)]` is atom `i` at grid point `n`.
    atoms: DMatrix<Complex64>,
    pub gram: DMatrix<Complex64>,
    pub diagnostics: GramDiagnostics,
}

/// `T = max(8, 4αK)`.
pub fn default_half_width(alpha: f64, k_max: usize) -> f64 {
    (4.0 * alpha * k_max as f64).max(8.0)
}

impl GaborSection {
    pub fn new(w: &Window, lattice: &RationalLattice, k_max: usize, l_max: usize) -> Result<Self> {
        Self::with_half_width(w, lattice, k_max, l_max, default_half_width(lattice.alpha(), k_max))
    }

    /// A section on `[-half_width, half_width]`, rounded up to the grid step.
    pub fn with_half_width(
        w: &Window,
        lattice: &RationalLattice,
        k_max: usize,
        l_max: usize,
        half_width: f64,
    ) -> Result<Self> {
        let half_width = (half_width / GRID_STEP).ceil() * GRID_STEP;
        let (alpha, beta) = (lattice.alpha(), lattice.beta());
        if alpha * k_max as f64 > half_width {
            return Err(Error::InvalidArgument(format!(
                "section half width {half_width} does not cover translates up to {}",
                alpha * k_max as f64
            )));
        }
        let grid = SampledSignal::symmetric(half_width, GRID_STEP, |_| Complex64::new(0.0, 0.0))?;
        let n = grid.len();
        let index: Vec<(i64, i64)> = (-(k_max as i64)..=k_max as i64)
            .flat_map(|k| (-(l_max as i64)..=l_max as i64).map(move |l| (k, l)))
            .collect();
        let translates: Vec<Vec<Complex64>> = (-(k_max as i64)..=k_max as i64)
            .into_par_iter()
            .map(|k| grid.points().map(|t| w.eval(t - alpha * k as f64)).collect())
            .collect();
        let m = index.len();
        let atoms = DMatrix::from_fn(n, m, |r, c| {
            let (k, l) = index[c];
            let t = grid.point(r);
            translates[(k + k_max as i64) as usize][r] * Complex64::from_polar(1.0, 2.0 * PI * beta * l as f64 * t)
        });

        let h = GRID_STEP;
        let upper: Vec<Vec<Complex64>> = (0..m)
            .into_par_iter()
            .map(|j| {
                let cj = atoms.column(j);
                (0..=j).map(|i| h * atoms.column(i).dotc(&cj)).collect()
            })
            .collect();
        let gram = DMatrix::from_fn(m, m, |i, j| if i <= j { upper[j][i] } else { upper[i][j].conj() });

        let eig = gram.clone().symmetric_eigen();
        let lambda_min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        let lambda_max = eig.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let trace = (0..m).map(|i| gram[(i, i)].re).sum();
        let truncation_bound = match w.envelope() {
            DecayEnvelope::Exponential { c, rate, .. } => {
                let gap = half_width - alpha * k_max as f64;
                c * c * (-2.0 * rate * gap).exp() / rate
            }
            DecayEnvelope::Compact { lo, hi, sup } => {
                let reach = alpha * k_max as f64;
                if lo - reach >= -half_width && hi + reach <= half_width {
                    0.0
                } else {
                    sup * sup * (hi - lo)
                }
            }
        };

        Ok(Self {
            window_id: w.spec().id(),
            lattice: *lattice,
            k_max,
            l_max,
            grid,
            atoms,
            gram,
            diagnostics: GramDiagnostics {
                lambda_min,
                lambda_max,
                trace,
                truncation_bound,
            },
        })
    }

    pub fn len(&self) -> usize {
        self.atoms.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.ncols() == 0
    }

    /// The quadrature grid (with zero values).
    pub fn grid(&self) -> &SampledSignal {
        &self.grid
    }

    /// Samples `f` on the section grid.
    pub fn sample(&self, f: impl Fn(f64) -> Complex64) -> SampledSignal {
        self.grid.with_values(self.grid.points().map(f).collect())
    }

    /// Atom `i` on the grid.
    pub fn atom(&self, i: usize) -> SampledSignal {
        self.grid.with_values(self.atoms.column(i).iter().copied().collect())
    }
}

/// How the normal equations `G a = b` are solved.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Solver {
    /// `(G + ridge·I) a = b` by Cholesky; `None` uses `1e-10·trace(G)/dim`.
    Ridge { ridge: Option<f64> },
    /// Pseudo-inverse dropping eigenvalues below `rel_cutoff·λ_max`.
    Pinv { rel_cutoff: f64 },
}

impl Default for Solver {
    fn default() -> Self {
        Solver::Ridge { ridge: None }
    }
}

fn pinv_solve(gram: &DMatrix<Complex64>, b: &DVector<Complex64>, rel_cutoff: f64) -> DVector<Complex64> {
    let eig = gram.clone().symmetric_eigen();
    let lambda_max = eig.eigenvalues.iter().copied().fold(0.0f64, f64::max);
    let mut a = DVector::zeros(b.len());
    for (s, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda > rel_cutoff * lambda_max {
            let v = eig.eigenvectors.column(s);
            a += v * (v.dotc(b) / lambda);
        }
    }
    a
}

/// `‖f - Σ a_i atom_i‖ / ‖f‖` with `a` from the chosen solver.
///
/// A singular `G + ridge·I` (possible only for `ridge = 0`) falls back to the
/// pseudo-inverse at a cutoff of `dim·ε_mach`.
pub fn residual(f: &SampledSignal, section: &GaborSection, solver: Solver) -> Result<f64> {
    let grid = section.grid();
    if f.len() != grid.len() || (f.start() - grid.start()).abs() > 1e-12 || (f.step() - grid.step()).abs() > 1e-15 {
        return Err(Error::SamplingMismatch(
            "test function must be sampled on the section grid".into(),
        ));
    }
    let norm = f.norm();
    if norm == 0.0 {
        return Err(Error::InvalidArgument("test function is zero".into()));
    }
    let fv = DVector::from_column_slice(f.values());
    let b = section.atoms.adjoint() * &fv * Complex64::new(grid.step(), 0.0);
    let m = section.len();
    let a = match solver {
        Solver::Pinv { rel_cutoff } => pinv_solve(&section.gram, &b, rel_cutoff),
        Solver::Ridge { ridge } => {
            let ridge = ridge.unwrap_or(1e-10 * section.diagnostics.trace / m as f64);
            if ridge < 0.0 {
                return Err(Error::InvalidArgument(format!("ridge must be non-negative, got {ridge}")));
            }
            let shifted = &section.gram + DMatrix::<Complex64>::identity(m, m) * Complex64::new(ridge, 0.0);
            match shifted.cholesky() {
                Some(ch) => ch.solve(&b),
                None => pinv_solve(&section.gram, &b, m as f64 * f64::EPSILON),
            }
        }
    };
    let approx = &section.atoms * a;
    let r = f.with_values((fv - approx).iter().copied().collect());
    Ok(r.norm() / norm)
}

/// Residuals for sections `K = Λ = size`, all on the grid of the largest one.
pub fn residual_sweep(
    f: impl Fn(f64) -> Complex64,
    w: &Window,
    lattice: &RationalLattice,
    sizes: &[usize],
    solver: Solver,
) -> Result<Vec<(usize, f64)>> {
    let Some(&largest) = sizes.iter().max() else {
        return Ok(Vec::new());
    };
    let half_width = default_half_width(lattice.alpha(), largest);
    let mut out = Vec::with_capacity(sizes.len());
    let mut samples: Option<SampledSignal> = None;
    for &s in sizes {
        let section = GaborSection::with_half_width(w, lattice, s, s, half_width)?;
        let fs = samples.get_or_insert_with(|| section.sample(&f));
        out.push((s, residual(fs, &section, solver)?));
    }
    Ok(out)
}

/// Test functions for the oracle.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestFunction {
    /// Unit-norm `2^{1/2} e^{-2πt²}`.
    NarrowGaussian,
    /// A fixed-seed sum of eight Gaussian wave packets.
    RandomSmooth { seed: u64 },
    /// Smooth bump supported in `(lo, hi)`.
    Bump { lo: f64, hi: f64 },
}

impl TestFunction {
    pub fn evaluator(&self) -> Box<dyn Fn(f64) -> Complex64 + Send + Sync> {
        match *self {
            TestFunction::NarrowGaussian => {
                Box::new(|t| Complex64::new(2f64.sqrt() * (-2.0 * PI * t * t).exp(), 0.0))
            }
            TestFunction::RandomSmooth { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let packets: Vec<(Complex64, f64, f64, f64)> = (0..8)
                    .map(|_| {
                        let amp = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                        let centre = rng.random_range(-2.0..2.0);
                        let width = rng.random_range(0.5..1.5);
                        let freq = rng.random_range(-2.0..2.0);
                        (amp, centre, width, freq)
                    })
                    .collect();
                Box::new(move |t| {
                    packets
                        .iter()
                        .map(|&(a, c, s, nu)| {
                            a * (-PI * ((t - c) / s).powi(2)).exp() * Complex64::from_polar(1.0, 2.0 * PI * nu * t)
                        })
                        .sum()
                })
            }
            TestFunction::Bump { lo, hi } => Box::new(move |t| {
                if t <= lo || t >= hi {
                    return Complex64::new(0.0, 0.0);
                }
                let s = (t - lo) / (hi - lo);
                Complex64::new((4.0 - 1.0 / (s * (1.0 - s))).exp(), 0.0)
            }),
        }
    }
}
