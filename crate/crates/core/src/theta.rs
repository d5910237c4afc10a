//! Fourier coefficients of column minors of `Q_g` and completeness witnesses.
//!
//! For a column set `L = {l_0 < … < l_{p-1}}` the minor `det Q_g^L(x, ξ)` is a
//! Fourier series in `ξ`,
//!
//! ```text
//! det Q_g^L(x, ξ) = Σ_N Θ_g^L(x, N) e^{2πiαNξ},
//! Θ_g^L(x, N) = Σ_{k_0+…+k_{p-1} = N} Π_j g(x + αj/p - αk_j) · c_L(k),
//! ```
//!
//! with `c_L(k) = det[ω^{l_m (j - p k_j)}]_{j,m}`, `ω = e^{2πi/q}`. For windows
//! of the analytic families, `G(g, α, β)` is incomplete exactly when every
//! `Θ_g^L(x, N)` vanishes identically, so a single non-zero value certifies
//! completeness.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::lattice::RationalLattice;
use crate::window::{DecayEnvelope, Window};
use crate::zak::{truncation_index, DEFAULT_EPS};
use crate::zibulski::assemble;

/// Upper limit on the number of lattice points enumerated for one `Θ` value.
const MAX_ENUMERATION: f64 = 5e7;

/// Strictly increasing column indices `l_0 < … < l_{p-1}` in `0..q`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct ColumnSet(Vec<usize>);

impl ColumnSet {
    pub fn new(cols: Vec<usize>, q: usize) -> Result<Self> {
        if cols.is_empty() {
            return Err(Error::InvalidArgument("column set is empty".into()));
        }
        if cols.windows(2).any(|w| w[0] >= w[1]) || cols.iter().any(|&c| c >= q) {
            return Err(Error::InvalidArgument(format!(
                "columns {cols:?} must be strictly increasing and below q = {q}"
            )));
        }
        Ok(Self(cols))
    }

    /// All `C(q, p)` column sets in lexicographic order.
    pub fn all(p: usize, q: usize) -> Vec<ColumnSet> {
        let mut out = Vec::new();
        if p == 0 || p > q {
            return out;
        }
        let mut cur: Vec<usize> = (0..p).collect();
        loop {
            out.push(ColumnSet(cur.clone()));
            let Some(i) = (0..p).rev().find(|&i| cur[i] < q - p + i) else {
                return out;
            };
            cur[i] += 1;
            for j in i + 1..p {
                cur[j] = cur[j - 1] + 1;
            }
        }
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

fn roots_of_unity(q: usize) -> Vec<Complex64> {
    (0..q)
        .map(|e| Complex64::from_polar(1.0, 2.0 * PI * e as f64 / q as f64))
        .collect()
}

/// `c` from the residues `r_j = (j - p k_j) mod q`: zero when two coincide,
/// otherwise `det[ω^{l_m r_j}]`.
fn c_from_residues(cols: &[usize], residues: &[usize], omega: &[Complex64]) -> Complex64 {
    let q = omega.len();
    for (i, a) in residues.iter().enumerate() {
        if residues[i + 1..].contains(a) {
            return Complex64::new(0.0, 0.0);
        }
    }
    let p = cols.len();
    if p == 1 {
        return omega[(cols[0] * residues[0]) % q];
    }
    DMatrix::from_fn(p, p, |j, m| omega[(cols[m] * residues[j]) % q]).determinant()
}

/// `c_L(k) = Σ_σ sgn σ · Π_j ω^{σ(l_j)(j - p k_j)}`, evaluated as a determinant.
pub fn c_coeff(cols: &ColumnSet, k: &[i64], p: usize, q: usize) -> Complex64 {
    assert_eq!(k.len(), p, "k must have p entries");
    assert_eq!(cols.len(), p, "column set must have p entries");
    let residues: Vec<usize> = k
        .iter()
        .enumerate()
        .map(|(j, &kj)| (j as i64 - p as i64 * kj).rem_euclid(q as i64) as usize)
        .collect();
    c_from_residues(cols.as_slice(), &residues, &roots_of_unity(q))
}

/// Upper limit on the number of entries held in `c_L` lookup tables.
const MAX_TABLE: usize = 1 << 22;

fn table_size(p: usize, q: usize, tables: usize) -> Result<usize> {
    match (q as u64).checked_pow(p as u32) {
        Some(size) if size.saturating_mul(tables as u64) <= MAX_TABLE as u64 => Ok(size as usize),
        _ => Err(Error::InvalidArgument(format!(
            "c coefficient tables need {tables} x {q}^{p} entries; lattice too large"
        ))),
    }
}

/// `c_L` for every residue vector, indexed by `Σ_j r_j q^j`.
fn c_table(cols: &ColumnSet, q: usize) -> Result<Vec<Complex64>> {
    let p = cols.len();
    let omega = roots_of_unity(q);
    let size = table_size(p, q, 1)?;
    let mut residues = vec![0usize; p];
    Ok((0..size)
        .map(|mut idx| {
            for r in residues.iter_mut() {
                *r = idx % q;
                idx /= q;
            }
            c_from_residues(cols.as_slice(), &residues, &omega)
        })
        .collect())
}

/// Visits every `k ∈ [-K_0, K_0] × … × [-K_{p-1}, K_{p-1}]` with `Σ k_j = n`,
/// passing the offsets `k_j + K_j`.
fn for_each_constrained(radii: &[usize], n: i64, mut f: impl FnMut(&[usize])) {
    let p = radii.len();
    let last = p - 1;
    let mut idx = vec![0usize; p];
    let mut free_sum: i64 = -(radii[..last].iter().map(|&r| r as i64).sum::<i64>());
    loop {
        let k_last = n - free_sum;
        if k_last.abs() <= radii[last] as i64 {
            idx[last] = (k_last + radii[last] as i64) as usize;
            f(&idx);
        }
        // odometer over the free coordinates
        let mut j = 0;
        loop {
            if j == last {
                return;
            }
            if idx[j] < 2 * radii[j] {
                idx[j] += 1;
                free_sum += 1;
                break;
            }
            free_sum -= 2 * radii[j] as i64;
            idx[j] = 0;
            j += 1;
        }
    }
}

/// Window samples `g(x + αj/p - αk)`, `|k| <= K_j`, for one `x`.
struct ThetaRows {
    p: usize,
    q: usize,
    radii: Vec<usize>,
    /// `values[j][k + K_j]`
    values: Vec<Vec<Complex64>>,
    /// `residue_index[j][k + K_j] = ((j - p k) mod q)·q^j`
    residue_index: Vec<Vec<usize>>,
    tail_bound: f64,
}

impl ThetaRows {
    fn new(w: &Window, lattice: &RationalLattice, x: f64, eps: f64) -> Result<Self> {
        let (alpha, p, q) = (lattice.alpha(), lattice.p(), lattice.q());
        let env = w.envelope();
        let xs: Vec<f64> = (0..p).map(|j| x + alpha * j as f64 / p as f64).collect();
        let factorial: f64 = (1..=p).map(|i| i as f64).product();

        // per-row tails T_j and sums S_j >= Σ_k |g(x_j - αk)|
        let (radii, tails) = match env {
            DecayEnvelope::Compact { .. } => {
                let mut radii = Vec::with_capacity(p);
                for &xj in &xs {
                    radii.push(truncation_index(&env, alpha, xj, eps)?.0);
                }
                (radii, vec![0.0; p])
            }
            DecayEnvelope::Exponential { .. } => {
                let total = env.lattice_total(alpha);
                let per_row = eps / (factorial * p as f64 * total.max(1.0).powi(p as i32 - 1));
                let mut radii = Vec::with_capacity(p);
                let mut tails = Vec::with_capacity(p);
                for &xj in &xs {
                    let (k, t) = truncation_index(&env, alpha, xj, per_row)?;
                    radii.push(k);
                    tails.push(t);
                }
                (radii, tails)
            }
        };
        let work: f64 = radii[..p - 1].iter().map(|&r| (2 * r + 1) as f64).product();
        if work > MAX_ENUMERATION {
            return Err(Error::InvalidArgument(format!(
                "theta enumeration needs {work:.2e} terms (p = {p}); lattice too large"
            )));
        }

        let values: Vec<Vec<Complex64>> = xs
            .iter()
            .zip(&radii)
            .map(|(&xj, &r)| {
                (-(r as i64)..=r as i64)
                    .map(|k| {
                        let t = xj - alpha * k as f64;
                        if env.bound(t) > 0.0 {
                            w.eval(t)
                        } else {
                            Complex64::new(0.0, 0.0)
                        }
                    })
                    .collect()
            })
            .collect();
        let residue_index = radii
            .iter()
            .enumerate()
            .map(|(j, &r)| {
                let weight = q.pow(j as u32);
                (-(r as i64)..=r as i64)
                    .map(|k| (j as i64 - p as i64 * k).rem_euclid(q as i64) as usize * weight)
                    .collect()
            })
            .collect();

        let sums: Vec<f64> = values
            .iter()
            .zip(&tails)
            .map(|(v, t)| v.iter().map(|z| z.norm()).sum::<f64>() + t)
            .collect();
        let tail_bound = factorial
            * (0..p)
                .map(|j| {
                    tails[j]
                        * (0..p)
                            .filter(|&i| i != j)
                            .map(|i| sums[i])
                            .product::<f64>()
                })
                .sum::<f64>();

        Ok(Self {
            p,
            q,
            radii,
            values,
            residue_index,
            tail_bound,
        })
    }

    /// `(Θ, rounding-error estimate)` for one column-set table.
    fn theta(&self, ctab: &[Complex64], n: i64) -> (Complex64, f64) {
        debug_assert_eq!(ctab.len(), self.q.pow(self.p as u32));
        let mut value = Complex64::new(0.0, 0.0);
        let mut magnitude = 0.0;
        let mut count = 0usize;
        for_each_constrained(&self.radii, n, |idx| {
            let mut r = 0;
            for (j, &i) in idx.iter().enumerate() {
                r += self.residue_index[j][i];
            }
            let c = ctab[r];
            if c.re == 0.0 && c.im == 0.0 {
                return;
            }
            let mut prod = c;
            for (j, &i) in idx.iter().enumerate() {
                prod *= self.values[j][i];
            }
            value += prod;
            magnitude += prod.norm();
            count += 1;
        });
        let rounding = magnitude * (count + 4 * self.p + 8) as f64 * f64::EPSILON;
        (value, rounding)
    }
}

/// `Θ_g^L(x, N)` and a bound on its error (certified truncation tail plus a
/// floating-point rounding estimate).
pub fn theta(
    w: &Window,
    lattice: &RationalLattice,
    cols: &ColumnSet,
    x: f64,
    n: i64,
    eps: f64,
) -> Result<(Complex64, f64)> {
    check_cols(cols, lattice)?;
    let rows = ThetaRows::new(w, lattice, x, eps)?;
    let (value, rounding) = rows.theta(&c_table(cols, lattice.q())?, n);
    Ok((value, rows.tail_bound + rounding))
}

fn check_cols(cols: &ColumnSet, lattice: &RationalLattice) -> Result<()> {
    if cols.len() != lattice.p() || cols.as_slice().iter().any(|&c| c >= lattice.q()) {
        return Err(Error::InvalidArgument(format!(
            "column set {:?} does not fit p = {}, q = {}",
            cols.as_slice(),
            lattice.p(),
            lattice.q()
        )));
    }
    Ok(())
}

/// The Gaussian leading coefficient
/// `s_0(N) = Σ_{k_0..k_{p-2}} exp(-πα²[Σ_{j<p-1}(j/p - k_j)² + ((p-1)/p - N + Σk_j)²])·c_L(k)`
/// with `k_{p-1} = N - Σ_{j<p-1} k_j`, and a bound on the truncation tail.
pub fn gaussian_s0(lattice: &RationalLattice, cols: &ColumnSet, n: i64, eps: f64) -> Result<(Complex64, f64)> {
    check_cols(cols, lattice)?;
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    let (alpha, p, q) = (lattice.alpha(), lattice.p(), lattice.q());
    let a2 = PI * alpha * alpha;
    let factorial: f64 = (1..=p).map(|i| i as f64).product();
    // |j/p - k| >= |k| - 1: one coordinate's tail beyond K is at most
    // 2e^{-πα²K²}/(1 - e^{-πα²}); each full sum is at most 2 + 1/α
    let row_sum = 2.0 + 1.0 / alpha;
    let tail = |k: usize| 2.0 * (-a2 * (k * k) as f64).exp() / (1.0 - (-a2).exp());
    let bound = |k: usize| factorial * (p - 1) as f64 * tail(k) * row_sum.powi(p as i32 - 2);
    let mut radius = 0usize;
    if p > 1 {
        while bound(radius) > eps {
            radius += 1;
        }
    }
    let ctab = c_table(cols, q)?;
    let omega_index = |j: usize, k: i64| (j as i64 - p as i64 * k).rem_euclid(q as i64) as usize * q.pow(j as u32);

    // the last coordinate is unconstrained in size here: give it a radius
    // wide enough to hold every value N - Σ k_j
    let mut radii = vec![radius; p];
    radii[p - 1] = (p - 1) * radius + n.unsigned_abs() as usize;
    let mut value = Complex64::new(0.0, 0.0);
    for_each_constrained(&radii, n, |idx| {
        let ks: Vec<i64> = idx.iter().zip(&radii).map(|(&i, &r)| i as i64 - r as i64).collect();
        let r: usize = ks.iter().enumerate().map(|(j, &k)| omega_index(j, k)).sum();
        let c = ctab[r];
        if c.re == 0.0 && c.im == 0.0 {
            return;
        }
        let e: f64 = ks
            .iter()
            .enumerate()
            .map(|(j, &k)| (j as f64 / p as f64 - k as f64).powi(2))
            .sum();
        value += c * (-a2 * e).exp();
    });
    Ok((value, if p > 1 { bound(radius) } else { 0.0 }))
}

/// A triple `(L, x, N)` with `|Θ_g^L(x, N)| > error_bound`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaWitness {
    pub columns: ColumnSet,
    pub x: f64,
    pub n: i64,
    pub value: Complex64,
    pub error_bound: f64,
}

impl Serialize for ThetaWitness {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("ThetaWitness", 6)?;
        st.serialize_field("columns", &self.columns)?;
        st.serialize_field("x", &self.x)?;
        st.serialize_field("N", &self.n)?;
        st.serialize_field("re", &self.value.re)?;
        st.serialize_field("im", &self.value.im)?;
        st.serialize_field("error_bound", &self.error_bound)?;
        st.end()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NoWitnessReason {
    /// Nothing above the threshold in the searched range; says nothing about
    /// incompleteness.
    NotFound,
    /// The window is not in the analytic families (compact support), where
    /// vanishing Θ values do not characterise incompleteness.
    OutsideAnalyticClass,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    Witness(ThetaWitness),
    NoWitness { reason: NoWitnessReason },
    /// `p > q`: `Q_g` has rank at most `q < p` everywhere.
    IncompleteByDensity,
}

impl Certificate {
    pub fn witness(&self) -> Option<&ThetaWitness> {
        match self {
            Certificate::Witness(w) => Some(w),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertificateSearch {
    /// Inclusive range of `N`.
    pub n_range: (i64, i64),
    /// `x` samples `iα/x_samples`, `i = 0..x_samples`.
    pub x_samples: usize,
    /// Required margin `|Θ| - error_bound > tau`.
    pub tau: f64,
    /// Truncation tolerance for each `Θ`.
    pub eps: f64,
}

impl Default for CertificateSearch {
    fn default() -> Self {
        Self {
            n_range: (-8, 8),
            x_samples: 64,
            tau: 1e-6,
            eps: 1e-10,
        }
    }
}

/// Searches all column sets, `N` and `x` samples and returns the witness of
/// largest `|Θ|` (ties: first in `(L, N, x)` order).
pub fn completeness_certificate(
    w: &Window,
    lattice: &RationalLattice,
    search: &CertificateSearch,
) -> Result<Certificate> {
    if lattice.is_undersampled() {
        return Ok(Certificate::IncompleteByDensity);
    }
    if !w.is_analytic_class() {
        return Ok(Certificate::NoWitness {
            reason: NoWitnessReason::OutsideAnalyticClass,
        });
    }
    if search.x_samples == 0 || search.n_range.0 > search.n_range.1 {
        return Err(Error::InvalidArgument("empty certificate search range".into()));
    }
    let (p, q) = (lattice.p(), lattice.q());
    let set_count: f64 = (0..p).map(|i| (q - i) as f64 / (i + 1) as f64).product();
    if set_count > MAX_TABLE as f64 {
        return Err(Error::InvalidArgument(format!(
            "{set_count:.2e} column sets for p = {p}, q = {q}; lattice too large"
        )));
    }
    let column_sets = ColumnSet::all(p, q);
    table_size(p, q, column_sets.len())?;
    let tables = column_sets
        .iter()
        .map(|c| c_table(c, q))
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = (0..search.x_samples)
        .map(|i| lattice.alpha() * i as f64 / search.x_samples as f64)
        .collect();

    // best per x as (|value|, key, witness); key orders ties lexicographically
    let per_x: Vec<Option<(f64, (usize, i64, usize), ThetaWitness)>> = xs
        .par_iter()
        .enumerate()
        .map(|(xi, &x)| {
            let rows = ThetaRows::new(w, lattice, x, search.eps)?;
            let mut best: Option<(f64, (usize, i64, usize), ThetaWitness)> = None;
            for (ci, tab) in tables.iter().enumerate() {
                for n in search.n_range.0..=search.n_range.1 {
                    let (value, rounding) = rows.theta(tab, n);
                    let err = rows.tail_bound + rounding;
                    let mag = value.norm();
                    if mag - err <= search.tau {
                        continue;
                    }
                    let key = (ci, n, xi);
                    if best.as_ref().is_none_or(|b| mag > b.0) {
                        best = Some((
                            mag,
                            key,
                            ThetaWitness {
                                columns: column_sets[ci].clone(),
                                x,
                                n,
                                value,
                                error_bound: err,
                            },
                        ));
                    }
                }
            }
            Ok(best)
        })
        .collect::<Result<_>>()?;

    let best = per_x
        .into_iter()
        .flatten()
        .reduce(|a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a });
    Ok(match best {
        Some((_, _, witness)) => Certificate::Witness(witness),
        None => Certificate::NoWitness {
            reason: NoWitnessReason::NotFound,
        },
    })
}

/// `max_ξ |det Q_g^L(x, ξ) - Σ_{|N| <= n_max} Θ_g^L(x, N) e^{2πiαNξ}|`.
pub fn fourier_consistency(
    w: &Window,
    lattice: &RationalLattice,
    cols: &ColumnSet,
    x: f64,
    n_max: i64,
    xi_samples: &[f64],
) -> Result<f64> {
    check_cols(cols, lattice)?;
    let alpha = lattice.alpha();
    let p = lattice.p();
    let count = (2 * n_max + 1) as f64;
    let rows = ThetaRows::new(w, lattice, x, 1e-10 / count)?;
    let tab = c_table(cols, lattice.q())?;
    let coeffs: Vec<(i64, Complex64)> = (-n_max..=n_max).map(|n| (n, rows.theta(&tab, n).0)).collect();
    let mut worst = 0.0f64;
    for &xi in xi_samples {
        let q = assemble(w, lattice, x, xi, DEFAULT_EPS)?.q;
        let minor = DMatrix::from_fn(p, p, |j, m| q[(j, cols.as_slice()[m])]);
        let det = if p == 1 { minor[(0, 0)] } else { minor.determinant() };
        let series: Complex64 = coeffs
            .iter()
            .map(|&(n, t)| t * Complex64::from_polar(1.0, 2.0 * PI * alpha * n as f64 * xi))
            .sum();
        worst = worst.max((det - series).norm());
    }
    Ok(worst)
}
