//! Serializable reports. Field order is fixed by the struct definitions, so
//! identical inputs give byte-identical JSON.

use std::collections::BTreeMap;

use gabor_zz::oracle::{Solver, TestFunction};
use gabor_zz::theta::Certificate;
use gabor_zz::zibulski::{frame_bounds, FieldSummary, FrameBounds, Verdict, VerdictEvidence};
use gabor_zz::{Decision, RationalLattice, ZZField};
use serde::Serialize;

use crate::window_json::WindowConfig;

#[derive(Debug, Clone, Serialize)]
pub struct Tool {
    pub name: &'static str,
    pub version: &'static str,
}

pub const TOOL: Tool = Tool {
    name: "gabor-zz",
    version: env!("CARGO_PKG_VERSION"),
};

#[derive(Debug, Clone, Serialize)]
pub struct LatticeInfo {
    pub alpha: f64,
    pub beta: f64,
    pub p: usize,
    pub q: usize,
    pub density: f64,
}

impl From<&RationalLattice> for LatticeInfo {
    fn from(l: &RationalLattice) -> Self {
        Self {
            alpha: l.alpha(),
            beta: l.beta(),
            p: l.p(),
            q: l.q(),
            density: l.density(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GridInfo {
    pub coarse: [usize; 2],
    pub fine: [usize; 2],
    pub eps: f64,
    pub tau_rank: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanSummary {
    pub nx: usize,
    pub nxi: usize,
    #[serde(flatten)]
    pub summary: FieldSummary,
    pub frame_bounds: FrameBounds,
}

impl From<&ZZField> for ScanSummary {
    fn from(f: &ZZField) -> Self {
        Self {
            nx: f.nx,
            nxi: f.nxi,
            summary: f.summary,
            frame_bounds: frame_bounds(f),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ZibulskiSection {
    pub coarse: ScanSummary,
    pub fine: ScanSummary,
    pub evidence: VerdictEvidence,
}

#[derive(Debug, Clone, Serialize)]
pub struct SearchInfo {
    pub n_min: i64,
    pub n_max: i64,
    pub x_samples: usize,
    pub tau: f64,
    pub eps: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ThetaSection {
    pub search: SearchInfo,
    pub certificate: Certificate,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SweepRow {
    pub size: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleSection {
    pub test_function: TestFunction,
    pub solver: Solver,
    pub sweep: Vec<SweepRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Answer {
    Yes,
    No,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Tier {
    /// Backed by a Θ witness with a certified error bound.
    Certified,
    /// Sampled evidence only.
    Numerical,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct Claim {
    pub answer: Answer,
    pub tier: Tier,
    pub basis: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdicts {
    pub complete: Claim,
    pub frame: Claim,
}

#[derive(Debug, Clone, Serialize)]
pub struct StageError {
    pub stage: String,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub tool: Tool,
    pub window: WindowConfig,
    pub window_id: String,
    pub lattice: LatticeInfo,
    pub grid: GridInfo,
    pub zibulski: Option<ZibulskiSection>,
    pub theta: Option<ThetaSection>,
    pub oracle: Option<OracleSection>,
    pub verdicts: Verdicts,
    pub errors: Vec<StageError>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<BTreeMap<String, f64>>,
}

fn claim(answer: Answer, tier: Tier, basis: impl Into<String>) -> Claim {
    Claim {
        answer,
        tier,
        basis: basis.into(),
    }
}

/// Combines the certificate and the grid verdict. Incompleteness is never
/// reported as certified.
pub fn verdicts(cert: Option<&Certificate>, verdict: Option<&Verdict>) -> Verdicts {
    let complete = match (cert, verdict) {
        (Some(Certificate::Witness(w)), _) => claim(
            Answer::Yes,
            Tier::Certified,
            format!(
                "Θ witness: columns {:?}, x = {}, N = {}, |Θ| = {:.6e} > error bound {:.3e}",
                w.columns.as_slice(),
                w.x,
                w.n,
                w.value.norm(),
                w.error_bound
            ),
        ),
        (Some(Certificate::IncompleteByDensity), _) => claim(
            Answer::No,
            Tier::Numerical,
            "p > q: Q_g has rank at most q < p at every point",
        ),
        (_, Some(v)) if v.complete == Decision::No => claim(
            Answer::No,
            Tier::Numerical,
            format!(
                "Q_g rank deficient on {:.2}% / {:.2}% of the coarse / fine grid",
                100.0 * v.evidence.deficient_fraction[0],
                100.0 * v.evidence.deficient_fraction[1]
            ),
        ),
        (_, Some(v)) if v.complete == Decision::Yes => claim(
            Answer::Yes,
            Tier::Numerical,
            "Q_g has full rank at every grid point of both refinements; no Θ witness available",
        ),
        _ => claim(Answer::Inconclusive, Tier::Inconclusive, "no witness and no stable grid evidence"),
    };
    let frame = match verdict {
        _ if complete.answer == Answer::No => claim(Answer::No, Tier::Numerical, "the system is not complete"),
        Some(v) => {
            let [a0, a1] = v.evidence.lower_bound;
            match v.frame {
                Decision::Yes => claim(
                    Answer::Yes,
                    Tier::Numerical,
                    format!("lower frame bound estimate stable under refinement: {a0:.6e} -> {a1:.6e}"),
                ),
                Decision::No => claim(
                    Answer::No,
                    Tier::Numerical,
                    format!("lower frame bound estimate decays under refinement: {a0:.6e} -> {a1:.6e}"),
                ),
                Decision::Inconclusive => claim(
                    Answer::Inconclusive,
                    Tier::Inconclusive,
                    format!("lower frame bound estimate neither stable nor decaying: {a0:.6e} -> {a1:.6e}"),
                ),
            }
        }
        None => claim(Answer::Inconclusive, Tier::Inconclusive, "grid scan unavailable"),
    };
    Verdicts { complete, frame }
}

#[cfg(test)]
mod tests {
    use super::*;
    use gabor_zz::theta::NoWitnessReason;

    #[test]
    fn density_is_never_certified() {
        let v = verdicts(Some(&Certificate::IncompleteByDensity), None);
        assert_eq!(v.complete.answer, Answer::No);
        assert_eq!(v.complete.tier, Tier::Numerical);
        assert_eq!(v.frame.answer, Answer::No);
    }

    #[test]
    fn nothing_known() {
        let cert = Certificate::NoWitness {
            reason: NoWitnessReason::NotFound,
        };
        let v = verdicts(Some(&cert), None);
        assert_eq!(v.complete.tier, Tier::Inconclusive);
        assert_eq!(v.frame.tier, Tier::Inconclusive);
    }
}
