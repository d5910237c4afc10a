//! Agreement between the independent completeness tools: Θ witnesses, grid
//! verdicts and least-squares residuals.

use std::f64::consts::PI;

use gabor_zz::oracle::{residual_sweep, Solver, TestFunction};
use gabor_zz::zibulski::{grid_scan, verdict, Decision, VerdictConfig, DEFAULT_TAU_RANK};
use gabor_zz::{completeness_certificate, CertificateSearch, RationalLattice, Window, WindowSpec, DEFAULT_EPS};
use num_complex::Complex64;

fn zoo() -> Vec<Window> {
    let one = Complex64::new(1.0, 0.0);
    [
        WindowSpec::gaussian(),
        WindowSpec::hermite(1),
        WindowSpec::hermite(2),
        WindowSpec::RationalGaussian {
            num: vec![one],
            den: vec![one, Complex64::new(0.0, 0.0), one],
            gamma: PI,
        },
        WindowSpec::TotallyPositiveGaussian {
            deltas: vec![0.5],
            gamma: PI,
        },
        WindowSpec::bump(0.0, 0.6),
    ]
    .into_iter()
    .map(|s| Window::new(s).unwrap())
    .collect()
}

#[test]
fn witnesses_agree_with_residuals() {
    let f = TestFunction::RandomSmooth { seed: 2 }.evaluator();
    let mut witnessed = 0;
    for w in zoo() {
        for (p, q) in [(1, 1), (1, 2), (2, 3)] {
            let l = RationalLattice::new(1.0, p, q).unwrap();
            let cert = completeness_certificate(&w, &l, &CertificateSearch::default()).unwrap();
            let c = grid_scan(&w, &l, 16, 16, DEFAULT_EPS, DEFAULT_TAU_RANK).unwrap();
            let fine = grid_scan(&w, &l, 32, 32, DEFAULT_EPS, DEFAULT_TAU_RANK).unwrap();
            let v = verdict(&c, &fine, &VerdictConfig::default());
            if cert.witness().is_none() && v.complete != Decision::No {
                continue;
            }
            let sweep = residual_sweep(&f, &w, &l, &[2, 4, 8], Solver::default()).unwrap();
            let last = sweep.last().unwrap().1;
            if cert.witness().is_some() {
                witnessed += 1;
                assert_ne!(v.complete, Decision::No, "{:?} {p}/{q}", w.spec());
                assert!(last < 0.5, "{:?} {p}/{q}: {sweep:?}", w.spec());
            }
            if v.complete == Decision::No {
                assert!(sweep.iter().all(|&(_, r)| r > 0.2), "{:?} {p}/{q}: {sweep:?}", w.spec());
            }
        }
    }
    assert_eq!(witnessed, 15);
}

#[test]
fn short_bump_is_incomplete_everywhere_it_should_be() {
    // support [0, 0.6] leaves a gap in every period of length 1
    let w = Window::new(WindowSpec::bump(0.0, 0.6)).unwrap();
    let l = RationalLattice::new(1.0, 1, 2).unwrap();
    let c = grid_scan(&w, &l, 32, 32, DEFAULT_EPS, DEFAULT_TAU_RANK).unwrap();
    let fine = grid_scan(&w, &l, 64, 64, DEFAULT_EPS, DEFAULT_TAU_RANK).unwrap();
    let v = verdict(&c, &fine, &VerdictConfig::default());
    assert_eq!(v.complete, Decision::No);
    // the gap is 40% of each period; the bump is also below tolerance near its edges
    assert!(fine.summary.deficient_fraction >= 0.4);
    let f = TestFunction::Bump { lo: 0.65, hi: 0.95 }.evaluator();
    let sweep = residual_sweep(&f, &w, &l, &[1, 2, 4], Solver::default()).unwrap();
    assert!(sweep.iter().all(|&(_, r)| (r - 1.0).abs() < 1e-12), "{sweep:?}");
}
