//! Dense complex polynomials in ascending coefficient order.

use num_complex::Complex64;

pub fn eval(coeffs: &[Complex64], x: f64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, c| acc * x + c)
}

/// Index of the highest non-zero coefficient (0 for the zero polynomial).
pub fn degree(coeffs: &[Complex64]) -> usize {
    coeffs.iter().rposition(|c| c.norm() != 0.0).unwrap_or(0)
}

/// Drops trailing zero coefficients, keeping at least one entry.
pub fn trim(coeffs: &[Complex64]) -> Vec<Complex64> {
    coeffs[..=degree(coeffs)].to_vec()
}

/// Numeric real-root screen: scans `|Q(x)|/(1+|x|)^deg` over a grid covering
/// the Cauchy root bound, refines every local minimum by golden-section search
/// and reports the location of a minimum that is zero to working precision.
pub fn real_root_near(coeffs: &[Complex64]) -> Option<f64> {
    let deg = degree(coeffs);
    if deg == 0 {
        return None;
    }
    let lead = coeffs[deg].norm();
    let scale = coeffs.iter().fold(0.0f64, |m, c| m.max(c.norm()));
    let bound = 1.0 + coeffs[..deg].iter().fold(0.0f64, |m, c| m.max(c.norm() / lead));
    let span = bound + 1.0;
    let weighted = |x: f64| eval(coeffs, x).norm() / (1.0 + x.abs()).powi(deg as i32);

    let n = 20_000usize;
    let h = 2.0 * span / n as f64;
    let values: Vec<f64> = (0..=n).map(|i| weighted(-span + i as f64 * h)).collect();
    let threshold = 1e-10 * scale;
    for i in 0..=n {
        let left = if i == 0 { f64::INFINITY } else { values[i - 1] };
        let right = if i == n { f64::INFINITY } else { values[i + 1] };
        if values[i] <= left && values[i] <= right {
            let x0 = -span + i as f64 * h;
            let (x, v) = golden_min(&weighted, x0 - h, x0 + h);
            if v <= threshold {
                return Some(x);
            }
        }
    }
    None
}

fn golden_min(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() < 1e-15 * (1.0 + a.abs()) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(v: &[f64]) -> Vec<Complex64> {
        v.iter().map(|&x| Complex64::new(x, 0.0)).collect()
    }

    #[test]
    fn horner() {
        let p = r(&[1.0, -2.0, 3.0]);
        assert_eq!(eval(&p, 2.0), Complex64::new(9.0, 0.0));
        assert_eq!(degree(&r(&[1.0, 2.0, 0.0, 0.0])), 1);
        assert_eq!(trim(&r(&[0.0, 0.0])).len(), 1);
    }

    #[test]
    fn finds_real_roots() {
        assert!(real_root_near(&r(&[-2.0, 1.0])).is_some());
        // (x - 0.123)(x + 7)
        let x = real_root_near(&r(&[-0.861, 6.877, 1.0])).unwrap();
        assert!((x - 0.123).abs() < 1e-6 || (x + 7.0).abs() < 1e-6);
        // (x - 1)² : double root
        assert!(real_root_near(&r(&[1.0, -2.0, 1.0])).is_some());
    }

    #[test]
    fn accepts_pole_free() {
        assert!(real_root_near(&r(&[1.0, 0.0, 1.0])).is_none());
        assert!(real_root_near(&r(&[3.0])).is_none());
        // (x - i)(x - 2 - 0.01i): complex roots only
        let q = vec![
            Complex64::new(-0.01, 2.0),
            Complex64::new(-2.0, -1.01),
            Complex64::new(1.0, 0.0),
        ];
        assert!(real_root_near(&q).is_none());
    }
}
