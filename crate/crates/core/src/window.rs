//! Window functions with exact pointwise evaluation and exponential decay
//! envelopes.
//!
//! Every analytic family carries an envelope `|g(x)| <= C e^{-a|x|}` valid on
//! the whole line. For Gaussian-dominated families `a = 1`, `C` is the sampled
//! maximum of `|g(x)| e^{|x|}` on `[-X, X]` and an explicit majorant covers
//! `|x| >= X`. Totally positive windows get a closed-form bound from shifting
//! the inverse Fourier integral into the complex plane. Compact bumps report
//! their support instead.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::poly;

/// Default Gaussian exponent, `e^{-πx²}`.
pub const DEFAULT_GAMMA: f64 = PI;

/// One term `a·e^{λx}` of an exponential polynomial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpTerm {
    pub coeff: Complex64,
    pub lambda: Complex64,
}

/// One time-frequency shifted Gaussian `d·e^{2πibx}·e^{-π(x-a)²}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftTerm {
    pub d: Complex64,
    pub a: f64,
    pub b: f64,
}

/// Description of a window. Polynomial coefficients are in ascending order of
/// powers: `[c0, c1, c2]` is `c0 + c1·x + c2·x²`.
#[derive(Debug, Clone, PartialEq)]
pub enum WindowSpec {
    Gaussian {
        gamma: f64,
    },
    /// `h_n(x) ∝ e^{πx²} (d/dx)^n e^{-2πx²}`, normalised to unit L² norm.
    Hermite {
        n: u32,
    },
    PolyGaussian {
        coeffs: Vec<Complex64>,
        gamma: f64,
    },
    RationalGaussian {
        num: Vec<Complex64>,
        den: Vec<Complex64>,
        gamma: f64,
    },
    ExpPolyGaussian {
        terms: Vec<ExpTerm>,
        gamma: f64,
    },
    /// Defined through its Fourier transform
    /// `ĝ(ξ) = e^{-γξ²} Π_j (1 + 2πiδ_j ξ)^{-1}`.
    TotallyPositiveGaussian {
        deltas: Vec<f64>,
        gamma: f64,
    },
    ShiftedGaussianCombo {
        terms: Vec<ShiftTerm>,
    },
    /// `exp(-s/(t(1-t)) + 4s)` with `t` the position rescaled to the support;
    /// peak value 1 at the midpoint, identically zero outside.
    CompactBump {
        support: (f64, f64),
        smoothness: f64,
    },
}

impl WindowSpec {
    pub fn gaussian() -> Self {
        WindowSpec::Gaussian {
            gamma: DEFAULT_GAMMA,
        }
    }

    pub fn hermite(n: u32) -> Self {
        WindowSpec::Hermite { n }
    }

    pub fn bump(lo: f64, hi: f64) -> Self {
        WindowSpec::CompactBump {
            support: (lo, hi),
            smoothness: 1.0,
        }
    }

    /// Short human-readable identifier used in reports.
    pub fn id(&self) -> String {
        match self {
            WindowSpec::Gaussian { gamma } => format!("gaussian(gamma={gamma})"),
            WindowSpec::Hermite { n } => format!("hermite({n})"),
            WindowSpec::PolyGaussian { coeffs, .. } => {
                format!("poly_gaussian(deg={})", coeffs.len().saturating_sub(1))
            }
            WindowSpec::RationalGaussian { num, den, .. } => format!(
                "rational_gaussian({}/{})",
                num.len().saturating_sub(1),
                den.len().saturating_sub(1)
            ),
            WindowSpec::ExpPolyGaussian { terms, .. } => {
                format!("exp_poly_gaussian({} terms)", terms.len())
            }
            WindowSpec::TotallyPositiveGaussian { deltas, .. } => {
                format!("totally_positive_gaussian({deltas:?})")
            }
            WindowSpec::ShiftedGaussianCombo { terms } => {
                format!("shifted_gaussian_combo({} terms)", terms.len())
            }
            WindowSpec::CompactBump { support, .. } => {
                format!("compact_bump([{}, {}])", support.0, support.1)
            }
        }
    }
}

/// Pointwise decay bound of a window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecayEnvelope {
    /// `|g(x)| <= c·e^{-rate·|x|}` for all `x`. Beyond `valid_radius` the bound
    /// follows from an explicit majorant; inside it from dense sampling.
    Exponential {
        c: f64,
        rate: f64,
        valid_radius: f64,
    },
    /// `g` vanishes outside `[lo, hi]` and `|g| <= sup` inside.
    Compact { lo: f64, hi: f64, sup: f64 },
}

impl DecayEnvelope {
    pub fn bound(&self, x: f64) -> f64 {
        match *self {
            DecayEnvelope::Exponential { c, rate, .. } => c * (-rate * x.abs()).exp(),
            DecayEnvelope::Compact { lo, hi, sup } => {
                if x >= lo && x <= hi {
                    sup
                } else {
                    0.0
                }
            }
        }
    }

    /// Upper bound of `Σ_{|k| > K} bound(x - αk)`.
    pub fn lattice_tail(&self, x: f64, alpha: f64, k: usize) -> f64 {
        match *self {
            DecayEnvelope::Exponential { c, rate, .. } => {
                let step = rate * alpha;
                2.0 * c * (rate * x.abs() - step * (k as f64 + 1.0)).exp() / (1.0 - (-step).exp())
            }
            DecayEnvelope::Compact { lo, hi, sup } => {
                let (kmin, kmax) = compact_k_range(lo, hi, x, alpha);
                if kmin > kmax || (kmin >= -(k as i64) && kmax <= k as i64) {
                    0.0
                } else {
                    sup * (kmax - kmin + 1) as f64
                }
            }
        }
    }

    /// Upper bound of `Σ_{k ∈ Z} bound(x - αk)`, uniform in `x`.
    pub fn lattice_total(&self, alpha: f64) -> f64 {
        match *self {
            DecayEnvelope::Exponential { c, rate, .. } => 2.0 * c / (1.0 - (-rate * alpha).exp()),
            DecayEnvelope::Compact { lo, hi, sup } => sup * (((hi - lo) / alpha).floor() + 1.0),
        }
    }
}

/// Indices `k` with `x - αk ∈ [lo, hi]`.
pub(crate) fn compact_k_range(lo: f64, hi: f64, x: f64, alpha: f64) -> (i64, i64) {
    let kmin = ((x - hi) / alpha).ceil() as i64;
    let kmax = ((x - lo) / alpha).floor() as i64;
    (kmin, kmax)
}

#[derive(Debug, Clone)]
enum Kernel {
    Gaussian {
        gamma: f64,
    },
    Poly {
        coeffs: Vec<Complex64>,
        gamma: f64,
    },
    Rational {
        num: Vec<Complex64>,
        den: Vec<Complex64>,
        gamma: f64,
    },
    ExpPoly {
        terms: Vec<ExpTerm>,
        gamma: f64,
    },
    TotallyPositive(TpQuadrature),
    Shifted {
        terms: Vec<ShiftTerm>,
    },
    Bump {
        lo: f64,
        hi: f64,
        s: f64,
    },
}

/// Trapezoidal evaluation of the inverse Fourier integral of a totally
/// positive window. By Poisson summation the rule with step `1/H` returns
/// `Σ_m g(x + mH)`, so its error is the aliased tail, bounded through the
/// analytic envelope `(c, rate)`.
#[derive(Debug, Clone)]
struct TpQuadrature {
    deltas: Vec<f64>,
    gamma: f64,
    xi_max: f64,
    c: f64,
    rate: f64,
}

const TP_ALIAS_TOL: f64 = 1e-17;

impl TpQuadrature {
    fn new(deltas: Vec<f64>, gamma: f64) -> Self {
        let max_delta = deltas.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        // contour shift by y keeps every |1 + 2πiδ(ξ+iy)| >= 1/2
        let y = if max_delta > 0.0 {
            1.0 / (4.0 * PI * max_delta)
        } else {
            1.0 / (2.0 * PI)
        };
        let c = 2f64.powi(deltas.len() as i32) * (PI / gamma).sqrt() * (gamma * y * y).exp();
        let rate = 2.0 * PI * y;
        // ∫_{|ξ|>Ξ} e^{-γξ²} <= e^{-γΞ²}/(γΞ)
        let xi_max = (42.0 / gamma).sqrt().max(1.0);
        Self {
            deltas,
            gamma,
            xi_max,
            c,
            rate,
        }
    }

    fn fourier(&self, xi: f64) -> Complex64 {
        let mut v = Complex64::new((-self.gamma * xi * xi).exp(), 0.0);
        for &d in &self.deltas {
            v /= Complex64::new(1.0, 2.0 * PI * d * xi);
        }
        v
    }

    fn period(&self, x: f64) -> f64 {
        // Σ_{m≠0} c e^{-rate(mH - |x|)} <= TP_ALIAS_TOL
        let base = ((4.0 * self.c).ln() - TP_ALIAS_TOL.ln()) / self.rate;
        x.abs() + base.max(4.0)
    }

    fn eval(&self, x: f64) -> f64 {
        let big_h = self.period(x);
        let h = 1.0 / big_h;
        let n_max = (self.xi_max * big_h).ceil() as usize;
        // ĝ(-ξ) = conj ĝ(ξ), so g is real
        let mut acc = 0.5 * self.fourier(0.0).re;
        for n in 1..=n_max {
            let xi = n as f64 * h;
            let (s, c) = (2.0 * PI * x * xi).sin_cos();
            let f = self.fourier(xi);
            acc += f.re * c - f.im * s;
        }
        2.0 * h * acc
    }
}

/// A validated window together with its decay envelope.
///
/// Immutable after construction and safe to share across threads.
#[derive(Debug, Clone)]
pub struct Window {
    spec: WindowSpec,
    kernel: Kernel,
    scale: Complex64,
    envelope: DecayEnvelope,
}

impl Window {
    pub fn new(spec: WindowSpec) -> Result<Self> {
        let kernel = build_kernel(&spec)?;
        let mut w = Window {
            spec,
            kernel,
            scale: Complex64::new(1.0, 0.0),
            envelope: DecayEnvelope::Compact {
                lo: 0.0,
                hi: 0.0,
                sup: 0.0,
            },
        };
        w.envelope = w.compute_envelope()?;
        w.validate_envelope()?;
        Ok(w)
    }

    /// The window `c·g`.
    pub fn scaled(&self, c: Complex64) -> Self {
        let mut w = self.clone();
        w.scale *= c;
        w.envelope = match w.envelope {
            DecayEnvelope::Exponential {
                c: cc,
                rate,
                valid_radius,
            } => DecayEnvelope::Exponential {
                c: cc * c.norm(),
                rate,
                valid_radius,
            },
            DecayEnvelope::Compact { lo, hi, sup } => DecayEnvelope::Compact {
                lo,
                hi,
                sup: sup * c.norm(),
            },
        };
        w
    }

    pub fn spec(&self) -> &WindowSpec {
        &self.spec
    }

    pub fn envelope(&self) -> DecayEnvelope {
        self.envelope
    }

    /// Whether the window belongs to the analytic (Gelfand–Shilov) families
    /// for which vanishing Θ-coefficients characterise incompleteness.
    pub fn is_analytic_class(&self) -> bool {
        !matches!(self.kernel, Kernel::Bump { .. })
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        self.scale * self.eval_unscaled(x)
    }

    fn eval_unscaled(&self, x: f64) -> Complex64 {
        match &self.kernel {
            Kernel::Gaussian { gamma } => Complex64::new((-gamma * x * x).exp(), 0.0),
            Kernel::Poly { coeffs, gamma } => poly::eval(coeffs, x) * (-gamma * x * x).exp(),
            Kernel::Rational { num, den, gamma } => {
                poly::eval(num, x) / poly::eval(den, x) * (-gamma * x * x).exp()
            }
            Kernel::ExpPoly { terms, gamma } => {
                let g = -gamma * x * x;
                terms
                    .iter()
                    .map(|t| t.coeff * (t.lambda * x + g).exp())
                    .sum()
            }
            Kernel::TotallyPositive(tp) => Complex64::new(tp.eval(x), 0.0),
            Kernel::Shifted { terms } => terms
                .iter()
                .map(|t| {
                    let u = x - t.a;
                    t.d * Complex64::from_polar((-PI * u * u).exp(), 2.0 * PI * t.b * x)
                })
                .sum(),
            Kernel::Bump { lo, hi, s } => {
                if x <= *lo || x >= *hi {
                    Complex64::new(0.0, 0.0)
                } else {
                    let t = (x - lo) / (hi - lo);
                    Complex64::new((-s / (t * (1.0 - t)) + 4.0 * s).exp(), 0.0)
                }
            }
        }
    }

    fn compute_envelope(&self) -> Result<DecayEnvelope> {
        if let Kernel::Bump { lo, hi, .. } = self.kernel {
            return Ok(DecayEnvelope::Compact { lo, hi, sup: 1.0 });
        }
        if let Kernel::TotallyPositive(tp) = &self.kernel {
            return Ok(DecayEnvelope::Exponential {
                c: tp.c,
                rate: tp.rate,
                valid_radius: 0.0,
            });
        }
        let rate = 1.0;
        let m = self.majorant()?;
        let x_mono = m.monotone_radius(rate)?;

        let step = 1.0 / 256.0;
        let weighted = |x: f64| self.eval_unscaled(x).norm() * (rate * x.abs()).exp();
        let n = (2.0 * x_mono / step).ceil() as usize;
        let mut sampled = (0..=n)
            .map(|i| weighted(-x_mono + i as f64 * step))
            .fold(0.0f64, f64::max);
        // push the radius out until the analytic tail sits below the sampled
        // peak so C reflects the window rather than the majorant's slack
        let mut radius = x_mono;
        while m.weighted(radius, rate) > sampled && radius < x_mono + 64.0 {
            let next = radius + 0.25;
            let mut y = radius;
            while y <= next {
                sampled = sampled.max(weighted(y)).max(weighted(-y));
                y += step;
            }
            radius = next;
        }
        let c = (1.05 * sampled).max(m.weighted(radius, rate));
        if !c.is_finite() {
            return Err(Error::InvalidWindow(
                "decay too slow: the envelope constant overflows".into(),
            ));
        }
        Ok(DecayEnvelope::Exponential {
            c,
            rate,
            valid_radius: radius,
        })
    }

    fn validate_envelope(&self) -> Result<()> {
        let DecayEnvelope::Exponential {
            c,
            rate,
            valid_radius,
        } = self.envelope
        else {
            return Ok(());
        };
        let span = 3.0 * valid_radius.max(1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_e7e1);
        for _ in 0..1000 {
            let x: f64 = rng.random_range(-span..span);
            let observed = self.eval_unscaled(x).norm() * (rate * x.abs()).exp();
            if observed > c * (1.0 + 1e-9) + 1e-12 * (rate * x.abs()).exp() {
                return Err(Error::EnvelopeViolation {
                    x,
                    observed,
                    bound: c,
                });
            }
        }
        Ok(())
    }

    fn majorant(&self) -> Result<Majorant> {
        let m = match &self.kernel {
            Kernel::Gaussian { gamma } => Majorant::gaussian(1.0, 0, 0.0, *gamma, 0.0, 0.0),
            Kernel::Poly { coeffs, gamma } => {
                let s: f64 = coeffs.iter().map(|c| c.norm()).sum();
                Majorant::gaussian(s, poly::degree(coeffs), 0.0, *gamma, 0.0, 1.0)
            }
            Kernel::Rational { num, den, gamma } => {
                // |Q(x)| >= |q_m||x|^m / 2 once |x| >= r_q
                let m = poly::degree(den);
                let lead = den[m].norm();
                let lower: f64 = den[..m].iter().map(|c| c.norm()).sum();
                let r_q = (2.0 * lower / lead).max(1.0);
                let s: f64 = num.iter().map(|c| c.norm()).sum();
                let power = poly::degree(num).saturating_sub(m);
                Majorant::gaussian(2.0 * s / lead, power, 0.0, *gamma, 0.0, r_q)
            }
            Kernel::ExpPoly { terms, gamma } => {
                let s: f64 = terms.iter().map(|t| t.coeff.norm()).sum();
                let lin = terms.iter().fold(0.0f64, |m, t| m.max(t.lambda.re.abs()));
                Majorant::gaussian(s, 0, lin, *gamma, 0.0, 0.0)
            }
            Kernel::Shifted { terms } => {
                let s: f64 = terms.iter().map(|t| t.d.norm()).sum();
                let shift = terms.iter().fold(0.0f64, |m, t| m.max(t.a.abs()));
                Majorant::gaussian(s, 0, 0.0, PI, shift, shift)
            }
            Kernel::TotallyPositive(_) | Kernel::Bump { .. } => {
                return Err(Error::InvalidWindow(
                    "no Gaussian majorant for this family".into(),
                ))
            }
        };
        Ok(m)
    }
}

/// `|g(x)| <= coef·|x|^power·e^{lin·|x| - γ(|x| - shift)²}` for `|x| >= r0`.
#[derive(Debug, Clone, Copy)]
struct Majorant {
    coef: f64,
    power: usize,
    lin: f64,
    gamma: f64,
    shift: f64,
    r0: f64,
}

impl Majorant {
    fn gaussian(coef: f64, power: usize, lin: f64, gamma: f64, shift: f64, r0: f64) -> Self {
        Self {
            coef,
            power,
            lin,
            gamma,
            shift,
            r0,
        }
    }

    fn weighted(&self, r: f64, rate: f64) -> f64 {
        let u = r - self.shift;
        self.coef * r.powi(self.power as i32) * ((self.lin + rate) * r - self.gamma * u * u).exp()
    }

    /// Smallest radius (on a 1/4 grid) beyond which `weighted` is
    /// non-increasing; the log-derivative is monotone so the first sign
    /// change is final.
    fn monotone_radius(&self, rate: f64) -> Result<f64> {
        let mut r = self.r0.max(self.shift).max(1.0);
        while r <= MAX_ENVELOPE_RADIUS {
            let slope = self.power as f64 / r + self.lin + rate - 2.0 * self.gamma * (r - self.shift);
            if slope < 0.0 {
                return Ok(r);
            }
            r += 0.25;
        }
        Err(Error::InvalidWindow(format!(
            "decay too slow: the Gaussian tail does not dominate before |x| = {MAX_ENVELOPE_RADIUS}"
        )))
    }
}

/// Windows whose Gaussian factor takes over only beyond this radius are rejected.
const MAX_ENVELOPE_RADIUS: f64 = 1e4;

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma.is_finite() && gamma > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidWindow(format!(
            "gamma must be positive and finite, got {gamma}"
        )))
    }
}

fn check_finite(values: &[Complex64], what: &str) -> Result<()> {
    if values.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidWindow(format!("{what} must be finite")))
    }
}

fn build_kernel(spec: &WindowSpec) -> Result<Kernel> {
    Ok(match spec {
        WindowSpec::Gaussian { gamma } => {
            check_gamma(*gamma)?;
            Kernel::Gaussian { gamma: *gamma }
        }
        WindowSpec::Hermite { n } => {
            if *n > 40 {
                return Err(Error::InvalidWindow(format!(
                    "Hermite order {n} too large for coefficient recurrence"
                )));
            }
            let p = hermite_polynomial(*n as usize);
            let norm = hermite_norm(&p);
            Kernel::Poly {
                coeffs: p.iter().map(|c| Complex64::new(c / norm, 0.0)).collect(),
                gamma: PI,
            }
        }
        WindowSpec::PolyGaussian { coeffs, gamma } => {
            check_gamma(*gamma)?;
            check_finite(coeffs, "coefficients")?;
            if coeffs.is_empty() {
                return Err(Error::InvalidWindow("empty coefficient list".into()));
            }
            Kernel::Poly {
                coeffs: poly::trim(coeffs),
                gamma: *gamma,
            }
        }
        WindowSpec::RationalGaussian { num, den, gamma } => {
            check_gamma(*gamma)?;
            check_finite(num, "numerator")?;
            check_finite(den, "denominator")?;
            if num.is_empty() {
                return Err(Error::InvalidWindow("empty numerator".into()));
            }
            let den = poly::trim(den);
            if den.iter().all(|c| c.norm() == 0.0) {
                return Err(Error::InvalidWindow("zero denominator".into()));
            }
            if let Some(x) = poly::real_root_near(&den) {
                return Err(Error::InvalidWindow(format!(
                    "denominator has a real root near x = {x}"
                )));
            }
            Kernel::Rational {
                num: poly::trim(num),
                den,
                gamma: *gamma,
            }
        }
        WindowSpec::ExpPolyGaussian { terms, gamma } => {
            check_gamma(*gamma)?;
            if terms.is_empty() {
                return Err(Error::InvalidWindow("empty exponential polynomial".into()));
            }
            for t in terms {
                check_finite(&[t.coeff, t.lambda], "exponential terms")?;
            }
            Kernel::ExpPoly {
                terms: terms.clone(),
                gamma: *gamma,
            }
        }
        WindowSpec::TotallyPositiveGaussian { deltas, gamma } => {
            check_gamma(*gamma)?;
            if deltas.iter().any(|d| !d.is_finite()) {
                return Err(Error::InvalidWindow("deltas must be finite".into()));
            }
            let deltas = deltas.iter().copied().filter(|d| *d != 0.0).collect();
            Kernel::TotallyPositive(TpQuadrature::new(deltas, *gamma))
        }
        WindowSpec::ShiftedGaussianCombo { terms } => {
            if terms.is_empty() {
                return Err(Error::InvalidWindow("empty Gaussian combination".into()));
            }
            for t in terms {
                check_finite(&[t.d, Complex64::new(t.a, t.b)], "shift terms")?;
            }
            Kernel::Shifted {
                terms: terms.clone(),
            }
        }
        WindowSpec::CompactBump {
            support: (lo, hi),
            smoothness,
        } => {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidWindow(format!(
                    "bump support [{lo}, {hi}] is not a proper interval"
                )));
            }
            if !(smoothness.is_finite() && *smoothness > 0.0) {
                return Err(Error::InvalidWindow("bump smoothness must be positive".into()));
            }
            Kernel::Bump {
                lo: *lo,
                hi: *hi,
                s: *smoothness,
            }
        }
    })
}

/// Coefficients (ascending) of `p_n` with `(d/dx)^n e^{-2πx²} = p_n(x) e^{-2πx²}`,
/// via `p_{n+1} = p_n' - 4πx·p_n`.
pub(crate) fn hermite_polynomial(n: usize) -> Vec<f64> {
    let mut p = vec![1.0];
    for _ in 0..n {
        let mut next = vec![0.0; p.len() + 1];
        for (i, &c) in p.iter().enumerate().skip(1) {
            next[i - 1] += i as f64 * c;
        }
        for (i, &c) in p.iter().enumerate() {
            next[i + 1] -= 4.0 * PI * c;
        }
        p = next;
    }
    p
}

/// `‖p·e^{-πx²}‖₂` from the Gaussian moments of `e^{-2πx²}`.
fn hermite_norm(p: &[f64]) -> f64 {
    let deg2 = 2 * (p.len() - 1);
    let mut moments = vec![0.0; deg2 + 1];
    moments[0] = std::f64::consts::FRAC_1_SQRT_2;
    let mut m = 0;
    while m + 2 <= deg2 {
        moments[m + 2] = moments[m] * (m as f64 + 1.0) / (4.0 * PI);
        m += 2;
    }
    let mut s = 0.0;
    for (i, a) in p.iter().enumerate() {
        for (j, b) in p.iter().enumerate() {
            s += a * b * moments[i + j];
        }
    }
    s.sqrt()
}
