use num_complex::Complex64;

use crate::error::{Error, Result};

/// Samples `f(start + n·step)`, `n = 0..len`, of a complex signal.
///
/// Integrals use the plain Riemann sum `step·Σ`, which coincides with the
/// trapezoidal rule for signals that vanish at both ends of the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal {
    start: f64,
    step: f64,
    values: Vec<Complex64>,
}

impl SampledSignal {
    pub fn new(start: f64, step: f64, values: Vec<Complex64>) -> Result<Self> {
        if !(step > 0.0 && step.is_finite() && start.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "sampling grid needs finite start and positive step, got start={start}, step={step}"
            )));
        }
        if values.is_empty() {
            return Err(Error::InvalidArgument("empty signal".into()));
        }
        Ok(Self {
            start,
            step,
            values,
        })
    }

    /// Samples `f` on `[-half_width, half_width]` with the given step; the
    /// half width must be a whole number of steps.
    pub fn symmetric(half_width: f64, step: f64, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let n = half_width / step;
        if !(n.is_finite() && n >= 0.0) || (n - n.round()).abs() > 1e-9 * n.max(1.0) {
            return Err(Error::SamplingMismatch(format!(
                "half width {half_width} is not a multiple of step {step}"
            )));
        }
        let n = n.round() as i64;
        let values = (-n..=n).map(|i| f(i as f64 * step)).collect();
        Self::new(-(n as f64) * step, step, values)
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn end(&self) -> f64 {
        self.point(self.values.len() - 1)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn point(&self, n: usize) -> f64 {
        self.start + n as f64 * self.step
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(|n| self.point(n))
    }

    /// A signal on the same grid.
    pub fn with_values(&self, values: Vec<Complex64>) -> Self {
        assert_eq!(values.len(), self.values.len(), "grid length mismatch");
        Self {
            start: self.start,
            step: self.step,
            values,
        }
    }

    pub fn norm(&self) -> f64 {
        (self.step * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt()
    }

    /// `‖self - other‖ / ‖other‖` on a shared grid.
    pub fn relative_error(&self, reference: &SampledSignal) -> Result<f64> {
        if self.values.len() != reference.values.len()
            || (self.start - reference.start).abs() > 1e-12
            || (self.step - reference.step).abs() > 1e-15
        {
            return Err(Error::SamplingMismatch("signals live on different grids".into()));
        }
        let diff: f64 = self
            .values
            .iter()
            .zip(&reference.values)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        let base: f64 = reference.values.iter().map(|v| v.norm_sqr()).sum();
        if base == 0.0 {
            return Err(Error::InvalidArgument("reference signal is zero".into()));
        }
        Ok((diff / base).sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_grid() {
        let s = SampledSignal::symmetric(1.0, 0.25, |t| Complex64::new(t, 0.0)).unwrap();
        assert_eq!(s.len(), 9);
        assert_eq!(s.start(), -1.0);
        assert_eq!(s.end(), 1.0);
        assert_eq!(s.values()[4], Complex64::new(0.0, 0.0));
        assert!(SampledSignal::symmetric(1.0, 0.3, |_| Complex64::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn gaussian_norm() {
        let s = SampledSignal::symmetric(8.0, 1.0 / 64.0, |t| {
            Complex64::new((-std::f64::consts::PI * t * t).exp(), 0.0)
        })
        .unwrap();
        assert!((s.norm() - 2f64.powf(-0.25)).abs() < 1e-14);
    }
}
