use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use super::si::sine_integral;
use crate::dataset::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TargetKind {
    /// `Si(x / a) e^{-x²/2}` in one dimension.
    SiGauss1D { a: f64 },
    /// `Si(x₁ / a) e^{-|x|²/2}` in five dimensions.
    SiGauss5D { a: f64 },
    /// `e^{-(32 x₁)²/2} e^{-(x₂/32)²/2}`.
    AnisoGauss2D,
    /// `e^{-|x|²/2}` in `dim` dimensions.
    Gauss { dim: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetFunction {
    pub kind: TargetKind,
    /// Standard deviation of additive Gaussian label noise.
    pub noise_std: f64,
}

impl TargetFunction {
    pub fn new(kind: TargetKind) -> Self {
        Self {
            kind,
            noise_std: 0.0,
        }
    }

    pub fn with_noise(mut self, noise_std: f64) -> Self {
        self.noise_std = noise_std;
        self
    }

    pub fn dim(&self) -> usize {
        match self.kind {
            TargetKind::SiGauss1D { .. } => 1,
            TargetKind::SiGauss5D { .. } => 5,
            TargetKind::AnisoGauss2D => 2,
            TargetKind::Gauss { dim } => dim,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            TargetKind::SiGauss1D { a } | TargetKind::SiGauss5D { a } if !(a > 0.0) => {
                return Err(Error::validation("a", "must be positive"));
            }
            TargetKind::Gauss { dim: 0 } => {
                return Err(Error::validation("dim", "must be at least 1"));
            }
            _ => {}
        }
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return Err(Error::validation("noise_std", "must be >= 0"));
        }
        Ok(())
    }

    /// Noise-free value at one point.
    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim());
        let sq: f64 = x.iter().map(|v| v * v).sum();
        match self.kind {
            TargetKind::SiGauss1D { a } | TargetKind::SiGauss5D { a } => {
                sine_integral(x[0] / a) * (-0.5 * sq).exp()
            }
            TargetKind::AnisoGauss2D => {
                let (u, v) = (32.0 * x[0], x[1] / 32.0);
                (-0.5 * (u * u + v * v)).exp()
            }
            TargetKind::Gauss { .. } => (-0.5 * sq).exp(),
        }
    }
}

/// `n` points with standard normal inputs and labels `f(x) + ε`, not yet
/// normalized.
pub fn generate_dataset(target: &TargetFunction, n: usize, seed: u64) -> Result<Dataset> {
    target.validate()?;
    if n < 2 {
        return Err(Error::validation("N", "need at least two points"));
    }
    let d = target.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<f64> = (0..n * d).map(|_| StandardNormal.sample(&mut rng)).collect();
    let x = DMatrix::from_row_slice(n, d, &draws);
    let mut y = DVector::from_fn(n, |i, _| target.eval(&draws[i * d..(i + 1) * d]));
    if target.noise_std > 0.0 {
        let noise = Normal::new(0.0, target.noise_std).expect("validated noise");
        for v in y.iter_mut() {
            *v += noise.sample(&mut rng);
        }
    }
    Dataset::regression(x, y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_at_the_origin() {
        assert_eq!(TargetFunction::new(TargetKind::Gauss { dim: 1 }).eval(&[0.0]), 1.0);
        assert_eq!(TargetFunction::new(TargetKind::AnisoGauss2D).eval(&[0.0, 0.0]), 1.0);
        assert_eq!(TargetFunction::new(TargetKind::SiGauss1D { a: 1e-3 }).eval(&[0.0]), 0.0);
    }

    #[test]
    fn generated_inputs_are_standard_normal() {
        let t = TargetFunction::new(TargetKind::SiGauss5D { a: 0.1 });
        let data = generate_dataset(&t, 20_000, 3).unwrap();
        assert_eq!(data.dim(), 5);
        for j in 0..5 {
            let col = data.x().column(j);
            assert!(col.mean().abs() < 0.03);
            assert!((col.variance() - 1.0).abs() < 0.05);
        }
        assert_eq!(data.y()[(0, 0)], t.eval(&data.x().row(0).iter().copied().collect::<Vec<_>>()));
    }

    #[test]
    fn rejects_bad_parameters() {
        let bad = TargetFunction::new(TargetKind::SiGauss1D { a: 0.0 });
        assert!(generate_dataset(&bad, 10, 0).is_err());
        let ok = TargetFunction::new(TargetKind::Gauss { dim: 2 });
        assert!(generate_dataset(&ok, 1, 0).is_err());
        assert!(generate_dataset(&ok.with_noise(-1.0), 10, 0).is_err());
    }
}
