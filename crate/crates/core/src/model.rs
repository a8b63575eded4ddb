use nalgebra::DMatrix;

use crate::dataset::NormalizationStats;
use crate::error::{Error, Result};
use crate::features::{augment_bias, build_design_matrix, ActivationKind};
use crate::Complex64;

/// A trained shallow network `x ↦ Σ_k β_k s(ω_k · x)`.
///
/// Frequencies and amplitudes live in normalized coordinates; `stats` maps raw
/// inputs into them and maps outputs back.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierModel {
    omega: DMatrix<f64>,
    beta: DMatrix<Complex64>,
    activation: ActivationKind,
    stats: NormalizationStats,
}

/// Real-valued predictions together with the largest discarded imaginary part.
#[derive(Debug, Clone)]
pub struct Prediction {
    pub values: DMatrix<f64>,
    pub max_imag_residual: f64,
}

impl FourierModel {
    pub fn new(
        omega: DMatrix<f64>,
        beta: DMatrix<Complex64>,
        activation: ActivationKind,
        stats: NormalizationStats,
    ) -> Result<Self> {
        if omega.nrows() == 0 {
            return Err(Error::validation("K", "model needs at least one feature"));
        }
        if beta.nrows() != omega.nrows() {
            return Err(Error::DimensionMismatch {
                context: "model amplitudes",
                expected: omega.nrows(),
                got: beta.nrows(),
            });
        }
        if beta.ncols() != stats.outputs() {
            return Err(Error::DimensionMismatch {
                context: "model outputs",
                expected: stats.outputs(),
                got: beta.ncols(),
            });
        }
        let expected_dim = stats.dim() + usize::from(activation.uses_bias());
        if omega.ncols() != expected_dim {
            return Err(Error::DimensionMismatch {
                context: "model frequency dimension",
                expected: expected_dim,
                got: omega.ncols(),
            });
        }
        if beta.iter().any(|b| !b.re.is_finite() || !b.im.is_finite()) {
            return Err(Error::NonFiniteAmplitude);
        }
        Ok(Self {
            omega,
            beta,
            activation,
            stats,
        })
    }

    /// Frequencies, `K × d`.
    pub fn omega(&self) -> &DMatrix<f64> {
        &self.omega
    }

    /// Amplitudes, `K × C`.
    pub fn beta(&self) -> &DMatrix<Complex64> {
        &self.beta
    }

    pub fn activation(&self) -> ActivationKind {
        self.activation
    }

    pub fn stats(&self) -> &NormalizationStats {
        &self.stats
    }

    pub fn num_features(&self) -> usize {
        self.omega.nrows()
    }

    /// Input dimension the frequencies act on (including any bias feature).
    pub fn dim(&self) -> usize {
        self.omega.ncols()
    }

    pub fn outputs(&self) -> usize {
        self.beta.ncols()
    }

    /// Complex network output `S β` on inputs that are already normalized
    /// (and bias-augmented for sigmoid models).
    pub fn evaluate(&self, x_normalized: &DMatrix<f64>) -> Result<DMatrix<Complex64>> {
        build_design_matrix(x_normalized, &self.omega, self.activation)?.apply(&self.beta)
    }

    /// Predicts on raw inputs: normalize with the training stats, take the real
    /// part of the network output and map it back to the label scale.
    pub fn predict(&self, x_raw: &DMatrix<f64>) -> Result<Prediction> {
        let mut x = self.stats.normalize_x(x_raw)?;
        if self.activation.uses_bias() {
            x = augment_bias(&x);
        }
        let out = self.evaluate(&x)?;
        let max_imag_residual = out
            .iter()
            .enumerate()
            .map(|(i, v)| v.im.abs() * self.stats.y_std[i / out.nrows()])
            .fold(0.0, f64::max);
        let values = self.stats.denormalize_y(&out.map(|v| v.re))?;
        Ok(Prediction {
            values,
            max_imag_residual,
        })
    }
}
