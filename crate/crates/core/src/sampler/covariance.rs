use nalgebra::{DMatrix, DVector};

/// Streaming mean and (population) covariance of every frequency vector the
/// chain has held, including repeats of unchanged rows.
#[derive(Debug, Clone, PartialEq)]
pub struct RunningCovariance {
    sum_omega: DVector<f64>,
    sum_outer: DMatrix<f64>,
    count: usize,
}

impl RunningCovariance {
    pub fn new(dim: usize) -> Self {
        Self {
            sum_omega: DVector::zeros(dim),
            sum_outer: DMatrix::zeros(dim, dim),
            count: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.sum_omega.len()
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Adds one vector: `S_ω += ω`, `S_C += ω ωᵀ`.
    pub fn update(&mut self, omega_k: &[f64]) {
        assert_eq!(omega_k.len(), self.dim(), "frequency dimension");
        let d = self.dim();
        for i in 0..d {
            self.sum_omega[i] += omega_k[i];
            for j in i..d {
                self.sum_outer[(i, j)] += omega_k[i] * omega_k[j];
            }
        }
        self.count += 1;
    }

    pub fn mean(&self) -> DVector<f64> {
        if self.count == 0 {
            return DVector::zeros(self.dim());
        }
        &self.sum_omega / self.count as f64
    }

    /// `S_C / count - ω̄ ω̄ᵀ`, exactly symmetric.
    pub fn covariance(&self) -> DMatrix<f64> {
        let d = self.dim();
        if self.count == 0 {
            return DMatrix::zeros(d, d);
        }
        let n = self.count as f64;
        let mean = self.mean();
        let mut cov = DMatrix::zeros(d, d);
        for i in 0..d {
            for j in i..d {
                let v = self.sum_outer[(i, j)] / n - mean[i] * mean[j];
                cov[(i, j)] = v;
                cov[(j, i)] = v;
            }
        }
        cov
    }
}

/// Functional form of [`RunningCovariance::update`].
pub fn covariance_update(mut acc: RunningCovariance, omega_k: &[f64]) -> RunningCovariance {
    acc.update(omega_k);
    acc
}
