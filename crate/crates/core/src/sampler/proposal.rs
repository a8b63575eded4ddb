use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Relative tolerance on negative eigenvalues before a covariance is rejected.
const PSD_TOLERANCE: f64 = 1e-10;

/// Square-root factor `L` with `L Lᵀ = C` for the random-walk proposal
/// `ω' = ω + δ L z`, `z ~ N(0, I)`.
#[derive(Debug, Clone, PartialEq)]
pub enum ProposalFactor {
    Identity(usize),
    Dense(DMatrix<f64>),
}

impl ProposalFactor {
    pub fn identity(dim: usize) -> Self {
        ProposalFactor::Identity(dim)
    }

    /// Cholesky factor of `cov`. A covariance that is only positive
    /// semidefinite up to rounding falls back to the eigen square root with
    /// negative eigenvalues clipped to zero.
    pub fn from_covariance(cov: &DMatrix<f64>) -> Result<Self> {
        assert!(cov.is_square(), "covariance must be square");
        if let Some(chol) = Cholesky::new(cov.clone()) {
            return Ok(ProposalFactor::Dense(chol.unpack()));
        }
        let sym = (cov + cov.transpose()) * 0.5;
        let eig = SymmetricEigen::new(sym);
        let scale = eig.eigenvalues.amax().max(1.0);
        let min = eig.eigenvalues.min();
        if min < -PSD_TOLERANCE * scale || !min.is_finite() {
            return Err(Error::CholeskyFailure {
                min_eigenvalue: min,
            });
        }
        let roots = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
        Ok(ProposalFactor::Dense(
            &eig.eigenvectors * DMatrix::from_diagonal(&roots),
        ))
    }

    pub fn dim(&self) -> usize {
        match self {
            ProposalFactor::Identity(d) => *d,
            ProposalFactor::Dense(l) => l.nrows(),
        }
    }

    /// `L Lᵀ`.
    pub fn covariance(&self) -> DMatrix<f64> {
        match self {
            ProposalFactor::Identity(d) => DMatrix::identity(*d, *d),
            ProposalFactor::Dense(l) => l * l.transpose(),
        }
    }
}

/// Random-walk proposal for every row of `omega` at once.
///
/// Draws `K · d` standard normals in row order (all of row 0, then row 1, ...),
/// so the random stream is independent of the covariance in use.
pub fn propose<R: Rng + ?Sized>(
    omega: &DMatrix<f64>,
    delta: f64,
    factor: &ProposalFactor,
    rng: &mut R,
) -> DMatrix<f64> {
    let (k, d) = omega.shape();
    assert_eq!(factor.dim(), d, "proposal factor dimension");
    let mut out = omega.clone();
    let mut z = DVector::<f64>::zeros(d);
    for row in 0..k {
        for v in z.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        match factor {
            ProposalFactor::Identity(_) => {
                for j in 0..d {
                    out[(row, j)] += delta * z[j];
                }
            }
            ProposalFactor::Dense(l) => {
                let step = l * &z;
                for j in 0..d {
                    out[(row, j)] += delta * step[j];
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_step_or_zero_covariance_is_a_no_op() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let omega = DMatrix::from_fn(5, 3, |i, j| i as f64 - j as f64 * 0.5);
        assert_eq!(propose(&omega, 0.0, &ProposalFactor::identity(3), &mut rng), omega);
        let zero = ProposalFactor::from_covariance(&DMatrix::zeros(3, 3)).unwrap();
        assert_eq!(propose(&omega, 2.0, &zero, &mut rng), omega);
    }

    #[test]
    fn identity_steps_are_standard_normal() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let delta = 0.3;
        let omega = DMatrix::from_element(100_000, 2, 1.5);
        let prop = propose(&omega, delta, &ProposalFactor::identity(2), &mut rng);
        let steps = (prop - &omega) / delta;
        let n = steps.nrows() as f64;
        let mean = steps.row_mean();
        for j in 0..2 {
            assert!(mean[j].abs() < 0.01, "mean {}", mean[j]);
        }
        for a in 0..2 {
            for b in 0..2 {
                let cov: f64 = steps
                    .row_iter()
                    .map(|r| (r[a] - mean[a]) * (r[b] - mean[b]))
                    .sum::<f64>()
                    / n;
                let expected = if a == b { 1.0 } else { 0.0 };
                assert!((cov - expected).abs() < 0.02, "cov[{a},{b}] = {cov}");
            }
        }
    }

    #[test]
    fn dense_factor_reproduces_covariance() {
        let cov = DMatrix::from_row_slice(2, 2, &[4.0, 1.0, 1.0, 2.0]);
        let f = ProposalFactor::from_covariance(&cov).unwrap();
        assert!((f.covariance() - &cov).amax() < 1e-12);
    }

    #[test]
    fn rounding_level_negative_eigenvalue_is_repaired() {
        // rank one, nudged slightly indefinite
        let v = DVector::from_vec(vec![1.0, 2.0, -1.0]);
        let mut cov = &v * v.transpose();
        cov[(2, 2)] -= 1e-14;
        let f = ProposalFactor::from_covariance(&cov).unwrap();
        assert!((f.covariance() - (&v * v.transpose())).amax() < 1e-10);
    }

    #[test]
    fn indefinite_matrix_is_rejected() {
        let cov = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -0.5]);
        assert!(matches!(
            ProposalFactor::from_covariance(&cov),
            Err(Error::CholeskyFailure { .. })
        ));
    }

    #[test]
    fn same_seed_same_proposal() {
        let omega = DMatrix::zeros(4, 2);
        let a = propose(&omega, 1.0, &ProposalFactor::identity(2), &mut ChaCha8Rng::seed_from_u64(9));
        let b = propose(&omega, 1.0, &ProposalFactor::identity(2), &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
    }
}
