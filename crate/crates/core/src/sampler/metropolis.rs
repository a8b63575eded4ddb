use nalgebra::DMatrix;

use crate::Complex64;

/// Metropolis test on amplitude magnitudes: accept when
/// `(‖β_new‖ / ‖β_old‖)^γ > r_u`.
///
/// For multi-output models the norms are Euclidean over the `C` amplitude
/// components of one node. A zero old amplitude is always replaced.
pub fn metropolis_accept(
    beta_old: &[Complex64],
    beta_new: &[Complex64],
    gamma: f64,
    r_u: f64,
) -> bool {
    accept_by_norms(euclidean(beta_old), euclidean(beta_new), gamma, r_u)
}

fn euclidean(v: &[Complex64]) -> f64 {
    v.iter().map(|b| b.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn accept_by_norms(old: f64, new: f64, gamma: f64, r_u: f64) -> bool {
    if old == 0.0 {
        return true;
    }
    if new == 0.0 {
        return false;
    }
    // log form: large exponents (γ = 3d - 2 for image data) overflow powf
    gamma * (new / old).ln() > r_u.ln()
}

/// Euclidean norm of row `k` of a `K × C` amplitude matrix.
pub(crate) fn row_norm(beta: &DMatrix<Complex64>, k: usize) -> f64 {
    beta.row(k).iter().map(|b| b.norm_sqr()).sum::<f64>().sqrt()
}
