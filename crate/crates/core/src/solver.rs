//! Regularized complex least squares for the output-layer amplitudes.
//!
//! For each label column `y_c` the amplitudes minimize
//! `N⁻¹ |S β - y_c|² + λ |β|²`, whose normal equations are
//! `(S* S + λ N I) β = S* y_c`. All columns share one factorization.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Cholesky, DMatrix, SVD};

use crate::error::{Error, Result};
use crate::features::DesignMatrix;
use crate::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    /// Cholesky factorization of the shifted Gram matrix.
    NormalEquations,
    /// Singular value decomposition of `S` itself.
    Svd,
}

impl fmt::Display for SolveMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveMethod::NormalEquations => "normal",
            SolveMethod::Svd => "svd",
        })
    }
}

impl FromStr for SolveMethod {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "normal" | "normal_equations" | "cholesky" => Ok(SolveMethod::NormalEquations),
            "svd" => Ok(SolveMethod::Svd),
            other => Err(format!("unknown solve method `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Tikhonov weight λ ≥ 0.
    pub lambda: f64,
    pub method: SolveMethod,
    /// Singular values below `svd_cutoff · σ_max` are discarded (SVD with λ = 0).
    pub svd_cutoff: f64,
}

pub const DEFAULT_SVD_CUTOFF: f64 = 1e-12;

impl SolveOptions {
    /// Cholesky when `lambda > 0`, SVD otherwise.
    pub fn new(lambda: f64) -> Self {
        let method = if lambda > 0.0 {
            SolveMethod::NormalEquations
        } else {
            SolveMethod::Svd
        };
        Self {
            lambda,
            method,
            svd_cutoff: DEFAULT_SVD_CUTOFF,
        }
    }

    pub fn with_method(mut self, method: SolveMethod) -> Self {
        self.method = method;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::validation("lambda", "must be finite and >= 0"));
        }
        if !(0.0..1.0).contains(&self.svd_cutoff) {
            return Err(Error::validation("svd_cutoff", "must lie in [0, 1)"));
        }
        Ok(())
    }
}

/// Solves for the `K × C` amplitude matrix.
pub fn solve_amplitudes(
    s: &DesignMatrix,
    y: &DMatrix<f64>,
    opts: &SolveOptions,
) -> Result<DMatrix<Complex64>> {
    opts.validate()?;
    if s.nrows() == 0 || s.ncols() == 0 {
        return Err(Error::validation("design matrix", "needs N >= 1 and K >= 1"));
    }
    if y.nrows() != s.nrows() {
        return Err(Error::DimensionMismatch {
            context: "least squares labels",
            expected: s.nrows(),
            got: y.nrows(),
        });
    }
    let beta = match opts.method {
        SolveMethod::NormalEquations => solve_normal(s, y, opts.lambda)?,
        SolveMethod::Svd => solve_svd(&s.to_complex(), y, opts.lambda, opts.svd_cutoff),
    };
    if beta.iter().any(|b| !b.re.is_finite() || !b.im.is_finite()) {
        return Err(Error::NonFiniteAmplitude);
    }
    Ok(beta)
}

/// Same as [`solve_amplitudes`] for an explicit complex matrix.
pub fn solve_amplitudes_complex(
    s: &DMatrix<Complex64>,
    y: &DMatrix<f64>,
    opts: &SolveOptions,
) -> Result<DMatrix<Complex64>> {
    solve_amplitudes(&DesignMatrix::from_complex(s), y, opts)
}

fn solve_normal(s: &DesignMatrix, y: &DMatrix<f64>, lambda: f64) -> Result<DMatrix<Complex64>> {
    let shift = lambda * s.nrows() as f64;
    let mut gram = s.gram();
    for i in 0..gram.nrows() {
        gram[(i, i)] += Complex64::new(shift, 0.0);
    }
    let max_diag = gram.diagonal().iter().map(|v| v.re).fold(0.0, f64::max);
    let rhs = s.adjoint_apply(y)?;
    let chol = Cholesky::new(gram).ok_or(Error::SingularSystem)?;
    // numerically rank-deficient even though the factorization went through
    let tol = f64::EPSILON * s.ncols() as f64 * max_diag;
    if chol.l_dirty().diagonal().iter().any(|l| l.norm_sqr() <= tol) {
        return Err(Error::SingularSystem);
    }
    Ok(chol.solve(&rhs))
}

fn solve_svd(
    s: &DMatrix<Complex64>,
    y: &DMatrix<f64>,
    lambda: f64,
    cutoff: f64,
) -> DMatrix<Complex64> {
    let shift = lambda * s.nrows() as f64;
    let svd = SVD::new(s.clone(), true, true);
    let u = svd.u.as_ref().expect("left singular vectors requested");
    let v_t = svd.v_t.as_ref().expect("right singular vectors requested");
    let sigma_max = svd.singular_values.max();
    let threshold = if shift > 0.0 { 0.0 } else { cutoff * sigma_max };
    let yc = y.map(|v| Complex64::new(v, 0.0));
    let mut coeff = u.adjoint() * yc;
    for (i, mut row) in coeff.row_iter_mut().enumerate() {
        let sv = svd.singular_values[i];
        let scale = if sv > threshold && sv > 0.0 {
            sv / (sv * sv + shift)
        } else {
            0.0
        };
        row *= Complex64::new(scale, 0.0);
    }
    v_t.adjoint() * coeff
}

/// Regularized objective summed over label columns:
/// `Σ_c N⁻¹ |S β_c - y_c|² + λ |β_c|²`.
pub fn objective(
    s: &DesignMatrix,
    y: &DMatrix<f64>,
    beta: &DMatrix<Complex64>,
    lambda: f64,
) -> Result<f64> {
    let fitted = s.apply(beta)?;
    let n = s.nrows() as f64;
    let misfit: f64 = fitted
        .iter()
        .zip(y.iter())
        .map(|(f, t)| (f - Complex64::new(*t, 0.0)).norm_sqr())
        .sum();
    let penalty: f64 = beta.iter().map(|b| b.norm_sqr()).sum();
    Ok(misfit / n + lambda * penalty)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{build_design_matrix, ActivationKind};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn random_problem(
        rng: &mut ChaCha8Rng,
        n: usize,
        k: usize,
        d: usize,
        c: usize,
    ) -> (DesignMatrix, DMatrix<f64>) {
        let x = DMatrix::from_fn(n, d, |_, _| rng.random_range(-2.0..2.0));
        let omega = DMatrix::from_fn(k, d, |_, _| rng.random_range(-2.0..2.0));
        let y = DMatrix::from_fn(n, c, |_, _| rng.random_range(-1.0..1.0));
        (
            build_design_matrix(&x, &omega, ActivationKind::Fourier).unwrap(),
            y,
        )
    }

    /// Gradient of the objective with respect to conj(β), times 2.
    fn gradient(s: &DesignMatrix, y: &DMatrix<f64>, beta: &DMatrix<Complex64>, lambda: f64) -> f64 {
        let n = s.nrows() as f64;
        let sc = s.to_complex();
        let resid = &sc * beta - y.map(|v| Complex64::new(v, 0.0));
        let g = sc.adjoint() * resid * Complex64::new(2.0 / n, 0.0)
            + beta * Complex64::new(2.0 * lambda, 0.0);
        g.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    #[test]
    fn constant_feature_mean() {
        let x = DMatrix::from_column_slice(4, 1, &[0.1, -0.5, 2.0, 1.0]);
        let y = DMatrix::from_column_slice(4, 1, &[1.0, 2.0, 3.0, 6.0]);
        let s = build_design_matrix(&x, &DMatrix::zeros(1, 1), ActivationKind::Fourier).unwrap();
        for lambda in [0.0, 0.1, 2.5] {
            let beta = solve_amplitudes(&s, &y, &SolveOptions::new(lambda)).unwrap();
            let expected = 3.0 / (1.0 + lambda);
            assert!((beta[(0, 0)] - Complex64::new(expected, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn orthogonal_columns() {
        // x_n = 2πn/N with integer frequencies: S/√N is unitary
        let n = 8;
        let x = DMatrix::from_fn(n, 1, |i, _| 2.0 * PI * i as f64 / n as f64);
        let omega = DMatrix::from_fn(n, 1, |k, _| k as f64);
        let s = build_design_matrix(&x, &omega, ActivationKind::Fourier).unwrap();
        let y = DMatrix::from_fn(n, 1, |i, _| (i as f64 * 1.7).sin() + 0.3);
        let expected = s.adjoint_apply(&y).unwrap() / Complex64::new(n as f64, 0.0);
        for method in [SolveMethod::Svd, SolveMethod::NormalEquations] {
            let beta = solve_amplitudes(&s, &y, &SolveOptions::new(0.0).with_method(method)).unwrap();
            assert!((beta - &expected).map(|v| v.norm()).max() < 1e-12, "{method}");
        }
    }

    #[test]
    fn stationary_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for &(lambda, method) in &[
            (0.1, SolveMethod::NormalEquations),
            (0.1, SolveMethod::Svd),
            (0.0, SolveMethod::Svd),
            (0.01, SolveMethod::NormalEquations),
        ] {
            let (s, y) = random_problem(&mut rng, 30, 6, 2, 2);
            let beta = solve_amplitudes(&s, &y, &SolveOptions::new(lambda).with_method(method)).unwrap();
            let ynorm = y.norm();
            assert!(gradient(&s, &y, &beta, lambda) < 1e-8 * (1.0 + ynorm));
        }
    }

    #[test]
    fn normal_equation_residual_is_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let (s, y) = random_problem(&mut rng, 40, 10, 3, 1);
        let lambda = 0.05;
        let beta = solve_amplitudes(&s, &y, &SolveOptions::new(lambda)).unwrap();
        let mut lhs = s.gram();
        for i in 0..lhs.nrows() {
            lhs[(i, i)] += Complex64::new(lambda * 40.0, 0.0);
        }
        let rhs = s.adjoint_apply(&y).unwrap();
        let resid = (lhs * &beta - &rhs).norm() / rhs.norm();
        assert!(resid < 1e-10, "{resid}");
    }

    #[test]
    fn norm_shrinks_with_lambda() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let (s, y) = random_problem(&mut rng, 25, 5, 2, 1);
            let mut last = f64::INFINITY;
            for lambda in [0.0, 0.001, 0.01, 0.1, 1.0] {
                let beta = solve_amplitudes(&s, &y, &SolveOptions::new(lambda)).unwrap();
                let norm = beta.norm();
                assert!(norm <= last * (1.0 + 1e-12));
                last = norm;
            }
        }
    }

    #[test]
    fn conjugate_pairs_for_real_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = DMatrix::from_fn(40, 2, |_, _| rng.random_range(-2.0..2.0));
        let half = DMatrix::from_fn(3, 2, |_, _| rng.random_range(-1.5..1.5));
        let omega = DMatrix::from_fn(6, 2, |k, j| if k < 3 { half[(k, j)] } else { -half[(k - 3, j)] });
        let y = DMatrix::from_fn(40, 1, |_, _| rng.random_range(-1.0..1.0));
        let s = build_design_matrix(&x, &omega, ActivationKind::Fourier).unwrap();
        let beta = solve_amplitudes(&s, &y, &SolveOptions::new(0.1)).unwrap();
        for k in 0..3 {
            assert!((beta[(k, 0)] - beta[(k + 3, 0)].conj()).norm() < 1e-10);
        }
    }

    #[test]
    fn joint_columns_equal_separate_solves() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (s, y) = random_problem(&mut rng, 30, 7, 3, 3);
        for method in [SolveMethod::NormalEquations, SolveMethod::Svd] {
            let opts = SolveOptions::new(0.1).with_method(method);
            let joint = solve_amplitudes(&s, &y, &opts).unwrap();
            for c in 0..3 {
                let single = solve_amplitudes(&s, &y.columns(c, 1).into_owned(), &opts).unwrap();
                assert!((joint.column(c) - single.column(0)).map(|v| v.norm()).max() < 1e-12);
            }
        }
    }

    #[test]
    fn singular_gram_without_regularization() {
        // two identical columns
        let x = DMatrix::from_column_slice(5, 1, &[0.0, 1.0, 2.0, 3.0, 4.0]);
        let omega = DMatrix::from_column_slice(2, 1, &[0.0, 0.0]);
        let s = build_design_matrix(&x, &omega, ActivationKind::Fourier).unwrap();
        let y = DMatrix::from_column_slice(5, 1, &[1.0, 1.0, 1.0, 1.0, 2.0]);
        let opts = SolveOptions::new(0.0).with_method(SolveMethod::NormalEquations);
        assert!(matches!(solve_amplitudes(&s, &y, &opts), Err(Error::SingularSystem)));
        // the SVD path splits the mean evenly over the duplicated column
        let beta = solve_amplitudes(&s, &y, &SolveOptions::new(0.0)).unwrap();
        assert!((beta[(0, 0)] - Complex64::new(0.6, 0.0)).norm() < 1e-12);
        assert!((beta[(1, 0)] - Complex64::new(0.6, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn invalid_options() {
        let s = DesignMatrix::from_complex(&DMatrix::from_element(2, 1, Complex64::new(1.0, 0.0)));
        let y = DMatrix::zeros(2, 1);
        let mut opts = SolveOptions::new(-1.0);
        assert!(solve_amplitudes(&s, &y, &opts).is_err());
        opts.lambda = 0.1;
        opts.svd_cutoff = 1.0;
        assert!(solve_amplitudes(&s, &y, &opts).is_err());
        assert!(solve_amplitudes(&s, &DMatrix::zeros(3, 1), &SolveOptions::new(0.1)).is_err());
    }
}
