//! Activation functions and the design matrix `S[n, k] = s(ω_k · x_n)`.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg;
use crate::Complex64;

/// Hidden-node activation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ActivationKind {
    /// `exp(i ω·x)`
    #[default]
    Fourier,
    /// `1 / (1 + exp(-ω·x))`, used on bias-augmented inputs.
    Sigmoid,
}

impl ActivationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ActivationKind::Fourier => "fourier",
            ActivationKind::Sigmoid => "sigmoid",
        }
    }

    /// Whether inputs carry the extra constant feature.
    pub fn uses_bias(self) -> bool {
        matches!(self, ActivationKind::Sigmoid)
    }

    /// Activation value for the phase `t = ω·x`.
    pub fn eval(self, t: f64) -> Complex64 {
        match self {
            ActivationKind::Fourier => {
                let (s, c) = t.sin_cos();
                Complex64::new(c, s)
            }
            ActivationKind::Sigmoid => Complex64::new(sigmoid(t), 0.0),
        }
    }

    /// Derivative of [`eval`](Self::eval) with respect to `t`.
    pub fn derivative(self, t: f64) -> Complex64 {
        match self {
            ActivationKind::Fourier => {
                let (s, c) = t.sin_cos();
                Complex64::new(-s, c)
            }
            ActivationKind::Sigmoid => {
                let v = sigmoid(t);
                Complex64::new(v * (1.0 - v), 0.0)
            }
        }
    }
}

impl fmt::Display for ActivationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ActivationKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "fourier" => Ok(ActivationKind::Fourier),
            "sigmoid" => Ok(ActivationKind::Sigmoid),
            other => Err(format!("unknown activation `{other}`")),
        }
    }
}

#[inline]
fn sigmoid(t: f64) -> f64 {
    1.0 / (1.0 + (-t).exp())
}

// Three-part split of π/2; the first two parts carry 33 bits so `n · part`
// is exact for |n| < 2^20.
const PIO2_1: f64 = 1.570_796_326_734_125_614_17e0;
const PIO2_2: f64 = 6.077_100_506_303_965_976_60e-11;
const PIO2_3: f64 = 2.022_266_248_711_166_455_80e-21;
const REDUCE_LIMIT: f64 = 1.0e6;
const ROUND_MAGIC: f64 = 6_755_399_441_055_744.0; // 1.5 · 2^52

/// Replaces each `c[i]` by `cos(c[i])` and writes `sin(c[i])` into `s[i]`.
///
/// Minimax kernels on [-π/4, π/4] after Cody–Waite reduction; agrees with
/// libm to a few ulp and falls back to it beyond `REDUCE_LIMIT`.
pub(crate) fn sin_cos_in_place(c: &mut [f64], s: &mut [f64]) {
    assert_eq!(c.len(), s.len());
    if !c.iter().all(|t| t.abs() < REDUCE_LIMIT) {
        for (cv, sv) in c.iter_mut().zip(s.iter_mut()) {
            let (sin, cos) = cv.sin_cos();
            *cv = cos;
            *sv = sin;
        }
        return;
    }
    // branch-free so the loop vectorizes
    for (cv, sv) in c.iter_mut().zip(s.iter_mut()) {
        let t = *cv;
        let shifted = t * std::f64::consts::FRAC_2_PI + ROUND_MAGIC;
        let q = shifted.to_bits();
        let n = shifted - ROUND_MAGIC;
        let r = ((t - n * PIO2_1) - n * PIO2_2) - n * PIO2_3;
        let z = r * r;
        let ps = -1.666_666_666_666_663_243_48e-1
            + z * (8.333_333_333_322_489_461_24e-3
                + z * (-1.984_126_982_985_794_931_34e-4
                    + z * (2.755_731_370_707_006_767_89e-6
                        + z * (-2.505_076_025_340_686_341_95e-8 + z * 1.589_690_995_211_550_102_21e-10))));
        let pc = 4.166_666_666_666_660_190_37e-2
            + z * (-1.388_888_888_887_410_957_49e-3
                + z * (2.480_158_728_947_672_941_78e-5
                    + z * (-2.755_731_435_139_066_330_35e-7
                        + z * (2.087_572_321_298_174_827_90e-9 + z * -1.135_964_755_778_819_482_65e-11))));
        let sin_r = (r + r * z * ps).to_bits();
        let cos_r = (1.0 - 0.5 * z + z * z * pc).to_bits();
        let swap = 0u64.wrapping_sub(q & 1);
        let sign_s = (q & 2) << 62;
        let sign_c = (q.wrapping_add(1) & 2) << 62;
        *sv = f64::from_bits(((sin_r & !swap) | (cos_r & swap)) ^ sign_s);
        *cv = f64::from_bits(((cos_r & !swap) | (sin_r & swap)) ^ sign_c);
    }
}

/// Appends a column of ones.
pub fn augment_bias(x: &DMatrix<f64>) -> DMatrix<f64> {
    let (n, d) = x.shape();
    let mut out = DMatrix::from_element(n, d + 1, 1.0);
    out.columns_mut(0, d).copy_from(x);
    out
}

/// Complex `N × K` design matrix stored as the real block `[Re S | Im S]`.
///
/// Keeping the real and imaginary parts side by side lets the Gram matrix and
/// products with amplitudes run through real BLAS-style kernels.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    parts: DMatrix<f64>,
    k: usize,
}

impl DesignMatrix {
    pub fn nrows(&self) -> usize {
        self.parts.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.k
    }

    pub fn get(&self, n: usize, k: usize) -> Complex64 {
        Complex64::new(self.parts[(n, k)], self.parts[(n, self.k + k)])
    }

    /// `[Re S | Im S]`, `N × 2K`.
    pub fn real_parts(&self) -> &DMatrix<f64> {
        &self.parts
    }

    pub fn to_complex(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.nrows(), self.k, |n, k| self.get(n, k))
    }

    pub fn from_complex(s: &DMatrix<Complex64>) -> Self {
        let (n, k) = s.shape();
        let mut parts = DMatrix::zeros(n, 2 * k);
        for j in 0..k {
            for i in 0..n {
                parts[(i, j)] = s[(i, j)].re;
                parts[(i, k + j)] = s[(i, j)].im;
            }
        }
        Self { parts, k }
    }

    /// `S · β` for a `K × C` amplitude matrix.
    pub fn apply(&self, beta: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
        if beta.nrows() != self.k {
            return Err(Error::DimensionMismatch {
                context: "design matrix times amplitudes",
                expected: self.k,
                got: beta.nrows(),
            });
        }
        let (k, c) = (self.k, beta.ncols());
        // Re(Sβ) = [Re S | Im S]·[Re β; -Im β], Im(Sβ) = [Re S | Im S]·[Im β; Re β]
        let mut for_re = DMatrix::zeros(2 * k, c);
        let mut for_im = DMatrix::zeros(2 * k, c);
        for col in 0..c {
            for row in 0..k {
                let b = beta[(row, col)];
                for_re[(row, col)] = b.re;
                for_re[(k + row, col)] = -b.im;
                for_im[(row, col)] = b.im;
                for_im[(k + row, col)] = b.re;
            }
        }
        let re = linalg::matmul(&self.parts, &for_re);
        let im = linalg::matmul(&self.parts, &for_im);
        Ok(re.zip_map(&im, Complex64::new))
    }

    /// `S* · y` for real right-hand sides, `K × C`.
    pub fn adjoint_apply(&self, y: &DMatrix<f64>) -> Result<DMatrix<Complex64>> {
        if y.nrows() != self.nrows() {
            return Err(Error::DimensionMismatch {
                context: "adjoint design matrix times labels",
                expected: self.nrows(),
                got: y.nrows(),
            });
        }
        let k = self.k;
        let proj = linalg::matmul_tn(&self.parts, y);
        Ok(DMatrix::from_fn(k, y.ncols(), |row, col| {
            Complex64::new(proj[(row, col)], -proj[(k + row, col)])
        }))
    }

    /// Hermitian Gram matrix `S* S`.
    pub fn gram(&self) -> DMatrix<Complex64> {
        let k = self.k;
        let p = linalg::gram_tn(&self.parts);
        // S*S = (CᵀC + QᵀQ) + i (CᵀQ - QᵀC) with S = C + iQ
        DMatrix::from_fn(k, k, |i, j| {
            Complex64::new(
                p[(i, j)] + p[(k + i, k + j)],
                p[(i, k + j)] - p[(k + i, j)],
            )
        })
    }
}

/// Evaluates the activation of every frequency at every input point.
///
/// `x` is `N × d` and `omega` is `K × d`. For sigmoid activations `x` must
/// already carry the bias column.
pub fn build_design_matrix(
    x: &DMatrix<f64>,
    omega: &DMatrix<f64>,
    activation: ActivationKind,
) -> Result<DesignMatrix> {
    let mut s = DesignMatrix {
        parts: DMatrix::zeros(0, 0),
        k: 0,
    };
    rebuild_design_matrix(&mut s, x, omega, activation)?;
    Ok(s)
}

/// [`build_design_matrix`] reusing the storage of `s` when the shape allows.
pub fn rebuild_design_matrix(
    s: &mut DesignMatrix,
    x: &DMatrix<f64>,
    omega: &DMatrix<f64>,
    activation: ActivationKind,
) -> Result<()> {
    if x.ncols() != omega.ncols() {
        return Err(Error::DimensionMismatch {
            context: "design matrix (input dim vs frequency dim)",
            expected: omega.ncols(),
            got: x.ncols(),
        });
    }
    let (n, k) = (x.nrows(), omega.nrows());
    if s.parts.shape() != (n, 2 * k) {
        s.parts = DMatrix::zeros(n, 2 * k);
    }
    s.k = k;
    let (phase, imag) = s.parts.as_mut_slice().split_at_mut(n * k);
    phases_into(x, omega, phase);
    match activation {
        ActivationKind::Fourier => {
            sin_cos_in_place(phase, imag);
        }
        ActivationKind::Sigmoid => {
            for v in phase.iter_mut() {
                *v = sigmoid(*v);
            }
            imag.fill(0.0);
        }
    }
    Ok(())
}

/// Below this input dimension the phases are accumulated column by column,
/// which beats a packed GEMM for the rank-d product.
const DIRECT_PHASE_DIM: usize = 16;

fn phases_into(x: &DMatrix<f64>, omega: &DMatrix<f64>, out: &mut [f64]) {
    let (n, d) = x.shape();
    if n == 0 {
        return;
    }
    if d > DIRECT_PHASE_DIM {
        linalg::matmul_nt_into(x, omega, out);
        return;
    }
    for (k, col) in out.chunks_exact_mut(n).enumerate() {
        col.fill(0.0);
        for j in 0..d {
            let w = omega[(k, j)];
            for (o, xv) in col.iter_mut().zip(x.column(j).iter()) {
                *o += w * xv;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn batched_sin_cos_matches_libm() {
        let mut args: Vec<f64> = (0..200_001).map(|i| (i as f64 - 100_000.0) * 0.0137).collect();
        args.extend([0.0, -0.0, PI / 4.0, PI / 2.0, PI, 1e5 + 0.3, -9.99e5]);
        for args in [args.clone(), vec![0.5, 2e6, 1e300]] {
            let mut c = args.clone();
            let mut s = vec![0.0; args.len()];
            sin_cos_in_place(&mut c, &mut s);
            for (i, t) in args.iter().enumerate() {
                let tol = 4.0 * f64::EPSILON * t.abs().max(1.0);
                assert!((s[i] - t.sin()).abs() <= tol, "sin({t})");
                assert!((c[i] - t.cos()).abs() <= tol, "cos({t})");
            }
        }
        let mut nan = [f64::NAN];
        let mut out = [0.0];
        sin_cos_in_place(&mut nan, &mut out);
        assert!(nan[0].is_nan() && out[0].is_nan());
    }

    #[test]
    fn zero_frequency_gives_ones() {
        let x = DMatrix::from_row_slice(3, 2, &[0.3, -1.0, 2.0, 5.0, -7.0, 0.1]);
        let s = build_design_matrix(&x, &DMatrix::zeros(1, 2), ActivationKind::Fourier).unwrap();
        for n in 0..3 {
            assert_eq!(s.get(n, 0), Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn euler_at_pi() {
        let x = DMatrix::from_element(1, 1, PI);
        let s = build_design_matrix(&x, &DMatrix::from_element(1, 1, 1.0), ActivationKind::Fourier)
            .unwrap();
        assert!((s.get(0, 0) - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn sigmoid_at_zero_phase() {
        let x = augment_bias(&DMatrix::from_element(1, 1, 3.0));
        let omega = DMatrix::from_row_slice(1, 2, &[1.0, -3.0]);
        let s = build_design_matrix(&x, &omega, ActivationKind::Sigmoid).unwrap();
        assert_eq!(s.get(0, 0), Complex64::new(0.5, 0.0));
    }

    #[test]
    fn bias_column() {
        assert_eq!(
            augment_bias(&DMatrix::from_element(1, 1, 2.0)),
            DMatrix::from_row_slice(1, 2, &[2.0, 1.0])
        );
        let aug = augment_bias(&DMatrix::from_fn(3, 2, |i, j| (i * 2 + j) as f64));
        assert_eq!(aug.shape(), (3, 3));
        assert!(aug.column(2).iter().all(|&v| v == 1.0));
        assert_eq!(aug[(2, 1)], 5.0);
    }

    #[test]
    fn dimension_mismatch() {
        let err = build_design_matrix(
            &DMatrix::zeros(2, 3),
            &DMatrix::zeros(4, 2),
            ActivationKind::Fourier,
        );
        assert!(matches!(err, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn products_match_complex_arithmetic() {
        let x = DMatrix::from_fn(6, 2, |i, j| (i as f64 * 0.7 - j as f64 * 1.3).sin());
        let omega = DMatrix::from_fn(3, 2, |i, j| (i + 2 * j) as f64 * 0.4 - 0.9);
        let s = build_design_matrix(&x, &omega, ActivationKind::Fourier).unwrap();
        let sc = s.to_complex();
        let beta = DMatrix::from_fn(3, 2, |i, j| Complex64::new(i as f64 - 1.0, 0.5 * j as f64 + 0.2));
        assert!((s.apply(&beta).unwrap() - &sc * &beta).map(|v| v.norm()).max() < 1e-13);
        let y = DMatrix::from_fn(6, 2, |i, j| (i * j) as f64 - 2.0);
        let yc = y.map(|v| Complex64::new(v, 0.0));
        assert!((s.adjoint_apply(&y).unwrap() - sc.adjoint() * yc).map(|v| v.norm()).max() < 1e-13);
        assert!((s.gram() - sc.adjoint() * &sc).map(|v| v.norm()).max() < 1e-13);
        assert_eq!(DesignMatrix::from_complex(&sc), s);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        for act in [ActivationKind::Fourier, ActivationKind::Sigmoid] {
            for &t in &[-2.0, -0.3, 0.0, 0.8, 3.1] {
                let h = 1e-6;
                let fd = (act.eval(t + h) - act.eval(t - h)) / (2.0 * h);
                assert!((fd - act.derivative(t)).norm() < 1e-8);
            }
        }
    }
}
