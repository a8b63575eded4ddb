//! Reference implementations shared by the integration tests. None of these
//! call into the library's numerics.

#![allow(dead_code)]

use std::f64::consts::FRAC_PI_2;

use arff_core::{Complex64, DMatrix};

/// Least squares `min |A x - b|` by Householder QR on a dense row-major copy.
pub fn householder_lstsq(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let m = a.len();
    let n = a[0].len();
    assert!(m >= n);
    let mut r: Vec<Vec<f64>> = a.to_vec();
    let mut rhs = b.to_vec();
    for j in 0..n {
        let norm = (j..m).map(|i| r[i][j] * r[i][j]).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if r[j][j] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (j..m).map(|i| r[i][j]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|t| t * t).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        for col in j..n {
            let dot: f64 = (j..m).map(|i| v[i - j] * r[i][col]).sum();
            let f = 2.0 * dot / vnorm2;
            for i in j..m {
                r[i][col] -= f * v[i - j];
            }
        }
        let dot: f64 = (j..m).map(|i| v[i - j] * rhs[i]).sum();
        let f = 2.0 * dot / vnorm2;
        for i in j..m {
            rhs[i] -= f * v[i - j];
        }
    }
    let mut x = vec![0.0; n];
    for j in (0..n).rev() {
        let s: f64 = (j + 1..n).map(|k| r[j][k] * x[k]).sum();
        x[j] = (rhs[j] - s) / r[j][j];
    }
    x
}

/// Ridge-regularized complex least squares `N⁻¹|Sβ - y|² + λ|β|²` for one
/// real label column, via the real embedding and a stacked QR solve.
pub fn ridge_oracle(s: &DMatrix<Complex64>, y: &[f64], lambda: f64) -> Vec<Complex64> {
    let (n, k) = s.shape();
    let root = (lambda * n as f64).sqrt();
    let mut rows = Vec::with_capacity(2 * n + 2 * k);
    let mut rhs = Vec::with_capacity(2 * n + 2 * k);
    for i in 0..n {
        let mut re = vec![0.0; 2 * k];
        let mut im = vec![0.0; 2 * k];
        for j in 0..k {
            let v = s[(i, j)];
            re[j] = v.re;
            re[k + j] = -v.im;
            im[j] = v.im;
            im[k + j] = v.re;
        }
        rows.push(re);
        rhs.push(y[i]);
        rows.push(im);
        rhs.push(0.0);
    }
    if lambda > 0.0 {
        for j in 0..2 * k {
            let mut row = vec![0.0; 2 * k];
            row[j] = root;
            rows.push(row);
            rhs.push(0.0);
        }
    }
    let x = householder_lstsq(&rows, &rhs);
    (0..k).map(|j| Complex64::new(x[j], x[k + j])).collect()
}

/// Sine integral: power series for small arguments, continued fraction for
/// `E₁(ix)` otherwise.
pub fn si_oracle(x: f64) -> f64 {
    if x < 0.0 {
        return -si_oracle(-x);
    }
    if x <= 2.0 {
        let mut sum = 0.0;
        let mut term = x;
        let mut k = 0usize;
        loop {
            let add = term / (2 * k + 1) as f64;
            sum += add;
            if add.abs() < 1e-18 {
                return sum;
            }
            k += 1;
            term *= -x * x / ((2 * k) * (2 * k + 1)) as f64;
        }
    }
    let tiny = 1e-300;
    let mut b = Complex64::new(1.0, x);
    let mut c = Complex64::new(1.0 / tiny, 0.0);
    let mut d = Complex64::new(1.0, 0.0) / b;
    let mut h = d;
    for i in 2..10_000 {
        let a = -(((i - 1) * (i - 1)) as f64);
        b += Complex64::new(2.0, 0.0);
        d = Complex64::new(1.0, 0.0) / (d * a + b);
        c = b + Complex64::new(a, 0.0) / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).norm() < 1e-16 {
            break;
        }
    }
    let h = Complex64::new(x.cos(), -x.sin()) * h;
    FRAC_PI_2 + h.im
}

/// Largest relative mismatch `|fd - g| / max(|g|, 1)` between the analytic
/// gradient and central differences with step `h`, over every real
/// parameter: frequencies, then real and imaginary parts of the amplitudes.
pub fn gradient_mismatch(
    x: &DMatrix<f64>,
    y: &DMatrix<f64>,
    omega: &DMatrix<f64>,
    beta: &DMatrix<Complex64>,
    activation: arff_core::features::ActivationKind,
    h: f64,
) -> f64 {
    use arff_core::baselines::{empirical_loss, loss_and_gradient};
    let (_, grad) = loss_and_gradient(x, y, omega, beta, activation, None).unwrap();
    let loss = |o: &DMatrix<f64>, b: &DMatrix<Complex64>| empirical_loss(x, y, o, b, activation).unwrap();
    let rel = |fd: f64, g: f64| (fd - g).abs() / g.abs().max(1.0);
    let mut worst: f64 = 0.0;
    for idx in 0..omega.len() {
        let (mut up, mut down) = (omega.clone(), omega.clone());
        up[idx] += h;
        down[idx] -= h;
        let fd = (loss(&up, beta) - loss(&down, beta)) / (2.0 * h);
        worst = worst.max(rel(fd, grad.omega[idx]));
    }
    for idx in 0..beta.len() {
        for (step, analytic) in [
            (Complex64::new(h, 0.0), grad.beta[idx].re),
            (Complex64::new(0.0, h), grad.beta[idx].im),
        ] {
            let (mut up, mut down) = (beta.clone(), beta.clone());
            up[idx] += step;
            down[idx] -= step;
            let fd = (loss(omega, &up) - loss(omega, &down)) / (2.0 * h);
            worst = worst.max(rel(fd, analytic));
        }
    }
    worst
}

/// 2-norm condition number of the real embedding `[[Re, -Im], [Im, Re]]`,
/// from the eigenvalues of its Gram matrix by Jacobi rotations.
pub fn embedding_condition(s: &DMatrix<Complex64>) -> f64 {
    let (n, k) = s.shape();
    let m = 2 * k;
    let col = |j: usize, i: usize| -> f64 {
        // rows 0..n are the real parts, n..2n the imaginary parts
        let (r, im_row) = (i % n, i >= n);
        let v = s[(r, j % k)];
        match (j >= k, im_row) {
            (false, false) => v.re,
            (false, true) => v.im,
            (true, false) => -v.im,
            (true, true) => v.re,
        }
    };
    let mut g = vec![vec![0.0; m]; m];
    for a in 0..m {
        for b in 0..m {
            g[a][b] = (0..2 * n).map(|i| col(a, i) * col(b, i)).sum();
        }
    }
    for _sweep in 0..100 {
        let off: f64 = (0..m).flat_map(|a| (0..m).filter(move |&b| b != a).map(move |b| (a, b))).map(|(a, b)| g[a][b] * g[a][b]).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..m {
            for q in p + 1..m {
                if g[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (g[q][q] - g[p][p]) / (2.0 * g[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for r in 0..m {
                    let (gp, gq) = (g[r][p], g[r][q]);
                    g[r][p] = c * gp - sn * gq;
                    g[r][q] = sn * gp + c * gq;
                }
                for r in 0..m {
                    let (gp, gq) = (g[p][r], g[q][r]);
                    g[p][r] = c * gp - sn * gq;
                    g[q][r] = sn * gp + c * gq;
                }
            }
        }
    }
    let eig: Vec<f64> = (0..m).map(|a| g[a][a].max(0.0)).collect();
    let max = eig.iter().cloned().fold(0.0, f64::max);
    let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
    (max / min).sqrt()
}
