//! Thin wrappers over `matrixmultiply` for the column-major products that
//! dominate training time.

use nalgebra::DMatrix;

/// Column block width for the symmetric product.
const SYRK_BLOCK: usize = 128;

/// `A · B` for column-major matrices.
pub fn matmul(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    assert_eq!(a.ncols(), b.nrows(), "matmul: inner dimensions differ");
    let (m, k, n) = (a.nrows(), a.ncols(), b.ncols());
    let mut c = DMatrix::<f64>::zeros(m, n);
    if m == 0 || n == 0 || k == 0 {
        return c;
    }
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            1,
            m as isize,
            b.as_ptr(),
            1,
            k as isize,
            0.0,
            c.as_mut_ptr(),
            1,
            m as isize,
        );
    }
    c
}

/// `Aᵀ · B` without materializing the transpose.
pub fn matmul_tn(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    assert_eq!(a.nrows(), b.nrows(), "matmul_tn: row counts differ");
    let (inner, m, n) = (a.nrows(), a.ncols(), b.ncols());
    let mut c = DMatrix::<f64>::zeros(m, n);
    if m == 0 || n == 0 || inner == 0 {
        return c;
    }
    unsafe {
        matrixmultiply::dgemm(
            m,
            inner,
            n,
            1.0,
            a.as_ptr(),
            inner as isize,
            1,
            b.as_ptr(),
            1,
            inner as isize,
            0.0,
            c.as_mut_ptr(),
            1,
            m as isize,
        );
    }
    c
}

/// `A · Bᵀ` without materializing the transpose.
pub fn matmul_nt(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let mut c = DMatrix::<f64>::zeros(a.nrows(), b.nrows());
    matmul_nt_into(a, b, c.as_mut_slice());
    c
}

/// `A · Bᵀ` written into a column-major buffer of `a.nrows() * b.nrows()` values.
pub(crate) fn matmul_nt_into(a: &DMatrix<f64>, b: &DMatrix<f64>, out: &mut [f64]) {
    assert_eq!(a.ncols(), b.ncols(), "matmul_nt: column counts differ");
    let (m, inner, n) = (a.nrows(), a.ncols(), b.nrows());
    assert_eq!(out.len(), m * n);
    if m == 0 || n == 0 {
        return;
    }
    if inner == 0 {
        out.fill(0.0);
        return;
    }
    unsafe {
        matrixmultiply::dgemm(
            m,
            inner,
            n,
            1.0,
            a.as_ptr(),
            1,
            m as isize,
            b.as_ptr(),
            n as isize,
            1,
            0.0,
            out.as_mut_ptr(),
            1,
            m as isize,
        );
    }
}

/// Symmetric `Aᵀ · A`. Only the upper block triangle is multiplied; the
/// lower part is mirrored, so the result is exactly symmetric.
pub fn gram_tn(a: &DMatrix<f64>) -> DMatrix<f64> {
    let (rows, cols) = a.shape();
    let mut g = DMatrix::<f64>::zeros(cols, cols);
    if rows == 0 || cols == 0 {
        return g;
    }
    let blocks: Vec<(usize, usize)> = (0..cols)
        .step_by(SYRK_BLOCK)
        .map(|start| (start, SYRK_BLOCK.min(cols - start)))
        .collect();
    let base = a.as_ptr();
    let out = g.as_mut_ptr();
    for (bi, &(ri, wi)) in blocks.iter().enumerate() {
        for &(cj, wj) in &blocks[bi..] {
            unsafe {
                matrixmultiply::dgemm(
                    wi,
                    rows,
                    wj,
                    1.0,
                    base.add(ri * rows),
                    rows as isize,
                    1,
                    base.add(cj * rows),
                    1,
                    rows as isize,
                    0.0,
                    out.add(ri + cj * cols),
                    1,
                    cols as isize,
                );
            }
        }
    }
    for j in 0..cols {
        for i in (j + 1)..cols {
            g[(i, j)] = g[(j, i)];
        }
    }
    g
}
