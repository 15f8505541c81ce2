//! Small dense linear-algebra helpers backed by faer.

use faer::prelude::*;
use faer_ext::{IntoFaerComplex, IntoNdarrayComplex};
use ndarray::Array2;
use num_complex::Complex64;

use crate::{CMat, CVec};

/// Eigenvalues and right eigenvectors (columns) of a general complex matrix.
pub fn eig(m: &CMat) -> (CVec, CMat) {
    let f = m.view().into_faer_complex();
    let evd = f.complex_eigendecomposition();
    let n = m.nrows();
    let vals = CVec::from_iter((0..n).map(|i| {
        let v = evd.s().column_vector().read(i);
        Complex64::new(v.re, v.im)
    }));
    let vecs = evd.u().into_ndarray_complex().map(|c| Complex64::new(c.re, c.im));
    (vals, vecs)
}

/// Eigenvalues of a Hermitian matrix (ascending).
pub fn eigvalsh(m: &CMat) -> Vec<f64> {
    let f = m.view().into_faer_complex();
    let evd = f.selfadjoint_eigendecomposition(faer::Side::Lower);
    let n = m.nrows();
    (0..n).map(|i| evd.s().column_vector().read(i).re).collect()
}

/// Matrix inverse via partial-pivot LU. Panics on non-square input.
pub fn inverse(m: &CMat) -> CMat {
    let f = m.view().into_faer_complex();
    let inv = f.partial_piv_lu().inverse();
    inv.as_ref().into_ndarray_complex().map(|c| Complex64::new(c.re, c.im))
}

/// Solve `a x = b` for a square `a` and matrix right-hand side.
pub fn solve(a: &CMat, b: &CMat) -> CMat {
    let fa = a.view().into_faer_complex();
    let fb = b.view().into_faer_complex();
    let x = fa.partial_piv_lu().solve(fb);
    x.as_ref().into_ndarray_complex().map(|c| Complex64::new(c.re, c.im))
}

/// 2-norm condition number from the singular values.
pub fn cond(m: &CMat) -> f64 {
    let f = m.view().into_faer_complex();
    let svd = f.svd();
    let s = svd.s_diagonal();
    let n = s.nrows();
    let smax = s.read(0).re;
    let smin = s.read(n - 1).re;
    if smin <= 0.0 {
        f64::INFINITY
    } else {
        smax / smin
    }
}

/// Dense complex matrix product through faer's SIMD kernels; much faster
/// than the generic ndarray fallback for the sizes the Fock oracle uses.
pub fn matmul(a: &CMat, b: &CMat) -> CMat {
    let fa = a.view().into_faer_complex();
    let fb = b.view().into_faer_complex();
    let prod = fa * fb;
    prod.as_ref().into_ndarray_complex().map(|c| Complex64::new(c.re, c.im))
}

pub fn frobenius(m: &CMat) -> f64 {
    m.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Matrix exponential by scaling-and-squaring with a degree-13 Padé
/// approximant; relative error well below 1e-12 for the sizes used here.
pub fn expm(m: &CMat) -> CMat {
    let n = m.nrows();
    assert_eq!(n, m.ncols());
    // 1-norm of the matrix
    let norm1 = (0..n)
        .map(|j| (0..n).map(|i| m[[i, j]].norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let theta13 = 5.371920351148152;
    let s = if norm1 > theta13 {
        (norm1 / theta13).log2().ceil() as i32
    } else {
        0
    };
    let a = m.mapv(|x| x / 2f64.powi(s));

    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    let id: CMat = Array2::eye(n);
    let a2 = a.dot(&a);
    let a4 = a2.dot(&a2);
    let a6 = a2.dot(&a4);
    let u_inner = &a6 * B[13] + &a4 * B[11] + &a2 * B[9];
    let u = a.dot(&(a6.dot(&u_inner) + &a6 * B[7] + &a4 * B[5] + &a2 * B[3] + &id * B[1]));
    let v_inner = &a6 * B[12] + &a4 * B[10] + &a2 * B[8];
    let v = a6.dot(&v_inner) + &a6 * B[6] + &a4 * B[4] + &a2 * B[2] + &id * B[0];
    let mut r = solve(&(&v - &u), &(&v + &u));
    for _ in 0..s {
        r = r.dot(&r);
    }
    r
}
