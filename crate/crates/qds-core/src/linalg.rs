//! Dense complex linear algebra helpers shared by the rest of the crate.
//!
//! Vectorization stacks columns: `vec(A X B) = (Bᵀ ⊗ A) vec(X)`. nalgebra
//! stores matrices column-major, so this is the storage order itself.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::math;

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

#[inline]
pub fn re(x: f64) -> C64 {
    Complex::new(x, 0.0)
}

pub fn identity(d: usize) -> CMat {
    CMat::identity(d, d)
}

pub fn zeros(r: usize, c: usize) -> CMat {
    CMat::zeros(r, c)
}

/// Builds a complex matrix from real row-major entries.
pub fn from_real_rows(rows: usize, cols: usize, entries: &[f64]) -> CMat {
    CMat::from_fn(rows, cols, |i, j| re(entries[i * cols + j]))
}

pub fn diag_real(entries: &[f64]) -> CMat {
    let d = entries.len();
    CMat::from_fn(d, d, |i, j| if i == j { re(entries[i]) } else { re(0.0) })
}

pub fn pauli_x() -> CMat {
    from_real_rows(2, 2, &[0.0, 1.0, 1.0, 0.0])
}

pub fn pauli_y() -> CMat {
    CMat::from_row_slice(2, 2, &[re(0.0), c(0.0, -1.0), c(0.0, 1.0), re(0.0)])
}

pub fn pauli_z() -> CMat {
    from_real_rows(2, 2, &[1.0, 0.0, 0.0, -1.0])
}

/// Lowering operator `|0⟩⟨1|` with `|0⟩` the ground state.
pub fn sigma_minus() -> CMat {
    from_real_rows(2, 2, &[0.0, 1.0, 0.0, 0.0])
}

pub fn vectorize(x: &CMat) -> CVec {
    CVec::from_column_slice(x.as_slice())
}

pub fn unvectorize(v: &CVec, d: usize) -> CMat {
    CMat::from_column_slice(d, d, v.as_slice())
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// `(x + x†) / 2`
pub fn hermitian_part(x: &CMat) -> CMat {
    (x + x.adjoint()) * re(0.5)
}

pub fn hermiticity_residual(x: &CMat) -> f64 {
    op_norm(&(x - x.adjoint()))
}

/// Largest singular value.
pub fn op_norm(x: &CMat) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.clone().singular_values().max()
}

/// Sum of singular values.
pub fn trace_norm(x: &CMat) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.clone().singular_values().sum()
}

pub fn one_norm(x: &CMat) -> f64 {
    (0..x.ncols())
        .map(|j| x.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn trace(x: &CMat) -> C64 {
    x.trace()
}

pub fn is_finite(x: &CMat) -> bool {
    x.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Eigen-decomposition of the hermitian part of `x`, eigenvalues ascending.
pub fn hermitian_eigen(x: &CMat) -> (Vec<f64>, CMat) {
    let d = x.nrows();
    if d == 0 {
        return (Vec::new(), CMat::zeros(0, 0));
    }
    let eig = hermitian_part(x).symmetric_eigen();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMat::from_fn(d, d, |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

pub fn min_eigenvalue(x: &CMat) -> f64 {
    hermitian_eigen(x).0.first().copied().unwrap_or(0.0)
}

pub fn max_eigenvalue(x: &CMat) -> f64 {
    hermitian_eigen(x).0.last().copied().unwrap_or(0.0)
}

/// Singular value decomposition with singular values sorted descending.
pub struct SortedSvd {
    pub singular_values: Vec<f64>,
    /// Left singular vectors as columns.
    pub left: CMat,
    /// Right singular vectors as columns.
    pub right: CMat,
}

pub fn svd_sorted(m: &CMat) -> SortedSvd {
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("left singular vectors requested");
    let v_t = svd.v_t.expect("right singular vectors requested");
    let k = svd.singular_values.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let singular_values = order.iter().map(|&i| svd.singular_values[i]).collect();
    let left = CMat::from_fn(u.nrows(), k, |i, j| u[(i, order[j])]);
    let right = CMat::from_fn(v_t.ncols(), k, |i, j| v_t[(order[j], i)].conj());
    SortedSvd {
        singular_values,
        left,
        right,
    }
}

/// The `k` right and left singular vectors belonging to the smallest
/// singular values of a square matrix, plus the `k`-th smallest singular
/// value (the largest one that was treated as zero).
pub fn smallest_singular_subspaces(m: &CMat, k: usize) -> (CMat, CMat, f64) {
    let n = m.ncols();
    debug_assert_eq!(m.nrows(), n);
    let svd = svd_sorted(m);
    let start = n - k;
    let right = svd.right.columns(start, k).into_owned();
    // Left vectors of (near) zero singular values are taken from the
    // adjoint; the U factor loses accuracy there.
    let left = svd_sorted(&m.adjoint()).right.columns(start, k).into_owned();
    let worst = if k == 0 { 0.0 } else { svd.singular_values[start] };
    (right, left, worst)
}

/// Number of singular values not exceeding `abs_tol`, and an orthonormal
/// basis of the corresponding right singular vectors (numerical kernel).
pub fn kernel(m: &CMat, abs_tol: f64) -> CMat {
    let svd = svd_sorted(m);
    let n = m.ncols();
    let mut rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > abs_tol)
        .count();
    // For wide matrices the thin SVD has fewer right vectors than columns.
    if svd.right.ncols() < n {
        let full = m.adjoint() * m;
        let svd_full = svd_sorted(&full);
        rank = svd_full
            .singular_values
            .iter()
            .filter(|&&s| s > abs_tol * abs_tol)
            .count();
        return svd_full.right.columns(rank, n - rank).into_owned();
    }
    svd.right.columns(rank, n - rank).into_owned()
}

/// Gram–Schmidt step (two passes). Appends the normalized residual of `v`
/// against `basis` when its norm exceeds `abs_tol`.
pub fn extend_orthonormal(basis: &mut Vec<CVec>, v: &CVec, abs_tol: f64) -> bool {
    let mut w = v.clone();
    for _ in 0..2 {
        for b in basis.iter() {
            let proj = b.dotc(&w);
            w -= b * proj;
        }
    }
    let n = w.norm();
    if n > abs_tol && n > 0.0 {
        basis.push(w / re(n));
        true
    } else {
        false
    }
}

pub fn columns_to_matrix(rows: usize, vectors: &[CVec]) -> CMat {
    let mut m = CMat::zeros(rows, vectors.len());
    for (j, v) in vectors.iter().enumerate() {
        m.set_column(j, v);
    }
    m
}

pub fn matrix_to_columns(m: &CMat) -> Vec<CVec> {
    (0..m.ncols()).map(|j| m.column(j).into_owned()).collect()
}

/// Orthonormal basis of the column span of `m` (columns with residual
/// below `abs_tol` are dropped).
pub fn orthonormal_columns(m: &CMat, abs_tol: f64) -> CMat {
    let mut basis = Vec::new();
    for j in 0..m.ncols() {
        let v = m.column(j).into_owned();
        extend_orthonormal(&mut basis, &v, abs_tol);
    }
    columns_to_matrix(m.nrows(), &basis)
}

/// `m^n` by repeated squaring.
pub fn matrix_power(m: &CMat, mut n: u64) -> CMat {
    let mut result = identity(m.nrows());
    let mut base = m.clone();
    while n > 0 {
        if n & 1 == 1 {
            result = &result * &base;
        }
        n >>= 1;
        if n > 0 {
            base = &base * &base;
        }
    }
    result
}

const PADE13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

const THETA13: f64 = 5.371_920_351_148_152;

/// Matrix exponential by scaling and squaring with a degree-13 Padé
/// approximant.
pub fn expm(a: &CMat) -> CMat {
    let n = a.nrows();
    if n == 0 {
        return a.clone();
    }
    let norm = one_norm(a);
    let squarings = if norm > THETA13 {
        math::ceil(math::log2(norm / THETA13)).max(0.0) as u32
    } else {
        0
    };
    let scaled = a * re(libm::ldexp(1.0, -(squarings as i32)));
    let b = |i: usize| re(PADE13[i]);
    let eye = identity(n);
    let a2 = &scaled * &scaled;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_inner = &a6 * (&a6 * b(13) + &a4 * b(11) + &a2 * b(9))
        + &a6 * b(7)
        + &a4 * b(5)
        + &a2 * b(3)
        + &eye * b(1);
    let u = &scaled * u_inner;
    let v = &a6 * (&a6 * b(12) + &a4 * b(10) + &a2 * b(8))
        + &a6 * b(6)
        + &a4 * b(4)
        + &a2 * b(2)
        + &eye * b(0);
    let denom = &v - &u;
    let numer = &v + &u;
    let mut r = denom
        .lu()
        .solve(&numer)
        .expect("Padé denominator is invertible for scaled arguments");
    for _ in 0..squarings {
        r = &r * &r;
    }
    r
}

/// Orthogonal projection onto the column span of an orthonormal basis.
pub fn projector_from_basis(basis: &CMat) -> CMat {
    basis * basis.adjoint()
}
