// Copyright 2026 The oqs-ident Authors
// SPDX-License-Identifier: Apache-2.0

//! Dense linear-algebra helpers on top of nalgebra.
//!
//! Numerical rank everywhere in the crate follows one rule: a singular value
//! counts if it exceeds `max(rows, cols) * eps * sigma_max`, unless the
//! caller overrides the relative cutoff.

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::scalar::{cabs, creal, Real};

pub type CMatrix<T> = DMatrix<Complex<T>>;
pub type CVector<T> = DVector<Complex<T>>;

/// Absolute singular-value threshold for a matrix of the given shape.
pub fn rank_threshold<T: Real>(sigma_max: T, rows: usize, cols: usize, rel: Option<T>) -> T {
    let rel = rel.unwrap_or_else(|| T::lit(rows.max(cols) as f64) * T::default_epsilon());
    rel * sigma_max
}

fn count_above<T: Real>(sv: &DVector<T>, thresh: T) -> usize {
    sv.iter().filter(|&&s| s > thresh).count()
}

pub fn numerical_rank<T: Real>(m: &DMatrix<T>, rel: Option<T>) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.singular_values();
    let smax = sv.max();
    if smax <= T::zero() {
        return 0;
    }
    count_above(&sv, rank_threshold(smax, m.nrows(), m.ncols(), rel))
}

pub fn numerical_rank_c<T: Real>(m: &CMatrix<T>, rel: Option<T>) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.singular_values();
    let smax = sv.max();
    if smax <= T::zero() {
        return 0;
    }
    count_above(&sv, rank_threshold(smax, m.nrows(), m.ncols(), rel))
}

pub fn spectral_norm<T: Real>(m: &DMatrix<T>) -> T {
    if m.is_empty() {
        return T::zero();
    }
    m.singular_values().max()
}

pub fn spectral_norm_c<T: Real>(m: &CMatrix<T>) -> T {
    if m.is_empty() {
        return T::zero();
    }
    m.singular_values().max()
}

/// Least-squares (minimum-norm) solution of `m x = rhs` and its residual norm.
pub fn lstsq<T: Real>(m: &DMatrix<T>, rhs: &DVector<T>, rel: Option<T>) -> (DVector<T>, T) {
    let svd = m.clone().svd(true, true);
    let smax = if svd.singular_values.is_empty() { T::zero() } else { svd.singular_values.max() };
    let eps = rank_threshold(smax, m.nrows(), m.ncols(), rel);
    let x = svd.solve(rhs, eps).unwrap_or_else(|_| DVector::zeros(m.ncols()));
    let res = (m * &x - rhs).norm();
    (x, res)
}

pub fn lstsq_c<T: Real>(m: &CMatrix<T>, rhs: &CVector<T>, rel: Option<T>) -> (CVector<T>, T) {
    let svd = m.clone().svd(true, true);
    let smax = if svd.singular_values.is_empty() { T::zero() } else { svd.singular_values.max() };
    let eps = rank_threshold(smax, m.nrows(), m.ncols(), rel);
    let x = svd.solve(rhs, eps).unwrap_or_else(|_| DVector::zeros(m.ncols()));
    let res = (m * &x - rhs).norm();
    (x, res)
}

/// Moore-Penrose pseudoinverse via SVD.
pub fn pinv<T: Real>(m: &DMatrix<T>, rel: Option<T>) -> DMatrix<T> {
    if m.is_empty() {
        return DMatrix::zeros(m.ncols(), m.nrows());
    }
    let svd = m.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let eps = rank_threshold(smax, m.nrows(), m.ncols(), rel);
    svd.pseudo_inverse(eps).unwrap_or_else(|_| DMatrix::zeros(m.ncols(), m.nrows()))
}

pub fn to_complex<T: Real>(m: &DMatrix<T>) -> CMatrix<T> {
    m.map(creal)
}

pub fn max_imag<T: Real>(m: &CMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, z| acc.max(z.im.abs()))
}

/// Real part of `m`, failing when any imaginary residue reaches the
/// scalar's `IMAG_TOLERANCE`.
pub fn real_part_checked<T: Real>(m: &CMatrix<T>, what: &str) -> Result<DMatrix<T>> {
    let residue = max_imag(m);
    if residue >= T::lit(T::IMAG_TOLERANCE) {
        return Err(Error::ImaginaryResidue { what: what.to_string(), residue: residue.as_f64() });
    }
    Ok(m.map(|z| z.re))
}

/// Row-major vectorisation: entry `(j, k)` lands at `j * ncols + k`.
pub fn vec_row_major<T: nalgebra::Scalar + Copy>(m: &DMatrix<T>) -> DVector<T> {
    DVector::from_iterator(m.len(), (0..m.nrows()).flat_map(|j| (0..m.ncols()).map(move |k| m[(j, k)])))
}

pub fn unvec_row_major<T: nalgebra::Scalar + Copy>(v: &DVector<T>, rows: usize, cols: usize) -> DMatrix<T> {
    assert_eq!(v.len(), rows * cols, "vector length does not match matrix shape");
    DMatrix::from_row_slice(rows, cols, v.as_slice())
}

pub fn commutator<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    a * b - b * a
}

pub fn anticommutator<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    a * b + b * a
}

pub fn trace_product<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> Complex<T> {
    // Tr(AB) = sum_ij A_ij B_ji
    let mut acc = Complex::new(T::zero(), T::zero());
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

pub fn hermitian_deviation<T: Real>(m: &CMatrix<T>) -> T {
    let d = m - m.adjoint();
    d.iter().fold(T::zero(), |acc, z| acc.max(cabs(*z)))
}

/// Smallest eigenvalue of a (numerically) Hermitian matrix.
pub fn hermitian_min_eigenvalue<T: Real>(m: &CMatrix<T>) -> T {
    let h = (m + m.adjoint()) * creal(T::lit(0.5));
    SymmetricEigen::new(h).eigenvalues.min()
}

pub fn symmetric_min_eigenvalue<T: Real>(m: &DMatrix<T>) -> T {
    let h = (m + m.transpose()) * T::lit(0.5);
    SymmetricEigen::new(h).eigenvalues.min()
}

/// `exp(A * tau)` together with `int_0^tau exp(A t) dt`, both read off the
/// exponential of the block matrix `[[A, I], [0, 0]] * tau`.
pub fn expm_with_integral<T: Real>(a: &DMatrix<T>, tau: T) -> (DMatrix<T>, DMatrix<T>) {
    let n = a.nrows();
    let mut block = DMatrix::zeros(2 * n, 2 * n);
    block.view_mut((0, 0), (n, n)).copy_from(&(a * tau));
    block.view_mut((0, n), (n, n)).fill_with_identity();
    block.view_mut((0, n), (n, n)).scale_mut(tau);
    let e = block.exp();
    (e.view((0, 0), (n, n)).into_owned(), e.view((0, n), (n, n)).into_owned())
}

pub fn expm<T: Real>(a: &DMatrix<T>) -> DMatrix<T> {
    a.exp()
}

/// Orthonormal basis of the `dim` least-significant right singular vectors
/// of `m`, with the largest discarded singular value and the smallest kept
/// one (in that order) so callers can judge how well-defined the null space is.
pub fn null_space_c<T: Real>(m: &CMatrix<T>, dim: usize) -> (CMatrix<T>, T, T) {
    let n = m.ncols();
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let sv = &svd.singular_values;
    let mut basis = CMatrix::zeros(n, dim);
    for (c, row) in (n - dim..n).enumerate() {
        for r in 0..n {
            basis[(r, c)] = v_t[(row, r)].conj();
        }
    }
    let null_max = if dim == 0 { T::zero() } else { sv[n - 1].max(sv[n - dim]) };
    let kept_min = if dim == n { T::zero() } else { sv[n - dim - 1] };
    (basis, null_max, kept_min)
}

pub fn max_abs<T: Real>(m: &DMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, &x| acc.max(x.abs()))
}

pub fn max_abs_c<T: Real>(m: &CMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, z| acc.max(cabs(*z)))
}
