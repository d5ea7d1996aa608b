// Copyright 2026 The oqs-ident Authors
// SPDX-License-Identifier: Apache-2.0

//! Generalized Pauli bases of su(2^q) and their structure constants.
//!
//! Generators are tensor products of Pauli matrices indexed by words over
//! `{I, x, y, z}` (the all-identity word excluded), ordered lexicographically
//! with `I < x < y < z` and the first letter most significant. For two qubits
//! this gives `Ix, Iy, Iz, xI, xx, ..., zz`. Indices are 0-based in the API
//! and 1-based in serialized artifacts.
//!
//! Every Pauli word is a monomial matrix (one nonzero per row), which the
//! structure-constant extraction exploits: `Tr(P F_l)` can only be nonzero
//! when `F_l` carries the inverse permutation of `P`.

use std::collections::HashMap;

use nalgebra::Complex;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::scalar::{cabs, cplx, creal, Real};

const LETTERS: [char; 4] = ['I', 'x', 'y', 'z'];

/// Sparse monomial matrix: row `r` has its single entry at column `perm[r]`.
#[derive(Clone, Debug)]
struct Monomial<T: Real> {
    perm: Vec<usize>,
    vals: Vec<Complex<T>>,
}

impl<T: Real> Monomial<T> {
    fn mul(&self, rhs: &Self) -> Self {
        let perm = self.perm.iter().map(|&c| rhs.perm[c]).collect();
        let vals = self.perm.iter().zip(&self.vals).map(|(&c, &v)| v * rhs.vals[c]).collect();
        Monomial { perm, vals }
    }

    /// `Tr(self * other)`.
    fn trace_with(&self, other: &Self) -> Complex<T> {
        let mut acc = creal(T::zero());
        for (r, (&c, &v)) in self.perm.iter().zip(&self.vals).enumerate() {
            if other.perm[c] == r {
                acc += v * other.vals[c];
            }
        }
        acc
    }

    fn to_dense(&self) -> CMatrix<T> {
        let n = self.perm.len();
        let mut m = CMatrix::zeros(n, n);
        for (r, (&c, &v)) in self.perm.iter().zip(&self.vals).enumerate() {
            m[(r, c)] = v;
        }
        m
    }
}

fn pauli_monomial<T: Real>(word: &[u8], scale: T) -> Monomial<T> {
    let q = word.len();
    let dim = 1usize << q;
    let one = T::one();
    let mut perm = vec![0usize; dim];
    let mut vals = vec![creal(scale); dim];
    for r in 0..dim {
        let mut col = 0usize;
        for (pos, &letter) in word.iter().enumerate() {
            let shift = q - 1 - pos;
            let bit = (r >> shift) & 1;
            let (cbit, v) = match letter {
                0 => (bit, creal(one)),
                1 => (bit ^ 1, creal(one)),
                2 => (bit ^ 1, if bit == 0 { cplx(T::zero(), -one) } else { cplx(T::zero(), one) }),
                _ => (bit, if bit == 0 { creal(one) } else { creal(-one) }),
            };
            col |= cbit << shift;
            vals[r] *= v;
        }
        perm[r] = col;
    }
    Monomial { perm, vals }
}

/// Trace-orthonormal Hermitian basis of su(2^q).
#[derive(Clone, Debug)]
pub struct LieBasis<T: Real> {
    num_qubits: usize,
    words: Vec<Vec<u8>>,
    monomials: Vec<Monomial<T>>,
    generators: Vec<CMatrix<T>>,
    identity_component: CMatrix<T>,
    /// `Tr(F_j^2)`, identical for all generators.
    norm_sq: T,
}

impl<T: Real> LieBasis<T> {
    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    /// Hilbert-space dimension `N = 2^q`.
    pub fn hilbert_dim(&self) -> usize {
        1 << self.num_qubits
    }

    /// Number of generators `n = N^2 - 1`.
    pub fn n(&self) -> usize {
        self.generators.len()
    }

    pub fn generators(&self) -> &[CMatrix<T>] {
        &self.generators
    }

    pub fn generator(&self, j: usize) -> &CMatrix<T> {
        &self.generators[j]
    }

    /// `F_0 = 1/sqrt(N)` for the normalized basis.
    pub fn identity_component(&self) -> &CMatrix<T> {
        &self.identity_component
    }

    /// `Tr(F_j^2)`: 1 for the normalized basis, `N` for raw Paulis.
    pub fn norm_sq(&self) -> T {
        self.norm_sq
    }

    pub fn word(&self, j: usize) -> String {
        self.words[j].iter().map(|&l| LETTERS[l as usize]).collect()
    }

    pub fn index_of_word(&self, word: &str) -> Option<usize> {
        let letters: Option<Vec<u8>> =
            word.chars().map(|c| LETTERS.iter().position(|&l| l == c).map(|p| p as u8)).collect();
        let letters = letters?;
        self.words.iter().position(|w| *w == letters)
    }

    /// Largest deviation of `Tr(F_m F_n)` from `delta_mn * Tr(F^2)` over all
    /// pairs in `{0..n}`, the identity component included.
    pub fn orthonormality_defect(&self) -> T {
        let n = self.n();
        let mut worst = T::zero();
        let id_tr = crate::linalg::trace_product(&self.identity_component, &self.identity_component);
        worst = worst.max(cabs(id_tr - creal(self.norm_sq)));
        for a in 0..n {
            let t0 = crate::linalg::trace_product(&self.identity_component, &self.generators[a]);
            worst = worst.max(cabs(t0));
            for b in a..n {
                let t = self.monomials[a].trace_with(&self.monomials[b]);
                let target = if a == b { self.norm_sq } else { T::zero() };
                worst = worst.max(cabs(t - creal(target)));
            }
        }
        worst
    }
}

fn enumerate_words(q: usize) -> Vec<Vec<u8>> {
    let total = 1usize << (2 * q);
    (1..total).map(|code| (0..q).map(|pos| ((code >> (2 * (q - 1 - pos))) & 3) as u8).collect()).collect()
}

fn build_pauli_basis<T: Real>(num_qubits: usize, normalized: bool) -> Result<LieBasis<T>> {
    if !(1..=4).contains(&num_qubits) {
        return Err(Error::QubitRange(num_qubits));
    }
    let dim = 1usize << num_qubits;
    let scale = if normalized { T::one() / T::lit(dim as f64).sqrt() } else { T::one() };
    let words = enumerate_words(num_qubits);
    let monomials: Vec<_> = words.iter().map(|w| pauli_monomial(w, scale)).collect();
    let generators = monomials.iter().map(Monomial::to_dense).collect();
    let identity_component = CMatrix::identity(dim, dim) * creal(scale);
    Ok(LieBasis {
        num_qubits,
        words,
        monomials,
        generators,
        identity_component,
        norm_sq: scale * scale * T::lit(dim as f64),
    })
}

/// Normalized generalized Pauli basis, `F_j = sigma_w / sqrt(N)`.
pub fn generalized_pauli<T: Real>(num_qubits: usize) -> Result<LieBasis<T>> {
    build_pauli_basis(num_qubits, true)
}

/// Unscaled Pauli words, for cross-checks against the raw-Pauli structure
/// constants (`f = 2 eps` on one qubit). Not for use in system assembly.
pub fn unnormalized_pauli<T: Real>(num_qubits: usize) -> Result<LieBasis<T>> {
    build_pauli_basis(num_qubits, false)
}

/// Sparse structure tensors, stored per ordered pair `(j, k)`.
#[derive(Clone, Debug)]
pub struct StructureTensors<T: Real> {
    n: usize,
    f: Vec<Vec<(usize, T)>>,
    g: Vec<Vec<(usize, T)>>,
}

impl<T: Real> StructureTensors<T> {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Nonzero `(l, f_jkl)` for a fixed pair.
    pub fn f_pair(&self, j: usize, k: usize) -> &[(usize, T)] {
        &self.f[j * self.n + k]
    }

    pub fn g_pair(&self, j: usize, k: usize) -> &[(usize, T)] {
        &self.g[j * self.n + k]
    }

    pub fn f(&self, j: usize, k: usize, l: usize) -> T {
        lookup(self.f_pair(j, k), l)
    }

    pub fn g(&self, j: usize, k: usize, l: usize) -> T {
        lookup(self.g_pair(j, k), l)
    }

    pub fn z(&self, j: usize, k: usize, l: usize) -> Complex<T> {
        cplx(self.f(j, k, l), self.g(j, k, l))
    }

    /// All nonzero `(j, k, l, f_jkl)`.
    pub fn f_entries(&self) -> impl Iterator<Item = (usize, usize, usize, T)> + '_ {
        entries(&self.f, self.n)
    }

    pub fn g_entries(&self) -> impl Iterator<Item = (usize, usize, usize, T)> + '_ {
        entries(&self.g, self.n)
    }

    /// Rebuilds tensors from explicit entry lists (used by deserialization).
    pub fn from_entries(
        n: usize,
        f: impl IntoIterator<Item = (usize, usize, usize, T)>,
        g: impl IntoIterator<Item = (usize, usize, usize, T)>,
    ) -> Result<Self> {
        let mut fs = vec![Vec::new(); n * n];
        let mut gs = vec![Vec::new(); n * n];
        for (dst, src) in [(&mut fs, f.into_iter().collect::<Vec<_>>()), (&mut gs, g.into_iter().collect())] {
            for (j, k, l, v) in src {
                if j >= n || k >= n || l >= n {
                    return Err(Error::Dimension(format!("tensor index ({j},{k},{l}) out of range for n={n}")));
                }
                dst[j * n + k].push((l, v));
            }
        }
        for list in fs.iter_mut().chain(gs.iter_mut()) {
            list.sort_by_key(|e| e.0);
        }
        Ok(StructureTensors { n, f: fs, g: gs })
    }

    pub fn sparsity_report(&self) -> SparsityReport {
        sparsity(self)
    }
}

fn lookup<T: Real>(list: &[(usize, T)], l: usize) -> T {
    list.iter().find(|e| e.0 == l).map_or(T::zero(), |e| e.1)
}

fn entries<T: Real>(store: &[Vec<(usize, T)>], n: usize) -> impl Iterator<Item = (usize, usize, usize, T)> + '_ {
    store.iter().enumerate().flat_map(move |(p, list)| list.iter().map(move |&(l, v)| (p / n, p % n, l, v)))
}

/// Structure constants
/// `f_jkl = -i Tr([F_j,F_k] F_l) / Tr(F_l^2)` and
/// `g_jkl = Tr({F_j,F_k} F_l) / Tr(F_l^2)`.
pub fn structure_constants<T: Real>(basis: &LieBasis<T>) -> Result<StructureTensors<T>> {
    let n = basis.n();
    let cutoff = T::lit(T::ZERO_CUTOFF);
    let imag_tol = T::lit(T::IMAG_TOLERANCE);

    // Generators grouped by the permutation of their transpose pattern.
    let mut by_inverse: HashMap<Vec<usize>, Vec<usize>> = HashMap::new();
    for (l, m) in basis.monomials.iter().enumerate() {
        let mut inv = vec![0; m.perm.len()];
        for (r, &c) in m.perm.iter().enumerate() {
            inv[c] = r;
        }
        by_inverse.entry(inv).or_default().push(l);
    }

    let mut f = vec![Vec::new(); n * n];
    let mut g = vec![Vec::new(); n * n];
    for j in 0..n {
        for k in 0..n {
            let jk = basis.monomials[j].mul(&basis.monomials[k]);
            let kj = basis.monomials[k].mul(&basis.monomials[j]);
            let mut candidates: Vec<usize> = Vec::new();
            for p in [&jk.perm, &kj.perm] {
                if let Some(ls) = by_inverse.get(p) {
                    candidates.extend_from_slice(ls);
                }
            }
            candidates.sort_unstable();
            candidates.dedup();
            for l in candidates {
                let a = jk.trace_with(&basis.monomials[l]);
                let b = kj.trace_with(&basis.monomials[l]);
                // -i (a - b) and (a + b), normalized by Tr(F_l^2).
                let comm = a - b;
                let fv = cplx(comm.im, -comm.re) / basis.norm_sq;
                let gv = (a + b) / basis.norm_sq;
                for (val, store, name) in [(fv, &mut f, "f"), (gv, &mut g, "g")] {
                    if val.im.abs() >= imag_tol {
                        return Err(Error::ImaginaryResidue {
                            what: format!("structure constant {name}[{j},{k},{l}]"),
                            residue: val.im.abs().as_f64(),
                        });
                    }
                    if val.re.abs() > cutoff {
                        store[j * n + k].push((l, val.re));
                    }
                }
            }
        }
    }
    Ok(StructureTensors { n, f, g })
}

/// Per-pair count of nonzero third indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparsityReport {
    pub max_f_count: usize,
    pub max_g_count: usize,
    /// Up to ten pairs `(j, k, count)` with more than one nonzero `f_jk.`.
    pub f_offenders: Vec<(usize, usize, usize)>,
    pub g_offenders: Vec<(usize, usize, usize)>,
}

impl SparsityReport {
    /// True when every pair has at most one nonzero third index in f and g.
    pub fn holds(&self) -> bool {
        self.max_f_count <= 1 && self.max_g_count <= 1
    }
}

fn offenders<T: Real>(store: &[Vec<(usize, T)>], n: usize) -> (usize, Vec<(usize, usize, usize)>) {
    let max = store.iter().map(Vec::len).max().unwrap_or(0);
    let mut bad: Vec<_> =
        store.iter().enumerate().filter(|(_, l)| l.len() > 1).map(|(p, l)| (p / n, p % n, l.len())).collect();
    bad.sort_by(|a, b| b.2.cmp(&a.2).then((a.0, a.1).cmp(&(b.0, b.1))));
    bad.truncate(10);
    (max, bad)
}

pub fn sparsity<T: Real>(tensors: &StructureTensors<T>) -> SparsityReport {
    let (max_f_count, f_offenders) = offenders(&tensors.f, tensors.n);
    let (max_g_count, g_offenders) = offenders(&tensors.g, tensors.n);
    SparsityReport { max_f_count, max_g_count, f_offenders, g_offenders }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{anticommutator, commutator, max_abs_c, trace_product};

    fn dense_pauli(letter: char) -> CMatrix<f64> {
        let (o, z, i) = (cplx(1.0, 0.0), cplx(0.0, 0.0), cplx(0.0, 1.0));
        match letter {
            'x' => CMatrix::from_row_slice(2, 2, &[z, o, o, z]),
            'y' => CMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
            'z' => CMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
            _ => CMatrix::identity(2, 2),
        }
    }

    #[test]
    fn one_qubit_generators_are_scaled_paulis() {
        let b = generalized_pauli::<f64>(1).unwrap();
        assert_eq!(b.n(), 3);
        let s = 1.0 / 2f64.sqrt();
        for (j, c) in ['x', 'y', 'z'].into_iter().enumerate() {
            let expect = dense_pauli(c) * creal(s);
            assert!(max_abs_c(&(b.generator(j) - expect)) < 1e-15);
        }
    }

    #[test]
    fn two_qubit_word_order_and_kron_convention() {
        let b = generalized_pauli::<f64>(2).unwrap();
        assert_eq!(b.n(), 15);
        let words: Vec<_> = (0..15).map(|j| b.word(j)).collect();
        assert_eq!(words[..5], ["Ix", "Iy", "Iz", "xI", "xx"]);
        assert_eq!(words[14], "zz");
        // first letter acts on the most significant tensor factor
        let xz = dense_pauli('x').kronecker(&dense_pauli('z')) * creal(0.5);
        let j = b.index_of_word("xz").unwrap();
        assert_eq!(j, 6);
        assert!(max_abs_c(&(b.generator(j) - xz)) < 1e-15);
    }

    #[test]
    fn qubit_range_is_enforced() {
        assert!(matches!(generalized_pauli::<f64>(0), Err(Error::QubitRange(0))));
        assert!(matches!(generalized_pauli::<f64>(5), Err(Error::QubitRange(5))));
    }

    #[test]
    fn three_qubit_basis_is_trace_orthonormal() {
        let b = generalized_pauli::<f64>(3).unwrap();
        assert_eq!(b.n(), 63);
        // independent dense check
        for m in 0..63 {
            assert!(trace_product(b.identity_component(), b.generator(m)).norm() < 1e-12);
            for k in 0..63 {
                let t = trace_product(b.generator(m), b.generator(k));
                let target = if m == k { 1.0 } else { 0.0 };
                assert!((t - creal(target)).norm() < 1e-12, "({m},{k})");
            }
            assert!(crate::linalg::hermitian_deviation(b.generator(m)) < 1e-15);
        }
        assert!(b.orthonormality_defect() < 1e-12);
    }

    #[test]
    fn raw_paulis_give_twice_levi_civita() {
        let b = unnormalized_pauli::<f64>(1).unwrap();
        let t = structure_constants(&b).unwrap();
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    let eps = match (j, k, l) {
                        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 2.0,
                        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -2.0,
                        _ => 0.0,
                    };
                    assert_eq!(t.f(j, k, l), eps);
                    assert_eq!(t.g(j, k, l), 0.0);
                }
            }
        }
    }

    #[test]
    fn normalized_f123_is_root_two() {
        let b = generalized_pauli::<f64>(1).unwrap();
        let t = structure_constants(&b).unwrap();
        let (sx, sy, sz) = (dense_pauli('x'), dense_pauli('y'), dense_pauli('z'));
        let direct = trace_product(&commutator(&sx, &sy), &sz) * cplx(0.0, -1.0) / 2f64.powf(1.5);
        assert!((t.f(0, 1, 2) - direct.re).abs() < 1e-15);
        assert!((t.f(0, 1, 2) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn disjoint_qubit_generators_commute() {
        let b = generalized_pauli::<f64>(2).unwrap();
        let t = structure_constants(&b).unwrap();
        let local_first: Vec<_> = ["xI", "yI", "zI"].iter().map(|w| b.index_of_word(w).unwrap()).collect();
        let local_second: Vec<_> = ["Ix", "Iy", "Iz"].iter().map(|w| b.index_of_word(w).unwrap()).collect();
        for &j in &local_first {
            for &k in &local_second {
                assert!(t.f_pair(j, k).is_empty());
            }
        }
    }

    #[test]
    fn sparsity_counts() {
        let r1 = structure_constants(&generalized_pauli::<f64>(1).unwrap()).unwrap().sparsity_report();
        assert_eq!((r1.max_f_count, r1.max_g_count), (1, 0));
        let r2 = structure_constants(&generalized_pauli::<f64>(2).unwrap()).unwrap().sparsity_report();
        assert_eq!((r2.max_f_count, r2.max_g_count), (1, 1));
        assert!(r2.holds() && r2.f_offenders.is_empty());
    }

    #[test]
    fn commutator_and_anticommutator_reconstruct() {
        let b = generalized_pauli::<f64>(2).unwrap();
        let t = structure_constants(&b).unwrap();
        let n = b.n();
        let big_n = b.hilbert_dim() as f64;
        for j in 0..n {
            for k in 0..n {
                let mut c = CMatrix::zeros(4, 4);
                let mut a = CMatrix::zeros(4, 4);
                for l in 0..n {
                    c += b.generator(l) * cplx(0.0, t.f(j, k, l));
                    a += b.generator(l) * creal(t.g(j, k, l));
                }
                let comm = commutator(b.generator(j), b.generator(k));
                let mut anti = anticommutator(b.generator(j), b.generator(k));
                if j == k {
                    anti -= CMatrix::identity(4, 4) * creal(2.0 / big_n);
                }
                assert!(max_abs_c(&(comm - c)) < 1e-12);
                assert!(max_abs_c(&(anti - a)) < 1e-12);
            }
        }
    }

    #[test]
    fn f_is_cyclic_and_antisymmetric_g_symmetric() {
        let t = structure_constants(&generalized_pauli::<f64>(2).unwrap()).unwrap();
        for (j, k, l, v) in t.f_entries() {
            assert_eq!(t.f(k, l, j), v);
            assert_eq!(t.f(k, j, l), -v);
        }
        for (j, k, l, v) in t.g_entries() {
            assert_eq!(t.g(k, j, l), v);
            assert_ne!(j, k, "g_jjl must vanish");
        }
    }

    #[test]
    fn single_precision_basis_works() {
        let b = generalized_pauli::<f32>(2).unwrap();
        let t = structure_constants(&b).unwrap();
        assert!(t.sparsity_report().holds());
        assert!((t.f(0, 1, 2) - 1.0).abs() < 1e-6);
    }
}
