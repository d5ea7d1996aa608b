// Copyright 2026 The oqs-ident Authors
// SPDX-License-Identifier: Apache-2.0

//! GKSL parameters and their coherence-vector (bi)linear system.
//!
//! With `rho = 1/N + sum_j x_j F_j` the master equation
//!
//! ```text
//! drho/dt = -i[H, rho] + sum_jk gamma_jk (F_j rho F_k - 1/2 {F_k F_j, rho}),
//! H = sum_j (theta_j + u_j) F_j
//! ```
//!
//! becomes `dx/dt = (A_l + A_d) x + beta + sum_j u_j N_j x` with
//!
//! ```text
//! A_l[j,k] = -sum_l theta_l f_jkl
//! A_d[j,k] = -sum_lm gamma_lm D^(j,k)_lm
//! D^(j,k)_lm = 1/4 sum_p (z_lpk f_jmp + conj(z_mpk) f_jlp)
//! beta_j  = (i/N) sum_kl gamma_kl f_jkl
//! N_j[k,l] = -f_jkl
//! ```
//!
//! [`liouvillian_superoperator`] builds the same generator directly on
//! `vec(rho)` and is used as the independent reference for all of the above.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::liealg::{LieBasis, StructureTensors};
use crate::linalg::{self, CMatrix, CVector};
use crate::scalar::{cabs, cplx, creal, Real};

/// Hamiltonian coefficients and Kossakowski matrix.
#[derive(Clone, Debug)]
pub struct GkslParams<T: Real> {
    theta: DVector<T>,
    gamma: CMatrix<T>,
    symmetric: bool,
}

impl<T: Real> GkslParams<T> {
    /// Validates shapes, Hermiticity of `gamma`, and (when `symmetric` is set)
    /// that `gamma` is real symmetric.
    pub fn new(theta: DVector<T>, gamma: CMatrix<T>, symmetric: bool) -> Result<Self> {
        let n = theta.len();
        if gamma.nrows() != n || gamma.ncols() != n {
            return Err(Error::Dimension(format!(
                "gamma is {}x{}, theta has length {n}",
                gamma.nrows(),
                gamma.ncols()
            )));
        }
        let tol = T::lit(T::CHECK_TOLERANCE) * (T::one() + linalg::max_abs_c(&gamma));
        let herm = linalg::hermitian_deviation(&gamma);
        if herm > tol {
            return Err(Error::InvalidParams(format!("gamma not Hermitian (deviation {:e})", herm.as_f64())));
        }
        if symmetric {
            let imag = linalg::max_imag(&gamma);
            if imag > tol {
                return Err(Error::InvalidParams(format!(
                    "gamma flagged symmetric but has imaginary part {:e}",
                    imag.as_f64()
                )));
            }
        }
        Ok(GkslParams { theta, gamma, symmetric })
    }

    /// Builds params with the symmetry flag set iff `gamma_jk == gamma_kj`
    /// exactly as stored.
    pub fn with_detected_symmetry(theta: DVector<T>, gamma: CMatrix<T>) -> Result<Self> {
        let symmetric = gamma.nrows() == gamma.ncols() && gamma == gamma.transpose();
        Self::new(theta, gamma, symmetric)
    }

    pub fn real_symmetric(theta: DVector<T>, gamma: &DMatrix<T>) -> Result<Self> {
        if gamma != &gamma.transpose() {
            return Err(Error::InvalidParams("gamma is not symmetric".into()));
        }
        Self::new(theta, linalg::to_complex(gamma), true)
    }

    pub fn n(&self) -> usize {
        self.theta.len()
    }

    pub fn theta(&self) -> &DVector<T> {
        &self.theta
    }

    pub fn gamma(&self) -> &CMatrix<T> {
        &self.gamma
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn gamma_min_eigenvalue(&self) -> T {
        linalg::hermitian_min_eigenvalue(&self.gamma)
    }

    /// Physical-mode check: `gamma` positive semidefinite within `-1e-10`.
    /// A violation is logged as a warning and reported, never rejected.
    pub fn check_physical(&self) -> bool {
        let min = self.gamma_min_eigenvalue();
        let ok = min >= -T::lit(1e-10);
        if !ok {
            log::warn!("Kossakowski matrix not positive semidefinite (min eigenvalue {:e})", min.as_f64());
        }
        ok
    }
}

/// Coherence-vector system `dx/dt = A x + beta + sum_j u_j N_j x`, `y = C x`.
#[derive(Clone, Debug)]
pub struct CoherenceSystem<T: Real> {
    pub a_l: DMatrix<T>,
    pub a_d: DMatrix<T>,
    pub beta: DVector<T>,
    pub n_list: Vec<DMatrix<T>>,
    pub c: DMatrix<T>,
    pub x0: DVector<T>,
}

impl<T: Real> CoherenceSystem<T> {
    pub fn n(&self) -> usize {
        self.a_l.nrows()
    }

    pub fn a(&self) -> DMatrix<T> {
        &self.a_l + &self.a_d
    }

    pub fn embed(&self) -> EmbeddedSystem<T> {
        embed_standard_form(self)
    }
}

/// Standard-form embedding with the affine offset folded into the state.
#[derive(Clone, Debug)]
pub struct EmbeddedSystem<T: Real> {
    pub a_emb: DMatrix<T>,
    pub n_emb: Vec<DMatrix<T>>,
    pub c_emb: DMatrix<T>,
    pub x_emb: DVector<T>,
}

impl<T: Real> EmbeddedSystem<T> {
    pub fn n(&self) -> usize {
        self.a_emb.nrows()
    }
}

fn pad<T: Real>(m: &DMatrix<T>) -> DMatrix<T> {
    let n = m.nrows();
    let mut out = DMatrix::zeros(n + 1, n + 1);
    out.view_mut((0, 0), (n, n)).copy_from(m);
    out
}

pub fn embed_standard_form<T: Real>(sys: &CoherenceSystem<T>) -> EmbeddedSystem<T> {
    let n = sys.n();
    let mut a_emb = pad(&sys.a());
    a_emb.view_mut((0, n), (n, 1)).copy_from(&sys.beta);
    let mut c_emb = DMatrix::zeros(sys.c.nrows(), n + 1);
    c_emb.view_mut((0, 0), (sys.c.nrows(), n)).copy_from(&sys.c);
    let mut x_emb = DVector::zeros(n + 1);
    x_emb.rows_mut(0, n).copy_from(&sys.x0);
    x_emb[n] = T::one();
    EmbeddedSystem { a_emb, n_emb: sys.n_list.iter().map(pad).collect(), c_emb, x_emb }
}

/// `A_l[j,k] = -sum_l theta_l f_jkl`.
pub fn hamiltonian_matrix<T: Real>(tensors: &StructureTensors<T>, theta: &DVector<T>) -> DMatrix<T> {
    let n = tensors.n();
    let mut a = DMatrix::zeros(n, n);
    for (j, k, l, v) in tensors.f_entries() {
        a[(j, k)] -= theta[l] * v;
    }
    a
}

/// Complex `A_d` before the imaginary residue is checked.
pub fn dissipator_matrix_complex<T: Real>(tensors: &StructureTensors<T>, gamma: &CMatrix<T>) -> CMatrix<T> {
    let n = tensors.n();
    let quarter = creal(T::lit(0.25));
    let mut a = CMatrix::zeros(n, n);
    // z entries per (l, p): merge the f and g lists by third index
    let z_pair = |l: usize, p: usize| {
        let mut out: Vec<(usize, nalgebra::Complex<T>)> = Vec::with_capacity(2);
        for &(k, v) in tensors.f_pair(l, p) {
            out.push((k, creal(v)));
        }
        for &(k, v) in tensors.g_pair(l, p) {
            match out.iter_mut().find(|e| e.0 == k) {
                Some(e) => e.1 += cplx(T::zero(), v),
                None => out.push((k, cplx(T::zero(), v))),
            }
        }
        out
    };
    // Using cyclicity, f_jmp = f_mpj, so the sums run over stored pairs.
    for l in 0..n {
        for p in 0..n {
            let zs = z_pair(l, p);
            if zs.is_empty() {
                continue;
            }
            for m in 0..n {
                let fm = tensors.f_pair(m, p);
                if fm.is_empty() {
                    continue;
                }
                // term 1: gamma_lm z_lpk f_mpj
                let g_lm = gamma[(l, m)];
                // term 2 (roles of l and m swapped): gamma_ml conj(z_lpk) f_mpj
                let g_ml = gamma[(m, l)];
                for &(k, z) in &zs {
                    for &(j, fv) in fm {
                        let f = creal(fv);
                        a[(j, k)] -= quarter * (g_lm * z * f + g_ml * z.conj() * f);
                    }
                }
            }
        }
    }
    a
}

/// Complex `beta` before the imaginary residue is checked.
pub fn offset_vector_complex<T: Real>(
    tensors: &StructureTensors<T>,
    gamma: &CMatrix<T>,
    hilbert_dim: usize,
) -> CVector<T> {
    let n = tensors.n();
    let scale = cplx(T::zero(), T::one() / T::lit(hilbert_dim as f64));
    let mut beta = CVector::zeros(n);
    for (j, k, l, v) in tensors.f_entries() {
        beta[j] += scale * gamma[(k, l)] * creal(v);
    }
    beta
}

/// `N_j[k,l] = -f_jkl`.
pub fn coupling_matrices<T: Real>(tensors: &StructureTensors<T>) -> Vec<DMatrix<T>> {
    let n = tensors.n();
    let mut out = vec![DMatrix::zeros(n, n); n];
    for (j, k, l, v) in tensors.f_entries() {
        out[j][(k, l)] = -v;
    }
    out
}

/// Rows `o_k = Tr(F_k O)` for each observable; identity when none are given.
pub fn measurement_matrix<T: Real>(basis: &LieBasis<T>, observables: &[CMatrix<T>]) -> Result<DMatrix<T>> {
    let n = basis.n();
    if observables.is_empty() {
        return Ok(DMatrix::identity(n, n));
    }
    let dim = basis.hilbert_dim();
    let mut c = DMatrix::zeros(observables.len(), n);
    for (r, o) in observables.iter().enumerate() {
        if o.nrows() != dim || o.ncols() != dim {
            return Err(Error::Dimension(format!(
                "observable {r} is {}x{}, expected {dim}x{dim}",
                o.nrows(),
                o.ncols()
            )));
        }
        let dev = linalg::hermitian_deviation(o);
        if dev > T::lit(T::CHECK_TOLERANCE) * (T::one() + linalg::max_abs_c(o)) {
            return Err(Error::InvalidParams(format!("observable {r} not Hermitian (deviation {:e})", dev.as_f64())));
        }
        for k in 0..n {
            c[(r, k)] = linalg::trace_product(basis.generator(k), o).re / basis.norm_sq();
        }
    }
    Ok(c)
}

/// Coherence vector of the computational ground state `|0...0>`.
pub fn ground_state<T: Real>(basis: &LieBasis<T>) -> DVector<T> {
    DVector::from_iterator(basis.n(), basis.generators().iter().map(|f| f[(0, 0)].re / basis.norm_sq()))
}

/// Assembles `A_l`, `A_d`, `beta`, `N_j` and `C`. Complex intermediates
/// must come out real within `IMAG_TOLERANCE`.
pub fn assemble_system<T: Real>(
    basis: &LieBasis<T>,
    tensors: &StructureTensors<T>,
    params: &GkslParams<T>,
    observables: &[CMatrix<T>],
) -> Result<CoherenceSystem<T>> {
    let n = basis.n();
    if tensors.n() != n || params.n() != n {
        return Err(Error::Dimension(format!("basis has n={n}, tensors n={}, params n={}", tensors.n(), params.n())));
    }
    let a_l = hamiltonian_matrix(tensors, params.theta());
    let a_d = linalg::real_part_checked(&dissipator_matrix_complex(tensors, params.gamma()), "A_d")?;
    let beta_c = offset_vector_complex(tensors, params.gamma(), basis.hilbert_dim());
    let beta = linalg::real_part_checked(&CMatrix::from_column_slice(n, 1, beta_c.as_slice()), "beta")?;
    Ok(CoherenceSystem {
        a_l,
        a_d,
        beta: beta.column(0).into_owned(),
        n_list: coupling_matrices(tensors),
        c: measurement_matrix(basis, observables)?,
        x0: ground_state(basis),
    })
}

/// GKSL generator on column-stacked `vec(rho)`, with `vec(AXB) = (B^T kron A) vec(X)`.
/// `controls` lists `(j, u_j)` added to the Hamiltonian coefficients.
pub fn liouvillian_superoperator<T: Real>(
    basis: &LieBasis<T>,
    params: &GkslParams<T>,
    controls: &[(usize, T)],
) -> CMatrix<T> {
    let dim = basis.hilbert_dim();
    let id = CMatrix::<T>::identity(dim, dim);
    let mut h = CMatrix::zeros(dim, dim);
    for (j, f) in basis.generators().iter().enumerate() {
        h += f * creal(params.theta()[j]);
    }
    for &(j, u) in controls {
        h += basis.generator(j) * creal(u);
    }
    let mi = cplx(T::zero(), -T::one());
    let mut l = (id.kronecker(&h) - h.transpose().kronecker(&id)) * mi;
    let half = creal(T::lit(0.5));
    let gamma = params.gamma();
    for j in 0..basis.n() {
        for k in 0..basis.n() {
            let g = gamma[(j, k)];
            if cabs(g) == T::zero() {
                continue;
            }
            let fj = basis.generator(j);
            let fk = basis.generator(k);
            let kj = fk * fj;
            let term = fk.transpose().kronecker(fj) - id.kronecker(&kj) * half - kj.transpose().kronecker(&id) * half;
            l += term * g;
        }
    }
    l
}

/// Column-stacked `vec(rho)`.
pub fn vec_density<T: Real>(rho: &CMatrix<T>) -> CVector<T> {
    CVector::from_column_slice(rho.as_slice())
}

pub fn unvec_density<T: Real>(v: &CVector<T>, dim: usize) -> CMatrix<T> {
    CMatrix::from_column_slice(dim, dim, v.as_slice())
}

/// `x_j = Tr(F_j rho)`; rejects non-Hermitian or non-unit-trace input.
pub fn rho_to_coherence<T: Real>(rho: &CMatrix<T>, basis: &LieBasis<T>) -> Result<DVector<T>> {
    let dim = basis.hilbert_dim();
    if rho.nrows() != dim || rho.ncols() != dim {
        return Err(Error::Dimension(format!("rho is {}x{}, expected {dim}x{dim}", rho.nrows(), rho.ncols())));
    }
    let tol = T::lit(1e-10);
    let tr = rho.trace();
    if cabs(tr - creal(T::one())) > tol {
        return Err(Error::InvalidState(format!("trace {} + {}i is not 1", tr.re.as_f64(), tr.im.as_f64())));
    }
    let herm = linalg::hermitian_deviation(rho);
    if herm > tol {
        return Err(Error::InvalidState(format!("rho not Hermitian (deviation {:e})", herm.as_f64())));
    }
    Ok(DVector::from_iterator(
        basis.n(),
        basis.generators().iter().map(|f| linalg::trace_product(f, rho).re / basis.norm_sq()),
    ))
}

/// `rho = 1/N + sum_j x_j F_j`.
pub fn coherence_to_rho<T: Real>(x: &DVector<T>, basis: &LieBasis<T>) -> Result<CMatrix<T>> {
    if x.len() != basis.n() {
        return Err(Error::Dimension(format!("x has length {}, expected {}", x.len(), basis.n())));
    }
    let dim = basis.hilbert_dim();
    let mut rho = CMatrix::identity(dim, dim) * creal(T::one() / T::lit(dim as f64));
    for (j, f) in basis.generators().iter().enumerate() {
        rho += f * creal(x[j]);
    }
    Ok(rho)
}

/// Rates and couplings of the two-qubit example: two detuned qubits with an
/// exchange coupling, local dephasing and amplitude damping/pumping.
///
/// The Kossakowski matrix is placed on generators 1..6 (1-based):
/// `gamma_11 = 2 g1-`, `gamma_22 = 2 g2+`, `gamma_33 = gamma_55 = (g1z + g2z)/8`,
/// `gamma_44 = gamma_66 = (g1+ + g2-)/2`, `gamma_35 = (g1z - g2z)/8`,
/// `gamma_46 = -(g1+ - g2-)/2`. The Hamiltonian
/// `w1/2 zI + w2/2 Iz + delta (xx + yy)` has `theta_zI = w1`,
/// `theta_Iz = w2`, `theta_xx = theta_yy = 2 delta` in the normalized basis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoQubitExample<T> {
    pub omega1: T,
    pub omega2: T,
    pub delta: T,
    pub g1z: T,
    pub g2z: T,
    pub g1_minus: T,
    pub g1_plus: T,
    pub g2_minus: T,
    pub g2_plus: T,
}

impl<T: Real> TwoQubitExample<T> {
    pub fn default_values() -> Self {
        TwoQubitExample {
            omega1: T::one(),
            omega2: T::lit(2.0),
            delta: T::lit(0.5),
            g1z: T::lit(0.04),
            g2z: T::lit(0.02),
            g1_minus: T::lit(0.03),
            g1_plus: T::lit(0.01),
            g2_minus: T::lit(0.025),
            g2_plus: T::lit(0.015),
        }
    }

    pub fn theta(&self, basis: &LieBasis<T>) -> DVector<T> {
        let mut theta = DVector::zeros(basis.n());
        let idx = |w: &str| basis.index_of_word(w).expect("two-qubit word");
        theta[idx("zI")] = self.omega1;
        theta[idx("Iz")] = self.omega2;
        theta[idx("xx")] = self.delta * T::lit(2.0);
        theta[idx("yy")] = self.delta * T::lit(2.0);
        theta
    }

    pub fn gamma(&self) -> DMatrix<T> {
        let mut g = DMatrix::zeros(15, 15);
        let eighth = T::lit(0.125);
        let half = T::lit(0.5);
        g[(0, 0)] = T::lit(2.0) * self.g1_minus;
        g[(1, 1)] = T::lit(2.0) * self.g2_plus;
        g[(2, 2)] = (self.g1z + self.g2z) * eighth;
        g[(4, 4)] = g[(2, 2)];
        g[(3, 3)] = (self.g1_plus + self.g2_minus) * half;
        g[(5, 5)] = g[(3, 3)];
        g[(2, 4)] = (self.g1z - self.g2z) * eighth;
        g[(4, 2)] = g[(2, 4)];
        g[(3, 5)] = -(self.g1_plus - self.g2_minus) * half;
        g[(5, 3)] = g[(3, 5)];
        g
    }

    pub fn params(&self, basis: &LieBasis<T>) -> Result<GkslParams<T>> {
        if basis.num_qubits() != 2 {
            return Err(Error::Dimension("two-qubit example needs a two-qubit basis".into()));
        }
        GkslParams::real_symmetric(self.theta(basis), &self.gamma())
    }

    /// Inverts [`Self::theta`] and [`Self::gamma`].
    pub fn from_params(theta: &DVector<T>, gamma: &DMatrix<T>, basis: &LieBasis<T>) -> Self {
        let idx = |w: &str| basis.index_of_word(w).expect("two-qubit word");
        let four = T::lit(4.0);
        let half = T::lit(0.5);
        TwoQubitExample {
            omega1: theta[idx("zI")],
            omega2: theta[idx("Iz")],
            delta: (theta[idx("xx")] + theta[idx("yy")]) * T::lit(0.25),
            g1z: four * (gamma[(2, 2)] + gamma[(2, 4)]),
            g2z: four * (gamma[(2, 2)] - gamma[(2, 4)]),
            g1_minus: gamma[(0, 0)] * half,
            g2_plus: gamma[(1, 1)] * half,
            g1_plus: gamma[(3, 3)] - gamma[(3, 5)],
            g2_minus: gamma[(3, 3)] + gamma[(3, 5)],
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        let a = self.as_array();
        let b = other.as_array();
        a.iter().zip(b.iter()).fold(T::zero(), |acc, (x, y)| acc.max((*x - *y).abs()))
    }

    pub fn as_array(&self) -> [T; 9] {
        [
            self.omega1,
            self.omega2,
            self.delta,
            self.g1z,
            self.g2z,
            self.g1_minus,
            self.g1_plus,
            self.g2_minus,
            self.g2_plus,
        ]
    }

    pub const NAMES: [&'static str; 9] = ["omega1", "omega2", "delta", "g1z", "g2z", "g1-", "g1+", "g2-", "g2+"];
}
