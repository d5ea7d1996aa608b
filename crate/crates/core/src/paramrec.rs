// Copyright 2026 The oqs-ident Authors
// SPDX-License-Identifier: Apache-2.0

//! Recovery of `(theta, gamma)` from an identified system matrix `A` and
//! offset `beta`.
//!
//! All vectorisations are row-major: `gamma_jk` sits at `j * n + k`, and the
//! symmetric ordering walks the upper triangle `j <= k` row by row.

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::liealg::StructureTensors;
use crate::linalg::{self, vec_row_major, CMatrix, CVector};
use crate::scalar::{cabs, cplx, creal, Real};

/// Largest `n` for which the `(n + n^2)`-square `M` is assembled.
pub const MAX_N: usize = 15;

/// Condition number above which `M` is treated as not invertible.
pub const KAPPA_CAP: f64 = 1e12;

/// Relative tolerance of the range-membership tests.
pub const RANGE_TOL: f64 = 1e-8;

/// Bijection between linear indices and index pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GammaIndexMap {
    n: usize,
    sym: Vec<(usize, usize)>,
}

impl GammaIndexMap {
    pub fn new(n: usize) -> Self {
        let sym = (0..n).flat_map(|j| (j..n).map(move |k| (j, k))).collect();
        GammaIndexMap { n, sym }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn forward(&self, r: usize) -> (usize, usize) {
        (r / self.n, r % self.n)
    }

    pub fn inverse(&self, j: usize, k: usize) -> usize {
        j * self.n + k
    }

    pub fn sym_len(&self) -> usize {
        self.sym.len()
    }

    /// Unordered pair `{j, k}` with `j <= k`.
    pub fn sym_forward(&self, s: usize) -> (usize, usize) {
        self.sym[s]
    }

    pub fn sym_inverse(&self, j: usize, k: usize) -> usize {
        let (a, b) = if j <= k { (j, k) } else { (k, j) };
        // rows before a hold n + (n-1) + ... + (n-a+1) entries
        a * self.n - a * a.saturating_sub(1) / 2 + (b - a)
    }

    /// Symmetric matrix from its upper-triangle vector.
    pub fn expand_symmetric<T: Real>(&self, v: &DVector<T>) -> DMatrix<T> {
        let mut g = DMatrix::zeros(self.n, self.n);
        for (s, &(j, k)) in self.sym.iter().enumerate() {
            g[(j, k)] = v[s];
            g[(k, j)] = v[s];
        }
        g
    }

    pub fn pack_symmetric<T: Real>(&self, g: &DMatrix<T>) -> DVector<T> {
        DVector::from_iterator(self.sym.len(), self.sym.iter().map(|&(j, k)| g[(j, k)]))
    }
}

/// Linear maps from `(theta, vec gamma)` to `(vec A, beta)`.
#[derive(Clone, Debug)]
pub struct ReconstructionMatrices<T: Real> {
    pub index: GammaIndexMap,
    pub hilbert_dim: usize,
    pub symmetric: bool,
    /// `n^2 x n`, `T1[(j,k), c] = -f_jkc`.
    pub t1: DMatrix<T>,
    /// `n^2 x n^2`, `T2[(j,k), (l,m)] = -D^(j,k)_lm`.
    pub t2: CMatrix<T>,
    /// `n x n^2` map `vec gamma -> beta`, equal to `-(i/N) T1^T`.
    pub beta_op: CMatrix<T>,
    /// `n^2 x n(n+1)/2` symmetric reduction.
    pub t3: DMatrix<T>,
    /// `[[T1, T2], [0, beta_op]]`.
    pub m: CMatrix<T>,
    pub rank_t1: usize,
    pub rank_t3: usize,
    pub rank_m: usize,
    pub kappa_t1: T,
    pub kappa_t3: T,
    pub kappa_m: T,
    pub norm_m: T,
    /// `1 / sigma_min(M)`; infinite when `M` is singular.
    pub norm_m_inv: T,
    t1_pinv: DMatrix<T>,
    t3_pinv: DMatrix<T>,
    beta_pinv: CMatrix<T>,
    m_inv: Option<CMatrix<T>>,
}

fn svd_summary<T: Real>(sv: &DVector<T>, rows: usize, cols: usize) -> (usize, T, T, T) {
    let smax = sv.max();
    let cutoff = linalg::rank_threshold(smax, rows, cols, None);
    let rank = sv.iter().filter(|&&s| s > cutoff).count();
    let smin = sv.min();
    let full = rows.min(cols);
    let kappa = if rank < full || smin == T::zero() { T::max_value().expect("bounded") } else { smax / smin };
    let inv = if smin == T::zero() { T::max_value().expect("bounded") } else { T::one() / smin };
    (rank, kappa, smax, inv)
}

/// `D^(j,k)_lm` laid out as `T2` without the sign, following the same
/// cyclic reduction as the dissipator assembly.
fn dissipation_tensor<T: Real>(tensors: &StructureTensors<T>) -> CMatrix<T> {
    let n = tensors.n();
    let quarter = creal(T::lit(0.25));
    let mut d = CMatrix::zeros(n * n, n * n);
    for l in 0..n {
        for p in 0..n {
            let mut zs: Vec<(usize, Complex<T>)> = tensors.f_pair(l, p).iter().map(|&(k, v)| (k, creal(v))).collect();
            for &(k, v) in tensors.g_pair(l, p) {
                match zs.iter_mut().find(|e| e.0 == k) {
                    Some(e) => e.1 += cplx(T::zero(), v),
                    None => zs.push((k, cplx(T::zero(), v))),
                }
            }
            for m in 0..n {
                for &(j, fv) in tensors.f_pair(m, p) {
                    let f = creal(fv);
                    for &(k, z) in &zs {
                        d[(j * n + k, l * n + m)] += quarter * z * f;
                        d[(j * n + k, m * n + l)] += quarter * z.conj() * f;
                    }
                }
            }
        }
    }
    d
}

/// `T1[(j,k), c] = -f_jkc`, without the size guard of
/// [`ReconstructionMatrices::build`].
pub fn t1_matrix<T: Real>(tensors: &StructureTensors<T>) -> DMatrix<T> {
    let n = tensors.n();
    let mut t1 = DMatrix::zeros(n * n, n);
    for (j, k, c, v) in tensors.f_entries() {
        t1[(j * n + k, c)] = -v;
    }
    t1
}

/// `D~^(j,k)_lm = 1/2 sum_p f_jmp f_klp`.
pub fn symmetric_dissipation_tensor<T: Real>(tensors: &StructureTensors<T>) -> DMatrix<T> {
    let n = tensors.n();
    let mut by_p: Vec<Vec<(usize, usize, T)>> = vec![Vec::new(); n];
    for (a, b, p, v) in tensors.f_entries() {
        by_p[p].push((a, b, v));
    }
    let half = T::lit(0.5);
    let mut d = DMatrix::zeros(n * n, n * n);
    for list in &by_p {
        for &(j, m, v1) in list {
            for &(k, l, v2) in list {
                d[(j * n + k, l * n + m)] += half * v1 * v2;
            }
        }
    }
    d
}

impl<T: Real> ReconstructionMatrices<T> {
    pub fn build(tensors: &StructureTensors<T>, hilbert_dim: usize, symmetric: bool) -> Result<Self> {
        let n = tensors.n();
        if n > MAX_N {
            return Err(Error::SizeLimit(format!("reconstruction matrices limited to n <= {MAX_N}, got {n}")));
        }
        if hilbert_dim * hilbert_dim != n + 1 {
            return Err(Error::Dimension(format!("n = {n} does not match N = {hilbert_dim}")));
        }
        let index = GammaIndexMap::new(n);
        let n2 = n * n;

        let t1 = t1_matrix(tensors);
        let t2 = -dissipation_tensor(tensors);
        let scale = cplx(T::zero(), -T::one() / T::lit(hilbert_dim as f64));
        let beta_op = linalg::to_complex(&t1.transpose()) * scale;

        let dt = symmetric_dissipation_tensor(tensors);
        let mut t3 = DMatrix::zeros(n2, index.sym_len());
        for s in 0..index.sym_len() {
            let (l, m) = index.sym_forward(s);
            let mut col = dt.column(l * n + m).into_owned();
            if l != m {
                col += dt.column(m * n + l);
            }
            t3.set_column(s, &(-col));
        }

        let mut mm = CMatrix::zeros(n + n2, n + n2);
        mm.view_mut((0, 0), (n2, n)).copy_from(&linalg::to_complex(&t1));
        mm.view_mut((0, n), (n2, n2)).copy_from(&t2);
        mm.view_mut((n2, n), (n, n2)).copy_from(&beta_op);

        let t1_svd = t1.clone().svd(true, true);
        let (rank_t1, kappa_t1, _, _) = svd_summary(&t1_svd.singular_values, n2, n);
        let t3_svd = t3.clone().svd(true, true);
        let (rank_t3, kappa_t3, _, _) = svd_summary(&t3_svd.singular_values, n2, index.sym_len());
        let m_svd = mm.clone().svd(true, true);
        let (rank_m, kappa_m, norm_m, norm_m_inv) = svd_summary(&m_svd.singular_values, n + n2, n + n2);
        let cut = |sv: &DVector<T>, r: usize, c: usize| linalg::rank_threshold(sv.max(), r, c, None);
        let t1_cut = cut(&t1_svd.singular_values, n2, n);
        let t1_pinv = t1_svd.pseudo_inverse(t1_cut).expect("singular vectors computed");
        let t3_cut = cut(&t3_svd.singular_values, n2, index.sym_len());
        let t3_pinv = t3_svd.pseudo_inverse(t3_cut).expect("singular vectors computed");
        let beta_pinv = linalg::to_complex(&(t1_pinv.transpose())) * (creal(T::one()) / scale);
        let m_inv = (rank_m == n + n2).then(|| m_svd.pseudo_inverse(T::zero()).expect("singular vectors computed"));

        Ok(ReconstructionMatrices {
            index,
            hilbert_dim,
            symmetric,
            t1,
            t2,
            beta_op,
            t3,
            m: mm,
            rank_t1,
            rank_t3,
            rank_m,
            kappa_t1,
            kappa_t3,
            kappa_m,
            norm_m,
            norm_m_inv,
            t1_pinv,
            t3_pinv,
            beta_pinv,
            m_inv,
        })
    }

    pub fn n(&self) -> usize {
        self.index.n()
    }

    /// `(vec A, beta)` for given parameters, straight from the linear maps.
    pub fn forward(&self, theta: &DVector<T>, gamma: &CMatrix<T>) -> (CVector<T>, CVector<T>) {
        let g = vec_row_major(gamma);
        let a = (&self.t1 * theta).map(creal) + &self.t2 * &g;
        (a, &self.beta_op * g)
    }

    fn t1_full(&self) -> bool {
        self.rank_t1 == self.n()
    }

    fn t3_full(&self) -> bool {
        self.rank_t3 == self.index.sym_len()
    }
}

/// Which branch of the reconstruction produced the estimate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RecoveryStatus {
    /// Both `theta` and `gamma`.
    Full,
    /// `gamma` only, from `beta` through the pseudoinverse.
    GammaFromBeta,
    /// `gamma` from the symmetric part; `theta` failed its checks.
    GammaOnly,
    /// `theta` from the antisymmetric part and `gamma` from `beta`.
    ThetaAndGammaFromBeta,
    ThetaOnly,
    NotRecoverable,
}

impl RecoveryStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            RecoveryStatus::Full => "full",
            RecoveryStatus::GammaFromBeta => "gamma-from-beta",
            RecoveryStatus::GammaOnly => "gamma-only",
            RecoveryStatus::ThetaAndGammaFromBeta => "theta-and-gamma-from-beta",
            RecoveryStatus::ThetaOnly => "theta-only",
            RecoveryStatus::NotRecoverable => "not-recoverable",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            RecoveryStatus::Full,
            RecoveryStatus::GammaFromBeta,
            RecoveryStatus::GammaOnly,
            RecoveryStatus::ThetaAndGammaFromBeta,
            RecoveryStatus::ThetaOnly,
            RecoveryStatus::NotRecoverable,
        ]
        .into_iter()
        .find(|v| v.as_str() == s)
    }
}

#[derive(Clone, Debug)]
pub struct RecoveredParams<T: Real> {
    pub theta: Option<DVector<T>>,
    pub gamma: Option<CMatrix<T>>,
    pub status: RecoveryStatus,
    /// Frobenius mismatch of `A` over the recovered parts.
    pub residual_a: T,
    /// `||beta_op vec(gamma) - beta||`. On the symmetric primary path beta is
    /// not used by the solve, so this only tests the symmetric-gamma
    /// assumption against the supplied beta.
    pub residual_beta: T,
    /// Distance moved by the Hermitian projection of `gamma`.
    pub hermitian_projection: T,
    /// Condition number of the matrix that was inverted (`M`, or the larger of
    /// `T1` and `T3`).
    pub kappa: T,
    pub symmetric: bool,
}

fn range_ok<T: Real>(residual: T, rhs_norm: T) -> bool {
    residual <= T::lit(RANGE_TOL) * (T::one() + rhs_norm)
}

fn check_shapes<T: Real>(a: &DMatrix<T>, beta: Option<&DVector<T>>, n: usize) -> Result<()> {
    if a.nrows() != n || a.ncols() != n {
        return Err(Error::Dimension(format!("A is {}x{}, expected {n}x{n}", a.nrows(), a.ncols())));
    }
    if let Some(b) = beta {
        if b.len() != n {
            return Err(Error::Dimension(format!("beta has length {}, expected {n}", b.len())));
        }
    }
    Ok(())
}

fn hermitian_part<T: Real>(g: CMatrix<T>) -> (CMatrix<T>, T) {
    let h = (&g + g.adjoint()) * creal(T::lit(0.5));
    let d = (&g - &h).norm();
    (h, d)
}

fn cnorm<T: Real>(v: &CVector<T>) -> T {
    v.iter().fold(T::zero(), |acc, z| acc + cabs(*z) * cabs(*z)).sqrt()
}

/// `gamma` from `beta` via the pseudoinverse of the `beta` map, with its
/// range residual.
fn gamma_from_beta<T: Real>(beta: &DVector<T>, mats: &ReconstructionMatrices<T>) -> (CMatrix<T>, T) {
    let n = mats.n();
    let b = linalg::to_complex(&DMatrix::from_column_slice(n, 1, beta.as_slice())).column(0).into_owned();
    let g = &mats.beta_pinv * &b;
    let res = cnorm(&(&mats.beta_op * &g - &b));
    (CMatrix::from_row_slice(n, n, g.as_slice()), res)
}

/// General-case recovery: invert `M` when its condition number is below
/// [`KAPPA_CAP`], otherwise fall back to `gamma` from `beta`.
pub fn reconstruct_general<T: Real>(
    a: &DMatrix<T>,
    beta: &DVector<T>,
    mats: &ReconstructionMatrices<T>,
) -> Result<RecoveredParams<T>> {
    let n = mats.n();
    check_shapes(a, Some(beta), n)?;
    let va = vec_row_major(a);
    let mut rhs = CVector::zeros(n + n * n);
    for (i, v) in va.iter().enumerate() {
        rhs[i] = creal(*v);
    }
    for (i, v) in beta.iter().enumerate() {
        rhs[n * n + i] = creal(*v);
    }

    if let Some(m_inv) = mats.m_inv.as_ref().filter(|_| mats.kappa_m <= T::lit(KAPPA_CAP)) {
        let y = m_inv * &rhs;
        let theta_c = y.rows(0, n).into_owned();
        let theta = theta_c.map(|z| z.re);
        let gamma_raw = CMatrix::from_row_slice(n, n, y.rows(n, n * n).into_owned().as_slice());
        let (gamma, proj) = hermitian_part(gamma_raw);
        let theta_imag = theta_c.iter().fold(T::zero(), |acc, z| acc.max(z.im.abs()));
        if theta_imag > T::lit(1e-6) * (T::one() + cnorm(&rhs)) {
            log::warn!("theta has imaginary residue {:e}", theta_imag.as_f64());
        }
        let (fa, fb) = mats.forward(&theta, &gamma);
        let residual_a = cnorm(&(fa - rhs.rows(0, n * n)));
        let residual_beta = cnorm(&(fb - rhs.rows(n * n, n)));
        return Ok(RecoveredParams {
            theta: Some(theta),
            gamma: Some(gamma),
            status: RecoveryStatus::Full,
            residual_a,
            residual_beta,
            hermitian_projection: proj,
            kappa: mats.kappa_m,
            symmetric: false,
        });
    }

    if mats.t1_full() {
        let (g, res) = gamma_from_beta(beta, mats);
        if range_ok(res, beta.norm()) {
            let (gamma, proj) = hermitian_part(g);
            let (_, fb) = mats.forward(&DVector::zeros(n), &gamma);
            let residual_beta = cnorm(&(fb - rhs.rows(n * n, n)));
            return Ok(RecoveredParams {
                theta: None,
                gamma: Some(gamma),
                status: RecoveryStatus::GammaFromBeta,
                residual_a: T::zero(),
                residual_beta,
                hermitian_projection: proj,
                kappa: mats.kappa_m,
                symmetric: false,
            });
        }
    }
    Ok(not_recoverable(mats.kappa_m, false))
}

fn not_recoverable<T: Real>(kappa: T, symmetric: bool) -> RecoveredParams<T> {
    RecoveredParams {
        theta: None,
        gamma: None,
        status: RecoveryStatus::NotRecoverable,
        residual_a: T::zero(),
        residual_beta: T::zero(),
        hermitian_projection: T::zero(),
        kappa,
        symmetric,
    }
}

/// Symmetric-case recovery from the symmetric and antisymmetric parts of
/// `A`. `beta` is only consulted when `A_d` fails its checks.
pub fn reconstruct_symmetric<T: Real>(
    a: &DMatrix<T>,
    beta: Option<&DVector<T>>,
    mats: &ReconstructionMatrices<T>,
) -> Result<RecoveredParams<T>> {
    check_shapes(a, beta, mats.n())?;
    let half = T::lit(0.5);
    let a_d = (a + a.transpose()) * half;
    let a_l = (a - a.transpose()) * half;
    reconstruct_split(&a_l, &a_d, beta, mats)
}

/// Algorithm-4 branching on explicitly supplied parts. [`reconstruct_symmetric`]
/// feeds it the Toeplitz split; callers may pass parts that are not
/// (anti)symmetric to exercise the range checks.
pub fn reconstruct_split<T: Real>(
    a_l: &DMatrix<T>,
    a_d: &DMatrix<T>,
    beta: Option<&DVector<T>>,
    mats: &ReconstructionMatrices<T>,
) -> Result<RecoveredParams<T>> {
    let n = mats.n();
    check_shapes(a_l, beta, n)?;
    check_shapes(a_d, None, n)?;
    let vl = vec_row_major(a_l);
    let vd = vec_row_major(a_d);
    let kappa = mats.kappa_t1.max(mats.kappa_t3);
    let zero_beta = DVector::zeros(n);
    let beta = beta.unwrap_or(&zero_beta);

    let theta = {
        let th = &mats.t1_pinv * &vl;
        let res = (&mats.t1 * &th - &vl).norm();
        (mats.t1_full() && range_ok(res, vl.norm())).then_some((th, res))
    };
    let gamma_sym = {
        let gv = &mats.t3_pinv * &vd;
        let res = (&mats.t3 * &gv - &vd).norm();
        (mats.t3_full() && range_ok(res, vd.norm())).then_some((gv, res))
    };

    let beta_of = |g: &CMatrix<T>| -> T {
        let b = &mats.beta_op * vec_row_major(g);
        b.iter().zip(beta.iter()).fold(T::zero(), |acc, (z, &bv)| acc + cabs(*z - creal(bv)).powi(2)).sqrt()
    };

    let out = match (gamma_sym, theta) {
        (Some((gv, rd)), Some((th, rl))) => {
            let g = linalg::to_complex(&mats.index.expand_symmetric(&gv));
            RecoveredParams {
                theta: Some(th),
                residual_beta: beta_of(&g),
                gamma: Some(g),
                status: RecoveryStatus::Full,
                residual_a: (rd * rd + rl * rl).sqrt(),
                hermitian_projection: T::zero(),
                kappa,
                symmetric: true,
            }
        }
        (Some((gv, rd)), None) => {
            let g = linalg::to_complex(&mats.index.expand_symmetric(&gv));
            RecoveredParams {
                theta: None,
                residual_beta: beta_of(&g),
                gamma: Some(g),
                status: RecoveryStatus::GammaOnly,
                residual_a: rd,
                hermitian_projection: T::zero(),
                kappa,
                symmetric: true,
            }
        }
        (None, Some((th, rl))) => {
            let (g, res) = gamma_from_beta(beta, mats);
            if beta.norm() > T::zero() && range_ok(res, beta.norm()) {
                let (g, proj) = hermitian_part(g);
                RecoveredParams {
                    theta: Some(th),
                    residual_beta: beta_of(&g),
                    gamma: Some(g),
                    status: RecoveryStatus::ThetaAndGammaFromBeta,
                    residual_a: rl,
                    hermitian_projection: proj,
                    kappa,
                    symmetric: false,
                }
            } else {
                RecoveredParams {
                    theta: Some(th),
                    gamma: None,
                    status: RecoveryStatus::ThetaOnly,
                    residual_a: rl,
                    residual_beta: T::zero(),
                    hermitian_projection: T::zero(),
                    kappa,
                    symmetric: true,
                }
            }
        }
        (None, None) => not_recoverable(kappa, true),
    };
    if out.status == RecoveryStatus::Full && !range_ok(out.residual_beta, beta.norm()) {
        log::warn!(
            "beta disagrees with the recovered symmetric gamma (residual {:e}); gamma may not be real symmetric",
            out.residual_beta.as_f64()
        );
    }
    Ok(out)
}

/// Two-term bound on `||y - y~||` for the general solve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorBound<T> {
    pub bound: T,
    pub valid: bool,
}

/// `||M~^{-1}|| ||delta rhs|| + kappa / (||M|| / ||delta M|| - kappa) ||M^{-1}|| ||rhs||`,
/// with `||M~^{-1}||` replaced by its Neumann upper bound
/// `||M^{-1}|| / (1 - kappa ||delta M|| / ||M||)`. `rhs` is the stacked
/// `(vec A, beta)`.
pub fn error_bound<T: Real>(
    mats: &ReconstructionMatrices<T>,
    delta_m_norm: T,
    rhs_norm: T,
    delta_rhs_norm: T,
) -> ErrorBound<T> {
    let inf = T::max_value().expect("bounded");
    if mats.m_inv.is_none() || !mats.norm_m_inv.is_finite() || mats.norm_m_inv >= inf {
        return ErrorBound { bound: inf, valid: false };
    }
    let kappa = mats.norm_m * mats.norm_m_inv;
    let ratio = kappa * delta_m_norm / mats.norm_m;
    if ratio >= T::one() {
        return ErrorBound { bound: inf, valid: false };
    }
    let perturbed_inv = mats.norm_m_inv / (T::one() - ratio);
    let second = if delta_m_norm == T::zero() {
        T::zero()
    } else {
        kappa / (mats.norm_m / delta_m_norm - kappa) * mats.norm_m_inv * rhs_norm
    };
    ErrorBound { bound: perturbed_inv * delta_rhs_norm + second, valid: true }
}
