// Copyright 2026 The oqs-ident Authors
// SPDX-License-Identifier: Apache-2.0

//! Continuous-time reconstruction of `dx/dt = A x + B u` from multirate
//! samples.
//!
//! The pipeline is [`fit_multirate`] (or [`DiscreteMultirateModel::exact`])
//! to obtain the lifted model `(G, F, Gamma)`, then [`single_rate_models`]
//! to split it into one discrete model per increment `tau_i`, and finally
//! [`reconstruct_continuous`], which picks the branch of each eigenvalue
//! logarithm that is common to every increment.

use std::collections::BTreeMap;

use nalgebra::{Complex, ComplexField, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::identify::sampling_policy_check;
use crate::linalg::{expm_with_integral, null_space_c, numerical_rank, pinv, to_complex, CMatrix};
use crate::scalar::{cabs, cplx, Real};
use crate::simulate::{MeasurementRecord, SamplingSchedule};

/// Lifted discrete model over one frame period `T`.
///
/// Offsets are indexed `0..=l`; `G_0 = I` and `G_{l+1} = G`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteMultirateModel<T: Real> {
    /// `exp(A T)`.
    pub g: DMatrix<T>,
    /// `F_1 .. F_{l+1}`, each `n x m`, with `F_i = exp(A (T - t_i)) F_{tau_i}`.
    pub f: Vec<DMatrix<T>>,
    /// `[C G_0; C G_1; ...; C G_l]`.
    pub gamma: DMatrix<T>,
    /// `G_0 .. G_l`, `G_i = exp(A t_i)`.
    pub g_offsets: Vec<DMatrix<T>>,
    /// `0 = t_0 < ... < t_{l+1} = T`.
    pub partition: Vec<T>,
    /// Output rows per block of `gamma`.
    pub outputs: usize,
}

impl<T: Real> DiscreteMultirateModel<T> {
    /// Lifted model of known `(A, B, C)` under `schedule`, computed from
    /// matrix exponentials.
    pub fn exact(a: &DMatrix<T>, b: &DMatrix<T>, c: &DMatrix<T>, schedule: &SamplingSchedule<T>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n || b.nrows() != n || c.ncols() != n {
            return Err(Error::Dimension(format!(
                "A {}x{}, B {}x{}, C {}x{}",
                a.nrows(),
                a.ncols(),
                b.nrows(),
                b.ncols(),
                c.nrows(),
                c.ncols()
            )));
        }
        let part = schedule.partition().to_vec();
        let l = schedule.l();
        let period = schedule.frame_period();
        let g = (a * period).exp();
        let g_offsets: Vec<DMatrix<T>> = part[..=l].iter().map(|&t| (a * t).exp()).collect();
        let mut f = Vec::with_capacity(l + 1);
        for i in 1..=l + 1 {
            let (_, integral) = expm_with_integral(a, part[i] - part[i - 1]);
            f.push((a * (period - part[i])).exp() * integral * b);
        }
        let gamma = stack_gamma(c, &g_offsets);
        Ok(DiscreteMultirateModel { g, f, gamma, g_offsets, partition: part, outputs: c.nrows() })
    }

    pub fn n(&self) -> usize {
        self.g.nrows()
    }

    /// `l`, the number of interior offsets.
    pub fn l(&self) -> usize {
        self.g_offsets.len() - 1
    }

    pub fn inputs(&self) -> usize {
        self.f.first().map_or(0, |f| f.ncols())
    }

    /// First block of `gamma`.
    pub fn c(&self) -> DMatrix<T> {
        self.gamma.rows(0, self.outputs).into_owned()
    }

    /// `[F_1, ..., F_{l+1}]` as one `n x m(l+1)` matrix.
    pub fn f_stacked(&self) -> DMatrix<T> {
        let n = self.n();
        let m = self.inputs();
        let mut out = DMatrix::zeros(n, m * self.f.len());
        for (i, fi) in self.f.iter().enumerate() {
            out.view_mut((0, i * m), (n, m)).copy_from(fi);
        }
        out
    }
}

fn stack_gamma<T: Real>(c: &DMatrix<T>, g_offsets: &[DMatrix<T>]) -> DMatrix<T> {
    let p = c.nrows();
    let n = c.ncols();
    let mut gamma = DMatrix::zeros(p * g_offsets.len(), n);
    for (i, gi) in g_offsets.iter().enumerate() {
        gamma.view_mut((i * p, 0), (p, n)).copy_from(&(c * gi));
    }
    gamma
}

/// Options for [`fit_multirate`].
#[derive(Clone, Debug)]
pub struct FitOptions<T: Real> {
    /// Output matrix. Required when the record carries no state snapshots,
    /// in which case it must have full column rank.
    pub c: Option<DMatrix<T>>,
    /// Fit `x(kT + t_i) = G_i x(kT) + h_i`, i.e. a constant unit input
    /// through `B = beta`. Needed for non-unital coherence dynamics.
    pub affine: bool,
    /// Relative SVD cutoff for the regressor rank test.
    pub rank_rel: Option<T>,
}

impl<T: Real> Default for FitOptions<T> {
    fn default() -> Self {
        FitOptions { c: None, affine: false, rank_rel: None }
    }
}

/// Least-squares fit of the lifted model from an autonomous record.
///
/// Every frame `k` whose offsets and successor frame start were all sampled
/// contributes one regression row per offset. State snapshots are used when
/// present; otherwise states are recovered as `pinv(C) y`.
pub fn fit_multirate<T: Real>(
    record: &MeasurementRecord<T>,
    schedule: &SamplingSchedule<T>,
    order: usize,
    opts: &FitOptions<T>,
) -> Result<DiscreteMultirateModel<T>> {
    if order == 0 {
        return Err(Error::Dimension("model order must be positive".into()));
    }
    if record.samples.iter().any(|s| s.pulse_id.is_some_and(|p| record.pulses.get(p).is_some_and(|q| !q.is_null()))) {
        return Err(Error::Unsupported(
            "pulse-driven records are bilinear; fit_multirate needs autonomous data".into(),
        ));
    }
    let l = schedule.l();
    let with_state = record.samples.iter().all(|s| s.x.is_some());
    let c = match (&opts.c, with_state) {
        (Some(c), _) if c.ncols() != order => {
            return Err(Error::Dimension(format!("C has {} columns, model order {order}", c.ncols())))
        }
        (Some(c), _) => c.clone(),
        (None, true) => DMatrix::identity(order, order),
        (None, false) => return Err(Error::InvalidParams("record has no state snapshots and no C was given".into())),
    };
    let c_pinv = if with_state {
        None
    } else {
        let rank = numerical_rank(&c, opts.rank_rel);
        if rank < order {
            return Err(Error::Unsupported(format!(
                "output-only fit needs full column rank C (rank {rank} < {order}); supply state snapshots"
            )));
        }
        Some(pinv(&c, opts.rank_rel))
    };

    let mut states: BTreeMap<(usize, usize, usize), DVector<T>> = BTreeMap::new();
    for s in &record.samples {
        let x = match (&s.x, &c_pinv) {
            (Some(x), _) => x.clone(),
            (None, Some(cp)) => cp * &s.y,
            (None, None) => unreachable!("checked above"),
        };
        if x.len() != order {
            return Err(Error::Dimension(format!("state of length {} in record, model order {order}", x.len())));
        }
        states.insert((s.run, s.frame, s.offset), x);
    }

    let mut frames = Vec::new();
    for &(run, frame, offset) in states.keys() {
        if offset == 0
            && (1..=l).all(|i| states.contains_key(&(run, frame, i)))
            && states.contains_key(&(run, frame + 1, 0))
        {
            frames.push((run, frame));
        }
    }
    let width = order + usize::from(opts.affine);
    if frames.len() < order + 1 + usize::from(opts.affine) {
        return Err(Error::InsufficientFrames(format!(
            "{} complete frames, need at least {}",
            frames.len(),
            order + 1 + usize::from(opts.affine)
        )));
    }

    let k = frames.len();
    let mut x0 = DMatrix::zeros(width, k);
    for (col, &(run, frame)) in frames.iter().enumerate() {
        x0.view_mut((0, col), (order, 1)).copy_from(&states[&(run, frame, 0)]);
        if opts.affine {
            x0[(order, col)] = T::one();
        }
    }
    let rank = numerical_rank(&x0, opts.rank_rel);
    if rank < width {
        return Err(Error::RankDeficient { block: "frame-start regressors".into(), rank, required: width });
    }
    let x0_pinv = pinv(&x0, opts.rank_rel);

    // targets: offsets 1..=l, then the next frame start
    let mut g_offsets = vec![DMatrix::identity(order, order)];
    let mut h = vec![DVector::zeros(order)];
    let mut g = DMatrix::zeros(order, order);
    for i in 1..=l + 1 {
        let mut y = DMatrix::zeros(order, k);
        for (col, &(run, frame)) in frames.iter().enumerate() {
            let key = if i <= l { (run, frame, i) } else { (run, frame + 1, 0) };
            y.set_column(col, &states[&key]);
        }
        let w = y * &x0_pinv;
        let gi = w.columns(0, order).into_owned();
        h.push(if opts.affine { w.column(order).into_owned() } else { DVector::zeros(order) });
        if i <= l {
            g_offsets.push(gi);
        } else {
            g = gi;
        }
    }
    let g_det = numerical_rank(&g, opts.rank_rel);
    if g_det < order {
        return Err(Error::RankDeficient { block: "G".into(), rank: g_det, required: order });
    }

    let f = if opts.affine {
        // h_i = exp(A tau_i) h_{i-1} + F_{tau_i} and F_i = G G_i^{-1} F_{tau_i}
        let mut all: Vec<&DMatrix<T>> = g_offsets.iter().collect();
        all.push(&g);
        let mut f = Vec::with_capacity(l + 1);
        for i in 1..=l + 1 {
            let prev_inv = invert(all[i - 1], "G_i")?;
            let step = all[i] * &prev_inv;
            let f_tau = &h[i] - &step * &h[i - 1];
            let to_end = &g * invert(all[i], "G_i")?;
            f.push(DMatrix::from_column_slice(order, 1, (to_end * f_tau).as_slice()));
        }
        f
    } else {
        vec![DMatrix::zeros(order, 0); l + 1]
    };
    let gamma = stack_gamma(&c, &g_offsets);
    Ok(DiscreteMultirateModel { g, f, gamma, g_offsets, partition: schedule.partition().to_vec(), outputs: c.nrows() })
}

fn invert<T: Real>(m: &DMatrix<T>, what: &str) -> Result<DMatrix<T>> {
    m.clone().try_inverse().ok_or_else(|| Error::Singular(what.to_string()))
}

/// One single-rate discrete model `(G_tau, F_tau, C)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SingleRateModel<T: Real> {
    pub tau: T,
    pub g_tau: DMatrix<T>,
    pub f_tau: DMatrix<T>,
    pub c: DMatrix<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SingleRateFamily<T: Real> {
    pub members: Vec<SingleRateModel<T>>,
}

impl<T: Real> SingleRateFamily<T> {
    pub fn taus(&self) -> Vec<T> {
        self.members.iter().map(|m| m.tau).collect()
    }
}

/// `Gamma_i = [C G_i; C G G_i; ...; C G^n G_i]`.
fn gamma_block<T: Real>(c: &DMatrix<T>, g: &DMatrix<T>, gi: &DMatrix<T>) -> DMatrix<T> {
    let n = g.nrows();
    let p = c.nrows();
    let mut out = DMatrix::zeros(p * (n + 1), n);
    let mut row = c * gi;
    for k in 0..=n {
        out.view_mut((k * p, 0), (p, n)).copy_from(&row);
        row = c * g.pow(k as u32 + 1) * gi;
    }
    out
}

/// Splits the lifted model into the `l+1` single-rate models.
pub fn single_rate_models<T: Real>(model: &DiscreteMultirateModel<T>) -> Result<SingleRateFamily<T>> {
    let n = model.n();
    let l = model.l();
    let c = model.c();
    let mut g_all = model.g_offsets.clone();
    g_all.push(model.g.clone());
    let blocks: Vec<DMatrix<T>> = g_all.iter().map(|gi| gamma_block(&c, &model.g, gi)).collect();
    let g_inv = invert(&model.g, "G")?;
    let mut members = Vec::with_capacity(l + 1);
    for i in 1..=l + 1 {
        let prev = &blocks[i - 1];
        let rank = numerical_rank(prev, None);
        if rank < n {
            return Err(Error::RankDeficient { block: format!("Gamma_{}", i - 1), rank, required: n });
        }
        let g_tau = pinv(prev, None) * &blocks[i];
        let f_tau = if i <= l { &g_inv * &g_all[i] * &model.f[i - 1] } else { model.f[l].clone() };
        members.push(SingleRateModel { tau: model.partition[i] - model.partition[i - 1], g_tau, f_tau, c: c.clone() });
    }
    Ok(SingleRateFamily { members })
}

/// Options for [`reconstruct_continuous`].
#[derive(Clone, Copy, Debug)]
pub struct ReconstructOptions<T> {
    /// Relative tolerance for matching logarithm candidates across rates.
    pub match_tol: T,
    /// Upper bound on `|Im lambda|`; `None` searches
    /// [`DEFAULT_BRANCHES`] branches either side of the shortest increment.
    pub max_frequency: Option<T>,
}

impl<T: Real> Default for ReconstructOptions<T> {
    fn default() -> Self {
        ReconstructOptions { match_tol: T::lit(1e-6), max_frequency: None }
    }
}

pub const DEFAULT_BRANCHES: usize = 32;

#[derive(Clone, Debug, PartialEq)]
pub struct ContinuousSystem<T: Real> {
    pub a: DMatrix<T>,
    pub b: DMatrix<T>,
    /// Recovered spectrum, sorted by real then imaginary part.
    pub eigenvalues: Vec<Complex<T>>,
    /// Family member whose (generalized) eigenvectors span `A`.
    pub reference: usize,
}

fn log_branch<T: Real>(mu: Complex<T>, k: i64, tau: T) -> Complex<T> {
    let two_pi = T::two_pi();
    cplx(cabs(mu).ln() / tau, (mu.argument() + two_pi * T::lit(k as f64)) / tau)
}

fn close<T: Real>(a: Complex<T>, b: Complex<T>, tol: T) -> bool {
    cabs(a - b) <= tol * (T::one() + cabs(a).max(cabs(b)))
}

/// Groups values that lie within `tol` of a group's first member.
fn clusters<T: Real>(vals: &[Complex<T>], tol: T) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    for (i, &v) in vals.iter().enumerate() {
        match out.iter_mut().find(|g| close(vals[g[0]], v, tol)) {
            Some(g) => g.push(i),
            None => out.push(vec![i]),
        }
    }
    out
}

fn sort_spectrum<T: Real>(v: &mut [Complex<T>]) {
    v.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.im.partial_cmp(&b.im).unwrap_or(std::cmp::Ordering::Equal))
    });
}

/// Recovers `(A, B)` from the single-rate family.
///
/// Each eigenvalue `mu` of the shortest-increment model proposes the
/// candidates `(ln|mu| + i(arg mu + 2 pi k)) / tau`; a candidate survives
/// when every other increment has an eigenvalue whose logarithm, on the
/// nearest admissible branch, agrees with it. `A` is assembled on the
/// generalized eigenspaces of one member, so Jordan blocks carry over when
/// `A` shares them, and `B` solves the stacked Van Loan integral equations.
pub fn reconstruct_continuous<T: Real>(
    family: &SingleRateFamily<T>,
    schedule: &SamplingSchedule<T>,
    opts: &ReconstructOptions<T>,
) -> Result<ContinuousSystem<T>> {
    let members = &family.members;
    if members.len() < 2 {
        return Err(Error::BranchIntersection("a single sampling rate cannot fix the logarithm branch".into()));
    }
    let n = members[0].g_tau.nrows();
    if members.iter().any(|m| m.g_tau.nrows() != n || m.g_tau.ncols() != n || m.f_tau.nrows() != n) {
        return Err(Error::Dimension("family members disagree on the state dimension".into()));
    }
    let incs = schedule.increments();
    let tol_t = T::lit(1e-9) * schedule.frame_period();
    for m in members {
        if !incs.iter().any(|&t| (t - m.tau).abs() <= tol_t) {
            return Err(Error::Schedule(format!(
                "family increment {} is not an increment of the schedule",
                m.tau.as_f64()
            )));
        }
    }
    let check = sampling_policy_check(schedule);
    if !check.sampling_ok {
        log::warn!("sampling ratios are not certified irrational; branch intersection may be ambiguous");
    }

    let spectra: Vec<Vec<Complex<T>>> =
        members.iter().map(|m| m.g_tau.complex_eigenvalues().iter().copied().collect()).collect();
    for (j, s) in spectra.iter().enumerate() {
        if s.iter().any(|&mu| cabs(mu) == T::zero()) {
            return Err(Error::Singular(format!("G_tau of member {j} has a zero eigenvalue")));
        }
    }
    let ref_idx = (0..members.len())
        .min_by(|&a, &b| members[a].tau.partial_cmp(&members[b].tau).expect("finite increments"))
        .expect("nonempty family");
    let tau_ref = members[ref_idx].tau;
    let omega = opts.max_frequency.unwrap_or(T::two_pi() * T::lit(DEFAULT_BRANCHES as f64) / tau_ref);
    let k_bound = |tau: T| -> i64 { (omega * tau / T::two_pi()).ceil().as_f64() as i64 + 2 };
    let tol = opts.match_tol;

    let survives = |cand: Complex<T>| -> bool {
        members.iter().enumerate().all(|(j, m)| {
            if j == ref_idx {
                return true;
            }
            let kb = k_bound(m.tau);
            spectra[j].iter().any(|&mu| {
                let k = ((cand.im * m.tau - mu.argument()) / T::two_pi()).round().as_f64() as i64;
                k.abs() <= kb && close(cand, log_branch(mu, k, m.tau), tol)
            })
        })
    };

    let mut lambdas = Vec::with_capacity(n);
    let kb_ref = k_bound(tau_ref);
    for &mu in &spectra[ref_idx] {
        let mut found: Vec<Complex<T>> =
            (-kb_ref..=kb_ref).map(|k| log_branch(mu, k, tau_ref)).filter(|&c| survives(c)).collect();
        if found.len() > 1 && mu.im.abs() <= tol * cabs(mu) {
            let real: Vec<Complex<T>> =
                found.iter().copied().filter(|c| c.im.abs() <= tol * (T::one() + cabs(*c))).collect();
            if real.len() == 1 {
                found = real;
            }
        }
        match found.len() {
            0 => {
                return Err(Error::BranchIntersection(format!(
                    "no common logarithm for eigenvalue {:.6}{:+.6}i of the tau = {} model",
                    mu.re.as_f64(),
                    mu.im.as_f64(),
                    tau_ref.as_f64()
                )))
            }
            1 => lambdas.push(found[0]),
            c => {
                return Err(Error::BranchIntersection(format!(
                    "{c} branches survive for eigenvalue {:.6}{:+.6}i",
                    mu.re.as_f64(),
                    mu.im.as_f64()
                )))
            }
        }
    }

    // conjugate pairs, as A is real
    let mut paired = vec![false; n];
    for i in 0..n {
        if paired[i] {
            continue;
        }
        if lambdas[i].im.abs() <= tol * (T::one() + cabs(lambdas[i])) {
            lambdas[i].im = T::zero();
            paired[i] = true;
            continue;
        }
        let partner = (0..n).find(|&j| j != i && !paired[j] && close(lambdas[j], lambdas[i].conj(), tol));
        let Some(j) = partner else {
            return Err(Error::BranchIntersection(format!(
                "eigenvalue {:.6}{:+.6}i has no conjugate partner",
                lambdas[i].re.as_f64(),
                lambdas[i].im.as_f64()
            )));
        };
        let mean = (lambdas[i] + lambdas[j].conj()) * T::lit(0.5);
        lambdas[i] = mean;
        lambdas[j] = mean.conj();
        paired[i] = true;
        paired[j] = true;
    }

    // multiset check: each member's spectrum is exp(lambda tau)
    for (j, m) in members.iter().enumerate() {
        let mut used = vec![false; n];
        for &lam in &lambdas {
            let mu = (lam * m.tau).exp();
            let hit = (0..n)
                .filter(|&r| !used[r])
                .min_by(|&a, &b| cabs(spectra[j][a] - mu).partial_cmp(&cabs(spectra[j][b] - mu)).expect("finite"));
            match hit {
                Some(r) if close(spectra[j][r], mu, tol.sqrt()) => used[r] = true,
                _ => {
                    return Err(Error::BranchIntersection(format!(
                        "recovered spectrum does not reproduce member {j} (tau = {})",
                        m.tau.as_f64()
                    )))
                }
            }
        }
    }

    let groups = clusters(&lambdas, tol);
    let reps: Vec<Complex<T>> = groups
        .iter()
        .map(|g| g.iter().fold(Complex::new(T::zero(), T::zero()), |acc, &i| acc + lambdas[i]) / T::lit(g.len() as f64))
        .collect();

    // member on which distinct eigenvalues stay best separated
    let separation = |tau: T| -> T {
        let mus: Vec<Complex<T>> = reps.iter().map(|&l| (l * tau).exp()).collect();
        let mut sep = T::max_value().expect("bounded");
        for a in 0..mus.len() {
            for b in a + 1..mus.len() {
                sep = sep.min(cabs(mus[a] - mus[b]) / (T::one() + cabs(mus[a]).max(cabs(mus[b]))));
            }
        }
        sep
    };
    let chosen = (0..members.len())
        .max_by(|&a, &b| separation(members[a].tau).partial_cmp(&separation(members[b].tau)).expect("finite"))
        .expect("nonempty family");
    if separation(members[chosen].tau) <= tol {
        return Err(Error::Unsupported(
            "distinct eigenvalues of A coincide after exponentiation at every rate; Jordan structure not shared".into(),
        ));
    }

    let a = assemble_from_eigenspaces(&members[chosen].g_tau, members[chosen].tau, &groups, &reps)?;

    // B from [int_0^tau exp(A t) dt] B = F_tau, stacked over all members
    let m_in = members[0].f_tau.ncols();
    let b = if m_in == 0 {
        DMatrix::zeros(n, 0)
    } else {
        let rows = n * members.len();
        let mut phi = DMatrix::zeros(rows, n);
        let mut rhs = DMatrix::zeros(rows, m_in);
        for (j, m) in members.iter().enumerate() {
            let (_, integral) = expm_with_integral(&a, m.tau);
            phi.view_mut((j * n, 0), (n, n)).copy_from(&integral);
            rhs.view_mut((j * n, 0), (n, m_in)).copy_from(&m.f_tau);
        }
        let rank = numerical_rank(&phi, None);
        if rank < n {
            return Err(Error::RankDeficient { block: "stacked exp integrals".into(), rank, required: n });
        }
        pinv(&phi, None) * rhs
    };

    let mut eigenvalues = lambdas;
    sort_spectrum(&mut eigenvalues);
    Ok(ContinuousSystem { a, b, eigenvalues, reference: chosen })
}

/// `A = V blockdiag(L_c / tau) V^{-1}` with `V` spanning the generalized
/// eigenspaces of `G_tau` and `L_c = lambda_c tau I + log(I + N_c)` on each.
fn assemble_from_eigenspaces<T: Real>(
    g_tau: &DMatrix<T>,
    tau: T,
    groups: &[Vec<usize>],
    reps: &[Complex<T>],
) -> Result<DMatrix<T>> {
    let n = g_tau.nrows();
    let gc = to_complex(g_tau);
    let id = CMatrix::<T>::identity(n, n);
    let mut v = CMatrix::<T>::zeros(n, n);
    let mut col = 0;
    let mut spans = Vec::with_capacity(groups.len());
    for (g, &lam) in groups.iter().zip(reps) {
        let m = g.len();
        let mu = (lam * tau).exp();
        let shifted = &gc - &id * mu;
        let mut power = shifted.clone();
        for _ in 1..m {
            power = &power * &shifted;
        }
        let (basis, null_max, kept_min) = null_space_c(&power, m);
        if m < n && !(kept_min > null_max * T::lit(1e3)) {
            return Err(Error::Unsupported(format!(
                "generalized eigenspace of multiplicity {m} is not numerically separated (null {:e}, kept {:e})",
                null_max.as_f64(),
                kept_min.as_f64()
            )));
        }
        v.view_mut((0, col), (n, m)).copy_from(&basis);
        spans.push((col, m, lam, mu));
        col += m;
    }
    let v_inv = v.clone().try_inverse().ok_or_else(|| Error::Singular("generalized eigenvector matrix".into()))?;
    let block = &v_inv * &gc * &v;
    let mut log_block = CMatrix::<T>::zeros(n, n);
    for &(start, m, lam, mu) in &spans {
        let b = block.view((start, start), (m, m)).into_owned();
        let nil = b / mu - CMatrix::<T>::identity(m, m);
        let mut l = CMatrix::<T>::identity(m, m) * (lam * tau);
        let mut term = nil.clone();
        for k in 1..m.max(2) {
            let sign = if k % 2 == 1 { T::one() } else { -T::one() };
            l += &term * Complex::new(sign / T::lit(k as f64), T::zero());
            term = &term * &nil;
        }
        log_block.view_mut((start, start), (m, m)).copy_from(&l);
    }
    let a_c = &v * log_block * &v_inv / Complex::new(tau, T::zero());
    let scale = T::one() + a_c.iter().fold(T::zero(), |acc, z| acc.max(cabs(*z)));
    let residue = a_c.iter().fold(T::zero(), |acc, z| acc.max(z.im.abs()));
    if residue > T::default_epsilon().sqrt() * scale {
        return Err(Error::ImaginaryResidue { what: "reconstructed A".into(), residue: residue.as_f64() });
    }
    Ok(a_c.map(|z| z.re))
}
