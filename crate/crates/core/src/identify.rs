// Copyright 2026 The oqs-ident Authors
// SPDX-License-Identifier: Apache-2.0

//! Identifiability checks: Kalman rank tests for linear systems, word-span
//! rank tests for bilinear systems, sampling-ratio screening, persistency of
//! excitation, and the accessible set of measured generators.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::gksl::CoherenceSystem;
use crate::liealg::StructureTensors;
use crate::linalg::numerical_rank;
use crate::scalar::Real;
use crate::simulate::{Pulse, RatioPolicy, SamplingSchedule};

/// `[C; CA; ...; CA^{n-1}]`.
pub fn observability_matrix<T: Real>(a: &DMatrix<T>, c: &DMatrix<T>) -> DMatrix<T> {
    let n = a.nrows();
    let p = c.nrows();
    let mut om = DMatrix::zeros(p * n, n);
    let mut block = c.clone();
    for k in 0..n {
        om.view_mut((k * p, 0), (p, n)).copy_from(&block);
        block = &block * a;
    }
    om
}

/// `[B, AB, ..., A^{n-1}B]`.
pub fn controllability_matrix<T: Real>(a: &DMatrix<T>, b: &DMatrix<T>) -> DMatrix<T> {
    observability_matrix(&a.transpose(), &b.transpose()).transpose()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LinearRanks {
    pub rank_om: usize,
    pub rank_cm: usize,
}

pub fn linear_rank_test<T: Real>(
    a: &DMatrix<T>,
    b: &DMatrix<T>,
    c: &DMatrix<T>,
    rel: Option<T>,
) -> Result<LinearRanks> {
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
    Ok(LinearRanks {
        rank_om: numerical_rank(&observability_matrix(a, c), rel),
        rank_cm: numerical_rank(&controllability_matrix(a, b), rel),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpanStatus {
    Full,
    /// The span reached a fixpoint (or exhausted all words) below full rank.
    Deficient,
    /// The word cap was hit before either full rank or a fixpoint.
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpanResult {
    pub rank: usize,
    pub status: SpanStatus,
    /// Matrix-vector products evaluated.
    pub words: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BilinearRanks {
    pub controllability: SpanResult,
    pub observability: SpanResult,
}

impl BilinearRanks {
    pub fn rank_cm(&self) -> usize {
        self.controllability.rank
    }

    pub fn rank_om(&self) -> usize {
        self.observability.rank
    }
}

/// Breadth-first span of `{ M_{i1} ... M_{ik} v : k <= n-1 }` over the seed
/// vectors, with Gram-Schmidt pruning. Only directions that are new at a
/// level are propagated to the next, so an empty level is a fixpoint.
pub fn word_span<T: Real>(generators: &[DMatrix<T>], seeds: &[DVector<T>], cap: usize, rel: Option<T>) -> SpanResult {
    let n = seeds.first().map_or(0, |v| v.len());
    let tol = rel.unwrap_or_else(|| T::lit(1e3 * (n.max(1) as f64)) * T::default_epsilon());
    let mut ortho: Vec<DVector<T>> = Vec::new();
    let mut raw: Vec<DVector<T>> = Vec::new();
    let scale = seeds.iter().map(|v| v.norm()).fold(T::zero(), |a, b| a.max(b));

    let try_add = |w: DVector<T>, ortho: &mut Vec<DVector<T>>, raw: &mut Vec<DVector<T>>| -> Option<DVector<T>> {
        let wn = w.norm();
        if wn <= T::zero() || ortho.len() == n {
            return None;
        }
        let mut r = w.clone();
        for _ in 0..2 {
            for q in ortho.iter() {
                let d = q.dot(&r);
                r -= q * d;
            }
        }
        let rn = r.norm();
        if rn > tol * wn && rn > tol * scale * T::default_epsilon().sqrt() {
            let q = r / rn;
            ortho.push(q.clone());
            raw.push(w);
            Some(q)
        } else {
            None
        }
    };

    let mut words = 0usize;
    let mut frontier: Vec<DVector<T>> = Vec::new();
    for v in seeds {
        words += 1;
        if let Some(q) = try_add(v.clone(), &mut ortho, &mut raw) {
            frontier.push(q);
        }
    }
    let mut status = None;
    'levels: for _level in 1..n {
        if ortho.len() == n {
            break;
        }
        if frontier.is_empty() {
            status = Some(SpanStatus::Deficient);
            break;
        }
        let mut next = Vec::new();
        for v in &frontier {
            for g in generators {
                if words >= cap {
                    status = Some(SpanStatus::Inconclusive);
                    break 'levels;
                }
                words += 1;
                if let Some(q) = try_add(g * v, &mut ortho, &mut raw) {
                    next.push(q);
                    if ortho.len() == n {
                        break 'levels;
                    }
                }
            }
        }
        frontier = next;
    }
    let rank = if raw.is_empty() {
        0
    } else {
        let m = DMatrix::from_columns(&raw);
        numerical_rank(&m, None)
    };
    let status = if rank == n && n > 0 {
        SpanStatus::Full
    } else {
        match status {
            Some(SpanStatus::Inconclusive) => SpanStatus::Inconclusive,
            _ => SpanStatus::Deficient,
        }
    };
    SpanResult { rank, status, words }
}

/// Default word cap, `10 n^2`.
pub fn default_word_cap(n: usize) -> usize {
    10 * n * n
}

/// Bilinear controllability from `b` and observability from the rows of `C`
/// over the generator set `{A} ∪ N_list`.
pub fn bilinear_span_test<T: Real>(
    a: &DMatrix<T>,
    n_list: &[DMatrix<T>],
    b: &DVector<T>,
    c: &DMatrix<T>,
    cap: Option<usize>,
) -> Result<BilinearRanks> {
    let n = a.nrows();
    if a.ncols() != n || b.len() != n || c.ncols() != n || n_list.iter().any(|m| m.shape() != (n, n)) {
        return Err(Error::Dimension("bilinear span test needs square, matching matrices".into()));
    }
    let cap = cap.unwrap_or_else(|| default_word_cap(n));
    let mut gens = vec![a.clone()];
    gens.extend(n_list.iter().cloned());
    let gens_t: Vec<_> = gens.iter().map(|m| m.transpose()).collect();
    let rows: Vec<DVector<T>> = (0..c.nrows()).map(|r| c.row(r).transpose()).collect();
    Ok(BilinearRanks {
        controllability: word_span(&gens, std::slice::from_ref(b), cap, None),
        observability: word_span(&gens_t, &rows, cap, None),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum RatioVerdict {
    IrrationalByConstruction,
    DeclaredIrrational,
    Rational { p: u64, q: u64 },
    NoSmallDenominator,
}

impl RatioVerdict {
    pub fn passes(&self) -> bool {
        matches!(self, RatioVerdict::IrrationalByConstruction | RatioVerdict::DeclaredIrrational)
    }

    pub fn describe(&self) -> String {
        match self {
            RatioVerdict::IrrationalByConstruction => "irrational by construction".into(),
            RatioVerdict::DeclaredIrrational => "declared irrational".into(),
            RatioVerdict::Rational { p, q } => format!("rational {p}/{q} (fails)"),
            RatioVerdict::NoSmallDenominator => "no small denominator found (warning)".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairVerdict {
    pub i: usize,
    pub j: usize,
    pub ratio: f64,
    pub verdict: RatioVerdict,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SamplingCheck {
    pub sampling_ok: bool,
    pub pairs: Vec<PairVerdict>,
}

/// Largest denominator screened by [`small_denominator`].
pub const MAX_DENOMINATOR: u64 = 1_000_000;

/// Continued-fraction search for `p/q` with `q <= max_q` matching `r` to a
/// few ulps.
pub fn small_denominator(r: f64, max_q: u64) -> Option<(u64, u64)> {
    if !r.is_finite() || r <= 0.0 {
        return None;
    }
    let tol = 8.0 * f64::EPSILON * r.abs();
    let (mut p0, mut q0, mut p1, mut q1) = (0u128, 1u128, 1u128, 0u128);
    let mut x = r;
    for _ in 0..64 {
        let a = x.floor();
        if a > 1e18 {
            break;
        }
        let ai = a as u128;
        let p2 = ai * p1 + p0;
        let q2 = ai * q1 + q0;
        if q2 > max_q as u128 {
            break;
        }
        if ((p2 as f64) / (q2 as f64) - r).abs() <= tol {
            return Some((p2 as u64, q2 as u64));
        }
        let frac = x - a;
        if frac <= 0.0 {
            break;
        }
        x = 1.0 / frac;
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
    }
    None
}

/// Per-pair verdicts for `tau_i / tau_j`; only declared or constructed
/// irrational ratios pass.
pub fn sampling_policy_check<T: Real>(schedule: &SamplingSchedule<T>) -> SamplingCheck {
    let taus = schedule.increments();
    let mut pairs = Vec::new();
    for i in 0..taus.len() {
        for j in i + 1..taus.len() {
            let ratio = (taus[j] / taus[i]).as_f64();
            let verdict = match schedule.ratio_policy() {
                RatioPolicy::IrrationalByConstruction => RatioVerdict::IrrationalByConstruction,
                RatioPolicy::DeclaredIrrational => RatioVerdict::DeclaredIrrational,
                RatioPolicy::Undeclared => match small_denominator(ratio, MAX_DENOMINATOR) {
                    Some((p, q)) => RatioVerdict::Rational { p, q },
                    None => RatioVerdict::NoSmallDenominator,
                },
            };
            pairs.push(PairVerdict { i, j, ratio, verdict });
        }
    }
    let sampling_ok = !pairs.is_empty() && pairs.iter().all(|p| p.verdict.passes());
    SamplingCheck { sampling_ok, pairs }
}

/// Block Hankel matrix with `depth` block rows of the input sequence
/// (`m` channels by `len` samples).
pub fn hankel_matrix<T: Real>(u: &DMatrix<T>, depth: usize) -> Result<DMatrix<T>> {
    let (m, len) = u.shape();
    if depth == 0 || depth > len {
        return Err(Error::InsufficientSamples(format!("Hankel depth {depth} with {len} samples")));
    }
    let cols = len - depth + 1;
    let mut h = DMatrix::zeros(m * depth, cols);
    for r in 0..depth {
        for c in 0..cols {
            h.view_mut((r * m, c), (m, 1)).copy_from(&u.column(r + c));
        }
    }
    Ok(h)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PersistencyResult {
    pub rank: usize,
    pub required: usize,
    pub persistent: bool,
}

/// Persistency of excitation of order `depth`: full row rank of the
/// depth-`depth` block Hankel matrix.
pub fn persistency_check<T: Real>(u: &DMatrix<T>, depth: usize) -> Result<PersistencyResult> {
    let (m, len) = u.shape();
    let required = m * depth;
    if depth == 0 || len + 1 < depth + required {
        return Err(Error::InsufficientSamples(format!(
            "need at least {} samples for depth {depth} with {m} channel(s), got {len}",
            required + depth - 1
        )));
    }
    let rank = numerical_rank(&hankel_matrix(u, depth)?, None);
    Ok(PersistencyResult { rank, required, persistent: rank == required })
}

/// Autonomous variant: the state snapshots `x(0..)` must span `R^n`.
pub fn state_persistency_check<T: Real>(x: &DMatrix<T>) -> Result<PersistencyResult> {
    let (n, k) = x.shape();
    if k < n {
        return Err(Error::InsufficientSamples(format!("need at least {n} state snapshots, got {k}")));
    }
    let rank = numerical_rank(x, None);
    Ok(PersistencyResult { rank, required: n, persistent: rank == n })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AccessibleSet {
    /// 0-based generator indices.
    pub indices: BTreeSet<usize>,
    /// Iterations that added at least one generator.
    pub iterations: usize,
}

/// Smallest superset of `measured` closed under commutation with `delta`.
pub fn accessible_set<T: Real>(
    tensors: &StructureTensors<T>,
    measured: &BTreeSet<usize>,
    delta: &BTreeSet<usize>,
) -> Result<AccessibleSet> {
    let n = tensors.n();
    if let Some(&bad) = measured.iter().chain(delta.iter()).find(|&&k| k >= n) {
        return Err(Error::Dimension(format!("generator index {bad} out of range for n={n}")));
    }
    let mut current = measured.clone();
    let mut iterations = 0;
    loop {
        let mut next = current.clone();
        for &g in &current {
            for &h in delta {
                for &(k, _) in tensors.f_pair(g, h) {
                    next.insert(k);
                }
            }
        }
        if next.len() == current.len() {
            return Ok(AccessibleSet { indices: current, iterations });
        }
        current = next;
        iterations += 1;
    }
}

/// Generators with a nonzero column in `C`.
pub fn measured_generators<T: Real>(c: &DMatrix<T>) -> BTreeSet<usize> {
    (0..c.ncols()).filter(|&k| c.column(k).iter().any(|v| *v != T::zero())).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Autonomous,
    Controlled,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Autonomous => "autonomous",
            Mode::Controlled => "controlled",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Identifiable,
    NotIdentifiable,
    Inconclusive,
}

impl Verdict {
    /// Process exit code: 0, 2 or 3.
    pub fn exit_code(&self) -> i32 {
        match self {
            Verdict::Identifiable => 0,
            Verdict::NotIdentifiable => 2,
            Verdict::Inconclusive => 3,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Identifiable => "identifiable",
            Verdict::NotIdentifiable => "not identifiable",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IdentifiabilityReport {
    pub mode: Mode,
    pub rank_om: usize,
    pub rank_cm: usize,
    pub required_rank: usize,
    pub sampling_ok: bool,
    pub sampling: Option<SamplingCheck>,
    pub pulses_ok: Option<bool>,
    pub verdict: bool,
    pub status: Verdict,
    /// Failing clauses; empty when identifiable.
    pub clauses: Vec<String>,
    pub notes: Vec<String>,
}

/// Inputs to [`identifiability_report`].
#[derive(Clone, Debug)]
pub struct ReportInput<'a, T: Real> {
    pub system: &'a CoherenceSystem<T>,
    pub schedule: Option<&'a SamplingSchedule<T>>,
    pub pulses: &'a [Pulse<T>],
    /// Input matrix for the autonomous test; identity when absent (free
    /// initial state).
    pub b: Option<&'a DMatrix<T>>,
    pub word_cap: Option<usize>,
}

pub const CLAUSE_RATIONAL: &str = "sampling ratios rational";
pub const CLAUSE_UNDECLARED: &str = "sampling ratios not declared irrational";
pub const CLAUSE_SINGLE_RATE: &str = "single sampling rate";
pub const CLAUSE_NO_SCHEDULE: &str = "no sampling schedule";
pub const CLAUSE_OM: &str = "observability matrix rank-deficient";
pub const CLAUSE_CM: &str = "controllability matrix rank-deficient";
pub const CLAUSE_PULSE_DEGENERATE: &str = "pulse family degenerate";
pub const CLAUSE_PULSE_MIXED: &str = "not a single V_alpha family";
pub const CLAUSE_PULSE_WIDTHS: &str = "pulse widths not varied";
pub const CLAUSE_NO_PULSES: &str = "no pulses supplied";

fn pulse_clauses<T: Real>(pulses: &[Pulse<T>]) -> Vec<&'static str> {
    if pulses.is_empty() {
        return vec![CLAUSE_NO_PULSES];
    }
    let alpha = pulses[0].alpha;
    if pulses.iter().all(|p| p.alpha == T::zero()) {
        return vec![CLAUSE_PULSE_DEGENERATE];
    }
    let mut out = Vec::new();
    if pulses.iter().any(|p| p.alpha != alpha || p.channel != pulses[0].channel) {
        out.push(CLAUSE_PULSE_MIXED);
    }
    let mut widths: Vec<f64> = pulses.iter().filter(|p| p.tau > T::zero()).map(|p| p.tau.as_f64()).collect();
    widths.sort_by(f64::total_cmp);
    widths.dedup();
    if widths.len() < 2 {
        out.push(CLAUSE_PULSE_WIDTHS);
    }
    out
}

/// Autonomous mode: sampling ratios and the linear rank tests on the
/// standard-form system (the plain system when `beta = 0`).
/// Controlled mode: pulse-family membership and the bilinear span tests on
/// the same system, seeded with the initial state and restricted to the
/// coupling matrices of the driven channels.
pub fn identifiability_report<T: Real>(mode: Mode, input: &ReportInput<'_, T>) -> Result<IdentifiabilityReport> {
    let sys = input.system;
    let mut clauses: Vec<String> = Vec::new();
    let mut notes = Vec::new();
    let sampling = input.schedule.map(sampling_policy_check);
    let sampling_ok = sampling.as_ref().is_some_and(|s| s.sampling_ok);
    let use_embedded = sys.beta.iter().any(|v| *v != T::zero());

    match mode {
        Mode::Autonomous => {
            match (&sampling, input.schedule) {
                (None, _) | (_, None) => clauses.push(CLAUSE_NO_SCHEDULE.into()),
                (Some(check), Some(_)) if !check.sampling_ok => {
                    if check.pairs.is_empty() {
                        clauses.push(CLAUSE_SINGLE_RATE.into());
                    } else if check.pairs.iter().any(|p| matches!(p.verdict, RatioVerdict::Rational { .. })) {
                        clauses.push(CLAUSE_RATIONAL.into());
                    } else {
                        clauses.push(CLAUSE_UNDECLARED.into());
                    }
                }
                _ => {}
            }
            let (a, c) = if use_embedded {
                notes.push("affine offset present: testing the standard-form embedding".into());
                let e = sys.embed();
                (e.a_emb, e.c_emb)
            } else {
                (sys.a(), sys.c.clone())
            };
            let n = a.nrows();
            let b = match input.b {
                Some(b) if b.nrows() == n => b.clone(),
                Some(b) => {
                    return Err(Error::Dimension(format!("B has {} rows, system dimension {n}", b.nrows())));
                }
                None => DMatrix::identity(n, n),
            };
            let ranks = linear_rank_test(&a, &b, &c, None)?;
            if ranks.rank_om < n {
                clauses.push(CLAUSE_OM.into());
            }
            if ranks.rank_cm < n {
                clauses.push(CLAUSE_CM.into());
            }
            let verdict = clauses.is_empty();
            Ok(IdentifiabilityReport {
                mode,
                rank_om: ranks.rank_om,
                rank_cm: ranks.rank_cm,
                required_rank: n,
                sampling_ok,
                sampling,
                pulses_ok: None,
                verdict,
                status: if verdict { Verdict::Identifiable } else { Verdict::NotIdentifiable },
                clauses,
                notes,
            })
        }
        Mode::Controlled => {
            let pc = pulse_clauses(input.pulses);
            let pulses_ok = pc.is_empty();
            clauses.extend(pc.iter().map(|s| s.to_string()));
            let (a, n_all, seed, c) = if use_embedded {
                notes.push("affine offset present: testing the standard-form embedding".into());
                let e = sys.embed();
                (e.a_emb, e.n_emb, e.x_emb, e.c_emb)
            } else {
                (sys.a(), sys.n_list.clone(), sys.x0.clone(), sys.c.clone())
            };
            let n = a.nrows();
            let mut channels: Vec<usize> = input.pulses.iter().filter(|p| !p.is_null()).map(|p| p.channel).collect();
            channels.sort_unstable();
            channels.dedup();
            if let Some(&bad) = channels.iter().find(|&&j| j >= n_all.len()) {
                return Err(Error::Pulse(format!("pulse channel {bad} out of range")));
            }
            let n_used: Vec<_> = channels.iter().map(|&j| n_all[j].clone()).collect();
            let (rank_om, rank_cm, inconclusive) = if pulses_ok {
                let r = bilinear_span_test(&a, &n_used, &seed, &c, input.word_cap)?;
                if r.controllability.status == SpanStatus::Deficient {
                    clauses.push(CLAUSE_CM.into());
                }
                if r.observability.status == SpanStatus::Deficient {
                    clauses.push(CLAUSE_OM.into());
                }
                let inc = r.controllability.status == SpanStatus::Inconclusive
                    || r.observability.status == SpanStatus::Inconclusive;
                if inc {
                    notes.push("word cap reached before full rank or fixpoint".into());
                }
                (r.rank_om(), r.rank_cm(), inc)
            } else {
                (0, 0, false)
            };
            let verdict = clauses.is_empty() && !inconclusive;
            let status = if verdict {
                Verdict::Identifiable
            } else if clauses.is_empty() {
                Verdict::Inconclusive
            } else {
                Verdict::NotIdentifiable
            };
            Ok(IdentifiabilityReport {
                mode,
                rank_om,
                rank_cm,
                required_rank: n,
                sampling_ok,
                sampling,
                pulses_ok: Some(pulses_ok),
                verdict,
                status,
                clauses,
                notes,
            })
        }
    }
}
