// Copyright 2026 The oqs-ident Authors
// SPDX-License-Identifier: Apache-2.0

//! Pulse-driven simulation of coherence-vector dynamics on non-uniform
//! sampling schedules.
//!
//! Integration is fixed-step RK4. Every pulse edge and every sample time is
//! a segment boundary, so the control is constant on each segment and the
//! recorded stamps are hit exactly.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::gksl::{CoherenceSystem, EmbeddedSystem};
use crate::scalar::Real;

/// Rectangular pulse `u(t) = alpha` for `0 <= t < tau`, zero afterwards,
/// on control channel `channel`, repeated every `total_time`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pulse<T> {
    pub tau: T,
    pub alpha: T,
    pub channel: usize,
    pub total_time: T,
}

impl<T: Real> Pulse<T> {
    pub fn new(tau: T, alpha: T, channel: usize, total_time: T) -> Result<Self> {
        if !(tau >= T::zero()) || !tau.is_finite() {
            return Err(Error::Pulse(format!("width {} must be a finite nonnegative number", tau.as_f64())));
        }
        if !(total_time >= tau) {
            return Err(Error::Pulse(format!("width {} exceeds pulse period {}", tau.as_f64(), total_time.as_f64())));
        }
        Ok(Pulse { tau, alpha, channel, total_time })
    }

    /// Control value at time `t` measured from the pulse start.
    pub fn value(&self, t: T) -> T {
        if t >= T::zero() && t < self.tau {
            self.alpha
        } else {
            T::zero()
        }
    }

    /// A zero-width pulse is the constant-zero input.
    pub fn is_null(&self) -> bool {
        self.tau == T::zero() || self.alpha == T::zero()
    }
}

/// One pulse per distinct width, widths sorted ascending.
pub fn make_pulse_family<T: Real>(alpha: T, taus: &[T], channel: usize, total_time: T) -> Result<Vec<Pulse<T>>> {
    if alpha == T::zero() {
        log::warn!("pulse amplitude is zero: the family cannot identify a bilinear system");
    }
    let mut sorted: Vec<T> = taus.to_vec();
    if sorted.iter().any(|t| !t.is_finite()) {
        return Err(Error::Pulse("non-finite pulse width".into()));
    }
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite widths"));
    sorted.dedup();
    if sorted.first() == Some(&T::zero()) {
        log::info!("zero-width pulse in family: treated as the constant-zero input");
    }
    sorted.into_iter().map(|tau| Pulse::new(tau, alpha, channel, total_time)).collect()
}

/// Declared rationality of the increment ratios `tau_i / tau_j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RatioPolicy {
    /// Built so that every ratio is a nonzero power of the golden ratio.
    IrrationalByConstruction,
    /// The user asserts the ratios are irrational.
    DeclaredIrrational,
    /// Nothing declared; ratios are screened numerically.
    Undeclared,
}

impl RatioPolicy {
    pub fn as_str(&self) -> &'static str {
        match self {
            RatioPolicy::IrrationalByConstruction => "irrational-by-construction",
            RatioPolicy::DeclaredIrrational => "declared-irrational",
            RatioPolicy::Undeclared => "undeclared",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "irrational-by-construction" => Some(RatioPolicy::IrrationalByConstruction),
            "declared-irrational" => Some(RatioPolicy::DeclaredIrrational),
            "undeclared" => Some(RatioPolicy::Undeclared),
            _ => None,
        }
    }
}

/// Frame period `T` split at `0 = t_0 < t_1 < ... < t_{l+1} = T`, repeated
/// for `frame_count` frames.
#[derive(Clone, Debug, PartialEq)]
pub struct SamplingSchedule<T> {
    partition: Vec<T>,
    frame_count: usize,
    ratio_policy: RatioPolicy,
}

impl<T: Real> SamplingSchedule<T> {
    pub fn new(partition: Vec<T>, frame_count: usize, ratio_policy: RatioPolicy) -> Result<Self> {
        if partition.len() < 2 {
            return Err(Error::Schedule("partition needs at least t_0 and T".into()));
        }
        if partition[0] != T::zero() {
            return Err(Error::Schedule(format!("partition must start at 0, got {}", partition[0].as_f64())));
        }
        for w in partition.windows(2) {
            if !(w[1] > w[0]) || !w[1].is_finite() {
                return Err(Error::Schedule("partition must be finite and strictly increasing".into()));
            }
        }
        Ok(SamplingSchedule { partition, frame_count, ratio_policy })
    }

    pub fn from_increments(taus: &[T], frame_count: usize, ratio_policy: RatioPolicy) -> Result<Self> {
        let mut partition = vec![T::zero()];
        let mut acc = T::zero();
        for &t in taus {
            acc += t;
            partition.push(acc);
        }
        Self::new(partition, frame_count, ratio_policy)
    }

    /// `count` equal increments; the ratios are rational and undeclared.
    pub fn uniform(frame_period: T, count: usize, frame_count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::Schedule("need at least one increment".into()));
        }
        let step = frame_period / T::lit(count as f64);
        let mut partition: Vec<T> = (0..count).map(|i| step * T::lit(i as f64)).collect();
        partition.push(frame_period);
        Self::new(partition, frame_count, RatioPolicy::Undeclared)
    }

    pub fn frame_period(&self) -> T {
        *self.partition.last().expect("nonempty partition")
    }

    /// `t_0 .. t_{l+1}`.
    pub fn partition(&self) -> &[T] {
        &self.partition
    }

    /// `l`, the number of interior offsets.
    pub fn l(&self) -> usize {
        self.partition.len() - 2
    }

    /// `tau_1 .. tau_{l+1}`.
    pub fn increments(&self) -> Vec<T> {
        self.partition.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn frame_count(&self) -> usize {
        self.frame_count
    }

    pub fn with_frame_count(mut self, m: usize) -> Self {
        self.frame_count = m;
        self
    }

    pub fn ratio_policy(&self) -> RatioPolicy {
        self.ratio_policy
    }

    pub fn with_ratio_policy(mut self, p: RatioPolicy) -> Self {
        self.ratio_policy = p;
        self
    }

    /// Sampling instants: `k T + t_i` for `k < M`, `i = 0..=l`, then `M T`.
    /// Each entry is `(t, frame, offset index)`.
    pub fn stamps(&self) -> Vec<(T, usize, usize)> {
        let period = self.frame_period();
        let offsets = &self.partition[..self.partition.len() - 1];
        let mut out = Vec::with_capacity(self.frame_count * offsets.len() + 1);
        for k in 0..self.frame_count {
            let base = period * T::lit(k as f64);
            for (i, &t) in offsets.iter().enumerate() {
                out.push((base + t, k, i));
            }
        }
        out.push((period * T::lit(self.frame_count as f64), self.frame_count, 0));
        out
    }
}

/// Increments `tau_i` proportional to `phi^i`, `i = 0..=l`, scaled so they
/// sum to `frame_period`.
pub fn golden_schedule<T: Real>(frame_period: T, l: usize, frame_count: usize) -> Result<SamplingSchedule<T>> {
    if l < 1 {
        return Err(Error::Schedule("golden schedule needs l >= 1".into()));
    }
    let phi = (T::one() + T::lit(5.0).sqrt()) / T::lit(2.0);
    let raw: Vec<T> = (0..=l).map(|i| phi.powi(i as i32)).collect();
    let total = raw.iter().fold(T::zero(), |a, &b| a + b);
    let mut partition = vec![T::zero()];
    let mut acc = T::zero();
    for r in &raw[..l] {
        acc += *r * frame_period / total;
        partition.push(acc);
    }
    partition.push(frame_period);
    SamplingSchedule::new(partition, frame_count, RatioPolicy::IrrationalByConstruction)
}

/// Right-hand side of a controlled (bi)linear system.
pub trait Dynamics<T: Real>: Sync {
    fn dim(&self) -> usize;
    fn channels(&self) -> usize;
    fn output_matrix(&self) -> &DMatrix<T>;
    fn default_initial_state(&self) -> DVector<T>;
    /// `dx/dt` with the control `u` applied on `channel`.
    fn rhs(&self, x: &DVector<T>, control: Option<(usize, T)>) -> DVector<T>;
}

impl<T: Real> Dynamics<T> for CoherenceSystem<T> {
    fn dim(&self) -> usize {
        self.n()
    }

    fn channels(&self) -> usize {
        self.n_list.len()
    }

    fn output_matrix(&self) -> &DMatrix<T> {
        &self.c
    }

    fn default_initial_state(&self) -> DVector<T> {
        self.x0.clone()
    }

    fn rhs(&self, x: &DVector<T>, control: Option<(usize, T)>) -> DVector<T> {
        let mut d = &self.a_l * x + &self.a_d * x + &self.beta;
        if let Some((j, u)) = control {
            d += &self.n_list[j] * x * u;
        }
        d
    }
}

impl<T: Real> Dynamics<T> for EmbeddedSystem<T> {
    fn dim(&self) -> usize {
        self.n()
    }

    fn channels(&self) -> usize {
        self.n_emb.len()
    }

    fn output_matrix(&self) -> &DMatrix<T> {
        &self.c_emb
    }

    fn default_initial_state(&self) -> DVector<T> {
        self.x_emb.clone()
    }

    fn rhs(&self, x: &DVector<T>, control: Option<(usize, T)>) -> DVector<T> {
        let mut d = &self.a_emb * x;
        if let Some((j, u)) = control {
            d += &self.n_emb[j] * x * u;
        }
        d
    }
}

/// Plain linear system `dx/dt = A x` with output `y = C x`.
#[derive(Clone, Debug)]
pub struct LinearSystem<T: Real> {
    pub a: DMatrix<T>,
    pub c: DMatrix<T>,
    pub x0: DVector<T>,
}

impl<T: Real> Dynamics<T> for LinearSystem<T> {
    fn dim(&self) -> usize {
        self.a.nrows()
    }

    fn channels(&self) -> usize {
        0
    }

    fn output_matrix(&self) -> &DMatrix<T> {
        &self.c
    }

    fn default_initial_state(&self) -> DVector<T> {
        self.x0.clone()
    }

    fn rhs(&self, x: &DVector<T>, _control: Option<(usize, T)>) -> DVector<T> {
        &self.a * x
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sample<T: Real> {
    pub t: T,
    pub frame: usize,
    /// Index `i` of the offset `t_i` within the frame.
    pub offset: usize,
    pub run: usize,
    /// Pulse applied during this frame, if any.
    pub pulse_id: Option<usize>,
    pub y: DVector<T>,
    pub x: Option<DVector<T>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementRecord<T: Real> {
    pub samples: Vec<Sample<T>>,
    pub pulses: Vec<Pulse<T>>,
    pub noise_sigma: T,
    pub notes: Vec<String>,
}

impl<T: Real> MeasurementRecord<T> {
    pub fn runs(&self) -> usize {
        self.samples.iter().map(|s| s.run + 1).max().unwrap_or(0)
    }

    /// Merges records from independent runs, renumbering runs and pulses.
    pub fn merge(records: Vec<MeasurementRecord<T>>) -> Self {
        let mut out =
            MeasurementRecord { samples: Vec::new(), pulses: Vec::new(), noise_sigma: T::zero(), notes: Vec::new() };
        for rec in records {
            let run_base = out.runs();
            let pulse_base = out.pulses.len();
            out.noise_sigma = out.noise_sigma.max(rec.noise_sigma);
            out.samples.extend(rec.samples.into_iter().map(|mut s| {
                s.run += run_base;
                s.pulse_id = s.pulse_id.map(|p| p + pulse_base);
                s
            }));
            out.pulses.extend(rec.pulses);
            for n in rec.notes {
                if !out.notes.contains(&n) {
                    out.notes.push(n);
                }
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SimulationConfig<T> {
    /// Requested RK4 step; defaults to, and is capped at, `min(tau_i)/50`.
    pub step: Option<T>,
    pub noise_sigma: T,
    pub seed: u64,
    /// Keep full state snapshots alongside the outputs.
    pub record_state: bool,
}

impl<T: Real> Default for SimulationConfig<T> {
    fn default() -> Self {
        SimulationConfig { step: None, noise_sigma: T::zero(), seed: 0, record_state: true }
    }
}

fn rk4_step<T: Real, D: Dynamics<T> + ?Sized>(sys: &D, x: &DVector<T>, h: T, u: Option<(usize, T)>) -> DVector<T> {
    let half = T::lit(0.5);
    let k1 = sys.rhs(x, u);
    let k2 = sys.rhs(&(x + &k1 * (h * half)), u);
    let k3 = sys.rhs(&(x + &k2 * (h * half)), u);
    let k4 = sys.rhs(&(x + &k3 * h), u);
    x + (k1 + k2 * T::lit(2.0) + k3 * T::lit(2.0) + k4) * (h / T::lit(6.0))
}

fn resolve_step<T: Real>(schedule: &SamplingSchedule<T>, pulses: &[Pulse<T>], requested: Option<T>) -> Result<T> {
    let mut min_tau = schedule.increments().into_iter().fold(T::max_value().expect("bounded"), |a, b| a.min(b));
    for p in pulses {
        if p.tau > T::zero() && p.tau < schedule.frame_period() {
            min_tau = min_tau.min(p.tau).min(schedule.frame_period() - p.tau);
        }
    }
    let cap = min_tau / T::lit(50.0);
    match requested {
        None => Ok(cap),
        Some(h) if !(h > T::zero()) || !h.is_finite() => Err(Error::StepSize(h.as_f64())),
        Some(h) => Ok(h.min(cap)),
    }
}

/// Integrates one run and records `y = C x` (plus noise) at every stamp.
pub fn simulate<T: Real, D: Dynamics<T> + ?Sized>(
    sys: &D,
    pulses: &[Pulse<T>],
    schedule: &SamplingSchedule<T>,
    x0: Option<&DVector<T>>,
    config: &SimulationConfig<T>,
) -> Result<MeasurementRecord<T>> {
    simulate_run(sys, pulses, schedule, x0, config, 0)
}

fn simulate_run<T: Real, D: Dynamics<T> + ?Sized>(
    sys: &D,
    pulses: &[Pulse<T>],
    schedule: &SamplingSchedule<T>,
    x0: Option<&DVector<T>>,
    config: &SimulationConfig<T>,
    run: usize,
) -> Result<MeasurementRecord<T>> {
    let period = schedule.frame_period();
    let tol = T::lit(1e-12) * (T::one() + period);
    for (i, p) in pulses.iter().enumerate() {
        if (p.total_time - period).abs() > tol {
            return Err(Error::Schedule(format!(
                "pulse {i} period {} does not match frame period {}",
                p.total_time.as_f64(),
                period.as_f64()
            )));
        }
        if p.tau > period {
            return Err(Error::Schedule(format!("pulse {i} is wider than the frame")));
        }
        if p.channel >= sys.channels() && !p.is_null() {
            return Err(Error::Pulse(format!(
                "pulse {i} channel {} out of range ({} channels)",
                p.channel,
                sys.channels()
            )));
        }
    }
    let h_max = resolve_step(schedule, pulses, config.step)?;
    let mut x = match x0 {
        Some(v) if v.len() != sys.dim() => {
            return Err(Error::Dimension(format!("x0 has length {}, system dimension {}", v.len(), sys.dim())))
        }
        Some(v) => v.clone(),
        None => sys.default_initial_state(),
    };
    let c = sys.output_matrix();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(run as u64);
    let sigma = config.noise_sigma;

    let mut notes = Vec::new();
    if pulses.iter().any(|p| p.tau == T::zero()) {
        notes.push("zero-width pulse treated as the constant-zero input".to_string());
    }

    let offsets = &schedule.partition()[..=schedule.l()];
    let mut samples = Vec::with_capacity(schedule.frame_count() * offsets.len() + 1);
    let pulse_for = |frame: usize| if pulses.is_empty() { None } else { Some(frame % pulses.len()) };
    let mut record = |x: &DVector<T>, t: T, frame: usize, offset: usize, pulse_id: Option<usize>| {
        let mut y = c * x;
        if sigma > T::zero() {
            for v in y.iter_mut() {
                let z: f64 = StandardNormal.sample(&mut rng);
                *v += sigma * T::lit(z);
            }
        }
        samples.push(Sample { t, frame, offset, run, pulse_id, y, x: config.record_state.then(|| x.clone()) });
    };

    for frame in 0..schedule.frame_count() {
        let base = period * T::lit(frame as f64);
        let pid = pulse_for(frame);
        let active = pid.map(|i| pulses[i]).filter(|p| !p.is_null());
        // frame-relative breakpoints: sample offsets, the pulse edge, the frame end
        let mut marks: Vec<(T, Option<usize>)> = offsets.iter().enumerate().map(|(i, &t)| (t, Some(i))).collect();
        if let Some(p) = active {
            if p.tau < period {
                marks.push((p.tau, None));
            }
        }
        marks.push((period, None));
        marks.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite times").then(b.1.is_some().cmp(&a.1.is_some())));
        let mut rel = T::zero();
        for (mark, sample) in marks {
            let len = mark - rel;
            if len > T::zero() {
                let control = active.filter(|p| rel < p.tau).map(|p| (p.channel, p.alpha));
                let steps = (len / h_max).ceil().as_f64().max(1.0) as usize;
                let h = len / T::lit(steps as f64);
                for _ in 0..steps {
                    x = rk4_step(sys, &x, h, control);
                }
                rel = mark;
            }
            if let Some(i) = sample {
                record(&x, base + offsets[i], frame, i, pid);
            }
        }
    }
    let m = schedule.frame_count();
    record(&x, period * T::lit(m as f64), m, 0, None);
    Ok(MeasurementRecord { samples, pulses: pulses.to_vec(), noise_sigma: sigma, notes })
}

/// Input of one run in a batch.
#[derive(Clone, Debug)]
pub struct RunSpec<T: Real> {
    pub pulses: Vec<Pulse<T>>,
    pub x0: Option<DVector<T>>,
}

/// Simulates independent runs on up to `threads` worker threads. Runs are
/// numbered in input order and the result does not depend on `threads`.
pub fn simulate_batch<T: Real, D: Dynamics<T>>(
    sys: &D,
    runs: &[RunSpec<T>],
    schedule: &SamplingSchedule<T>,
    config: &SimulationConfig<T>,
    threads: usize,
) -> Result<MeasurementRecord<T>> {
    let threads = threads.max(1).min(runs.len().max(1));
    let mut results: Vec<Option<Result<MeasurementRecord<T>>>> = (0..runs.len()).map(|_| None).collect();
    std::thread::scope(|scope| {
        let chunk = runs.len().div_ceil(threads).max(1);
        for (ci, slot) in results.chunks_mut(chunk).enumerate() {
            scope.spawn(move || {
                for (k, out) in slot.iter_mut().enumerate() {
                    let r = ci * chunk + k;
                    let spec = &runs[r];
                    *out = Some(simulate_run(sys, &spec.pulses, schedule, spec.x0.as_ref(), config, r));
                }
            });
        }
    });
    let mut records = Vec::with_capacity(runs.len());
    for r in results {
        records.push(r.expect("every run simulated")?);
    }
    // runs already carry their own index; merge without renumbering
    let mut merged = MeasurementRecord {
        samples: Vec::new(),
        pulses: Vec::new(),
        noise_sigma: config.noise_sigma,
        notes: Vec::new(),
    };
    for rec in records {
        let base = merged.pulses.len();
        merged.samples.extend(rec.samples.into_iter().map(|mut s| {
            s.pulse_id = s.pulse_id.map(|p| p + base);
            s
        }));
        merged.pulses.extend(rec.pulses);
        for n in rec.notes {
            if !merged.notes.contains(&n) {
                merged.notes.push(n);
            }
        }
    }
    Ok(merged)
}
