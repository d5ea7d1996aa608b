// Copyright 2026 The oqs-ident Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use nalgebra::{Complex, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use oqs_ident::gksl::{assemble_system, rho_to_coherence, CoherenceSystem, GkslParams};
use oqs_ident::identify::{identifiability_report, IdentifiabilityReport, Mode, ReportInput};
use oqs_ident::ldsrec::{fit_multirate, reconstruct_continuous, single_rate_models, FitOptions, ReconstructOptions};
use oqs_ident::liealg::{generalized_pauli, structure_constants, LieBasis};
use oqs_ident::linalg::hermitian_min_eigenvalue;
use oqs_ident::paramrec::{reconstruct_general, reconstruct_symmetric, ReconstructionMatrices, RecoveredParams};
use oqs_ident::simulate::{
    golden_schedule, make_pulse_family, simulate_batch, MeasurementRecord, Pulse, RunSpec, SamplingSchedule,
    SimulationConfig,
};

use crate::artifact::{
    self, load, save, save_value, BasisFile, ComplexMatrix, ContSysFile, Kappas, MatrixFile, ModelFile, ParamsFile,
    ParamsHatFile, PulsesFile, RecordFile, ScheduleFile, SystemFile, VectorFile,
};
use crate::{
    BasisArgs, BuildArgs, CheckArgs, CheckMode, FitArgs, PulsesArgs, ReconstructLdsArgs, ReconstructParamsArgs,
    ScheduleArgs, ScheduleKind, SimulateArgs,
};

/// Worker threads: `OQS_IDENT_THREADS` caps the available parallelism.
pub fn threads() -> usize {
    let avail = std::thread::available_parallelism().map_or(1, |n| n.get());
    match std::env::var("OQS_IDENT_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        Some(cap) if cap > 0 => cap.min(avail),
        _ => avail,
    }
}

fn distinct(paths: &[&Path]) -> Result<()> {
    for (i, a) in paths.iter().enumerate() {
        for b in &paths[i + 1..] {
            if a == b {
                bail!("input and output paths must differ: {}", a.display());
            }
        }
    }
    Ok(())
}

pub fn basis(args: &BasisArgs) -> Result<u8> {
    let basis = generalized_pauli::<f64>(args.qubits)?;
    let tensors = structure_constants(&basis)?;
    let rep = tensors.sparsity_report();
    if !rep.holds() {
        log::warn!("structure constants are not one-nonzero-per-pair: {rep:?}");
    }
    save(&args.out, &BasisFile::new(&basis, &tensors))?;
    println!("wrote {} generators for {} qubit(s) to {}", basis.n(), args.qubits, args.out.display());
    Ok(0)
}

type Observables = Vec<DMatrix<Complex<f64>>>;

pub fn load_params(path: &Path) -> Result<(GkslParams<f64>, Observables)> {
    let file: ParamsFile = load(path)?;
    let gamma = file.gamma_matrix()?;
    let params = GkslParams::new(DVector::from_vec(file.theta.clone()), gamma, file.symmetric)
        .with_context(|| format!("validating {}", path.display()))?;
    let observables = file
        .observables
        .as_ref()
        .map(|obs| obs.iter().map(ComplexMatrix::to_matrix).collect::<Result<Vec<_>>>())
        .transpose()?
        .unwrap_or_default();
    Ok((params, observables))
}

pub fn build(args: &BuildArgs) -> Result<u8> {
    let mut paths = vec![args.basis.as_path(), args.params.as_path(), args.out.as_path()];
    paths.extend(args.a_out.as_deref());
    paths.extend(args.beta_out.as_deref());
    distinct(&paths)?;
    let bf: BasisFile = load(&args.basis)?;
    let basis = bf.basis()?;
    let tensors = bf.tensors()?;
    let (params, observables) = load_params(&args.params)?;
    params.check_physical();
    let sys = assemble_system(&basis, &tensors, &params, &observables)?;
    save(&args.out, &SystemFile::new(bf.qubits, &sys))?;
    if let Some(p) = &args.a_out {
        save(p, &MatrixFile::new(&sys.a()))?;
    }
    if let Some(p) = &args.beta_out {
        save(p, &VectorFile::new(&sys.beta))?;
    }
    println!("wrote system (n = {}, {} outputs) to {}", sys.n(), sys.c.nrows(), args.out.display());
    Ok(0)
}

pub fn schedule(args: &ScheduleArgs) -> Result<u8> {
    let s = match args.kind {
        ScheduleKind::Golden => golden_schedule(args.period, args.offsets, args.frames)?,
        ScheduleKind::Uniform => SamplingSchedule::uniform(args.period, args.offsets, args.frames)?,
    };
    save(&args.out, &ScheduleFile::new(&s))?;
    println!("wrote schedule with increments {:?} to {}", s.increments(), args.out.display());
    Ok(0)
}

pub fn pulses(args: &PulsesArgs) -> Result<u8> {
    if args.channel == 0 {
        bail!("--channel is 1-based");
    }
    let family = make_pulse_family(args.alpha, &args.widths, args.channel - 1, args.period)?;
    save(&args.out, &PulsesFile::new(&family))?;
    println!("wrote {} pulses to {}", family.len(), args.out.display());
    Ok(0)
}

pub fn random_density(dim: usize, rng: &mut ChaCha8Rng) -> DMatrix<Complex<f64>> {
    let g = DMatrix::from_fn(dim, dim, |_, _| Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let r = &g * g.adjoint();
    let tr = r.trace();
    r / tr
}

/// Run 0 from `sys.x0`, later runs from seeded random states.
pub fn initial_states(
    basis: &LieBasis<f64>,
    sys: &CoherenceSystem<f64>,
    runs: usize,
    seed: u64,
) -> Result<Vec<DVector<f64>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0f5a_u64);
    let mut out = vec![sys.x0.clone()];
    for _ in 1..runs {
        out.push(rho_to_coherence(&random_density(basis.hilbert_dim(), &mut rng), basis)?);
    }
    Ok(out)
}

pub fn run_simulation(
    basis: &LieBasis<f64>,
    sys: &CoherenceSystem<f64>,
    sched: &SamplingSchedule<f64>,
    pulses: &[Pulse<f64>],
    runs: usize,
    cfg: &SimulationConfig<f64>,
) -> Result<MeasurementRecord<f64>> {
    if runs == 0 {
        bail!("--runs must be at least 1");
    }
    let specs: Vec<RunSpec<f64>> = initial_states(basis, sys, runs, cfg.seed)?
        .into_iter()
        .map(|x0| RunSpec { pulses: pulses.to_vec(), x0: Some(x0) })
        .collect();
    Ok(simulate_batch(sys, &specs, sched, cfg, threads())?)
}

pub fn simulate(args: &SimulateArgs) -> Result<u8> {
    let mut paths = vec![args.system.as_path(), args.schedule.as_path(), args.out.as_path()];
    paths.extend(args.pulses.as_deref());
    distinct(&paths)?;
    let sf: SystemFile = load(&args.system)?;
    let sys = sf.system()?;
    let basis = generalized_pauli::<f64>(sf.qubits)?;
    if basis.n() != sys.n() {
        bail!("system n = {} does not match {} qubit(s)", sys.n(), sf.qubits);
    }
    let mut sched = load::<ScheduleFile>(&args.schedule)?.schedule()?;
    if let Some(m) = args.frames {
        sched = SamplingSchedule::new(sched.partition().to_vec(), m, sched.ratio_policy())?;
    }
    let pulses = match &args.pulses {
        Some(p) => load::<PulsesFile>(p)?.pulses()?,
        None => Vec::new(),
    };
    if !(args.noise_sigma >= 0.0) {
        bail!("--noise-sigma must be nonnegative");
    }
    let cfg = SimulationConfig {
        step: args.step,
        noise_sigma: args.noise_sigma,
        seed: args.seed,
        record_state: !args.no_state,
    };
    let rec = run_simulation(&basis, &sys, &sched, &pulses, args.runs, &cfg)?;
    save(&args.out, &RecordFile::new(&rec))?;
    println!("wrote {} samples from {} run(s) to {}", rec.samples.len(), args.runs, args.out.display());
    Ok(0)
}

pub fn report_json(rep: &IdentifiabilityReport) -> serde_json::Value {
    let sampling = rep.sampling.as_ref().map(|s| {
        json!({
            "sampling_ok": s.sampling_ok,
            "pairs": s.pairs.iter().map(|p| json!({
                "i": p.i + 1,
                "j": p.j + 1,
                "ratio": p.ratio,
                "verdict": p.verdict.describe(),
                "passes": p.verdict.passes(),
            })).collect::<Vec<_>>(),
        })
    });
    json!({
        "schema": artifact::schema_id("report"),
        "mode": rep.mode.as_str(),
        "status": rep.status.as_str(),
        "verdict": rep.verdict,
        "rank_om": rep.rank_om,
        "rank_cm": rep.rank_cm,
        "required_rank": rep.required_rank,
        "sampling_ok": rep.sampling_ok,
        "sampling": sampling,
        "pulses_ok": rep.pulses_ok,
        "clauses": rep.clauses,
        "notes": rep.notes,
    })
}

pub fn check(args: &CheckArgs) -> Result<u8> {
    let mut paths = vec![args.system.as_path(), args.report.as_path()];
    paths.extend(args.schedule.as_deref());
    paths.extend(args.pulses.as_deref());
    distinct(&paths)?;
    let sys = load::<SystemFile>(&args.system)?.system()?;
    let sched = args.schedule.as_ref().map(|p| load::<ScheduleFile>(p)?.schedule()).transpose()?;
    let pulses = match &args.pulses {
        Some(p) => load::<PulsesFile>(p)?.pulses()?,
        None => Vec::new(),
    };
    let mode = match args.mode {
        CheckMode::Auto => Mode::Autonomous,
        CheckMode::Controlled => Mode::Controlled,
    };
    let input =
        ReportInput { system: &sys, schedule: sched.as_ref(), pulses: &pulses, b: None, word_cap: args.word_cap };
    let rep = identifiability_report(mode, &input)?;
    save_value(&args.report, &report_json(&rep))?;
    println!("{}: rank OM {} / CM {} (need {})", rep.status.as_str(), rep.rank_om, rep.rank_cm, rep.required_rank);
    for c in &rep.clauses {
        println!("  fails: {c}");
    }
    Ok(rep.status.exit_code() as u8)
}

pub fn fit_discrete(args: &FitArgs) -> Result<u8> {
    let mut paths = vec![args.record.as_path(), args.schedule.as_path(), args.out.as_path()];
    paths.extend(args.system.as_deref());
    distinct(&paths)?;
    let mut rec = load::<RecordFile>(&args.record)?.record()?;
    let sched = load::<ScheduleFile>(&args.schedule)?.schedule()?;
    let c = match &args.system {
        Some(p) => {
            // outputs only: drop any snapshots so the fit goes through C
            for s in &mut rec.samples {
                s.x = None;
            }
            Some(load::<SystemFile>(p)?.system()?.c)
        }
        None => None,
    };
    if let Some(r) = args.rank_rel {
        if !(r > 0.0) {
            bail!("--rank-rel must be positive");
        }
    }
    let opts = FitOptions { c, affine: args.affine, rank_rel: args.rank_rel };
    let model = fit_multirate(&rec, &sched, args.order, &opts)?;
    save(&args.out, &ModelFile::new(&model))?;
    println!("wrote lifted model (order {}, {} increments) to {}", args.order, model.f.len(), args.out.display());
    Ok(0)
}

pub fn reconstruct_lds(args: &ReconstructLdsArgs) -> Result<u8> {
    distinct(&[args.model.as_path(), args.schedule.as_path(), args.out.as_path()])?;
    let model = load::<ModelFile>(&args.model)?.model()?;
    let sched = load::<ScheduleFile>(&args.schedule)?.schedule()?;
    if !(args.match_tol > 0.0) {
        bail!("--match-tol must be positive");
    }
    let fam = single_rate_models(&model)?;
    let opts = ReconstructOptions { match_tol: args.match_tol, max_frequency: args.max_frequency };
    let cont = reconstruct_continuous(&fam, &sched, &opts)?;
    save(&args.out, &ContSysFile::new(&cont))?;
    println!("wrote continuous system (n = {}) to {}", cont.a.nrows(), args.out.display());
    Ok(0)
}

fn load_a(path: &Path) -> Result<DMatrix<f64>> {
    let (tag, text) = artifact::peek_schema(path)?;
    let ctx = || format!("parsing {}", path.display());
    if tag == artifact::schema_id("matrix") {
        artifact::parse::<MatrixFile>(&text).with_context(ctx)?.matrix.to_matrix()
    } else if tag == artifact::schema_id("contsys") {
        artifact::parse::<ContSysFile>(&text).with_context(ctx)?.a.to_matrix()
    } else if tag == artifact::schema_id("system") {
        Ok(artifact::parse::<SystemFile>(&text).with_context(ctx)?.system()?.a())
    } else {
        bail!("{}: expected a matrix, contsys or system file, found schema \"{tag}\"", path.display())
    }
}

fn load_beta(path: &Path) -> Result<DVector<f64>> {
    let (tag, text) = artifact::peek_schema(path)?;
    let ctx = || format!("parsing {}", path.display());
    if tag == artifact::schema_id("vector") {
        Ok(DVector::from_vec(artifact::parse::<VectorFile>(&text).with_context(ctx)?.data))
    } else if tag == artifact::schema_id("contsys") {
        let b = artifact::parse::<ContSysFile>(&text).with_context(ctx)?.b.to_matrix()?;
        if b.ncols() != 1 {
            bail!("{}: B has {} columns; beta needs a single constant input", path.display(), b.ncols());
        }
        Ok(b.column(0).into_owned())
    } else if tag == artifact::schema_id("system") {
        Ok(artifact::parse::<SystemFile>(&text).with_context(ctx)?.system()?.beta)
    } else {
        bail!("{}: expected a vector, contsys or system file, found schema \"{tag}\"", path.display())
    }
}

pub fn params_hat(rec: &RecoveredParams<f64>, mats: &ReconstructionMatrices<f64>) -> ParamsHatFile {
    ParamsHatFile {
        schema: artifact::schema_id("params-hat"),
        status: rec.status.as_str().to_string(),
        symmetric: rec.symmetric,
        theta: rec.theta.as_ref().map(|t| t.as_slice().to_vec()),
        gamma: rec.gamma.as_ref().map(|g| ComplexMatrix::from_matrix(g).data),
        residual_a: rec.residual_a,
        residual_beta: rec.residual_beta,
        hermitian_projection: rec.hermitian_projection,
        kappa: Kappas { t1: mats.kappa_t1, t3: mats.kappa_t3, m: mats.kappa_m, used: rec.kappa },
        gamma_min_eigenvalue: rec.gamma.as_ref().map(hermitian_min_eigenvalue),
    }
}

pub fn reconstruct_params(args: &ReconstructParamsArgs) -> Result<u8> {
    // A and beta may come from the same system or contsys file
    distinct(&[args.a.as_path(), args.basis.as_path(), args.out.as_path()])?;
    if let Some(b) = &args.beta {
        distinct(&[b.as_path(), args.basis.as_path(), args.out.as_path()])?;
    }
    let bf: BasisFile = load(&args.basis)?;
    let tensors = bf.tensors()?;
    let a = load_a(&args.a)?;
    let beta = args.beta.as_ref().map(|p| load_beta(p)).transpose()?;
    let mats = ReconstructionMatrices::build(&tensors, bf.hilbert_dim, args.symmetric)?;
    let rec = if args.symmetric {
        reconstruct_symmetric(&a, beta.as_ref(), &mats)?
    } else {
        let beta = beta.as_ref().ok_or_else(|| anyhow!("--beta is required unless --symmetric is given"))?;
        reconstruct_general(&a, beta, &mats)?
    };
    if args.symmetric && beta.is_some() && rec.residual_beta > 1e-8 * (1.0 + beta.as_ref().map_or(0.0, |b| b.norm())) {
        println!("warning: beta is inconsistent with a real symmetric gamma (residual {:.2e})", rec.residual_beta);
    }
    let out = params_hat(&rec, &mats);
    save(&args.out, &out)?;
    println!(
        "{}: residual A {:.2e}, residual beta {:.2e}, kappa {:.3e}",
        rec.status.as_str(),
        rec.residual_a,
        rec.residual_beta,
        rec.kappa
    );
    Ok(0)
}
