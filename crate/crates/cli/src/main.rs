// Copyright 2026 The oqs-ident Authors
// SPDX-License-Identifier: Apache-2.0

//! `oqs-ident`: build GKSL coherence-vector systems, simulate multirate
//! measurements, check identifiability and recover parameters.
//!
//! Exit codes: 0 success (or identifiable), 1 I/O or validation failure,
//! 2 not identifiable, 3 inconclusive.

// `!(a > b)` comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod artifact;
mod commands;
mod demo;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "oqs-ident", version, about = "Identifiability and parameter recovery for open quantum systems")]
struct Cli {
    /// More log output (repeatable); RUST_LOG overrides.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generalized Pauli basis and its structure constants.
    Basis(BasisArgs),
    /// Coherence-vector system from GKSL parameters.
    Build(BuildArgs),
    /// Sampling schedule file (golden-ratio or uniform).
    Schedule(ScheduleArgs),
    /// Rectangular pulse family file.
    Pulses(PulsesArgs),
    /// Multirate measurement record.
    Simulate(SimulateArgs),
    /// Identifiability report; the exit code carries the verdict.
    Check(CheckArgs),
    /// Lifted discrete model fitted to a record.
    FitDiscrete(FitArgs),
    /// Continuous (A, B) from a lifted discrete model.
    ReconstructLds(ReconstructLdsArgs),
    /// Hamiltonian and Kossakowski parameters from (A, beta).
    ReconstructParams(ReconstructParamsArgs),
    /// Packaged end-to-end runs.
    Demo(DemoArgs),
}

#[derive(Args, Debug)]
pub struct BasisArgs {
    #[arg(long)]
    pub qubits: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct BuildArgs {
    #[arg(long)]
    pub basis: PathBuf,
    #[arg(long)]
    pub params: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write A = A_l + A_d as a matrix file.
    #[arg(long)]
    pub a_out: Option<PathBuf>,
    /// Also write beta as a vector file.
    #[arg(long)]
    pub beta_out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ScheduleKind {
    Golden,
    Uniform,
}

#[derive(Args, Debug)]
pub struct ScheduleArgs {
    #[arg(long, value_enum, default_value = "golden")]
    pub kind: ScheduleKind,
    /// Frame period T.
    #[arg(long)]
    pub period: f64,
    /// Number of interior sampling offsets l.
    #[arg(long, default_value_t = 2)]
    pub offsets: usize,
    #[arg(long)]
    pub frames: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct PulsesArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: f64,
    /// Comma-separated widths.
    #[arg(long, value_delimiter = ',', required = true)]
    pub widths: Vec<f64>,
    /// 1-based generator index.
    #[arg(long)]
    pub channel: usize,
    /// Pulse repetition period; must equal the frame period.
    #[arg(long)]
    pub period: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(long)]
    pub system: PathBuf,
    #[arg(long)]
    pub schedule: PathBuf,
    #[arg(long)]
    pub pulses: Option<PathBuf>,
    /// Overrides the schedule's frame count.
    #[arg(long)]
    pub frames: Option<usize>,
    #[arg(long, default_value_t = 0.0)]
    pub noise_sigma: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// RK4 step (capped at the smallest interval / 50).
    #[arg(long)]
    pub step: Option<f64>,
    /// Independent runs; run 0 starts from the system's x0, later runs from
    /// seeded random density matrices.
    #[arg(long, default_value_t = 1)]
    pub runs: usize,
    /// Omit state snapshots from the record.
    #[arg(long)]
    pub no_state: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum CheckMode {
    Auto,
    Controlled,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    #[arg(long, value_enum, default_value = "auto")]
    pub mode: CheckMode,
    #[arg(long)]
    pub system: PathBuf,
    #[arg(long)]
    pub schedule: Option<PathBuf>,
    #[arg(long)]
    pub pulses: Option<PathBuf>,
    /// Word cap of the bilinear span search.
    #[arg(long)]
    pub word_cap: Option<usize>,
    #[arg(long)]
    pub report: PathBuf,
}

#[derive(Args, Debug)]
pub struct FitArgs {
    #[arg(long)]
    pub record: PathBuf,
    #[arg(long)]
    pub schedule: PathBuf,
    #[arg(long)]
    pub order: usize,
    /// Fit a constant unit input (non-unital coherence dynamics).
    #[arg(long)]
    pub affine: bool,
    /// Take C from this system file and fit from outputs.
    #[arg(long)]
    pub system: Option<PathBuf>,
    /// Relative SVD cutoff for rank decisions.
    #[arg(long)]
    pub rank_rel: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ReconstructLdsArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub schedule: PathBuf,
    /// Largest angular frequency searched when resolving log branches.
    #[arg(long)]
    pub max_frequency: Option<f64>,
    #[arg(long, default_value_t = 1e-6)]
    pub match_tol: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ReconstructParamsArgs {
    /// Matrix, contsys or system file.
    #[arg(long = "A")]
    pub a: PathBuf,
    /// Vector, contsys (single-column B) or system file.
    #[arg(long)]
    pub beta: Option<PathBuf>,
    #[arg(long)]
    pub basis: PathBuf,
    /// Real symmetric Kossakowski matrix.
    #[arg(long)]
    pub symmetric: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Subcommand, Debug)]
pub enum DemoKind {
    /// Two coupled qubits with dephasing and amplitude damping.
    TwoQubit(TwoQubitArgs),
}

#[derive(Args, Debug)]
pub struct DemoArgs {
    #[command(subcommand)]
    pub kind: DemoKind,
}

#[derive(Args, Debug)]
pub struct TwoQubitArgs {
    #[arg(long, default_value_t = 1.0)]
    pub period: f64,
    #[arg(long, default_value_t = 4)]
    pub frames: usize,
    #[arg(long, default_value_t = 8)]
    pub runs: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-3)]
    pub step: f64,
    /// Write the intermediate artifacts here.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Machine-readable summary.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let result = match cli.command {
        Command::Basis(a) => commands::basis(&a),
        Command::Build(a) => commands::build(&a),
        Command::Schedule(a) => commands::schedule(&a),
        Command::Pulses(a) => commands::pulses(&a),
        Command::Simulate(a) => commands::simulate(&a),
        Command::Check(a) => commands::check(&a),
        Command::FitDiscrete(a) => commands::fit_discrete(&a),
        Command::ReconstructLds(a) => commands::reconstruct_lds(&a),
        Command::ReconstructParams(a) => commands::reconstruct_params(&a),
        Command::Demo(DemoArgs { kind: DemoKind::TwoQubit(a) }) => demo::two_qubit(&a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
