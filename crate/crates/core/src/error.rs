// Copyright 2026 The oqs-ident Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("num_qubits must be in 1..=4, got {0}")]
    QubitRange(usize),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("{what}: imaginary residue {residue:e} exceeds tolerance")]
    ImaginaryResidue { what: String, residue: f64 },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid schedule: {0}")]
    Schedule(String),

    #[error("invalid pulse: {0}")]
    Pulse(String),

    #[error("invalid step size {0}")]
    StepSize(f64),

    #[error("insufficient frames: {0}")]
    InsufficientFrames(String),

    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),

    #[error("rank-deficient {block}: rank {rank} < {required}")]
    RankDeficient { block: String, rank: usize, required: usize },

    #[error("sampling insufficient / branch ambiguity unresolved: {0}")]
    BranchIntersection(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("size limit: {0}")]
    SizeLimit(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
