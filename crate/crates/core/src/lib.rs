// Copyright 2026 The oqs-ident Authors
// SPDX-License-Identifier: Apache-2.0

//! Identification of open quantum systems from sampled data.
//!
//! The crate turns a GKSL master equation into its coherence-vector
//! (bi)linear dynamical system, decides whether that system can be
//! identified from sampled outputs, reconstructs continuous-time system
//! matrices from multirate samples, and recovers the Hamiltonian and
//! Kossakowski parameters from an identified system matrix.
//!
//! Every numerical type is generic over [`Real`] (`f32` or `f64`); the
//! `*F64` aliases below are the double-precision instantiations used by the
//! command-line front end.

// `!(a > b)` comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod gksl;
pub mod identify;
pub mod ldsrec;
pub mod liealg;
pub mod linalg;
pub mod paramrec;
pub mod scalar;
pub mod simulate;

pub use error::{Error, Result};
pub use scalar::Real;

pub type LieBasisF64 = liealg::LieBasis<f64>;
pub type StructureTensorsF64 = liealg::StructureTensors<f64>;
pub type GkslParamsF64 = gksl::GkslParams<f64>;
pub type CoherenceSystemF64 = gksl::CoherenceSystem<f64>;
pub type EmbeddedSystemF64 = gksl::EmbeddedSystem<f64>;
pub type SamplingScheduleF64 = simulate::SamplingSchedule<f64>;
pub type MeasurementRecordF64 = simulate::MeasurementRecord<f64>;
pub type PulseF64 = simulate::Pulse<f64>;
pub type DiscreteMultirateModelF64 = ldsrec::DiscreteMultirateModel<f64>;
pub type SingleRateFamilyF64 = ldsrec::SingleRateFamily<f64>;
pub type ReconstructionMatricesF64 = paramrec::ReconstructionMatrices<f64>;
pub type RecoveredParamsF64 = paramrec::RecoveredParams<f64>;
