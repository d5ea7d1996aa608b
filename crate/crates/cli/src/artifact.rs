// Copyright 2026 The oqs-ident Authors
// SPDX-License-Identifier: Apache-2.0

//! JSON artifacts. Every file carries `"schema": "oqs-ident/<kind>/v1"`.
//! Matrices are row-major, complex numbers are `[re, im]` pairs, and
//! generator indices are 1-based. Frame, run and pulse indices are 0-based.

use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use nalgebra::{Complex, DMatrix, DVector};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use oqs_ident::gksl::CoherenceSystem;
use oqs_ident::ldsrec::{ContinuousSystem, DiscreteMultirateModel};
use oqs_ident::liealg::{LieBasis, StructureTensors};
use oqs_ident::simulate::{MeasurementRecord, Pulse, RatioPolicy, Sample, SamplingSchedule};

pub const SCHEMA_VERSION: &str = "v1";

pub fn schema_id(kind: &str) -> String {
    format!("oqs-ident/{kind}/{SCHEMA_VERSION}")
}

pub trait Artifact: Serialize + DeserializeOwned {
    const KIND: &'static str;
}

/// Reads an artifact, checking the schema tag before decoding the body.
pub fn load<A: Artifact>(path: &Path) -> Result<A> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn parse<A: Artifact>(text: &str) -> Result<A> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    check_schema(&value, A::KIND)?;
    Ok(serde_json::from_value(value)?)
}

pub fn check_schema(value: &serde_json::Value, kind: &str) -> Result<()> {
    let want = schema_id(kind);
    match value.get("schema") {
        None => bail!("missing \"schema\" field (expected \"{want}\")"),
        Some(serde_json::Value::String(s)) if *s == want => Ok(()),
        Some(serde_json::Value::String(s)) => bail!("schema mismatch: expected \"{want}\", found \"{s}\""),
        Some(other) => bail!("\"schema\" must be a string, found {other}"),
    }
}

/// Schema tag of a file, for inputs that accept several kinds.
pub fn peek_schema(path: &Path) -> Result<(String, String)> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let tag = value
        .get("schema")
        .and_then(|s| s.as_str())
        .ok_or_else(|| anyhow!("{}: missing \"schema\" field", path.display()))?
        .to_string();
    Ok((tag, text))
}

pub fn save<A: Artifact>(path: &Path, artifact: &A) -> Result<()> {
    let text = serde_json::to_string_pretty(artifact)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

pub fn save_value(path: &Path, value: &serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl RealMatrix {
    pub fn from_matrix(m: &DMatrix<f64>) -> Self {
        RealMatrix { rows: m.nrows(), cols: m.ncols(), data: m.transpose().as_slice().to_vec() }
    }

    pub fn to_matrix(&self) -> Result<DMatrix<f64>> {
        if self.data.len() != self.rows * self.cols {
            bail!("matrix data has {} entries, expected {}x{}", self.data.len(), self.rows, self.cols);
        }
        Ok(DMatrix::from_row_slice(self.rows, self.cols, &self.data))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
}

impl ComplexMatrix {
    pub fn from_matrix(m: &DMatrix<Complex<f64>>) -> Self {
        let mut data = Vec::with_capacity(m.len());
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                data.push([m[(r, c)].re, m[(r, c)].im]);
            }
        }
        ComplexMatrix { rows: m.nrows(), cols: m.ncols(), data }
    }

    pub fn to_matrix(&self) -> Result<DMatrix<Complex<f64>>> {
        if self.data.len() != self.rows * self.cols {
            bail!("matrix data has {} entries, expected {}x{}", self.data.len(), self.rows, self.cols);
        }
        Ok(DMatrix::from_row_iterator(self.rows, self.cols, self.data.iter().map(|z| Complex::new(z[0], z[1]))))
    }
}

/// Sparse real matrix with 1-based `(row, col, value)` entries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseMatrix {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

impl SparseMatrix {
    pub fn from_matrix(m: &DMatrix<f64>) -> Self {
        let mut entries = Vec::new();
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                if m[(r, c)] != 0.0 {
                    entries.push((r + 1, c + 1, m[(r, c)]));
                }
            }
        }
        SparseMatrix { rows: m.nrows(), cols: m.ncols(), entries }
    }

    pub fn to_matrix(&self) -> Result<DMatrix<f64>> {
        let mut m = DMatrix::zeros(self.rows, self.cols);
        for &(r, c, v) in &self.entries {
            if r == 0 || c == 0 || r > self.rows || c > self.cols {
                bail!("sparse entry ({r}, {c}) outside a 1-based {}x{} matrix", self.rows, self.cols);
            }
            m[(r - 1, c - 1)] = v;
        }
        Ok(m)
    }
}

fn to_one_based(e: (usize, usize, usize, f64)) -> (usize, usize, usize, f64) {
    (e.0 + 1, e.1 + 1, e.2 + 1, e.3)
}

fn to_zero_based(list: &[(usize, usize, usize, f64)]) -> Result<Vec<(usize, usize, usize, f64)>> {
    list.iter()
        .map(|&(j, k, l, v)| {
            if j == 0 || k == 0 || l == 0 {
                bail!("tensor indices are 1-based, found ({j}, {k}, {l})");
            }
            Ok((j - 1, k - 1, l - 1, v))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisFile {
    pub schema: String,
    pub qubits: usize,
    pub n: usize,
    pub hilbert_dim: usize,
    pub words: Vec<String>,
    pub generators: Vec<ComplexMatrix>,
    /// `(j, k, l, f_jkl)`, 1-based.
    pub f: Vec<(usize, usize, usize, f64)>,
    pub g: Vec<(usize, usize, usize, f64)>,
}

impl Artifact for BasisFile {
    const KIND: &'static str = "basis";
}

impl BasisFile {
    pub fn new(basis: &LieBasis<f64>, tensors: &StructureTensors<f64>) -> Self {
        BasisFile {
            schema: schema_id(Self::KIND),
            qubits: basis.num_qubits(),
            n: basis.n(),
            hilbert_dim: basis.hilbert_dim(),
            words: (0..basis.n()).map(|j| basis.word(j)).collect(),
            generators: basis.generators().iter().map(ComplexMatrix::from_matrix).collect(),
            f: tensors.f_entries().map(to_one_based).collect(),
            g: tensors.g_entries().map(to_one_based).collect(),
        }
    }

    pub fn tensors(&self) -> Result<StructureTensors<f64>> {
        Ok(StructureTensors::from_entries(self.n, to_zero_based(&self.f)?, to_zero_based(&self.g)?)?)
    }

    /// Regenerates the basis and checks the stored generators against it.
    pub fn basis(&self) -> Result<LieBasis<f64>> {
        let basis = oqs_ident::liealg::generalized_pauli::<f64>(self.qubits)?;
        if self.generators.len() != basis.n() {
            bail!("basis file lists {} generators, {} qubits need {}", self.generators.len(), self.qubits, basis.n());
        }
        for (j, (stored, fresh)) in self.generators.iter().zip(basis.generators()).enumerate() {
            let diff = (stored.to_matrix()? - fresh).map(|z| z.norm()).max();
            if diff > 1e-12 {
                bail!("generator {} differs from the generalized Pauli basis by {diff:e}", j + 1);
            }
        }
        Ok(basis)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamsFile {
    pub schema: String,
    pub theta: Vec<f64>,
    /// Row-major `n x n`.
    pub gamma: Vec<[f64; 2]>,
    pub symmetric: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observables: Option<Vec<ComplexMatrix>>,
}

impl Artifact for ParamsFile {
    const KIND: &'static str = "params";
}

impl ParamsFile {
    pub fn new(theta: &DVector<f64>, gamma: &DMatrix<Complex<f64>>, symmetric: bool) -> Self {
        ParamsFile {
            schema: schema_id(Self::KIND),
            theta: theta.as_slice().to_vec(),
            gamma: ComplexMatrix::from_matrix(gamma).data,
            symmetric,
            observables: None,
        }
    }

    pub fn gamma_matrix(&self) -> Result<DMatrix<Complex<f64>>> {
        let n = self.theta.len();
        ComplexMatrix { rows: n, cols: n, data: self.gamma.clone() }
            .to_matrix()
            .context("gamma must hold n*n entries for n = len(theta)")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemFile {
    pub schema: String,
    pub qubits: usize,
    pub n: usize,
    pub a_l: RealMatrix,
    pub a_d: RealMatrix,
    pub beta: Vec<f64>,
    /// `N_1 .. N_n`.
    pub n_list: Vec<SparseMatrix>,
    pub c: RealMatrix,
    pub x0: Vec<f64>,
}

impl Artifact for SystemFile {
    const KIND: &'static str = "system";
}

impl SystemFile {
    pub fn new(qubits: usize, sys: &CoherenceSystem<f64>) -> Self {
        SystemFile {
            schema: schema_id(Self::KIND),
            qubits,
            n: sys.n(),
            a_l: RealMatrix::from_matrix(&sys.a_l),
            a_d: RealMatrix::from_matrix(&sys.a_d),
            beta: sys.beta.as_slice().to_vec(),
            n_list: sys.n_list.iter().map(SparseMatrix::from_matrix).collect(),
            c: RealMatrix::from_matrix(&sys.c),
            x0: sys.x0.as_slice().to_vec(),
        }
    }

    pub fn system(&self) -> Result<CoherenceSystem<f64>> {
        let n = self.n;
        let sys = CoherenceSystem {
            a_l: self.a_l.to_matrix()?,
            a_d: self.a_d.to_matrix()?,
            beta: DVector::from_vec(self.beta.clone()),
            n_list: self.n_list.iter().map(SparseMatrix::to_matrix).collect::<Result<_>>()?,
            c: self.c.to_matrix()?,
            x0: DVector::from_vec(self.x0.clone()),
        };
        let square = |m: &DMatrix<f64>| m.nrows() == n && m.ncols() == n;
        if !square(&sys.a_l) || !square(&sys.a_d) || sys.beta.len() != n || sys.x0.len() != n || sys.c.ncols() != n {
            bail!("system blocks do not match n = {n}");
        }
        if sys.n_list.iter().any(|m| !square(m)) {
            bail!("coupling matrices must be {n}x{n}");
        }
        Ok(sys)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleFile {
    pub schema: String,
    /// `0 = t_0 < ... < t_{l+1} = T`.
    pub partition: Vec<f64>,
    pub frame_count: usize,
    /// `irrational-by-construction`, `declared-irrational` or `undeclared`.
    pub ratio_policy: String,
}

impl Artifact for ScheduleFile {
    const KIND: &'static str = "schedule";
}

impl ScheduleFile {
    pub fn new(s: &SamplingSchedule<f64>) -> Self {
        ScheduleFile {
            schema: schema_id(Self::KIND),
            partition: s.partition().to_vec(),
            frame_count: s.frame_count(),
            ratio_policy: s.ratio_policy().as_str().to_string(),
        }
    }

    pub fn schedule(&self) -> Result<SamplingSchedule<f64>> {
        let policy = RatioPolicy::parse(&self.ratio_policy)
            .ok_or_else(|| anyhow!("unknown ratio_policy \"{}\"", self.ratio_policy))?;
        Ok(SamplingSchedule::new(self.partition.clone(), self.frame_count, policy)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseEntry {
    pub tau: f64,
    pub alpha: f64,
    /// 1-based generator index.
    pub channel: usize,
    pub total_time: f64,
}

impl PulseEntry {
    pub fn new(p: &Pulse<f64>) -> Self {
        PulseEntry { tau: p.tau, alpha: p.alpha, channel: p.channel + 1, total_time: p.total_time }
    }

    pub fn pulse(&self) -> Result<Pulse<f64>> {
        if self.channel == 0 {
            bail!("pulse channels are 1-based");
        }
        Ok(Pulse::new(self.tau, self.alpha, self.channel - 1, self.total_time)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulsesFile {
    pub schema: String,
    pub pulses: Vec<PulseEntry>,
}

impl Artifact for PulsesFile {
    const KIND: &'static str = "pulses";
}

impl PulsesFile {
    pub fn new(pulses: &[Pulse<f64>]) -> Self {
        PulsesFile { schema: schema_id(Self::KIND), pulses: pulses.iter().map(PulseEntry::new).collect() }
    }

    pub fn pulses(&self) -> Result<Vec<Pulse<f64>>> {
        self.pulses.iter().map(PulseEntry::pulse).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleEntry {
    pub t: f64,
    pub frame: usize,
    pub offset: usize,
    pub run: usize,
    #[serde(default)]
    pub pulse_id: Option<usize>,
    pub y: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecordFile {
    pub schema: String,
    pub noise_sigma: f64,
    #[serde(default)]
    pub notes: Vec<String>,
    #[serde(default)]
    pub pulses: Vec<PulseEntry>,
    pub samples: Vec<SampleEntry>,
}

impl Artifact for RecordFile {
    const KIND: &'static str = "record";
}

impl RecordFile {
    pub fn new(rec: &MeasurementRecord<f64>) -> Self {
        RecordFile {
            schema: schema_id(Self::KIND),
            noise_sigma: rec.noise_sigma,
            notes: rec.notes.clone(),
            pulses: rec.pulses.iter().map(PulseEntry::new).collect(),
            samples: rec
                .samples
                .iter()
                .map(|s| SampleEntry {
                    t: s.t,
                    frame: s.frame,
                    offset: s.offset,
                    run: s.run,
                    pulse_id: s.pulse_id,
                    y: s.y.as_slice().to_vec(),
                    x: s.x.as_ref().map(|x| x.as_slice().to_vec()),
                })
                .collect(),
        }
    }

    pub fn record(&self) -> Result<MeasurementRecord<f64>> {
        let pulses: Vec<Pulse<f64>> = self.pulses.iter().map(PulseEntry::pulse).collect::<Result<_>>()?;
        let samples = self
            .samples
            .iter()
            .map(|s| {
                if s.pulse_id.is_some_and(|p| p >= pulses.len()) {
                    bail!("sample at t = {} names pulse {} of {}", s.t, s.pulse_id.unwrap_or(0), pulses.len());
                }
                Ok(Sample {
                    t: s.t,
                    frame: s.frame,
                    offset: s.offset,
                    run: s.run,
                    pulse_id: s.pulse_id,
                    y: DVector::from_vec(s.y.clone()),
                    x: s.x.as_ref().map(|x| DVector::from_vec(x.clone())),
                })
            })
            .collect::<Result<_>>()?;
        Ok(MeasurementRecord { samples, pulses, noise_sigma: self.noise_sigma, notes: self.notes.clone() })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub schema: String,
    pub partition: Vec<f64>,
    pub outputs: usize,
    pub g: RealMatrix,
    /// `F_1 .. F_{l+1}`.
    pub f: Vec<RealMatrix>,
    pub gamma: RealMatrix,
    /// `G_0 .. G_l`.
    pub g_offsets: Vec<RealMatrix>,
}

impl Artifact for ModelFile {
    const KIND: &'static str = "model";
}

impl ModelFile {
    pub fn new(m: &DiscreteMultirateModel<f64>) -> Self {
        ModelFile {
            schema: schema_id(Self::KIND),
            partition: m.partition.clone(),
            outputs: m.outputs,
            g: RealMatrix::from_matrix(&m.g),
            f: m.f.iter().map(RealMatrix::from_matrix).collect(),
            gamma: RealMatrix::from_matrix(&m.gamma),
            g_offsets: m.g_offsets.iter().map(RealMatrix::from_matrix).collect(),
        }
    }

    pub fn model(&self) -> Result<DiscreteMultirateModel<f64>> {
        let l = self.partition.len().checked_sub(2).ok_or_else(|| anyhow!("partition needs at least two points"))?;
        if self.f.len() != l + 1 || self.g_offsets.len() != l + 1 {
            bail!("model with {} increments needs {} F and G_i blocks", l + 1, l + 1);
        }
        Ok(DiscreteMultirateModel {
            g: self.g.to_matrix()?,
            f: self.f.iter().map(RealMatrix::to_matrix).collect::<Result<_>>()?,
            gamma: self.gamma.to_matrix()?,
            g_offsets: self.g_offsets.iter().map(RealMatrix::to_matrix).collect::<Result<_>>()?,
            partition: self.partition.clone(),
            outputs: self.outputs,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContSysFile {
    pub schema: String,
    pub a: RealMatrix,
    pub b: RealMatrix,
    pub eigenvalues: Vec<[f64; 2]>,
    /// 0-based family member used for the eigenvector assembly.
    pub reference: usize,
}

impl Artifact for ContSysFile {
    const KIND: &'static str = "contsys";
}

impl ContSysFile {
    pub fn new(c: &ContinuousSystem<f64>) -> Self {
        ContSysFile {
            schema: schema_id(Self::KIND),
            a: RealMatrix::from_matrix(&c.a),
            b: RealMatrix::from_matrix(&c.b),
            eigenvalues: c.eigenvalues.iter().map(|z| [z.re, z.im]).collect(),
            reference: c.reference,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub schema: String,
    #[serde(flatten)]
    pub matrix: RealMatrix,
}

impl Artifact for MatrixFile {
    const KIND: &'static str = "matrix";
}

impl MatrixFile {
    pub fn new(m: &DMatrix<f64>) -> Self {
        MatrixFile { schema: schema_id(Self::KIND), matrix: RealMatrix::from_matrix(m) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VectorFile {
    pub schema: String,
    pub data: Vec<f64>,
}

impl Artifact for VectorFile {
    const KIND: &'static str = "vector";
}

impl VectorFile {
    pub fn new(v: &DVector<f64>) -> Self {
        VectorFile { schema: schema_id(Self::KIND), data: v.as_slice().to_vec() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Kappas {
    pub t1: f64,
    pub t3: f64,
    pub m: f64,
    /// Condition number of the matrix actually inverted.
    pub used: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamsHatFile {
    pub schema: String,
    pub status: String,
    pub symmetric: bool,
    pub theta: Option<Vec<f64>>,
    pub gamma: Option<Vec<[f64; 2]>>,
    pub residual_a: f64,
    pub residual_beta: f64,
    pub hermitian_projection: f64,
    pub kappa: Kappas,
    /// Most negative eigenvalue of the recovered `gamma` (physicality).
    pub gamma_min_eigenvalue: Option<f64>,
}

impl Artifact for ParamsHatFile {
    const KIND: &'static str = "params-hat";
}
