// Copyright 2026 The oqs-ident Authors
// SPDX-License-Identifier: Apache-2.0

//! Two coupled qubits, end to end: assemble, simulate, check, fit the lifted
//! model, recover (A, beta), then recover the Hamiltonian and rates.

use anyhow::{bail, Result};
use serde_json::json;

use oqs_ident::gksl::{assemble_system, TwoQubitExample};
use oqs_ident::identify::{identifiability_report, Mode, ReportInput};
use oqs_ident::ldsrec::{fit_multirate, reconstruct_continuous, single_rate_models, FitOptions, ReconstructOptions};
use oqs_ident::liealg::{generalized_pauli, structure_constants};
use oqs_ident::paramrec::{reconstruct_symmetric, ReconstructionMatrices, RecoveryStatus};
use oqs_ident::simulate::{golden_schedule, SimulationConfig};

use crate::artifact::{
    self, save, save_value, BasisFile, ContSysFile, ModelFile, ParamsFile, RecordFile, ScheduleFile, SystemFile,
};
use crate::commands::{params_hat, report_json, run_simulation};
use crate::TwoQubitArgs;

fn fields(e: &TwoQubitExample<f64>) -> [(&'static str, f64); 9] {
    [
        ("omega1", e.omega1),
        ("omega2", e.omega2),
        ("delta", e.delta),
        ("g1z", e.g1z),
        ("g2z", e.g2z),
        ("g1-", e.g1_minus),
        ("g1+", e.g1_plus),
        ("g2-", e.g2_minus),
        ("g2+", e.g2_plus),
    ]
}

pub fn two_qubit(args: &TwoQubitArgs) -> Result<u8> {
    if let Some(dir) = &args.out_dir {
        std::fs::create_dir_all(dir)?;
    }
    let put = |name: &str| args.out_dir.as_ref().map(|d| d.join(name));

    let basis = generalized_pauli::<f64>(2)?;
    let tensors = structure_constants(&basis)?;
    let truth = TwoQubitExample::<f64>::default_values();
    let params = truth.params(&basis)?;
    let sys = assemble_system(&basis, &tensors, &params, &[])?;
    let sched = golden_schedule(args.period, 2, args.frames)?;
    println!("system: n = {}, increments {:?}", sys.n(), sched.increments());

    let report = identifiability_report(
        Mode::Autonomous,
        &ReportInput { system: &sys, schedule: Some(&sched), pulses: &[], b: None, word_cap: None },
    )?;
    println!(
        "check: {} (rank OM {}, CM {} of {})",
        report.status.as_str(),
        report.rank_om,
        report.rank_cm,
        report.required_rank
    );

    let cfg = SimulationConfig { step: Some(args.step), noise_sigma: 0.0, seed: args.seed, record_state: true };
    let record = run_simulation(&basis, &sys, &sched, &[], args.runs, &cfg)?;
    println!("simulate: {} samples over {} runs", record.samples.len(), args.runs);

    // beta != 0 here, so the constant offset is fitted as a unit input
    let model = fit_multirate(&record, &sched, sys.n(), &FitOptions { c: None, affine: true, rank_rel: None })?;
    let fam = single_rate_models(&model)?;
    let cont = reconstruct_continuous(&fam, &sched, &ReconstructOptions::default())?;
    let a_err = (&cont.a - sys.a()).amax();
    let beta_hat = cont.b.column(0).into_owned();
    let beta_err = (&beta_hat - &sys.beta).amax();
    println!("reconstruct-lds: max |A' - A| = {a_err:.2e}, max |beta' - beta| = {beta_err:.2e}");

    let mats = ReconstructionMatrices::build(&tensors, basis.hilbert_dim(), true)?;
    let rec = reconstruct_symmetric(&cont.a, Some(&beta_hat), &mats)?;
    if rec.status != RecoveryStatus::Full {
        bail!("parameter recovery ended with status {}", rec.status.as_str());
    }
    let (theta, gamma) = match (&rec.theta, &rec.gamma) {
        (Some(t), Some(g)) => (t.clone(), g.map(|z| z.re)),
        _ => bail!("full recovery without parameters"),
    };
    let got = TwoQubitExample::from_params(&theta, &gamma, &basis);

    println!("{:>8} {:>14} {:>14} {:>10}", "param", "truth", "recovered", "abs err");
    let mut max_err = 0.0f64;
    let mut rows = serde_json::Map::new();
    for ((name, t), (_, r)) in fields(&truth).into_iter().zip(fields(&got)) {
        let e = (t - r).abs();
        max_err = max_err.max(e);
        println!("{name:>8} {t:>14.10} {r:>14.10} {e:>10.2e}");
        rows.insert(name.into(), json!({ "truth": t, "recovered": r, "abs_error": e }));
    }
    println!("max parameter error {max_err:.2e}");

    if let Some(p) = put("basis.json") {
        save(&p, &BasisFile::new(&basis, &tensors))?;
    }
    if let Some(p) = put("params.json") {
        save(&p, &ParamsFile::new(params.theta(), params.gamma(), true))?;
    }
    if let Some(p) = put("system.json") {
        save(&p, &SystemFile::new(2, &sys))?;
    }
    if let Some(p) = put("schedule.json") {
        save(&p, &ScheduleFile::new(&sched))?;
    }
    if let Some(p) = put("record.json") {
        save(&p, &RecordFile::new(&record))?;
    }
    if let Some(p) = put("report.json") {
        save_value(&p, &report_json(&report))?;
    }
    if let Some(p) = put("model.json") {
        save(&p, &ModelFile::new(&model))?;
    }
    if let Some(p) = put("contsys.json") {
        save(&p, &ContSysFile::new(&cont))?;
    }
    if let Some(p) = put("params_hat.json") {
        save(&p, &params_hat(&rec, &mats))?;
    }
    if let Some(p) = &args.report {
        let summary = json!({
            "schema": artifact::schema_id("demo"),
            "demo": "two-qubit",
            "identifiability": report.status.as_str(),
            "recovery_status": rec.status.as_str(),
            "a_error": a_err,
            "beta_error": beta_err,
            "max_parameter_error": max_err,
            "parameters": rows,
        });
        save_value(p, &summary)?;
    }
    Ok(0)
}
