//! `verify`: the exact-identity suite, optionally around a weight file.

use std::path::PathBuf;

use haarmul_core::verify::{run_cases, run_suite, Case, CheckOutcome, VerifyConfig};

use crate::config::ExperimentConfig;
use crate::error::LabResult;
use crate::output::{num, write_csv};
use crate::weights::load_weight_file;
use crate::Outcome;

pub fn verify_config(config: &ExperimentConfig) -> VerifyConfig {
    VerifyConfig {
        dim: config.dim,
        depth: Some(config.depth),
        cases: config.cases,
        max_cells: 1 << 12,
        seed: config.seed,
        tol: config.verify_tol,
    }
}

pub fn cmd_verify(config: &ExperimentConfig) -> LabResult<Outcome> {
    // Load before running anything so a bad file leaves no partial report.
    let loaded = match &config.weight_file {
        Some(p) => Some(load_weight_file(p)?.1),
        None => None,
    };
    let outcomes: Vec<CheckOutcome> = match loaded {
        Some(w) => {
            let dim = w.grid().dim();
            let cases = (0..config.cases).map(|i| Case::with_weight(w.clone(), config.seed.wrapping_add(i as u64)));
            run_cases(cases, dim, config.verify_tol)
        }
        None => run_suite(&verify_config(config)),
    };
    let mut rows = String::new();
    let mut failures = String::new();
    for o in &outcomes {
        rows.push_str(&format!(
            "{},{},{},{},{},{}\n",
            o.check.name(),
            o.dim,
            o.cases,
            num(o.max_error),
            num(o.tolerance),
            if o.pass() { "pass" } else { "fail" }
        ));
        for f in &o.failures {
            failures.push_str(&format!("{},{}\n", o.check.name(), f.replace(',', ";")));
        }
    }
    let files: Vec<PathBuf> = vec![
        write_csv(config, "verify.csv", "verify", "check,d,cases,max_error,tolerance,status", &rows)?,
        write_csv(config, "verify_failures.csv", "verify failures", "check,message", &failures)?,
    ];
    let passed = outcomes.iter().all(CheckOutcome::pass);
    let summary = outcomes
        .iter()
        .map(|o| format!("{:<28} {:>4} cases  max error {:.3e}  {}", o.check.name(), o.cases, o.max_error, if o.pass() { "pass" } else { "FAIL" }))
        .collect::<Vec<_>>()
        .join("\n");
    Ok(Outcome { passed, files, summary })
}
