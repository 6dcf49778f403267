//! Ten-norm readout of one weight, shared by `norms` and `sweep`.

use haarmul_core::operator::LinearOperator;
use haarmul_core::paraproduct::{build_nine_term_resolution, QLabel};
use haarmul_core::spectral::{operator_norm, NormOptions};
use haarmul_core::symbol::SymbolSequence;
use haarmul_core::weight::Weight;
use haarmul_core::{Error, GridSpec};

use crate::config::{ExperimentConfig, SigmaSpec};
use crate::error::LabResult;
use crate::output::{num, opt_num, write_csv};
use crate::weights::configured_weight;
use crate::Outcome;

/// Relative slack on the per-row triangle inequality.
const TRIANGLE_SLACK: f64 = 1e-9;

pub fn sigma_for(spec: SigmaSpec, grid: GridSpec, seed: u64) -> SymbolSequence<f64> {
    match spec {
        SigmaSpec::Ones => SymbolSequence::constant(grid, 1.0),
        SigmaSpec::Signs => SymbolSequence::random_signs(grid, seed),
        SigmaSpec::Uniform => SymbolSequence::random(grid, seed, -1.0, 1.0),
    }
}

pub fn norm_options(config: &ExperimentConfig) -> NormOptions {
    NormOptions { tol: config.tol, method: config.method, seed: config.seed, ..NormOptions::default() }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub weight_id: String,
    pub family: String,
    pub seed: u64,
    pub a2: f64,
    pub sigma_norm: f64,
    /// Norms of the nine compositions in [`QLabel::all`] order; `None` when the solver failed.
    pub norms: [Option<f64>; 9],
    pub conjugated: Option<f64>,
    pub note: String,
}

pub fn sweep_columns() -> String {
    let q: Vec<String> = QLabel::all().iter().map(|q| q.name()).collect();
    format!("weight_id,family,seed,A2,sigma_norm,{},norm_conjugated,triangle_ok,status", q.join(","))
}

impl SweepRow {
    pub fn complete(&self) -> bool {
        self.norms.iter().all(Option::is_some) && self.conjugated.is_some()
    }

    /// `norm_conjugated <= sum of the nine norms`, when every norm is known.
    pub fn triangle_ok(&self) -> Option<bool> {
        if !self.complete() {
            return None;
        }
        let sum: f64 = self.norms.iter().map(|v| v.unwrap()).sum();
        let c = self.conjugated.unwrap();
        Some(c <= sum * (1.0 + TRIANGLE_SLACK) + f64::MIN_POSITIVE)
    }

    pub fn status(&self) -> &str {
        if self.complete() {
            "ok"
        } else {
            &self.note
        }
    }

    pub fn to_csv(&self) -> String {
        let norms: Vec<String> = self.norms.iter().map(|v| opt_num(*v)).collect();
        let tri = match self.triangle_ok() {
            Some(true) => "true",
            Some(false) => "false",
            None => "na",
        };
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.weight_id,
            self.family,
            self.seed,
            num(self.a2),
            num(self.sigma_norm),
            norms.join(","),
            opt_num(self.conjugated),
            tri,
            self.status()
        )
    }

    /// Norm by column name (`q_..` or `conjugated`).
    pub fn norm(&self, column: &str) -> Option<f64> {
        if column == "conjugated" {
            return self.conjugated;
        }
        QLabel::all().iter().position(|q| q.name() == column).and_then(|i| self.norms[i])
    }
}

/// Measures the nine compositions and the conjugated operator for one weight.
pub fn measure_row(
    weight_id: &str,
    family: &str,
    seed: u64,
    w: &Weight<f64>,
    sigma: &SymbolSequence<f64>,
    opts: &NormOptions,
) -> LabResult<SweepRow> {
    let res = build_nine_term_resolution(sigma, w.base())?;
    let mut notes: Vec<String> = Vec::new();
    let mut measure = |name: &str, op: &dyn LinearOperator<f64>| -> LabResult<Option<f64>> {
        match operator_norm(op, opts) {
            Ok(r) => Ok(Some(r.value)),
            Err(Error::NonConvergence { iterations, lower, upper }) => {
                notes.push(format!("nonconvergence {name} after {iterations} [{lower:e} {upper:e}]"));
                Ok(None)
            }
            Err(e) => Err(e.into()),
        }
    };
    let mut norms = [None; 9];
    for (i, (q, op)) in res.terms.iter().enumerate() {
        norms[i] = measure(&q.name(), op)?;
    }
    let conjugated = measure("conjugated", &res.conjugated)?;
    Ok(SweepRow {
        weight_id: weight_id.to_string(),
        family: family.to_string(),
        seed,
        a2: w.a2_characteristic(),
        sigma_norm: sigma.sup_norm(),
        norms,
        conjugated,
        note: notes.join("; "),
    })
}

pub fn cmd_norms(config: &ExperimentConfig) -> LabResult<Outcome> {
    let (id, recipe, w) = configured_weight(config)?;
    let sigma = sigma_for(config.sigma, w.grid(), config.seed);
    let family = recipe.as_ref().map(|r| r.family.name()).unwrap_or("file");
    let seed = recipe.as_ref().map(|r| r.family.seed()).unwrap_or(0);
    let row = measure_row(&id, family, seed, &w, &sigma, &norm_options(config))?;
    let file = write_csv(config, "norms.csv", "norms", &sweep_columns(), &format!("{}\n", row.to_csv()))?;
    let mut summary = format!("{id}: [w]_A2 = {:.6}, |sigma|_inf = {}", row.a2, row.sigma_norm);
    for (q, v) in QLabel::all().iter().zip(&row.norms) {
        summary.push_str(&format!("\n  {:<11} {}", q.name(), opt_num(*v)));
    }
    summary.push_str(&format!("\n  {:<11} {}", "conjugated", opt_num(row.conjugated)));
    summary.push_str(&format!("\n  triangle    {:?}", row.triangle_ok()));
    Ok(Outcome { passed: row.triangle_ok() != Some(false), files: vec![file], summary })
}
