//! `audit`: every inequality over a corpus, per family and corpus-wide.

use rayon::prelude::*;

use haarmul_core::audit::{
    audit_lemma_sums, carleson_constants, square_function_constants, AuditRecord, AuditReport, CarlesonInput,
    CarlesonSequence, Witness, AUDIT_CSV_HEADER,
};
use haarmul_core::weight::{corpus, CorpusMember};

use crate::config::ExperimentConfig;
use crate::error::LabResult;
use crate::norms::norm_options;
use crate::output::{num, write_csv};
use crate::Outcome;

/// Cap on the Carleson ratio `B / A`.
pub const CARLESON_CAP: f64 = 16.0;
/// Cap on `c_+ / [w]^2` and `c_- / [w]`.
pub const SQUARE_FUNCTION_CAP: f64 = 16.0;

pub const SQUARE_UPPER_ID: &str = "square_function_upper";
pub const SQUARE_LOWER_ID: &str = "square_function_lower";

/// Corpus-wide maximum of one inequality.
#[derive(Clone, Debug)]
pub struct Maximum {
    pub inequality_id: String,
    pub ratio: f64,
    pub weight_id: String,
    pub cap: f64,
    pub exact: bool,
    pub pass: bool,
}

/// Records of one weight: lemma sums, exact checks, Carleson and square-function rows.
pub fn audit_member(m: &CorpusMember<f64>, config: &ExperimentConfig) -> LabResult<AuditReport<f64>> {
    let mut report = audit_lemma_sums(&m.weight, &m.id);
    let opts = norm_options(config);
    let grid = m.weight.grid();
    let a2 = m.a2;
    let mut record = |id: &str, lhs: f64, rhs: f64, witness: Witness, cap: f64| {
        let ratio = if rhs > 0.0 { lhs / rhs } else if lhs > 0.0 { f64::INFINITY } else { 0.0 };
        report.records.push(AuditRecord {
            inequality_id: id.to_string(),
            weight_id: m.id.clone(),
            dim: grid.dim(),
            depth: grid.depth(),
            a2,
            lhs_max: lhs,
            rhs_base: rhs,
            ratio,
            ratio_strict: ratio,
            witness,
            cap,
            exact: false,
        });
    };
    for kind in CarlesonSequence::ALL {
        let a = kind.build(&m.weight);
        let c = carleson_constants(CarlesonInput { sequence: &a, weight: &m.weight }, &opts)?;
        let (cube, alpha) = c.testing_witness;
        record(kind.id(), c.embedding, c.testing, Witness::Set(cube, alpha), CARLESON_CAP);
    }
    let sf = square_function_constants(&m.weight, &opts)?;
    let (_, witness_cube) = m.weight.a2_with_witness();
    record(SQUARE_UPPER_ID, sf.upper.value, a2 * a2, Witness::Cube(witness_cube), SQUARE_FUNCTION_CAP);
    record(SQUARE_LOWER_ID, sf.lower.value, a2, Witness::Cube(witness_cube), SQUARE_FUNCTION_CAP);
    let keep = |id: &str| config.inequalities.is_empty() || config.inequalities.iter().any(|p| id.starts_with(p.as_str()));
    report.records.retain(|r| keep(&r.inequality_id));
    Ok(report)
}

pub fn corpus_maxima(report: &AuditReport<f64>) -> Vec<Maximum> {
    let mut order: Vec<String> = Vec::new();
    for r in &report.records {
        if !order.contains(&r.inequality_id) {
            order.push(r.inequality_id.clone());
        }
    }
    order
        .into_iter()
        .map(|id| {
            let recs: Vec<&AuditRecord<f64>> = report.records.iter().filter(|r| r.inequality_id == id).collect();
            let worst = recs.iter().copied().fold(recs[0], |a, b| if b.ratio > a.ratio || b.ratio.is_nan() { b } else { a });
            Maximum {
                inequality_id: id,
                ratio: worst.ratio,
                weight_id: worst.weight_id.clone(),
                cap: worst.cap,
                exact: worst.exact,
                pass: recs.iter().all(|r| r.pass()),
            }
        })
        .collect()
}

fn rows_where(report: &AuditReport<f64>, pred: impl Fn(&AuditRecord<f64>) -> bool) -> String {
    AuditReport { records: report.records.iter().filter(|r| pred(r)).cloned().collect() }.to_csv_rows()
}

pub fn cmd_audit(config: &ExperimentConfig) -> LabResult<Outcome> {
    let c = corpus::<f64>(&config.corpus_spec())?;
    let parts = c.members.par_iter().map(|m| audit_member(m, config)).collect::<LabResult<Vec<_>>>()?;
    let mut report = AuditReport::default();
    for p in parts {
        report.extend(p);
    }
    let is_carleson = |r: &AuditRecord<f64>| r.inequality_id.starts_with("carleson_");
    let is_square = |r: &AuditRecord<f64>| r.inequality_id.starts_with("square_function_");
    let cols = &AUDIT_CSV_HEADER;
    let files = vec![
        write_csv(config, "audit_lemma_sums.csv", "audit lemma sums", cols, &rows_where(&report, |r| !r.exact && !is_carleson(r) && !is_square(r)))?,
        write_csv(config, "audit_exact.csv", "audit exact inequalities", cols, &rows_where(&report, |r| r.exact))?,
        write_csv(config, "audit_carleson.csv", "audit carleson", cols, &rows_where(&report, is_carleson))?,
        write_csv(config, "audit_square_function.csv", "audit square function", cols, &rows_where(&report, is_square))?,
        write_csv(config, "audit_summary.csv", "audit summary", cols, &report.to_csv_rows())?,
        write_csv(config, "audit_maxima.csv", "audit corpus maxima", "inequality_id,max_ratio,weight_id,cap,kind,status", &{
            corpus_maxima(&report)
                .iter()
                .map(|m| {
                    format!(
                        "{},{},{},{},{},{}\n",
                        m.inequality_id,
                        num(m.ratio),
                        m.weight_id,
                        num(m.cap),
                        if m.exact { "exact" } else { "regression" },
                        if m.pass { "pass" } else { "fail" }
                    )
                })
                .collect::<String>()
        })?,
    ];
    let maxima = corpus_maxima(&report);
    let passed = maxima.iter().all(|m| m.pass);
    let mut summary = format!("{} weights, {} records", c.members.len(), report.records.len());
    for m in &maxima {
        summary.push_str(&format!(
            "\n  {:<36} max {:>10.4e} ({}) cap {:>4}  {}",
            m.inequality_id,
            m.ratio,
            m.weight_id,
            m.cap,
            if m.pass { "pass" } else { "FAIL" }
        ));
    }
    Ok(Outcome { passed, files, summary })
}
