//! `generate`: writes a corpus as weight files plus an index.

use haarmul_core::weight::corpus;

use crate::config::ExperimentConfig;
use crate::error::LabResult;
use crate::output::{num, write_csv, write_file};
use crate::weights::weight_file_text;
use crate::Outcome;

pub fn cmd_generate(config: &ExperimentConfig) -> LabResult<Outcome> {
    let c = corpus::<f64>(&config.corpus_spec())?;
    let mut files = Vec::new();
    let mut rows = String::new();
    for m in &c.members {
        let path = config.out.join("weights").join(format!("{}.weight", m.id));
        files.push(write_file(&path, &weight_file_text(Some(&m.recipe), &m.weight))?);
        rows.push_str(&format!(
            "{},{},{},{},{},{}\n",
            m.id,
            m.recipe.family.name(),
            m.recipe.family.seed(),
            m.recipe,
            num(m.target),
            num(m.a2)
        ));
    }
    files.push(write_csv(config, "corpus.csv", "corpus", "weight_id,family,seed,recipe,target_A2,A2", &rows)?);
    let mut summary = format!("{} weights written to {}", c.members.len(), config.out.join("weights").display());
    for w in &c.warnings {
        summary.push_str(&format!("\nwarning: {w}"));
    }
    Ok(Outcome { passed: true, files, summary })
}
