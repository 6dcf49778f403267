//! Weight files: the recipe as `# key = value` comments, then the cell values.

use std::fs;
use std::path::Path;

use haarmul_core::weight::{generate, Weight, WeightFamily, WeightRecipe};
use haarmul_core::{GridSpec, StepFunction};

use crate::config::ExperimentConfig;
use crate::error::{io_err, LabError, LabResult};

pub fn weight_file_text(recipe: Option<&WeightRecipe>, weight: &Weight<f64>) -> String {
    let mut text = String::new();
    if let Some(r) = recipe {
        for (k, v) in r.to_pairs() {
            text.push_str(&format!("# {k} = {v}\n"));
        }
    }
    text.push_str(&weight.base().to_text());
    text
}

/// Loads a weight file; the recipe is returned when its comment block is present.
pub fn load_weight_file(path: &Path) -> LabResult<(Option<WeightRecipe>, Weight<f64>)> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let load = |source| LabError::Load { path: path.to_path_buf(), source };
    let recipe_lines: String = text
        .lines()
        .filter_map(|l| l.trim().strip_prefix('#'))
        .filter(|l| l.contains('='))
        .map(|l| format!("{}\n", l.trim()))
        .collect();
    let recipe = if recipe_lines.is_empty() { None } else { Some(WeightRecipe::from_text(&recipe_lines).map_err(load)?) };
    let cells = StepFunction::<f64>::from_text(&text).map_err(load)?;
    let weight = Weight::new(cells).map_err(load)?;
    Ok((recipe, weight))
}

/// The configured single weight: a file, an inline recipe, or `w = 1`.
pub fn configured_weight(config: &ExperimentConfig) -> LabResult<(String, Option<WeightRecipe>, Weight<f64>)> {
    if let Some(path) = &config.weight_file {
        let (recipe, w) = load_weight_file(path)?;
        let id = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "weight".into());
        return Ok((id, recipe, w));
    }
    let recipe = config.weight.clone().unwrap_or(WeightRecipe {
        family: WeightFamily::Constant { value: 1.0 },
        dim: config.dim,
        depth: config.depth,
    });
    GridSpec::new(recipe.dim, recipe.depth)?;
    let w = generate::<f64>(&recipe)?;
    Ok((recipe.family.name().to_string(), Some(recipe), w))
}
