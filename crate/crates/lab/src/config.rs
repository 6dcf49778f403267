//! Line-oriented `key = value` experiment configuration.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use haarmul_core::spectral::NormMethod;
use haarmul_core::weight::{CorpusSpec, WeightRecipe};

use crate::error::{LabError, LabResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Verify,
    Audit,
    Norms,
    Sweep,
    Generate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::Verify => "verify",
            Self::Audit => "audit",
            Self::Norms => "norms",
            Self::Sweep => "sweep",
            Self::Generate => "generate",
        }
    }
}

/// Symbol used for the Haar multiplier.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SigmaSpec {
    /// `sigma = 1` everywhere.
    Ones,
    /// Seeded random signs.
    Signs,
    /// Seeded uniform values in `[-1, 1]`.
    Uniform,
}

impl SigmaSpec {
    fn name(self) -> &'static str {
        match self {
            Self::Ones => "ones",
            Self::Signs => "signs",
            Self::Uniform => "uniform",
        }
    }
}

impl FromStr for SigmaSpec {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "ones" => Ok(Self::Ones),
            "signs" => Ok(Self::Signs),
            "uniform" => Ok(Self::Uniform),
            _ => Err(format!("sigma must be ones, signs or uniform, got `{s}`")),
        }
    }
}

fn method_name(m: NormMethod) -> &'static str {
    match m {
        NormMethod::Auto => "auto",
        NormMethod::Dense => "dense",
        NormMethod::Power => "power",
    }
}

fn parse_method(s: &str) -> Result<NormMethod, String> {
    match s {
        "auto" => Ok(NormMethod::Auto),
        "dense" => Ok(NormMethod::Dense),
        "power" => Ok(NormMethod::Power),
        _ => Err(format!("method must be auto, dense or power, got `{s}`")),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub command: Command,
    pub dim: u32,
    pub depth: u32,
    pub seed: u64,
    /// Relative tolerance of the norm computations.
    pub tol: f64,
    /// Tolerance of the exact-identity suite.
    pub verify_tol: f64,
    pub cases: usize,
    pub corpus_size: usize,
    pub a2_max: f64,
    pub sigma: SigmaSpec,
    pub method: NormMethod,
    pub weight_file: Option<PathBuf>,
    pub weight: Option<WeightRecipe>,
    /// Inequality id prefixes to audit; empty means all.
    pub inequalities: Vec<String>,
    pub svg: bool,
    pub out: PathBuf,
}

impl ExperimentConfig {
    pub fn defaults(command: Command) -> Self {
        let (depth, sigma) = match command {
            Command::Verify => (4, SigmaSpec::Signs),
            Command::Norms => (10, SigmaSpec::Ones),
            _ => (10, SigmaSpec::Signs),
        };
        Self {
            command,
            dim: 1,
            depth,
            seed: 0,
            tol: 1e-8,
            verify_tol: 1e-10,
            cases: 20,
            corpus_size: 50,
            a2_max: 1000.0,
            sigma,
            method: NormMethod::Dense,
            weight_file: None,
            weight: None,
            inequalities: Vec::new(),
            svg: true,
            out: PathBuf::from("out"),
        }
    }

    pub fn corpus_spec(&self) -> CorpusSpec {
        CorpusSpec { dim: self.dim, depth: self.depth, count: self.corpus_size, a2_max: self.a2_max, seed: self.seed }
    }

    /// Applies `key = value` lines on top of the current values.
    pub fn apply_text(&mut self, text: &str) -> LabResult<()> {
        let mut recipe: Vec<(String, String)> = Vec::new();
        let mut recipe_line = 0;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |message: String| LabError::Config { line: i + 1, message };
            let (k, v) = line.split_once('=').ok_or_else(|| bad("expected `key = value`".into()))?;
            let (k, v) = (k.trim(), v.trim());
            if let Some(rk) = k.strip_prefix("weight.") {
                recipe.push((rk.to_string(), v.to_string()));
                recipe_line = i + 1;
                continue;
            }
            self.set(k, v).map_err(bad)?;
        }
        if !recipe.is_empty() {
            if !recipe.iter().any(|(k, _)| k == "d") {
                recipe.push(("d".into(), self.dim.to_string()));
            }
            if !recipe.iter().any(|(k, _)| k == "L") {
                recipe.push(("L".into(), self.depth.to_string()));
            }
            let r = WeightRecipe::from_pairs(recipe.iter().map(|(k, v)| (k.as_str(), v.as_str())))
                .map_err(|e| LabError::Config { line: recipe_line, message: e.to_string() })?;
            self.dim = r.dim;
            self.depth = r.depth;
            self.weight = Some(r);
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn num<T: FromStr>(key: &str, v: &str) -> Result<T, String> {
            v.parse().map_err(|_| format!("`{key}` has invalid value `{v}`"))
        }
        match key {
            "command" => {
                if value != self.command.name() {
                    return Err(format!("config is for `{value}`, running `{}`", self.command.name()));
                }
            }
            "d" => self.dim = num(key, value)?,
            "L" => self.depth = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "tol" => self.tol = num(key, value)?,
            "verify_tol" => self.verify_tol = num(key, value)?,
            "cases" => self.cases = num(key, value)?,
            "corpus_size" => self.corpus_size = num(key, value)?,
            "a2_max" => self.a2_max = num(key, value)?,
            "sigma" => self.sigma = value.parse()?,
            "method" => self.method = parse_method(value)?,
            "weight_file" => self.weight_file = if value.is_empty() { None } else { Some(PathBuf::from(value)) },
            "inequalities" => {
                self.inequalities = if value == "all" || value.is_empty() {
                    Vec::new()
                } else {
                    value.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
                }
            }
            "svg" => self.svg = num(key, value)?,
            "out" => self.out = PathBuf::from(value),
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    pub fn validate(&self) -> LabResult<()> {
        let bad = |message: String| LabError::Config { line: 0, message };
        haarmul_core::GridSpec::new(self.dim, self.depth).map_err(|e| bad(e.to_string()))?;
        if !(self.tol > 0.0) || !(self.verify_tol > 0.0) {
            return Err(bad("tolerances must be positive".into()));
        }
        if !(self.a2_max >= 1.0) {
            return Err(bad(format!("a2_max must be at least 1, got {}", self.a2_max)));
        }
        Ok(())
    }

    /// Every setting as `key = value` pairs, in a fixed order.
    pub fn to_pairs(&self) -> Vec<(String, String)> {
        let mut v: Vec<(String, String)> = vec![
            ("command".into(), self.command.name().into()),
            ("d".into(), self.dim.to_string()),
            ("L".into(), self.depth.to_string()),
            ("seed".into(), self.seed.to_string()),
            ("tol".into(), format!("{:e}", self.tol)),
            ("verify_tol".into(), format!("{:e}", self.verify_tol)),
            ("cases".into(), self.cases.to_string()),
            ("corpus_size".into(), self.corpus_size.to_string()),
            ("a2_max".into(), self.a2_max.to_string()),
            ("sigma".into(), self.sigma.name().into()),
            ("method".into(), method_name(self.method).into()),
            ("weight_file".into(), self.weight_file.as_ref().map(|p| p.display().to_string()).unwrap_or_default()),
            ("inequalities".into(), if self.inequalities.is_empty() { "all".into() } else { self.inequalities.join(",") }),
            ("svg".into(), self.svg.to_string()),
            ("out".into(), self.out.display().to_string()),
        ];
        if let Some(r) = &self.weight {
            v.extend(r.to_pairs().into_iter().map(|(k, x)| (format!("weight.{k}"), x)));
        }
        v
    }
}

impl fmt::Display for ExperimentConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.to_pairs() {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}
