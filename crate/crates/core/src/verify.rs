//! Seeded exact-identity suite shared by the CLI and the test targets.
//!
//! Every check compares a fast path against an independent cellwise
//! computation and reports the largest deviation, scaled by the size of
//! the reference.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::audit::weighted_haar_coefficients;
use crate::grid::GridSpec;
use crate::haar::{analyze, CubeSumCache};
use crate::operator::LinearOperator;
use crate::paraproduct::{build_nine_term_resolution, decompose_multiplication, product_formula_coefficient, product_formula_coefficients};
use crate::step::StepFunction;
use crate::symbol::SymbolSequence;
use crate::weight::Weight;
use crate::wilson::{build_wilson_sets, check_lemma_properties, disbalanced_from_cache, haar_function, normalized_indicator, AlphaIndex};

/// Largest label count checked exhaustively by the quadratic-cost checks.
const FULL_LABEL_LIMIT: usize = 512;
/// Labels sampled above the limit.
const SAMPLED_LABELS: usize = 48;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Check {
    WilsonProperties,
    Orthonormality,
    DisbalancedReconstruction,
    ProductFormula,
    MultiplicationIdentity,
    NineTermResolution,
}

impl Check {
    pub const ALL: [Check; 6] = [
        Self::WilsonProperties,
        Self::Orthonormality,
        Self::DisbalancedReconstruction,
        Self::ProductFormula,
        Self::MultiplicationIdentity,
        Self::NineTermResolution,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::WilsonProperties => "wilson_properties",
            Self::Orthonormality => "orthonormality",
            Self::DisbalancedReconstruction => "disbalanced_reconstruction",
            Self::ProductFormula => "product_formula",
            Self::MultiplicationIdentity => "multiplication_identity",
            Self::NineTermResolution => "nine_term_resolution",
        }
    }
}

#[derive(Clone, Debug)]
pub struct VerifyConfig {
    pub dim: u32,
    /// Fixed depth, or `None` to cycle through every depth with at most `max_cells` cells.
    pub depth: Option<u32>,
    pub cases: usize,
    pub max_cells: usize,
    pub seed: u64,
    pub tol: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { dim: 1, depth: Some(4), cases: 20, max_cells: 4096, seed: 0, tol: 1e-10 }
    }
}

impl VerifyConfig {
    pub fn grid_for(&self, case: usize) -> GridSpec {
        let depth = self.depth.unwrap_or_else(|| {
            let mut top = 1;
            while (1usize << (self.dim * (top + 1))) <= self.max_cells {
                top += 1;
            }
            1 + (case as u32 % top)
        });
        GridSpec::new(self.dim, depth).expect("verify grid")
    }
}

#[derive(Clone, Debug)]
pub struct CheckOutcome {
    pub check: Check,
    pub dim: u32,
    pub cases: usize,
    pub max_error: f64,
    pub tolerance: f64,
    pub failures: Vec<String>,
}

impl CheckOutcome {
    pub fn pass(&self) -> bool {
        self.failures.is_empty() && self.max_error <= self.tolerance
    }
}

/// One seeded instance: a grid, a positive weight, two test functions and a symbol.
pub struct Case {
    pub grid: GridSpec,
    pub weight: Weight<f64>,
    pub f: StepFunction<f64>,
    pub g: StepFunction<f64>,
    pub sigma: SymbolSequence<f64>,
    seed: u64,
}

impl Case {
    pub fn new(grid: GridSpec, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spread: f64 = rng.gen_range(0.0..4.0);
        let w = StepFunction::<f64>::random(grid, rng.gen(), 0.0, 1.0).map(|u| (spread * (2.0 * u - 1.0)).exp());
        Self {
            grid,
            weight: Weight::new(w).expect("positive"),
            f: StepFunction::random(grid, rng.gen(), -1.0, 1.0),
            g: StepFunction::random(grid, rng.gen(), -1.0, 1.0),
            sigma: SymbolSequence::random(grid, rng.gen(), -1.0, 1.0),
            seed: rng.gen(),
        }
    }

    /// A case around a given weight; the test functions and the symbol are seeded.
    pub fn with_weight(weight: Weight<f64>, seed: u64) -> Self {
        let mut case = Self::new(weight.grid(), seed);
        case.weight = weight;
        case
    }

    /// Slots checked by the quadratic-cost identities.
    fn slots(&self) -> Vec<usize> {
        let n = self.grid.haar_len();
        if n <= FULL_LABEL_LIMIT {
            return (0..n).collect();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..SAMPLED_LABELS).map(|_| rng.gen_range(0..n)).collect()
    }
}

fn scaled(err: f64, reference: f64) -> f64 {
    err / reference.max(1.0)
}

fn direct_inner(a: &StepFunction<f64>, b: &StepFunction<f64>, w: &StepFunction<f64>) -> f64 {
    a.cells().iter().zip(b.cells()).zip(w.cells()).map(|((x, y), z)| x * y * z).sum::<f64>() * a.cell_measure()
}

pub fn check_wilson(case: &Case) -> Result<f64, String> {
    for cube in case.grid.haar_cubes() {
        let sets = build_wilson_sets(&case.grid, cube).map_err(|e| e.to_string())?;
        check_lemma_properties(&sets, case.grid.dim()).map_err(|e| format!("cube {cube:?}: {e}"))?;
    }
    Ok(0.0)
}

/// Gram of the unweighted and the weighted system against the identity;
/// on large grids a seeded sample of columns is checked against every row.
pub fn check_orthonormality(case: &Case) -> Result<f64, String> {
    let grid = case.grid;
    let unit = Weight::new(StepFunction::constant(grid, 1.0)).map_err(|e| e.to_string())?;
    let small = grid.haar_len() <= 64;
    let mut err = 0.0f64;
    for (weight, base) in [(&unit, None), (&case.weight, Some(case.weight.base()))] {
        let h_at = |slot: usize| {
            let (c, a) = grid.haar_label(slot);
            haar_function(&grid, base, c, AlphaIndex(a)).map_err(|e| e.to_string())
        };
        let hs: Vec<StepFunction<f64>> = if small { (0..grid.haar_len()).map(h_at).collect::<Result<_, _>>()? } else { Vec::new() };
        for j in case.slots() {
            let h = h_at(j)?;
            let col = weighted_haar_coefficients(&h, weight).map_err(|e| e.to_string())?;
            for (i, v) in col.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                err = err.max((v - want).abs());
                if small {
                    let direct = direct_inner(&hs[i], &h, weight.base());
                    err = err.max((direct - want).abs());
                }
            }
        }
    }
    Ok(err)
}

/// `h_J = C h^w_J + D h^1_E` cellwise.
pub fn check_disbalanced(case: &Case) -> Result<f64, String> {
    let grid = case.grid;
    let w = case.weight.base();
    let cache = CubeSumCache::new(w);
    let mut err = 0.0f64;
    for slot in case.slots() {
        let (cube, a) = grid.haar_label(slot);
        let alpha = AlphaIndex(a);
        let h = haar_function(&grid, None, cube, alpha).map_err(|e| e.to_string())?;
        let hw = haar_function(&grid, Some(w), cube, alpha).map_err(|e| e.to_string())?;
        let k = disbalanced_from_cache(&cache, cube, alpha).map_err(|e| e.to_string())?;
        let mut rebuilt = hw.scale(k.c);
        rebuilt.axpy(k.d, &normalized_indicator(&grid, cube, alpha));
        err = err.max(scaled(rebuilt.max_abs_diff(&h), h.max_abs()));
    }
    Ok(err)
}

/// Both product formulas against the Haar coefficients of the cellwise product.
pub fn check_product_formula(case: &Case) -> Result<f64, String> {
    let oracle = analyze(&(&case.f * &case.g));
    let fast = product_formula_coefficients(&case.f, &case.g).map_err(|e| e.to_string())?;
    let scale = oracle.coeffs().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut err = 0.0f64;
    for (a, b) in fast.iter().zip(oracle.coeffs()) {
        err = err.max((a - b).abs());
    }
    let direct_slots: Vec<usize> = case.slots().into_iter().take(if case.grid.haar_len() > 64 { 8 } else { usize::MAX }).collect();
    for slot in direct_slots {
        let (cube, a) = case.grid.haar_label(slot);
        let v = product_formula_coefficient(&case.f, &case.g, cube, AlphaIndex(a)).map_err(|e| e.to_string())?;
        err = err.max((v - oracle.coeffs()[slot]).abs());
    }
    Ok(scaled(err, scale))
}

/// `g f = P00 f + P01 f + P10 f + <g><f>` cellwise.
pub fn check_multiplication(case: &Case) -> Result<f64, String> {
    let dec = decompose_multiplication(&case.g);
    let mut err = 0.0f64;
    for f in [&case.f, case.weight.base()] {
        let rebuilt = dec.apply(f).map_err(|e| e.to_string())?;
        let direct = &case.g * f;
        err = err.max(scaled(rebuilt.max_abs_diff(&direct), direct.max_abs()));
    }
    Ok(err)
}

/// The nine compositions sum to `M_{w^{1/2}} T_sigma M_{w^{-1/2}}`, and so do their adjoints.
pub fn check_nine_terms(case: &Case) -> Result<f64, String> {
    let res = build_nine_term_resolution(&case.sigma, case.weight.base()).map_err(|e| e.to_string())?;
    let mut err = 0.0f64;
    for f in [&case.f, &case.g] {
        let want = res.conjugated.apply(f);
        err = err.max(scaled(res.apply_sum(f).max_abs_diff(&want), want.max_abs()));
        let want_adj = res.conjugated.apply_adjoint(f);
        let mut got_adj = StepFunction::zeros(case.grid);
        for (_, op) in &res.terms {
            got_adj.axpy(1.0, &op.apply_adjoint(f));
        }
        err = err.max(scaled(got_adj.max_abs_diff(&want_adj), want_adj.max_abs()));
    }
    Ok(err)
}

pub fn run_check(check: Check, case: &Case) -> Result<f64, String> {
    match check {
        Check::WilsonProperties => check_wilson(case),
        Check::Orthonormality => check_orthonormality(case),
        Check::DisbalancedReconstruction => check_disbalanced(case),
        Check::ProductFormula => check_product_formula(case),
        Check::MultiplicationIdentity => check_multiplication(case),
        Check::NineTermResolution => check_nine_terms(case),
    }
}

/// Runs every check on `cfg.cases` seeded cases.
pub fn run_suite(cfg: &VerifyConfig) -> Vec<CheckOutcome> {
    let cases = (0..cfg.cases).map(|i| Case::new(cfg.grid_for(i), cfg.seed.wrapping_add(i as u64)));
    run_cases(cases, cfg.dim, cfg.tol)
}

/// Runs every check on the given cases; outcomes are reported under `dim`.
pub fn run_cases(cases: impl IntoIterator<Item = Case>, dim: u32, tol: f64) -> Vec<CheckOutcome> {
    let mut out: Vec<CheckOutcome> = Check::ALL
        .iter()
        .map(|&check| CheckOutcome { check, dim, cases: 0, max_error: 0.0, tolerance: tol, failures: Vec::new() })
        .collect();
    for (i, case) in cases.into_iter().enumerate() {
        let grid = case.grid;
        for o in out.iter_mut() {
            o.cases += 1;
            match run_check(o.check, &case) {
                Ok(e) if e.is_finite() => {
                    o.max_error = o.max_error.max(e);
                    if e > tol {
                        o.failures.push(format!("case {i} (d={} L={}): error {e:e}", grid.dim(), grid.depth()));
                    }
                }
                Ok(e) => o.failures.push(format!("case {i}: non-finite error {e}")),
                Err(msg) => o.failures.push(format!("case {i}: {msg}")),
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_suite_passes() {
        for o in run_suite(&VerifyConfig::default()) {
            assert!(o.pass(), "{}: {:?} {:e}", o.check.name(), o.failures, o.max_error);
            assert_eq!(o.cases, 20);
        }
    }

    #[test]
    fn depth_cycle_respects_cell_cap() {
        let cfg = VerifyConfig { dim: 3, depth: None, ..Default::default() };
        let depths: Vec<u32> = (0..8).map(|i| cfg.grid_for(i).depth()).collect();
        assert_eq!(depths, vec![1, 2, 3, 4, 1, 2, 3, 4]);
    }
}
