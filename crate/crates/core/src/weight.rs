//! A2 weights: cached powers, the dyadic A2 characteristic, reproducible
//! recipes and corpora spanning a range of characteristics.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::{Cube, GridSpec};
use crate::haar::CubeSumCache;
use crate::scalar::Scalar;
use crate::step::StepFunction;

/// Which cellwise power of the weight.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeightPower {
    /// `w`
    One,
    /// `w^{-1}`
    Inverse,
    /// `w^{1/2}`
    Sqrt,
    /// `w^{-1/2}`
    InvSqrt,
}

/// A strictly positive step function with its powers and their cube sums.
#[derive(Clone, Debug)]
pub struct Weight<T> {
    funcs: [StepFunction<T>; 4],
    caches: [CubeSumCache<T>; 4],
}

fn slot(p: WeightPower) -> usize {
    match p {
        WeightPower::One => 0,
        WeightPower::Inverse => 1,
        WeightPower::Sqrt => 2,
        WeightPower::InvSqrt => 3,
    }
}

impl<T: Scalar> Weight<T> {
    pub fn new(w: StepFunction<T>) -> Result<Self> {
        w.ensure_positive()?;
        let inv = w.map(|v| T::one() / v);
        let sqrt = w.map(|v| v.sqrt());
        let inv_sqrt = w.map(|v| T::one() / v.sqrt());
        let funcs = [w, inv, sqrt, inv_sqrt];
        let caches = std::array::from_fn(|i| CubeSumCache::new(&funcs[i]));
        Ok(Self { funcs, caches })
    }

    pub fn grid(&self) -> GridSpec {
        self.funcs[0].grid()
    }

    pub fn get(&self, p: WeightPower) -> &StepFunction<T> {
        &self.funcs[slot(p)]
    }

    pub fn cache(&self, p: WeightPower) -> &CubeSumCache<T> {
        &self.caches[slot(p)]
    }

    pub fn base(&self) -> &StepFunction<T> {
        self.get(WeightPower::One)
    }

    /// The weight `w^{-1}`, reusing the stored powers so that every derived
    /// quantity is bitwise symmetric.
    pub fn reciprocal(&self) -> Self {
        let [a, b, c, d] = self.funcs.clone();
        let [ca, cb, cc, cd] = self.caches.clone();
        Self { funcs: [b, a, d, c], caches: [cb, ca, cd, cc] }
    }

    /// `<w>_Q <w^{-1}>_Q` for one cube.
    pub fn a2_product(&self, cube: Cube) -> T {
        self.cache(WeightPower::One).cube_average(cube) * self.cache(WeightPower::Inverse).cube_average(cube)
    }

    /// `[w]_{A2}` over every grid cube, levels `0..=L`, with a maximizing cube.
    pub fn a2_with_witness(&self) -> (T, Cube) {
        let g = self.grid();
        let (cw, ci) = (self.cache(WeightPower::One), self.cache(WeightPower::Inverse));
        let mut best = (T::neg_infinity(), Cube::ROOT);
        for level in 0..=g.depth() {
            let m: T = g.measure(Cube { level, index: 0 });
            let inv_m2 = T::one() / (m * m);
            for (index, (&a, &b)) in cw.cube_integrals(level).iter().zip(ci.cube_integrals(level)).enumerate() {
                let v = a * b * inv_m2;
                if v > best.0 {
                    best = (v, Cube { level, index });
                }
            }
        }
        best
    }

    pub fn a2_characteristic(&self) -> T {
        self.a2_with_witness().0
    }
}

pub fn a2_characteristic<T: Scalar>(w: &Weight<T>) -> T {
    w.a2_characteristic()
}

/// Weight family and its parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum WeightFamily {
    Constant { value: f64 },
    /// `1` below `cut` on coordinate 0, `high` at and above it; `cut` is snapped
    /// down to a cell boundary.
    Step { high: f64, cut: f64 },
    /// `|x|^a` in `d = 1`, `max_i x_i ^ a` in higher dimension.
    Power { exponent: f64 },
    /// Dyadic multiplicative cascade with per-cube factors `K^u`, `u ~ U(-1,1)`.
    Cascade { factor: f64, seed: u64 },
}

impl WeightFamily {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Constant { .. } => "constant",
            Self::Step { .. } => "step",
            Self::Power { .. } => "power",
            Self::Cascade { .. } => "cascade",
        }
    }

    /// Seed carried by the recipe, 0 for deterministic families.
    pub fn seed(&self) -> u64 {
        match self {
            Self::Cascade { seed, .. } => *seed,
            _ => 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightRecipe {
    pub family: WeightFamily,
    pub dim: u32,
    pub depth: u32,
}

impl WeightRecipe {
    pub fn grid(&self) -> Result<GridSpec> {
        GridSpec::new(self.dim, self.depth)
    }

    /// `key = value` pairs in a fixed order.
    pub fn to_pairs(&self) -> Vec<(String, String)> {
        let mut v = vec![
            ("family".to_string(), self.family.name().to_string()),
            ("d".to_string(), self.dim.to_string()),
            ("L".to_string(), self.depth.to_string()),
        ];
        let mut push = |k: &str, x: String| v.push((k.to_string(), x));
        match &self.family {
            WeightFamily::Constant { value } => push("value", value.to_string()),
            WeightFamily::Step { high, cut } => {
                push("high", high.to_string());
                push("cut", cut.to_string());
            }
            WeightFamily::Power { exponent } => push("exponent", exponent.to_string()),
            WeightFamily::Cascade { factor, seed } => {
                push("factor", factor.to_string());
                push("seed", seed.to_string());
            }
        }
        v
    }

    pub fn to_text(&self) -> String {
        self.to_pairs().into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<Self> {
        let map: std::collections::BTreeMap<&str, &str> = pairs.into_iter().collect();
        let get = |k: &str| map.get(k).copied().ok_or_else(|| Error::InvalidParameter(format!("recipe missing `{k}`")));
        let num = |k: &str| -> Result<f64> {
            get(k)?.parse::<f64>().map_err(|_| Error::InvalidParameter(format!("recipe `{k}` is not a number")))
        };
        let int = |k: &str| -> Result<u64> {
            get(k)?.parse::<u64>().map_err(|_| Error::InvalidParameter(format!("recipe `{k}` is not an integer")))
        };
        let family = match get("family")? {
            "constant" => WeightFamily::Constant { value: num("value")? },
            "step" => WeightFamily::Step { high: num("high")?, cut: num("cut")? },
            "power" => WeightFamily::Power { exponent: num("exponent")? },
            "cascade" => WeightFamily::Cascade { factor: num("factor")?, seed: int("seed")? },
            other => return Err(Error::InvalidParameter(format!("unknown weight family `{other}`"))),
        };
        Ok(Self { family, dim: int("d")? as u32, depth: int("L")? as u32 })
    }

    /// Parses `key = value` lines; blank lines and `#` comments are skipped.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or(Error::Parse { line: i + 1, message: "expected `key = value`".into() })?;
            pairs.push((k.trim(), v.trim()));
        }
        Self::from_pairs(pairs)
    }
}

impl fmt::Display for WeightRecipe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.to_pairs().into_iter().map(|(k, v)| format!("{k}={v}")).collect();
        f.write_str(&parts.join(" "))
    }
}

fn check_range(ok: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter(msg()))
    }
}

/// Cell values of the recipe in `f64`.
fn cells_f64(recipe: &WeightRecipe, grid: GridSpec) -> Result<Vec<f64>> {
    let n = grid.cell_count();
    let d = grid.dim() as usize;
    let side = grid.side_cells(0);
    let h = 1.0 / side as f64;
    match recipe.family {
        WeightFamily::Constant { value } => {
            check_range(value > 0.0 && value.is_finite(), || format!("constant must be positive, got {value}"))?;
            Ok(vec![value; n])
        }
        WeightFamily::Step { high, cut } => {
            check_range(high > 0.0 && high.is_finite(), || format!("step height must be positive, got {high}"))?;
            check_range((0.0..=1.0).contains(&cut), || format!("step cut must lie in [0,1], got {cut}"))?;
            let k = (cut * side as f64).floor() as usize;
            let l = grid.depth();
            Ok((0..n)
                .map(|i| {
                    let c = grid.coords(Cube { level: l, index: i });
                    if c[0] >= k {
                        high
                    } else {
                        1.0
                    }
                })
                .collect())
        }
        WeightFamily::Power { exponent: a } => {
            let lim = d as f64;
            check_range(a > -lim && a < lim && a.is_finite(), || format!("power exponent must lie in (-{d}, {d}), got {a}"))?;
            let l = grid.depth();
            if d == 1 {
                Ok((0..n)
                    .map(|i| {
                        let (x0, x1) = (i as f64 * h, (i + 1) as f64 * h);
                        (x1.powf(a + 1.0) - x0.powf(a + 1.0)) / ((a + 1.0) * h)
                    })
                    .collect())
            } else {
                let subs = 1usize << d;
                Ok((0..n)
                    .map(|i| {
                        let c = grid.coords(Cube { level: l, index: i });
                        let mut s = 0.0;
                        for b in 0..subs {
                            let mut m: f64 = 0.0;
                            for (axis, &ci) in c.iter().take(d).enumerate() {
                                let bit = (b >> (d - 1 - axis)) & 1;
                                m = m.max((ci as f64 + 0.25 + 0.5 * bit as f64) * h);
                            }
                            s += m.powf(a);
                        }
                        s / subs as f64
                    })
                    .collect())
            }
        }
        WeightFamily::Cascade { factor, seed } => {
            check_range(factor >= 1.0 && factor.is_finite(), || format!("cascade factor must be at least 1, got {factor}"))?;
            let exps = cascade_exponents(grid, seed);
            let ln_k = factor.ln();
            Ok(exps.into_iter().map(|e| (e * ln_k).exp()).collect())
        }
    }
}

/// Per cell: sum of `u` over its ancestors at levels `1..=L` (the cell included).
fn cascade_exponents(grid: GridSpec, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = vec![0.0f64];
    for level in 1..=grid.depth() {
        let n = grid.cubes_at(level);
        let mut next = vec![0.0; n];
        for (index, slot) in next.iter_mut().enumerate() {
            let parent = grid.parent(Cube { level, index }).expect("level >= 1");
            *slot = acc[parent.index] + rng.gen_range(-1.0..1.0);
        }
        acc = next;
    }
    acc
}

/// Builds the weight described by `recipe` (computed in `f64`, then cast).
pub fn generate<T: Scalar>(recipe: &WeightRecipe) -> Result<Weight<T>> {
    let grid = recipe.grid()?;
    let cells = cells_f64(recipe, grid)?;
    if let Some(i) = cells.iter().position(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::NonPositiveWeight { cell: i, value: cells[i] });
    }
    Weight::new(StepFunction::new(grid, cells.into_iter().map(T::lit).collect())?)
}

/// Parameters of a corpus sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct CorpusSpec {
    pub dim: u32,
    pub depth: u32,
    pub count: usize,
    /// Upper end of the targeted `[w]_{A2}` range; the lower end is 1.
    pub a2_max: f64,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct CorpusMember<T> {
    pub id: String,
    pub recipe: WeightRecipe,
    pub weight: Weight<T>,
    pub target: f64,
    pub a2: T,
}

#[derive(Clone, Debug)]
pub struct Corpus<T> {
    pub members: Vec<CorpusMember<T>>,
    pub warnings: Vec<String>,
}

/// Family order for non-constant members.
const CYCLE: [&str; 3] = ["step", "power", "cascade"];

fn recipe_for(name: &str, param: f64, dim: u32, depth: u32, seed: u64) -> WeightRecipe {
    let family = match name {
        "step" => WeightFamily::Step { high: param, cut: 1.0 / 3.0 },
        "power" => WeightFamily::Power { exponent: -param },
        "cascade" => WeightFamily::Cascade { factor: param, seed },
        _ => WeightFamily::Constant { value: 1.0 },
    };
    WeightRecipe { family, dim, depth }
}

/// Parameter range searched for each family (monotone in `[w]_{A2}`).
/// Power weights use the singular side, exponent `-param`.
fn param_range(name: &str, dim: u32) -> (f64, f64) {
    match name {
        "step" => (1.0, 1e12),
        "power" => (0.0, dim as f64 * (1.0 - 1e-9)),
        _ => (1.0, 1e8),
    }
}

fn a2_of(recipe: &WeightRecipe) -> Result<f64> {
    Ok(generate::<f64>(recipe)?.a2_characteristic())
}

/// Bisects the parameter of the member's family towards `target`, falling
/// back to the other families in cycle order when its range is too small.
/// `Err` carries the recipe with the largest reachable characteristic.
#[allow(clippy::type_complexity)]
fn fit_target(i: usize, target: f64, spec: &CorpusSpec, seed: u64) -> Result<std::result::Result<WeightRecipe, (WeightRecipe, f64)>> {
    let mut best: Option<(WeightRecipe, f64)> = None;
    for shift in 0..CYCLE.len() {
        let name = CYCLE[(i - 1 + shift) % CYCLE.len()];
        let (lo, hi) = param_range(name, spec.dim);
        let top_recipe = recipe_for(name, hi, spec.dim, spec.depth, seed);
        let top = a2_of(&top_recipe)?;
        if top < target {
            if best.as_ref().map_or(true, |(_, b)| top > *b) {
                best = Some((top_recipe, top));
            }
            continue;
        }
        let log_scale = name != "power";
        let (mut a, mut b) = if log_scale { (lo.ln(), hi.ln()) } else { (lo, hi) };
        let map = |x: f64| if log_scale { x.exp() } else { x };
        for _ in 0..80 {
            let mid = 0.5 * (a + b);
            if a2_of(&recipe_for(name, map(mid), spec.dim, spec.depth, seed))? < target {
                a = mid;
            } else {
                b = mid;
            }
        }
        return Ok(Ok(recipe_for(name, map(b), spec.dim, spec.depth, seed)));
    }
    Ok(Err(best.expect("at least one family tried")))
}

/// Deterministic corpus with targets `A_max^{i/(n-1)}`; member 0 is constant.
/// Each non-constant member bisects its family parameter towards its target.
pub fn corpus<T: Scalar>(spec: &CorpusSpec) -> Result<Corpus<T>> {
    GridSpec::new(spec.dim, spec.depth)?;
    if spec.count == 0 {
        return Ok(Corpus { members: Vec::new(), warnings: Vec::new() });
    }
    check_range(spec.a2_max >= 1.0, || format!("a2_max must be at least 1, got {}", spec.a2_max))?;
    let mut members = Vec::with_capacity(spec.count);
    let mut warnings = Vec::new();
    for i in 0..spec.count {
        let target = if spec.count == 1 { 1.0 } else { spec.a2_max.powf(i as f64 / (spec.count - 1) as f64) };
        let seed = spec.seed.wrapping_add(i as u64);
        let recipe = if i == 0 || target <= 1.0 {
            recipe_for("constant", 1.0, spec.dim, spec.depth, seed)
        } else {
            match fit_target(i, target, spec, seed)? {
                Ok(r) => r,
                Err((best, top)) => {
                    warnings.push(format!(
                        "member {i}: target [w]_A2 = {target:.6} is not reachable at d={} L={}; achieved maximum {top:.6}",
                        spec.dim, spec.depth
                    ));
                    best
                }
            }
        };
        let weight = generate::<T>(&recipe)?;
        let a2 = weight.a2_characteristic();
        members.push(CorpusMember { id: format!("w{i:03}"), recipe, weight, target, a2 });
    }
    Ok(Corpus { members, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn a2_by_hand() {
        let g = GridSpec::new(1, 1).unwrap();
        let w = Weight::new(StepFunction::<f64>::new(g, vec![4.0, 1.0]).unwrap()).unwrap();
        let (a2, cube) = w.a2_with_witness();
        assert!((a2 - 1.5625).abs() < 1e-15);
        assert_eq!(cube, Cube::ROOT);
    }

    #[test]
    fn constants_have_unit_characteristic() {
        for c in [1.0, 0.3, 17.0] {
            let r = WeightRecipe { family: WeightFamily::Constant { value: c }, dim: 2, depth: 3 };
            assert!((generate::<f64>(&r).unwrap().a2_characteristic() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn reciprocal_is_exactly_symmetric() {
        let g = GridSpec::new(2, 3).unwrap();
        let w = Weight::new(StepFunction::<f64>::random(g, 4, 0.1, 5.0)).unwrap();
        assert_eq!(w.a2_characteristic(), w.reciprocal().a2_characteristic());
    }

    #[test]
    fn recipe_text_round_trip() {
        for family in [
            WeightFamily::Constant { value: 2.5 },
            WeightFamily::Step { high: 40.0, cut: 0.375 },
            WeightFamily::Power { exponent: -0.25 },
            WeightFamily::Cascade { factor: 4.0, seed: 7 },
        ] {
            let r = WeightRecipe { family, dim: 1, depth: 6 };
            assert_eq!(WeightRecipe::from_text(&r.to_text()).unwrap(), r);
        }
        assert!(WeightRecipe::from_text("family = sine\nd = 1\nL = 2\n").is_err());
        assert!(WeightRecipe::from_text("family = power\nd = 1\n").is_err());
    }

    #[test]
    fn parameter_ranges_are_enforced() {
        let bad = [
            WeightFamily::Power { exponent: 1.0 },
            WeightFamily::Power { exponent: -1.5 },
            WeightFamily::Cascade { factor: 0.5, seed: 1 },
            WeightFamily::Step { high: -1.0, cut: 0.5 },
            WeightFamily::Constant { value: 0.0 },
        ];
        for family in bad {
            let r = WeightRecipe { family, dim: 1, depth: 4 };
            assert!(generate::<f64>(&r).is_err(), "{r}");
        }
        let ok = WeightRecipe { family: WeightFamily::Power { exponent: 1.5 }, dim: 2, depth: 3 };
        assert!(generate::<f64>(&ok).is_ok());
    }

    #[test]
    fn single_member_corpus_is_constant() {
        let c = corpus::<f64>(&CorpusSpec { dim: 1, depth: 4, count: 1, a2_max: 1.0, seed: 0 }).unwrap();
        assert_eq!(c.members.len(), 1);
        assert_eq!(c.members[0].recipe.family, WeightFamily::Constant { value: 1.0 });
        assert_eq!(c.members[0].a2, 1.0);
    }
}
