//! Numerical audits: Carleson-type sums over the Wilson sets, exact
//! pointwise inequalities, Carleson embedding constants, square-function
//! constants and the weighted Haar system.

use std::fmt::Write as _;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{Cube, GridSpec};
use crate::haar::CubeSumCache;
use crate::laminar::subset_sums;
use crate::operator::{Composition, Multiplication, SharedOperator};
use crate::paraproduct::{Paraproduct, ParaproductKind};
use crate::scalar::Scalar;
use crate::spectral::{generalized_max_rayleigh, operator_norm, DiagonalForm, NormOptions, NormResult, QuadraticForm};
use crate::step::StepFunction;
use crate::symbol::SymbolSequence;
use crate::weight::{Weight, WeightPower};
use crate::wilson::{haar_function, AlphaIndex, Region};

/// Regression cap applied to every lemma-sum ratio.
pub const LEMMA_SUM_CAP: f64 = 64.0;

/// Relative slack allowed on exact inequalities for rounding.
pub const EXACT_SLACK: f64 = 1e-12;

/// Where the worst ratio of an inequality was attained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Witness {
    /// A Wilson set `E_{alpha,I}`.
    Set(Cube, u32),
    /// A grid cube.
    Cube(Cube),
}

impl Witness {
    fn cube(self) -> Cube {
        match self {
            Self::Set(c, _) | Self::Cube(c) => c,
        }
    }

    fn alpha(self) -> u32 {
        match self {
            Self::Set(_, a) => a,
            Self::Cube(_) => 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AuditRecord<T> {
    pub inequality_id: String,
    pub weight_id: String,
    pub dim: u32,
    pub depth: u32,
    pub a2: T,
    /// LHS at the witness.
    pub lhs_max: T,
    /// RHS without the implicit constant, at the witness.
    pub rhs_base: T,
    pub ratio: T,
    /// Largest ratio when the root set itself is excluded from the sum.
    /// Equal to `ratio` for pointwise checks.
    pub ratio_strict: T,
    pub witness: Witness,
    pub cap: T,
    /// The cap is a proven constant rather than a regression bound.
    pub exact: bool,
}

impl<T: Scalar> AuditRecord<T> {
    pub fn pass(&self) -> bool {
        let limit = if self.exact { self.cap * (T::one() + T::lit(EXACT_SLACK)) } else { self.cap };
        self.ratio.is_finite() && self.ratio >= T::zero() && self.ratio <= limit
    }
}

#[derive(Clone, Debug, Default)]
pub struct AuditReport<T> {
    pub records: Vec<AuditRecord<T>>,
}

pub const AUDIT_CSV_HEADER: &str = "inequality_id,weight_id,d,L,A2,lhs_max,rhs_base,ratio,witness_cube,witness_alpha";

fn cube_label(grid: &GridSpec, c: Cube) -> String {
    let k = grid.coords(c);
    let parts: Vec<String> = k.iter().take(grid.dim() as usize).map(|v| v.to_string()).collect();
    format!("{}:{}", c.level, parts.join("/"))
}

impl<T: Scalar> AuditReport<T> {
    pub fn extend(&mut self, other: AuditReport<T>) {
        self.records.extend(other.records);
    }

    pub fn failures(&self) -> impl Iterator<Item = &AuditRecord<T>> {
        self.records.iter().filter(|r| !r.pass())
    }

    pub fn get(&self, inequality_id: &str) -> Option<&AuditRecord<T>> {
        self.records.iter().find(|r| r.inequality_id == inequality_id)
    }

    /// CSV rows (no header) in record order.
    pub fn to_csv_rows(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            let grid = GridSpec::new(r.dim, r.depth).expect("record grid");
            let _ = writeln!(
                out,
                "{},{},{},{},{:e},{:e},{:e},{:e},{},{}",
                r.inequality_id,
                r.weight_id,
                r.dim,
                r.depth,
                r.a2,
                r.lhs_max,
                r.rhs_base,
                r.ratio,
                cube_label(&grid, r.witness.cube()),
                r.witness.alpha()
            );
        }
        out
    }

    pub fn to_csv(&self) -> String {
        format!("{AUDIT_CSV_HEADER}\n{}", self.to_csv_rows())
    }
}

/// Per-slot quantities of one weight.
struct SlotData<T> {
    grid: GridSpec,
    a2: T,
    measure: Vec<T>,
    cube_avg_w: Vec<T>,
    coeff: [Vec<T>; 4],
    set_avg: [Vec<T>; 4],
}

fn idx(p: WeightPower) -> usize {
    match p {
        WeightPower::One => 0,
        WeightPower::Inverse => 1,
        WeightPower::Sqrt => 2,
        WeightPower::InvSqrt => 3,
    }
}

impl<T: Scalar> SlotData<T> {
    fn new(w: &Weight<T>) -> Self {
        let grid = w.grid();
        let powers = [WeightPower::One, WeightPower::Inverse, WeightPower::Sqrt, WeightPower::InvSqrt];
        let coeff = powers.map(|p| w.cache(p).haar_coefficients());
        let set_avg = powers.map(|p| w.cache(p).set_averages());
        let cw = w.cache(WeightPower::One);
        let labels: Vec<(Cube, u32)> = grid.haar_labels().collect();
        Self {
            grid,
            a2: w.a2_characteristic(),
            measure: labels.iter().map(|&(c, a)| Region::Wilson(c, AlphaIndex(a)).measure(&grid)).collect(),
            cube_avg_w: labels.iter().map(|&(c, _)| cw.cube_average(c)).collect(),
            coeff,
            set_avg,
        }
    }

    fn c(&self, p: WeightPower, s: usize) -> T {
        self.coeff[idx(p)][s]
    }

    fn avg(&self, p: WeightPower, s: usize) -> T {
        self.set_avg[idx(p)][s]
    }
}

/// One nested-sum inequality: summand per `(J,beta)` and RHS per root `(I,alpha)`.
struct SumSpec<T> {
    id: &'static str,
    term: fn(&SlotData<T>, usize) -> T,
    rhs: fn(&SlotData<T>, usize) -> T,
}

fn sum_specs<T: Scalar>() -> Vec<SumSpec<T>> {
    use WeightPower::*;
    vec![
        SumSpec {
            id: "sqfn_inv_sqrt_cube_avg",
            term: |s, i| s.c(InvSqrt, i).powi(2) * s.cube_avg_w[i],
            rhs: |s, i| s.a2 * s.a2 * s.measure[i],
        },
        SumSpec {
            id: "sqfn_inv_sqrt_set_avg",
            term: |s, i| s.c(InvSqrt, i).powi(2) * s.avg(One, i),
            rhs: |s, i| s.a2 * s.a2 * s.measure[i],
        },
        SumSpec {
            id: "sqfn_inv_sqrt_root_avg",
            term: |s, i| s.c(InvSqrt, i).powi(2) * s.avg(Sqrt, i).powi(2),
            rhs: |s, i| s.a2 * s.a2 * s.measure[i],
        },
        SumSpec {
            id: "sqfn_inv_weighted",
            term: |s, i| s.c(Inverse, i).powi(2) * s.avg(One, i),
            rhs: |s, i| s.a2 * s.a2 * s.avg(Inverse, i) * s.measure[i],
        },
        SumSpec {
            id: "cross_root_coeffs",
            term: |s, i| (s.c(Sqrt, i) * s.c(InvSqrt, i)).abs(),
            rhs: |s, i| s.a2.sqrt() * s.measure[i],
        },
        SumSpec {
            id: "inv_coeff_over_avg_sq",
            term: |s, i| s.c(Inverse, i).powi(2) / s.avg(Inverse, i).powi(2),
            rhs: |s, i| s.a2 * s.measure[i],
        },
        SumSpec {
            id: "inv_coeff_over_avg",
            term: |s, i| s.c(Inverse, i).powi(2) / s.avg(Inverse, i),
            rhs: |s, i| s.a2 * s.avg(Inverse, i) * s.measure[i],
        },
        SumSpec {
            id: "inv_coeff_over_avg_cubed",
            term: |s, i| s.c(Inverse, i).powi(2) / s.avg(Inverse, i).powi(3),
            rhs: |s, i| s.avg(One, i) * s.measure[i],
        },
        SumSpec {
            id: "cross_coeffs",
            term: |s, i| (s.c(One, i) * s.c(Inverse, i)).abs(),
            rhs: |s, i| s.a2 * s.measure[i],
        },
        SumSpec {
            id: "cross_coeffs_over_avg",
            term: |s, i| (s.c(One, i) * s.c(Inverse, i)).abs() / s.avg(Inverse, i),
            rhs: |s, i| s.a2 * s.avg(One, i) * s.measure[i],
        },
    ]
}

/// Identifiers of the nested-sum inequalities, without the mirror suffix.
pub fn lemma_sum_ids() -> Vec<&'static str> {
    sum_specs::<f64>().into_iter().map(|s| s.id).collect()
}

/// Identifiers of the exact pointwise checks, without the mirror suffix.
pub const POINTWISE_IDS: [&str; 6] = [
    "disbalanced_c_vs_set_avg",
    "set_avg_vs_cube_avg",
    "set_a2_vs_grid_a2",
    "root_avg_sq_vs_avg",
    "set_a2_at_least_one",
    "cube_avg_vs_inverse_avg",
];

/// Suffix of the `w <-> w^{-1}` versions.
pub const MIRROR_SUFFIX: &str = "_mirror";

struct Worst<T> {
    ratio: T,
    lhs: T,
    rhs: T,
    witness: Witness,
}

fn worst_over<T: Scalar>(items: impl Iterator<Item = (Witness, T, T)>) -> Worst<T> {
    let mut best = Worst { ratio: T::neg_infinity(), lhs: T::zero(), rhs: T::zero(), witness: Witness::Cube(Cube::ROOT) };
    for (witness, lhs, rhs) in items {
        let ratio = if rhs > T::zero() {
            lhs / rhs
        } else if lhs > T::zero() {
            T::infinity()
        } else {
            T::zero()
        };
        if ratio > best.ratio || best.ratio.is_nan() {
            best = Worst { ratio, lhs, rhs, witness };
        }
    }
    if best.ratio == T::neg_infinity() {
        best.ratio = T::zero();
    }
    best
}

fn audit_one_side<T: Scalar>(w: &Weight<T>, weight_id: &str, suffix: &str, cap: T) -> Vec<AuditRecord<T>> {
    let s = SlotData::new(w);
    let grid = s.grid;
    let labels: Vec<(Cube, u32)> = grid.haar_labels().collect();
    let mut out = Vec::new();
    let record = |id: &str, worst: Worst<T>, strict: T, cap: T, exact: bool| AuditRecord {
        inequality_id: format!("{id}{suffix}"),
        weight_id: weight_id.to_string(),
        dim: grid.dim(),
        depth: grid.depth(),
        a2: s.a2,
        lhs_max: worst.lhs,
        rhs_base: worst.rhs,
        ratio: worst.ratio,
        ratio_strict: strict,
        witness: worst.witness,
        cap,
        exact,
    };
    for spec in sum_specs::<T>() {
        let terms: Vec<T> = (0..labels.len()).map(|i| (spec.term)(&s, i)).collect();
        let sums = subset_sums(&grid, &terms);
        let rhs: Vec<T> = (0..labels.len()).map(|i| (spec.rhs)(&s, i)).collect();
        let worst = worst_over(labels.iter().enumerate().map(|(i, &(c, a))| (Witness::Set(c, a), sums[i], rhs[i])));
        let strict = worst_over(
            labels.iter().enumerate().map(|(i, &(c, a))| (Witness::Set(c, a), sums[i] - terms[i], rhs[i])),
        );
        out.push(record(spec.id, worst, strict.ratio, cap, false));
    }
    let one = T::one();
    let four = T::lit(4.0);
    let d = grid.dim() as i32;
    let cw = w.cache(WeightPower::One);
    let set_items = |f: &dyn Fn(usize) -> (T, T)| {
        worst_over(labels.iter().enumerate().map(|(i, &(c, a))| {
            let (l, r) = f(i);
            (Witness::Set(c, a), l, r)
        }))
    };
    let pointwise: [(&str, Worst<T>); 6] = [
        (
            POINTWISE_IDS[0],
            set_items(&|i| {
                let (c, a) = labels[i];
                let (w1, w2) = cw.half_integrals(c, AlphaIndex(a));
                let half = s.measure[i] / T::lit(2.0);
                let c2 = (w1 / half) * (w2 / half) / s.avg(WeightPower::One, i);
                (c2, four * s.avg(WeightPower::One, i))
            }),
        ),
        (POINTWISE_IDS[1], set_items(&|i| (four * s.avg(WeightPower::One, i), T::pow2(d + 1) * s.cube_avg_w[i]))),
        (
            POINTWISE_IDS[2],
            set_items(&|i| (s.avg(WeightPower::One, i) * s.avg(WeightPower::Inverse, i), T::pow2(2 * d) * s.a2)),
        ),
        (POINTWISE_IDS[3], set_items(&|i| (s.avg(WeightPower::Sqrt, i).powi(2), s.avg(WeightPower::One, i)))),
        (POINTWISE_IDS[4], set_items(&|i| (one, s.avg(WeightPower::One, i) * s.avg(WeightPower::Inverse, i)))),
        (
            POINTWISE_IDS[5],
            worst_over(grid.cubes().map(|c| {
                let ci = w.cache(WeightPower::Inverse);
                (Witness::Cube(c), cw.cube_average(c), s.a2 / ci.cube_average(c))
            })),
        ),
    ];
    for (id, worst) in pointwise {
        let r = worst.ratio;
        out.push(record(id, worst, r, one, true));
    }
    out
}

/// Every nested-sum and pointwise inequality for `w`, then for `w^{-1}`
/// (ids with [`MIRROR_SUFFIX`]). Sums are inclusive: the root set is part of
/// its own sum; the strict reading is kept in `ratio_strict`.
pub fn audit_lemma_sums<T: Scalar>(w: &Weight<T>, weight_id: &str) -> AuditReport<T> {
    let cap = T::lit(LEMMA_SUM_CAP);
    let mut records = audit_one_side(w, weight_id, "", cap);
    records.extend(audit_one_side(&w.reciprocal(), weight_id, MIRROR_SUFFIX, cap));
    AuditReport { records }
}

/// Nonnegative sequence and weight for the Carleson embedding.
#[derive(Clone, Copy, Debug)]
pub struct CarlesonInput<'a, T> {
    pub sequence: &'a SymbolSequence<T>,
    pub weight: &'a Weight<T>,
}

#[derive(Clone, Debug)]
pub struct CarlesonConstants<T> {
    /// `max (1/|E|) sum_{E' ⊆ E} a <w>_{E'}^2 / <w>_E`.
    pub testing: T,
    /// Same with the root set left out of its sum.
    pub testing_strict: T,
    pub testing_witness: (Cube, u32),
    /// Squared norm of `f -> (sqrt(a) <w^{1/2} f>_E)`.
    pub embedding: T,
    pub norm: NormResult<T>,
}

impl<T: Scalar> CarlesonConstants<T> {
    /// `B / A`, zero when both vanish.
    pub fn ratio(&self) -> T {
        if self.testing > T::zero() {
            self.embedding / self.testing
        } else if self.embedding > T::zero() {
            T::infinity()
        } else {
            T::zero()
        }
    }
}

pub fn carleson_constants<T: Scalar>(input: CarlesonInput<'_, T>, opts: &NormOptions) -> Result<CarlesonConstants<T>> {
    let CarlesonInput { sequence: a, weight: w } = input;
    let grid = w.grid();
    grid.ensure_same(&a.grid())?;
    a.ensure_nonnegative()?;
    let avg = w.cache(WeightPower::One).set_averages();
    let labels: Vec<(Cube, u32)> = grid.haar_labels().collect();
    let terms: Vec<T> = a.values().iter().zip(&avg).map(|(&ai, &m)| ai * m * m).collect();
    let sums = subset_sums(&grid, &terms);
    let mut testing = T::zero();
    let mut testing_strict = T::zero();
    let mut witness = labels[0];
    for (i, &(c, al)) in labels.iter().enumerate() {
        let e: T = Region::Wilson(c, AlphaIndex(al)).measure(&grid);
        let v = sums[i] / (e * avg[i]);
        if v > testing {
            testing = v;
            witness = (c, al);
        }
        testing_strict = testing_strict.max((sums[i] - terms[i]) / (e * avg[i]));
    }
    let root_a = Arc::new(a.map(|v| v.sqrt()));
    let ops: Vec<SharedOperator<T>> = vec![
        Arc::new(Paraproduct::new(ParaproductKind::Averaging, root_a, "sqrt a")),
        Arc::new(Multiplication::new(w.get(WeightPower::Sqrt).clone(), "w^1/2")),
    ];
    let op = Composition::new(ops)?;
    let norm = operator_norm(&op, &NormOptions { restrict_mean_zero: false, ..*opts })?;
    Ok(CarlesonConstants {
        testing,
        testing_strict,
        testing_witness: witness,
        embedding: norm.value * norm.value,
        norm,
    })
}

/// Carleson sequences arising in the square-function argument.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CarlesonSequence {
    /// `|(w^{-1/2})^(J,beta)|^2 <w>_J`.
    InvSqrtCoefficients,
    /// `D_J(w,beta)^2 / <w>_J = w^(J,beta)^2 / (<w>_E^2 <w>_J)`.
    Disbalanced,
}

impl CarlesonSequence {
    pub const ALL: [CarlesonSequence; 2] = [Self::InvSqrtCoefficients, Self::Disbalanced];

    pub fn id(self) -> &'static str {
        match self {
            Self::InvSqrtCoefficients => "carleson_inv_sqrt_coeffs",
            Self::Disbalanced => "carleson_disbalanced",
        }
    }

    pub fn build<T: Scalar>(self, w: &Weight<T>) -> SymbolSequence<T> {
        let grid = w.grid();
        let cw = w.cache(WeightPower::One);
        let set_avg = cw.set_averages();
        let values: Vec<T> = match self {
            Self::InvSqrtCoefficients => {
                let c = w.cache(WeightPower::InvSqrt).haar_coefficients();
                grid.haar_labels().zip(c).map(|((cube, _), x)| x * x * cw.cube_average(cube)).collect()
            }
            Self::Disbalanced => {
                let c = cw.haar_coefficients();
                grid.haar_labels()
                    .enumerate()
                    .map(|(i, (cube, _))| c[i] * c[i] / (set_avg[i] * set_avg[i] * cw.cube_average(cube)))
                    .collect()
            }
        };
        SymbolSequence::new(grid, values).expect("length")
    }
}

#[derive(Clone, Debug)]
pub struct SquareFunctionConstants<T> {
    /// `max sum |f^|^2 <w>_I / ||f||^2_{L^2(w)}` over mean-zero `f`.
    pub upper: NormResult<T>,
    /// `max ||f||^2_{L^2(w)} / sum |f^|^2 <w>_I` over mean-zero `f`.
    pub lower: NormResult<T>,
}

/// `D_w`: Haar-diagonal with entry `<w>_I` on every `h^alpha_I`, ignoring the mean.
pub fn square_function_form<T: Scalar>(w: &Weight<T>) -> DiagonalForm<T> {
    let cw = w.cache(WeightPower::One);
    DiagonalForm::Haar { mean: None, coeffs: w.grid().haar_labels().map(|(c, _)| cw.cube_average(c)).collect() }
}

pub fn square_function_constants<T: Scalar>(w: &Weight<T>, opts: &NormOptions) -> Result<SquareFunctionConstants<T>> {
    let grid = w.grid();
    let d_w = square_function_form(w);
    let m_w = DiagonalForm::Cell(w.base().cells().to_vec());
    let o = NormOptions { restrict_mean_zero: true, ..*opts };
    let upper = generalized_max_rayleigh(grid, QuadraticForm::Diagonal(d_w.clone()), m_w.clone(), &o)?;
    let lower = generalized_max_rayleigh(grid, QuadraticForm::Diagonal(m_w), d_w, &o)?;
    Ok(SquareFunctionConstants { upper, lower })
}

/// `<g, h^{w,alpha}_I>_{L^2(w)}` for every label, in slot order, in `O(N)`.
pub fn weighted_haar_coefficients<T: Scalar>(g: &StepFunction<T>, w: &Weight<T>) -> Result<Vec<T>> {
    let grid = w.grid();
    grid.ensure_same(&g.grid())?;
    let gw = CubeSumCache::new(&(g * w.base()));
    let cw = w.cache(WeightPower::One);
    grid.haar_labels()
        .map(|(c, a)| {
            let al = AlphaIndex(a);
            let (w1, w2) = cw.half_integrals(c, al);
            if !(w1 > T::zero() && w2 > T::zero()) {
                return Err(Error::DegenerateWeight { level: c.level, alpha: a });
            }
            let (g1, g2) = gw.half_integrals(c, al);
            Ok(((w1 / w2).sqrt() * g2 - (w2 / w1).sqrt() * g1) / (w1 + w2).sqrt())
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct BesselSample<T> {
    /// `sum <g, h^w>_w^2`.
    pub energy: T,
    /// `||g||^2_{L^2(w)}`.
    pub norm_sq: T,
    /// `(int g w)^2 / w(Q_0)`, the part carried by constants.
    pub constant_part: T,
}

#[derive(Clone, Debug)]
pub struct WeightedParsevalAudit<T> {
    /// `max |Gram - I|` over the weighted Haar system in `L^2(w)`.
    pub gram_deviation: T,
    pub samples: Vec<BesselSample<T>>,
}

impl<T: Scalar> WeightedParsevalAudit<T> {
    /// Largest `energy / norm_sq`; at most 1 by Bessel.
    pub fn max_bessel_ratio(&self) -> T {
        self.samples.iter().fold(T::zero(), |m, s| if s.norm_sq > T::zero() { m.max(s.energy / s.norm_sq) } else { m })
    }

    /// Largest `|norm_sq - constant_part - energy| / norm_sq`.
    pub fn max_completeness_defect(&self) -> T {
        self.samples.iter().fold(T::zero(), |m, s| {
            if s.norm_sq > T::zero() {
                m.max((s.norm_sq - s.constant_part - s.energy).abs() / s.norm_sq)
            } else {
                m
            }
        })
    }
}

/// Gram matrix of `{h^{w,alpha}_I}` in `L^2(w)` and Bessel on the given test functions.
pub fn audit_weighted_haar_parseval<T: Scalar>(w: &Weight<T>, tests: &[StepFunction<T>]) -> Result<WeightedParsevalAudit<T>> {
    let grid = w.grid();
    let mut gram_deviation = T::zero();
    for (j, (c, a)) in grid.haar_labels().enumerate() {
        let h = haar_function(&grid, Some(w.base()), c, AlphaIndex(a))?;
        let col = weighted_haar_coefficients(&h, w)?;
        for (i, &v) in col.iter().enumerate() {
            let want = if i == j { T::one() } else { T::zero() };
            gram_deviation = gram_deviation.max((v - want).abs());
        }
    }
    let wq = w.cache(WeightPower::One).cube_integral(Cube::ROOT);
    let samples = tests
        .iter()
        .map(|g| {
            let coeffs = weighted_haar_coefficients(g, w)?;
            let gw = g * w.base();
            let total = gw.integral();
            Ok(BesselSample {
                energy: coeffs.iter().map(|&x| x * x).sum(),
                norm_sq: gw.inner(g),
                constant_part: total * total / wq,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(WeightedParsevalAudit { gram_deviation, samples })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn by_hand() -> Weight<f64> {
        let g = GridSpec::new(1, 1).unwrap();
        Weight::new(StepFunction::new(g, vec![4.0, 1.0]).unwrap()).unwrap()
    }

    #[test]
    fn cross_coefficient_sum_by_hand() {
        let r = audit_lemma_sums(&by_hand(), "w");
        let rec = r.get("cross_coeffs").unwrap();
        assert!((rec.lhs_max - 0.5625).abs() < 1e-14);
        assert!((rec.rhs_base - 1.5625).abs() < 1e-14);
        assert_eq!(rec.witness, Witness::Set(Cube::ROOT, 1));
    }

    #[test]
    fn unit_weight_sums_vanish() {
        let g = GridSpec::new(2, 2).unwrap();
        let w = Weight::new(StepFunction::<f64>::constant(g, 1.0)).unwrap();
        let r = audit_lemma_sums(&w, "unit");
        for rec in &r.records {
            if lemma_sum_ids().iter().any(|id| rec.inequality_id.starts_with(id)) {
                assert_eq!(rec.lhs_max, 0.0, "{}", rec.inequality_id);
            }
            assert!(rec.pass(), "{}", rec.inequality_id);
        }
        let c = r.get("disbalanced_c_vs_set_avg").unwrap();
        assert!((c.ratio - 0.25).abs() < 1e-15);
        assert_eq!(r.records.len(), 2 * (lemma_sum_ids().len() + POINTWISE_IDS.len()));
    }

    #[test]
    fn square_function_by_hand() {
        let c = square_function_constants(&by_hand(), &NormOptions::default()).unwrap();
        assert!((c.upper.value - 1.0).abs() < 1e-12);
        assert!((c.lower.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn carleson_zero_sequence() {
        let w = by_hand();
        let a = SymbolSequence::zeros(w.grid());
        let c = carleson_constants(CarlesonInput { sequence: &a, weight: &w }, &NormOptions::default()).unwrap();
        assert_eq!(c.testing, 0.0);
        assert!(c.embedding.abs() < 1e-24);
        assert_eq!(c.ratio(), 0.0);
    }

    #[test]
    fn negative_sequence_is_rejected() {
        let w = by_hand();
        let a = SymbolSequence::constant(w.grid(), -1.0);
        assert!(carleson_constants(CarlesonInput { sequence: &a, weight: &w }, &NormOptions::default()).is_err());
    }

    #[test]
    fn csv_shape() {
        let r = audit_lemma_sums(&by_hand(), "w7");
        let csv = r.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(AUDIT_CSV_HEADER));
        let row = lines.next().unwrap();
        assert_eq!(row.split(',').count(), 10);
        assert!(row.starts_with("sqfn_inv_sqrt_cube_avg,w7,1,1,"));
        assert!(row.ends_with(",0:0,1"));
    }
}
