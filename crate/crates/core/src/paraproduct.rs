//! Paraproducts, Haar multipliers, multiplication operators and the
//! nine-term resolution of a conjugated Haar multiplier.

use std::fmt;
use std::sync::Arc;

use crate::error::Result;
use crate::grid::{Cube, GridSpec};
use crate::haar::{synthesize_indicators, CubeSumCache, HaarSpectrum};
use crate::laminar::{half_sums, subset_sums};
use crate::operator::{LinearOperator, OperatorLabel};
use crate::scalar::Scalar;
use crate::step::StepFunction;
use crate::symbol::SymbolSequence;
use crate::wilson::{relation, AlphaIndex, Region, SetRelation};

/// The three paraproduct types `P^{(e1,e2)}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ParaproductKind {
    /// `(0,0)`: `sum a f^ h`.
    Diagonal,
    /// `(0,1)`: `sum a <f>_E h`.
    Averaging,
    /// `(1,0)`: `sum a f^ h^1_E`.
    Indicator,
}

impl ParaproductKind {
    pub const ALL: [ParaproductKind; 3] = [Self::Averaging, Self::Indicator, Self::Diagonal];

    /// `"00"`, `"01"` or `"10"`.
    pub fn code(self) -> &'static str {
        match self {
            Self::Diagonal => "00",
            Self::Averaging => "01",
            Self::Indicator => "10",
        }
    }

    pub fn from_code(code: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.code() == code)
    }

    pub fn adjoint(self) -> Self {
        match self {
            Self::Diagonal => Self::Diagonal,
            Self::Averaging => Self::Indicator,
            Self::Indicator => Self::Averaging,
        }
    }
}

impl fmt::Display for ParaproductKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// `a .* x` in slot order.
fn times<T: Scalar>(a: &[T], mut x: Vec<T>) -> Vec<T> {
    x.iter_mut().zip(a).for_each(|(v, &s)| *v *= s);
    x
}

/// Symbol-weighted coefficient vector fed to the output stage of a paraproduct.
fn input_stage<T: Scalar>(kind: ParaproductKind, a: &SymbolSequence<T>, f: &StepFunction<T>) -> Vec<T> {
    let cache = CubeSumCache::new(f);
    let raw = match kind {
        ParaproductKind::Averaging => cache.set_averages(),
        ParaproductKind::Diagonal | ParaproductKind::Indicator => cache.haar_coefficients(),
    };
    times(a.values(), raw)
}

fn output_stage<T: Scalar>(kind: ParaproductKind, grid: GridSpec, coeffs: Vec<T>) -> StepFunction<T> {
    match kind {
        ParaproductKind::Indicator => synthesize_indicators(&grid, T::zero(), &coeffs),
        ParaproductKind::Diagonal | ParaproductKind::Averaging => HaarSpectrum::new(grid, T::zero(), coeffs).synthesize(),
    }
}

pub fn apply_paraproduct<T: Scalar>(
    kind: ParaproductKind,
    a: &SymbolSequence<T>,
    f: &StepFunction<T>,
) -> Result<StepFunction<T>> {
    a.grid().ensure_same(&f.grid())?;
    Ok(output_stage(kind, f.grid(), input_stage(kind, a, f)))
}

/// `T_sigma f = sum sigma f^ h`.
pub fn apply_multiplier<T: Scalar>(sigma: &SymbolSequence<T>, f: &StepFunction<T>) -> Result<StepFunction<T>> {
    apply_paraproduct(ParaproductKind::Diagonal, sigma, f)
}

/// `P^{kind}_a` as an operator.
#[derive(Clone, Debug)]
pub struct Paraproduct<T> {
    pub kind: ParaproductKind,
    pub symbol: Arc<SymbolSequence<T>>,
    pub name: String,
}

impl<T: Scalar> Paraproduct<T> {
    pub fn new(kind: ParaproductKind, symbol: Arc<SymbolSequence<T>>, name: impl Into<String>) -> Self {
        Self { kind, symbol, name: name.into() }
    }
}

impl<T: Scalar> LinearOperator<T> for Paraproduct<T> {
    fn grid(&self) -> GridSpec {
        self.symbol.grid()
    }
    fn apply(&self, f: &StepFunction<T>) -> StepFunction<T> {
        output_stage(self.kind, f.grid(), input_stage(self.kind, &self.symbol, f))
    }
    fn apply_adjoint(&self, f: &StepFunction<T>) -> StepFunction<T> {
        let k = self.kind.adjoint();
        output_stage(k, f.grid(), input_stage(k, &self.symbol, f))
    }
    fn label(&self) -> OperatorLabel {
        OperatorLabel::Paraproduct { kind: self.kind.code(), symbol: self.name.clone() }
    }
}

/// Haar multiplier `T_sigma`; self-adjoint.
#[derive(Clone, Debug)]
pub struct HaarMultiplier<T> {
    pub sigma: Arc<SymbolSequence<T>>,
    pub name: String,
}

impl<T: Scalar> HaarMultiplier<T> {
    pub fn new(sigma: Arc<SymbolSequence<T>>, name: impl Into<String>) -> Self {
        Self { sigma, name: name.into() }
    }
}

impl<T: Scalar> LinearOperator<T> for HaarMultiplier<T> {
    fn grid(&self) -> GridSpec {
        self.sigma.grid()
    }
    fn apply(&self, f: &StepFunction<T>) -> StepFunction<T> {
        output_stage(ParaproductKind::Diagonal, f.grid(), input_stage(ParaproductKind::Diagonal, &self.sigma, f))
    }
    fn apply_adjoint(&self, f: &StepFunction<T>) -> StepFunction<T> {
        self.apply(f)
    }
    fn label(&self) -> OperatorLabel {
        OperatorLabel::Multiplier { symbol: self.name.clone() }
    }
}

/// Symbols of `M_g`: `<g>_E`, `g^(I,alpha)` and the global mean.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiplicationDecomposition<T> {
    pub averages: SymbolSequence<T>,
    pub coefficients: SymbolSequence<T>,
    pub mean: T,
}

pub fn decompose_multiplication<T: Scalar>(g: &StepFunction<T>) -> MultiplicationDecomposition<T> {
    let cache = CubeSumCache::new(g);
    let grid = g.grid();
    MultiplicationDecomposition {
        averages: SymbolSequence::new(grid, cache.set_averages()).expect("length"),
        coefficients: SymbolSequence::new(grid, cache.haar_coefficients()).expect("length"),
        mean: cache.cube_integral(Cube::ROOT),
    }
}

impl<T: Scalar> MultiplicationDecomposition<T> {
    /// The symbol paired with a paraproduct kind in the decomposition.
    pub fn symbol_for(&self, kind: ParaproductKind) -> &SymbolSequence<T> {
        match kind {
            ParaproductKind::Diagonal => &self.averages,
            ParaproductKind::Averaging | ParaproductKind::Indicator => &self.coefficients,
        }
    }

    /// `P^{00}_{<g>} f`, `P^{01}_{g^} f`, `P^{10}_{g^} f` and the constant `<g><f>`.
    pub fn terms(&self, f: &StepFunction<T>) -> Result<([StepFunction<T>; 3], T)> {
        let p00 = apply_paraproduct(ParaproductKind::Diagonal, &self.averages, f)?;
        let p01 = apply_paraproduct(ParaproductKind::Averaging, &self.coefficients, f)?;
        let p10 = apply_paraproduct(ParaproductKind::Indicator, &self.coefficients, f)?;
        Ok(([p00, p01, p10], self.mean * f.mean()))
    }

    /// `g f` reassembled from the paraproduct terms.
    pub fn apply(&self, f: &StepFunction<T>) -> Result<StepFunction<T>> {
        let ([a, b, c], k) = self.terms(f)?;
        let mut out = &(&a + &b) + &c;
        out.cells_mut().iter_mut().for_each(|v| *v += k);
        Ok(out)
    }
}

/// Sign of `h^beta_J` on `E_{alpha,I}` when `E_{alpha,I} ⊊ E_{beta,J}`; `None` otherwise.
pub fn haar_sign_on<T: Scalar>(grid: &GridSpec, outer: (Cube, AlphaIndex), inner: (Cube, AlphaIndex)) -> Option<T> {
    if relation(grid, inner, outer) != SetRelation::StrictSubset {
        return None;
    }
    let (j, beta) = outer;
    let (i, alpha) = inner;
    let d = grid.dim();
    let second = if i == j {
        let up = alpha.depth() - beta.depth() - 1;
        (alpha.0 >> up) & 1 == 1
    } else {
        let o = grid.child_offset_towards(j, i);
        let (_, mid, _) = beta.offsets(d);
        o >= mid
    };
    Some(if second { T::one() } else { -T::one() })
}

/// `(fg)^(J,beta)` from the expansions of `f` and `g`:
/// `sum_{E_{alpha,I} ⊊ E_{beta,J}} f^ g^ <h^1_E, h_J^beta> + f^(J,beta)<g>_E + g^(J,beta)<f>_E`.
/// Direct summation over all labels.
pub fn product_formula_coefficient<T: Scalar>(
    f: &StepFunction<T>,
    g: &StepFunction<T>,
    j: Cube,
    beta: AlphaIndex,
) -> Result<T> {
    let grid = f.grid();
    grid.ensure_same(&g.grid())?;
    grid.check_cube(j)?;
    grid.check_alpha(beta.0)?;
    if j.level >= grid.depth() {
        return Err(crate::error::Error::LeafCube);
    }
    let (cf, cg) = (CubeSumCache::new(f), CubeSumCache::new(g));
    let (hf, hg) = (cf.haar_coefficients(), cg.haar_coefficients());
    let e = Region::Wilson(j, beta);
    let inv_sqrt = T::one() / e.measure::<T>(&grid).sqrt();
    let mut sum = T::zero();
    for (slot, (i, alpha)) in grid.haar_labels().enumerate() {
        if let Some(s) = haar_sign_on::<T>(&grid, (j, beta), (i, AlphaIndex(alpha))) {
            sum += hf[slot] * hg[slot] * s * inv_sqrt;
        }
    }
    let slot = grid.haar_slot(j, beta.0);
    Ok(sum + hf[slot] * cg.average(e) + hg[slot] * cf.average(e))
}

/// All coefficients of the product formula in slot order, in `O(N)` via forest sums.
pub fn product_formula_coefficients<T: Scalar>(f: &StepFunction<T>, g: &StepFunction<T>) -> Result<Vec<T>> {
    let grid = f.grid();
    grid.ensure_same(&g.grid())?;
    let (cf, cg) = (CubeSumCache::new(f), CubeSumCache::new(g));
    let (hf, hg) = (cf.haar_coefficients(), cg.haar_coefficients());
    let (af, ag) = (cf.set_averages(), cg.set_averages());
    let prod: Vec<T> = hf.iter().zip(&hg).map(|(&a, &b)| a * b).collect();
    let halves = half_sums(&grid, &subset_sums(&grid, &prod));
    Ok(grid
        .haar_labels()
        .enumerate()
        .map(|(slot, (j, beta))| {
            let m: T = Region::Wilson(j, AlphaIndex(beta)).measure(&grid);
            let (s1, s2) = halves[slot];
            (s2 - s1) / m.sqrt() + hf[slot] * ag[slot] + hg[slot] * af[slot]
        })
        .collect())
}

/// Label `(e1,e2),(e3,e4)` of a composition `P^{e1e2} T_sigma P^{e3e4}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QLabel {
    pub left: ParaproductKind,
    pub right: ParaproductKind,
}

impl QLabel {
    /// Canonical column order `q_01_01, q_01_10, ..., q_00_00`.
    pub fn all() -> [QLabel; 9] {
        let k = ParaproductKind::ALL;
        std::array::from_fn(|i| QLabel { left: k[i / 3], right: k[i % 3] })
    }

    pub fn name(self) -> String {
        format!("q_{}_{}", self.left.code(), self.right.code())
    }

    pub fn parse(name: &str) -> Option<Self> {
        let rest = name.strip_prefix("q_")?;
        let (l, r) = rest.split_once('_')?;
        Some(Self { left: ParaproductKind::from_code(l)?, right: ParaproductKind::from_code(r)? })
    }
}

impl fmt::Display for QLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// `P^{left}_{a} T_sigma P^{right}_{b}`, applied without intermediate
/// synthesis where the Haar coefficients are already at hand.
#[derive(Clone, Debug)]
pub struct SandwichedMultiplier<T> {
    pub left: (ParaproductKind, Arc<SymbolSequence<T>>),
    pub sigma: Arc<SymbolSequence<T>>,
    pub right: (ParaproductKind, Arc<SymbolSequence<T>>),
    pub name: String,
}

impl<T: Scalar> SandwichedMultiplier<T> {
    fn run(
        left: &(ParaproductKind, Arc<SymbolSequence<T>>),
        sigma: &SymbolSequence<T>,
        right: &(ParaproductKind, Arc<SymbolSequence<T>>),
        f: &StepFunction<T>,
    ) -> StepFunction<T> {
        let grid = f.grid();
        let inner = input_stage(right.0, &right.1, f);
        let coeffs = match right.0 {
            ParaproductKind::Indicator => {
                let u = synthesize_indicators(&grid, T::zero(), &inner);
                CubeSumCache::new(&u).haar_coefficients()
            }
            _ => inner,
        };
        let t = times(sigma.values(), coeffs);
        let out = match left.0 {
            ParaproductKind::Averaging => {
                let u = HaarSpectrum::new(grid, T::zero(), t).synthesize();
                times(left.1.values(), CubeSumCache::new(&u).set_averages())
            }
            _ => times(left.1.values(), t),
        };
        output_stage(left.0, grid, out)
    }
}

impl<T: Scalar> LinearOperator<T> for SandwichedMultiplier<T> {
    fn grid(&self) -> GridSpec {
        self.sigma.grid()
    }
    fn apply(&self, f: &StepFunction<T>) -> StepFunction<T> {
        Self::run(&self.left, &self.sigma, &self.right, f)
    }
    fn apply_adjoint(&self, f: &StepFunction<T>) -> StepFunction<T> {
        let left = (self.right.0.adjoint(), self.right.1.clone());
        let right = (self.left.0.adjoint(), self.left.1.clone());
        Self::run(&left, &self.sigma, &right, f)
    }
    fn label(&self) -> OperatorLabel {
        OperatorLabel::Named(self.name.clone())
    }
}

/// `f -> u T_sigma (v f)` with adjoint `f -> v T_sigma (u f)`.
#[derive(Clone, Debug)]
pub struct ConjugatedMultiplier<T> {
    pub outer: StepFunction<T>,
    pub sigma: Arc<SymbolSequence<T>>,
    pub inner: StepFunction<T>,
}

impl<T: Scalar> LinearOperator<T> for ConjugatedMultiplier<T> {
    fn grid(&self) -> GridSpec {
        self.sigma.grid()
    }
    fn apply(&self, f: &StepFunction<T>) -> StepFunction<T> {
        let t = apply_multiplier(&self.sigma, &(f * &self.inner)).expect("grid");
        &t * &self.outer
    }
    fn apply_adjoint(&self, f: &StepFunction<T>) -> StepFunction<T> {
        let t = apply_multiplier(&self.sigma, &(f * &self.outer)).expect("grid");
        &t * &self.inner
    }
    fn label(&self) -> OperatorLabel {
        OperatorLabel::Named("conjugated".into())
    }
}

/// The nine compositions `Q^{(e1,e2),(e3,e4)}` and the operator they resolve,
/// `M_{w^{1/2}} T_sigma M_{w^{-1/2}}`.
#[derive(Clone, Debug)]
pub struct NineTermResolution<T> {
    pub terms: Vec<(QLabel, SandwichedMultiplier<T>)>,
    pub conjugated: ConjugatedMultiplier<T>,
}

pub fn build_nine_term_resolution<T: Scalar>(
    sigma: &SymbolSequence<T>,
    w: &StepFunction<T>,
) -> Result<NineTermResolution<T>> {
    sigma.grid().ensure_same(&w.grid())?;
    w.ensure_positive()?;
    let root = w.map(|v| v.sqrt());
    let inv_root = w.map(|v| T::one() / v.sqrt());
    let left = decompose_multiplication(&root);
    let right = decompose_multiplication(&inv_root);
    let sigma = Arc::new(sigma.clone());
    let left_avg = Arc::new(left.averages);
    let left_coef = Arc::new(left.coefficients);
    let right_avg = Arc::new(right.averages);
    let right_coef = Arc::new(right.coefficients);
    let pick = |k: ParaproductKind, avg: &Arc<SymbolSequence<T>>, coef: &Arc<SymbolSequence<T>>| match k {
        ParaproductKind::Diagonal => avg.clone(),
        _ => coef.clone(),
    };
    let terms = QLabel::all()
        .into_iter()
        .map(|q| {
            let op = SandwichedMultiplier {
                left: (q.left, pick(q.left, &left_avg, &left_coef)),
                sigma: sigma.clone(),
                right: (q.right, pick(q.right, &right_avg, &right_coef)),
                name: q.name(),
            };
            (q, op)
        })
        .collect();
    Ok(NineTermResolution { terms, conjugated: ConjugatedMultiplier { outer: root, sigma, inner: inv_root } })
}

impl<T: Scalar> NineTermResolution<T> {
    pub fn term(&self, q: QLabel) -> &SandwichedMultiplier<T> {
        &self.terms.iter().find(|(l, _)| *l == q).expect("all nine labels present").1
    }

    /// `sum_q Q f`.
    pub fn apply_sum(&self, f: &StepFunction<T>) -> StepFunction<T> {
        let mut out = StepFunction::zeros(f.grid());
        for (_, op) in &self.terms {
            out.axpy(T::one(), &op.apply(f));
        }
        out
    }
}
