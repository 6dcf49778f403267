//! Wilson's laminar pairs `(E1, E2)` and the Haar systems built on them.
//!
//! For a cube `I` the `2^d - 1` pairs are the internal nodes of the depth-`d`
//! binary tree over the lexicographically ordered children. The node with
//! path `p` of length `j` is `alpha = 2^j + int(p)`; it owns the children
//! whose first `j` offset bits equal `p`, split by bit `j` into `E1` (bit 0)
//! and `E2` (bit 1). Its tree children are `2 alpha` and `2 alpha + 1`.

use std::fmt;

use crate::error::{Error, Result};
use crate::grid::{Cube, GridSpec};
use crate::haar::CubeSumCache;
use crate::scalar::Scalar;
use crate::step::StepFunction;

/// Index `alpha` in `1..=2^d - 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AlphaIndex(pub u32);

impl AlphaIndex {
    pub fn new(alpha: u32, dim: u32) -> Result<Self> {
        if alpha == 0 || alpha >= (1 << dim) {
            return Err(Error::InvalidAlpha { alpha, dim });
        }
        Ok(Self(alpha))
    }

    /// Tree depth `j`.
    #[inline]
    pub fn depth(self) -> u32 {
        31 - self.0.leading_zeros()
    }

    /// Path bits `p` as an integer (length [`AlphaIndex::depth`]).
    #[inline]
    pub fn path(self) -> u32 {
        self.0 - (1 << self.depth())
    }

    pub fn from_path(depth: u32, path: u32) -> Self {
        Self((1 << depth) + path)
    }

    /// Half-open range of child offsets `[lo, hi)` forming `E = E1 ∪ E2`; `E1 = [lo, mid)`.
    #[inline]
    pub fn offsets(self, dim: u32) -> (usize, usize, usize) {
        let span = 1usize << (dim - self.depth());
        let lo = self.path() as usize * span;
        (lo, lo + span / 2, lo + span)
    }

    /// `|E_alpha| / |I| = 2^-j`.
    pub fn relative_measure<T: Scalar>(self) -> T {
        T::pow2(-(self.depth() as i32))
    }
}

impl fmt::Display for AlphaIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Alpha of the depth-`j` tree node containing child offset `o`.
#[inline]
pub fn alpha_containing(dim: u32, offset: usize, depth: u32) -> u32 {
    (1u32 << depth) + (offset >> (dim - depth)) as u32
}

/// Which half (0 = `E1`, 1 = `E2`) of its depth-`j` node child offset `o` lies in.
#[inline]
pub fn side_of(dim: u32, offset: usize, depth: u32) -> usize {
    (offset >> (dim - 1 - depth)) & 1
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Half {
    First,
    Second,
}

/// A set whose average can be read off a [`CubeSumCache`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Region {
    Cube(Cube),
    Wilson(Cube, AlphaIndex),
    WilsonHalf(Cube, AlphaIndex, Half),
}

impl Region {
    pub fn measure<T: Scalar>(&self, grid: &GridSpec) -> T {
        match *self {
            Region::Cube(c) => grid.measure(c),
            Region::Wilson(c, a) => grid.measure::<T>(c) * a.relative_measure::<T>(),
            Region::WilsonHalf(c, a, _) => grid.measure::<T>(c) * a.relative_measure::<T>() / T::lit(2.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WilsonSet {
    pub cube: Cube,
    pub alpha: AlphaIndex,
    /// Child offsets of `E1`, ascending.
    pub e1: Vec<usize>,
    /// Child offsets of `E2`, ascending.
    pub e2: Vec<usize>,
}

impl WilsonSet {
    pub fn union(&self) -> Vec<usize> {
        let mut u: Vec<usize> = self.e1.iter().chain(&self.e2).copied().collect();
        u.sort_unstable();
        u
    }

    /// Child offsets rendered as d-bit strings, for fixtures.
    pub fn bitstrings(&self, dim: u32) -> (Vec<String>, Vec<String>) {
        let fmt = |o: &usize| format!("{:0width$b}", o, width = dim as usize);
        (self.e1.iter().map(fmt).collect(), self.e2.iter().map(fmt).collect())
    }
}

/// The `2^d - 1` Wilson pairs of a non-leaf cube, in alpha order.
pub fn build_wilson_sets(grid: &GridSpec, cube: Cube) -> Result<Vec<WilsonSet>> {
    grid.check_cube(cube)?;
    if cube.level >= grid.depth() {
        return Err(Error::LeafCube);
    }
    let d = grid.dim();
    let sets: Vec<WilsonSet> = (1..=grid.alpha_count() as u32)
        .map(|a| {
            let alpha = AlphaIndex(a);
            let (lo, mid, hi) = alpha.offsets(d);
            WilsonSet { cube, alpha, e1: (lo..mid).collect(), e2: (mid..hi).collect() }
        })
        .collect();
    debug_assert!(check_lemma_properties(&sets, d).is_ok());
    Ok(sets)
}

/// Checks the four pair properties on one cube's sets by brute force.
///
/// (i) equal measures, (ii) nonempty unions of children, (iii) disjoint halves,
/// (iv) for distinct pairs, one union nests in a half of the other or the unions are disjoint.
pub fn check_lemma_properties(sets: &[WilsonSet], dim: u32) -> std::result::Result<(), String> {
    let n_children = 1usize << dim;
    if sets.len() != n_children - 1 {
        return Err(format!("expected {} pairs, got {}", n_children - 1, sets.len()));
    }
    let within = |s: &[usize], t: &[usize]| s.iter().all(|x| t.contains(x));
    for s in sets {
        if s.e1.len() != s.e2.len() {
            return Err(format!("alpha {}: |E1| != |E2|", s.alpha));
        }
        if s.e1.is_empty() || s.e2.is_empty() {
            return Err(format!("alpha {}: empty half", s.alpha));
        }
        if s.e1.iter().chain(&s.e2).any(|&o| o >= n_children) {
            return Err(format!("alpha {}: offset outside the cube", s.alpha));
        }
        if s.e1.iter().any(|o| s.e2.contains(o)) {
            return Err(format!("alpha {}: halves intersect", s.alpha));
        }
    }
    for (i, a) in sets.iter().enumerate() {
        for b in sets.iter().skip(i + 1) {
            let ua = a.union();
            let ub = b.union();
            let a_in_b = within(&ua, &b.e1) || within(&ua, &b.e2);
            let b_in_a = within(&ub, &a.e1) || within(&ub, &a.e2);
            let disjoint = !ua.iter().any(|o| ub.contains(o));
            if !(a_in_b || b_in_a || disjoint) {
                return Err(format!("alpha {} and {} violate nesting/disjointness", a.alpha, b.alpha));
            }
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SetRelation {
    Equal,
    /// First set strictly inside the second.
    StrictSubset,
    StrictSuperset,
    Disjoint,
}

/// Relation between `E_{a,I}` and `E_{b,J}`.
pub fn relation(grid: &GridSpec, (i, a): (Cube, AlphaIndex), (j, b): (Cube, AlphaIndex)) -> SetRelation {
    if i == j {
        if a == b {
            return SetRelation::Equal;
        }
        let (da, db) = (a.depth(), b.depth());
        if da > db && (a.0 >> (da - db)) == b.0 {
            return SetRelation::StrictSubset;
        }
        if db > da && (b.0 >> (db - da)) == a.0 {
            return SetRelation::StrictSuperset;
        }
        return SetRelation::Disjoint;
    }
    let d = grid.dim();
    if i.level < j.level && grid.contains(i, j) {
        let o = grid.child_offset_towards(i, j);
        let (lo, _, hi) = a.offsets(d);
        return if (lo..hi).contains(&o) { SetRelation::StrictSuperset } else { SetRelation::Disjoint };
    }
    if j.level < i.level && grid.contains(j, i) {
        let o = grid.child_offset_towards(j, i);
        let (lo, _, hi) = b.offsets(d);
        return if (lo..hi).contains(&o) { SetRelation::StrictSubset } else { SetRelation::Disjoint };
    }
    SetRelation::Disjoint
}

/// Level-L cells of `E_{alpha,I}` split into `(E1 cells, E2 cells)`.
pub fn wilson_cells(grid: &GridSpec, cube: Cube, alpha: AlphaIndex) -> (Vec<usize>, Vec<usize>) {
    let kids = grid.children(cube).expect("non-leaf cube");
    let (lo, mid, hi) = alpha.offsets(grid.dim());
    let collect = |r: std::ops::Range<usize>| {
        let mut v = Vec::new();
        for o in r {
            grid.for_each_cell(kids[o], |c| v.push(c));
        }
        v
    };
    (collect(lo..mid), collect(mid..hi))
}

/// `h^{w,alpha}_I` (or the unweighted `h^alpha_I` when `weight` is `None`).
pub fn haar_function<T: Scalar>(
    grid: &GridSpec,
    weight: Option<&StepFunction<T>>,
    cube: Cube,
    alpha: AlphaIndex,
) -> Result<StepFunction<T>> {
    grid.check_cube(cube)?;
    grid.check_alpha(alpha.0)?;
    if cube.level >= grid.depth() {
        return Err(Error::LeafCube);
    }
    let (c1, c2) = wilson_cells(grid, cube, alpha);
    let mut h = StepFunction::zeros(*grid);
    let cm = h.cell_measure();
    let (m1, m2) = match weight {
        None => {
            let m = cm * T::from_usize_lossy(c1.len());
            (m, m)
        }
        Some(w) => {
            grid.ensure_same(&w.grid())?;
            let s = |cells: &[usize]| cells.iter().map(|&c| w.cells()[c]).sum::<T>() * cm;
            (s(&c1), s(&c2))
        }
    };
    if !(m1 > T::zero() && m2 > T::zero()) {
        return Err(Error::DegenerateWeight { level: cube.level, alpha: alpha.0 });
    }
    let total = (m1 + m2).sqrt();
    let v2 = (m1 / m2).sqrt() / total;
    let v1 = -(m2 / m1).sqrt() / total;
    let cells = h.cells_mut();
    for &c in &c1 {
        cells[c] = v1;
    }
    for &c in &c2 {
        cells[c] = v2;
    }
    Ok(h)
}

/// `h^1_E = 1_E / |E|`.
pub fn normalized_indicator<T: Scalar>(grid: &GridSpec, cube: Cube, alpha: AlphaIndex) -> StepFunction<T> {
    let (c1, c2) = wilson_cells(grid, cube, alpha);
    let mut f = StepFunction::zeros(*grid);
    let m: T = Region::Wilson(cube, alpha).measure(grid);
    let v = T::one() / m;
    for c in c1.into_iter().chain(c2) {
        f.cells_mut()[c] = v;
    }
    f
}

/// Coefficients of the disbalanced decomposition `h_J = C h^w_J + D h^1_E`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DisbalancedCoeffs<T> {
    pub c: T,
    pub d: T,
}

/// `C = sqrt(<w>_E1 <w>_E2 / <w>_E)`, `D = w^(J,beta) / <w>_E`, read from a cache of `w`.
pub fn disbalanced_from_cache<T: Scalar>(cache: &CubeSumCache<T>, cube: Cube, beta: AlphaIndex) -> Result<DisbalancedCoeffs<T>> {
    let grid = cache.grid();
    let (w1, w2) = cache.half_integrals(cube, beta);
    if !(w1 > T::zero() && w2 > T::zero()) {
        return Err(Error::DegenerateWeight { level: cube.level, alpha: beta.0 });
    }
    let e: T = Region::Wilson(cube, beta).measure(&grid);
    let half = e / T::lit(2.0);
    let avg_e = (w1 + w2) / e;
    let c = ((w1 / half) * (w2 / half) / avg_e).sqrt();
    let coeff = (w2 - w1) / e.sqrt();
    Ok(DisbalancedCoeffs { c, d: coeff / avg_e })
}

pub fn disbalanced_coeffs<T: Scalar>(w: &StepFunction<T>, cube: Cube, beta: AlphaIndex) -> Result<DisbalancedCoeffs<T>> {
    let grid = w.grid();
    grid.check_cube(cube)?;
    grid.check_alpha(beta.0)?;
    if cube.level >= grid.depth() {
        return Err(Error::LeafCube);
    }
    disbalanced_from_cache(&CubeSumCache::new(w), cube, beta)
}

/// Second closed form `C^2 = (<w>_E^2 - |E|^-1 w^(J,beta)^2) / <w>_E`.
pub fn disbalanced_c_squared_alt<T: Scalar>(cache: &CubeSumCache<T>, cube: Cube, beta: AlphaIndex) -> T {
    let grid = cache.grid();
    let (w1, w2) = cache.half_integrals(cube, beta);
    let e: T = Region::Wilson(cube, beta).measure(&grid);
    let avg = (w1 + w2) / e;
    let coeff = (w2 - w1) / e.sqrt();
    (avg * avg - coeff * coeff / e) / avg
}

/// Checks `h^a_I h^b_J = <h^b_J, h^1_{E_{a,I}}> h^a_I` cellwise for `E_{a,I}` strictly inside `E_{b,J}`.
///
/// Returns the largest cellwise deviation.
pub fn haar_pointwise_product_fact<T: Scalar>(
    grid: &GridSpec,
    (i, a): (Cube, AlphaIndex),
    (j, b): (Cube, AlphaIndex),
) -> Result<T> {
    if relation(grid, (i, a), (j, b)) != SetRelation::StrictSubset {
        return Err(Error::NotNested);
    }
    let hi = haar_function::<T>(grid, None, i, a)?;
    let hj = haar_function::<T>(grid, None, j, b)?;
    let coeff = hj.inner(&normalized_indicator(grid, i, a));
    let lhs = &hi * &hj;
    Ok(lhs.max_abs_diff(&hi.scale(coeff)))
}
