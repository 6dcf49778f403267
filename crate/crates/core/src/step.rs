//! Piecewise-constant functions on the level-L cells of a grid.

use std::fmt::Write as _;
use std::ops::{Add, Mul, Sub};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::{Coords, GridSpec};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct StepFunction<T> {
    grid: GridSpec,
    cells: Vec<T>,
}

impl<T: Scalar> StepFunction<T> {
    pub fn new(grid: GridSpec, cells: Vec<T>) -> Result<Self> {
        if cells.len() != grid.cell_count() {
            return Err(Error::InvalidParameter(format!(
                "expected {} cells, got {}",
                grid.cell_count(),
                cells.len()
            )));
        }
        Ok(Self { grid, cells })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self::constant(grid, T::zero())
    }

    pub fn constant(grid: GridSpec, value: T) -> Self {
        Self { grid, cells: vec![value; grid.cell_count()] }
    }

    /// Indicator of a single level-L cell (value 1 there, 0 elsewhere).
    pub fn cell_indicator(grid: GridSpec, cell: usize) -> Self {
        let mut f = Self::zeros(grid);
        f.cells[cell] = T::one();
        f
    }

    /// Builds a function from the integer coordinates of each cell.
    pub fn from_coords(grid: GridSpec, mut value: impl FnMut(&Coords) -> T) -> Self {
        let l = grid.depth();
        let cells = (0..grid.cell_count())
            .map(|i| value(&grid.coords(crate::grid::Cube { level: l, index: i })))
            .collect();
        Self { grid, cells }
    }

    /// Seeded cells drawn uniformly from `[lo, hi)`.
    pub fn random(grid: GridSpec, seed: u64, lo: f64, hi: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cells = (0..grid.cell_count()).map(|_| T::lit(rng.gen_range(lo..hi))).collect();
        Self { grid, cells }
    }

    #[inline]
    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    #[inline]
    pub fn cells(&self) -> &[T] {
        &self.cells
    }

    #[inline]
    pub fn cells_mut(&mut self) -> &mut [T] {
        &mut self.cells
    }

    pub fn into_cells(self) -> Vec<T> {
        self.cells
    }

    #[inline]
    pub fn cell_measure(&self) -> T {
        T::pow2(-((self.grid.dim() * self.grid.depth()) as i32))
    }

    pub fn integral(&self) -> T {
        self.cells.iter().copied().sum::<T>() * self.cell_measure()
    }

    /// Average over `[0,1)^d` (equal to the integral).
    pub fn mean(&self) -> T {
        self.integral()
    }

    pub fn inner(&self, other: &Self) -> T {
        debug_assert_eq!(self.grid, other.grid);
        self.cells.iter().zip(&other.cells).map(|(&a, &b)| a * b).sum::<T>() * self.cell_measure()
    }

    pub fn norm_sq(&self) -> T {
        self.inner(self)
    }

    pub fn norm(&self) -> T {
        self.norm_sq().sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.cells.iter().fold(T::zero(), |m, &v| m.max(v.abs()))
    }

    /// Largest cellwise absolute difference.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.cells
            .iter()
            .zip(&other.cells)
            .fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()))
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self { grid: self.grid, cells: self.cells.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        Self {
            grid: self.grid,
            cells: self.cells.iter().zip(&other.cells).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn scale(&self, c: T) -> Self {
        self.map(|v| v * c)
    }

    /// `self - mean(self)`.
    pub fn without_mean(&self) -> Self {
        let m = self.mean();
        self.map(|v| v - m)
    }

    /// `self += c * other`.
    pub fn axpy(&mut self, c: T, other: &Self) {
        for (a, &b) in self.cells.iter_mut().zip(&other.cells) {
            *a += c * b;
        }
    }

    /// Errors unless every cell is strictly positive.
    pub fn ensure_positive(&self) -> Result<()> {
        match self.cells.iter().position(|&v| !(v > T::zero())) {
            Some(cell) => Err(Error::NonPositiveWeight { cell, value: self.cells[cell].to_f64_lossy() }),
            None => Ok(()),
        }
    }

    /// Text format: first line `d L`, then one value per cell in index order.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.cells.len() * 20 + 8);
        let _ = writeln!(out, "{} {}", self.grid.dim(), self.grid.depth());
        for v in &self.cells {
            let _ = writeln!(out, "{v}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hl, header) = lines.next().ok_or(Error::Parse { line: 1, message: "empty file".into() })?;
        let grid = parse_grid_header(hl, header)?;
        let mut cells = Vec::with_capacity(grid.cell_count());
        for (ln, line) in lines {
            let v: f64 = line
                .parse()
                .map_err(|_| Error::Parse { line: ln, message: format!("not a number: {line:?}") })?;
            if !v.is_finite() {
                return Err(Error::Parse { line: ln, message: "non-finite value".into() });
            }
            cells.push(T::lit(v));
        }
        if cells.len() != grid.cell_count() {
            return Err(Error::Parse {
                line: hl,
                message: format!("header promises {} cells, found {}", grid.cell_count(), cells.len()),
            });
        }
        Ok(Self { grid, cells })
    }
}

pub(crate) fn parse_grid_header(line: usize, header: &str) -> Result<GridSpec> {
    let parts: Vec<&str> = header.split_whitespace().collect();
    let bad = || Error::Parse { line, message: format!("expected \"d L\", got {header:?}") };
    if parts.len() != 2 {
        return Err(bad());
    }
    let d: u32 = parts[0].parse().map_err(|_| bad())?;
    let l: u32 = parts[1].parse().map_err(|_| bad())?;
    GridSpec::new(d, l).map_err(|e| Error::Parse { line, message: e.to_string() })
}

/// `2^(-dL) * sum f g w`; errors if any weight cell is nonpositive.
pub fn weighted_inner_product<T: Scalar>(
    f: &StepFunction<T>,
    g: &StepFunction<T>,
    w: &StepFunction<T>,
) -> Result<T> {
    f.grid.ensure_same(&g.grid)?;
    f.grid.ensure_same(&w.grid)?;
    w.ensure_positive()?;
    let s: T = f
        .cells
        .iter()
        .zip(&g.cells)
        .zip(&w.cells)
        .map(|((&a, &b), &c)| a * b * c)
        .sum();
    Ok(s * f.cell_measure())
}

impl<'a, T: Scalar> Add for &'a StepFunction<T> {
    type Output = StepFunction<T>;
    fn add(self, rhs: Self) -> StepFunction<T> {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl<'a, T: Scalar> Sub for &'a StepFunction<T> {
    type Output = StepFunction<T>;
    fn sub(self, rhs: Self) -> StepFunction<T> {
        self.zip_with(rhs, |a, b| a - b)
    }
}

/// Cellwise product.
impl<'a, T: Scalar> Mul for &'a StepFunction<T> {
    type Output = StepFunction<T>;
    fn mul(self, rhs: Self) -> StepFunction<T> {
        self.zip_with(rhs, |a, b| a * b)
    }
}
