//! Symbol sequences `a_{I,alpha}` indexed like Haar coefficients.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::{Cube, GridSpec};
use crate::scalar::Scalar;
use crate::step::parse_grid_header;
use crate::wilson::AlphaIndex;

/// Diagonal symbol: one value per `(cube, alpha)` with cube level `< L`.
///
/// Entries not set explicitly are zero.
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolSequence<T> {
    grid: GridSpec,
    values: Vec<T>,
    sup_norm: T,
}

impl<T: Scalar> SymbolSequence<T> {
    pub fn new(grid: GridSpec, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.haar_len() {
            return Err(Error::InvalidParameter(format!(
                "symbol needs {} entries, got {}",
                grid.haar_len(),
                values.len()
            )));
        }
        let sup_norm = values.iter().fold(T::zero(), |m, &v| m.max(v.abs()));
        Ok(Self { grid, values, sup_norm })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self::constant(grid, T::zero())
    }

    pub fn constant(grid: GridSpec, value: T) -> Self {
        Self::new(grid, vec![value; grid.haar_len()]).expect("length")
    }

    pub fn from_fn(grid: GridSpec, mut f: impl FnMut(Cube, AlphaIndex) -> T) -> Self {
        let values = grid.haar_labels().map(|(c, a)| f(c, AlphaIndex(a))).collect();
        Self::new(grid, values).expect("length")
    }

    /// Seeded independent `+1`/`-1` entries.
    pub fn random_signs(grid: GridSpec, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..grid.haar_len())
            .map(|_| if rng.gen::<bool>() { T::one() } else { -T::one() })
            .collect();
        Self::new(grid, values).expect("length")
    }

    /// Seeded entries uniform in `[lo, hi)`.
    pub fn random(grid: GridSpec, seed: u64, lo: f64, hi: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..grid.haar_len()).map(|_| T::lit(rng.gen_range(lo..hi))).collect();
        Self::new(grid, values).expect("length")
    }

    /// Single nonzero entry.
    pub fn single(grid: GridSpec, cube: Cube, alpha: AlphaIndex, value: T) -> Self {
        let mut values = vec![T::zero(); grid.haar_len()];
        values[grid.haar_slot(cube, alpha.0)] = value;
        Self::new(grid, values).expect("length")
    }

    #[inline]
    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    #[inline]
    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn get(&self, cube: Cube, alpha: AlphaIndex) -> T {
        self.values[self.grid.haar_slot(cube, alpha.0)]
    }

    /// `max |a_{I,alpha}|`.
    #[inline]
    pub fn sup_norm(&self) -> T {
        self.sup_norm
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self::new(self.grid, self.values.iter().map(|&v| f(v)).collect()).expect("length")
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        Self::new(self.grid, self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect())
            .expect("length")
    }

    pub fn ensure_nonnegative(&self) -> Result<()> {
        if let Some(slot) = self.values.iter().position(|&v| v < T::zero()) {
            let (cube, alpha) = self.grid.haar_label(slot);
            return Err(Error::NegativeSymbol { level: cube.level, alpha, value: self.values[slot].to_f64_lossy() });
        }
        Ok(())
    }

    /// Header `d L`, then `level k_0 .. k_{d-1} alpha value` for each nonzero entry.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", self.grid.dim(), self.grid.depth());
        for (slot, &v) in self.values.iter().enumerate() {
            if v == T::zero() {
                continue;
            }
            let (cube, alpha) = self.grid.haar_label(slot);
            let c = self.grid.coords(cube);
            let _ = write!(out, "{}", cube.level);
            for k in c.iter().take(self.grid.dim() as usize) {
                let _ = write!(out, " {k}");
            }
            let _ = writeln!(out, " {alpha} {v}");
        }
        out
    }

    /// Parses either the entry list format or the single line `constant v`.
    pub fn from_text(text: &str, grid: GridSpec) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hl, head) = lines.next().ok_or(Error::Parse { line: 1, message: "empty symbol file".into() })?;
        if let Some(rest) = head.strip_prefix("constant") {
            let v: f64 = rest
                .trim()
                .parse()
                .map_err(|_| Error::Parse { line: hl, message: format!("bad constant {rest:?}") })?;
            if let Some((ln, _)) = lines.next() {
                return Err(Error::Parse { line: ln, message: "trailing content after constant".into() });
            }
            return Ok(Self::constant(grid, T::lit(v)));
        }
        let file_grid = parse_grid_header(hl, head)?;
        grid.ensure_same(&file_grid)?;
        let d = grid.dim() as usize;
        let mut values = vec![T::zero(); grid.haar_len()];
        for (ln, line) in lines {
            let parts: Vec<&str> = line.split_whitespace().collect();
            let err = |m: &str| Error::Parse { line: ln, message: m.to_string() };
            if parts.len() != d + 3 {
                return Err(err(&format!("expected {} fields", d + 3)));
            }
            let ints: Vec<usize> = parts[..d + 2]
                .iter()
                .map(|p| p.parse::<usize>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| err("non-integer index"))?;
            let level = ints[0] as u32;
            if level >= grid.depth() {
                return Err(err("level must be below L"));
            }
            if ints[1..=d].iter().any(|&k| k >= 1 << level) {
                return Err(err("coordinate out of range"));
            }
            let alpha = ints[d + 1] as u32;
            grid.check_alpha(alpha).map_err(|e| err(&e.to_string()))?;
            let v: f64 = parts[d + 2].parse().map_err(|_| err("bad value"))?;
            let cube = grid.cube_at(level, &ints[1..=d]);
            values[grid.haar_slot(cube, alpha)] = T::lit(v);
        }
        Self::new(grid, values)
    }
}
