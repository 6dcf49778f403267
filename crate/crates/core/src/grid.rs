//! Dyadic grid combinatorics on `[0,1)^d`.
//!
//! Cubes at level `l` are indexed row-major over their integer coordinates
//! with coordinate 0 slowest. Children of a cube are ordered by the d-bit
//! offset `o = sum_i b_i 2^(d-1-i)` (coordinate 0 is the most significant bit).

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Largest supported dimension.
pub const MAX_DIM: u32 = 4;
/// Largest supported `d * L` (so that `2^(dL) <= 2^20`).
pub const MAX_LOG_CELLS: u32 = 20;

pub type Coords = [usize; MAX_DIM as usize];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GridSpec {
    dim: u32,
    depth: u32,
}

/// A dyadic cube identified by its level and level-local row-major index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cube {
    pub level: u32,
    pub index: usize,
}

impl Cube {
    pub const ROOT: Cube = Cube { level: 0, index: 0 };
}

impl GridSpec {
    pub fn new(dim: u32, depth: u32) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::InvalidGrid(format!("dimension {dim} not in 1..={MAX_DIM}")));
        }
        if depth == 0 {
            return Err(Error::InvalidGrid("depth must be positive".into()));
        }
        if dim * depth > MAX_LOG_CELLS {
            return Err(Error::InvalidGrid(format!(
                "2^(d*L) = 2^{} exceeds 2^{MAX_LOG_CELLS}",
                dim * depth
            )));
        }
        Ok(Self { dim, depth })
    }

    #[inline]
    pub fn dim(&self) -> u32 {
        self.dim
    }

    #[inline]
    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// Number of level-L cells, `N = 2^(dL)`.
    #[inline]
    pub fn cell_count(&self) -> usize {
        1usize << (self.dim * self.depth)
    }

    #[inline]
    pub fn children_per_cube(&self) -> usize {
        1usize << self.dim
    }

    /// `|Gamma_d| = 2^d - 1`.
    #[inline]
    pub fn alpha_count(&self) -> usize {
        (1usize << self.dim) - 1
    }

    #[inline]
    pub fn cubes_at(&self, level: u32) -> usize {
        1usize << (self.dim * level)
    }

    /// Side length in cells of a level-`level` cube along one axis.
    #[inline]
    pub fn side_cells(&self, level: u32) -> usize {
        1usize << (self.depth - level)
    }

    /// Number of Haar coefficients, `N - 1`.
    #[inline]
    pub fn haar_len(&self) -> usize {
        self.cell_count() - 1
    }

    /// First Haar slot of `level`.
    #[inline]
    pub fn haar_offset(&self, level: u32) -> usize {
        self.cubes_at(level) - 1
    }

    /// Flat position of `(cube, alpha)` in a Haar coefficient vector.
    #[inline]
    pub fn haar_slot(&self, cube: Cube, alpha: u32) -> usize {
        debug_assert!(cube.level < self.depth);
        debug_assert!(alpha >= 1 && (alpha as usize) <= self.alpha_count());
        self.haar_offset(cube.level) + cube.index * self.alpha_count() + (alpha as usize - 1)
    }

    /// Inverse of [`GridSpec::haar_slot`].
    pub fn haar_label(&self, slot: usize) -> (Cube, u32) {
        let mut level = 0;
        while level + 1 < self.depth && self.haar_offset(level + 1) <= slot {
            level += 1;
        }
        let rel = slot - self.haar_offset(level);
        let a = self.alpha_count();
        (Cube { level, index: rel / a }, (rel % a) as u32 + 1)
    }

    pub fn check_cube(&self, cube: Cube) -> Result<()> {
        if cube.level > self.depth || cube.index >= self.cubes_at(cube.level) {
            return Err(Error::InvalidCube { level: cube.level, index: cube.index });
        }
        Ok(())
    }

    pub fn check_alpha(&self, alpha: u32) -> Result<()> {
        if alpha == 0 || alpha as usize > self.alpha_count() {
            return Err(Error::InvalidAlpha { alpha, dim: self.dim });
        }
        Ok(())
    }

    pub fn ensure_same(&self, other: &GridSpec) -> Result<()> {
        if self != other {
            return Err(Error::GridMismatch {
                expected_d: self.dim,
                expected_l: self.depth,
                got_d: other.dim,
                got_l: other.depth,
            });
        }
        Ok(())
    }

    pub fn coords(&self, cube: Cube) -> Coords {
        let mut c = [0usize; MAX_DIM as usize];
        let mask = (1usize << cube.level) - 1;
        for (i, slot) in c.iter_mut().enumerate().take(self.dim as usize) {
            let shift = cube.level as usize * (self.dim as usize - 1 - i);
            *slot = (cube.index >> shift) & mask;
        }
        c
    }

    pub fn cube_at(&self, level: u32, coords: &[usize]) -> Cube {
        let mut index = 0usize;
        for &k in coords.iter().take(self.dim as usize) {
            index = (index << level) | k;
        }
        Cube { level, index }
    }

    /// Measure `2^(-d * level)`.
    #[inline]
    pub fn measure<T: Scalar>(&self, cube: Cube) -> T {
        T::pow2(-((self.dim * cube.level) as i32))
    }

    /// Children in lexicographic offset order.
    pub fn children(&self, cube: Cube) -> Result<Vec<Cube>> {
        self.check_cube(cube)?;
        if cube.level >= self.depth {
            return Err(Error::LeafCube);
        }
        let base = self.child_base(cube);
        let offsets = self.child_offsets(cube.level);
        Ok(offsets
            .iter()
            .map(|&o| Cube { level: cube.level + 1, index: base + o })
            .collect())
    }

    /// Index at level `level + 1` of the offset-0 child of `cube`.
    #[inline]
    pub fn child_base(&self, cube: Cube) -> usize {
        let d = self.dim as usize;
        let mask = (1usize << cube.level) - 1;
        let mut base = 0usize;
        for i in 0..d {
            let shift = cube.level as usize * (d - 1 - i);
            let k = (cube.index >> shift) & mask;
            base = (base << (cube.level + 1)) | (k << 1);
        }
        base
    }

    /// Index increments of the `2^d` children of any level-`level` cube.
    pub fn child_offsets(&self, level: u32) -> Vec<usize> {
        let d = self.dim as usize;
        (0..1usize << d)
            .map(|o| {
                let mut inc = 0usize;
                for i in 0..d {
                    let bit = (o >> (d - 1 - i)) & 1;
                    inc = (inc << (level + 1)) | bit;
                }
                inc
            })
            .collect()
    }

    pub fn parent(&self, cube: Cube) -> Option<Cube> {
        if cube.level == 0 {
            None
        } else {
            Some(self.ancestor(cube, cube.level - 1))
        }
    }

    /// Ancestor of `cube` at `level <= cube.level`.
    pub fn ancestor(&self, cube: Cube, level: u32) -> Cube {
        debug_assert!(level <= cube.level);
        let c = self.coords(cube);
        let shift = cube.level - level;
        let mut up = [0usize; MAX_DIM as usize];
        for i in 0..self.dim as usize {
            up[i] = c[i] >> shift;
        }
        self.cube_at(level, &up)
    }

    pub fn contains(&self, outer: Cube, inner: Cube) -> bool {
        inner.level >= outer.level && self.ancestor(inner, outer.level) == outer
    }

    /// Offset of the child of `outer` that contains the strict descendant `inner`.
    pub fn child_offset_towards(&self, outer: Cube, inner: Cube) -> usize {
        debug_assert!(inner.level > outer.level && self.contains(outer, inner));
        let step = self.ancestor(inner, outer.level + 1);
        let c = self.coords(step);
        let d = self.dim as usize;
        (0..d).fold(0usize, |o, i| (o << 1) | (c[i] & 1))
    }

    /// Calls `visit` with every level-L cell index inside `cube`, in increasing order.
    pub fn for_each_cell(&self, cube: Cube, mut visit: impl FnMut(usize)) {
        let d = self.dim as usize;
        let side = self.side_cells(cube.level);
        let c = self.coords(cube);
        let total = side.pow(d as u32);
        let l = self.depth as usize;
        for t in 0..total {
            let mut index = 0usize;
            let mut rem = t;
            let mut local = [0usize; MAX_DIM as usize];
            for i in (0..d).rev() {
                local[i] = rem % side;
                rem /= side;
            }
            for i in 0..d {
                index = (index << l) | (c[i] * side + local[i]);
            }
            visit(index);
        }
    }

    pub fn cells_in(&self, cube: Cube) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.side_cells(cube.level).pow(self.dim));
        self.for_each_cell(cube, |i| out.push(i));
        out
    }

    /// All cubes at levels `0..=L`, coarse to fine.
    pub fn cubes(&self) -> impl Iterator<Item = Cube> + '_ {
        (0..=self.depth)
            .flat_map(move |level| (0..self.cubes_at(level)).map(move |index| Cube { level, index }))
    }

    /// Cubes carrying Haar functions (levels `0..L`).
    pub fn haar_cubes(&self) -> impl Iterator<Item = Cube> + '_ {
        (0..self.depth)
            .flat_map(move |level| (0..self.cubes_at(level)).map(move |index| Cube { level, index }))
    }

    /// All `(cube, alpha)` labels in Haar-slot order.
    pub fn haar_labels(&self) -> impl Iterator<Item = (Cube, u32)> + '_ {
        let a = self.alpha_count() as u32;
        self.haar_cubes().flat_map(move |c| (1..=a).map(move |alpha| (c, alpha)))
    }
}
