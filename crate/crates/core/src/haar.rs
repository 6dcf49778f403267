//! Fast Haar analysis/synthesis and per-cube integral caches.
//!
//! Both directions run level by level in `O(N)` work. Cube integrals are
//! summed over the Wilson tree of each cube: every set integral is the sum
//! of its two halves, with children visited in lexicographic offset order,
//! so results are bit-reproducible.

use crate::grid::{Cube, GridSpec};
use crate::scalar::Scalar;
use crate::step::StepFunction;
use crate::wilson::{alpha_containing, side_of, AlphaIndex, Half, Region};

/// Integrals of a fixed function over every grid cube and every Wilson half.
#[derive(Clone, Debug)]
pub struct CubeSumCache<T> {
    grid: GridSpec,
    cubes: Vec<Vec<T>>,
    /// Per level `< L`: `[cube][alpha-1][half]` flattened.
    halves: Vec<Vec<T>>,
    additions: usize,
}

impl<T: Scalar> CubeSumCache<T> {
    pub fn new(f: &StepFunction<T>) -> Self {
        let grid = f.grid();
        let depth = grid.depth() as usize;
        let a = grid.alpha_count();
        let d = grid.dim();
        let cm = f.cell_measure();
        let mut cubes: Vec<Vec<T>> = Vec::with_capacity(depth + 1);
        cubes.resize_with(depth + 1, Vec::new);
        cubes[depth] = f.cells().iter().map(|&v| v * cm).collect();
        let mut halves: Vec<Vec<T>> = vec![Vec::new(); depth];
        let mut node = vec![T::zero(); a + 1];
        let mut kids = vec![T::zero(); grid.children_per_cube()];
        let mut additions = 0usize;
        for level in (0..depth as u32).rev() {
            let offsets = grid.child_offsets(level);
            let n = grid.cubes_at(level);
            let mut sums = vec![T::zero(); n];
            let mut hv = vec![T::zero(); n * a * 2];
            let finer = &cubes[level as usize + 1];
            for (index, sum) in sums.iter_mut().enumerate() {
                let base = grid.child_base(Cube { level, index });
                for (k, &o) in kids.iter_mut().zip(&offsets) {
                    *k = finer[base + o];
                }
                for alpha in (1..=a).rev() {
                    let al = AlphaIndex(alpha as u32);
                    let (e1, e2) = if al.depth() + 1 == d {
                        let (lo, mid, _) = al.offsets(d);
                        (kids[lo], kids[mid])
                    } else {
                        (node[2 * alpha], node[2 * alpha + 1])
                    };
                    node[alpha] = e1 + e2;
                    let slot = (index * a + alpha - 1) * 2;
                    hv[slot] = e1;
                    hv[slot + 1] = e2;
                }
                additions += a;
                *sum = node[1];
            }
            cubes[level as usize] = sums;
            halves[level as usize] = hv;
        }
        Self { grid, cubes, halves, additions }
    }

    #[inline]
    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    /// Number of scalar additions spent building the cache.
    pub fn additions(&self) -> usize {
        self.additions
    }

    #[inline]
    pub fn cube_integral(&self, cube: Cube) -> T {
        self.cubes[cube.level as usize][cube.index]
    }

    pub fn cube_average(&self, cube: Cube) -> T {
        self.cube_integral(cube) / self.grid.measure::<T>(cube)
    }

    pub fn cube_integrals(&self, level: u32) -> &[T] {
        &self.cubes[level as usize]
    }

    /// `(integral over E1, integral over E2)`.
    #[inline]
    pub fn half_integrals(&self, cube: Cube, alpha: AlphaIndex) -> (T, T) {
        let slot = (cube.index * self.grid.alpha_count() + alpha.0 as usize - 1) * 2;
        let h = &self.halves[cube.level as usize];
        (h[slot], h[slot + 1])
    }

    pub fn set_integral(&self, cube: Cube, alpha: AlphaIndex) -> T {
        let (a, b) = self.half_integrals(cube, alpha);
        a + b
    }

    pub fn integral(&self, region: Region) -> T {
        match region {
            Region::Cube(c) => self.cube_integral(c),
            Region::Wilson(c, a) => self.set_integral(c, a),
            Region::WilsonHalf(c, a, Half::First) => self.half_integrals(c, a).0,
            Region::WilsonHalf(c, a, Half::Second) => self.half_integrals(c, a).1,
        }
    }

    pub fn average(&self, region: Region) -> T {
        self.integral(region) / region.measure::<T>(&self.grid)
    }

    /// `<f>_{E_{alpha,I}}` for every Haar label, in slot order.
    pub fn set_averages(&self) -> Vec<T> {
        let grid = self.grid;
        let a = grid.alpha_count();
        let mut out = Vec::with_capacity(grid.haar_len());
        for level in 0..grid.depth() {
            let cube_m: T = grid.measure(Cube { level, index: 0 });
            let inv: Vec<T> = (1..=a)
                .map(|al| T::one() / (cube_m * AlphaIndex(al as u32).relative_measure::<T>()))
                .collect();
            for pair in self.halves[level as usize].chunks_exact(2 * a) {
                for (k, p) in pair.chunks_exact(2).enumerate() {
                    out.push((p[0] + p[1]) * inv[k]);
                }
            }
        }
        out
    }

    /// Unweighted Haar coefficients `<f, h^alpha_I>` in slot order.
    pub fn haar_coefficients(&self) -> Vec<T> {
        let grid = self.grid;
        let a = grid.alpha_count();
        let mut out = Vec::with_capacity(grid.haar_len());
        for level in 0..grid.depth() {
            let scale = inv_sqrt_set_measures::<T>(&grid, level);
            for pair in self.halves[level as usize].chunks_exact(2 * a) {
                for (k, p) in pair.chunks_exact(2).enumerate() {
                    out.push((p[1] - p[0]) * scale[k]);
                }
            }
        }
        out
    }
}

/// `1/sqrt(|E_alpha|)` for each alpha at `level`.
fn inv_sqrt_set_measures<T: Scalar>(grid: &GridSpec, level: u32) -> Vec<T> {
    let m: T = grid.measure(Cube { level, index: 0 });
    (1..=grid.alpha_count() as u32)
        .map(|al| T::one() / (m * AlphaIndex(al).relative_measure::<T>()).sqrt())
        .collect()
}

/// Global mean plus the Haar coefficients `f^(I, alpha)`.
#[derive(Clone, Debug, PartialEq)]
pub struct HaarSpectrum<T> {
    grid: GridSpec,
    pub mean: T,
    coeffs: Vec<T>,
}

impl<T: Scalar> HaarSpectrum<T> {
    pub fn new(grid: GridSpec, mean: T, coeffs: Vec<T>) -> Self {
        assert_eq!(coeffs.len(), grid.haar_len(), "coefficient vector length");
        Self { grid, mean, coeffs }
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self::new(grid, T::zero(), vec![T::zero(); grid.haar_len()])
    }

    #[inline]
    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [T] {
        &mut self.coeffs
    }

    pub fn get(&self, cube: Cube, alpha: AlphaIndex) -> T {
        self.coeffs[self.grid.haar_slot(cube, alpha.0)]
    }

    pub fn set(&mut self, cube: Cube, alpha: AlphaIndex, value: T) {
        let s = self.grid.haar_slot(cube, alpha.0);
        self.coeffs[s] = value;
    }

    /// `mean^2 + sum coeffs^2`, equal to `||f||^2` by Parseval.
    pub fn energy(&self) -> T {
        self.mean * self.mean + self.coeffs.iter().map(|&c| c * c).sum::<T>()
    }

    pub fn synthesize(&self) -> StepFunction<T> {
        synthesize(self)
    }
}

/// Work counters for one analysis pass.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct AnalysisStats {
    pub cubes_visited: usize,
    pub additions: usize,
}

pub fn analyze<T: Scalar>(f: &StepFunction<T>) -> HaarSpectrum<T> {
    analyze_counted(f).0
}

pub fn analyze_counted<T: Scalar>(f: &StepFunction<T>) -> (HaarSpectrum<T>, AnalysisStats) {
    let cache = CubeSumCache::new(f);
    let grid = f.grid();
    let stats = AnalysisStats {
        cubes_visited: (0..grid.depth()).map(|l| grid.cubes_at(l)).sum(),
        additions: cache.additions(),
    };
    let spec = HaarSpectrum::new(grid, cache.cube_integral(Cube::ROOT), cache.haar_coefficients());
    (spec, stats)
}

pub fn synthesize<T: Scalar>(spec: &HaarSpectrum<T>) -> StepFunction<T> {
    let grid = spec.grid;
    push_down(&grid, spec.mean, &spec.coeffs, |level| {
        let s = inv_sqrt_set_measures::<T>(&grid, level);
        s.into_iter().map(|v| [-v, v]).collect()
    })
}

/// `sum c_{I,alpha} h^1_{E_{alpha,I}}` (plus a constant `base`).
pub fn synthesize_indicators<T: Scalar>(grid: &GridSpec, base: T, coeffs: &[T]) -> StepFunction<T> {
    push_down(grid, base, coeffs, |level| {
        let m: T = grid.measure(Cube { level, index: 0 });
        (1..=grid.alpha_count() as u32)
            .map(|al| {
                let v = T::one() / (m * AlphaIndex(al).relative_measure::<T>());
                [v, v]
            })
            .collect()
    })
}

/// Top-down accumulation: each child of `I` receives `sum_j c(I, alpha_j) * kernel[alpha_j][side]`
/// where `alpha_j` runs over the `d` tree nodes containing it.
fn push_down<T: Scalar>(
    grid: &GridSpec,
    base: T,
    coeffs: &[T],
    kernel_for_level: impl Fn(u32) -> Vec<[T; 2]>,
) -> StepFunction<T> {
    assert_eq!(coeffs.len(), grid.haar_len());
    let d = grid.dim();
    let a = grid.alpha_count();
    let nkids = grid.children_per_cube();
    // (alpha-1, side) for each (offset, depth)
    let route: Vec<Vec<(usize, usize)>> = (0..nkids)
        .map(|o| (0..d).map(|j| (alpha_containing(d, o, j) as usize - 1, side_of(d, o, j))).collect())
        .collect();
    let mut current = vec![base];
    for level in 0..grid.depth() {
        let kernel = kernel_for_level(level);
        let offsets = grid.child_offsets(level);
        let mut next = vec![T::zero(); grid.cubes_at(level + 1)];
        let start = grid.haar_offset(level);
        for (index, &value) in current.iter().enumerate() {
            let c = &coeffs[start + index * a..start + (index + 1) * a];
            let cb = grid.child_base(Cube { level, index });
            for (o, &off) in offsets.iter().enumerate() {
                let mut v = value;
                for &(k, side) in &route[o] {
                    v += c[k] * kernel[k][side];
                }
                next[cb + off] = v;
            }
        }
        current = next;
    }
    StepFunction::new(*grid, current).expect("cell count")
}
