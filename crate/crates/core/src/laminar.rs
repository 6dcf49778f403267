//! The Wilson sets of all grid cubes as one laminar forest.
//!
//! Node `(J, beta)` has two children: `(J, 2beta)` and `(J, 2beta+1)` while
//! `beta` is an interior tree node, otherwise the Wilson sets `(K, 1)` of the
//! two child cubes `K` making up `E1` and `E2`. Sets in the subtree of a node
//! are exactly the sets contained in it.

use crate::grid::{Cube, GridSpec};
use crate::scalar::Scalar;
use crate::wilson::AlphaIndex;

/// Children of `(cube, beta)` in the forest, for halves `E1` and `E2`.
/// `None` marks a half that is a single finest cell.
pub fn forest_children(grid: &GridSpec, cube: Cube, beta: AlphaIndex) -> [Option<(Cube, AlphaIndex)>; 2] {
    let d = grid.dim();
    if beta.depth() + 1 < d {
        return [Some((cube, AlphaIndex(2 * beta.0))), Some((cube, AlphaIndex(2 * beta.0 + 1)))];
    }
    if cube.level + 1 >= grid.depth() {
        return [None, None];
    }
    let (lo, mid, _) = beta.offsets(d);
    let base = grid.child_base(cube);
    let offsets = grid.child_offsets(cube.level);
    let child = |o: usize| Some((Cube { level: cube.level + 1, index: base + offsets[o] }, AlphaIndex(1)));
    [child(lo), child(mid)]
}

/// Inclusive subset sums: `out(I,alpha) = sum of x(J,beta)` over `E_{beta,J} ⊆ E_{alpha,I}`.
/// Input and output use Haar slot order.
pub fn subset_sums<T: Scalar>(grid: &GridSpec, x: &[T]) -> Vec<T> {
    fold_subsets(grid, x, |own, a, b| own + a + b)
}

/// Bottom-up fold over the forest: `out(node) = combine(x(node), out(child1), out(child2))`,
/// with missing children contributing zero.
pub fn fold_subsets<T: Scalar>(grid: &GridSpec, x: &[T], combine: impl Fn(T, T, T) -> T) -> Vec<T> {
    assert_eq!(x.len(), grid.haar_len());
    let mut out = x.to_vec();
    let a = grid.alpha_count() as u32;
    for level in (0..grid.depth()).rev() {
        for index in 0..grid.cubes_at(level) {
            let cube = Cube { level, index };
            for alpha in (1..=a).rev() {
                let beta = AlphaIndex(alpha);
                let [c1, c2] = forest_children(grid, cube, beta);
                let get = |c: Option<(Cube, AlphaIndex)>| c.map_or(T::zero(), |(k, al)| out[grid.haar_slot(k, al.0)]);
                let (s1, s2) = (get(c1), get(c2));
                let slot = grid.haar_slot(cube, alpha);
                out[slot] = combine(x[slot], s1, s2);
            }
        }
    }
    out
}

/// Strict sums over each half: `(sum over sets ⊆ E1, sum over sets ⊆ E2)` for every node,
/// given the inclusive sums.
pub fn half_sums<T: Scalar>(grid: &GridSpec, inclusive: &[T]) -> Vec<(T, T)> {
    grid.haar_labels()
        .map(|(cube, alpha)| {
            let [c1, c2] = forest_children(grid, cube, AlphaIndex(alpha));
            let get = |c: Option<(Cube, AlphaIndex)>| c.map_or(T::zero(), |(k, al)| inclusive[grid.haar_slot(k, al.0)]);
            (get(c1), get(c2))
        })
        .collect()
}
