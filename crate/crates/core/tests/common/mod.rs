#![allow(dead_code)]

use haarmul_core::wilson::{haar_function, AlphaIndex};
use haarmul_core::{GridSpec, StepFunction};

pub type Mat = Vec<Vec<f64>>;

pub fn zeros(n: usize, m: usize) -> Mat {
    vec![vec![0.0; m]; n]
}

pub fn transpose(a: &Mat) -> Mat {
    let (n, m) = (a.len(), a[0].len());
    let mut t = zeros(m, n);
    for i in 0..n {
        for j in 0..m {
            t[j][i] = a[i][j];
        }
    }
    t
}

pub fn matmul(a: &Mat, b: &Mat) -> Mat {
    let (n, k, m) = (a.len(), b.len(), b[0].len());
    let mut c = zeros(n, m);
    for i in 0..n {
        for p in 0..k {
            let x = a[i][p];
            if x != 0.0 {
                for j in 0..m {
                    c[i][j] += x * b[p][j];
                }
            }
        }
    }
    c
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
pub fn jacobi_eigenvalues(a: &Mat) -> Vec<f64> {
    let n = a.len();
    let mut a = a.clone();
    for _ in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        let diag: f64 = (0..n).map(|i| a[i][i] * a[i][i]).sum();
        if off <= 1e-30 * diag.max(1e-300) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i][i]).collect()
}

pub fn max_eigenvalue(a: &Mat) -> f64 {
    jacobi_eigenvalues(a).into_iter().fold(f64::NEG_INFINITY, f64::max)
}

pub fn top_singular_value(a: &Mat) -> f64 {
    max_eigenvalue(&matmul(&transpose(a), a)).max(0.0).sqrt()
}

/// Lower Cholesky factor of a symmetric positive definite matrix.
pub fn cholesky(a: &Mat) -> Mat {
    let n = a.len();
    let mut l = zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                l[i][i] = (a[i][i] - s).sqrt();
            } else {
                l[i][j] = (a[i][j] - s) / l[j][j];
            }
        }
    }
    l
}

/// `L^{-1}` for lower-triangular `L`.
pub fn lower_inverse(l: &Mat) -> Mat {
    let n = l.len();
    let mut inv = zeros(n, n);
    for c in 0..n {
        for i in 0..n {
            let mut s = if i == c { 1.0 } else { 0.0 };
            for k in 0..i {
                s -= l[i][k] * inv[k][c];
            }
            inv[i][c] = s / l[i][i];
        }
    }
    inv
}

/// Largest `lambda` with `A v = lambda B v`, `B` positive definite.
pub fn generalized_max_eigenvalue(a: &Mat, b: &Mat) -> f64 {
    let li = lower_inverse(&cholesky(b));
    max_eigenvalue(&matmul(&matmul(&li, a), &transpose(&li)))
}

/// Rows are the cell values of `1, h_1, ..., h_{N-1}` built cell by cell.
pub fn haar_rows(grid: &GridSpec) -> Mat {
    let mut rows = vec![vec![1.0; grid.cell_count()]];
    for (c, a) in grid.haar_labels() {
        rows.push(haar_function::<f64>(grid, None, c, AlphaIndex(a)).unwrap().into_cells());
    }
    rows
}

/// Matrix of a cellwise linear map in the orthonormal Haar basis.
pub fn to_haar_basis(grid: &GridSpec, cell_matrix: &Mat) -> Mat {
    let h = haar_rows(grid);
    let cm = 1.0 / grid.cell_count() as f64;
    let mut m = matmul(&matmul(&h, cell_matrix), &transpose(&h));
    m.iter_mut().flatten().for_each(|v| *v *= cm);
    m
}

/// Cell matrix of `f -> op(f)`: column `j` holds `op(1_{Q_j})`.
pub fn cell_matrix(grid: &GridSpec, op: impl Fn(&StepFunction<f64>) -> StepFunction<f64>) -> Mat {
    let n = grid.cell_count();
    let mut m = zeros(n, n);
    for j in 0..n {
        let col = op(&StepFunction::cell_indicator(*grid, j));
        for i in 0..n {
            m[i][j] = col.cells()[i];
        }
    }
    m
}

pub fn drop_first(m: &Mat) -> Mat {
    m[1..].iter().map(|r| r[1..].to_vec()).collect()
}
