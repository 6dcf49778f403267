//! Small dense linear algebra: row-major matrices and a symmetric top
//! eigenpair solver (Householder tridiagonalization, Sturm bisection,
//! inverse iteration).

use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn diagonal(d: &[T]) -> Self {
        Self::from_fn(d.len(), d.len(), |i, j| if i == j { d[i] } else { T::zero() })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn set_column(&mut self, j: usize, col: &[T]) {
        assert_eq!(col.len(), self.rows);
        for (i, &v) in col.iter().enumerate() {
            self.set(i, j, v);
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    pub fn mul_vec_transposed(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.rows);
        let mut out = vec![T::zero(); self.cols];
        for (i, &xi) in x.iter().enumerate() {
            if xi != T::zero() {
                axpy(xi, self.row(i), &mut out);
            }
        }
        out
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a != T::zero() {
                    axpy(a, other.row(k), dst);
                }
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()))
    }

    pub fn max_asymmetry(&self) -> T {
        let mut m = T::zero();
        for i in 0..self.rows {
            for j in 0..i {
                m = m.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        m
    }

    /// Replaces the matrix by `(A + A^T)/2`.
    pub fn symmetrize(&mut self) {
        assert_eq!(self.rows, self.cols);
        let half = T::lit(0.5);
        for i in 0..self.rows {
            for j in 0..i {
                let v = (self.get(i, j) + self.get(j, i)) * half;
                self.set(i, j, v);
                self.set(j, i, v);
            }
        }
    }
}

#[inline]
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    let mut acc = [T::zero(); 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        for k in 0..4 {
            acc[k] += a[4 * c + k] * b[4 * c + k];
        }
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for k in 4 * chunks..a.len() {
        s += a[k] * b[k];
    }
    s
}

#[inline]
pub fn axpy<T: Scalar>(a: T, x: &[T], y: &mut [T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

pub fn norm2<T: Scalar>(x: &[T]) -> T {
    let scale = x.iter().fold(T::zero(), |m, &v| m.max(v.abs()));
    if scale == T::zero() {
        return T::zero();
    }
    let s: T = x.iter().map(|&v| (v / scale) * (v / scale)).sum();
    scale * s.sqrt()
}

/// Returns `row . v` and adds `vi * row` into `p`, in independent lanes.
#[inline]
fn lower_row_product<T: Scalar>(row: &[T], v: &[T], p: &mut [T], vi: T) -> T {
    const LANES: usize = 8;
    let mut acc = [T::zero(); LANES];
    let split = row.len() / LANES * LANES;
    for ((r, x), q) in row[..split]
        .chunks_exact(LANES)
        .zip(v[..split].chunks_exact(LANES))
        .zip(p[..split].chunks_exact_mut(LANES))
    {
        for t in 0..LANES {
            acc[t] += r[t] * x[t];
            q[t] += r[t] * vi;
        }
    }
    let mut s = acc.iter().fold(T::zero(), |a, &b| a + b);
    for ((&r, &x), q) in row[split..].iter().zip(&v[split..]).zip(&mut p[split..]) {
        s += r * x;
        *q += r * vi;
    }
    s
}

/// Symmetric tridiagonal form `A = Q T Q^T` with `Q` stored as Householder vectors.
pub struct Tridiagonal<T> {
    pub diag: Vec<T>,
    pub off: Vec<T>,
    /// Reflector `k` acts on coordinates `k+1..n`: `I - beta v v^T`.
    reflectors: Vec<(T, Vec<T>)>,
}

impl<T: Scalar> Tridiagonal<T> {
    /// Householder reduction; reads and updates only the lower triangle.
    pub fn reduce(mut a: DenseMatrix<T>) -> Self {
        let n = a.rows;
        assert_eq!(n, a.cols, "square matrix required");
        let mut diag = vec![T::zero(); n];
        let mut off = vec![T::zero(); n.saturating_sub(1)];
        let mut reflectors = Vec::with_capacity(n.saturating_sub(2));
        let mut p = vec![T::zero(); n];
        for k in 0..n.saturating_sub(2) {
            let m = n - k - 1;
            let mut v: Vec<T> = (k + 1..n).map(|i| a.get(i, k)).collect();
            let alpha = norm2(&v);
            diag[k] = a.get(k, k);
            if alpha == T::zero() {
                off[k] = T::zero();
                reflectors.push((T::zero(), v));
                continue;
            }
            let sign = if v[0] >= T::zero() { T::one() } else { -T::one() };
            let beta_norm = -sign * alpha;
            v[0] -= beta_norm;
            let vtv = dot(&v, &v);
            let beta = T::lit(2.0) / vtv;
            off[k] = beta_norm;
            // p = beta * A_sub v, symmetric product from the lower triangle
            let p = &mut p[..m];
            p.iter_mut().for_each(|x| *x = T::zero());
            for i in 0..m {
                let start = (k + 1 + i) * n + k + 1;
                let row = &a.data[start..start + i + 1];
                let vi = v[i];
                let s = lower_row_product(&row[..i], &v[..i], &mut p[..i], vi);
                p[i] += s + row[i] * vi;
            }
            p.iter_mut().for_each(|x| *x *= beta);
            let c = beta * dot(p, &v) * T::lit(0.5);
            let w: Vec<T> = p.iter().zip(&v).map(|(&pi, &vi)| pi - c * vi).collect();
            for i in 0..m {
                let (vi, wi) = (v[i], w[i]);
                let start = (k + 1 + i) * n + k + 1;
                let row = &mut a.data[start..start + i + 1];
                for ((x, &wj), &vj) in row.iter_mut().zip(&w[..=i]).zip(&v[..=i]) {
                    *x -= vi * wj + wi * vj;
                }
            }
            reflectors.push((beta, v));
        }
        if n >= 2 {
            diag[n - 2] = a.get(n - 2, n - 2);
            off[n - 2] = a.get(n - 1, n - 2);
        }
        if n >= 1 {
            diag[n - 1] = a.get(n - 1, n - 1);
        }
        Self { diag, off, reflectors }
    }

    /// Number of eigenvalues strictly below `x` (Sturm sequence).
    pub fn count_below(&self, x: T) -> usize {
        let tiny = T::min_positive_value();
        let mut count = 0;
        let mut q = T::one();
        for i in 0..self.diag.len() {
            let e2 = if i == 0 { T::zero() } else { self.off[i - 1] * self.off[i - 1] };
            q = self.diag[i] - x - if i == 0 { T::zero() } else { e2 / q };
            if q.abs() < tiny {
                q = -tiny;
            }
            if q < T::zero() {
                count += 1;
            }
        }
        count
    }

    /// Gershgorin interval.
    pub fn bounds(&self) -> (T, T) {
        let n = self.diag.len();
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for i in 0..n {
            let r = (if i > 0 { self.off[i - 1].abs() } else { T::zero() })
                + (if i + 1 < n { self.off[i].abs() } else { T::zero() });
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// Largest eigenvalue by bisection to machine precision.
    pub fn max_eigenvalue(&self) -> T {
        let n = self.diag.len();
        let (mut lo, mut hi) = self.bounds();
        let scale = lo.abs().max(hi.abs()).max(T::min_positive_value());
        for _ in 0..200 {
            let mid = (lo + hi) * T::lit(0.5);
            if mid <= lo || mid >= hi || hi - lo <= T::epsilon() * scale {
                break;
            }
            if self.count_below(mid) == n {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        (lo + hi) * T::lit(0.5)
    }

    /// Eigenvector of the tridiagonal matrix for eigenvalue `lambda`.
    pub fn inverse_iteration(&self, lambda: T) -> Vec<T> {
        let n = self.diag.len();
        let scale = self.bounds().1.abs().max(self.bounds().0.abs()).max(T::one());
        let shift = lambda + T::epsilon() * scale * T::lit(4.0);
        let mut x: Vec<T> = (0..n).map(|i| T::one() + T::lit(1e-3) * T::from_usize_lossy(i % 7)).collect();
        for _ in 0..4 {
            x = self.solve_shifted(shift, &x);
            let nrm = norm2(&x);
            x.iter_mut().for_each(|v| *v /= nrm);
        }
        x
    }

    /// Solves `(T - s I) y = b` by Gaussian elimination with partial pivoting.
    fn solve_shifted(&self, s: T, b: &[T]) -> Vec<T> {
        let n = self.diag.len();
        if n == 1 {
            let d = self.diag[0] - s;
            let d = if d == T::zero() { T::epsilon() } else { d };
            return vec![b[0] / d];
        }
        // rows stored as (u0 at col i, u1 at i+1, u2 at i+2)
        let mut u0: Vec<T> = self.diag.iter().map(|&d| d - s).collect();
        let mut u1: Vec<T> = self.off.clone();
        u1.push(T::zero());
        let mut u2 = vec![T::zero(); n];
        let mut low: Vec<T> = self.off.clone();
        let mut rhs = b.to_vec();
        let tiny = T::epsilon() * self.bounds().1.abs().max(T::one());
        for i in 0..n - 1 {
            if low[i].abs() > u0[i].abs() {
                // swap rows i and i+1
                let (a0, a1, a2) = (u0[i], u1[i], u2[i]);
                u0[i] = low[i];
                u1[i] = u0[i + 1];
                u2[i] = u1[i + 1];
                low[i] = a0;
                u0[i + 1] = a1;
                u1[i + 1] = a2;
                rhs.swap(i, i + 1);
            }
            if u0[i] == T::zero() {
                u0[i] = tiny;
            }
            let f = low[i] / u0[i];
            u0[i + 1] -= f * u1[i];
            if i + 1 < n - 1 {
                u1[i + 1] -= f * u2[i];
            }
            rhs[i + 1] = rhs[i + 1] - f * rhs[i];
        }
        if u0[n - 1] == T::zero() {
            u0[n - 1] = tiny;
        }
        let mut y = vec![T::zero(); n];
        for i in (0..n).rev() {
            let mut v = rhs[i];
            if i + 1 < n {
                v -= u1[i] * y[i + 1];
            }
            if i + 2 < n {
                v -= u2[i] * y[i + 2];
            }
            y[i] = v / u0[i];
        }
        y
    }

    /// Maps a tridiagonal-basis vector back: `x -> Q x`.
    pub fn back_transform(&self, mut x: Vec<T>) -> Vec<T> {
        for (k, (beta, v)) in self.reflectors.iter().enumerate().rev() {
            if *beta == T::zero() {
                continue;
            }
            let tail = &mut x[k + 1..];
            let c = *beta * dot(v, tail);
            axpy(-c, v, tail);
        }
        x
    }
}

/// Largest eigenvalue and a unit eigenvector of a symmetric matrix.
pub fn symmetric_top_eigenpair<T: Scalar>(a: &DenseMatrix<T>) -> (T, Vec<T>) {
    let n = a.rows();
    if n == 0 {
        return (T::zero(), Vec::new());
    }
    let tri = Tridiagonal::reduce(a.clone());
    let lambda = tri.max_eigenvalue();
    let y = tri.inverse_iteration(lambda);
    let mut x = tri.back_transform(y);
    let nrm = norm2(&x);
    x.iter_mut().for_each(|v| *v /= nrm);
    (lambda, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_symmetric(n: usize, seed: u64) -> DenseMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = DenseMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        m.symmetrize();
        m
    }

    #[test]
    fn diagonal_top() {
        let (l, v) = symmetric_top_eigenpair(&DenseMatrix::<f64>::diagonal(&[3.0, -1.0]));
        assert!((l - 3.0).abs() < 1e-14);
        assert!((v[0].abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_eigenpairs_have_small_residual() {
        for (n, seed) in [(1, 1), (2, 2), (3, 3), (17, 4), (64, 5)] {
            let a = random_symmetric(n, seed);
            let (l, v) = symmetric_top_eigenpair(&a);
            let av = a.mul_vec(&v);
            let r: Vec<f64> = av.iter().zip(&v).map(|(x, y)| x - l * y).collect();
            assert!(norm2(&r) < 1e-10, "n={n} residual {}", norm2(&r));
            let tri = Tridiagonal::reduce(a.clone());
            assert_eq!(tri.count_below(l + 1e-9), n);
            // Rayleigh quotient of any vector is below the top eigenvalue
            let mut rng = ChaCha8Rng::seed_from_u64(seed + 100);
            for _ in 0..5 {
                let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                assert!(dot(&x, &a.mul_vec(&x)) / dot(&x, &x) <= l + 1e-12);
            }
        }
    }

    #[test]
    fn trace_is_preserved() {
        let a = random_symmetric(30, 9);
        let tri = Tridiagonal::reduce(a.clone());
        let t1: f64 = (0..30).map(|i| a.get(i, i)).sum();
        let t2: f64 = tri.diag.iter().sum();
        assert!((t1 - t2).abs() < 1e-12);
    }

    #[test]
    fn matmul_and_transpose() {
        let a = DenseMatrix::from_fn(2, 3, |i, j| (i * 3 + j) as f64);
        let b = a.matmul(&a.transpose());
        assert_eq!(b, DenseMatrix::from_fn(2, 2, |i, j| [[5.0, 14.0], [14.0, 50.0]][i][j]));
        assert_eq!(a.mul_vec_transposed(&[1.0, 1.0]), vec![3.0, 5.0, 7.0]);
    }
}
