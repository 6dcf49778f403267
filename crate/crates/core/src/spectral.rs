//! Operator norms and generalized Rayleigh quotients.
//!
//! Dense path: the Gram matrix `A*A` is assembled column by column from fast
//! applications, then its top eigenpair is found by tridiagonalization.
//! Matrix-free path: power iteration on `A*A` from a seeded start vector.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::haar::{analyze, HaarSpectrum};
use crate::linalg::{norm2, symmetric_top_eigenpair, DenseMatrix};
use crate::operator::{LinearOperator, OperatorLabel, SharedOperator, DENSE_CAP};
use crate::scalar::Scalar;
use crate::step::StepFunction;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormMethod {
    /// Dense when the span is at most `dense_cap`, else power iteration.
    Auto,
    Dense,
    Power,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MethodUsed {
    Dense,
    PowerIteration,
}

impl fmt::Display for MethodUsed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Dense => "dense",
            Self::PowerIteration => "power-iteration",
        })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct NormOptions {
    /// Relative tolerance on successive Rayleigh quotients.
    pub tol: f64,
    pub method: NormMethod,
    /// Measure on the mean-zero span instead of the full span.
    pub restrict_mean_zero: bool,
    pub seed: u64,
    pub dense_cap: usize,
    /// Defaults to `10 N`.
    pub max_iterations: Option<usize>,
}

impl Default for NormOptions {
    fn default() -> Self {
        Self { tol: 1e-8, method: NormMethod::Auto, restrict_mean_zero: false, seed: 0, dense_cap: DENSE_CAP, max_iterations: None }
    }
}

impl NormOptions {
    pub fn mean_zero(mut self) -> Self {
        self.restrict_mean_zero = true;
        self
    }

    pub fn with_method(mut self, method: NormMethod) -> Self {
        self.method = method;
        self
    }
}

#[derive(Clone, Debug)]
pub struct NormResult<T> {
    pub value: T,
    pub method: MethodUsed,
    pub iterations: usize,
    /// Bound on `value - ||Op w|| / ||w||` for the witness `w`, and on the
    /// eigen-residual translated to norm units.
    pub residual: T,
    pub witness: StepFunction<T>,
}

/// `op` or `op o P_0`, with matching adjoint.
struct Restricted<'a, T: Scalar> {
    op: &'a dyn LinearOperator<T>,
    mean_zero: bool,
}

impl<T: Scalar> Restricted<'_, T> {
    fn apply(&self, f: &StepFunction<T>) -> StepFunction<T> {
        if self.mean_zero {
            self.op.apply(&f.without_mean())
        } else {
            self.op.apply(f)
        }
    }

    fn gram(&self, f: &StepFunction<T>) -> StepFunction<T> {
        let g = self.op.apply_adjoint(&self.apply(f));
        if self.mean_zero {
            g.without_mean()
        } else {
            g
        }
    }
}

/// Largest singular value of `op` on the full or mean-zero span.
pub fn operator_norm<T: Scalar>(op: &dyn LinearOperator<T>, opts: &NormOptions) -> Result<NormResult<T>> {
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {}", opts.tol)));
    }
    let n = op.grid().cell_count();
    let r = Restricted { op, mean_zero: opts.restrict_mean_zero };
    match opts.method {
        NormMethod::Dense => dense_norm(&r, n, opts.dense_cap.min(DENSE_CAP)),
        NormMethod::Power => power_norm(&r, opts),
        NormMethod::Auto if n <= opts.dense_cap.min(DENSE_CAP) => dense_norm(&r, n, DENSE_CAP),
        NormMethod::Auto => power_norm(&r, opts),
    }
}

fn dense_norm<T: Scalar>(r: &Restricted<'_, T>, n: usize, cap: usize) -> Result<NormResult<T>> {
    if n > cap {
        return Err(Error::SizeCap { size: n, cap });
    }
    let grid = r.op.grid();
    let mut gram = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let col = r.gram(&StepFunction::cell_indicator(grid, j));
        gram.set_column(j, col.cells());
    }
    gram.symmetrize();
    let (lambda, x) = symmetric_top_eigenpair(&gram);
    let lambda = lambda.max(T::zero());
    let value = lambda.sqrt();
    let gx = gram.mul_vec(&x);
    let eig_res = norm2(&gx.iter().zip(&x).map(|(&a, &b)| a - lambda * b).collect::<Vec<_>>());
    let scale = T::one() / StepFunction::<T>::zeros(grid).cell_measure().sqrt();
    let mut witness = StepFunction::new(grid, x.iter().map(|&v| v * scale).collect())?;
    if r.mean_zero {
        witness = witness.without_mean();
    }
    let residual = certify(r, &witness, value, eig_res);
    Ok(NormResult { value, method: MethodUsed::Dense, iterations: 1, residual, witness })
}

fn certify<T: Scalar>(r: &Restricted<'_, T>, witness: &StepFunction<T>, value: T, eig_res: T) -> T {
    let wn = witness.norm();
    let achieved = if wn > T::zero() { r.apply(witness).norm() / wn } else { T::zero() };
    let from_eig = if value > T::zero() { eig_res / (T::lit(2.0) * value) } else { eig_res.sqrt() };
    (value - achieved).max(T::zero()).max(from_eig)
}

fn power_norm<T: Scalar>(r: &Restricted<'_, T>, opts: &NormOptions) -> Result<NormResult<T>> {
    let grid = r.op.grid();
    let n = grid.cell_count();
    let cap = opts.max_iterations.unwrap_or(10 * n).max(1);
    let tol = T::lit(opts.tol);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let cells: Vec<T> = (0..n).map(|_| T::lit(rng.gen_range(-1.0..1.0))).collect();
    let mut v = StepFunction::new(grid, cells)?;
    if r.mean_zero {
        v = v.without_mean();
    }
    let nv = v.norm();
    if nv == T::zero() {
        return Ok(NormResult { value: T::zero(), method: MethodUsed::PowerIteration, iterations: 0, residual: T::zero(), witness: v });
    }
    v = v.scale(T::one() / nv);
    let mut prev: Option<T> = None;
    let mut best = T::zero();
    let mut last_res = T::infinity();
    for it in 1..=cap {
        let y = r.gram(&v);
        let rho = y.inner(&v).max(T::zero());
        best = best.max(rho);
        let mut resid = y.clone();
        resid.axpy(-rho, &v);
        last_res = resid.norm();
        let ny = y.norm();
        let done = ny == T::zero() || prev.is_some_and(|p: T| (rho - p).abs() < tol * rho);
        if done {
            let value = rho.sqrt();
            let residual = certify(r, &v, value, last_res);
            return Ok(NormResult { value, method: MethodUsed::PowerIteration, iterations: it, residual, witness: v });
        }
        prev = Some(rho);
        v = y.scale(T::one() / ny);
    }
    Err(Error::NonConvergence {
        iterations: cap,
        lower: best.sqrt().to_f64_lossy(),
        upper: (best + last_res).sqrt().to_f64_lossy(),
    })
}

/// A quadratic form diagonal in an orthonormal basis.
#[derive(Clone, Debug, PartialEq)]
pub enum DiagonalForm<T> {
    /// `sum b_Q f_Q^2 |Q|`: weights per finest cell.
    Cell(Vec<T>),
    /// `b_0 <f>^2 + sum b_{I,alpha} f^(I,alpha)^2`; a missing mean entry
    /// means the form ignores the mean direction.
    Haar { mean: Option<T>, coeffs: Vec<T> },
}

/// Numerator of a generalized Rayleigh quotient.
#[derive(Clone)]
pub enum QuadraticForm<T: Scalar> {
    Diagonal(DiagonalForm<T>),
    /// `<S f, f>` for a self-adjoint, positive semidefinite `S`.
    Operator(SharedOperator<T>),
}

impl<T: Scalar> DiagonalForm<T> {
    fn check_len(&self, grid: &GridSpec) -> Result<()> {
        let (got, want) = match self {
            Self::Cell(b) => (b.len(), grid.cell_count()),
            Self::Haar { coeffs, .. } => (coeffs.len(), grid.haar_len()),
        };
        if got != want {
            return Err(Error::InvalidParameter(format!("form has {got} entries, expected {want}")));
        }
        Ok(())
    }

    fn ensure_positive(&self, mean_zero: bool) -> Result<()> {
        let bad = |index: usize, v: T| Error::NonPositiveForm { index, value: v.to_f64_lossy() };
        match self {
            Self::Cell(b) => {
                if let Some(i) = b.iter().position(|&v| !(v > T::zero())) {
                    return Err(bad(i, b[i]));
                }
            }
            Self::Haar { mean, coeffs } => {
                if let Some(i) = coeffs.iter().position(|&v| !(v > T::zero())) {
                    return Err(bad(i + 1, coeffs[i]));
                }
                if !mean_zero {
                    match mean {
                        Some(m) if *m > T::zero() => {}
                        Some(m) => return Err(bad(0, *m)),
                        None => return Err(bad(0, T::zero())),
                    }
                }
            }
        }
        Ok(())
    }

    /// Multiplies coordinates by `g(b)`; the mean coordinate is zeroed when
    /// `drop_mean` or when there is no mean entry.
    fn scale_by(&self, f: &StepFunction<T>, g: impl Fn(T) -> T, drop_mean: bool) -> StepFunction<T> {
        match self {
            Self::Cell(b) => {
                let cells = f.cells().iter().zip(b).map(|(&x, &bv)| x * g(bv)).collect();
                StepFunction::new(f.grid(), cells).expect("cell count")
            }
            Self::Haar { mean, coeffs } => {
                let s = analyze(f);
                let m = match mean {
                    Some(bm) if !drop_mean => s.mean * g(*bm),
                    _ => T::zero(),
                };
                let c = s.coeffs().iter().zip(coeffs).map(|(&x, &bv)| x * g(bv)).collect();
                HaarSpectrum::new(f.grid(), m, c).synthesize()
            }
        }
    }

    /// Value of the form at `f`.
    pub fn evaluate(&self, f: &StepFunction<T>) -> T {
        match self {
            Self::Cell(b) => f.cells().iter().zip(b).map(|(&x, &bv)| bv * x * x).sum::<T>() * f.cell_measure(),
            Self::Haar { mean, coeffs } => {
                let s = analyze(f);
                let m = mean.map_or(T::zero(), |bm| bm * s.mean * s.mean);
                m + s.coeffs().iter().zip(coeffs).map(|(&x, &bv)| bv * x * x).sum::<T>()
            }
        }
    }
}

impl<T: Scalar> QuadraticForm<T> {
    fn apply(&self, f: &StepFunction<T>) -> StepFunction<T> {
        match self {
            Self::Diagonal(d) => d.scale_by(f, |b| b, false),
            Self::Operator(op) => op.apply(f),
        }
    }

    pub fn evaluate(&self, f: &StepFunction<T>) -> T {
        match self {
            Self::Diagonal(d) => d.evaluate(f),
            Self::Operator(op) => op.apply(f).inner(f),
        }
    }
}

/// `P B^{-1/2} A B^{-1/2} P`, with `P` the projection onto the working span
/// in whitened coordinates.
struct Whitened<T: Scalar> {
    grid: GridSpec,
    a: QuadraticForm<T>,
    b: DiagonalForm<T>,
    mean_zero: bool,
    /// `B^{-1/2} 1` for a cell-diagonal `B` on the mean-zero span.
    null_dir: Option<StepFunction<T>>,
}

impl<T: Scalar> Whitened<T> {
    fn project(&self, f: &StepFunction<T>) -> StepFunction<T> {
        match &self.null_dir {
            Some(u) => {
                let mut out = f.clone();
                out.axpy(-f.inner(u) / u.inner(u), u);
                out
            }
            None => f.clone(),
        }
    }

    fn inv_sqrt_b(&self, f: &StepFunction<T>) -> StepFunction<T> {
        self.b.scale_by(f, |b| T::one() / b.sqrt(), self.mean_zero)
    }

    /// Whitened vector to the original function `B^{-1/2} P g`.
    fn unwhiten(&self, g: &StepFunction<T>) -> StepFunction<T> {
        self.inv_sqrt_b(&self.project(g))
    }
}

impl<T: Scalar> LinearOperator<T> for Whitened<T> {
    fn grid(&self) -> GridSpec {
        self.grid
    }
    fn apply(&self, f: &StepFunction<T>) -> StepFunction<T> {
        let x = self.unwhiten(f);
        self.project(&self.inv_sqrt_b(&self.a.apply(&x)))
    }
    fn apply_adjoint(&self, f: &StepFunction<T>) -> StepFunction<T> {
        self.apply(f)
    }
    fn label(&self) -> OperatorLabel {
        OperatorLabel::Named("whitened form".into())
    }
}

/// `max A(f)/B(f)` over the working span (mean-zero when `opts.restrict_mean_zero`).
///
/// `A` must be positive semidefinite: the value is the norm of the whitened
/// operator. The witness is returned in original coordinates.
pub fn generalized_max_rayleigh<T: Scalar>(
    grid: GridSpec,
    a: QuadraticForm<T>,
    b: DiagonalForm<T>,
    opts: &NormOptions,
) -> Result<NormResult<T>> {
    b.check_len(&grid)?;
    if let QuadraticForm::Diagonal(d) = &a {
        d.check_len(&grid)?;
    }
    b.ensure_positive(opts.restrict_mean_zero)?;
    let null_dir = match (&b, opts.restrict_mean_zero) {
        (DiagonalForm::Cell(bv), true) => {
            Some(StepFunction::new(grid, bv.iter().map(|&v| T::one() / v.sqrt()).collect())?)
        }
        _ => None,
    };
    let k = Whitened { grid, a, b, mean_zero: opts.restrict_mean_zero, null_dir };
    let inner = NormOptions { restrict_mean_zero: false, ..*opts };
    let mut res = operator_norm(&k, &inner)?;
    res.witness = k.unwhiten(&res.witness);
    Ok(res)
}

/// Convenience: a dense symmetric operator in the cell basis.
pub fn dense_form_operator<T: Scalar>(grid: GridSpec, m: DenseMatrix<T>) -> Result<SharedOperator<T>> {
    Ok(Arc::new(crate::operator::DenseOperator::new(grid, m)?))
}
