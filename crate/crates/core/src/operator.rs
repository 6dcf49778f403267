//! Linear operators on the step-function span and their dense matrices.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::haar::{analyze, HaarSpectrum};
use crate::linalg::DenseMatrix;
use crate::scalar::Scalar;
use crate::step::StepFunction;

/// Largest span materialized densely.
pub const DENSE_CAP: usize = 4096;

/// Structured operator tag.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OperatorLabel {
    Identity,
    /// `P^{(e1,e2)}_a`; `symbol` names `a`.
    Paraproduct { kind: &'static str, symbol: String },
    Multiplier { symbol: String },
    Multiplication { function: String },
    Dense,
    Adjoint(Box<OperatorLabel>),
    Compose(Vec<OperatorLabel>),
    Sum(Vec<OperatorLabel>),
    Scaled(Box<OperatorLabel>),
    MeanZero(Box<OperatorLabel>),
    Named(String),
}

impl fmt::Display for OperatorLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |f: &mut fmt::Formatter<'_>, parts: &[OperatorLabel], sep: &str| -> fmt::Result {
            for (i, p) in parts.iter().enumerate() {
                if i > 0 {
                    f.write_str(sep)?;
                }
                write!(f, "{p}")?;
            }
            Ok(())
        };
        match self {
            Self::Identity => f.write_str("I"),
            Self::Paraproduct { kind, symbol } => write!(f, "P{kind}[{symbol}]"),
            Self::Multiplier { symbol } => write!(f, "T[{symbol}]"),
            Self::Multiplication { function } => write!(f, "M[{function}]"),
            Self::Dense => f.write_str("dense"),
            Self::Adjoint(inner) => write!(f, "({inner})*"),
            Self::Compose(parts) => {
                f.write_str("(")?;
                join(f, parts, " o ")?;
                f.write_str(")")
            }
            Self::Sum(parts) => {
                f.write_str("(")?;
                join(f, parts, " + ")?;
                f.write_str(")")
            }
            Self::Scaled(inner) => write!(f, "c*{inner}"),
            Self::MeanZero(inner) => write!(f, "{inner}|0"),
            Self::Named(name) => f.write_str(name),
        }
    }
}

/// Bounded linear map on the `2^(dL)`-dimensional span with its `L^2` adjoint.
pub trait LinearOperator<T: Scalar>: Send + Sync {
    fn grid(&self) -> GridSpec;
    fn apply(&self, f: &StepFunction<T>) -> StepFunction<T>;
    fn apply_adjoint(&self, f: &StepFunction<T>) -> StepFunction<T>;
    fn label(&self) -> OperatorLabel;
}

pub type SharedOperator<T> = Arc<dyn LinearOperator<T>>;

impl<T: Scalar, O: LinearOperator<T> + ?Sized> LinearOperator<T> for Arc<O> {
    fn grid(&self) -> GridSpec {
        (**self).grid()
    }
    fn apply(&self, f: &StepFunction<T>) -> StepFunction<T> {
        (**self).apply(f)
    }
    fn apply_adjoint(&self, f: &StepFunction<T>) -> StepFunction<T> {
        (**self).apply_adjoint(f)
    }
    fn label(&self) -> OperatorLabel {
        (**self).label()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Identity {
    pub grid: GridSpec,
}

impl<T: Scalar> LinearOperator<T> for Identity {
    fn grid(&self) -> GridSpec {
        self.grid
    }
    fn apply(&self, f: &StepFunction<T>) -> StepFunction<T> {
        f.clone()
    }
    fn apply_adjoint(&self, f: &StepFunction<T>) -> StepFunction<T> {
        f.clone()
    }
    fn label(&self) -> OperatorLabel {
        OperatorLabel::Identity
    }
}

/// Pointwise multiplication `M_g`.
#[derive(Clone, Debug)]
pub struct Multiplication<T> {
    g: StepFunction<T>,
    name: String,
}

impl<T: Scalar> Multiplication<T> {
    pub fn new(g: StepFunction<T>, name: impl Into<String>) -> Self {
        Self { g, name: name.into() }
    }

    pub fn function(&self) -> &StepFunction<T> {
        &self.g
    }
}

impl<T: Scalar> LinearOperator<T> for Multiplication<T> {
    fn grid(&self) -> GridSpec {
        self.g.grid()
    }
    fn apply(&self, f: &StepFunction<T>) -> StepFunction<T> {
        f * &self.g
    }
    fn apply_adjoint(&self, f: &StepFunction<T>) -> StepFunction<T> {
        f * &self.g
    }
    fn label(&self) -> OperatorLabel {
        OperatorLabel::Multiplication { function: self.name.clone() }
    }
}

/// `ops[0] o ops[1] o ... o ops[n-1]`; the last factor acts first.
#[derive(Clone)]
pub struct Composition<T: Scalar> {
    ops: Vec<SharedOperator<T>>,
}

impl<T: Scalar> Composition<T> {
    pub fn new(ops: Vec<SharedOperator<T>>) -> Result<Self> {
        let first = ops.first().ok_or_else(|| Error::InvalidParameter("empty composition".into()))?;
        let g = first.grid();
        for op in &ops[1..] {
            g.ensure_same(&op.grid())?;
        }
        Ok(Self { ops })
    }

    pub fn factors(&self) -> &[SharedOperator<T>] {
        &self.ops
    }
}

impl<T: Scalar> LinearOperator<T> for Composition<T> {
    fn grid(&self) -> GridSpec {
        self.ops[0].grid()
    }
    fn apply(&self, f: &StepFunction<T>) -> StepFunction<T> {
        let mut out = f.clone();
        for op in self.ops.iter().rev() {
            out = op.apply(&out);
        }
        out
    }
    fn apply_adjoint(&self, f: &StepFunction<T>) -> StepFunction<T> {
        let mut out = f.clone();
        for op in &self.ops {
            out = op.apply_adjoint(&out);
        }
        out
    }
    fn label(&self) -> OperatorLabel {
        OperatorLabel::Compose(self.ops.iter().map(|o| o.label()).collect())
    }
}

/// `sum ops[i]`.
#[derive(Clone)]
pub struct OperatorSum<T: Scalar> {
    ops: Vec<SharedOperator<T>>,
}

impl<T: Scalar> OperatorSum<T> {
    pub fn new(ops: Vec<SharedOperator<T>>) -> Result<Self> {
        let first = ops.first().ok_or_else(|| Error::InvalidParameter("empty sum".into()))?;
        let g = first.grid();
        for op in &ops[1..] {
            g.ensure_same(&op.grid())?;
        }
        Ok(Self { ops })
    }
}

impl<T: Scalar> LinearOperator<T> for OperatorSum<T> {
    fn grid(&self) -> GridSpec {
        self.ops[0].grid()
    }
    fn apply(&self, f: &StepFunction<T>) -> StepFunction<T> {
        let mut out = StepFunction::zeros(f.grid());
        for op in &self.ops {
            out.axpy(T::one(), &op.apply(f));
        }
        out
    }
    fn apply_adjoint(&self, f: &StepFunction<T>) -> StepFunction<T> {
        let mut out = StepFunction::zeros(f.grid());
        for op in &self.ops {
            out.axpy(T::one(), &op.apply_adjoint(f));
        }
        out
    }
    fn label(&self) -> OperatorLabel {
        OperatorLabel::Sum(self.ops.iter().map(|o| o.label()).collect())
    }
}

/// `c * op`.
#[derive(Clone)]
pub struct Scaled<T: Scalar> {
    pub factor: T,
    pub op: SharedOperator<T>,
}

impl<T: Scalar> LinearOperator<T> for Scaled<T> {
    fn grid(&self) -> GridSpec {
        self.op.grid()
    }
    fn apply(&self, f: &StepFunction<T>) -> StepFunction<T> {
        self.op.apply(f).scale(self.factor)
    }
    fn apply_adjoint(&self, f: &StepFunction<T>) -> StepFunction<T> {
        self.op.apply_adjoint(f).scale(self.factor)
    }
    fn label(&self) -> OperatorLabel {
        OperatorLabel::Scaled(Box::new(self.op.label()))
    }
}

/// `op*` as an operator.
#[derive(Clone)]
pub struct Adjoint<T: Scalar> {
    pub op: SharedOperator<T>,
}

impl<T: Scalar> LinearOperator<T> for Adjoint<T> {
    fn grid(&self) -> GridSpec {
        self.op.grid()
    }
    fn apply(&self, f: &StepFunction<T>) -> StepFunction<T> {
        self.op.apply_adjoint(f)
    }
    fn apply_adjoint(&self, f: &StepFunction<T>) -> StepFunction<T> {
        self.op.apply(f)
    }
    fn label(&self) -> OperatorLabel {
        OperatorLabel::Adjoint(Box::new(self.op.label()))
    }
}

/// `op o P_0`, where `P_0 f = f - <f>` projects onto the mean-zero span.
#[derive(Clone)]
pub struct MeanZeroRestriction<T: Scalar> {
    pub op: SharedOperator<T>,
}

impl<T: Scalar> LinearOperator<T> for MeanZeroRestriction<T> {
    fn grid(&self) -> GridSpec {
        self.op.grid()
    }
    fn apply(&self, f: &StepFunction<T>) -> StepFunction<T> {
        self.op.apply(&f.without_mean())
    }
    fn apply_adjoint(&self, f: &StepFunction<T>) -> StepFunction<T> {
        self.op.apply_adjoint(f).without_mean()
    }
    fn label(&self) -> OperatorLabel {
        OperatorLabel::MeanZero(Box::new(self.op.label()))
    }
}

/// Operator given by its matrix in the orthonormal cell basis.
#[derive(Clone, Debug)]
pub struct DenseOperator<T> {
    grid: GridSpec,
    matrix: DenseMatrix<T>,
}

impl<T: Scalar> DenseOperator<T> {
    pub fn new(grid: GridSpec, matrix: DenseMatrix<T>) -> Result<Self> {
        let n = grid.cell_count();
        if matrix.rows() != n || matrix.cols() != n {
            return Err(Error::InvalidParameter(format!(
                "matrix is {}x{}, grid span is {n}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        Ok(Self { grid, matrix })
    }

    pub fn matrix(&self) -> &DenseMatrix<T> {
        &self.matrix
    }
}

impl<T: Scalar> LinearOperator<T> for DenseOperator<T> {
    fn grid(&self) -> GridSpec {
        self.grid
    }
    fn apply(&self, f: &StepFunction<T>) -> StepFunction<T> {
        StepFunction::new(self.grid, self.matrix.mul_vec(f.cells())).expect("cell count")
    }
    fn apply_adjoint(&self, f: &StepFunction<T>) -> StepFunction<T> {
        StepFunction::new(self.grid, self.matrix.mul_vec_transposed(f.cells())).expect("cell count")
    }
    fn label(&self) -> OperatorLabel {
        OperatorLabel::Dense
    }
}

/// Orthonormal basis used for materialization.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Basis {
    /// `1_Q / sqrt(|Q|)` over finest cells, row-major.
    Cell,
    /// The constant `1` first, then `h^alpha_I` in slot order.
    Haar,
}

/// Haar-basis coordinates of `f`: `[mean, coeffs...]`.
pub fn haar_coordinates<T: Scalar>(f: &StepFunction<T>) -> Vec<T> {
    let s = analyze(f);
    let mut v = Vec::with_capacity(f.cells().len());
    v.push(s.mean);
    v.extend_from_slice(s.coeffs());
    v
}

/// Inverse of [`haar_coordinates`].
pub fn from_haar_coordinates<T: Scalar>(grid: GridSpec, v: &[T]) -> StepFunction<T> {
    HaarSpectrum::new(grid, v[0], v[1..].to_vec()).synthesize()
}

/// Cell-basis coordinates: equal to the cell values, since `op(1_Q)/sqrt|Q|`
/// paired with `1_P/sqrt|P|` is the value of `op(1_Q)` on `P`.
fn cell_column<T: Scalar>(op: &dyn LinearOperator<T>, j: usize) -> Vec<T> {
    op.apply(&StepFunction::cell_indicator(op.grid(), j)).into_cells()
}

/// Matrix of `op` in the chosen orthonormal basis.
pub fn materialize<T: Scalar>(op: &dyn LinearOperator<T>, basis: Basis) -> Result<DenseMatrix<T>> {
    let grid = op.grid();
    let n = grid.cell_count();
    if n > DENSE_CAP {
        return Err(Error::SizeCap { size: n, cap: DENSE_CAP });
    }
    let mut m = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let col = match basis {
            Basis::Cell => cell_column(op, j),
            Basis::Haar => {
                let mut e = vec![T::zero(); n];
                e[j] = T::one();
                haar_coordinates(&op.apply(&from_haar_coordinates(grid, &e)))
            }
        };
        m.set_column(j, &col);
    }
    Ok(m)
}
