use super::{
    check_square, hermitian_deviation, hermitize, r, ComplexMatrix, DensityOperator, KrausChannel,
    UnitaryOp, TOL,
};
use crate::error::{Error, Result};

/// Kronecker product; row index of `(i_a, i_b)` is `i_a · rows(b) + i_b`.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// Hermitian eigendecomposition with eigenvalues in descending order.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    /// Column `i` is the eigenvector for `values[i]`.
    pub vectors: UnitaryOp,
}

impl Eigen {
    /// `V diag(f(λ)) V†`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let v = self.vectors.matrix();
        let mut scaled = v.clone();
        for (j, &l) in self.values.iter().enumerate() {
            let s = f(l);
            scaled.column_mut(j).scale_mut(s);
        }
        scaled * v.adjoint()
    }
}

pub fn herm_eig(h: &ComplexMatrix) -> Result<Eigen> {
    check_square(h)?;
    let deviation = hermitian_deviation(h);
    if deviation > TOL.hermitian {
        return Err(Error::NotHermitian { deviation });
    }
    let n = h.nrows();
    if n == 0 {
        return Ok(Eigen {
            values: vec![],
            vectors: UnitaryOp::from_trusted(h.clone()),
        });
    }
    let eig = hermitize(h).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    // stable: ties keep the decomposition's own order
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(Eigen {
        values,
        vectors: UnitaryOp::from_trusted(vectors),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keep {
    First,
    Second,
}

/// Partial trace of an operator on `C^da ⊗ C^db`.
pub fn partial_trace_matrix(
    m: &ComplexMatrix,
    dims: (usize, usize),
    keep: Keep,
) -> Result<ComplexMatrix> {
    let (da, db) = dims;
    if m.nrows() != da * db || m.ncols() != da * db {
        return Err(Error::DimensionMismatch {
            expected: da * db,
            found: m.nrows(),
        });
    }
    Ok(match keep {
        Keep::First => ComplexMatrix::from_fn(da, da, |i, j| {
            (0..db).map(|k| m[(i * db + k, j * db + k)]).sum()
        }),
        Keep::Second => ComplexMatrix::from_fn(db, db, |k, l| {
            (0..da).map(|i| m[(i * db + k, i * db + l)]).sum()
        }),
    })
}

pub fn partial_trace(
    rho: &DensityOperator,
    dims: (usize, usize),
    keep: Keep,
) -> Result<DensityOperator> {
    partial_trace_matrix(rho.matrix(), dims, keep).map(DensityOperator::from_trusted)
}

/// `Σ K X K†` for an arbitrary (not necessarily positive) operator `X`.
pub fn apply_channel_matrix(ch: &KrausChannel, x: &ComplexMatrix) -> Result<ComplexMatrix> {
    if x.nrows() != ch.in_dim() || x.ncols() != ch.in_dim() {
        return Err(Error::DimensionMismatch {
            expected: ch.in_dim(),
            found: x.nrows(),
        });
    }
    let mut out = ComplexMatrix::zeros(ch.out_dim(), ch.out_dim());
    for k in ch.kraus_ops() {
        out += k * x * k.adjoint();
    }
    Ok(out)
}

pub fn apply_channel(ch: &KrausChannel, rho: &DensityOperator) -> Result<DensityOperator> {
    apply_channel_matrix(ch, rho.matrix()).map(DensityOperator::from_trusted)
}

/// `ρ^{-1/2}` on eigenvalues above `cutoff`, zero elsewhere.
pub fn pseudo_inv_sqrt(rho: &DensityOperator, cutoff: f64) -> Result<ComplexMatrix> {
    if cutoff.is_nan() || cutoff <= 0.0 {
        return Err(Error::invalid("cutoff must be positive"));
    }
    let m = rho
        .eigen()
        .map(|l| if l > cutoff { l.sqrt().recip() } else { 0.0 });
    Ok(hermitize(&m))
}

/// Matrix for the bit-flip Pauli `X`, used in tests across the crate.
#[allow(dead_code)]
pub(crate) fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[r(0.0), r(1.0), r(1.0), r(0.0)])
}
