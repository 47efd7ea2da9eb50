//! Dense complex linear algebra: validated operator types, tensor products,
//! Hermitian eigendecomposition, partial traces, channel application and
//! Haar/spherical sampling.
//!
//! Matrices are `nalgebra` dense matrices over `Complex64`. The newtypes in
//! this module check their defining property once at construction, against
//! the absolute tolerances collected in [`TOL`].

mod ops;
mod random;

pub use ops::{
    apply_channel, apply_channel_matrix, herm_eig, partial_trace, partial_trace_matrix,
    pseudo_inv_sqrt, tensor, Eigen, Keep,
};
pub use random::{
    ginibre, haar_unitary, random_density_operator, random_hermitian, uniform_sphere_vector,
};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<C64>;
pub type ComplexVector = DVector<C64>;

/// Absolute tolerances used by every validity check in the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// `| ‖ψ‖ − 1 |` for pure states.
    pub norm: f64,
    /// Max entry of `H − H†`.
    pub hermitian: f64,
    /// Most negative eigenvalue tolerated for density operators.
    pub psd: f64,
    /// `| tr ρ − 1 |`.
    pub trace: f64,
    /// Max entry of `U U† − I` (and `V† V − I` for isometries).
    pub unitary: f64,
    /// Max entry of `Π² − Π`.
    pub idempotent: f64,
    /// Max entry of `Σ K†K − I`.
    pub kraus: f64,
    /// POVM effect positivity and completeness.
    pub povm: f64,
    /// Max entry of `ρσ` for states treated as orthogonal.
    pub orthogonal: f64,
    /// Eigenvalues at or below this are treated as outside the support.
    pub support: f64,
}

pub const TOL: Tolerances = Tolerances {
    norm: 1e-10,
    hermitian: 1e-10,
    psd: 1e-10,
    trace: 1e-10,
    unitary: 1e-9,
    idempotent: 1e-9,
    kraus: 1e-9,
    povm: 1e-9,
    orthogonal: 1e-9,
    support: 1e-9,
};

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn r(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

pub fn hermitian_deviation(m: &ComplexMatrix) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

/// `(M + M†)/2`, used to scrub round-off asymmetry from computed operators.
pub fn hermitize(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn identity(d: usize) -> ComplexMatrix {
    ComplexMatrix::identity(d, d)
}

pub fn basis_vector(d: usize, i: usize) -> ComplexVector {
    let mut v = ComplexVector::zeros(d);
    v[i] = r(1.0);
    v
}

pub fn outer(v: &ComplexVector) -> ComplexMatrix {
    v * v.adjoint()
}

pub fn trace(m: &ComplexMatrix) -> C64 {
    m.diagonal().iter().sum()
}

/// `tr(A B)` without forming the product.
pub fn trace_product(a: &ComplexMatrix, b: &ComplexMatrix) -> C64 {
    debug_assert_eq!(a.ncols(), b.nrows());
    debug_assert_eq!(a.nrows(), b.ncols());
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// Real part of `tr(A B)`; for Hermitian arguments the imaginary part is round-off.
pub fn expectation(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    trace_product(a, b).re
}

fn check_square(m: &ComplexMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    Ok(m.nrows())
}

fn check_finite(m: &ComplexMatrix) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

/// Unit vector in a `dim`-dimensional Hilbert space.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: ComplexVector,
}

impl PureState {
    pub fn new(amplitudes: ComplexVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if !norm.is_finite() {
            return Err(Error::NonFinite);
        }
        if (norm - 1.0).abs() > TOL.norm {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { amplitudes })
    }

    /// Normalize an arbitrary nonzero vector.
    pub fn normalized(v: ComplexVector) -> Result<Self> {
        let norm = v.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self {
            amplitudes: v.unscale(norm),
        })
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        Self {
            amplitudes: basis_vector(dim, index),
        }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &ComplexVector {
        &self.amplitudes
    }

    pub fn density(&self) -> DensityOperator {
        DensityOperator::from_trusted(outer(&self.amplitudes))
    }
}

/// Hermitian, positive semidefinite, unit-trace operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
}

impl DensityOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        check_square(&matrix)?;
        check_finite(&matrix)?;
        let deviation = hermitian_deviation(&matrix);
        if deviation > TOL.hermitian {
            return Err(Error::NotHermitian { deviation });
        }
        let tr = trace(&matrix).re;
        if (tr - 1.0).abs() > TOL.trace {
            return Err(Error::BadTrace { trace: tr });
        }
        let eig = herm_eig(&matrix)?;
        let min_eigenvalue = eig.values.last().copied().unwrap_or(0.0);
        if min_eigenvalue < -TOL.psd {
            return Err(Error::NotPositive { min_eigenvalue });
        }
        Ok(Self { matrix })
    }

    /// Wrap an operator that is a density operator by construction.
    pub(crate) fn from_trusted(matrix: ComplexMatrix) -> Self {
        debug_assert!(matrix.nrows() == matrix.ncols());
        debug_assert!(
            (trace(&matrix).re - 1.0).abs() < 1e-8,
            "trace {}",
            trace(&matrix)
        );
        Self {
            matrix: hermitize(&matrix),
        }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: identity(dim).unscale(dim as f64),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn eigen(&self) -> Eigen {
        herm_eig(&self.matrix).expect("density operators are Hermitian")
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigen().values[0]
    }

    /// Number of eigenvalues above the support tolerance.
    pub fn rank(&self) -> usize {
        self.eigen()
            .values
            .iter()
            .filter(|&&l| l > TOL.support)
            .count()
    }

    pub fn tensor(&self, other: &DensityOperator) -> DensityOperator {
        Self {
            matrix: tensor(&self.matrix, &other.matrix),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryOp {
    matrix: ComplexMatrix,
}

impl UnitaryOp {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let d = check_square(&matrix)?;
        check_finite(&matrix)?;
        let deviation = max_abs_diff(&(&matrix * matrix.adjoint()), &identity(d));
        if deviation > TOL.unitary {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Self { matrix })
    }

    pub(crate) fn from_trusted(matrix: ComplexMatrix) -> Self {
        Self { matrix }
    }

    pub fn identity(d: usize) -> Self {
        Self {
            matrix: identity(d),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn column(&self, i: usize) -> ComplexVector {
        self.matrix.column(i).into_owned()
    }

    pub fn adjoint(&self) -> UnitaryOp {
        Self {
            matrix: self.matrix.adjoint(),
        }
    }

    /// `U X U†`.
    pub fn conjugate(&self, x: &ComplexMatrix) -> ComplexMatrix {
        &self.matrix * x * self.matrix.adjoint()
    }

    pub fn tensor(&self, other: &UnitaryOp) -> UnitaryOp {
        Self {
            matrix: tensor(&self.matrix, &other.matrix),
        }
    }
}

/// Orthogonal projector: Hermitian and idempotent.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector {
    matrix: ComplexMatrix,
}

impl Projector {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        check_square(&matrix)?;
        check_finite(&matrix)?;
        let deviation = hermitian_deviation(&matrix);
        if deviation > TOL.hermitian {
            return Err(Error::NotHermitian { deviation });
        }
        let deviation = max_abs_diff(&(&matrix * &matrix), &matrix);
        if deviation > TOL.idempotent {
            return Err(Error::NotProjector { deviation });
        }
        Ok(Self { matrix })
    }

    /// Projector onto the span of orthonormal `vectors` in dimension `dim`.
    pub fn onto(dim: usize, vectors: &[ComplexVector]) -> Result<Self> {
        let mut m = ComplexMatrix::zeros(dim, dim);
        for v in vectors {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: v.len(),
                });
            }
            m += outer(v);
        }
        Self::new(hermitize(&m))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn complement(&self) -> Projector {
        Self {
            matrix: identity(self.dim()) - &self.matrix,
        }
    }
}

/// Quantum channel in Kraus form, `ρ ↦ Σ K ρ K†`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    in_dim: usize,
    out_dim: usize,
    kraus_ops: Vec<ComplexMatrix>,
}

impl KrausChannel {
    pub fn new(in_dim: usize, out_dim: usize, kraus_ops: Vec<ComplexMatrix>) -> Result<Self> {
        if kraus_ops.is_empty() {
            return Err(Error::invalid(
                "a channel needs at least one Kraus operator",
            ));
        }
        let mut sum = ComplexMatrix::zeros(in_dim, in_dim);
        for k in &kraus_ops {
            if k.nrows() != out_dim {
                return Err(Error::DimensionMismatch {
                    expected: out_dim,
                    found: k.nrows(),
                });
            }
            if k.ncols() != in_dim {
                return Err(Error::DimensionMismatch {
                    expected: in_dim,
                    found: k.ncols(),
                });
            }
            check_finite(k)?;
            sum += k.adjoint() * k;
        }
        let deviation = max_abs_diff(&sum, &identity(in_dim));
        if deviation > TOL.kraus {
            return Err(Error::NotTracePreserving { deviation });
        }
        Ok(Self {
            in_dim,
            out_dim,
            kraus_ops,
        })
    }

    pub fn identity(d: usize) -> Self {
        Self {
            in_dim: d,
            out_dim: d,
            kraus_ops: vec![identity(d)],
        }
    }

    /// Single-Kraus channel `ρ ↦ V ρ V†` for an isometry `V`.
    pub fn isometry(v: ComplexMatrix) -> Result<Self> {
        Self::new(v.ncols(), v.nrows(), vec![v])
    }

    /// Discard the input and prepare `state`.
    pub fn discard_prepare(in_dim: usize, state: &DensityOperator) -> Self {
        let eig = state.eigen();
        let mut ops = Vec::new();
        for (j, &lambda) in eig.values.iter().enumerate() {
            if lambda <= TOL.support {
                continue;
            }
            let v = eig.vectors.column(j).scale(lambda.sqrt());
            for i in 0..in_dim {
                ops.push(&v * basis_vector(in_dim, i).adjoint());
            }
        }
        Self {
            in_dim,
            out_dim: state.dim(),
            kraus_ops: ops,
        }
    }

    /// Hand the input to the first output factor and prepare `ancilla` in the second.
    pub fn send_to_first(in_dim: usize, ancilla: &PureState) -> Self {
        let v = tensor(
            &identity(in_dim),
            &ComplexMatrix::from_column_slice(ancilla.dim(), 1, ancilla.amplitudes().as_slice()),
        );
        Self {
            in_dim,
            out_dim: in_dim * ancilla.dim(),
            kraus_ops: vec![v],
        }
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn kraus_ops(&self) -> &[ComplexMatrix] {
        &self.kraus_ops
    }
}
