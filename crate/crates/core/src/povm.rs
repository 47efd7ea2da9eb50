//! Positive operator-valued measures.

use crate::error::{Error, Result};
use crate::linalg::{
    expectation, herm_eig, hermitian_deviation, identity, max_abs_diff, outer, ComplexMatrix,
    DensityOperator, Projector, UnitaryOp, TOL,
};

/// Finite list of positive effects summing to the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    dim: usize,
    effects: Vec<ComplexMatrix>,
}

impl Povm {
    pub fn new(effects: Vec<ComplexMatrix>) -> Result<Self> {
        Self::with_tolerance(effects, TOL.povm)
    }

    /// Validate with a custom positivity/completeness tolerance.
    pub fn with_tolerance(effects: Vec<ComplexMatrix>, tol: f64) -> Result<Self> {
        let Some(first) = effects.first() else {
            return Err(Error::InvalidPovm("no effects".into()));
        };
        let dim = first.nrows();
        let mut sum = ComplexMatrix::zeros(dim, dim);
        for (i, e) in effects.iter().enumerate() {
            if e.nrows() != dim || e.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: e.nrows(),
                });
            }
            let dev = hermitian_deviation(e);
            if dev > TOL.hermitian.max(tol / 10.0) {
                return Err(Error::InvalidPovm(format!(
                    "effect {i} not Hermitian ({dev:.3e})"
                )));
            }
            let min = herm_eig(&crate::linalg::hermitize(e))?
                .values
                .last()
                .copied()
                .unwrap_or(0.0);
            if min < -tol {
                return Err(Error::InvalidPovm(format!(
                    "effect {i} has eigenvalue {min:.3e}"
                )));
            }
            sum += e;
        }
        let dev = max_abs_diff(&sum, &identity(dim));
        if dev > tol {
            return Err(Error::InvalidPovm(format!(
                "effects sum to identity only within {dev:.3e}"
            )));
        }
        Ok(Self { dim, effects })
    }

    pub(crate) fn from_trusted(effects: Vec<ComplexMatrix>) -> Self {
        let dim = effects[0].nrows();
        debug_assert!({
            let s = effects
                .iter()
                .fold(ComplexMatrix::zeros(dim, dim), |a, e| a + e);
            max_abs_diff(&s, &identity(dim)) < 1e-7
        });
        Self { dim, effects }
    }

    /// Projective measurement in `basis`: column `i` is reported as `labels[i]`.
    pub fn projective(basis: &UnitaryOp, labels: &[usize], outcomes: usize) -> Result<Self> {
        let dim = basis.dim();
        if labels.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: labels.len(),
            });
        }
        let mut effects = vec![ComplexMatrix::zeros(dim, dim); outcomes];
        for (i, &m) in labels.iter().enumerate() {
            if m >= outcomes {
                return Err(Error::InvalidPovm(format!("label {m} out of range")));
            }
            effects[m] += outer(&basis.column(i));
        }
        Ok(Self { dim, effects })
    }

    /// Always report `guess`.
    pub fn constant(dim: usize, outcomes: usize, guess: usize) -> Self {
        assert!(guess < outcomes);
        let mut effects = vec![ComplexMatrix::zeros(dim, dim); outcomes];
        effects[guess] = identity(dim);
        Self { dim, effects }
    }

    /// Report a uniformly random outcome, `{I/M}`.
    pub fn uniform(dim: usize, outcomes: usize) -> Self {
        let e = identity(dim).unscale(outcomes as f64);
        Self {
            dim,
            effects: vec![e; outcomes],
        }
    }

    /// `{Π, I − Π}`.
    pub fn binary(p: &Projector) -> Self {
        Self {
            dim: p.dim(),
            effects: vec![p.matrix().clone(), p.complement().matrix().clone()],
        }
    }

    /// Relabel outcomes: new effect `j` collects every old effect `i` with `map[i] = j`.
    pub fn coarse_grain(&self, map: &[usize], outcomes: usize) -> Result<Self> {
        if map.len() != self.effects.len() {
            return Err(Error::DimensionMismatch {
                expected: self.effects.len(),
                found: map.len(),
            });
        }
        let mut effects = vec![ComplexMatrix::zeros(self.dim, self.dim); outcomes];
        for (e, &j) in self.effects.iter().zip(map) {
            if j >= outcomes {
                return Err(Error::InvalidPovm(format!("label {j} out of range")));
            }
            effects[j] += e;
        }
        Ok(Self {
            dim: self.dim,
            effects,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn outcome_count(&self) -> usize {
        self.effects.len()
    }

    pub fn effects(&self) -> &[ComplexMatrix] {
        &self.effects
    }

    pub fn effect(&self, i: usize) -> &ComplexMatrix {
        &self.effects[i]
    }

    pub fn probabilities(&self, rho: &DensityOperator) -> Result<Vec<f64>> {
        if rho.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: rho.dim(),
            });
        }
        Ok(self
            .effects
            .iter()
            .map(|e| expectation(e, rho.matrix()))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{haar_unitary, r};
    use crate::rng::RngState;

    #[test]
    fn validation() {
        assert!(Povm::new(vec![identity(2)]).is_ok());
        assert!(Povm::new(vec![identity(2), identity(2)]).is_err());
        let mut neg = identity(2);
        neg[(1, 1)] = r(-0.5);
        let mut comp = ComplexMatrix::zeros(2, 2);
        comp[(1, 1)] = r(1.5);
        assert!(Povm::new(vec![neg, comp]).is_err());
        assert!(Povm::new(vec![]).is_err());
    }

    #[test]
    fn projective_is_valid() {
        let u = haar_unitary(5, &mut RngState::new(1));
        let p = Povm::projective(&u, &[0, 1, 2, 0, 1], 3).unwrap();
        assert!(Povm::new(p.effects().to_vec()).is_ok());
        let probs = p
            .probabilities(&DensityOperator::maximally_mixed(5))
            .unwrap();
        assert!((probs[0] - 0.4).abs() < 1e-12 && (probs[2] - 0.2).abs() < 1e-12);
    }
}
