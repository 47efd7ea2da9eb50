//! Two-party one-way-to-hiding: the single-query counterexample state, the
//! bit oracle, the measured success probability and the extraction
//! probability, plus the general bound's right-hand side.
//!
//! Registers are four qubits ordered `(B_query, B_out, C_query, C_out)`, so
//! the basis index of `|bq, bo, cq, co⟩` is `8·bq + 4·bo + 2·cq + co`.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::attacks::{lemma1_projector_matrix, superposition_cloner};
use crate::error::{Error, Result};
use crate::linalg::{
    basis_vector, identity, r, tensor, ComplexMatrix, ComplexVector, Projector, PureState,
    UnitaryOp,
};

/// `H: {0,1} → {0,1}` as its value table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BooleanOracle {
    pub table: [bool; 2],
}

impl BooleanOracle {
    pub fn all() -> [BooleanOracle; 4] {
        [[false, false], [false, true], [true, false], [true, true]]
            .map(|table| BooleanOracle { table })
    }

    pub fn eval(&self, x: usize) -> bool {
        self.table[x]
    }

    pub fn unitary(&self) -> UnitaryOp {
        oracle_unitary(self.table[0], self.table[1])
    }
}

/// A single-query two-party instance: shared state, query counts and the
/// projective measurement `{Π^0, Π^1}` applied on each side.
#[derive(Debug, Clone)]
pub struct O2HInstance {
    pub psi: PureState,
    pub q_b: usize,
    pub q_c: usize,
    pub measurement: [Projector; 2],
}

fn plus() -> ComplexVector {
    ComplexVector::from_vec(vec![r(FRAC_1_SQRT_2), r(FRAC_1_SQRT_2)])
}

fn ket(bits: [usize; 2]) -> ComplexVector {
    basis_vector(4, 2 * bits[0] + bits[1])
}

/// `|1⟩|+⟩` on one side.
fn one_plus() -> ComplexVector {
    tensor_vec(&basis_vector(2, 1), &plus())
}

fn tensor_vec(a: &ComplexVector, b: &ComplexVector) -> ComplexVector {
    a.kronecker(b)
}

/// `(|0⟩|0⟩_B |1⟩|+⟩_C + |1⟩|+⟩_B |0⟩|0⟩_C)/√2`.
pub fn build_counterexample_state() -> PureState {
    let v = (tensor_vec(&ket([0, 0]), &one_plus()) + tensor_vec(&one_plus(), &ket([0, 0])))
        * r(FRAC_1_SQRT_2);
    PureState::new(v).expect("unit norm by construction")
}

/// `|x⟩|y⟩ ↦ |x⟩|y ⊕ H(x)⟩` with `H(0) = h0`, `H(1) = h1`.
pub fn oracle_unitary(h0: bool, h1: bool) -> UnitaryOp {
    let mut m = ComplexMatrix::zeros(4, 4);
    for x in 0..2 {
        let hx = [h0, h1][x] as usize;
        for y in 0..2 {
            m[(2 * x + (y ^ hx), 2 * x + y)] = r(1.0);
        }
    }
    UnitaryOp::new(m).expect("permutation matrix")
}

/// Per-side measurement: `Π^0` is the cloner projector with top vector
/// `|00⟩`, partner `|01⟩` and orthogonal direction `|1⟩|+⟩` at `α = 1/4`;
/// `Π^1 = I − Π^0`.
pub fn counterexample_measurement() -> [Projector; 2] {
    let p0 = Projector::new(lemma1_projector_matrix(
        &ket([0, 0]),
        &[],
        &one_plus(),
        0.25,
    ))
    .expect("rank-one projector");
    let p1 = p0.complement();
    [p0, p1]
}

pub fn counterexample_instance() -> O2HInstance {
    O2HInstance {
        psi: build_counterexample_state(),
        q_b: 1,
        q_c: 1,
        measurement: counterexample_measurement(),
    }
}

/// `‖Π^{H(0)} (O_B^H ⊗ O_C^H)|ψ⟩‖²` for one oracle.
pub fn success_for_oracle(inst: &O2HInstance, h: BooleanOracle) -> f64 {
    let o = h.unitary();
    let query = tensor(o.matrix(), o.matrix());
    let after = query * inst.psi.amplitudes();
    let y = h.eval(0) as usize;
    let meas = tensor(inst.measurement[y].matrix(), inst.measurement[y].matrix());
    (meas * after).norm_squared()
}

/// Uniform average of [`success_for_oracle`] over all four oracles.
pub fn simo2h_success_of(inst: &O2HInstance) -> f64 {
    BooleanOracle::all()
        .iter()
        .map(|&h| success_for_oracle(inst, h))
        .sum::<f64>()
        / 4.0
}

/// The counterexample's success probability, 9/16.
pub fn simo2h_success() -> f64 {
    simo2h_success_of(&counterexample_instance())
}

/// `‖(|0⟩⟨0|_{B_Q} ⊗ |0⟩⟨0|_{C_Q})|ψ⟩‖²` for a 16-dimensional state.
pub fn extraction_probability_of(psi: &PureState) -> Result<f64> {
    if psi.dim() != 16 {
        return Err(Error::DimensionMismatch {
            expected: 16,
            found: psi.dim(),
        });
    }
    let q0 = tensor(&crate::linalg::outer(&basis_vector(2, 0)), &identity(2));
    let proj = tensor(&q0, &q0);
    Ok((proj * psi.amplitudes()).norm_squared())
}

/// Extraction probability of the counterexample's pre-query state (zero).
pub fn extraction_probability() -> f64 {
    extraction_probability_of(&build_counterexample_state()).expect("16-dimensional state")
}

/// `9/2ⁿ + (3 q_B q_C + 2) q_B q_C √M`.
pub fn simo2h_rhs(n: u32, q_b: usize, q_c: usize, m_val: f64) -> Result<f64> {
    if m_val.is_nan() || m_val < 0.0 {
        return Err(Error::invalid(format!(
            "extraction probability must be nonnegative, got {m_val}"
        )));
    }
    let q = (q_b * q_c) as f64;
    Ok(9.0 / 2f64.powi(n as i32) + (3.0 * q + 2.0) * q * m_val.sqrt())
}

/// Isometry from the cloner's side space `span{e0, e1, ⊥}` into two qubits:
/// `e0 ↦ |00⟩`, `e1 ↦ |01⟩`, `⊥ ↦ |1⟩|+⟩`.
pub fn side_embedding() -> ComplexMatrix {
    let cols = [ket([0, 0]), ket([0, 1]), one_plus()];
    ComplexMatrix::from_columns(&cols)
}

/// Largest entry-wise gap between the post-query state for `H(0) = h0` and
/// `(W ⊗ W) V |h0⟩`, with `V` the two-dimensional superposition cloner.
pub fn embedding_deviation(h0: bool) -> f64 {
    let psi = build_counterexample_state();
    let o = oracle_unitary(h0, false);
    let after = tensor(o.matrix(), o.matrix()) * psi.amplitudes();
    let v = superposition_cloner(2).kraus_ops()[0].clone();
    let w = side_embedding();
    let expected = tensor(&w, &w) * (&v * basis_vector(2, h0 as usize));
    (after - expected).camax()
}
