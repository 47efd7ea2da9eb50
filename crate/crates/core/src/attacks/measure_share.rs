//! Measure the ciphertext in a fixed basis and give both parties the outcome.

use std::f64::consts::PI;
use std::sync::Arc;

use super::{CloningAttack, KeyedPovm};
use crate::error::{Error, Result};
use crate::linalg::{basis_vector, haar_unitary, r, ComplexMatrix, KrausChannel, UnitaryOp};
use crate::mc::{self, Estimate};
use crate::povm::Povm;
use crate::rng::RngState;
use crate::schemes::{Key, Qecm, SchemeRef};

/// Kraus operators `|i⟩_B|i⟩_C⟨e_i|` for the columns `e_i` of `basis`.
pub fn measure_share_attack(d: usize, basis: &UnitaryOp) -> Result<KrausChannel> {
    if basis.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: basis.dim(),
        });
    }
    let ops = (0..d)
        .map(|i| basis_vector(d * d, i * d + i) * basis.column(i).adjoint())
        .collect();
    KrausChannel::new(d, d * d, ops)
}

/// Alias kept for symmetry with the other channel constructors.
pub fn measure_share_channel(basis: &UnitaryOp) -> KrausChannel {
    measure_share_attack(basis.dim(), basis).expect("basis dimension matches")
}

#[derive(Debug, Clone)]
pub struct MeasureShareDecode {
    /// Guessed message for each measurement outcome.
    pub labels: Vec<usize>,
    /// Decode as a POVM on one party's register (standard basis).
    pub povm: Povm,
    pub value: f64,
}

/// Diagonal `⟨e_i|Enc_k(m)|e_i⟩` for every outcome `i` and message `m`.
fn outcome_likelihoods(e: &dyn Qecm, key: &Key, basis: &UnitaryOp) -> Result<Vec<Vec<f64>>> {
    let d = e.cipher_dim();
    if basis.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: basis.dim(),
        });
    }
    let u = basis.matrix();
    let mut out = vec![vec![0.0; e.message_count()]; d];
    for m in 0..e.message_count() {
        let cu = e.encrypt(key, m)?.matrix() * u;
        for (i, row) in out.iter_mut().enumerate() {
            row[m] = u.column(i).dotc(&cu.column(i)).re;
        }
    }
    Ok(out)
}

fn ml_decode(likelihoods: &[Vec<f64>], messages: usize) -> (Vec<usize>, f64) {
    let mut labels = Vec::with_capacity(likelihoods.len());
    let mut total = 0.0;
    for row in likelihoods {
        let mut best = 0;
        for m in 1..row.len() {
            if row[m] > row[best] {
                best = m;
            }
        }
        labels.push(best);
        total += row[best];
    }
    (labels, total / messages as f64)
}

/// Per-key value `(1/M) Σ_i max_m ⟨e_i|Enc_k(m)|e_i⟩`.
pub fn measure_share_value(e: &dyn Qecm, key: &Key, basis: &UnitaryOp) -> Result<f64> {
    let lik = outcome_likelihoods(e, key, basis)?;
    Ok(ml_decode(&lik, e.message_count()).1)
}

/// Maximum-likelihood decode of the shared outcome, ties to the smallest message.
pub fn optimal_decode_for_measure_share(
    e: &dyn Qecm,
    key: &Key,
    basis: &UnitaryOp,
) -> Result<MeasureShareDecode> {
    let m = e.message_count();
    let lik = outcome_likelihoods(e, key, basis)?;
    let (labels, value) = ml_decode(&lik, m);
    let povm = Povm::projective(&UnitaryOp::identity(e.cipher_dim()), &labels, m)?;
    Ok(MeasureShareDecode {
        labels,
        povm,
        value,
    })
}

/// Measure-and-share in `basis` with both parties decoding by maximum likelihood.
pub fn measure_share_cloning_attack(e: SchemeRef, basis: UnitaryOp) -> Result<CloningAttack> {
    let d = e.cipher_dim();
    let channel = measure_share_attack(d, &basis)?;
    let povm: KeyedPovm = Arc::new(move |key: &Key| {
        Ok(optimal_decode_for_measure_share(e.as_ref(), key, &basis)?.povm)
    });
    CloningAttack::new("measure_share", channel, (d, d), povm.clone(), povm)
}

/// Monte Carlo over independent (key, Haar basis) pairs of the measure-and-share value.
pub fn random_basis_attack_estimate(
    e: &dyn Qecm,
    trials: usize,
    rng: &mut RngState,
) -> Result<Estimate> {
    if trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    let d = e.cipher_dim();
    mc::estimate(trials, rng, |r| {
        let key = e.sample_key(r);
        let u = haar_unitary(d, r);
        measure_share_value(e, &key, &u)
    })
}

/// `n`-fold tensor power of the qubit eigenbasis of `|0⟩⟨0| + |+⟩⟨+|`.
pub fn breidbart_basis(n: usize) -> UnitaryOp {
    let (s, c) = (PI / 8.0).sin_cos();
    let one = UnitaryOp::new(ComplexMatrix::from_row_slice(
        2,
        2,
        &[r(c), r(-s), r(s), r(c)],
    ))
    .expect("rotation is unitary");
    (1..n).fold(
        if n == 0 {
            UnitaryOp::identity(1)
        } else {
            one.clone()
        },
        |acc, _| acc.tensor(&one),
    )
}
