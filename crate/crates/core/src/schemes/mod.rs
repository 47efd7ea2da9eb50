//! Quantum encryption of classical messages (QECM): the scheme interface,
//! concrete schemes, correctness checking and scheme transformations.
//!
//! A scheme carries a key sampler rather than an enumerable key set; the
//! expectation over keys is realized by sampling (or by enumeration for
//! schemes with a small finite key space, see [`Qecm::enumerate_keys`]).

mod bb84;
mod haar;
mod registry;
mod transform;

pub use bb84::{bb84_scheme, Bb84Scheme};
pub use haar::{haar_scheme, uniform_haar_scheme, HaarScheme, RankDistribution};
pub use registry::{RankWeight, SchemeDescriptor, SchemeFactory, SchemeRegistry};
pub use transform::{
    expurgate_scheme, extend_scheme, lowest_rank_selector, ExpurgatedScheme, ExtendedScheme,
    MessageMap,
};

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{expectation, DensityOperator, UnitaryOp};
use crate::povm::Povm;
use crate::rng::RngState;

/// Classical key of one of the built-in schemes.
#[derive(Debug, Clone, PartialEq)]
pub enum Key {
    /// Rank vector `t` and Haar unitary `u`.
    Haar {
        ranks: Vec<usize>,
        unitary: UnitaryOp,
    },
    /// Basis choice per qubit (`true` = Hadamard) and one-time pad bits.
    Bb84 { bases: Vec<bool>, pad: Vec<bool> },
}

/// A QECM `(KeyGen, Enc, Dec)`, with decryption given as a keyed POVM.
pub trait Qecm: Send + Sync + fmt::Debug {
    /// Short human-readable label, e.g. `uniform_haar(M=2,L=2)`.
    fn label(&self) -> String;
    fn message_count(&self) -> usize;
    fn cipher_dim(&self) -> usize;
    fn sample_key(&self, rng: &mut RngState) -> Key;
    fn encrypt(&self, key: &Key, message: usize) -> Result<DensityOperator>;
    fn decrypt_povm(&self, key: &Key) -> Result<Povm>;

    /// The full key space with uniform weight, when it is small and finite.
    fn enumerate_keys(&self) -> Option<Vec<Key>> {
        None
    }
}

pub type SchemeRef = Arc<dyn Qecm>;

pub(crate) fn check_message(e: &dyn Qecm, message: usize) -> Result<()> {
    if message >= e.message_count() {
        return Err(Error::invalid(format!(
            "message {message} out of range for {} messages",
            e.message_count()
        )));
    }
    Ok(())
}

pub fn sample_keys(e: &dyn Qecm, count: usize, rng: &mut RngState) -> Vec<Key> {
    (0..count).map(|_| e.sample_key(rng)).collect()
}

/// `1 − tr(D_m^k Enc_k(m))`, maximized over the given keys and all messages.
pub fn correctness_error_on_keys(e: &dyn Qecm, keys: &[Key]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for key in keys {
        let dec = e.decrypt_povm(key)?;
        for m in 0..e.message_count() {
            let c = e.encrypt(key, m)?;
            worst = worst.max(1.0 - expectation(dec.effect(m), c.matrix()));
        }
    }
    Ok(worst)
}

pub fn check_correctness(e: &dyn Qecm, key_samples: usize, rng: &mut RngState) -> Result<f64> {
    if key_samples == 0 {
        return Err(Error::invalid("key_samples must be at least 1"));
    }
    correctness_error_on_keys(e, &sample_keys(e, key_samples, rng))
}

/// Key-average of `λ_max(Enc_k(m))` for every message `m`.
pub fn mean_lambda_max_on_keys(e: &dyn Qecm, keys: &[Key]) -> Result<Vec<f64>> {
    let mut acc = vec![0.0; e.message_count()];
    for key in keys {
        for (m, a) in acc.iter_mut().enumerate() {
            *a += e.encrypt(key, m)?.lambda_max();
        }
    }
    let n = keys.len().max(1) as f64;
    Ok(acc.into_iter().map(|a| a / n).collect())
}

/// `max_m E_k[λ_max(Enc_k(m))]` over the given keys.
pub fn mu_on_keys(e: &dyn Qecm, keys: &[Key]) -> Result<f64> {
    Ok(mean_lambda_max_on_keys(e, keys)?
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max))
}

pub fn mu_statistic(e: &dyn Qecm, key_samples: usize, rng: &mut RngState) -> Result<f64> {
    if key_samples == 0 {
        return Err(Error::invalid("key_samples must be at least 1"));
    }
    mu_on_keys(e, &sample_keys(e, key_samples, rng))
}
