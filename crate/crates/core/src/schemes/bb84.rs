use rand::Rng;

use super::{check_message, Key, Qecm};
use crate::error::{Error, Result};
use crate::linalg::{outer, r, ComplexVector, DensityOperator};
use crate::povm::Povm;
use crate::rng::RngState;

/// `n` message bits, each one-time padded and encoded in a keyed BB84 basis.
///
/// Bit `i` of message `m` is `(m >> (n − 1 − i)) & 1`, so qubit 0 is the most
/// significant tensor factor.
#[derive(Debug, Clone)]
pub struct Bb84Scheme {
    n: usize,
}

const MAX_QUBITS: usize = 10;

pub fn bb84_scheme(n: usize) -> Result<Bb84Scheme> {
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::invalid(format!(
            "BB84 needs 1 ≤ n ≤ {MAX_QUBITS}, got {n}"
        )));
    }
    Ok(Bb84Scheme { n })
}

fn qubit(bit: bool, hadamard: bool) -> ComplexVector {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    match (hadamard, bit) {
        (false, false) => ComplexVector::from_vec(vec![r(1.0), r(0.0)]),
        (false, true) => ComplexVector::from_vec(vec![r(0.0), r(1.0)]),
        (true, false) => ComplexVector::from_vec(vec![r(s), r(s)]),
        (true, true) => ComplexVector::from_vec(vec![r(s), r(-s)]),
    }
}

impl Bb84Scheme {
    pub fn qubits(&self) -> usize {
        self.n
    }

    fn unpack<'a>(&self, key: &'a Key) -> Result<(&'a [bool], &'a [bool])> {
        match key {
            Key::Bb84 { bases, pad } if bases.len() == self.n && pad.len() == self.n => {
                Ok((bases, pad))
            }
            _ => Err(Error::invalid("key does not belong to this BB84 scheme")),
        }
    }

    fn bit(&self, m: usize, i: usize) -> bool {
        (m >> (self.n - 1 - i)) & 1 == 1
    }

    fn codeword(&self, bases: &[bool], pad: &[bool], m: usize) -> ComplexVector {
        let mut v = ComplexVector::from_vec(vec![r(1.0)]);
        for i in 0..self.n {
            v = v.kronecker(&qubit(self.bit(m, i) ^ pad[i], bases[i]));
        }
        v
    }
}

fn bits(x: usize, n: usize) -> Vec<bool> {
    (0..n).map(|i| (x >> (n - 1 - i)) & 1 == 1).collect()
}

impl Qecm for Bb84Scheme {
    fn label(&self) -> String {
        format!("bb84(n={})", self.n)
    }

    fn message_count(&self) -> usize {
        1 << self.n
    }

    fn cipher_dim(&self) -> usize {
        1 << self.n
    }

    fn sample_key(&self, rng: &mut RngState) -> Key {
        let bases = (0..self.n).map(|_| rng.random()).collect();
        let pad = (0..self.n).map(|_| rng.random()).collect();
        Key::Bb84 { bases, pad }
    }

    fn encrypt(&self, key: &Key, message: usize) -> Result<DensityOperator> {
        check_message(self, message)?;
        let (bases, pad) = self.unpack(key)?;
        Ok(DensityOperator::from_trusted(outer(
            &self.codeword(bases, pad, message),
        )))
    }

    fn decrypt_povm(&self, key: &Key) -> Result<Povm> {
        let (bases, pad) = self.unpack(key)?;
        let effects = (0..self.message_count())
            .map(|m| outer(&self.codeword(bases, pad, m)))
            .collect();
        Ok(Povm::from_trusted(effects))
    }

    fn enumerate_keys(&self) -> Option<Vec<Key>> {
        let size = 1usize << self.n;
        let mut keys = Vec::with_capacity(size * size);
        for b in 0..size {
            for p in 0..size {
                keys.push(Key::Bb84 {
                    bases: bits(b, self.n),
                    pad: bits(p, self.n),
                });
            }
        }
        Some(keys)
    }
}
