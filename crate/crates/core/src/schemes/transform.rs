//! Scheme transformations that preserve correctness: embedding the
//! ciphertext space into a larger one, and restricting to a keyed subset of
//! messages.

use std::fmt;
use std::sync::Arc;

use super::{check_message, Key, Qecm, SchemeRef};
use crate::error::{Error, Result};
use crate::linalg::{identity, max_abs_diff, ComplexMatrix, DensityOperator, TOL};
use crate::povm::Povm;
use crate::rng::RngState;

/// `Enc′ = V Enc V†`, `Dec′(ρ) = Dec(V†ρV)`.
///
/// The decryption effects `V D_m V†` only sum to `VV†`; the complement
/// `I − VV†` (never populated by honest ciphertexts) is assigned to message 0.
#[derive(Debug, Clone)]
pub struct ExtendedScheme {
    inner: SchemeRef,
    iso: ComplexMatrix,
}

pub fn extend_scheme(e: SchemeRef, iso: ComplexMatrix) -> Result<ExtendedScheme> {
    let d = e.cipher_dim();
    if iso.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: iso.ncols(),
        });
    }
    if iso.nrows() < d {
        return Err(Error::invalid(format!(
            "target dimension {} smaller than {d}",
            iso.nrows()
        )));
    }
    let deviation = max_abs_diff(&(iso.adjoint() * &iso), &identity(d));
    if deviation > TOL.unitary {
        return Err(Error::NotIsometry { deviation });
    }
    Ok(ExtendedScheme { inner: e, iso })
}

impl ExtendedScheme {
    pub fn isometry(&self) -> &ComplexMatrix {
        &self.iso
    }

    fn lift(&self, x: &ComplexMatrix) -> ComplexMatrix {
        &self.iso * x * self.iso.adjoint()
    }
}

impl Qecm for ExtendedScheme {
    fn label(&self) -> String {
        format!("extend({}, d'={})", self.inner.label(), self.iso.nrows())
    }
    fn message_count(&self) -> usize {
        self.inner.message_count()
    }
    fn cipher_dim(&self) -> usize {
        self.iso.nrows()
    }
    fn sample_key(&self, rng: &mut RngState) -> Key {
        self.inner.sample_key(rng)
    }
    fn encrypt(&self, key: &Key, message: usize) -> Result<DensityOperator> {
        let c = self.inner.encrypt(key, message)?;
        Ok(DensityOperator::from_trusted(self.lift(c.matrix())))
    }
    fn decrypt_povm(&self, key: &Key) -> Result<Povm> {
        let dec = self.inner.decrypt_povm(key)?;
        let dim = self.cipher_dim();
        let mut effects: Vec<ComplexMatrix> = dec.effects().iter().map(|e| self.lift(e)).collect();
        effects[0] += identity(dim) - &self.iso * self.iso.adjoint();
        Ok(Povm::from_trusted(effects))
    }
    fn enumerate_keys(&self) -> Option<Vec<Key>> {
        self.inner.enumerate_keys()
    }
}

/// Keyed injection `φ_k : [M′] → [M]`.
pub type MessageMap = Arc<dyn Fn(&Key, usize) -> usize + Send + Sync>;

/// `Enc′_k(m) = Enc_k(φ_k(m))`, `Dec′_k = φ_k^{-1} ∘ Dec_k`.
///
/// Decryption outcomes outside the image of `φ_k` are reported as message 0.
#[derive(Clone)]
pub struct ExpurgatedScheme {
    inner: SchemeRef,
    mprime: usize,
    phi: MessageMap,
}

impl fmt::Debug for ExpurgatedScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExpurgatedScheme")
            .field("inner", &self.inner)
            .field("mprime", &self.mprime)
            .finish_non_exhaustive()
    }
}

pub fn expurgate_scheme(e: SchemeRef, mprime: usize, phi: MessageMap) -> Result<ExpurgatedScheme> {
    if mprime == 0 || mprime > e.message_count() {
        return Err(Error::invalid(format!(
            "M' = {mprime} must lie in 1..={}",
            e.message_count()
        )));
    }
    Ok(ExpurgatedScheme {
        inner: e,
        mprime,
        phi,
    })
}

impl ExpurgatedScheme {
    /// `(φ_k(0), …, φ_k(M′−1))`, checked to be an injection into `[M]`.
    pub fn images(&self, key: &Key) -> Result<Vec<usize>> {
        let m = self.inner.message_count();
        let images: Vec<usize> = (0..self.mprime).map(|j| (self.phi)(key, j)).collect();
        let mut owner = vec![None; m];
        for (j, &img) in images.iter().enumerate() {
            if img >= m {
                return Err(Error::invalid(format!(
                    "φ maps {j} to {img}, outside [{m}]"
                )));
            }
            if let Some(first) = owner[img] {
                return Err(Error::NotInjective {
                    first,
                    second: j,
                    image: img,
                });
            }
            owner[img] = Some(j);
        }
        Ok(images)
    }
}

impl Qecm for ExpurgatedScheme {
    fn label(&self) -> String {
        format!("expurgate({}, M'={})", self.inner.label(), self.mprime)
    }
    fn message_count(&self) -> usize {
        self.mprime
    }
    fn cipher_dim(&self) -> usize {
        self.inner.cipher_dim()
    }
    fn sample_key(&self, rng: &mut RngState) -> Key {
        self.inner.sample_key(rng)
    }
    fn encrypt(&self, key: &Key, message: usize) -> Result<DensityOperator> {
        check_message(self, message)?;
        let images = self.images(key)?;
        self.inner.encrypt(key, images[message])
    }
    fn decrypt_povm(&self, key: &Key) -> Result<Povm> {
        let images = self.images(key)?;
        let dec = self.inner.decrypt_povm(key)?;
        let mut map = vec![0; dec.outcome_count()];
        for (j, &img) in images.iter().enumerate() {
            map[img] = j;
        }
        dec.coarse_grain(&map, self.mprime)
    }
    fn enumerate_keys(&self) -> Option<Vec<Key>> {
        self.inner.enumerate_keys()
    }
}

/// `φ_k` selecting, per key, the `M′` ciphertexts of lowest rank
/// (ties broken by message index).
///
/// With ranks summing to at most `d`, every selected ciphertext has rank at
/// most `d/(M − M′)`.
pub fn lowest_rank_selector(e: SchemeRef) -> MessageMap {
    Arc::new(move |key: &Key, j: usize| {
        let mut ranked: Vec<(usize, usize)> = (0..e.message_count())
            .map(|m| (e.encrypt(key, m).map(|c| c.rank()).unwrap_or(usize::MAX), m))
            .collect();
        ranked.sort_unstable();
        ranked[j].1
    })
}
