use std::ops::Range;

use rand::Rng;

use super::{check_message, Key, Qecm};
use crate::error::{Error, Result};
use crate::linalg::{haar_unitary, ComplexMatrix, DensityOperator};
use crate::povm::Povm;
use crate::rng::RngState;

/// Distribution of the rank vector `t = (t_0, …, t_{M−1})`, each `t_m ≥ 1`
/// and `Σ t_m = d`.
#[derive(Debug, Clone, PartialEq)]
pub struct RankDistribution {
    support: Vec<Vec<usize>>,
    probabilities: Vec<f64>,
}

impl RankDistribution {
    pub fn new(support: Vec<Vec<usize>>, probabilities: Vec<f64>) -> Result<Self> {
        if support.is_empty() || support.len() != probabilities.len() {
            return Err(Error::InvalidRanks(
                "support and probabilities must match".into(),
            ));
        }
        if probabilities.iter().any(|&p| p.is_nan() || p < 0.0) {
            return Err(Error::InvalidRanks(
                "probabilities must be nonnegative".into(),
            ));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidRanks(format!("probabilities sum to {total}")));
        }
        Ok(Self {
            support,
            probabilities,
        })
    }

    pub fn deterministic(t: Vec<usize>) -> Self {
        Self {
            support: vec![t],
            probabilities: vec![1.0],
        }
    }

    /// Uniform over the distinct permutations of `t`.
    pub fn permutation_invariant(t: &[usize]) -> Self {
        let mut perms: Vec<Vec<usize>> = Vec::new();
        let mut cur = t.to_vec();
        cur.sort_unstable();
        loop {
            perms.push(cur.clone());
            if !next_permutation(&mut cur) {
                break;
            }
        }
        let p = 1.0 / perms.len() as f64;
        let n = perms.len();
        Self {
            support: perms,
            probabilities: vec![p; n],
        }
    }

    pub fn support(&self) -> &[Vec<usize>] {
        &self.support
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    fn validate(&self, messages: usize, d: usize) -> Result<()> {
        for t in &self.support {
            if t.len() != messages {
                return Err(Error::InvalidRanks(format!(
                    "{t:?} has length {}, expected {messages}",
                    t.len()
                )));
            }
            if t.contains(&0) {
                return Err(Error::InvalidRanks(format!("{t:?} has a zero rank")));
            }
            if t.iter().sum::<usize>() != d {
                return Err(Error::InvalidRanks(format!(
                    "{t:?} does not sum to d = {d}"
                )));
            }
        }
        Ok(())
    }

    pub fn sample(&self, rng: &mut RngState) -> Vec<usize> {
        if self.support.len() == 1 {
            return self.support[0].clone();
        }
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (t, &p) in self.support.iter().zip(&self.probabilities) {
            acc += p;
            if u < acc {
                return t.clone();
            }
        }
        self.support.last().unwrap().clone()
    }
}

fn next_permutation(v: &mut [usize]) -> bool {
    let n = v.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Contiguous block of basis indices owned by message `m`.
pub(crate) fn block(ranks: &[usize], m: usize) -> Range<usize> {
    let start: usize = ranks[..m].iter().sum();
    start..start + ranks[m]
}

/// Haar measure-based scheme: message `m` is encrypted as the normalized
/// projector onto the `m`-th block of basis vectors, rotated by a Haar
/// random unitary that is part of the key.
#[derive(Debug, Clone)]
pub struct HaarScheme {
    messages: usize,
    dim: usize,
    ranks: RankDistribution,
}

pub fn haar_scheme(messages: usize, d: usize, tdist: RankDistribution) -> Result<HaarScheme> {
    if messages == 0 {
        return Err(Error::invalid("need at least one message"));
    }
    if d < messages {
        return Err(Error::InvalidRanks(format!(
            "d = {d} is smaller than M = {messages}"
        )));
    }
    tdist.validate(messages, d)?;
    Ok(HaarScheme {
        messages,
        dim: d,
        ranks: tdist,
    })
}

/// Haar scheme with `d = L·M` and every rank equal to `L`.
pub fn uniform_haar_scheme(messages: usize, l: usize) -> Result<HaarScheme> {
    if messages == 0 || l == 0 {
        return Err(Error::invalid("M and L must be positive"));
    }
    haar_scheme(
        messages,
        messages * l,
        RankDistribution::deterministic(vec![l; messages]),
    )
}

impl HaarScheme {
    pub fn rank_distribution(&self) -> &RankDistribution {
        &self.ranks
    }

    fn unpack<'a>(&self, key: &'a Key) -> Result<(&'a [usize], &'a ComplexMatrix)> {
        match key {
            Key::Haar { ranks, unitary }
                if ranks.len() == self.messages && unitary.dim() == self.dim =>
            {
                Ok((ranks, unitary.matrix()))
            }
            _ => Err(Error::invalid("key does not belong to this Haar scheme")),
        }
    }

    fn block_projector(u: &ComplexMatrix, range: Range<usize>) -> ComplexMatrix {
        let cols = u.columns(range.start, range.len());
        cols * cols.adjoint()
    }
}

impl Qecm for HaarScheme {
    fn label(&self) -> String {
        if self.ranks.support.len() == 1 {
            format!(
                "haar(M={},d={},t={:?})",
                self.messages, self.dim, self.ranks.support[0]
            )
        } else {
            format!(
                "haar(M={},d={},|T|={})",
                self.messages,
                self.dim,
                self.ranks.support.len()
            )
        }
    }

    fn message_count(&self) -> usize {
        self.messages
    }

    fn cipher_dim(&self) -> usize {
        self.dim
    }

    fn sample_key(&self, rng: &mut RngState) -> Key {
        let ranks = self.ranks.sample(rng);
        Key::Haar {
            ranks,
            unitary: haar_unitary(self.dim, rng),
        }
    }

    fn encrypt(&self, key: &Key, message: usize) -> Result<DensityOperator> {
        check_message(self, message)?;
        let (ranks, u) = self.unpack(key)?;
        let range = block(ranks, message);
        let t = range.len() as f64;
        Ok(DensityOperator::from_trusted(
            Self::block_projector(u, range).unscale(t),
        ))
    }

    fn decrypt_povm(&self, key: &Key) -> Result<Povm> {
        let (ranks, u) = self.unpack(key)?;
        let effects = (0..self.messages)
            .map(|m| crate::linalg::hermitize(&Self::block_projector(u, block(ranks, m))))
            .collect();
        Ok(Povm::from_trusted(effects))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{expectation, max_abs_diff, DensityOperator};
    use crate::schemes::{check_correctness, sample_keys};

    #[test]
    fn two_orthogonal_pure_states() {
        let e = haar_scheme(2, 2, RankDistribution::deterministic(vec![1, 1])).unwrap();
        let key = e.sample_key(&mut RngState::new(1));
        let c0 = e.encrypt(&key, 0).unwrap();
        let c1 = e.encrypt(&key, 1).unwrap();
        assert!((c0.lambda_max() - 1.0).abs() < 1e-12);
        assert!(expectation(c0.matrix(), c1.matrix()).abs() < 1e-12);
    }

    #[test]
    fn full_block_is_maximally_mixed() {
        let e = haar_scheme(1, 3, RankDistribution::deterministic(vec![3])).unwrap();
        let mut rng = RngState::new(2);
        for _ in 0..5 {
            let key = e.sample_key(&mut rng);
            let c = e.encrypt(&key, 0).unwrap();
            assert!(max_abs_diff(c.matrix(), DensityOperator::maximally_mixed(3).matrix()) < 1e-12);
        }
    }

    #[test]
    fn correct_on_sampled_keys() {
        let e = haar_scheme(4, 8, RankDistribution::deterministic(vec![2, 2, 2, 2])).unwrap();
        assert!(check_correctness(&e, 100, &mut RngState::new(3)).unwrap() < 1e-9);
    }

    #[test]
    fn same_key_ciphertexts_orthogonal() {
        let e = haar_scheme(3, 6, RankDistribution::deterministic(vec![1, 2, 3])).unwrap();
        for key in sample_keys(&e, 20, &mut RngState::new(4)) {
            for a in 0..3 {
                for b in 0..3 {
                    if a != b {
                        let ov = expectation(
                            e.encrypt(&key, a).unwrap().matrix(),
                            e.encrypt(&key, b).unwrap().matrix(),
                        );
                        assert!(ov.abs() < 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn uniform_spectra() {
        let e = uniform_haar_scheme(2, 2).unwrap();
        assert_eq!(e.cipher_dim(), 4);
        let e1 = uniform_haar_scheme(2, 1).unwrap();
        assert_eq!(e1.cipher_dim(), 2);
        for key in sample_keys(&e, 10, &mut RngState::new(5)) {
            for m in 0..2 {
                let spec = e.encrypt(&key, m).unwrap().eigen().values;
                assert!((spec[0] - 0.5).abs() < 1e-12 && (spec[1] - 0.5).abs() < 1e-12);
                assert!(spec[2].abs() < 1e-12 && spec[3].abs() < 1e-12);
            }
        }
    }

    #[test]
    fn invalid_ranks_rejected() {
        assert!(matches!(
            haar_scheme(2, 4, RankDistribution::deterministic(vec![1, 2])),
            Err(Error::InvalidRanks(_))
        ));
        assert!(matches!(
            haar_scheme(2, 3, RankDistribution::deterministic(vec![0, 3])),
            Err(Error::InvalidRanks(_))
        ));
        assert!(matches!(
            haar_scheme(3, 2, RankDistribution::deterministic(vec![1, 1, 0])),
            Err(Error::InvalidRanks(_))
        ));
        assert!(RankDistribution::new(vec![vec![1, 1]], vec![0.5]).is_err());
    }

    #[test]
    fn permutation_invariant_support() {
        let t = RankDistribution::permutation_invariant(&[1, 1, 2]);
        assert_eq!(t.support().len(), 3);
        let t = RankDistribution::permutation_invariant(&[2, 2]);
        assert_eq!(t.support().len(), 1);
        let t = RankDistribution::permutation_invariant(&[1, 2, 3]);
        assert_eq!(t.support().len(), 6);
        assert!((t.probabilities().iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }
}
