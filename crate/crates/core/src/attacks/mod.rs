//! Cloning attacks: the superposition cloner with its projector strategy,
//! the measure-and-share attack, and evaluators for both success
//! probabilities (uniform messages and the two-message indistinguishability
//! game).

mod cloner;
mod measure_share;
mod registry;

pub use cloner::{
    binary_lemma1_povm, ind_attack_build, ind_attack_on_keys, lemma1_cloning_attack,
    lemma1_evaluate, lemma1_evaluate_ordered, lemma1_projector_matrix, lemma1_value, pi_projector,
    pi_projector_strict, superposition_cloner, Lemma1Evaluation,
};
pub use measure_share::{
    breidbart_basis, measure_share_attack, measure_share_channel, measure_share_cloning_attack,
    measure_share_value, optimal_decode_for_measure_share, random_basis_attack_estimate,
    MeasureShareDecode,
};
pub use registry::{resolve_basis, AttackDescriptor, AttackFactory, AttackRegistry};

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{apply_channel, expectation, tensor, DensityOperator, KrausChannel};
use crate::mc::Estimate;
use crate::povm::Povm;
use crate::rng::RngState;
use crate::schemes::{sample_keys, Key, Qecm};

/// A POVM that depends on the key revealed after the cloning step.
pub type KeyedPovm = Arc<dyn Fn(&Key) -> Result<Povm> + Send + Sync>;

/// `(𝒩_{A→BC}, {P_m^k}, {Q_m^k})`.
#[derive(Clone)]
pub struct CloningAttack {
    pub label: String,
    pub channel: KrausChannel,
    /// `(|B|, |C|)`; the channel output is `B ⊗ C`.
    pub dims: (usize, usize),
    pub bob: KeyedPovm,
    pub charlie: KeyedPovm,
}

impl fmt::Debug for CloningAttack {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CloningAttack")
            .field("label", &self.label)
            .field("dims", &self.dims)
            .finish_non_exhaustive()
    }
}

impl CloningAttack {
    pub fn new(
        label: impl Into<String>,
        channel: KrausChannel,
        dims: (usize, usize),
        bob: KeyedPovm,
        charlie: KeyedPovm,
    ) -> Result<Self> {
        if channel.out_dim() != dims.0 * dims.1 {
            return Err(Error::DimensionMismatch {
                expected: dims.0 * dims.1,
                found: channel.out_dim(),
            });
        }
        Ok(Self {
            label: label.into(),
            channel,
            dims,
            bob,
            charlie,
        })
    }
}

/// `(m₁, 𝒩_{A→BC}, {P_b^k}, {Q_b^k})` with binary POVMs.
#[derive(Clone)]
pub struct CloningIndAttack {
    pub m1: usize,
    pub channel: KrausChannel,
    pub dims: (usize, usize),
    pub bob: KeyedPovm,
    pub charlie: KeyedPovm,
}

impl fmt::Debug for CloningIndAttack {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CloningIndAttack")
            .field("m1", &self.m1)
            .field("dims", &self.dims)
            .finish_non_exhaustive()
    }
}

/// Classical label `x` with probability `p_x`, jointly held quantum side
/// information `ρ_BC^x`.
#[derive(Debug, Clone)]
pub struct GuessingEnsemble {
    entries: Vec<(f64, DensityOperator)>,
    dims: (usize, usize),
}

impl GuessingEnsemble {
    pub fn new(entries: Vec<(f64, DensityOperator)>, dims: (usize, usize)) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::invalid("empty ensemble"));
        }
        let total: f64 = entries.iter().map(|e| e.0).sum();
        if entries.iter().any(|e| e.0.is_nan() || e.0 < 0.0) || (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!(
                "probabilities must be nonnegative and sum to 1 (sum {total})"
            )));
        }
        for (_, rho) in &entries {
            if rho.dim() != dims.0 * dims.1 {
                return Err(Error::DimensionMismatch {
                    expected: dims.0 * dims.1,
                    found: rho.dim(),
                });
            }
        }
        Ok(Self { entries, dims })
    }

    pub fn entries(&self) -> &[(f64, DensityOperator)] {
        &self.entries
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `Σ_x p_x tr((P_x ⊗ Q_x) ρ_BC^x)`.
    pub fn success(&self, bob: &Povm, charlie: &Povm) -> Result<f64> {
        check_povm(bob, self.dims.0, self.len())?;
        check_povm(charlie, self.dims.1, self.len())?;
        Ok(self
            .entries
            .iter()
            .enumerate()
            .map(|(x, (p, rho))| {
                p * expectation(&tensor(bob.effect(x), charlie.effect(x)), rho.matrix())
            })
            .sum())
    }
}

fn check_povm(p: &Povm, dim: usize, outcomes: usize) -> Result<()> {
    if p.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: p.dim(),
        });
    }
    if p.outcome_count() != outcomes {
        return Err(Error::DimensionMismatch {
            expected: outcomes,
            found: p.outcome_count(),
        });
    }
    Ok(())
}

/// `{(1/M, 𝒩(Enc_k(m)))}_m`.
pub fn ensemble_from_scheme_key(
    e: &dyn Qecm,
    key: &Key,
    ch: &KrausChannel,
    dims: (usize, usize),
) -> Result<GuessingEnsemble> {
    if ch.in_dim() != e.cipher_dim() {
        return Err(Error::DimensionMismatch {
            expected: e.cipher_dim(),
            found: ch.in_dim(),
        });
    }
    let m = e.message_count();
    let entries = (0..m)
        .map(|msg| Ok((1.0 / m as f64, apply_channel(ch, &e.encrypt(key, msg)?)?)))
        .collect::<Result<Vec<_>>>()?;
    GuessingEnsemble::new(entries, dims)
}

/// `(1/M) Σ_m tr(P_m^k ⊗ Q_m^k 𝒩(Enc_k(m)))` for one key.
pub fn pwin_unif_for_key(e: &dyn Qecm, atk: &CloningAttack, key: &Key) -> Result<f64> {
    let ens = ensemble_from_scheme_key(e, key, &atk.channel, atk.dims)?;
    ens.success(&(atk.bob)(key)?, &(atk.charlie)(key)?)
}

pub fn pwin_unif_on_keys(e: &dyn Qecm, atk: &CloningAttack, keys: &[Key]) -> Result<Estimate> {
    let values = keys
        .iter()
        .map(|k| pwin_unif_for_key(e, atk, k))
        .collect::<Result<Vec<_>>>()?;
    Ok(Estimate::from_samples(&values))
}

pub fn pwin_unif_eval(
    e: &dyn Qecm,
    atk: &CloningAttack,
    key_samples: usize,
    rng: &mut RngState,
) -> Result<Estimate> {
    pwin_unif_on_keys(e, atk, &sample_keys(e, key_samples, rng))
}

/// `½ Σ_b tr(P_b^k ⊗ Q_b^k 𝒩(Enc_k(m_b)))` for one key.
pub fn pwin_ind_for_key(e: &dyn Qecm, m0: usize, atk: &CloningIndAttack, key: &Key) -> Result<f64> {
    if atk.m1 == m0 {
        return Err(Error::invalid("m1 must differ from m0"));
    }
    let ens = GuessingEnsemble::new(
        vec![
            (0.5, apply_channel(&atk.channel, &e.encrypt(key, m0)?)?),
            (0.5, apply_channel(&atk.channel, &e.encrypt(key, atk.m1)?)?),
        ],
        atk.dims,
    )?;
    ens.success(&(atk.bob)(key)?, &(atk.charlie)(key)?)
}

pub fn pwin_ind_on_keys(
    e: &dyn Qecm,
    m0: usize,
    atk: &CloningIndAttack,
    keys: &[Key],
) -> Result<Estimate> {
    let values = keys
        .iter()
        .map(|k| pwin_ind_for_key(e, m0, atk, k))
        .collect::<Result<Vec<_>>>()?;
    Ok(Estimate::from_samples(&values))
}

pub fn pwin_ind_eval(
    e: &dyn Qecm,
    m0: usize,
    atk: &CloningIndAttack,
    key_samples: usize,
    rng: &mut RngState,
) -> Result<Estimate> {
    pwin_ind_on_keys(e, m0, atk, &sample_keys(e, key_samples, rng))
}

/// Hand the ciphertext to Bob, who decrypts honestly; Charlie holds nothing
/// and always answers `0`.
pub fn send_to_bob_attack(e: crate::schemes::SchemeRef) -> CloningAttack {
    let d = e.cipher_dim();
    let m = e.message_count();
    let channel = KrausChannel::send_to_first(d, &crate::linalg::PureState::basis(1, 0));
    let bob: KeyedPovm = Arc::new(move |k: &Key| e.decrypt_povm(k));
    let charlie: KeyedPovm = Arc::new(move |_: &Key| Ok(Povm::constant(1, m, 0)));
    CloningAttack {
        label: "send_to_bob".into(),
        channel,
        dims: (d, 1),
        bob,
        charlie,
    }
}

/// Discard the ciphertext; both parties always answer `guess`.
pub fn constant_guess_attack(d: usize, messages: usize, guess: usize) -> CloningAttack {
    let channel = KrausChannel::discard_prepare(d, &DensityOperator::maximally_mixed(1));
    let p: KeyedPovm = Arc::new(move |_: &Key| Ok(Povm::constant(1, messages, guess)));
    CloningAttack {
        label: "constant_guess".into(),
        channel,
        dims: (1, 1),
        bob: p.clone(),
        charlie: p,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{basis_vector, outer, PureState};
    use crate::schemes::{bb84_scheme, uniform_haar_scheme, SchemeRef};

    #[test]
    fn trivial_attacks_give_one_over_m() {
        let mut rng = RngState::new(1);
        for e in [
            Arc::new(uniform_haar_scheme(3, 2).unwrap()) as SchemeRef,
            Arc::new(bb84_scheme(2).unwrap()) as SchemeRef,
        ] {
            let m = e.message_count() as f64;
            let v =
                pwin_unif_eval(e.as_ref(), &send_to_bob_attack(e.clone()), 20, &mut rng).unwrap();
            assert!((v.mean - 1.0 / m).abs() < 1e-9);
            let c = constant_guess_attack(e.cipher_dim(), e.message_count(), 0);
            let v = pwin_unif_eval(e.as_ref(), &c, 20, &mut rng).unwrap();
            assert!((v.mean - 1.0 / m).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_ind_attack_gives_half() {
        let e = bb84_scheme(1).unwrap();
        let ch = KrausChannel::discard_prepare(2, &PureState::basis(2, 0).density());
        let p: KeyedPovm = Arc::new(|_: &Key| Ok(Povm::constant(2, 2, 0)));
        let atk = CloningIndAttack {
            m1: 1,
            channel: ch,
            dims: (2, 1),
            bob: p,
            charlie: Arc::new(|_: &Key| Ok(Povm::constant(1, 2, 0))),
        };
        let v = pwin_ind_on_keys(&e, 0, &atk, &e.enumerate_keys().unwrap()).unwrap();
        assert!((v.mean - 0.5).abs() < 1e-12);
    }

    #[test]
    fn ensemble_probabilities() {
        let e = uniform_haar_scheme(3, 1).unwrap();
        let key = e.sample_key(&mut RngState::new(2));
        let ch = KrausChannel::send_to_first(3, &PureState::basis(2, 1));
        let ens = ensemble_from_scheme_key(&e, &key, &ch, (3, 2)).unwrap();
        let total: f64 = ens.entries().iter().map(|x| x.0).sum();
        assert!((total - 1.0).abs() < 1e-12);
        // identity-to-B channel: each state is Enc(m) ⊗ |1><1|
        let anc = outer(&basis_vector(2, 1));
        for (m, (_, rho)) in ens.entries().iter().enumerate() {
            let expect = tensor(e.encrypt(&key, m).unwrap().matrix(), &anc);
            assert!(crate::linalg::max_abs_diff(rho.matrix(), &expect) < 1e-12);
        }
        assert!(ensemble_from_scheme_key(&e, &key, &KrausChannel::identity(2), (2, 1)).is_err());
    }
}
