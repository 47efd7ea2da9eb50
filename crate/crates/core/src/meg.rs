//! Monogamy-of-entanglement games and the reduction from a cloning attack
//! on an encryption scheme to a strategy for the induced game.
//!
//! Alice's register uses the standard basis of the ciphertext space. The
//! Choi state is built from the eigenvectors `e_i` of the average ciphertext
//! `ρ̄`, and transposes in Alice's effects are taken in that eigenbasis.

use rayon::prelude::*;
use serde::Serialize;

use crate::attacks::{pwin_unif_on_keys, CloningAttack, KeyedPovm};
use crate::error::{Error, Result};
use crate::linalg::{
    expectation, hermitize, identity, max_abs_diff, pseudo_inv_sqrt, r, tensor, ComplexMatrix,
    ComplexVector, DensityOperator, KrausChannel, UnitaryOp,
};
use crate::povm::Povm;
use crate::rng::RngState;
use crate::schemes::{sample_keys, Key, Qecm};

/// Max-entry deviation tolerated between per-key average ciphertexts.
pub const KEY_INDEPENDENCE_TOL: f64 = 1e-6;
pub const DEFAULT_CUTOFF: f64 = 1e-10;

/// How Alice's effects are formed from the ciphertexts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EffectConvention {
    /// `(1/M) ρ̄^{-1/2} Enc^{T} ρ̄^{-1/2}`, transpose in `ρ̄`'s eigenbasis.
    Transposed,
    /// The same without the transpose.
    Plain,
}

/// A game over a finite weighted key sample; `povms[i]` is Alice's
/// measurement for `keys[i]`.
#[derive(Debug, Clone)]
pub struct MegGame {
    pub messages: usize,
    pub alice_dim: usize,
    pub keys: Vec<Key>,
    pub weights: Vec<f64>,
    pub povms: Vec<Povm>,
}

#[derive(Clone)]
pub struct MegStrategy {
    pub state: DensityOperator,
    /// `(|A|, |B|, |C|)`.
    pub dims: (usize, usize, usize),
    pub bob: KeyedPovm,
    pub charlie: KeyedPovm,
}

impl std::fmt::Debug for MegStrategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MegStrategy")
            .field("dims", &self.dims)
            .finish_non_exhaustive()
    }
}

/// `Σ_k w_k Σ_m tr(F_m^k ⊗ P_m^k ⊗ Q_m^k ρ_ABC)`.
pub fn meg_win_prob(g: &MegGame, s: &MegStrategy) -> Result<f64> {
    let (da, db, dc) = s.dims;
    if da != g.alice_dim {
        return Err(Error::DimensionMismatch {
            expected: g.alice_dim,
            found: da,
        });
    }
    if s.state.dim() != da * db * dc {
        return Err(Error::DimensionMismatch {
            expected: da * db * dc,
            found: s.state.dim(),
        });
    }
    let per_key = g
        .keys
        .par_iter()
        .zip(&g.povms)
        .map(|(key, f)| {
            let p = (s.bob)(key)?;
            let q = (s.charlie)(key)?;
            for (povm, dim) in [(&p, db), (&q, dc)] {
                if povm.dim() != dim || povm.outcome_count() != g.messages {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: povm.dim(),
                    });
                }
            }
            Ok((0..g.messages)
                .map(|m| {
                    let op = tensor(f.effect(m), &tensor(p.effect(m), q.effect(m)));
                    expectation(&op, s.state.matrix())
                })
                .sum::<f64>())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(per_key.iter().zip(&g.weights).map(|(v, w)| v * w).sum())
}

/// `Σ_K (I ⊗ K)|Φ⟩⟨Φ|(I ⊗ K)†` with `|Φ⟩ = Σ_i √λ_i |e_i⟩|e_i⟩` from `ρ̄`'s spectrum.
pub fn choi_state(ch: &KrausChannel, rho_bar: &DensityOperator) -> Result<DensityOperator> {
    let d = rho_bar.dim();
    if ch.in_dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: ch.in_dim(),
        });
    }
    let eig = rho_bar.eigen();
    let out = ch.out_dim();
    let mut j = ComplexMatrix::zeros(d * out, d * out);
    for k in ch.kraus_ops() {
        let mut v = ComplexVector::zeros(d * out);
        for i in 0..d {
            let lam = eig.values[i].max(0.0);
            if lam == 0.0 {
                continue;
            }
            let e = eig.vectors.column(i);
            v += e.kronecker(&(k * &e)) * r(lam.sqrt());
        }
        j += &v * v.adjoint();
    }
    Ok(DensityOperator::from_trusted(hermitize(&j)))
}

/// `E (E† X E)ᵀ E†` for the unitary `E` of eigenvectors.
fn transpose_in_basis(x: &ComplexMatrix, basis: &UnitaryOp) -> ComplexMatrix {
    let e = basis.matrix();
    e * (e.adjoint() * x * e).transpose() * e.adjoint()
}

/// Per-key `(1/M) Σ_m Enc_k(m)`, checked to agree across keys; returns the key average.
pub fn average_ciphertext(e: &dyn Qecm, keys: &[Key]) -> Result<DensityOperator> {
    let d = e.cipher_dim();
    let m = e.message_count();
    let mut first: Option<ComplexMatrix> = None;
    let mut sum = ComplexMatrix::zeros(d, d);
    for key in keys {
        let mut avg = ComplexMatrix::zeros(d, d);
        for msg in 0..m {
            avg += e.encrypt(key, msg)?.matrix();
        }
        avg.unscale_mut(m as f64);
        match &first {
            None => first = Some(avg.clone()),
            Some(f) => {
                let deviation = max_abs_diff(f, &avg);
                if deviation > KEY_INDEPENDENCE_TOL {
                    return Err(Error::NotKeyIndependent { deviation });
                }
            }
        }
        sum += avg;
    }
    if keys.is_empty() {
        return Err(Error::invalid("need at least one key"));
    }
    Ok(DensityOperator::from_trusted(
        sum.unscale(keys.len() as f64),
    ))
}

/// Induced game on the given keys (uniform weights). Alice's effects are
/// completed with `I − P_supp(ρ̄)` on outcome 0.
pub fn meg_from_qecm_on_keys(
    e: &dyn Qecm,
    keys: &[Key],
    cutoff: f64,
    convention: EffectConvention,
) -> Result<(MegGame, DensityOperator)> {
    if cutoff.is_nan() || cutoff <= 0.0 {
        return Err(Error::invalid("cutoff must be positive"));
    }
    let rho_bar = average_ciphertext(e, keys)?;
    let d = e.cipher_dim();
    let m = e.message_count();
    let inv = pseudo_inv_sqrt(&rho_bar, cutoff)?;
    let eig = rho_bar.eigen();
    let support = eig.map(|l| if l > cutoff { 1.0 } else { 0.0 });
    let kernel = identity(d) - &support;
    let povms = keys
        .iter()
        .map(|key| {
            let mut effects = (0..m)
                .map(|msg| {
                    let enc = e.encrypt(key, msg)?.into_matrix();
                    let enc = match convention {
                        EffectConvention::Transposed => transpose_in_basis(&enc, &eig.vectors),
                        EffectConvention::Plain => enc,
                    };
                    Ok(hermitize(&(&inv * enc * &inv)).unscale(m as f64))
                })
                .collect::<Result<Vec<_>>>()?;
            effects[0] += &kernel;
            match convention {
                EffectConvention::Transposed => Povm::with_tolerance(effects, 1e-8),
                // not guaranteed complete for complex ciphertexts
                EffectConvention::Plain => Ok(Povm::from_trusted(effects)),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let weights = vec![1.0 / keys.len() as f64; keys.len()];
    Ok((
        MegGame {
            messages: m,
            alice_dim: d,
            keys: keys.to_vec(),
            weights,
            povms,
        },
        rho_bar,
    ))
}

pub fn meg_from_qecm(
    e: &dyn Qecm,
    key_samples: usize,
    rng: &mut RngState,
    cutoff: f64,
) -> Result<MegGame> {
    if key_samples == 0 {
        return Err(Error::invalid("key_samples must be at least 1"));
    }
    let keys = sample_keys(e, key_samples, rng);
    Ok(meg_from_qecm_on_keys(e, &keys, cutoff, EffectConvention::Transposed)?.0)
}

/// `ρ_ABC = J(𝒩)` with the attack's keyed POVMs.
pub fn strategy_from_attack(atk: &CloningAttack, rho_bar: &DensityOperator) -> Result<MegStrategy> {
    let state = choi_state(&atk.channel, rho_bar)?;
    Ok(MegStrategy {
        state,
        dims: (rho_bar.dim(), atk.dims.0, atk.dims.1),
        bob: atk.bob.clone(),
        charlie: atk.charlie.clone(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReductionCheck {
    /// Game value of the induced strategy.
    pub lhs: f64,
    /// Attack success on the same keys.
    pub rhs: f64,
    pub gap: f64,
    /// Game value with the untransposed effects.
    pub lhs_plain: f64,
    pub gap_plain: f64,
}

pub fn verify_reduction_on_keys(
    e: &dyn Qecm,
    atk: &CloningAttack,
    keys: &[Key],
) -> Result<ReductionCheck> {
    let (game, rho_bar) =
        meg_from_qecm_on_keys(e, keys, DEFAULT_CUTOFF, EffectConvention::Transposed)?;
    let (plain, _) = meg_from_qecm_on_keys(e, keys, DEFAULT_CUTOFF, EffectConvention::Plain)?;
    let strategy = strategy_from_attack(atk, &rho_bar)?;
    let lhs = meg_win_prob(&game, &strategy)?;
    let lhs_plain = meg_win_prob(&plain, &strategy)?;
    let rhs = pwin_unif_on_keys(e, atk, keys)?.mean;
    Ok(ReductionCheck {
        lhs,
        rhs,
        gap: (lhs - rhs).abs(),
        lhs_plain,
        gap_plain: (lhs_plain - rhs).abs(),
    })
}

pub fn verify_reduction(
    e: &dyn Qecm,
    atk: &CloningAttack,
    key_samples: usize,
    rng: &mut RngState,
) -> Result<ReductionCheck> {
    if key_samples == 0 {
        return Err(Error::invalid("key_samples must be at least 1"));
    }
    verify_reduction_on_keys(e, atk, &sample_keys(e, key_samples, rng))
}

/// Dense matrix as row-major `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatrixDump {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
}

impl MatrixDump {
    pub fn new(m: &ComplexMatrix) -> Self {
        let mut data = Vec::with_capacity(m.len());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                data.push([m[(i, j)].re, m[(i, j)].im]);
            }
        }
        Self {
            rows: m.nrows(),
            cols: m.ncols(),
            data,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GameDump {
    pub messages: usize,
    pub alice_dim: usize,
    pub weights: Vec<f64>,
    /// `effects[k][m]` is `F_m` for the `k`-th key.
    pub effects: Vec<Vec<MatrixDump>>,
}

impl GameDump {
    pub fn new(g: &MegGame) -> Self {
        Self {
            messages: g.messages,
            alice_dim: g.alice_dim,
            weights: g.weights.clone(),
            effects: g
                .povms
                .iter()
                .map(|p| p.effects().iter().map(MatrixDump::new).collect())
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StrategyDump {
    pub dims: [usize; 3],
    pub state: MatrixDump,
}

impl StrategyDump {
    pub fn new(s: &MegStrategy) -> Self {
        Self {
            dims: [s.dims.0, s.dims.1, s.dims.2],
            state: MatrixDump::new(s.state.matrix()),
        }
    }
}
