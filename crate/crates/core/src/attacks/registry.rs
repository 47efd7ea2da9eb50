use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{breidbart_basis, lemma1_cloning_attack, measure_share_cloning_attack, CloningAttack};
use crate::error::{Error, Result};
use crate::linalg::{haar_unitary, UnitaryOp};
use crate::rng::RngState;
use crate::schemes::{mean_lambda_max_on_keys, sample_keys, SchemeRef};

/// Keys drawn to choose the partner message when none is given.
const PARTNER_KEY_SAMPLES: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackDescriptor {
    pub channel: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m0: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m1: Option<usize>,
}

impl AttackDescriptor {
    pub fn superposition_cloner(alpha: f64) -> Self {
        Self {
            channel: "superposition_cloner".into(),
            basis: None,
            alpha: Some(alpha),
            m0: None,
            m1: None,
        }
    }

    pub fn measure_share(basis: &str) -> Self {
        Self {
            channel: "measure_share".into(),
            basis: Some(basis.into()),
            alpha: None,
            m0: None,
            m1: None,
        }
    }
}

pub type AttackFactory = fn(&SchemeRef, &AttackDescriptor, &mut RngState) -> Result<CloningAttack>;

#[derive(Clone)]
pub struct AttackRegistry {
    factories: BTreeMap<String, AttackFactory>,
}

impl Default for AttackRegistry {
    fn default() -> Self {
        Self::with_defaults()
    }
}

impl AttackRegistry {
    pub fn empty() -> Self {
        Self {
            factories: BTreeMap::new(),
        }
    }

    pub fn with_defaults() -> Self {
        let mut reg = Self::empty();
        reg.register("superposition_cloner", build_cloner);
        reg.register("measure_share", build_measure_share);
        reg.register("send_to_bob", |e, _, _| {
            Ok(super::send_to_bob_attack(e.clone()))
        });
        reg.register("constant_guess", |e, desc, _| {
            Ok(super::constant_guess_attack(
                e.cipher_dim(),
                e.message_count(),
                desc.m0.unwrap_or(0),
            ))
        });
        reg
    }

    pub fn register(&mut self, name: &str, factory: AttackFactory) {
        self.factories.insert(name.to_string(), factory);
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.factories.keys().map(String::as_str)
    }

    pub fn build(
        &self,
        e: &SchemeRef,
        desc: &AttackDescriptor,
        rng: &mut RngState,
    ) -> Result<CloningAttack> {
        let factory = self
            .factories
            .get(&desc.channel)
            .ok_or_else(|| Error::UnknownStrategy {
                kind: "attack",
                name: desc.channel.clone(),
            })?;
        factory(e, desc, rng)
    }
}

fn build_cloner(
    e: &SchemeRef,
    desc: &AttackDescriptor,
    rng: &mut RngState,
) -> Result<CloningAttack> {
    let m = e.message_count();
    let m0 = desc.m0.unwrap_or(0);
    if m < 2 || m0 >= m {
        return Err(Error::invalid(
            "superposition_cloner needs two messages and m0 in range",
        ));
    }
    let m1 = match desc.m1 {
        Some(m1) => m1,
        None => {
            let keys = sample_keys(e.as_ref(), PARTNER_KEY_SAMPLES, rng);
            let lam = mean_lambda_max_on_keys(e.as_ref(), &keys)?;
            (0..m)
                .filter(|&x| x != m0)
                .fold(None::<usize>, |best, x| match best {
                    Some(b) if lam[x] <= lam[b] + 1e-12 => Some(b),
                    _ => Some(x),
                })
                .expect("at least two messages")
        }
    };
    lemma1_cloning_attack(e.clone(), m0, m1, desc.alpha.unwrap_or(0.25))
}

/// Resolves a basis name: `standard`, `haar` (drawn once from `rng`) or
/// `breidbart` (requires a qubit-register dimension).
pub fn resolve_basis(name: &str, d: usize, rng: &mut RngState) -> Result<UnitaryOp> {
    match name {
        "standard" => Ok(UnitaryOp::identity(d)),
        "haar" => Ok(haar_unitary(d, rng)),
        "breidbart" => {
            if !d.is_power_of_two() {
                return Err(Error::invalid(format!(
                    "breidbart basis needs a power-of-two dimension, got {d}"
                )));
            }
            Ok(breidbart_basis(d.trailing_zeros() as usize))
        }
        other => Err(Error::UnknownStrategy {
            kind: "basis",
            name: other.to_string(),
        }),
    }
}

fn build_measure_share(
    e: &SchemeRef,
    desc: &AttackDescriptor,
    rng: &mut RngState,
) -> Result<CloningAttack> {
    let basis = resolve_basis(
        desc.basis.as_deref().unwrap_or("standard"),
        e.cipher_dim(),
        rng,
    )?;
    measure_share_cloning_attack(Arc::clone(e), basis)
}
