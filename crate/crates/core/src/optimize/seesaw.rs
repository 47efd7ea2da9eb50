use rayon::prelude::*;
use serde::Serialize;

use super::discrimination::{objective, AutoDiscriminator, Discriminator};
use crate::attacks::{ensemble_from_scheme_key, CloningAttack, GuessingEnsemble};
use crate::error::{Error, Result};
use crate::linalg::{haar_unitary, ComplexMatrix, KrausChannel};
use crate::mc::Estimate;
use crate::povm::Povm;
use crate::rng::RngState;
use crate::schemes::{sample_keys, Key, Qecm};

use rand::Rng;

#[derive(Debug, Clone)]
pub struct SeesawConfig {
    pub max_iters: usize,
    pub convergence_eps: f64,
    /// Random projective starting points, on top of the fixed ones.
    pub restarts: usize,
    pub rng: RngState,
}

impl SeesawConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            max_iters: 500,
            convergence_eps: 1e-9,
            restarts: 4,
            rng: RngState::new(seed),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::invalid("max_iters must be at least 1"));
        }
        if self.convergence_eps.is_nan() || self.convergence_eps <= 0.0 {
            return Err(Error::invalid("convergence_eps must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SeesawResult {
    pub value: f64,
    #[serde(skip)]
    pub bob_povm: Povm,
    #[serde(skip)]
    pub charlie_povm: Povm,
    pub iterations_used: usize,
    pub trajectory: Vec<f64>,
    pub converged: bool,
}

/// `tr_C((I ⊗ Q) ρ)` for `ρ` on `B ⊗ C`.
pub fn contract_with_second(
    rho: &ComplexMatrix,
    q: &ComplexMatrix,
    dims: (usize, usize),
) -> ComplexMatrix {
    let (db, dc) = dims;
    ComplexMatrix::from_fn(db, db, |b, bp| {
        let mut acc = num_complex::Complex64::new(0.0, 0.0);
        for c in 0..dc {
            for cp in 0..dc {
                acc += rho[(b * dc + c, bp * dc + cp)] * q[(cp, c)];
            }
        }
        acc
    })
}

/// `tr_B((P ⊗ I) ρ)` for `ρ` on `B ⊗ C`.
pub fn contract_with_first(
    rho: &ComplexMatrix,
    p: &ComplexMatrix,
    dims: (usize, usize),
) -> ComplexMatrix {
    let (db, dc) = dims;
    ComplexMatrix::from_fn(dc, dc, |c, cp| {
        let mut acc = num_complex::Complex64::new(0.0, 0.0);
        for b in 0..db {
            for bp in 0..db {
                acc += rho[(b * dc + c, bp * dc + cp)] * p[(bp, b)];
            }
        }
        acc
    })
}

fn bob_ops(ens: &GuessingEnsemble, charlie: &Povm) -> Vec<ComplexMatrix> {
    ens.entries()
        .iter()
        .enumerate()
        .map(|(x, (p, rho))| {
            contract_with_second(rho.matrix(), charlie.effect(x), ens.dims()).scale(*p)
        })
        .collect()
}

fn charlie_ops(ens: &GuessingEnsemble, bob: &Povm) -> Vec<ComplexMatrix> {
    ens.entries()
        .iter()
        .enumerate()
        .map(|(x, (p, rho))| contract_with_first(rho.matrix(), bob.effect(x), ens.dims()).scale(*p))
        .collect()
}

fn random_projective(d: usize, n: usize, rng: &mut RngState) -> Povm {
    let u = haar_unitary(d, rng);
    let labels: Vec<usize> = (0..d).map(|_| rng.random_range(0..n)).collect();
    Povm::projective(&u, &labels, n).expect("labels in range")
}

fn run_one(
    ens: &GuessingEnsemble,
    cfg: &SeesawConfig,
    disc: &dyn Discriminator,
    start: (Povm, Povm),
) -> Result<SeesawResult> {
    let (mut bob, mut charlie) = start;
    let mut value = ens.success(&bob, &charlie)?;
    let mut trajectory = vec![value];
    let mut converged = false;
    let mut used = 0;
    for it in 1..=cfg.max_iters {
        used = it;
        let ops = bob_ops(ens, &charlie);
        bob = disc.discriminate(&ops, Some(&bob))?.povm;
        let ops = charlie_ops(ens, &bob);
        let step = disc.discriminate(&ops, Some(&charlie))?;
        charlie = step.povm;
        let next = objective(&ops, charlie.effects()).max(value);
        trajectory.push(next);
        let gain = next - value;
        value = next;
        if gain < cfg.convergence_eps {
            converged = true;
            break;
        }
    }
    Ok(SeesawResult {
        value,
        bob_povm: bob,
        charlie_povm: charlie,
        iterations_used: used,
        trajectory,
        converged,
    })
}

/// Seesaw from the given starting pairs plus the uniform start, the
/// constant-guess start and `cfg.restarts` random projective starts. Returns
/// the best run; the value is a lower bound on the guessing probability.
pub fn seesaw_pguess_from(
    ens: &GuessingEnsemble,
    cfg: &mut SeesawConfig,
    warm: &[(Povm, Povm)],
) -> Result<SeesawResult> {
    cfg.validate()?;
    let (db, dc) = ens.dims();
    let n = ens.len();
    for (b, c) in warm {
        if b.dim() != db || c.dim() != dc || b.outcome_count() != n || c.outcome_count() != n {
            return Err(Error::invalid("warm start does not match the ensemble"));
        }
    }
    let heavy = ens
        .entries()
        .iter()
        .enumerate()
        .fold(
            (0, f64::NEG_INFINITY),
            |b, (i, e)| if e.0 > b.1 { (i, e.0) } else { b },
        )
        .0;
    let mut starts: Vec<(Povm, Povm)> = warm.to_vec();
    starts.push((Povm::uniform(db, n), Povm::uniform(dc, n)));
    starts.push((Povm::constant(db, n, heavy), Povm::constant(dc, n, heavy)));
    for _ in 0..cfg.restarts {
        let b = random_projective(db, n, &mut cfg.rng);
        let c = random_projective(dc, n, &mut cfg.rng);
        starts.push((b, c));
    }
    let disc = AutoDiscriminator::default();
    let frozen = cfg.clone();
    let runs = starts
        .into_par_iter()
        .map(|s| run_one(ens, &frozen, &disc, s))
        .collect::<Result<Vec<_>>>()?;
    let mut best: Option<SeesawResult> = None;
    for run in runs {
        if best.as_ref().is_none_or(|b| run.value > b.value) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least two starts"))
}

pub fn seesaw_pguess(ens: &GuessingEnsemble, cfg: &mut SeesawConfig) -> Result<SeesawResult> {
    seesaw_pguess_from(ens, cfg, &[])
}

/// Per-key seesaw over a fixed channel, averaged over `keys`. When `warm`
/// is given, its keyed POVMs seed every key's run.
pub fn pwin_unif_seesaw_on_keys(
    e: &dyn Qecm,
    ch: &KrausChannel,
    dims: (usize, usize),
    keys: &[Key],
    cfg: &mut SeesawConfig,
    warm: Option<&CloningAttack>,
) -> Result<Estimate> {
    let base = cfg.rng.fork_seed();
    let mut values = Vec::with_capacity(keys.len());
    for (i, key) in keys.iter().enumerate() {
        let ens = ensemble_from_scheme_key(e, key, ch, dims)?;
        let starts = match warm {
            Some(atk) => vec![((atk.bob)(key)?, (atk.charlie)(key)?)],
            None => Vec::new(),
        };
        let mut local = SeesawConfig {
            rng: RngState::stream(base, i as u64),
            ..cfg.clone()
        };
        values.push(seesaw_pguess_from(&ens, &mut local, &starts)?.value);
    }
    Ok(Estimate::from_samples(&values))
}

pub fn pwin_unif_seesaw(
    e: &dyn Qecm,
    ch: &KrausChannel,
    dims: (usize, usize),
    key_samples: usize,
    cfg: &mut SeesawConfig,
) -> Result<Estimate> {
    if key_samples == 0 {
        return Err(Error::invalid("key_samples must be at least 1"));
    }
    let keys = sample_keys(e, key_samples, &mut cfg.rng);
    pwin_unif_seesaw_on_keys(e, ch, dims, &keys, cfg, None)
}
