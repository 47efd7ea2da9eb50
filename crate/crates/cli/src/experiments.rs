//! The subcommands, each a named [`Experiment`] producing a [`Report`].

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fs;
use std::sync::Arc;

use anyhow::{bail, ensure, Context};
use serde::Serialize;
use uncloneable::attacks::{
    breidbart_basis, ensemble_from_scheme_key, ind_attack_on_keys, lemma1_cloning_attack,
    lemma1_evaluate, lemma1_evaluate_ordered, measure_share_cloning_attack, pwin_ind_on_keys,
    pwin_unif_on_keys, random_basis_attack_estimate, superposition_cloner, AttackDescriptor,
    AttackRegistry, CloningAttack,
};
use uncloneable::linalg::r;
use uncloneable::meg::{
    meg_from_qecm_on_keys, strategy_from_attack, verify_reduction_on_keys, EffectConvention,
    GameDump, StrategyDump, DEFAULT_CUTOFF,
};
use uncloneable::o2h::{extraction_probability, simo2h_rhs, simo2h_success};
use uncloneable::optimize::{pwin_unif_seesaw_on_keys, seesaw_pguess_from, SeesawConfig};
use uncloneable::schemes::{
    bb84_scheme, haar_scheme, mu_on_keys, sample_keys, uniform_haar_scheme, Key, Qecm,
    RankDistribution, SchemeDescriptor, SchemeRef, SchemeRegistry,
};
use uncloneable::stats::{
    erlang_cdf, max_over_sum_estimate, max_over_sum_lower_bound, ErlangParams,
};
use uncloneable::{ComplexMatrix, ComplexVector, DensityOperator, PureState, RngState};

use crate::config::ExperimentConfig;
use crate::report::{Report, Row};

/// Constant of the random-basis attack lower bound `c (log₂ M − 1) / d`.
pub const RANDOM_BASIS_CONSTANT: f64 = 0.02285;

/// Largest ciphertext dimension `conjecture-scan` accepts.
const SCAN_MAX_DIM: usize = 8;

pub trait Experiment: Send + Sync {
    fn name(&self) -> &'static str;
    /// Whether the run draws random numbers and therefore needs a seed.
    fn randomized(&self) -> bool;
    fn run(&self, cfg: &ExperimentConfig) -> anyhow::Result<Report>;
}

pub type RunFn = fn(&ExperimentConfig) -> anyhow::Result<Report>;

/// An experiment backed by a plain function.
pub struct FnExperiment {
    pub name: &'static str,
    pub randomized: bool,
    pub run: RunFn,
}

impl Experiment for FnExperiment {
    fn name(&self) -> &'static str {
        self.name
    }
    fn randomized(&self) -> bool {
        self.randomized
    }
    fn run(&self, cfg: &ExperimentConfig) -> anyhow::Result<Report> {
        (self.run)(cfg)
    }
}

pub struct ExperimentRegistry {
    entries: BTreeMap<&'static str, Box<dyn Experiment>>,
}

impl Default for ExperimentRegistry {
    fn default() -> Self {
        Self::with_defaults()
    }
}

impl ExperimentRegistry {
    pub fn empty() -> Self {
        Self {
            entries: BTreeMap::new(),
        }
    }

    pub fn with_defaults() -> Self {
        let mut reg = Self::empty();
        let builtin: [(&'static str, bool, RunFn); 8] = [
            ("lemma1", true, run_lemma1),
            ("theorem2", true, run_theorem2),
            ("o2h", false, run_o2h),
            ("erlang", true, run_erlang),
            ("seesaw", true, run_seesaw),
            ("meg", true, run_meg),
            ("conjecture-scan", true, run_conjecture_scan),
            ("selftest", false, run_selftest),
        ];
        for (name, randomized, run) in builtin {
            reg.register(Box::new(FnExperiment {
                name,
                randomized,
                run,
            }));
        }
        reg
    }

    pub fn register(&mut self, exp: Box<dyn Experiment>) {
        self.entries.insert(exp.name(), exp);
    }

    pub fn get(&self, name: &str) -> Option<&dyn Experiment> {
        self.entries.get(name).map(|b| b.as_ref())
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.keys().copied()
    }

    /// Validates `cfg` against the experiment and runs it.
    pub fn execute(&self, name: &str, cfg: &ExperimentConfig) -> anyhow::Result<Report> {
        let exp = self
            .get(name)
            .with_context(|| format!("unknown experiment {name:?}"))?;
        if let Some(declared) = &cfg.experiment {
            ensure!(declared == name, "config is for {declared:?}, not {name:?}");
        }
        cfg.validate()?;
        if exp.randomized() {
            cfg.require_seed()?;
        }
        exp.run(cfg)
    }
}

fn build_scheme(cfg: &ExperimentConfig, default: SchemeDescriptor) -> anyhow::Result<SchemeRef> {
    let desc = cfg.scheme.clone().unwrap_or(default);
    SchemeRegistry::with_defaults()
        .build(&desc)
        .with_context(|| format!("cannot build scheme {:?}", desc.kind))
}

fn build_attack(
    e: &SchemeRef,
    desc: &AttackDescriptor,
    rng: &mut RngState,
) -> anyhow::Result<CloningAttack> {
    AttackRegistry::with_defaults()
        .build(e, desc, rng)
        .with_context(|| format!("cannot build attack {:?}", desc.channel))
}

/// The whole key space when it is small and no sample size was requested,
/// otherwise `key_samples` (or `default`) sampled keys.
fn keys_for(e: &dyn Qecm, cfg: &ExperimentConfig, rng: &mut RngState, default: usize) -> Vec<Key> {
    match (cfg.key_samples, e.enumerate_keys()) {
        (None, Some(keys)) => keys,
        (n, _) => sample_keys(e, n.unwrap_or(default), rng),
    }
}

fn seesaw_config(cfg: &ExperimentConfig, rng: RngState) -> SeesawConfig {
    let mut sc = SeesawConfig::new(0);
    sc.rng = rng;
    if let Some(n) = cfg.max_iters {
        sc.max_iters = n;
    }
    if let Some(n) = cfg.restarts {
        sc.restarts = n;
    }
    sc
}

/// Indistinguishability attack for each mixing weight against the bound
/// `½ + ½ α(1 − 2α) μ`, which is `½ + μ/16` at `α = ¼`.
pub fn run_lemma1(cfg: &ExperimentConfig) -> anyhow::Result<Report> {
    let seed = cfg.require_seed()?;
    let e = build_scheme(cfg, SchemeDescriptor::bb84(1))?;
    let m0 = cfg.attack.as_ref().and_then(|a| a.m0).unwrap_or(0);
    let alphas = match (&cfg.alphas, cfg.attack.as_ref().and_then(|a| a.alpha)) {
        (Some(list), _) => list.clone(),
        (None, Some(a)) => vec![a],
        (None, None) => vec![0.25],
    };
    ensure!(!alphas.is_empty(), "alphas must not be empty");
    for &a in &alphas {
        ensure!(
            (0.0..=0.5).contains(&a),
            "alpha must lie in [0, 1/2], got {a}"
        );
    }
    let mut rng = RngState::new(seed);
    let keys = keys_for(e.as_ref(), cfg, &mut rng, 64);
    let mu = mu_on_keys(e.as_ref(), &keys)?;
    let tol = cfg.abs_tol(1e-9);
    let mut report = Report::new("lemma1", &["scheme", "keys", "m0", "m1", "alpha", "mu"]);
    for alpha in alphas {
        let atk = ind_attack_on_keys(e.clone(), m0, alpha, &keys)?;
        let est = pwin_ind_on_keys(e.as_ref(), m0, &atk, &keys)?;
        let bound = 0.5 + 0.5 * alpha * (1.0 - 2.0 * alpha) * mu;
        let ctx = vec![
            e.label().into(),
            keys.len().into(),
            m0.into(),
            atk.m1.into(),
            alpha.into(),
            mu.into(),
        ];
        report.push(Row::at_least(ctx, est.mean, bound, tol).with_stderr(est.stderr));
    }
    Ok(report)
}

/// Random-basis measure-and-share attack on uniform Haar schemes.
pub fn run_theorem2(cfg: &ExperimentConfig) -> anyhow::Result<Report> {
    let seed = cfg.require_seed()?;
    let sizes = cfg
        .sizes
        .clone()
        .unwrap_or_else(|| vec![(2, 2), (4, 4), (8, 8), (16, 16)]);
    let trials = cfg.trials.unwrap_or(10_000);
    let sigmas = cfg.sigmas();
    let mut report = Report::new("theorem2", &["quantity", "M", "d", "trials"]);
    for (i, &(m, d)) in sizes.iter().enumerate() {
        ensure!(
            m >= 1 && d >= m && d % m == 0,
            "size ({m}, {d}) needs M to divide d"
        );
        let e = uniform_haar_scheme(m, d / m)?;
        let est = random_basis_attack_estimate(&e, trials, &mut RngState::stream(seed, i as u64))?;
        let rhs = RANDOM_BASIS_CONSTANT * ((m as f64).log2() - 1.0) / d as f64;
        let floor = rhs.max(1.0 / m as f64);
        let ctx = |q: &str| vec![q.into(), m.into(), d.into(), trials.into()];
        report.push(
            Row::at_least(ctx("lower_bound"), est.mean, floor, sigmas * est.stderr)
                .with_stderr(est.stderr),
        );
        if (m, d) == (2, 2) {
            // E[max(X, 1 − X)] for X uniform on [0, 1]
            report.push(
                Row::near(ctx("qubit_closed_form"), est.mean, 0.75, cfg.abs_tol(0.01))
                    .with_stderr(est.stderr),
            );
        }
    }
    Ok(report)
}

pub fn run_o2h(cfg: &ExperimentConfig) -> anyhow::Result<Report> {
    let mut report = Report::new("o2h", &["quantity"]);
    report.push(Row::near(
        vec!["success".into()],
        simo2h_success(),
        0.5625,
        cfg.abs_tol(1e-9),
    ));
    report.push(Row::near(
        vec!["extraction".into()],
        extraction_probability(),
        0.0,
        cfg.abs_tol(1e-12),
    ));
    report.push(Row::near(
        vec!["rhs".into()],
        simo2h_rhs(1, 1, 1, 0.0)?,
        4.5,
        0.0,
    ));
    Ok(report)
}

/// `E[max/sum]` for `n` exponentials of a common rate.
pub fn run_erlang(cfg: &ExperimentConfig) -> anyhow::Result<Report> {
    let seed = cfg.require_seed()?;
    let ns = cfg.ns.clone().unwrap_or_else(|| vec![2, 4, 64, 1024]);
    let rate = cfg.rate.unwrap_or(0.5);
    let trials = cfg.trials.unwrap_or(100_000);
    let mut report = Report::new("erlang", &["n", "rate", "trials"]);
    for (i, &n) in ns.iter().enumerate() {
        ensure!(n >= 1, "n must be at least 1");
        let ks = vec![1u32; n];
        let est = max_over_sum_estimate(&ks, rate, trials, &mut RngState::stream(seed, i as u64))?;
        let ctx = vec![n.into(), rate.into(), trials.into()];
        let row = if n == 2 {
            Row::near(ctx, est.mean, 0.75, cfg.abs_tol(0.005))
        } else {
            Row::at_least(
                ctx,
                est.mean,
                max_over_sum_lower_bound(&ks),
                cfg.sigmas() * est.stderr,
            )
        };
        report.push(row.with_stderr(est.stderr));
    }
    Ok(report)
}

/// Seesaw over the attack's channel, warm-started from the attack's own
/// measurements; the optimized value must not fall below the attack.
pub fn run_seesaw(cfg: &ExperimentConfig) -> anyhow::Result<Report> {
    let seed = cfg.require_seed()?;
    let e = build_scheme(cfg, SchemeDescriptor::bb84(1))?;
    let desc = cfg
        .attack
        .clone()
        .unwrap_or_else(|| AttackDescriptor::superposition_cloner(0.25));
    let mut rng = RngState::stream(seed, 0);
    let keys = keys_for(e.as_ref(), cfg, &mut rng, 16);
    let atk = build_attack(&e, &desc, &mut rng)?;
    let base = pwin_unif_on_keys(e.as_ref(), &atk, &keys)?;
    let mut sc = seesaw_config(cfg, RngState::stream(seed, 1));
    let opt = pwin_unif_seesaw_on_keys(
        e.as_ref(),
        &atk.channel,
        atk.dims,
        &keys,
        &mut sc,
        Some(&atk),
    )?;
    let mut report = Report::new("seesaw", &["quantity", "scheme", "channel", "keys"]);
    let ctx = |q: &str| {
        vec![
            q.into(),
            e.label().into(),
            atk.label.clone().into(),
            keys.len().into(),
        ]
    };
    report.push(Row::estimate(ctx("attack"), base.mean, None).with_stderr(base.stderr));
    report.push(
        Row::at_least(ctx("seesaw"), opt.mean, base.mean, cfg.abs_tol(1e-6))
            .with_stderr(opt.stderr),
    );
    report.push(Row::at_least(
        ctx("seesaw_upper"),
        1.0,
        opt.mean,
        cfg.abs_tol(1e-9),
    ));
    Ok(report)
}

#[derive(Serialize)]
struct MegDump {
    game: GameDump,
    strategies: Vec<(String, StrategyDump)>,
}

/// Game value of the induced strategy against the attack's own success, on
/// one key sample, with and without the transpose in Alice's effects.
pub fn run_meg(cfg: &ExperimentConfig) -> anyhow::Result<Report> {
    let seed = cfg.require_seed()?;
    let e = build_scheme(cfg, SchemeDescriptor::uniform_haar(2, 2))?;
    let mut rng = RngState::new(seed);
    let keys = keys_for(e.as_ref(), cfg, &mut rng, 50);
    let descs = match &cfg.attack {
        Some(d) => vec![d.clone()],
        None => vec![
            AttackDescriptor::superposition_cloner(0.25),
            AttackDescriptor::measure_share("haar"),
        ],
    };
    let tol = cfg.abs_tol(1e-8);
    let mut report = Report::new("meg", &["scheme", "channel", "keys", "convention"]);
    let mut attacks = Vec::new();
    for desc in &descs {
        let atk = build_attack(&e, desc, &mut rng)?;
        let check = verify_reduction_on_keys(e.as_ref(), &atk, &keys)?;
        let ctx = |conv: &str| {
            vec![
                e.label().into(),
                atk.label.clone().into(),
                keys.len().into(),
                conv.into(),
            ]
        };
        report.push(Row::near(ctx("transposed"), check.lhs, check.rhs, tol));
        report.push(Row::estimate(
            ctx("plain"),
            check.lhs_plain,
            Some(check.rhs),
        ));
        attacks.push(atk);
    }
    if let Some(path) = &cfg.dump {
        let (game, rho_bar) = meg_from_qecm_on_keys(
            e.as_ref(),
            &keys,
            DEFAULT_CUTOFF,
            EffectConvention::Transposed,
        )?;
        let strategies = attacks
            .iter()
            .map(|atk| {
                Ok((
                    atk.label.clone(),
                    StrategyDump::new(&strategy_from_attack(atk, &rho_bar)?),
                ))
            })
            .collect::<anyhow::Result<Vec<_>>>()?;
        let dump = MegDump {
            game: GameDump::new(&game),
            strategies,
        };
        fs::write(path, serde_json::to_string(&dump)?)
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(report)
}

/// Nondecreasing rank vectors of length `m` with positive entries summing to `d`.
fn rank_partitions(m: usize, d: usize) -> Vec<Vec<usize>> {
    fn go(left: usize, parts: usize, min: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 0 {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for t in min..=left / parts {
            cur.push(t);
            go(left - t, parts - 1, t, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(d, m, 1, &mut Vec::new(), &mut out);
    out
}

/// Warm-started seesaw estimates for every rank profile at fixed `(M, d)`,
/// each profile symmetrized over message order. Estimates only.
pub fn run_conjecture_scan(cfg: &ExperimentConfig) -> anyhow::Result<Report> {
    let seed = cfg.require_seed()?;
    let m = cfg.messages.unwrap_or(2);
    let d = cfg.d.unwrap_or(4);
    ensure!(m >= 2 && d >= m, "need 2 <= M <= d, got M = {m}, d = {d}");
    if d > SCAN_MAX_DIM {
        bail!("d = {d} is too large for a scan (at most {SCAN_MAX_DIM})");
    }
    let desc = cfg
        .attack
        .clone()
        .unwrap_or_else(|| AttackDescriptor::superposition_cloner(0.25));
    let mut report = Report::new("conjecture-scan", &["M", "d", "ranks", "channel", "keys"]);
    let mut uniform = None;
    let mut rows = Vec::new();
    for (i, t) in rank_partitions(m, d).into_iter().enumerate() {
        let e: SchemeRef = Arc::new(haar_scheme(
            m,
            d,
            RankDistribution::permutation_invariant(&t),
        )?);
        let mut rng = RngState::stream(seed, 2 * i as u64);
        let keys = keys_for(e.as_ref(), cfg, &mut rng, 8);
        let atk = build_attack(&e, &desc, &mut rng)?;
        let mut sc = seesaw_config(cfg, RngState::stream(seed, 2 * i as u64 + 1));
        let est = pwin_unif_seesaw_on_keys(
            e.as_ref(),
            &atk.channel,
            atk.dims,
            &keys,
            &mut sc,
            Some(&atk),
        )?;
        if t.iter().all(|&x| x == t[0]) {
            uniform = Some(est.mean);
        }
        let ranks = t
            .iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join("+");
        rows.push((
            vec![
                m.into(),
                d.into(),
                ranks.into(),
                atk.label.clone().into(),
                keys.len().into(),
            ],
            est,
        ));
    }
    for (ctx, est) in rows {
        report.push(Row::estimate(ctx, est.mean, uniform).with_stderr(est.stderr));
    }
    Ok(report)
}

/// Fast fixed-seed battery of exact checks.
pub fn run_selftest(cfg: &ExperimentConfig) -> anyhow::Result<Report> {
    let tol = cfg.abs_tol(1e-9);
    let mut report = Report::new("selftest", &["check"]);
    let row = |name: &str, value: f64, reference: f64, tol: f64| {
        Row::near(vec![name.into()], value, reference, tol)
    };

    let zero = PureState::basis(2, 0).density();
    let one = PureState::basis(2, 1).density();
    report.push(row(
        "lemma1_orthogonal_qubits",
        lemma1_evaluate(&zero, &one, 0.25)?.direct,
        0.5625,
        tol,
    ));

    let half = ComplexMatrix::from_diagonal(&ComplexVector::from_vec(vec![r(0.5), r(0.5), r(0.0)]));
    let mixed = DensityOperator::new(half)?;
    let last = PureState::basis(3, 2).density();
    let ordered = lemma1_evaluate_ordered(&mixed, &last, 0.25)?;
    report.push(row("lemma1_mixed_first", ordered.direct, 0.53125, tol));

    let bb84: SchemeRef = Arc::new(bb84_scheme(1)?);
    let keys = bb84
        .enumerate_keys()
        .context("one-qubit BB84 keys are enumerable")?;
    let ind = ind_attack_on_keys(bb84.clone(), 0, 0.25, &keys)?;
    report.push(row(
        "bb84_indistinguishability",
        pwin_ind_on_keys(bb84.as_ref(), 0, &ind, &keys)?.mean,
        0.5625,
        tol,
    ));

    let breidbart = measure_share_cloning_attack(bb84.clone(), breidbart_basis(1))?;
    let v = pwin_unif_on_keys(bb84.as_ref(), &breidbart, &keys)?.mean;
    report.push(row("bb84_breidbart", v, 0.5 + FRAC_1_SQRT_2 / 2.0, tol));

    report.push(row("o2h_success", simo2h_success(), 0.5625, tol));
    report.push(row(
        "o2h_extraction",
        extraction_probability(),
        0.0,
        cfg.abs_tol(1e-12),
    ));
    report.push(row("o2h_rhs", simo2h_rhs(1, 1, 1, 0.0)?, 4.5, 0.0));

    let exp1 = erlang_cdf(ErlangParams::new(1, 1.0)?, 1.0)?;
    report.push(row(
        "erlang_cdf_exponential",
        exp1,
        1.0 - (-1.0f64).exp(),
        cfg.abs_tol(1e-12),
    ));

    let cloner = lemma1_cloning_attack(bb84.clone(), 0, 1, 0.25)?;
    let check = verify_reduction_on_keys(bb84.as_ref(), &cloner, &keys)?;
    report.push(row(
        "meg_reduction_bb84",
        check.lhs,
        check.rhs,
        cfg.abs_tol(1e-8),
    ));

    let ens = ensemble_from_scheme_key(bb84.as_ref(), &keys[0], &superposition_cloner(2), (3, 3))?;
    let start = ((cloner.bob)(&keys[0])?, (cloner.charlie)(&keys[0])?);
    let mut sc = seesaw_config(cfg, RngState::new(11));
    let v = seesaw_pguess_from(&ens, &mut sc, &[start])?.value;
    report.push(Row::at_least(
        vec!["seesaw_warm_start".into()],
        v,
        0.5625,
        cfg.abs_tol(1e-6),
    ));

    let haar: SchemeRef = Arc::new(uniform_haar_scheme(2, 1)?);
    let err = uncloneable::schemes::correctness_error_on_keys(
        haar.as_ref(),
        &sample_keys(haar.as_ref(), 8, &mut RngState::new(12)),
    )?;
    report.push(row("haar_correctness", err, 0.0, cfg.abs_tol(1e-9)));
    Ok(report)
}
