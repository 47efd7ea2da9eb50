//! The superposition cloner and the projector strategy that pairs with it.

use std::sync::Arc;

use super::{CloningAttack, CloningIndAttack, KeyedPovm};
use crate::error::{Error, Result};
use crate::linalg::{
    c, expectation, max_abs, outer, r, tensor, ComplexMatrix, ComplexVector, DensityOperator,
    KrausChannel, Projector, TOL,
};
use crate::povm::Povm;
use crate::rng::RngState;
use crate::schemes::{mean_lambda_max_on_keys, sample_keys, Key, SchemeRef};

const ORTHOGONALITY_TOL: f64 = 1e-9;
const GAP_TOL: f64 = 1e-9;
const CLOSED_FORM_TOL: f64 = 1e-9;
/// Tolerance for treating two key-averaged top eigenvalues as tied.
const ARGMAX_TIE_TOL: f64 = 1e-12;

/// `V|j⟩ = (|⊥⟩|j⟩ + |j⟩|⊥⟩)/√2`, with `|⊥⟩` the extra basis index `d` on each side.
pub fn superposition_cloner(d: usize) -> KrausChannel {
    assert!(d >= 1, "dimension must be positive");
    let side = d + 1;
    let mut v = ComplexMatrix::zeros(side * side, d);
    let amp = r(std::f64::consts::FRAC_1_SQRT_2);
    for j in 0..d {
        v[(d * side + j, j)] = amp;
        v[(j * side + d, j)] = amp;
    }
    KrausChannel::isometry(v).expect("cloner is an isometry")
}

/// Builds `|φ⟩⟨φ| + Σ |s⟩⟨s|` with `|φ⟩ = √(1−α)|top⟩ + √α|bot⟩`.
pub fn lemma1_projector_matrix(
    top: &ComplexVector,
    rest: &[ComplexVector],
    bot: &ComplexVector,
    alpha: f64,
) -> ComplexMatrix {
    let phi = top * r((1.0 - alpha).sqrt()) + bot * r(alpha.sqrt());
    let mut m = outer(&phi);
    for s in rest {
        m += outer(s);
    }
    m
}

fn check_pair(rho: &DensityOperator, sigma: &DensityOperator, alpha: f64) -> Result<()> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: sigma.dim(),
        });
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::invalid(format!(
            "alpha must lie in [0, 1], got {alpha}"
        )));
    }
    let overlap = max_abs(&(rho.matrix() * sigma.matrix()));
    if overlap >= ORTHOGONALITY_TOL {
        return Err(Error::NotOrthogonalPair { overlap });
    }
    Ok(())
}

fn embed(v: ComplexVector) -> ComplexVector {
    let d = v.len();
    let mut out = ComplexVector::zeros(d + 1);
    out.rows_mut(0, d).copy_from(&v);
    out
}

fn build_projector(rho: &DensityOperator, alpha: f64, strict: bool) -> Result<Projector> {
    let d = rho.dim();
    let eig = rho.eigen();
    if strict && d >= 2 {
        let gap = eig.values[0] - eig.values[1];
        if gap < GAP_TOL {
            return Err(Error::DegenerateTop { gap });
        }
    }
    let top = embed(eig.vectors.column(0));
    let rest: Vec<_> = (1..d)
        .filter(|&i| eig.values[i] > TOL.support)
        .map(|i| embed(eig.vectors.column(i)))
        .collect();
    let mut bot = ComplexVector::zeros(d + 1);
    bot[d] = c(1.0, 0.0);
    Projector::new(lemma1_projector_matrix(&top, &rest, &bot, alpha))
}

/// The projector on `A ⊕ |⊥⟩` used by both parties after the cloner.
///
/// A degenerate top eigenvalue is accepted; the first eigenvector returned by
/// the (deterministic) eigensolver is used. See [`pi_projector_strict`].
pub fn pi_projector(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    alpha: f64,
) -> Result<Projector> {
    check_pair(rho, sigma, alpha)?;
    build_projector(rho, alpha, false)
}

/// Like [`pi_projector`], but rejects a top eigenvalue whose gap to the next one is below 1e-9.
pub fn pi_projector_strict(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    alpha: f64,
) -> Result<Projector> {
    check_pair(rho, sigma, alpha)?;
    build_projector(rho, alpha, true)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lemma1Evaluation {
    pub direct: f64,
    pub closed_form: f64,
    /// `λ_max` of whichever state the projector was built from.
    pub lambda_top: f64,
    /// Whether `ρ` and `σ` were exchanged so the larger top eigenvalue comes first.
    pub swapped: bool,
}

/// Value of the cloner-plus-projector strategy on `{½ρ, ½σ}`, computed both
/// by direct trace and in closed form.
pub fn lemma1_evaluate(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    alpha: f64,
) -> Result<Lemma1Evaluation> {
    check_pair(rho, sigma, alpha)?;
    if sigma.lambda_max() > rho.lambda_max() {
        let ev = evaluate_ordered(sigma, rho, alpha)?;
        return Ok(Lemma1Evaluation {
            swapped: true,
            ..ev
        });
    }
    evaluate_ordered(rho, sigma, alpha)
}

/// [`lemma1_evaluate`] without the swap: the projector is always built from `rho`.
pub fn lemma1_evaluate_ordered(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    alpha: f64,
) -> Result<Lemma1Evaluation> {
    check_pair(rho, sigma, alpha)?;
    evaluate_ordered(rho, sigma, alpha)
}

fn evaluate_ordered(
    first: &DensityOperator,
    second: &DensityOperator,
    alpha: f64,
) -> Result<Lemma1Evaluation> {
    let d = first.dim();
    let pi = build_projector(first, alpha, false)?;
    let not_pi = pi.complement();
    let cloner = superposition_cloner(d);
    let v = &cloner.kraus_ops()[0];
    let cloned = |s: &DensityOperator| v * s.matrix() * v.adjoint();
    let direct = 0.5
        * (expectation(&tensor(pi.matrix(), pi.matrix()), &cloned(first))
            + expectation(&tensor(not_pi.matrix(), not_pi.matrix()), &cloned(second)));
    let lambda_top = first.lambda_max();
    let closed_form = 0.5 * (alpha + lambda_top * alpha * (1.0 - 2.0 * alpha) + 1.0 - alpha);
    if (direct - closed_form).abs() > CLOSED_FORM_TOL {
        return Err(Error::ClosedFormMismatch {
            direct,
            closed_form,
        });
    }
    Ok(Lemma1Evaluation {
        direct,
        closed_form,
        lambda_top,
        swapped: false,
    })
}

/// Direct-trace value of [`lemma1_evaluate`].
pub fn lemma1_value(rho: &DensityOperator, sigma: &DensityOperator, alpha: f64) -> Result<f64> {
    Ok(lemma1_evaluate(rho, sigma, alpha)?.direct)
}

/// `{Π, I−Π}` for guessing "first" vs "second", with `Π` built from the
/// state with the larger top eigenvalue.
pub fn binary_lemma1_povm(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    alpha: f64,
) -> Result<Povm> {
    if sigma.lambda_max() > rho.lambda_max() {
        let pi = pi_projector(sigma, rho, alpha)?;
        Ok(Povm::binary(&pi.complement()))
    } else {
        Ok(Povm::binary(&pi_projector(rho, sigma, alpha)?))
    }
}

fn keyed_binary(e: SchemeRef, m0: usize, m1: usize, alpha: f64) -> KeyedPovm {
    Arc::new(move |key: &Key| {
        let rho = e.encrypt(key, m0)?;
        let sigma = e.encrypt(key, m1)?;
        binary_lemma1_povm(&rho, &sigma, alpha)
    })
}

/// Picks `m1` as the message (other than `m0`) with the largest key-averaged
/// top eigenvalue over `keys`; ties go to the smallest index.
pub fn ind_attack_on_keys(
    e: SchemeRef,
    m0: usize,
    alpha: f64,
    keys: &[Key],
) -> Result<CloningIndAttack> {
    let m = e.message_count();
    if m < 2 {
        return Err(Error::invalid("need at least two messages"));
    }
    if m0 >= m {
        return Err(Error::invalid(format!("message {m0} out of range")));
    }
    let lambdas = mean_lambda_max_on_keys(e.as_ref(), keys)?;
    let mut m1 = None::<usize>;
    for cand in (0..m).filter(|&x| x != m0) {
        match m1 {
            Some(best) if lambdas[cand] <= lambdas[best] + ARGMAX_TIE_TOL => {}
            _ => m1 = Some(cand),
        }
    }
    let m1 = m1.expect("at least one candidate");
    let d = e.cipher_dim();
    let povm = keyed_binary(e, m0, m1, alpha);
    Ok(CloningIndAttack {
        m1,
        channel: superposition_cloner(d),
        dims: (d + 1, d + 1),
        bob: povm.clone(),
        charlie: povm,
    })
}

pub fn ind_attack_build(
    e: SchemeRef,
    m0: usize,
    alpha: f64,
    key_samples: usize,
    rng: &mut RngState,
) -> Result<CloningIndAttack> {
    if key_samples == 0 {
        return Err(Error::invalid("key_samples must be at least 1"));
    }
    let keys = sample_keys(e.as_ref(), key_samples, rng);
    ind_attack_on_keys(e, m0, alpha, &keys)
}

/// The same strategy as a uniform-message attack: outcome `m0` for `Π`,
/// `m1` for `I−Π`, every other message never guessed.
pub fn lemma1_cloning_attack(
    e: SchemeRef,
    m0: usize,
    m1: usize,
    alpha: f64,
) -> Result<CloningAttack> {
    let m = e.message_count();
    if m0 >= m || m1 >= m || m0 == m1 {
        return Err(Error::invalid(format!(
            "need distinct messages below {m}, got {m0} and {m1}"
        )));
    }
    let d = e.cipher_dim();
    let binary = keyed_binary(e, m0, m1, alpha);
    let povm: KeyedPovm = Arc::new(move |key: &Key| {
        let b = binary(key)?;
        let mut map = vec![m0, m1];
        map.truncate(b.outcome_count());
        b.coarse_grain(&map, m)
    });
    CloningAttack::new(
        "superposition_cloner",
        superposition_cloner(d),
        (d + 1, d + 1),
        povm.clone(),
        povm,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attacks::{pwin_ind_on_keys, pwin_unif_on_keys};
    use crate::linalg::{
        basis_vector, haar_unitary, identity, max_abs_diff, random_density_operator,
    };
    use crate::schemes::{
        bb84_scheme, haar_scheme, mu_on_keys, uniform_haar_scheme, RankDistribution,
    };

    fn diag(vals: &[f64]) -> DensityOperator {
        let d = vals.len();
        let mut m = ComplexMatrix::zeros(d, d);
        for (i, &v) in vals.iter().enumerate() {
            m[(i, i)] = r(v);
        }
        DensityOperator::new(m).unwrap()
    }

    #[test]
    fn cloner_outputs() {
        let v = superposition_cloner(1).kraus_ops()[0].clone();
        // |⊥0⟩ = index 1*2+0, |0⊥⟩ = index 0*2+1
        let out = &v * basis_vector(1, 0);
        assert!((out[2].re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((out[1].re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((out.norm() - 1.0).abs() < 1e-15);

        let v2 = superposition_cloner(2).kraus_ops()[0].clone();
        let out = &v2 * basis_vector(2, 0);
        let bot0 = basis_vector(9, 2 * 3);
        assert!((bot0.dotc(&out).re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!(max_abs_diff(&(v2.adjoint() * &v2), &identity(2)) < 1e-12);
    }

    #[test]
    fn projector_pure_pair() {
        let pi = pi_projector(&diag(&[1.0, 0.0]), &diag(&[0.0, 1.0]), 0.25).unwrap();
        let phi = ComplexVector::from_vec(vec![r(3f64.sqrt() / 2.0), r(0.0), r(0.5)]);
        assert!(max_abs_diff(pi.matrix(), &outer(&phi)) < 1e-12);
        assert!((pi.matrix()[(2, 2)].re - 0.25).abs() < 1e-12);
    }

    #[test]
    fn projector_matrix_elements() {
        let mut rng = RngState::new(5);
        for alpha in [0.0, 0.125, 0.25, 0.5, 1.0] {
            let u = haar_unitary(4, &mut rng);
            let rho =
                DensityOperator::new(u.conjugate(diag(&[0.6, 0.4, 0.0, 0.0]).matrix())).unwrap();
            let sigma =
                DensityOperator::new(u.conjugate(diag(&[0.0, 0.0, 0.7, 0.3]).matrix())).unwrap();
            let pi = pi_projector_strict(&rho, &sigma, alpha).unwrap();
            let p = pi.matrix();
            assert!((p[(4, 4)].re - alpha).abs() < 1e-10);
            let a0 = embed(rho.eigen().vectors.column(0));
            let bot = basis_vector(5, 4);
            assert!(((a0.dotc(&(p * &a0))).re - (1.0 - alpha)).abs() < 1e-10);
            assert!((a0.dotc(&(p * &bot)).norm() - (alpha * (1.0 - alpha)).sqrt()).abs() < 1e-10);
            for j in 2..4 {
                let b = embed(u.column(j));
                assert!((p * b).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn projector_alpha_zero_annihilates_bot() {
        let pi = pi_projector(&diag(&[0.7, 0.3, 0.0]), &diag(&[0.0, 0.0, 1.0]), 0.0).unwrap();
        assert!((pi.matrix() * basis_vector(4, 3)).norm() < 1e-12);
        assert!((pi.matrix()[(1, 1)].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_support_is_annihilated() {
        let rho = diag(&[0.5, 0.5, 0.0]);
        let sigma = diag(&[0.0, 0.0, 1.0]);
        let pi = pi_projector(&rho, &sigma, 0.25).unwrap();
        assert!((pi.matrix() * basis_vector(4, 2)).norm() < 1e-12);
        assert!(matches!(
            pi_projector_strict(&rho, &sigma, 0.25),
            Err(Error::DegenerateTop { .. })
        ));
    }

    #[test]
    fn rejects_overlapping_pair() {
        let rho = diag(&[0.5, 0.5]);
        assert!(matches!(
            pi_projector(&rho, &rho, 0.25),
            Err(Error::NotOrthogonalPair { .. })
        ));
        assert!(pi_projector(&diag(&[1.0, 0.0]), &diag(&[0.0, 1.0]), 1.5).is_err());
    }

    #[test]
    fn lemma1_examples() {
        let pure = lemma1_evaluate(&diag(&[1.0, 0.0]), &diag(&[0.0, 1.0]), 0.25).unwrap();
        assert!((pure.direct - 9.0 / 16.0).abs() < 1e-12);
        assert!(
            (lemma1_value(&diag(&[1.0, 0.0]), &diag(&[0.0, 1.0]), 0.0).unwrap() - 0.5).abs()
                < 1e-12
        );
        let ev = lemma1_evaluate_ordered(&diag(&[0.5, 0.5, 0.0]), &diag(&[0.0, 0.0, 1.0]), 0.25)
            .unwrap();
        assert!((ev.direct - 0.53125).abs() < 1e-12);
        assert!((ev.closed_form - 0.53125).abs() < 1e-12);
        // the swapped default builds the projector from the pure state instead
        let v = lemma1_value(&diag(&[0.5, 0.5, 0.0]), &diag(&[0.0, 0.0, 1.0]), 0.25).unwrap();
        assert!((v - 9.0 / 16.0).abs() < 1e-12);
    }

    #[test]
    fn lemma1_swaps_to_larger_top() {
        let ev = lemma1_evaluate(&diag(&[0.5, 0.5, 0.0]), &diag(&[0.0, 0.0, 1.0]), 0.25).unwrap();
        assert!(ev.swapped);
        assert_eq!(ev.lambda_top, 1.0);
        let ev = lemma1_evaluate(&diag(&[0.0, 0.0, 1.0]), &diag(&[0.5, 0.5, 0.0]), 0.25).unwrap();
        assert!(!ev.swapped);
        assert!((ev.direct - 9.0 / 16.0).abs() < 1e-12);
    }

    #[test]
    fn lemma1_random_pairs_meet_bound() {
        let mut rng = RngState::new(11);
        for trial in 0..40 {
            let d = 2 + trial % 6;
            let split = 1 + trial % (d - 1);
            let u = haar_unitary(d, &mut rng);
            let a = random_density_operator(split, split, &mut rng);
            let b = random_density_operator(d - split, d - split, &mut rng);
            let mut ra = ComplexMatrix::zeros(d, d);
            ra.view_mut((0, 0), (split, split)).copy_from(a.matrix());
            let mut rb = ComplexMatrix::zeros(d, d);
            rb.view_mut((split, split), (d - split, d - split))
                .copy_from(b.matrix());
            let rho = DensityOperator::new(u.conjugate(&ra)).unwrap();
            let sigma = DensityOperator::new(u.conjugate(&rb)).unwrap();
            let v = lemma1_value(&rho, &sigma, 0.25).unwrap();
            let lam = rho.lambda_max().max(sigma.lambda_max());
            assert!(v >= 0.5 + lam / 16.0 - 1e-9);
        }
    }

    #[test]
    fn ind_attack_bb84_one_qubit() {
        let e: SchemeRef = Arc::new(bb84_scheme(1).unwrap());
        let mut rng = RngState::new(3);
        let atk = ind_attack_build(e.clone(), 0, 0.25, 8, &mut rng).unwrap();
        assert_eq!(atk.m1, 1);
        let keys = e.enumerate_keys().unwrap();
        let v = pwin_ind_on_keys(e.as_ref(), 0, &atk, &keys).unwrap();
        assert!((v.mean - 9.0 / 16.0).abs() < 1e-9);
        assert!(v.stderr < 1e-9);
    }

    #[test]
    fn ind_attack_flat_spectra() {
        let e: SchemeRef = Arc::new(uniform_haar_scheme(2, 2).unwrap());
        let mut rng = RngState::new(4);
        let keys = sample_keys(e.as_ref(), 10, &mut rng);
        let atk = ind_attack_on_keys(e.clone(), 0, 0.25, &keys).unwrap();
        let v = pwin_ind_on_keys(e.as_ref(), 0, &atk, &keys).unwrap();
        assert!((v.mean - 0.53125).abs() < 1e-9);
        assert!(v.mean >= 0.5 + mu_on_keys(e.as_ref(), &keys).unwrap() / 16.0 - 1e-9);
    }

    #[test]
    fn ind_attack_picks_rank_one_message() {
        let e: SchemeRef =
            Arc::new(haar_scheme(3, 4, RankDistribution::deterministic(vec![2, 1, 1])).unwrap());
        let mut rng = RngState::new(6);
        let atk = ind_attack_build(e.clone(), 0, 0.25, 4, &mut rng).unwrap();
        assert_eq!(atk.m1, 1);
        let e: SchemeRef =
            Arc::new(haar_scheme(3, 4, RankDistribution::deterministic(vec![1, 2, 1])).unwrap());
        let atk = ind_attack_build(e, 0, 0.25, 4, &mut rng).unwrap();
        assert_eq!(atk.m1, 2);
    }

    #[test]
    fn uniform_flavor_matches_ind_for_two_messages() {
        let e: SchemeRef = Arc::new(bb84_scheme(1).unwrap());
        let keys = e.enumerate_keys().unwrap();
        let atk = lemma1_cloning_attack(e.clone(), 0, 1, 0.25).unwrap();
        let v = pwin_unif_on_keys(e.as_ref(), &atk, &keys).unwrap();
        assert!((v.mean - 9.0 / 16.0).abs() < 1e-9);
        assert!(lemma1_cloning_attack(e, 0, 0, 0.25).is_err());
    }

    #[test]
    fn ensemble_for_pure_pair_is_cloned_states() {
        let e: SchemeRef = Arc::new(bb84_scheme(1).unwrap());
        let key = &e.enumerate_keys().unwrap()[0];
        let ch = superposition_cloner(2);
        let ens = crate::attacks::ensemble_from_scheme_key(e.as_ref(), key, &ch, (3, 3)).unwrap();
        let v = &ch.kraus_ops()[0];
        for (m, (p, st)) in ens.entries().iter().enumerate() {
            assert_eq!(*p, 0.5);
            let enc = e.encrypt(key, m).unwrap();
            assert!(max_abs_diff(st.matrix(), &(v * enc.matrix() * v.adjoint())) < 1e-12);
        }
    }
}
