use crate::error::{Error, Result};
use crate::linalg::{expectation, herm_eig, hermitize, identity, ComplexMatrix, DensityOperator};
use crate::povm::Povm;

/// Outcome of a single-party discrimination problem over weighted operators
/// `A_x` (the objective is `Σ_x tr(A_x Π_x)`).
#[derive(Debug, Clone)]
pub struct Discrimination {
    pub value: f64,
    pub povm: Povm,
    pub iterations: usize,
    pub converged: bool,
}

pub trait Discriminator: Send + Sync {
    fn name(&self) -> &'static str;

    /// Maximizes `Σ_x tr(ops[x] Π_x)`. The result is never worse than `warm`.
    fn discriminate(&self, ops: &[ComplexMatrix], warm: Option<&Povm>) -> Result<Discrimination>;
}

pub(crate) fn objective(ops: &[ComplexMatrix], effects: &[ComplexMatrix]) -> f64 {
    ops.iter()
        .zip(effects)
        .map(|(a, p)| expectation(a, p))
        .sum()
}

fn check_ops(ops: &[ComplexMatrix]) -> Result<usize> {
    let first = ops
        .first()
        .ok_or_else(|| Error::invalid("no operators to discriminate"))?;
    let d = first.nrows();
    for a in ops {
        if a.nrows() != d || a.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: a.nrows(),
            });
        }
    }
    Ok(d)
}

fn keep_better(
    found: Discrimination,
    ops: &[ComplexMatrix],
    warm: Option<&Povm>,
) -> Discrimination {
    match warm {
        Some(w) => {
            let v = objective(ops, w.effects());
            if v > found.value {
                Discrimination {
                    value: v,
                    povm: w.clone(),
                    ..found
                }
            } else {
                found
            }
        }
        None => found,
    }
}

/// Exact two-outcome optimum: project onto the positive part of `A_0 − A_1`.
pub fn helstrom_operators(a0: &ComplexMatrix, a1: &ComplexMatrix) -> Result<Discrimination> {
    let d = check_ops(&[a0.clone(), a1.clone()])?;
    let eig = herm_eig(&hermitize(&(a0 - a1)))?;
    let p0 = eig.map(|l| if l > 0.0 { 1.0 } else { 0.0 });
    let p1 = identity(d) - &p0;
    let value = expectation(a0, &p0) + expectation(a1, &p1);
    Ok(Discrimination {
        value,
        povm: Povm::from_trusted(vec![p0, p1]),
        iterations: 0,
        converged: true,
    })
}

/// Optimal discrimination of `{(p0, ρ0), (p1, ρ1)}`.
pub fn helstrom(
    p0: f64,
    rho0: &DensityOperator,
    p1: f64,
    rho1: &DensityOperator,
) -> Result<(f64, Povm)> {
    if p0 < 0.0 || p1 < 0.0 || (p0 + p1 - 1.0).abs() > 1e-12 {
        return Err(Error::invalid(format!(
            "priors must be nonnegative and sum to 1, got {p0} and {p1}"
        )));
    }
    let out = helstrom_operators(&rho0.matrix().scale(p0), &rho1.matrix().scale(p1))?;
    Ok((out.value, out.povm))
}

#[derive(Debug, Clone, Copy)]
pub struct Helstrom;

impl Discriminator for Helstrom {
    fn name(&self) -> &'static str {
        "helstrom"
    }

    fn discriminate(&self, ops: &[ComplexMatrix], warm: Option<&Povm>) -> Result<Discrimination> {
        if ops.len() != 2 {
            return Err(Error::invalid(format!(
                "helstrom needs two operators, got {}",
                ops.len()
            )));
        }
        Ok(keep_better(
            helstrom_operators(&ops[0], &ops[1])?,
            ops,
            warm,
        ))
    }
}

/// Iterates `Π_x ← Λ⁻¹ A_x Π_x A_x Λ⁻¹` with `Λ = (Σ_x A_x Π_x A_x)^{1/2}`,
/// assigning the kernel of `Λ` to outcome 0. Runs from the uniform POVM and
/// from `warm` if given; the best iterate seen is returned.
#[derive(Debug, Clone, Copy)]
pub struct FixedPoint {
    pub iters: usize,
    pub eps: f64,
}

impl Default for FixedPoint {
    fn default() -> Self {
        Self {
            iters: 200,
            eps: 1e-12,
        }
    }
}

impl FixedPoint {
    fn run(&self, ops: &[ComplexMatrix], start: Vec<ComplexMatrix>) -> Result<Discrimination> {
        let d = ops[0].nrows();
        let mut pis = start;
        let mut best_value = objective(ops, &pis);
        let mut best = pis.clone();
        let mut prev = best_value;
        let mut converged = false;
        let mut used = 0;
        for it in 1..=self.iters {
            used = it;
            let weighted: Vec<ComplexMatrix> =
                ops.iter().zip(&pis).map(|(a, p)| a * p * a).collect();
            let s = hermitize(
                &weighted
                    .iter()
                    .fold(ComplexMatrix::zeros(d, d), |acc, w| acc + w),
            );
            let eig = herm_eig(&s)?;
            let cutoff = 1e-14 * eig.values[0].max(0.0) + 1e-300;
            let inv = eig.map(|l| if l > cutoff { 1.0 / l.sqrt() } else { 0.0 });
            let kernel = eig.map(|l| if l > cutoff { 0.0 } else { 1.0 });
            pis = weighted
                .iter()
                .map(|w| hermitize(&(&inv * w * &inv)))
                .collect();
            pis[0] += kernel;
            let v = objective(ops, &pis);
            if v > best_value {
                best_value = v;
                best = pis.clone();
            }
            if (v - prev).abs() < self.eps {
                converged = true;
                break;
            }
            prev = v;
        }
        Ok(Discrimination {
            value: best_value,
            povm: Povm::from_trusted(best),
            iterations: used,
            converged,
        })
    }
}

impl Discriminator for FixedPoint {
    fn name(&self) -> &'static str {
        "fixed_point"
    }

    fn discriminate(&self, ops: &[ComplexMatrix], warm: Option<&Povm>) -> Result<Discrimination> {
        let d = check_ops(ops)?;
        let n = ops.len();
        let mut found = self.run(ops, vec![identity(d).unscale(n as f64); n])?;
        if let Some(w) = warm {
            if w.dim() != d || w.outcome_count() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: w.outcome_count(),
                });
            }
            let from_warm = self.run(ops, w.effects().to_vec())?;
            if from_warm.value > found.value {
                found = from_warm;
            }
        }
        // trivial-guess floor: always answer the heaviest label
        let (heavy, heavy_value) = ops
            .iter()
            .map(|a| crate::linalg::trace(a).re)
            .enumerate()
            .fold(
                (0, f64::NEG_INFINITY),
                |b, (i, t)| if t > b.1 { (i, t) } else { b },
            );
        if heavy_value > found.value {
            found = Discrimination {
                value: heavy_value,
                povm: Povm::constant(d, n, heavy),
                ..found
            };
        }
        Ok(keep_better(found, ops, warm))
    }
}

/// Helstrom for two outcomes, the fixed point otherwise.
#[derive(Debug, Clone, Copy, Default)]
pub struct AutoDiscriminator {
    pub fixed_point: FixedPoint,
}

impl Discriminator for AutoDiscriminator {
    fn name(&self) -> &'static str {
        "auto"
    }

    fn discriminate(&self, ops: &[ComplexMatrix], warm: Option<&Povm>) -> Result<Discrimination> {
        if ops.len() == 2 {
            Helstrom.discriminate(ops, warm)
        } else {
            self.fixed_point.discriminate(ops, warm)
        }
    }
}

/// M-ary discrimination of `{(p_m, ρ_m)}` by the fixed-point iteration.
pub fn discrimination_fixed_point(
    ensemble: &[(f64, DensityOperator)],
    iters: usize,
    eps: f64,
) -> Result<Discrimination> {
    let total: f64 = ensemble.iter().map(|e| e.0).sum();
    if ensemble.iter().any(|e| e.0 < 0.0) || (total - 1.0).abs() > 1e-12 {
        return Err(Error::invalid("priors must be nonnegative and sum to 1"));
    }
    let ops: Vec<_> = ensemble
        .iter()
        .map(|(p, rho)| rho.matrix().scale(*p))
        .collect();
    FixedPoint { iters, eps }.discriminate(&ops, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{
        haar_unitary, outer, r, random_density_operator, ComplexVector, PureState,
    };
    use crate::rng::RngState;

    fn plus() -> DensityOperator {
        PureState::new(ComplexVector::from_vec(vec![
            r(0.5f64.sqrt()),
            r(0.5f64.sqrt()),
        ]))
        .unwrap()
        .density()
    }

    fn check_valid(p: &Povm) {
        Povm::with_tolerance(p.effects().to_vec(), 1e-8).unwrap();
    }

    #[test]
    fn helstrom_examples() {
        let z0 = PureState::basis(2, 0).density();
        let z1 = PureState::basis(2, 1).density();
        assert!((helstrom(0.5, &z0, 0.5, &z1).unwrap().0 - 1.0).abs() < 1e-12);
        assert!((helstrom(0.3, &z0, 0.7, &z0).unwrap().0 - 0.7).abs() < 1e-12);
        let (v, povm) = helstrom(0.5, &z0, 0.5, &plus()).unwrap();
        assert!((v - (0.5 + 1.0 / (2.0 * 2f64.sqrt()))).abs() < 1e-12);
        let achieved = 0.5 * expectation(z0.matrix(), povm.effect(0))
            + 0.5 * expectation(plus().matrix(), povm.effect(1));
        assert!((achieved - v).abs() < 1e-10);
        assert!(helstrom(0.5, &z0, 0.6, &z1).is_err());
    }

    #[test]
    fn helstrom_matches_trace_norm_formula() {
        let mut rng = RngState::new(1);
        for _ in 0..20 {
            let a = random_density_operator(3, 3, &mut rng);
            let b = random_density_operator(3, 2, &mut rng);
            let (v, _) = helstrom(0.4, &a, 0.6, &b).unwrap();
            let diff = a.matrix().scale(0.4) - b.matrix().scale(0.6);
            let norm1: f64 = herm_eig(&diff)
                .unwrap()
                .values
                .iter()
                .map(|l| l.abs())
                .sum();
            assert!((v - 0.5 * (1.0 + norm1)).abs() < 1e-10);
        }
    }

    #[test]
    fn fixed_point_reduces_to_helstrom() {
        let mut rng = RngState::new(2);
        for _ in 0..20 {
            let a = random_density_operator(2, 2, &mut rng);
            let b = random_density_operator(2, 1, &mut rng);
            let (h, _) = helstrom(0.5, &a, 0.5, &b).unwrap();
            let fp = discrimination_fixed_point(&[(0.5, a), (0.5, b)], 2000, 1e-14).unwrap();
            assert!((fp.value - h).abs() < 1e-6, "{} vs {h}", fp.value);
            check_valid(&fp.povm);
        }
    }

    #[test]
    fn fixed_point_trivial_cases() {
        let states: Vec<_> = (0..3)
            .map(|i| (1.0 / 3.0, PureState::basis(3, i).density()))
            .collect();
        let fp = discrimination_fixed_point(&states, 200, 1e-12).unwrap();
        assert!((fp.value - 1.0).abs() < 1e-9);
        let rho = random_density_operator(3, 2, &mut RngState::new(3));
        let same = vec![
            (1.0 / 3.0, rho.clone()),
            (1.0 / 3.0, rho.clone()),
            (1.0 / 3.0, rho),
        ];
        let fp = discrimination_fixed_point(&same, 200, 1e-12).unwrap();
        assert!((fp.value - 1.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn fixed_point_trine() {
        // three symmetric real qubit states: optimum is 2/3
        let trine: Vec<_> = (0..3)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / 3.0;
                let v = ComplexVector::from_vec(vec![r((t / 2.0).cos()), r((t / 2.0).sin())]);
                (1.0 / 3.0, DensityOperator::new(outer(&v)).unwrap())
            })
            .collect();
        let fp = discrimination_fixed_point(&trine, 2000, 1e-14).unwrap();
        assert!((fp.value - 2.0 / 3.0).abs() < 1e-6, "{}", fp.value);
        check_valid(&fp.povm);
    }

    #[test]
    fn never_worse_than_warm_start() {
        let mut rng = RngState::new(4);
        let ops: Vec<_> = (0..4)
            .map(|_| {
                random_density_operator(3, 3, &mut rng)
                    .into_matrix()
                    .unscale(4.0)
            })
            .collect();
        let u = haar_unitary(3, &mut rng);
        let warm = Povm::projective(&u, &[2, 0, 1], 4).unwrap();
        let w = objective(&ops, warm.effects());
        let fp = FixedPoint {
            iters: 3,
            eps: 1e-12,
        }
        .discriminate(&ops, Some(&warm))
        .unwrap();
        assert!(fp.value >= w - 1e-12);
        check_valid(&fp.povm);
        assert!((objective(&ops, fp.povm.effects()) - fp.value).abs() < 1e-10);
    }
}
