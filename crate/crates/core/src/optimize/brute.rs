use std::f64::consts::PI;

use crate::attacks::GuessingEnsemble;
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::optimize::contract_with_first;

/// Grid of unit Bloch vectors: polar angles `kπ/(grid/2)` including both
/// poles (visited once each) and `grid` azimuths.
fn bloch_grid(grid: usize) -> Vec<[f64; 3]> {
    let polar = (grid / 2).max(1);
    let mut out = Vec::new();
    for i in 0..=polar {
        let theta = PI * i as f64 / polar as f64;
        let azimuths = if i == 0 || i == polar { 1 } else { grid.max(1) };
        for j in 0..azimuths {
            let phi = 2.0 * PI * j as f64 / grid.max(1) as f64;
            out.push([
                theta.sin() * phi.cos(),
                theta.sin() * phi.sin(),
                theta.cos(),
            ]);
        }
    }
    out
}

/// `(tr A, tr(Aσx), tr(Aσy), tr(Aσz))` of a 2×2 operator.
fn pauli_coefficients(a: &ComplexMatrix) -> [f64; 4] {
    [
        (a[(0, 0)] + a[(1, 1)]).re,
        (a[(0, 1)] + a[(1, 0)]).re,
        (a[(1, 0)] - a[(0, 1)]).im,
        (a[(0, 0)] - a[(1, 1)]).re,
    ]
}

fn pauli(k: usize) -> ComplexMatrix {
    use crate::linalg::c;
    let z = c(0.0, 0.0);
    match k {
        0 => ComplexMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), z, z, c(1.0, 0.0)]),
        1 => ComplexMatrix::from_row_slice(2, 2, &[z, c(1.0, 0.0), c(1.0, 0.0), z]),
        2 => ComplexMatrix::from_row_slice(2, 2, &[z, c(0.0, -1.0), c(0.0, 1.0), z]),
        _ => ComplexMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), z, z, c(-1.0, 0.0)]),
    }
}

/// Maximum of the two-party guessing objective over pairs of two-outcome
/// qubit measurements drawn from a Bloch grid (plus the two constant
/// measurements on each side). Projective-only, so a lower bound.
pub fn brute_force_pguess_qubit(ens: &GuessingEnsemble, grid: usize) -> Result<f64> {
    if ens.dims() != (2, 2) {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: ens.dims().0.max(ens.dims().1),
        });
    }
    if ens.len() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: ens.len(),
        });
    }
    if grid == 0 {
        return Err(Error::invalid("grid must be positive"));
    }
    // Charlie's operator for outcome x given Bob's effect (I + n·σ)/2 for
    // x=0 and (I − n·σ)/2 for x=1, expanded in n.
    let mut table = [[[0.0; 4]; 4]; 2];
    for (x, (p, rho)) in ens.entries().iter().enumerate() {
        for (k, row) in table[x].iter_mut().enumerate() {
            let op = contract_with_first(rho.matrix(), &pauli(k), (2, 2)).scale(0.5 * p);
            *row = pauli_coefficients(&op);
        }
    }
    let mut bob: Vec<Option<[f64; 3]>> = bloch_grid(grid).into_iter().map(Some).collect();
    bob.push(None);
    let charlie = bloch_grid(grid);
    let mut best = f64::NEG_INFINITY;
    for sign in [1.0, -1.0] {
        for b in &bob {
            // Bob effect for outcome 0: (I + s·n·σ)/2, or I / 0 for the constants
            let (w0, n0) = match b {
                Some(n) => (1.0, [sign * n[0], sign * n[1], sign * n[2]]),
                None => (1.0 + sign, [0.0; 3]),
            };
            let mut a = [[0.0; 4]; 2];
            for k in 0..4 {
                a[0][k] =
                    w0 * table[0][0][k] + (1..4).map(|j| n0[j - 1] * table[0][j][k]).sum::<f64>();
                a[1][k] = (2.0 - w0) * table[1][0][k]
                    - (1..4).map(|j| n0[j - 1] * table[1][j][k]).sum::<f64>();
            }
            // Charlie: value = tr A1 + tr((A0 − A1) Q0)
            let base = a[1][0];
            let diff = [
                a[0][0] - a[1][0],
                a[0][1] - a[1][1],
                a[0][2] - a[1][2],
                a[0][3] - a[1][3],
            ];
            let mut local = base.max(base + diff[0]);
            for m in &charlie {
                local = local
                    .max(base + 0.5 * (diff[0] + diff[1] * m[0] + diff[2] * m[1] + diff[3] * m[2]));
            }
            best = best.max(local);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attacks::GuessingEnsemble;
    use crate::linalg::{random_density_operator, DensityOperator, PureState};
    use crate::optimize::{seesaw_pguess, SeesawConfig};
    use crate::rng::RngState;

    #[test]
    fn grid_includes_poles_once() {
        let g = bloch_grid(4);
        assert_eq!(g.len(), 2 + 4);
        assert!(g
            .iter()
            .all(|v| ((v[0] * v[0] + v[1] * v[1] + v[2] * v[2]) - 1.0).abs() < 1e-12));
    }

    #[test]
    fn orthogonal_product() {
        let entries = (0..2)
            .map(|x| {
                (
                    0.5,
                    PureState::basis(2, x)
                        .density()
                        .tensor(&PureState::basis(2, x).density()),
                )
            })
            .collect();
        let ens = GuessingEnsemble::new(entries, (2, 2)).unwrap();
        let grid = 20;
        let v = brute_force_pguess_qubit(&ens, grid).unwrap();
        assert!((v - 1.0).abs() < 2.0 / grid as f64);
    }

    #[test]
    fn identical_states() {
        let rho = random_density_operator(4, 3, &mut RngState::new(1));
        let ens = GuessingEnsemble::new(vec![(0.5, rho.clone()), (0.5, rho)], (2, 2)).unwrap();
        assert!((brute_force_pguess_qubit(&ens, 30).unwrap() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn agrees_with_seesaw_when_charlie_is_trivial() {
        let mut rng = RngState::new(2);
        let a = random_density_operator(2, 2, &mut rng);
        let b = random_density_operator(2, 1, &mut rng);
        let mixed = DensityOperator::maximally_mixed(2);
        let ens = GuessingEnsemble::new(
            vec![(0.5, a.tensor(&mixed)), (0.5, b.tensor(&mixed))],
            (2, 2),
        )
        .unwrap();
        let brute = brute_force_pguess_qubit(&ens, 200).unwrap();
        let see = seesaw_pguess(&ens, &mut SeesawConfig::new(3))
            .unwrap()
            .value;
        assert!((brute - see).abs() < 5e-3, "{brute} vs {see}");
    }

    #[test]
    fn rejects_wrong_dims() {
        let ens = GuessingEnsemble::new(vec![(1.0, DensityOperator::maximally_mixed(6))], (3, 2))
            .unwrap();
        assert!(brute_force_pguess_qubit(&ens, 10).is_err());
    }
}
