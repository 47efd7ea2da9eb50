use rand::Rng;
use rand_distr::StandardNormal;

use super::{c, hermitize, ComplexMatrix, ComplexVector, DensityOperator, PureState, UnitaryOp};
use crate::rng::RngState;

fn complex_normal(rng: &mut RngState) -> super::C64 {
    c(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// `rows × cols` matrix of i.i.d. standard complex Gaussians.
pub fn ginibre(rows: usize, cols: usize, rng: &mut RngState) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_normal(rng))
}

/// Haar-distributed unitary: QR of a Ginibre matrix, with the phases of
/// `R`'s diagonal moved into `Q` so the distribution is exactly invariant.
pub fn haar_unitary(d: usize, rng: &mut RngState) -> UnitaryOp {
    assert!(d >= 1, "dimension must be positive");
    let qr = ginibre(d, d, rng).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 {
            rjj / rjj.norm()
        } else {
            c(1.0, 0.0)
        };
        q.column_mut(j).iter_mut().for_each(|z| *z *= phase);
    }
    UnitaryOp::from_trusted(q)
}

/// Uniformly random unit vector: a normalized standard complex Gaussian vector.
pub fn uniform_sphere_vector(d: usize, rng: &mut RngState) -> PureState {
    assert!(d >= 1, "dimension must be positive");
    loop {
        let v = ComplexVector::from_fn(d, |_, _| complex_normal(rng));
        if let Ok(s) = PureState::normalized(v) {
            return s;
        }
    }
}

/// Random Hermitian matrix (GUE-like, unnormalized).
pub fn random_hermitian(d: usize, rng: &mut RngState) -> ComplexMatrix {
    hermitize(&ginibre(d, d, rng))
}

/// Random density operator of the given rank from the induced measure
/// (`G G† / tr(G G†)` with `G` a `d × rank` Ginibre matrix).
pub fn random_density_operator(d: usize, rank: usize, rng: &mut RngState) -> DensityOperator {
    let g = ginibre(d, rank.max(1), rng);
    let m = &g * g.adjoint();
    let tr = super::trace(&m).re;
    DensityOperator::from_trusted(m.unscale(tr))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{identity, max_abs_diff, outer};

    #[test]
    fn haar_d1_is_phase() {
        let u = haar_unitary(1, &mut RngState::new(1));
        assert!((u.matrix()[(0, 0)].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn haar_is_unitary_and_reproducible() {
        let mut rng = RngState::new(2);
        for d in 1..=12 {
            let u = haar_unitary(d, &mut rng);
            assert!(UnitaryOp::new(u.matrix().clone()).is_ok());
        }
        let a = haar_unitary(4, &mut RngState::new(42));
        let b = haar_unitary(4, &mut RngState::new(42));
        let c = haar_unitary(4, &mut RngState::new(43));
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn haar_first_moment_is_maximally_mixed() {
        // E[U|0><0|U†] = I/d by unitary invariance
        let d = 4;
        let mut rng = RngState::new(17);
        let mut acc = ComplexMatrix::zeros(d, d);
        let n = 10_000;
        for _ in 0..n {
            let u = haar_unitary(d, &mut rng);
            acc += outer(&u.column(0));
        }
        acc.unscale_mut(n as f64);
        assert!(max_abs_diff(&acc, &identity(d).unscale(d as f64)) < 0.02);
    }

    #[test]
    fn haar_diagonal_overlap_mean() {
        // E|<0|U|0>|^2 = 1/d; check within 3 standard errors at 1e5 samples
        let d = 3;
        let mut rng = RngState::new(23);
        let n = 100_000;
        let xs: Vec<f64> = (0..n)
            .map(|_| haar_unitary(d, &mut rng).matrix()[(0, 0)].norm_sqr())
            .collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let se = (var / n as f64).sqrt();
        assert!(
            (mean - 1.0 / d as f64).abs() < 3.0 * se,
            "mean {mean} se {se}"
        );
    }

    #[test]
    fn sphere_vectors() {
        let mut rng = RngState::new(4);
        let s = uniform_sphere_vector(1, &mut rng);
        assert!((s.amplitudes()[0].norm() - 1.0).abs() < 1e-14);
        let n = 100_000;
        let mut mean = 0.0;
        for _ in 0..n {
            let s = uniform_sphere_vector(2, &mut rng);
            assert!((s.amplitudes().norm() - 1.0).abs() < 1e-10);
            mean += s.amplitudes()[0].norm_sqr();
        }
        mean /= n as f64;
        assert!((mean - 0.5).abs() < 0.01);
    }
}
