mod common;

use common::rng;
use legfol::symplin::{classify_subspace, dual_completion, symp_complement, LinSubspace, SympForm};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::Rng;

fn random_matrix(r: &mut rand_chacha::ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| r.random_range(-1.0..1.0))
}

/// `P^T J P` for a random well-conditioned `P`.
fn random_symplectic(r: &mut rand_chacha::ChaCha8Rng, n: usize) -> SympForm {
    let p = DMatrix::identity(2 * n, 2 * n) + random_matrix(r, 2 * n, 2 * n) * 0.3;
    let j = SympForm::standard(n);
    SympForm::new(p.transpose() * j.matrix() * p).unwrap()
}

fn random_subspace(r: &mut rand_chacha::ChaCha8Rng, ambient: usize, dim: usize) -> LinSubspace {
    let vs: Vec<DVector<f64>> = (0..dim)
        .map(|_| DVector::from_fn(ambient, |_, _| r.random_range(-1.0..1.0)))
        .collect();
    LinSubspace::new(ambient, &vs).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn complement_is_an_involution(seed in any::<u64>(), n in 1usize..=3, frac in 0.0f64..=1.0) {
        let mut r = rng(seed);
        let omega = random_symplectic(&mut r, n);
        let dim = (frac * (2 * n) as f64).round() as usize;
        let w = random_subspace(&mut r, 2 * n, dim);
        let perp = symp_complement(&w, &omega);
        prop_assert_eq!(w.dim() + perp.dim(), 2 * n);
        prop_assert!(symp_complement(&perp, &omega).same_as(&w));
    }

    #[test]
    fn coisotropic_iff_complement_isotropic(seed in any::<u64>(), n in 1usize..=3, pick in 0usize..3) {
        let mut r = rng(seed);
        let omega = SympForm::standard(n);
        // A Lagrangian seed gives isotropic and coisotropic subspaces by
        // taking sub- and super-spaces; a random subspace is usually neither.
        let w = match pick {
            0 => LinSubspace::coordinate(2 * n, &(0..n).collect::<Vec<_>>()),
            1 => LinSubspace::coordinate(2 * n, &(0..n + 1).collect::<Vec<_>>()),
            _ => {
                let dim = r.random_range(0..=2 * n);
                random_subspace(&mut r, 2 * n, dim)
            }
        };
        let c = classify_subspace(&w, &omega);
        let cp = classify_subspace(&symp_complement(&w, &omega), &omega);
        prop_assert_eq!(c.coisotropic, cp.isotropic);
        prop_assert_eq!(c.isotropic, cp.coisotropic);
    }

    #[test]
    fn dual_completion_is_equivariant(seed in any::<u64>(), n in 1usize..=3) {
        let mut r = rng(seed);
        let omega = SympForm::standard(n);
        let e: Vec<DVector<f64>> = (0..n).map(|i| DVector::from_fn(2 * n, |k, _| f64::from(k == i))).collect();
        let complement = LinSubspace::coordinate(2 * n, &(n..2 * n).collect::<Vec<_>>());
        let f = dual_completion(&e, &complement, &omega).unwrap();
        let a = DMatrix::identity(n, n) + random_matrix(&mut r, n, n) * 0.4;
        prop_assume!(a.determinant().abs() > 0.1);
        let em = DMatrix::from_columns(&e) * &a;
        let e2: Vec<DVector<f64>> = em.column_iter().map(|c| c.into_owned()).collect();
        let f2 = dual_completion(&e2, &complement, &omega).unwrap();
        let expected = DMatrix::from_columns(&f) * a.try_inverse().unwrap().transpose();
        prop_assert!((DMatrix::from_columns(&f2) - expected).amax() < 1e-9);
        for (i, ei) in e2.iter().enumerate() {
            for (j, fj) in f2.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((omega.pair(ei, fj) - want).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn dependent_vectors_are_rejected() {
    let v = DVector::from_vec(vec![1.0, 2.0]);
    assert!(LinSubspace::new(2, &[v.clone(), v * 2.0]).is_err());
}
