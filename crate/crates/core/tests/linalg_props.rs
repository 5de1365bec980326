mod common;

use common::{any_matrix, conditioned, matrix, rel, sorted_desc};
use itertools::Itertools;
use proptest::prelude::*;
use selfaffine::linalg::{eigen_moduli, exterior_power, kronecker, phi_s, phi_s_via_exterior, singular_values};
use selfaffine::words::word_matrix;
use selfaffine::{Matrix, MatrixTuple};

fn assert_spectra_close(got: &[f64], want: &[f64], tol: f64) -> Result<(), TestCaseError> {
    prop_assert_eq!(got.len(), want.len());
    let scale = want[0];
    for (g, w) in got.iter().zip(want) {
        prop_assert!((g - w).abs() <= tol * scale.max(w.abs()), "{} vs {}", g, w);
    }
    Ok(())
}

proptest! {
    #[test]
    fn kronecker_singular_values_are_products(a in any_matrix(), b in any_matrix()) {
        let sa = singular_values(&a).unwrap().values;
        let sb = singular_values(&b).unwrap().values;
        let want = sorted_desc(sa.iter().cartesian_product(&sb).map(|(x, y)| x * y).collect());
        let got = singular_values(&kronecker(&a, &b)).unwrap().values;
        assert_spectra_close(&got, &want, 1e-9)?;
    }

    #[test]
    fn exterior_singular_values_are_k_fold_products(a in any_matrix(), k_seed in 0usize..4) {
        let k = 1 + k_seed % a.dim();
        let sa = singular_values(&a).unwrap().values;
        let want = sorted_desc(sa.iter().combinations(k).map(|c| c.into_iter().product()).collect());
        let got = singular_values(&exterior_power(&a, k).unwrap()).unwrap().values;
        assert_spectra_close(&got, &want, 1e-9)?;
    }

    #[test]
    fn phi_cross_formula(a in matrix(4)) {
        for s in [0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0] {
            let direct = phi_s(&a, s).unwrap();
            let wedge = phi_s_via_exterior(&a, s).unwrap();
            prop_assert!(rel(direct, wedge) <= 1e-9, "s = {}: {} vs {}", s, direct, wedge);
        }
    }

    // For s ≥ d the bound is an equality, so rounding in the smallest singular
    // value of AB decides it; 1e-12 needs κ(A)κ(B) well below 1e3.
    #[test]
    fn phi_is_submultiplicative(a in conditioned(3, 0.2), b in conditioned(3, 0.2), s in 0.0f64..5.0) {
        let ab = &a * &b;
        prop_assert!(phi_s(&ab, s).unwrap() <= (1.0 + 1e-12) * phi_s(&a, s).unwrap() * phi_s(&b, s).unwrap());
    }

    #[test]
    fn word_matrix_is_a_homomorphism(
        ms in prop::collection::vec(matrix(3), 3),
        u in common::word(3, 6),
        v in common::word(3, 6),
    ) {
        let t = MatrixTuple::new(ms).unwrap();
        let whole = word_matrix(&t, &u.concat(&v)).unwrap();
        let (mu, mv) = (word_matrix(&t, &u).unwrap(), word_matrix(&t, &v).unwrap());
        let split = &mu * &mv;
        prop_assert!(whole.max_abs_diff(&split) <= 1e-12 * mu.norm() * mv.norm());
    }
}

/// `σ_i(A^n)^{1/n} → |λ_i(A)|` for a diagonalizable matrix with simple moduli.
///
/// `σ_i(A^n)` is read off as `‖(A^{∧i})^n‖ / ‖(A^{∧(i−1)})^n‖`; the small
/// singular values of `A^32` sit below the resolution of a direct SVD.
#[test]
fn gelfand_limits() {
    let lambdas = [0.9, -0.5, 0.25, 0.1];
    #[rustfmt::skip]
    let p = Matrix::from_row_slice(4, &[
        1.0, 0.2, -0.1, 0.3,
        0.1, 1.0, 0.25, -0.2,
        -0.3, 0.1, 1.0, 0.15,
        0.2, -0.25, 0.1, 1.0,
    ]).unwrap();
    let a = &(&p * &Matrix::diag(&lambdas)) * &p.inverse().unwrap();
    let moduli = eigen_moduli(&a).unwrap().values;
    for (m, l) in moduli.iter().zip(lambdas) {
        assert!((m - l.abs()).abs() < 1e-12);
    }
    for (i, lambda) in lambdas.iter().map(|l| l.abs()).enumerate() {
        let gaps: Vec<f64> = [8u32, 16, 32]
            .iter()
            .map(|&n| {
                let top = |k: usize| if k == 0 { 1.0 } else { exterior_power(&a, k).unwrap().pow(n).norm() };
                let sv = top(i + 1) / top(i);
                (sv.powf(1.0 / n as f64) - lambda).abs() / lambda
            })
            .collect();
        assert!(gaps.windows(2).all(|w| w[1] < w[0]), "index {i}: {gaps:?}");
        assert!(gaps[2] < 0.05, "index {i}: {gaps:?}");
    }
}
