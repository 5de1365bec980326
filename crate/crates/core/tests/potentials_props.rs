mod common;

use common::{conditioned, contracting_tuple, matrix, rel, word};
use proptest::prelude::*;
use selfaffine::fixtures;
use selfaffine::linalg::singular_values;
use selfaffine::potentials::{dualize, max_identity_check, Factor};
use selfaffine::pressure::pressure_equality_check;
use selfaffine::words::word_matrix;
use selfaffine::{Budget, MatrixTuple, Potential, SymbolPermutation};

fn swap() -> SymbolPermutation {
    SymbolPermutation::from_one_based(&[2, 1]).unwrap()
}

fn pair() -> impl Strategy<Value = MatrixTuple> {
    prop::collection::vec(matrix(2), 2).prop_map(|m| MatrixTuple::new(m).unwrap())
}

/// Pairs whose length-6 Kronecker products keep every singular value well
/// above SVD resolution.
fn tame_pair() -> impl Strategy<Value = MatrixTuple> {
    prop::collection::vec(conditioned(2, 0.2), 2).prop_map(|m| MatrixTuple::new(m).unwrap())
}

fn assert_submultiplicative(p: &Potential, u: &selfaffine::Word, v: &selfaffine::Word) -> Result<(), TestCaseError> {
    let uv = p.eval(&u.concat(v)).unwrap();
    let bound = p.eval(u).unwrap() * p.eval(v).unwrap();
    prop_assert!(uv <= (1.0 + 1e-10) * bound, "{}: {} > {}", p.label(), uv, bound);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn every_kind_is_submultiplicative(
        t in contracting_tuple(3, 2),
        other in contracting_tuple(3, 2),
        base in pair(),
        s in 0.0f64..3.0,
        fs in 1.01f64..=2.0,
        u in word(2, 5),
        v in word(2, 5),
    ) {
        assert_submultiplicative(&Potential::phi_s(t.clone(), s).unwrap(), &u, &v)?;
        let np = Potential::norm_product(vec![t, other], vec![0.7, 1.3]).unwrap();
        assert_submultiplicative(&np, &u, &v)?;
        let f1 = Potential::factor(base, swap(), fs, Factor::First).unwrap();
        assert_submultiplicative(&f1, &u, &v)?;
        assert_submultiplicative(&f1.other_factor(), &u, &v)?;
    }

    #[test]
    fn max_identity_for_random_pairs(base in tame_pair(), s in 1.01f64..=2.0, w in word(2, 8)) {
        let check = max_identity_check(&base, &swap(), s, &w).unwrap();
        prop_assert!(check.holds, "{:?}", check);
    }

    #[test]
    fn dual_phi_matches_primal(base in tame_pair(), s in 2.0f64..2.99, w in word(2, 6)) {
        let dual = dualize(&base, &swap(), s).unwrap();
        let primal = singular_values(&word_matrix(&base.kronecker_with(&swap()).unwrap(), &w).unwrap()).unwrap().phi_s(s);
        let dual_value = singular_values(&word_matrix(&dual.dual_kronecker().unwrap(), &w).unwrap()).unwrap().phi_s(dual.dual_s);
        prop_assert!(rel(primal, dual_value) <= 1e-8, "{} vs {}", primal, dual_value);
    }

    #[test]
    fn dualizing_twice_at_two_is_the_identity(base in tame_pair(), w in word(2, 6)) {
        let once = dualize(&base, &swap(), 2.0).unwrap();
        let twice = dualize(&once.dual_tuple, &swap(), once.dual_s).unwrap();
        let kron = base.kronecker_with(&swap()).unwrap();
        let back = twice.dual_kronecker().unwrap();
        let a = singular_values(&word_matrix(&kron, &w).unwrap()).unwrap().phi_s(2.0);
        let b = singular_values(&word_matrix(&back, &w).unwrap()).unwrap().phi_s(2.0);
        prop_assert!(rel(a, b) <= 1e-8);
    }

    #[test]
    fn level_sums_agree_under_relabelling(base in pair(), s in 1.01f64..=2.0, n in 1usize..=8) {
        let f1 = Potential::factor(base, swap(), s, Factor::First).unwrap();
        let eq = pressure_equality_check(&f1, &f1.other_factor(), n, Budget::default()).unwrap();
        prop_assert!(eq.symmetric, "{:?}", eq);
        prop_assert!(eq.sandwich, "{:?}", eq);
    }
}

#[test]
fn kronecker_pair_max_identity_at_every_tested_exponent() {
    let (base, iota) = fixtures::kronecker_pair_base(0.44, 0.2, 1.0).unwrap();
    for s in [1.2, 1.5, 2.0] {
        for n in 1..=8 {
            let scan = selfaffine::potentials::max_identity_scan(&base, &iota, s, n, Budget::default()).unwrap();
            assert_eq!(scan.failures, 0, "s = {s}, n = {n}: {scan:?}");
            assert_eq!(scan.words, 1 << n);
        }
    }
}
