mod common;

use common::contracting_tuple;
use proptest::prelude::*;
use selfaffine::equilibrium::{lyapunov_dimension, BernoulliMeasure};
use selfaffine::pressure::{affinity_dimension, level_pressure, subadditivity_defect};
use selfaffine::words::ProductTree;
use selfaffine::{Budget, Exec, Potential};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn level_pressures_are_subadditive(t in contracting_tuple(3, 2), s in 0.0f64..3.0) {
        let est = level_pressure(&Potential::phi_s(t, s).unwrap(), 7, Budget::default()).unwrap();
        prop_assert!(subadditivity_defect(&est.levels) <= 1e-10);
        prop_assert!(est.lower <= est.value + 1e-12);
        prop_assert!(est.upper <= est.value);
    }

    #[test]
    fn upper_bound_is_non_increasing(t in contracting_tuple(2, 3), s in 0.0f64..2.0) {
        let p = Potential::phi_s(t, s).unwrap();
        let uppers: Vec<f64> = (1..=5).map(|n| level_pressure(&p, n, Budget::default()).unwrap().upper).collect();
        prop_assert!(uppers.windows(2).all(|w| w[1] <= w[0]), "{:?}", uppers);
    }

    #[test]
    fn pressure_decreases_in_s(t in contracting_tuple(2, 3)) {
        let values: Vec<f64> = (0..=16)
            .map(|k| level_pressure(&Potential::phi_s(t.clone(), k as f64 * 0.25).unwrap(), 4, Budget::default()).unwrap().value)
            .collect();
        prop_assert!(values.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{:?}", values);
    }

    #[test]
    fn reduction_is_independent_of_scheduling(t in contracting_tuple(3, 3), s in 0.0f64..3.0) {
        let p = Potential::phi_s(t, s).unwrap();
        let sums = |exec| {
            ProductTree::new(p.tuples(), 7, Budget::default()).unwrap().with_exec(exec).level_sums(|m| p.eval_products(m)).unwrap()
        };
        let (a, b) = (sums(Exec::Sequential), sums(Exec::Parallel));
        prop_assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn lyapunov_never_exceeds_affinity(t in contracting_tuple(2, 3), raw in prop::collection::vec(0.05f64..1.0, 3)) {
        let total: f64 = raw.iter().sum();
        let mu = BernoulliMeasure::new(raw.iter().map(|p| p / total).collect())
            .or_else(|_| BernoulliMeasure::uniform(3))
            .unwrap();
        let tol = 1e-4;
        let lyap = lyapunov_dimension(&t, &mu, 5, tol, Budget::default()).unwrap();
        let aff = affinity_dimension(&t, 5, tol, Budget::default()).unwrap();
        prop_assert!(lyap.lo <= aff.hi + 2.0 * tol, "{} > {}", lyap.lo, aff.hi);
    }
}
