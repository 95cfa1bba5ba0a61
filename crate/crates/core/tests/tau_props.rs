mod common;

use common::*;
use proptest::prelude::*;
use vcont::tau::within_sqrt_bound;
use vcont::{sr_norm, tau_ball_check, tau_distance, ProductFunction, Rational};

fn tau(f: &ProductFunction<Rational>, g: &ProductFunction<Rational>) -> Rational {
    tau_distance(f, g).unwrap().value
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn metric_axioms(fs in functions_strategy(5, 3)) {
        let (f, g, h) = (&fs[0], &fs[1], &fs[2]);
        let fg = tau(f, g);
        prop_assert_eq!(&fg, &tau(g, f));
        prop_assert_eq!(tau(f, f), q(0, 1));
        prop_assert!(fg <= q(1, 1));
        prop_assert!(fg <= tau(f, h) + tau(h, g));
    }

    #[test]
    fn ball_membership_matches_value(fs in functions_strategy(5, 2)) {
        let (f, g) = (&fs[0], &fs[1]);
        let t = tau_distance(f, g).unwrap();
        prop_assert!(tau_ball_check(f, g, &t.value).unwrap());
        prop_assert!(t.witness_set_thickness <= t.value.clone());
        if t.value > q(0, 1) {
            prop_assert!(!tau_ball_check(f, g, &(t.value.clone() * q(999, 1000))).unwrap());
        }
    }

    #[test]
    fn chebyshev_bound(f in function_strategy(6)) {
        let zero = ProductFunction::constant(f.x_space().clone(), f.y_space().clone(), q(0, 1));
        prop_assert!(within_sqrt_bound(&tau(&zero, &f), &sr_norm(&f).value));
    }

    #[test]
    fn shift_invariance(fs in functions_strategy(4, 3)) {
        let (f, g, h) = (&fs[0], &fs[1], &fs[2]);
        prop_assert_eq!(tau(&f.add(h).unwrap(), &g.add(h).unwrap()), tau(f, g));
    }
}
