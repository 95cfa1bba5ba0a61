mod common;

use common::*;
use proptest::prelude::*;
use vcont::sr_norm::verify_certificates;
use vcont::{cutoff, layer_cake_integral, nuclear_bound, sr_norm, ProductFunction, RankOneTerm, Rational};

fn norm(f: &ProductFunction<Rational>) -> Rational {
    sr_norm(f).value
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn strong_duality_with_certificates(f in function_strategy(6)) {
        let r = sr_norm(&f);
        prop_assert_eq!(r.gap(), q(0, 1));
        r.verify(&f).unwrap();
        verify_certificates(&f, &r.majorant, &r.dual_plan, &r.value, &r.dual_value).unwrap();
    }

    #[test]
    fn norm_axioms(fs in functions_strategy(5, 2), c in value_strategy()) {
        let (f, g) = (&fs[0], &fs[1]);
        let nf = norm(f);
        prop_assert!(nf >= q(0, 1));
        prop_assert_eq!(nf == q(0, 1), f.values().iter().all(|v| *v == q(0, 1)));
        prop_assert_eq!(norm(&f.scale(&c)), nf.clone() * vcont::Scalar::abs(&c));
        prop_assert!(norm(&f.add(g).unwrap()) <= nf.clone() + norm(g));
        prop_assert_eq!(norm(&f.abs()), nf.clone());
        prop_assert!(nf <= f.max_abs());
    }

    #[test]
    fn layer_cake_comparison(f in function_strategy(6)) {
        let nf = norm(&f);
        let l = layer_cake_integral(&f);
        prop_assert!(nf.clone() * q(1, 4) <= l.clone());
        prop_assert!(l <= nf * q(2, 1));
    }

    #[test]
    fn cutoff_shrinks(f in function_strategy(5), n in 0i64..=30) {
        let c = cutoff(&f, &q(n, 3)).unwrap();
        prop_assert!(c.max_abs() <= q(n, 3));
        prop_assert!(norm(&c) <= norm(&f));
    }

    #[test]
    fn nuclear_bound_dominates(
        (x, y) in pair_strategy(4),
        seeds in prop::collection::vec((value_strategy(), 0u64..1000), 1..=3),
    ) {
        let terms: Vec<RankOneTerm<Rational>> = seeds
            .iter()
            .map(|(s, k)| RankOneTerm {
                s: vcont::Scalar::abs(s),
                u: (0..x.len()).map(|i| q(if (k >> i) & 1 == 1 { 1 } else { -1 }, 1)).collect(),
                v: (0..y.len()).map(|j| q(if (k >> (j + 3)) & 1 == 1 { 1 } else { -1 }, 1)).collect(),
            })
            .collect();
        let b = nuclear_bound(&terms, &x, &y).unwrap();
        prop_assert!(norm(&b.kernel) <= b.bound.clone());
        prop_assert!(b.majorant.violation(&b.kernel, vcont::Tol::DEFAULT).is_none());
    }
}
