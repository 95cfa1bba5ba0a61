mod common;

use common::*;
use proptest::prelude::*;
use vcont::vc::{
    evaluate_partition, matrix_distribution_exact, partition_error, random_points_check, residue_lower_bound,
    step_fit_exists, vc_profile, Family,
};
use vcont::{validate_semimetric, MetricClass, Rational};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn profile_is_a_sharp_threshold(f in function_strategy(4), classes in 1usize..=3) {
        let p = vc_profile(&f, classes);
        prop_assert!(p.exact);
        prop_assert_eq!(p.witness.error(), p.value.clone());
        prop_assert_eq!(partition_error(&f, classes, &p.witness.x_blocks, &p.witness.y_blocks), p.value.clone());
        prop_assert!(step_fit_exists(&f, classes, &p.value).fit.is_none());
        let above = p.value.clone() + q(1, 1000);
        let fit = step_fit_exists(&f, classes, &above).fit.expect("a fit just above the profile");
        prop_assert!(fit.verify(&f));
    }

    #[test]
    fn profile_is_antitone_in_classes(f in function_strategy(4)) {
        let values: Vec<Rational> = (1..=4).map(|k| vc_profile(&f, k).value).collect();
        prop_assert!(values.windows(2).all(|w| w[1] <= w[0]));
        prop_assert_eq!(&values[3], &q(0, 1));
        prop_assert!(values[0] <= f.max_abs());
    }

    #[test]
    fn midrange_levels_halve_the_spread(f in function_strategy(4), labels in prop::collection::vec(0usize..=2, 8)) {
        let (n, m) = f.shape();
        let fit = evaluate_partition(&f, 2, labels[..n].to_vec(), labels[4..4 + m].to_vec(), q(1, 1), true);
        for ((i, j), v) in f.values().indexed() {
            let (a, b) = (fit.x_blocks[i], fit.y_blocks[j]);
            if a > 0 && b > 0 {
                prop_assert!(vcont::Scalar::abs(&(v.clone() - fit.levels[(a - 1, b - 1)].clone())) <= fit.deviation);
            }
        }
    }

    #[test]
    fn matrix_distribution_is_invariant(
        m in metric_strategy(3),
        p in 1i64..=4,
        seed in any::<u64>(),
    ) {
        let n = m.len();
        let exact = matrix_distribution_exact(&m, 2).unwrap();
        let total = exact.support.iter().fold(q(0, 1), |acc, (_, w)| acc + w.clone());
        prop_assert_eq!(total, q(1, 1));
        let split = split_atom(&m, (seed as usize) % n, q(p, 5));
        prop_assert_eq!(validate_semimetric(&split), MetricClass::Semimetric);
        prop_assert_eq!(&matrix_distribution_exact(&split, 2).unwrap(), &exact);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.rotate_left((seed as usize / 7) % n);
        prop_assert_eq!(&matrix_distribution_exact(&relabel(&m, &perm), 2).unwrap(), &exact);
    }

    #[test]
    fn trivial_partition_bounds_the_profile(f in function_strategy(6)) {
        let (n, m) = f.shape();
        let one = partition_error(&f, 1, &vec![1; n], &vec![1; m]);
        let lo = f.values().iter().min().unwrap().clone();
        let hi = f.values().iter().max().unwrap().clone();
        prop_assert_eq!(&one, &((hi - lo) * q(1, 2)));
        prop_assert!(vc_profile(&f, 1).value <= one);
    }
}

#[test]
fn triangle_profile_by_class_count() {
    let f = Family::TriangleIndicator.sample::<Rational>(8);
    let got: Vec<Rational> = (1..=8).map(|k| vc_profile(&f, k).value).collect();
    let want = [q(1, 2), q(3, 8), q(3, 8), q(1, 4), q(1, 4), q(1, 8), q(1, 8), q(0, 1)];
    assert_eq!(got, want);
}

#[test]
fn residue_bound_matches_exact_at_base_size() {
    let f = Family::TriangleIndicator.sample::<Rational>(8);
    assert_eq!(residue_lower_bound(&f, 4), Some(q(1, 4)));
    let g = Family::TriangleIndicator.sample::<Rational>(12);
    assert_eq!(residue_lower_bound(&g, 4), None);
}

#[test]
fn random_points_are_seeded() {
    let f = Family::MetricKernel.sample::<Rational>(12);
    let a = random_points_check(&f, 6, 3, &q(1, 4), 12, 9).unwrap();
    let b = random_points_check(&f, 6, 3, &q(1, 4), 12, 9).unwrap();
    assert_eq!(a, b);
    assert!(random_points_check(&f, 9, 3, &q(1, 4), 12, 9).is_err());
}
