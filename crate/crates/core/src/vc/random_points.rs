//! Step fits on submatrices at random sample points.

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{DiscreteSpace, ProductFunction};
use crate::scalar::Scalar;

use super::stepfit::{step_fit_exists, EXACT_MAX_ATOMS};

#[derive(Debug, Clone, PartialEq)]
pub struct RandomPointsReport {
    pub successes: usize,
    pub trials: usize,
}

impl RandomPointsReport {
    pub fn fraction(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }
}

/// Sampled `n × n` submatrix (uniform weights) for one trial seed.
pub fn sampled_submatrix<S: Scalar>(f: &ProductFunction<S>, n: usize, seed: u64) -> ProductFunction<S> {
    let weights =
        |w: &[S]| WeightedIndex::new(w.iter().map(|v| v.to_f64()).collect::<Vec<_>>()).expect("weights are positive");
    let (px, py) = (weights(f.x_space().weights()), weights(f.y_space().weights()));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs: Vec<usize> = (0..n).map(|_| px.sample(&mut rng)).collect();
    let ys: Vec<usize> = (0..n).map(|_| py.sample(&mut rng)).collect();
    let u = DiscreteSpace::uniform(n).into_ref();
    ProductFunction::from_fn(u.clone(), u, |a, b| f.get(xs[a], ys[b]).clone()).expect("entries are finite")
}

/// Number of trials `t` (seeded with `seed + t`) whose sampled submatrix
/// admits an exact step fit with `classes` blocks at `eps`.
pub fn random_points_check<S: Scalar>(
    f: &ProductFunction<S>,
    n: usize,
    classes: usize,
    eps: &S,
    trials: usize,
    seed: u64,
) -> Result<RandomPointsReport> {
    if n == 0 || n > EXACT_MAX_ATOMS {
        return Err(Error::InvalidInput(format!("sample size must be between 1 and {EXACT_MAX_ATOMS}")));
    }
    if trials == 0 || classes == 0 {
        return Err(Error::InvalidInput("trials and classes must be positive".into()));
    }
    let hits: Vec<bool> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let sub = sampled_submatrix(f, n, seed.wrapping_add(t as u64));
            step_fit_exists(&sub, classes, eps).fit.is_some()
        })
        .collect();
    Ok(RandomPointsReport { successes: hits.iter().filter(|&&h| h).count(), trials })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;
    use crate::vc::Family;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    #[test]
    fn step_functions_always_fit() {
        let x = DiscreteSpace::<Rational>::uniform(12).into_ref();
        let f = ProductFunction::from_fn(x.clone(), x, |i, j| q(((i / 4) + 3 * (j / 6)) as i64, 1)).unwrap();
        let r = random_points_check(&f, 8, 3, &q(1, 100), 10, 3).unwrap();
        assert_eq!(r.successes, 10);
        let c = ProductFunction::constant(f.x_space().clone(), f.y_space().clone(), q(2, 1));
        assert_eq!(random_points_check(&c, 6, 1, &q(1, 100), 10, 3).unwrap().fraction(), 1.0);
    }

    #[test]
    fn triangle_fails_sometimes() {
        let f = Family::TriangleIndicator.sample::<Rational>(32);
        let r = random_points_check(&f, 8, 2, &q(1, 10), 20, 11).unwrap();
        assert!(r.successes < r.trials);
        assert_eq!(r, random_points_check(&f, 8, 2, &q(1, 10), 20, 11).unwrap());
    }

    #[test]
    fn size_guard() {
        let f = Family::TriangleIndicator.sample::<Rational>(4);
        assert!(random_points_check(&f, 9, 2, &q(1, 10), 1, 0).is_err());
    }
}
