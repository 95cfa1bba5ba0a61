//! Distribution of the `k × k` matrix `ρ(x_i, y_j)` for independent
//! `μ`-distributed points `x_1..x_k`, `y_1..y_k`.

use std::cmp::Ordering;

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::Grid;
use crate::model::MetricMatrix;
use crate::scalar::Scalar;

/// Largest `|atoms|^(2k)` enumerated by [`matrix_distribution_exact`].
pub const ENUMERATION_LIMIT: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixDistribution<S> {
    pub k: usize,
    /// Distinct matrices in lexicographic order of their row-major entries.
    pub support: Vec<(Grid<S>, S)>,
}

fn lex_cmp<S: Scalar>(a: &Grid<S>, b: &Grid<S>) -> Ordering {
    a.iter().zip(b.iter()).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(Ordering::Equal)
}

impl<S: Scalar> MatrixDistribution<S> {
    /// Sorts and merges equal matrices.
    pub fn from_weighted(k: usize, mut items: Vec<(Grid<S>, S)>) -> Self {
        items.sort_by(|a, b| lex_cmp(&a.0, &b.0));
        let mut support: Vec<(Grid<S>, S)> = Vec::new();
        for (m, p) in items {
            match support.last_mut() {
                Some((last, q)) if *last == m => *q = q.clone() + p,
                _ => support.push((m, p)),
            }
        }
        MatrixDistribution { k, support }
    }

    /// Empirical distribution of a sample.
    pub fn empirical(k: usize, sample: &[Grid<S>]) -> Self {
        let p = S::from_ratio(1, sample.len() as i64);
        Self::from_weighted(k, sample.iter().map(|m| (m.clone(), p.clone())).collect())
    }

    pub fn probability_of(&self, m: &Grid<S>) -> S {
        self.support
            .binary_search_by(|(s, _)| lex_cmp(s, m))
            .map(|i| self.support[i].1.clone())
            .unwrap_or_else(|_| S::zero())
    }

    /// Total variation distance `½ Σ |p − q|`.
    pub fn total_variation(&self, other: &Self) -> S {
        let (mut i, mut j) = (0, 0);
        let mut acc = S::zero();
        let (a, b) = (&self.support, &other.support);
        while i < a.len() || j < b.len() {
            let ord = match (a.get(i), b.get(j)) {
                (Some(x), Some(y)) => lex_cmp(&x.0, &y.0),
                (Some(_), None) => Ordering::Less,
                _ => Ordering::Greater,
            };
            match ord {
                Ordering::Less => {
                    acc = acc + a[i].1.abs();
                    i += 1;
                }
                Ordering::Greater => {
                    acc = acc + b[j].1.abs();
                    j += 1;
                }
                Ordering::Equal => {
                    acc = acc + (a[i].1.clone() - b[j].1.clone()).abs();
                    i += 1;
                    j += 1;
                }
            }
        }
        acc * S::half()
    }
}

fn matrix_at<S: Scalar>(m: &MetricMatrix<S>, k: usize, xs: &[usize], ys: &[usize]) -> Grid<S> {
    Grid::from_fn(k, k, |a, b| m.get(xs[a], ys[b]).clone())
}

pub fn matrix_distribution_exact<S: Scalar>(m: &MetricMatrix<S>, k: usize) -> Result<MatrixDistribution<S>> {
    if k == 0 {
        return Err(Error::InvalidInput("matrix order must be at least 1".into()));
    }
    let n = m.len();
    let tuples = (n as u64).checked_pow(2 * k as u32).filter(|&t| t <= ENUMERATION_LIMIT);
    let Some(tuples) = tuples else {
        return Err(Error::TooLarge(format!("{n}^{} index tuples exceed {ENUMERATION_LIMIT}", 2 * k)));
    };
    let w = m.space().weights();
    let mut idx = vec![0usize; 2 * k];
    let mut items = Vec::with_capacity(tuples as usize);
    for _ in 0..tuples {
        let p = idx.iter().fold(S::one(), |acc, &i| acc * w[i].clone());
        if !p.is_zero_exact() {
            items.push((matrix_at(m, k, &idx[..k], &idx[k..]), p));
        }
        for slot in idx.iter_mut().rev() {
            *slot += 1;
            if *slot < n {
                break;
            }
            *slot = 0;
        }
    }
    Ok(MatrixDistribution::from_weighted(k, items))
}

pub fn matrix_distribution_sample<S: Scalar>(
    m: &MetricMatrix<S>,
    k: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<Grid<S>>> {
    if k == 0 || count == 0 {
        return Err(Error::InvalidInput("matrix order and sample count must be at least 1".into()));
    }
    let weights: Vec<f64> = m.space().weights().iter().map(|w| w.to_f64()).collect();
    let pick = WeightedIndex::new(&weights).map_err(|e| Error::InvalidInput(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count)
        .map(|_| {
            let idx: Vec<usize> = (0..2 * k).map(|_| pick.sample(&mut rng)).collect();
            matrix_at(m, k, &idx[..k], &idx[k..])
        })
        .collect())
}

/// `5 · |support| / sqrt(count)`, the accepted empirical TV deviation.
pub fn sampling_tolerance(support: usize, count: usize) -> f64 {
    5.0 * support as f64 / (count as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DiscreteSpace;
    use crate::scalar::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn two_point(d: i64) -> MetricMatrix<Rational> {
        let space = DiscreteSpace::uniform(2).into_ref();
        MetricMatrix::new(space, Grid::from_rows(vec![vec![q(0, 1), q(d, 1)], vec![q(d, 1), q(0, 1)]]).unwrap())
            .unwrap()
    }

    #[test]
    fn one_atom_is_a_point_mass() {
        let space = DiscreteSpace::<Rational>::uniform(1).into_ref();
        let m = MetricMatrix::new(space, Grid::filled(1, 1, q(0, 1))).unwrap();
        for k in 1..4 {
            let d = matrix_distribution_exact(&m, k).unwrap();
            assert_eq!(d.support, vec![(Grid::filled(k, k, q(0, 1)), q(1, 1))]);
            let s = matrix_distribution_sample(&m, k, 5, 1).unwrap();
            assert!(s.iter().all(|g| g.iter().all(|v| *v == q(0, 1))));
        }
    }

    #[test]
    fn two_atoms_order_one() {
        let m = two_point(3);
        let d = matrix_distribution_exact(&m, 1).unwrap();
        assert_eq!(d.support, vec![(Grid::filled(1, 1, q(0, 1)), q(1, 2)), (Grid::filled(1, 1, q(3, 1)), q(1, 2))]);
        let sample = matrix_distribution_sample(&m, 1, 10_000, 7).unwrap();
        assert_eq!(sample, matrix_distribution_sample(&m, 1, 10_000, 7).unwrap());
        let hits = sample.iter().filter(|g| g[(0, 0)] == q(3, 1)).count() as f64 / 1e4;
        assert!((hits - 0.5).abs() < 0.02, "{hits}");
    }

    #[test]
    fn enumeration_guard() {
        let space = DiscreteSpace::<Rational>::uniform(10).into_ref();
        let m = MetricMatrix::new(space, Grid::from_fn(10, 10, |i, j| q((i as i64 - j as i64).abs(), 1))).unwrap();
        assert!(matrix_distribution_exact(&m, 2).is_ok());
        assert!(matches!(matrix_distribution_exact(&m, 4), Err(Error::TooLarge(_))));
    }

    #[test]
    fn total_variation_basics() {
        let m = two_point(1);
        let d = matrix_distribution_exact(&m, 2).unwrap();
        assert_eq!(d.total_variation(&d), q(0, 1));
        let point = MatrixDistribution { k: 2, support: vec![(Grid::filled(2, 2, q(5, 1)), q(1, 1))] };
        assert_eq!(d.total_variation(&point), q(1, 1));
        let total = d.support.iter().fold(q(0, 1), |a, (_, p)| a + p.clone());
        assert_eq!(total, q(1, 1));
    }
}
