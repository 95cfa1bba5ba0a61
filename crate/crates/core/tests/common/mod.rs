#![allow(dead_code)]

pub mod corpus;

use proptest::prelude::*;
use rand::Rng;
use vcont::{DiscreteSpace, Grid, MetricMatrix, ProductFunction, ProductSet, Rational, Scalar, SpaceRef};

pub fn q(n: i64, d: i64) -> Rational {
    Rational::from_ratio(n, d)
}

pub fn normalized(raw: &[i64]) -> Vec<Rational> {
    let total: i64 = raw.iter().sum();
    raw.iter().map(|&w| q(w, total)).collect()
}

pub fn space_from_raw(raw: &[i64]) -> SpaceRef<Rational> {
    DiscreteSpace::from_weights(normalized(raw)).expect("positive raw weights").into_ref()
}

/// Random space with weights proportional to integers in `1..=9`.
pub fn random_space(rng: &mut impl Rng, n: usize) -> SpaceRef<Rational> {
    let raw: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=9)).collect();
    space_from_raw(&raw)
}

pub fn random_set(rng: &mut impl Rng, x: &SpaceRef<Rational>, y: &SpaceRef<Rational>) -> ProductSet<Rational> {
    let density = rng.gen_range(0.0..1.0);
    ProductSet::from_fn(x.clone(), y.clone(), |_, _| rng.gen_bool(density))
}

/// Values `±p/q · 10^k` with `k` in `-2..=2`; about a fifth are zero.
pub fn random_value(rng: &mut impl Rng) -> Rational {
    if rng.gen_bool(0.2) {
        return q(0, 1);
    }
    let v = q(rng.gen_range(-40..=40), rng.gen_range(1..=8));
    let k = rng.gen_range(-2..=2i32);
    v * Rational::from_i64(10).pow(k)
}

pub fn random_function(
    rng: &mut impl Rng,
    x: &SpaceRef<Rational>,
    y: &SpaceRef<Rational>,
) -> ProductFunction<Rational> {
    ProductFunction::from_fn(x.clone(), y.clone(), |_, _| random_value(rng)).unwrap()
}

/// Shortest-path closure of random edge lengths in `1..=9`.
pub fn closed_metric(space: SpaceRef<Rational>, edges: &[Vec<i64>]) -> MetricMatrix<Rational> {
    let n = space.len();
    let mut d: Vec<Vec<i64>> =
        (0..n).map(|i| (0..n).map(|j| if i == j { 0 } else { edges[i.min(j)][i.max(j)] }).collect()).collect();
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                d[i][j] = d[i][j].min(d[i][k] + d[k][j]);
            }
        }
    }
    MetricMatrix::new(space, Grid::from_fn(n, n, |i, j| Rational::from_i64(d[i][j]))).unwrap()
}

pub fn random_metric(rng: &mut impl Rng, n: usize) -> MetricMatrix<Rational> {
    let edges: Vec<Vec<i64>> = (0..n).map(|_| (0..n).map(|_| rng.gen_range(1..=9)).collect()).collect();
    closed_metric(random_space(rng, n), &edges)
}

/// Probability vector with some zero entries.
pub fn random_measure(rng: &mut impl Rng, n: usize) -> Vec<Rational> {
    let mut raw: Vec<i64> = (0..n).map(|_| if rng.gen_bool(0.3) { 0 } else { rng.gen_range(1..=9) }).collect();
    if raw.iter().all(|&w| w == 0) {
        raw[rng.gen_range(0..n)] = 1;
    }
    normalized(&raw)
}

pub fn space_strategy(max: usize) -> impl Strategy<Value = SpaceRef<Rational>> {
    prop::collection::vec(1i64..=9, 1..=max).prop_map(|raw| space_from_raw(&raw))
}

pub fn pair_strategy(max: usize) -> impl Strategy<Value = (SpaceRef<Rational>, SpaceRef<Rational>)> {
    (space_strategy(max), space_strategy(max))
}

pub fn set_strategy(max: usize) -> impl Strategy<Value = ProductSet<Rational>> {
    pair_strategy(max).prop_flat_map(|(x, y)| {
        let cells = x.len() * y.len();
        prop::collection::vec(any::<bool>(), cells).prop_map(move |bits| {
            let m = y.len();
            ProductSet::from_fn(x.clone(), y.clone(), |i, j| bits[i * m + j])
        })
    })
}

pub fn value_strategy() -> impl Strategy<Value = Rational> {
    prop_oneof![
        1 => Just(q(0, 1)),
        4 => (-40i64..=40, 1i64..=8, -2i32..=2).prop_map(|(p, d, k)| q(p, d) * Rational::from_i64(10).pow(k)),
    ]
}

fn values_on(x: SpaceRef<Rational>, y: SpaceRef<Rational>) -> impl Strategy<Value = ProductFunction<Rational>> {
    let m = y.len();
    prop::collection::vec(value_strategy(), x.len() * m)
        .prop_map(move |v| ProductFunction::from_fn(x.clone(), y.clone(), |i, j| v[i * m + j].clone()).unwrap())
}

pub fn function_strategy(max: usize) -> impl Strategy<Value = ProductFunction<Rational>> {
    pair_strategy(max).prop_flat_map(|(x, y)| values_on(x, y))
}

/// Several functions on one common product space.
pub fn functions_strategy(max: usize, count: usize) -> impl Strategy<Value = Vec<ProductFunction<Rational>>> {
    pair_strategy(max).prop_flat_map(move |(x, y)| prop::collection::vec(values_on(x, y), count))
}

pub fn metric_strategy(max: usize) -> impl Strategy<Value = MetricMatrix<Rational>> {
    (1..=max).prop_flat_map(|n| {
        (prop::collection::vec(1i64..=9, n), prop::collection::vec(prop::collection::vec(1i64..=9, n), n))
            .prop_map(|(raw, edges)| closed_metric(space_from_raw(&raw), &edges))
    })
}

/// A probability vector of length `n` with zeros allowed.
pub fn measure_strategy(n: usize) -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec(0i64..=6, n).prop_map(|mut raw| {
        if raw.iter().all(|&w| w == 0) {
            raw[0] = 1;
        }
        normalized(&raw)
    })
}

/// Splits atom `a` into two halves at distance zero, appended last.
pub fn split_atom(m: &MetricMatrix<Rational>, a: usize, part: Rational) -> MetricMatrix<Rational> {
    let n = m.len();
    let w = m.space().weights();
    let mut weights = w.to_vec();
    weights[a] = w[a].clone() * part.clone();
    weights.push(w[a].clone() * (q(1, 1) - part));
    let src = |i: usize| if i == n { a } else { i };
    let space = DiscreteSpace::from_weights(weights).unwrap().into_ref();
    MetricMatrix::new(space, Grid::from_fn(n + 1, n + 1, |i, j| m.get(src(i), src(j)).clone())).unwrap()
}

/// Reorders atoms so that new atom `t` is old atom `perm[t]`.
pub fn relabel(m: &MetricMatrix<Rational>, perm: &[usize]) -> MetricMatrix<Rational> {
    let w = m.space().weights();
    let space = DiscreteSpace::from_weights(perm.iter().map(|&p| w[p].clone()).collect()).unwrap().into_ref();
    let n = perm.len();
    MetricMatrix::new(space, Grid::from_fn(n, n, |i, j| m.get(perm[i], perm[j]).clone())).unwrap()
}
