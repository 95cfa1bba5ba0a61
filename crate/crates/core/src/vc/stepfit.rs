//! Step-function approximation of `f` with at most `N` blocks per side plus
//! one exceptional class on each side.
//!
//! For a partition `P` the best levels are block midranges, and the fit
//! error is `e(P) = max(max block half-range, μ(A₀), ν(B₀))`. A fit at `ε`
//! exists iff some `P` has `e(P) < ε`, so [`vc_profile`] is `min_P e(P)`.
//!
//! Exact search (both sides with at most [`EXACT_MAX_ATOMS`] atoms) binary
//! searches `e(P) <= t` over the finite set of values `e(P)` can take: 0,
//! half-differences of values of `f`, and subset weights. Each test
//! enumerates maximal exceptional rows and set partitions of the remaining
//! rows, then covers the columns by cliques of a compatibility graph.
//! Larger instances use a seeded local search whose result is an upper bound.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::matrix::Grid;
use crate::model::ProductFunction;
use crate::scalar::Scalar;

/// Largest side handled by exhaustive search.
pub const EXACT_MAX_ATOMS: usize = 8;
/// Restarts of the local search.
pub const HEURISTIC_RESTARTS: u64 = 20;
const HEURISTIC_SEED: u64 = 0x5eed_b10c;

#[derive(Debug, Clone, PartialEq)]
pub struct StepFit<S> {
    /// Class of every X-atom; 0 is the exceptional class `A₀`.
    pub x_blocks: Vec<usize>,
    /// Class of every Y-atom; 0 is `B₀`.
    pub y_blocks: Vec<usize>,
    /// `N × N`; entry `(i − 1, j − 1)` is `c_ij`. Empty blocks hold 0.
    pub levels: Grid<S>,
    /// Strict bound the fit satisfies.
    pub epsilon: S,
    /// Largest `|f − c_ij|` over non-exceptional cells.
    pub deviation: S,
    pub exceptional_x: S,
    pub exceptional_y: S,
    /// Found by exhaustive search rather than the heuristic.
    pub exhaustive: bool,
}

impl<S: Scalar> StepFit<S> {
    pub fn classes(&self) -> usize {
        self.levels.rows()
    }

    /// `e(P)`.
    pub fn error(&self) -> S {
        S::max_of(&self.deviation, &S::max_of(&self.exceptional_x, &self.exceptional_y))
    }

    /// Strict invariants against `f`, recomputed from the raw values.
    pub fn verify(&self, f: &ProductFunction<S>) -> bool {
        let (n, m) = f.shape();
        let k = self.classes();
        if self.x_blocks.len() != n || self.y_blocks.len() != m {
            return false;
        }
        if self.x_blocks.iter().chain(&self.y_blocks).any(|&c| c > k) {
            return false;
        }
        let ex = f.x_space().measure_of(|i| self.x_blocks[i] == 0);
        let ey = f.y_space().measure_of(|j| self.y_blocks[j] == 0);
        if !(ex < self.epsilon && ey < self.epsilon) {
            return false;
        }
        f.values().indexed().all(|((i, j), v)| {
            let (a, b) = (self.x_blocks[i], self.y_blocks[j]);
            a == 0 || b == 0 || (v.clone() - self.levels[(a - 1, b - 1)].clone()).abs() < self.epsilon
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitOutcome<S> {
    pub fit: Option<StepFit<S>>,
    /// `false` when the heuristic ran, so an absent fit is inconclusive.
    pub exhaustive: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VcProfile<S> {
    /// `min_P e(P)` when `exact`, otherwise an upper bound.
    pub value: S,
    pub exact: bool,
    /// A partition attaining `value`, with `epsilon = value`.
    pub witness: StepFit<S>,
}

pub fn is_exact_size<S: Scalar>(f: &ProductFunction<S>) -> bool {
    let (n, m) = f.shape();
    n <= EXACT_MAX_ATOMS && m <= EXACT_MAX_ATOMS
}

/// Midrange levels and `e(P)` components for a labelling.
pub fn evaluate_partition<S: Scalar>(
    f: &ProductFunction<S>,
    classes: usize,
    x_blocks: Vec<usize>,
    y_blocks: Vec<usize>,
    epsilon: S,
    exhaustive: bool,
) -> StepFit<S> {
    let mut lo: Grid<Option<S>> = Grid::filled(classes, classes, None);
    let mut hi: Grid<Option<S>> = Grid::filled(classes, classes, None);
    for ((i, j), v) in f.values().indexed() {
        let (a, b) = (x_blocks[i], y_blocks[j]);
        if a == 0 || b == 0 {
            continue;
        }
        let cell = (a - 1, b - 1);
        if lo[cell].as_ref().is_none_or(|l| v < l) {
            lo[cell] = Some(v.clone());
        }
        if hi[cell].as_ref().is_none_or(|h| v > h) {
            hi[cell] = Some(v.clone());
        }
    }
    let mut deviation = S::zero();
    let levels = Grid::from_fn(classes, classes, |a, b| match (&lo[(a, b)], &hi[(a, b)]) {
        (Some(l), Some(h)) => {
            deviation = S::max_of(&deviation, &((h.clone() - l.clone()) * S::half()));
            (l.clone() + h.clone()) * S::half()
        }
        _ => S::zero(),
    });
    StepFit {
        exceptional_x: f.x_space().measure_of(|i| x_blocks[i] == 0),
        exceptional_y: f.y_space().measure_of(|j| y_blocks[j] == 0),
        x_blocks,
        y_blocks,
        levels,
        epsilon,
        deviation,
        exhaustive,
    }
}

fn subset_weights<S: Scalar>(w: &[S]) -> Vec<S> {
    let mut out = vec![S::zero(); 1 << w.len()];
    for mask in 1usize..out.len() {
        let low = mask.trailing_zeros() as usize;
        out[mask] = out[mask & (mask - 1)].clone() + w[low].clone();
    }
    out
}

/// Visits every labelling of `r` items by exactly `k` classes in
/// restricted-growth order; stops when `visit` returns true.
fn for_each_partition(r: usize, k: usize, visit: &mut dyn FnMut(&[usize]) -> bool) -> bool {
    fn rec(
        pos: usize,
        used: usize,
        k: usize,
        labels: &mut Vec<usize>,
        visit: &mut dyn FnMut(&[usize]) -> bool,
    ) -> bool {
        let r = labels.len();
        if pos == r {
            return used == k && visit(labels);
        }
        if k - used > r - pos {
            return false;
        }
        for c in 0..used {
            labels[pos] = c;
            if rec(pos + 1, used, k, labels, visit) {
                return true;
            }
        }
        if used < k {
            labels[pos] = used;
            if rec(pos + 1, used + 1, k, labels, visit) {
                return true;
            }
        }
        false
    }
    let mut labels = vec![0; r];
    rec(0, 0, k, &mut labels, visit)
}

struct ExactSearch<'a, S> {
    f: &'a ProductFunction<S>,
    classes: usize,
    n: usize,
    m: usize,
    /// Rank of every cell value among the sorted distinct values.
    rank: Vec<u16>,
    values: Vec<S>,
    wx: Vec<S>,
    wy: Vec<S>,
}

impl<'a, S: Scalar> ExactSearch<'a, S> {
    fn new(f: &'a ProductFunction<S>, classes: usize) -> Self {
        let (n, m) = f.shape();
        let mut values: Vec<S> = f.values().iter().cloned().collect();
        values.sort_by(|a, b| a.total_cmp(b));
        values.dedup();
        let rank = f
            .values()
            .iter()
            .map(|v| values.binary_search_by(|p| p.total_cmp(v)).expect("value is present") as u16)
            .collect();
        ExactSearch {
            f,
            classes,
            n,
            m,
            rank,
            values,
            wx: subset_weights(f.x_space().weights()),
            wy: subset_weights(f.y_space().weights()),
        }
    }

    /// Every value `e(P)` can take, ascending.
    fn candidates(&self) -> Vec<S> {
        let mut c = vec![S::zero()];
        for (a, va) in self.values.iter().enumerate() {
            for vb in &self.values[a + 1..] {
                c.push((vb.clone() - va.clone()) * S::half());
            }
        }
        c.extend(self.wx.iter().cloned());
        c.extend(self.wy.iter().cloned());
        c.sort_by(|a, b| a.total_cmp(b));
        c.dedup();
        c
    }

    /// A labelling with `e(P) <= t`, if any.
    fn feasible(&self, t: &S) -> Option<(Vec<usize>, Vec<usize>)> {
        let two_t = t.clone() + t.clone();
        // reach[a]: largest rank b with values[b] − values[a] <= 2t.
        let mut reach = vec![0u16; self.values.len()];
        let mut b = 0;
        for (a, r) in reach.iter_mut().enumerate() {
            b = b.max(a);
            while b + 1 < self.values.len() && self.values[b + 1].clone() - self.values[a].clone() <= two_t {
                b += 1;
            }
            *r = b as u16;
        }
        let full_x = (1usize << self.n) - 1;
        let fits = |mask: usize| self.wx[mask] <= *t;
        for a0 in 0..=full_x {
            if !fits(a0) || (0..self.n).any(|i| a0 & (1 << i) == 0 && fits(a0 | (1 << i))) {
                continue;
            }
            let rest: Vec<usize> = (0..self.n).filter(|i| a0 & (1 << i) == 0).collect();
            let k = self.classes.min(rest.len());
            let mut found = None;
            if rest.is_empty() {
                found = Some((vec![0; self.n], vec![1; self.m]));
            } else {
                for_each_partition(rest.len(), k, &mut |labels| {
                    if let Some(y) = self.cover_columns(&rest, labels, k, &reach, t) {
                        let mut x = vec![0; self.n];
                        for (idx, &row) in rest.iter().enumerate() {
                            x[row] = labels[idx] + 1;
                        }
                        found = Some((x, y));
                        return true;
                    }
                    false
                });
            }
            if found.is_some() {
                return found;
            }
        }
        None
    }

    /// Column labelling compatible with the given row classes.
    fn cover_columns(&self, rest: &[usize], labels: &[usize], k: usize, reach: &[u16], t: &S) -> Option<Vec<usize>> {
        let m = self.m;
        let mut lo = vec![u16::MAX; k * m];
        let mut hi = vec![0u16; k * m];
        for (idx, &row) in rest.iter().enumerate() {
            let c = labels[idx];
            for y in 0..m {
                let r = self.rank[row * m + y];
                lo[c * m + y] = lo[c * m + y].min(r);
                hi[c * m + y] = hi[c * m + y].max(r);
            }
        }
        let close = |a: u16, b: u16| b <= reach[a as usize];
        let mut good = 0usize;
        for y in 0..m {
            if (0..k).all(|c| close(lo[c * m + y], hi[c * m + y])) {
                good |= 1 << y;
            }
        }
        let full_y = (1usize << m) - 1;
        let bad = full_y & !good;
        if self.wy[bad] > *t {
            return None;
        }
        let mut adj = vec![0usize; m];
        for y in 0..m {
            if good & (1 << y) == 0 {
                continue;
            }
            for z in y + 1..m {
                if good & (1 << z) == 0 {
                    continue;
                }
                let ok = (0..k).all(|c| {
                    let (a, b) = (c * m + y, c * m + z);
                    close(lo[a].min(lo[b]), hi[a].max(hi[b]))
                });
                if ok {
                    adj[y] |= 1 << z;
                    adj[z] |= 1 << y;
                }
            }
        }
        let size = 1usize << m;
        let mut clique = vec![false; size];
        clique[0] = true;
        for s in 1..size {
            if s & !good != 0 {
                continue;
            }
            let low = s.trailing_zeros() as usize;
            let rest = s & (s - 1);
            clique[s] = clique[rest] && rest & !adj[low] == 0;
        }
        let cap = self.classes + 1;
        let mut cover = vec![cap; size];
        let mut choice = vec![0usize; size];
        cover[0] = 0;
        for s in 1..size {
            if s & !good != 0 {
                continue;
            }
            let low = s & s.wrapping_neg();
            let others = s ^ low;
            let mut sub = others;
            loop {
                let c = sub | low;
                if clique[c] && cover[s ^ c] + 1 < cover[s] {
                    cover[s] = cover[s ^ c] + 1;
                    choice[s] = c;
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & others;
            }
        }
        let mut kept = good;
        loop {
            if kept & !good == 0 && cover[kept] <= self.classes && self.wy[full_y & !kept] <= *t {
                let mut y = vec![0; m];
                let mut s = kept;
                let mut class = 1;
                while s != 0 {
                    let c = choice[s];
                    for (j, slot) in y.iter_mut().enumerate() {
                        if c & (1 << j) != 0 {
                            *slot = class;
                        }
                    }
                    class += 1;
                    s ^= c;
                }
                return Some(y);
            }
            if kept == 0 {
                return None;
            }
            kept = (kept - 1) & good;
        }
    }

    fn profile(&self) -> VcProfile<S> {
        let candidates = self.candidates();
        // The full exceptional pair has e(P) <= 1, so some candidate is feasible.
        let (mut lo, mut hi) = (0usize, candidates.len() - 1);
        let mut best = self.feasible(&candidates[hi]).expect("the largest candidate is always feasible");
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.feasible(&candidates[mid]) {
                Some(p) => {
                    best = p;
                    hi = mid;
                }
                None => lo = mid + 1,
            }
        }
        let witness = evaluate_partition(self.f, self.classes, best.0, best.1, S::zero(), true);
        let value = witness.error();
        VcProfile { witness: StepFit { epsilon: value.clone(), ..witness }, value, exact: true }
    }

    /// Largest candidate strictly below `eps`; feasibility there decides `e(P) < eps`.
    fn fit_below(&self, eps: &S) -> Option<StepFit<S>> {
        let candidates = self.candidates();
        let t = candidates.iter().rev().find(|c| *c < eps)?;
        let (x, y) = self.feasible(t)?;
        Some(evaluate_partition(self.f, self.classes, x, y, eps.clone(), true))
    }
}

/// A fit with `e(P) < eps` and at most `classes` blocks per side.
pub fn step_fit_exists<S: Scalar>(f: &ProductFunction<S>, classes: usize, eps: &S) -> FitOutcome<S> {
    assert!(classes >= 1, "at least one block per side");
    if is_exact_size(f) {
        return FitOutcome { fit: ExactSearch::new(f, classes).fit_below(eps), exhaustive: true };
    }
    let best = heuristic_partition(f, classes);
    let fit = evaluate_partition(f, classes, best.0, best.1, eps.clone(), false);
    FitOutcome { fit: (fit.error() < *eps).then_some(fit), exhaustive: false }
}

/// `min_P e(P)`: exact on small instances, a heuristic upper bound otherwise.
pub fn vc_profile<S: Scalar>(f: &ProductFunction<S>, classes: usize) -> VcProfile<S> {
    assert!(classes >= 1, "at least one block per side");
    if is_exact_size(f) {
        return ExactSearch::new(f, classes).profile();
    }
    let (x, y) = heuristic_partition(f, classes);
    let witness = evaluate_partition(f, classes, x, y, S::zero(), false);
    let value = witness.error();
    VcProfile { witness: StepFit { epsilon: value.clone(), ..witness }, value, exact: false }
}

/// Float image of the instance used to steer the local search.
struct Approx {
    n: usize,
    m: usize,
    classes: usize,
    v: Vec<f64>,
    wx: Vec<f64>,
    wy: Vec<f64>,
}

#[derive(Clone, PartialEq)]
struct Labels {
    x: Vec<usize>,
    y: Vec<usize>,
}

impl Approx {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.v[i * self.m + j]
    }

    /// `(e(P), Σ block ranges)`, compared lexicographically.
    fn score(&self, p: &Labels) -> (f64, f64) {
        let k = self.classes;
        let mut lo = vec![f64::INFINITY; k * k];
        let mut hi = vec![f64::NEG_INFINITY; k * k];
        for i in 0..self.n {
            let a = p.x[i];
            if a == 0 {
                continue;
            }
            for j in 0..self.m {
                let b = p.y[j];
                if b == 0 {
                    continue;
                }
                let c = (a - 1) * k + (b - 1);
                let v = self.at(i, j);
                lo[c] = lo[c].min(v);
                hi[c] = hi[c].max(v);
            }
        }
        let mut worst = 0.0f64;
        let mut total = 0.0;
        for c in 0..k * k {
            if hi[c] >= lo[c] {
                worst = worst.max((hi[c] - lo[c]) / 2.0);
                total += hi[c] - lo[c];
            }
        }
        let ex: f64 = (0..self.n).filter(|&i| p.x[i] == 0).map(|i| self.wx[i]).sum();
        let ey: f64 = (0..self.m).filter(|&j| p.y[j] == 0).map(|j| self.wy[j]).sum();
        (worst.max(ex).max(ey), total + ex + ey)
    }

    /// Clusters one side given the classes of the other: farthest-point
    /// centres under the joined sup-range, then nearest-centre assignment.
    fn cluster(&self, rows: bool, other: &[usize], start: usize) -> Vec<usize> {
        let k = self.classes;
        let (len, olen) = if rows { (self.n, self.m) } else { (self.m, self.n) };
        let val = |a: usize, b: usize| if rows { self.at(a, b) } else { self.at(b, a) };
        // Per item and class of the other side: (min, max).
        let sig: Vec<Vec<(f64, f64)>> = (0..len)
            .map(|a| {
                let mut s = vec![(f64::INFINITY, f64::NEG_INFINITY); k + 1];
                for (b, &c) in other[..olen].iter().enumerate() {
                    let v = val(a, b);
                    s[c] = (s[c].0.min(v), s[c].1.max(v));
                }
                s
            })
            .collect();
        let dist = |a: usize, b: usize| {
            (1..=k)
                .filter(|&c| sig[a][c].1 >= sig[a][c].0)
                .map(|c| sig[a][c].1.max(sig[b][c].1) - sig[a][c].0.min(sig[b][c].0))
                .fold(0.0, f64::max)
        };
        let mut centres = vec![start % len];
        while centres.len() < k.min(len) {
            let far = (0..len)
                .map(|a| (a, centres.iter().map(|&c| dist(a, c)).fold(f64::INFINITY, f64::min)))
                .fold((0, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
            if far.1 <= 0.0 {
                break;
            }
            centres.push(far.0);
        }
        (0..len)
            .map(|a| {
                let mut best = (0, f64::INFINITY);
                for (idx, &c) in centres.iter().enumerate() {
                    let d = dist(a, c);
                    if d < best.1 {
                        best = (idx, d);
                    }
                }
                best.0 + 1
            })
            .collect()
    }

    /// Single-atom moves (including into the exceptional class) that lower the score.
    fn local_search(&self, p: &mut Labels) {
        let mut current = self.score(p);
        for _ in 0..50 {
            let mut improved = false;
            for side in 0..2 {
                let len = if side == 0 { self.n } else { self.m };
                for a in 0..len {
                    let orig = if side == 0 { p.x[a] } else { p.y[a] };
                    let mut best = (orig, current);
                    for target in 0..=self.classes {
                        if target == orig {
                            continue;
                        }
                        if side == 0 {
                            p.x[a] = target
                        } else {
                            p.y[a] = target
                        }
                        let s = self.score(p);
                        if s.0 < best.1 .0 - 1e-15 || (s.0 <= best.1 .0 + 1e-15 && s.1 < best.1 .1 - 1e-15) {
                            best = (target, s);
                        }
                    }
                    if side == 0 {
                        p.x[a] = best.0
                    } else {
                        p.y[a] = best.0
                    }
                    if best.0 != orig {
                        current = best.1;
                        improved = true;
                    }
                }
            }
            if !improved {
                break;
            }
        }
    }
}

fn quantile_labels(keys: &[f64], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by(|&a, &b| keys[a].total_cmp(&keys[b]).then(a.cmp(&b)));
    let mut labels = vec![0; keys.len()];
    for (pos, &a) in order.iter().enumerate() {
        labels[a] = 1 + pos * k / keys.len();
    }
    labels
}

/// Nearest-neighbour chain under the sup distance between rows (or
/// columns), started from an extreme item; a 1-D ordering of the side.
fn chain_order(ap: &Approx, rows: bool) -> Vec<usize> {
    let (len, olen) = if rows { (ap.n, ap.m) } else { (ap.m, ap.n) };
    let val = |a: usize, b: usize| if rows { ap.at(a, b) } else { ap.at(b, a) };
    let dist = |a: usize, b: usize| (0..olen).map(|c| (val(a, c) - val(b, c)).abs()).fold(0.0, f64::max);
    let farthest = |from: usize, pool: &[bool], pick_far: bool| {
        (0..len).filter(|&a| pool[a]).fold(None, |best: Option<(usize, f64)>, a| {
            let d = dist(from, a);
            match best {
                Some((_, bd)) if (pick_far && d <= bd) || (!pick_far && d >= bd) => best,
                _ => Some((a, d)),
            }
        })
    };
    let mut open = vec![true; len];
    let start = farthest(0, &open, true).map_or(0, |(a, _)| a);
    let mut order = vec![start];
    open[start] = false;
    while order.len() < len {
        let last = *order.last().expect("nonempty");
        let (next, _) = farthest(last, &open, false).expect("items remain");
        open[next] = false;
        order.push(next);
    }
    order
}

struct Greedy<'a> {
    ap: &'a Approx,
    row_order: Vec<usize>,
    col_order: Vec<usize>,
}

impl Greedy<'_> {
    /// First-fit clustering of one side at threshold `t` given the other
    /// side's labels (`other_classes` of them). Items whose own range
    /// exceeds `2t` go to class 0; surplus lightest clusters follow while
    /// the exceptional weight stays within `t`. Returns labels and the
    /// number of clusters.
    fn side(&self, rows: bool, other: &[usize], other_classes: usize, t: f64) -> (Vec<usize>, usize, f64) {
        let ap = self.ap;
        let (len, olen, order, w) =
            if rows { (ap.n, ap.m, &self.row_order, &ap.wx) } else { (ap.m, ap.n, &self.col_order, &ap.wy) };
        let val = |a: usize, b: usize| if rows { ap.at(a, b) } else { ap.at(b, a) };
        let width = other_classes + 1;
        let empty = (f64::INFINITY, f64::NEG_INFINITY);
        let mut clusters: Vec<Vec<(f64, f64)>> = Vec::new();
        let mut weight: Vec<f64> = Vec::new();
        let mut labels = vec![0usize; len];
        let mut exceptional = 0.0;
        for &a in order {
            let mut sig = vec![empty; width];
            for (b, &c) in other[..olen].iter().enumerate() {
                let v = val(a, b);
                sig[c] = (sig[c].0.min(v), sig[c].1.max(v));
            }
            if (1..width).any(|c| sig[c].1 - sig[c].0 > 2.0 * t) {
                exceptional += w[a];
                continue;
            }
            let fits = |cl: &Vec<(f64, f64)>| {
                (1..width).all(|c| sig[c].1 < sig[c].0 || cl[c].1.max(sig[c].1) - cl[c].0.min(sig[c].0) <= 2.0 * t)
            };
            let target = clusters.iter().position(fits).unwrap_or_else(|| {
                clusters.push(vec![empty; width]);
                weight.push(0.0);
                clusters.len() - 1
            });
            for c in 1..width {
                let cl = &mut clusters[target][c];
                *cl = (cl.0.min(sig[c].0), cl.1.max(sig[c].1));
            }
            weight[target] += w[a];
            labels[a] = target + 1;
        }
        let mut count = clusters.len();
        if count > ap.classes {
            let mut by_weight: Vec<usize> = (0..count).collect();
            by_weight.sort_by(|&a, &b| weight[a].total_cmp(&weight[b]).then(a.cmp(&b)));
            let drop: Vec<usize> = by_weight[..count - ap.classes].to_vec();
            let extra: f64 = drop.iter().map(|&c| weight[c]).sum();
            if exceptional + extra <= t + 1e-12 {
                exceptional += extra;
                let mut renumber = vec![0usize; count + 1];
                let mut next = 1;
                for c in 0..count {
                    if !drop.contains(&c) {
                        renumber[c + 1] = next;
                        next += 1;
                    }
                }
                for l in labels.iter_mut() {
                    *l = renumber[*l];
                }
                count = ap.classes;
            }
        }
        (labels, count, exceptional)
    }

    /// Alternates row and column clustering at threshold `t` from several
    /// starting column labellings.
    fn at_threshold(&self, t: f64) -> Option<Labels> {
        let ap = self.ap;
        let mut pos = vec![0.0; ap.m];
        for (p, &j) in self.col_order.iter().enumerate() {
            pos[j] = p as f64;
        }
        let starts = [
            ((1..=ap.m).collect::<Vec<_>>(), ap.m),
            (quantile_labels(&pos, ap.classes.min(ap.m)), ap.classes.min(ap.m)),
            (quantile_labels(&pos, (2 * ap.classes).min(ap.m)), (2 * ap.classes).min(ap.m)),
        ];
        starts.into_iter().find_map(|(y, ky)| self.alternate(t, y, ky))
    }

    fn alternate(&self, t: f64, mut y: Vec<usize>, mut ky: usize) -> Option<Labels> {
        let ap = self.ap;
        for _ in 0..8 {
            let (x, kx, ex) = self.side(true, &y, ky, t);
            let (ny, nky, ey) = self.side(false, &x, kx, t);
            if kx <= ap.classes && nky <= ap.classes && ex <= t + 1e-12 && ey <= t + 1e-12 {
                return Some(Labels { x, y: ny });
            }
            if (ny.clone(), nky) == (y.clone(), ky) {
                return None;
            }
            y = ny;
            ky = nky;
        }
        None
    }
}

fn heuristic_partition<S: Scalar>(f: &ProductFunction<S>, classes: usize) -> (Vec<usize>, Vec<usize>) {
    let (n, m) = f.shape();
    let ap = Approx {
        n,
        m,
        classes,
        v: f.values().iter().map(|v| v.to_f64()).collect(),
        wx: f.x_space().weights().iter().map(|w| w.to_f64()).collect(),
        wy: f.y_space().weights().iter().map(|w| w.to_f64()).collect(),
    };
    let row_means: Vec<f64> = (0..n).map(|i| (0..m).map(|j| ap.at(i, j)).sum::<f64>()).collect();
    let col_means: Vec<f64> = (0..m).map(|j| (0..n).map(|i| ap.at(i, j)).sum::<f64>()).collect();

    let mut best: Option<(Labels, (f64, f64))> = None;
    let mut consider = |p: Labels| {
        let s = ap.score(&p);
        if best.as_ref().is_none_or(|(_, b)| s < *b) {
            best = Some((p, s));
        }
    };

    // Threshold search: smallest half-gap at which greedy clustering succeeds.
    let greedy = Greedy { ap: &ap, row_order: chain_order(&ap, true), col_order: chain_order(&ap, false) };
    let position = |order: &[usize]| {
        let mut pos = vec![0.0; order.len()];
        for (p, &a) in order.iter().enumerate() {
            pos[a] = p as f64;
        }
        pos
    };
    let (row_pos, col_pos) = (position(&greedy.row_order), position(&greedy.col_order));
    let mut values = ap.v.clone();
    values.sort_by(f64::total_cmp);
    values.dedup();
    let mut thresholds: Vec<f64> = vec![0.0];
    for (a, va) in values.iter().enumerate() {
        thresholds.extend(values[a + 1..].iter().map(|vb| (vb - va) / 2.0));
    }
    thresholds.sort_by(f64::total_cmp);
    thresholds.dedup();
    let (mut lo, mut hi) = (0usize, thresholds.len() - 1);
    let mut found = greedy.at_threshold(thresholds[hi]);
    while lo < hi {
        let mid = (lo + hi) / 2;
        match greedy.at_threshold(thresholds[mid]) {
            Some(p) => {
                found = Some(p);
                hi = mid;
            }
            None => lo = mid + 1,
        }
    }
    if let Some(mut p) = found {
        ap.local_search(&mut p);
        consider(p);
    }

    for restart in 0..HEURISTIC_RESTARTS {
        let mut rng = ChaCha8Rng::seed_from_u64(HEURISTIC_SEED.wrapping_add(restart));
        let mut p = match restart {
            0 => Labels { x: quantile_labels(&row_pos, classes), y: quantile_labels(&col_pos, classes) },
            1 => Labels { x: quantile_labels(&row_means, classes), y: quantile_labels(&col_means, classes) },
            _ => Labels {
                x: (0..n).map(|_| rng.gen_range(1..=classes)).collect(),
                y: (0..m).map(|_| rng.gen_range(1..=classes)).collect(),
            },
        };
        for _ in 0..10 {
            let before = p.clone();
            p.x = ap.cluster(true, &p.y, rng.gen_range(0..n));
            p.y = ap.cluster(false, &p.x, rng.gen_range(0..m));
            if p == before {
                break;
            }
        }
        ap.local_search(&mut p);
        consider(p);
    }
    let (p, _) = best.expect("at least one restart");
    (p.x, p.y)
}

/// Fit error of an explicit labelling, exact in `S`.
pub fn partition_error<S: Scalar>(f: &ProductFunction<S>, classes: usize, x: &[usize], y: &[usize]) -> S {
    evaluate_partition(f, classes, x.to_vec(), y.to_vec(), S::zero(), true).error()
}
