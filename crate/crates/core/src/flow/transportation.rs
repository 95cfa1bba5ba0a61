//! Transportation problems on a complete bipartite graph, solved by
//! successive shortest paths with node potentials.
//!
//! Two modes share the solver:
//!
//! * [`TransportMode::MinCost`]: minimize `Σ c_ij x_ij` with row sums equal to
//!   the supplies and column sums equal to the demands. Dual: maximize
//!   `Σ s_i u_i + Σ d_j v_j` subject to `u_i + v_j <= c_ij`.
//! * [`TransportMode::MaxProfit`]: maximize `Σ p_ij x_ij` with row sums at
//!   most the supplies and column sums at most the demands. Dual: minimize
//!   `Σ s_i a_i + Σ d_j b_j` over `a, b >= 0` with `a_i + b_j >= p_ij`.
//!
//! Dual potentials are read off a Bellman–Ford pass over the final residual
//! graph, which has no negative cycle at optimality.

use crate::error::{Error, Result};
use crate::matrix::Grid;
use crate::scalar::{sum, Scalar, Tol};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransportMode {
    MaxProfit,
    MinCost,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransportationInstance<S> {
    supplies: Vec<S>,
    demands: Vec<S>,
    weights: Grid<S>,
    mode: TransportMode,
}

impl<S: Scalar> TransportationInstance<S> {
    /// `weights` holds profits in max-profit mode and costs in min-cost mode.
    pub fn new(supplies: Vec<S>, demands: Vec<S>, weights: Grid<S>, mode: TransportMode, tol: Tol) -> Result<Self> {
        if weights.shape() != (supplies.len(), demands.len()) {
            return Err(Error::dims(format!(
                "weight matrix is {}x{}, expected {}x{}",
                weights.rows(),
                weights.cols(),
                supplies.len(),
                demands.len()
            )));
        }
        for (side, v) in [("supply", &supplies), ("demand", &demands)] {
            if let Some(k) = v.iter().position(|e| !e.is_finite() || *e < S::zero()) {
                return Err(Error::InvalidInput(format!("{side} {k} is negative or non-finite")));
            }
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidInput("non-finite weight".into()));
        }
        if mode == TransportMode::MinCost {
            let (ts, td) = (sum(supplies.iter().cloned()), sum(demands.iter().cloned()));
            if !ts.eq_tol(&td, tol) {
                return Err(Error::UnbalancedMarginals);
            }
        }
        Ok(TransportationInstance { supplies, demands, weights, mode })
    }

    pub fn supplies(&self) -> &[S] {
        &self.supplies
    }

    pub fn demands(&self) -> &[S] {
        &self.demands
    }

    pub fn weights(&self) -> &Grid<S> {
        &self.weights
    }

    pub fn mode(&self) -> TransportMode {
        self.mode
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransportSolution<S> {
    /// Optimal primal value `Σ w_ij x_ij`.
    pub value: S,
    pub plan: Grid<S>,
    /// `u` (min-cost, normalized to `u_0 = 0`) or `a` (max-profit).
    pub source_potentials: Vec<S>,
    /// `v` (min-cost) or `b` (max-profit).
    pub sink_potentials: Vec<S>,
}

impl<S: Scalar> TransportSolution<S> {
    /// `Σ s_i u_i + Σ d_j v_j`.
    pub fn dual_value(&self, inst: &TransportationInstance<S>) -> S {
        let a = sum(self.source_potentials.iter().zip(&inst.supplies).map(|(p, s)| p.clone() * s.clone()));
        let b = sum(self.sink_potentials.iter().zip(&inst.demands).map(|(p, d)| p.clone() * d.clone()));
        a + b
    }
}

#[derive(Debug, Clone)]
struct Edge<S> {
    from: usize,
    to: usize,
    /// `None` is infinite capacity.
    cap: Option<S>,
    cost: S,
    flow: S,
}

/// Residual network with paired edges `2k` (forward) and `2k + 1` (reverse).
struct FlowGraph<S> {
    nodes: usize,
    edges: Vec<Edge<S>>,
    out: Vec<Vec<usize>>,
    tol: Tol,
}

impl<S: Scalar> FlowGraph<S> {
    fn new(nodes: usize, tol: Tol) -> Self {
        FlowGraph { nodes, edges: Vec::new(), out: vec![Vec::new(); nodes], tol }
    }

    fn add_edge(&mut self, from: usize, to: usize, cap: Option<S>, cost: S) -> usize {
        let id = self.edges.len();
        self.edges.push(Edge { from, to, cap, cost: cost.clone(), flow: S::zero() });
        self.edges.push(Edge { from: to, to: from, cap: Some(S::zero()), cost: -cost, flow: S::zero() });
        self.out[from].push(id);
        self.out[to].push(id + 1);
        id
    }

    fn residual(&self, e: usize) -> Option<S> {
        let edge = &self.edges[e];
        edge.cap.as_ref().map(|c| c.clone() - edge.flow.clone())
    }

    fn has_residual(&self, e: usize) -> bool {
        match self.residual(e) {
            None => true,
            Some(r) => r.is_pos(self.tol),
        }
    }

    fn push(&mut self, e: usize, delta: &S) {
        self.edges[e].flow = self.edges[e].flow.clone() + delta.clone();
        self.edges[e ^ 1].flow = self.edges[e ^ 1].flow.clone() - delta.clone();
    }

    /// Dijkstra on reduced costs. Returns reduced distances and the
    /// incoming edge of every reached node. Ties go to the lowest node index.
    fn dijkstra(&self, source: usize, potential: &[S]) -> (Vec<Option<S>>, Vec<Option<usize>>) {
        let n = self.nodes;
        let mut dist: Vec<Option<S>> = vec![None; n];
        let mut parent = vec![None; n];
        let mut done = vec![false; n];
        dist[source] = Some(S::zero());
        loop {
            let mut best: Option<usize> = None;
            for v in 0..n {
                if done[v] {
                    continue;
                }
                if let Some(d) = &dist[v] {
                    let better = match best {
                        None => true,
                        Some(b) => *d < *dist[b].as_ref().unwrap(),
                    };
                    if better {
                        best = Some(v);
                    }
                }
            }
            let Some(u) = best else { break };
            done[u] = true;
            let du = dist[u].clone().unwrap();
            for &e in &self.out[u] {
                if !self.has_residual(e) {
                    continue;
                }
                let edge = &self.edges[e];
                let v = edge.to;
                if done[v] {
                    continue;
                }
                let mut reduced = edge.cost.clone() + potential[u].clone() - potential[v].clone();
                if !S::is_exact() && reduced < S::zero() {
                    reduced = S::zero();
                }
                let cand = du.clone() + reduced;
                let improves = match &dist[v] {
                    None => true,
                    Some(dv) => cand < *dv,
                };
                if improves {
                    dist[v] = Some(cand);
                    parent[v] = Some(e);
                }
            }
        }
        (dist, parent)
    }

    /// Shortest distances from a virtual source joined to every node at
    /// cost zero, over edges with positive residual capacity.
    fn bellman_ford(&self) -> Vec<S> {
        let mut d = vec![S::zero(); self.nodes];
        for _ in 0..=self.nodes {
            let mut changed = false;
            for e in 0..self.edges.len() {
                if !self.has_residual(e) {
                    continue;
                }
                let edge = &self.edges[e];
                let cand = d[edge.from].clone() + edge.cost.clone();
                if cand.lt_tol(&d[edge.to], self.tol) {
                    d[edge.to] = cand;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        d
    }
}

/// Solves a transportation instance, returning the optimal plan and dual
/// potentials satisfying complementary slackness.
pub fn solve_transportation<S: Scalar>(inst: &TransportationInstance<S>, tol: Tol) -> Result<TransportSolution<S>> {
    let (n, m) = inst.weights.shape();
    let source = 0;
    let row = |i: usize| 1 + i;
    let col = |j: usize| 1 + n + j;
    let sink = 1 + n + m;
    let mut g = FlowGraph::new(n + m + 2, tol);

    let sign = match inst.mode {
        TransportMode::MinCost => S::one(),
        TransportMode::MaxProfit => -S::one(),
    };
    let cost = |i: usize, j: usize| sign.clone() * inst.weights[(i, j)].clone();

    let mut middle = Grid::filled(n, m, 0usize);
    for i in 0..n {
        g.add_edge(source, row(i), Some(inst.supplies[i].clone()), S::zero());
    }
    for i in 0..n {
        for j in 0..m {
            middle[(i, j)] = g.add_edge(row(i), col(j), None, cost(i, j));
        }
    }
    for j in 0..m {
        g.add_edge(col(j), sink, Some(inst.demands[j].clone()), S::zero());
    }

    // Initial potentials make every forward reduced cost nonnegative.
    let mut potential = vec![S::zero(); g.nodes];
    for j in 0..m {
        potential[col(j)] = (0..n).map(|i| cost(i, j)).reduce(|a, b| S::min_of(&a, &b)).unwrap_or_else(S::zero);
    }
    potential[sink] =
        (0..m).map(|j| potential[col(j)].clone()).reduce(|a, b| S::min_of(&a, &b)).unwrap_or_else(S::zero);

    let total_supply = sum(inst.supplies.iter().cloned());
    let mut shipped = S::zero();
    loop {
        if inst.mode == TransportMode::MinCost && !shipped.lt_tol(&total_supply, tol) {
            break;
        }
        let (dist, parent) = g.dijkstra(source, &potential);
        if dist[sink].is_none() {
            if inst.mode == TransportMode::MinCost {
                return Err(Error::Infeasible);
            }
            break;
        }
        let mut path = Vec::new();
        let mut v = sink;
        while v != source {
            let e = parent[v].expect("reached node has a parent");
            path.push(e);
            v = g.edges[e].from;
        }
        let path_cost = sum(path.iter().map(|&e| g.edges[e].cost.clone()));
        if inst.mode == TransportMode::MaxProfit && !path_cost.lt_tol(&S::zero(), tol) {
            break;
        }
        let delta = path
            .iter()
            .filter_map(|&e| g.residual(e))
            .reduce(|a, b| S::min_of(&a, &b))
            .expect("path starts at a finite source edge");
        for &e in &path {
            g.push(e, &delta);
        }
        shipped = shipped + delta;

        let reach_max = dist.iter().flatten().cloned().reduce(|a, b| S::max_of(&a, &b)).unwrap_or_else(S::zero);
        for (p, d) in potential.iter_mut().zip(&dist) {
            *p = p.clone() + d.clone().unwrap_or_else(|| reach_max.clone());
        }
    }

    let plan = Grid::from_fn(n, m, |i, j| g.edges[middle[(i, j)]].flow.clone());
    let value = sum(plan.indexed().map(|((i, j), x)| x.clone() * inst.weights[(i, j)].clone()));

    if inst.mode == TransportMode::MaxProfit {
        // Closing arc of the circulation: the shipped amount may be pushed back.
        let id = g.add_edge(sink, source, None, S::zero());
        g.push(id, &shipped);
    }
    let d = g.bellman_ford();
    let (source_potentials, sink_potentials) = match inst.mode {
        TransportMode::MinCost => {
            let shift = -d[row(0)].clone();
            let u = (0..n).map(|i| -d[row(i)].clone() - shift.clone()).collect();
            let v = (0..m).map(|j| d[col(j)].clone() + shift.clone()).collect();
            (u, v)
        }
        TransportMode::MaxProfit => {
            let zero = S::zero();
            let a = (0..n).map(|i| S::max_of(&zero, &(d[row(i)].clone() - d[source].clone()))).collect();
            let b = (0..m).map(|j| S::max_of(&zero, &(d[sink].clone() - d[col(j)].clone()))).collect();
            (a, b)
        }
    };
    Ok(TransportSolution { value, plan, source_potentials, sink_potentials })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn grid(rows: Vec<Vec<i64>>) -> Grid<Rational> {
        Grid::from_rows(rows.into_iter().map(|r| r.into_iter().map(Rational::from_i64).collect()).collect()).unwrap()
    }

    fn check_min_cost(inst: &TransportationInstance<Rational>, sol: &TransportSolution<Rational>) {
        let w = inst.weights();
        for ((i, j), c) in w.indexed() {
            let s = sol.source_potentials[i].clone() + sol.sink_potentials[j].clone();
            assert!(s <= *c);
            if sol.plan[(i, j)] > q(0, 1) {
                assert_eq!(s, *c);
            }
        }
        assert_eq!(sol.value, sol.dual_value(inst));
        assert_eq!(sol.source_potentials[0], q(0, 1));
    }

    #[test]
    fn single_point_zero_cost() {
        let inst = TransportationInstance::new(
            vec![q(1, 1)],
            vec![q(1, 1)],
            grid(vec![vec![0]]),
            TransportMode::MinCost,
            Tol::default(),
        )
        .unwrap();
        let sol = solve_transportation(&inst, Tol::default()).unwrap();
        assert_eq!(sol.value, q(0, 1));
        assert_eq!(sol.plan[(0, 0)], q(1, 1));
    }

    #[test]
    fn zero_profits_give_zero() {
        let inst = TransportationInstance::new(
            vec![q(1, 2); 2],
            vec![q(1, 2); 2],
            grid(vec![vec![0, 0], vec![0, 0]]),
            TransportMode::MaxProfit,
            Tol::default(),
        )
        .unwrap();
        let sol = solve_transportation(&inst, Tol::default()).unwrap();
        assert_eq!(sol.value, q(0, 1));
        assert_eq!(sol.dual_value(&inst), q(0, 1));
    }

    #[test]
    fn path_metric_three_points() {
        let costs = grid(vec![vec![0, 1, 2], vec![1, 0, 1], vec![2, 1, 0]]);
        let inst = TransportationInstance::new(
            vec![q(1, 2), q(1, 4), q(1, 4)],
            vec![q(1, 4), q(1, 4), q(1, 2)],
            costs,
            TransportMode::MinCost,
            Tol::default(),
        )
        .unwrap();
        let sol = solve_transportation(&inst, Tol::default()).unwrap();
        // Moving 1/4 from atom 0 to atom 2 in two unit steps.
        assert_eq!(sol.value, q(1, 2));
        check_min_cost(&inst, &sol);
    }

    #[test]
    fn unbalanced_min_cost_rejected() {
        let err = TransportationInstance::new(
            vec![q(1, 1)],
            vec![q(1, 2)],
            grid(vec![vec![0]]),
            TransportMode::MinCost,
            Tol::default(),
        )
        .unwrap_err();
        assert_eq!(err, Error::UnbalancedMarginals);
    }

    #[test]
    fn max_profit_duals_are_nonnegative_and_tight() {
        let profits = grid(vec![vec![3, 0, 1], vec![0, 2, 0], vec![5, 1, 1]]);
        let s = vec![q(1, 3), q(1, 6), q(1, 2)];
        let d = vec![q(1, 4), q(1, 4), q(1, 2)];
        let inst =
            TransportationInstance::new(s, d, profits.clone(), TransportMode::MaxProfit, Tol::default()).unwrap();
        let sol = solve_transportation(&inst, Tol::default()).unwrap();
        for ((i, j), p) in profits.indexed() {
            assert!(sol.source_potentials[i].clone() + sol.sink_potentials[j].clone() >= *p);
        }
        assert!(sol.source_potentials.iter().chain(&sol.sink_potentials).all(|v| *v >= q(0, 1)));
        assert_eq!(sol.value, sol.dual_value(&inst));
    }

    #[test]
    fn negative_costs_min_cost() {
        let costs = grid(vec![vec![-3, 2], vec![4, -1]]);
        let inst = TransportationInstance::new(
            vec![q(1, 2), q(1, 2)],
            vec![q(1, 3), q(2, 3)],
            costs,
            TransportMode::MinCost,
            Tol::default(),
        )
        .unwrap();
        let sol = solve_transportation(&inst, Tol::default()).unwrap();
        check_min_cost(&inst, &sol);
        // x00 = 1/3, x01 = 1/6, x11 = 1/2 -> -1 + 1/3 - 1/2
        assert_eq!(sol.value, q(-7, 6));
    }
}
