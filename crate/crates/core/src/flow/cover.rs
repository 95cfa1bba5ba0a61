//! Minimum weighted vertex cover on a bipartite graph, via max-flow/min-cut.
//!
//! Network: `source -> row i` with capacity `row_cost[i]`, `row i -> col j`
//! with infinite capacity for every edge, `col j -> sink` with capacity
//! `col_cost[j]`. A finite cut never crosses a middle edge, so it picks a
//! set of rows and columns covering every edge, and its capacity is the cover
//! weight.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::matrix::Grid;
use crate::scalar::{sum, Scalar, Tol};

#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteCoverInstance<S> {
    row_costs: Vec<S>,
    col_costs: Vec<S>,
    edges: Vec<(usize, usize)>,
}

impl<S: Scalar> BipartiteCoverInstance<S> {
    pub fn new(row_costs: Vec<S>, col_costs: Vec<S>, mut edges: Vec<(usize, usize)>) -> Result<Self> {
        for (side, costs) in [("row", &row_costs), ("column", &col_costs)] {
            if let Some(k) = costs.iter().position(|c| !c.is_finite() || *c <= S::zero()) {
                return Err(Error::InvalidInput(format!("{side} cost {k} is not strictly positive")));
            }
        }
        if let Some(&(i, j)) = edges.iter().find(|(i, j)| *i >= row_costs.len() || *j >= col_costs.len()) {
            return Err(Error::InvalidInput(format!("edge ({i}, {j}) out of range")));
        }
        edges.sort_unstable();
        edges.dedup();
        Ok(BipartiteCoverInstance { row_costs, col_costs, edges })
    }

    pub fn row_costs(&self) -> &[S] {
        &self.row_costs
    }

    pub fn col_costs(&self) -> &[S] {
        &self.col_costs
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverSolution<S> {
    /// Total cost of the picked rows and columns.
    pub value: S,
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    /// Maximum flow through the middle edges; zero off the edge set. Its
    /// row sums are bounded by the row costs and its column sums by the
    /// column costs.
    pub flow: Grid<S>,
    pub flow_value: S,
}

struct Network<'a, S> {
    inst: &'a BipartiteCoverInstance<S>,
    row_adj: Vec<Vec<usize>>,
    col_adj: Vec<Vec<usize>>,
    flow: Grid<S>,
    row_out: Vec<S>,
    col_in: Vec<S>,
    tol: Tol,
}

#[derive(Clone, Copy)]
enum Node {
    Row(usize),
    Col(usize),
}

struct Search {
    row_seen: Vec<bool>,
    col_seen: Vec<bool>,
    /// Parent of a column is the row it was reached from.
    col_parent: Vec<usize>,
    /// Parent of a row is the column it was reached from (reverse edge),
    /// or `None` if it hangs off the source.
    row_parent: Vec<Option<usize>>,
    sink_col: Option<usize>,
}

impl<'a, S: Scalar> Network<'a, S> {
    fn new(inst: &'a BipartiteCoverInstance<S>, tol: Tol) -> Self {
        let (n, m) = (inst.row_costs.len(), inst.col_costs.len());
        let mut row_adj = vec![Vec::new(); n];
        let mut col_adj = vec![Vec::new(); m];
        for &(i, j) in &inst.edges {
            row_adj[i].push(j);
            col_adj[j].push(i);
        }
        Network {
            inst,
            row_adj,
            col_adj,
            flow: Grid::filled(n, m, S::zero()),
            row_out: vec![S::zero(); n],
            col_in: vec![S::zero(); m],
            tol,
        }
    }

    fn source_residual(&self, i: usize) -> S {
        self.inst.row_costs[i].clone() - self.row_out[i].clone()
    }

    fn sink_residual(&self, j: usize) -> S {
        self.inst.col_costs[j].clone() - self.col_in[j].clone()
    }

    /// Breadth-first search over the residual graph, lowest index first.
    /// Stops at the first column with spare sink capacity when `stop_at_sink`.
    fn bfs(&self, stop_at_sink: bool) -> Search {
        let (n, m) = self.flow.shape();
        let mut s = Search {
            row_seen: vec![false; n],
            col_seen: vec![false; m],
            col_parent: vec![usize::MAX; m],
            row_parent: vec![None; n],
            sink_col: None,
        };
        let mut queue = VecDeque::new();
        for i in 0..n {
            if self.source_residual(i).is_pos(self.tol) {
                s.row_seen[i] = true;
                queue.push_back(Node::Row(i));
            }
        }
        while let Some(node) = queue.pop_front() {
            match node {
                Node::Row(i) => {
                    for &j in &self.row_adj[i] {
                        if !s.col_seen[j] {
                            s.col_seen[j] = true;
                            s.col_parent[j] = i;
                            queue.push_back(Node::Col(j));
                        }
                    }
                }
                Node::Col(j) => {
                    if stop_at_sink && self.sink_residual(j).is_pos(self.tol) {
                        s.sink_col = Some(j);
                        return s;
                    }
                    for &i in &self.col_adj[j] {
                        if !s.row_seen[i] && self.flow[(i, j)].is_pos(self.tol) {
                            s.row_seen[i] = true;
                            s.row_parent[i] = Some(j);
                            queue.push_back(Node::Row(i));
                        }
                    }
                }
            }
        }
        s
    }

    fn augment(&mut self, search: &Search, sink_col: usize) {
        // Collect the path as (row, col, forward?) steps from sink back to source.
        let mut steps = Vec::new();
        let mut j = sink_col;
        let start_row = loop {
            let i = search.col_parent[j];
            steps.push((i, j, true));
            match search.row_parent[i] {
                Some(prev_col) => {
                    steps.push((i, prev_col, false));
                    j = prev_col;
                }
                None => break i,
            }
        };
        let mut delta = S::min_of(&self.source_residual(start_row), &self.sink_residual(sink_col));
        for &(i, j, forward) in &steps {
            if !forward {
                delta = S::min_of(&delta, &self.flow[(i, j)]);
            }
        }
        for &(i, j, forward) in &steps {
            if forward {
                self.flow[(i, j)] = self.flow[(i, j)].clone() + delta.clone();
            } else {
                self.flow[(i, j)] = self.flow[(i, j)].clone() - delta.clone();
            }
        }
        self.row_out[start_row] = self.row_out[start_row].clone() + delta.clone();
        self.col_in[sink_col] = self.col_in[sink_col].clone() + delta;
    }
}

/// Minimum-weight set of rows and columns touching every edge, with the
/// maximum flow that certifies optimality.
///
/// Shortest augmenting paths (Edmonds–Karp) with lowest-index-first search
/// order. The returned cover is the canonical minimum cut: rows not reachable
/// from the source in the final residual graph, columns reachable from it.
pub fn min_weighted_vertex_cover<S: Scalar>(inst: &BipartiteCoverInstance<S>, tol: Tol) -> CoverSolution<S> {
    let mut net = Network::new(inst, tol);
    loop {
        let search = net.bfs(true);
        match search.sink_col {
            Some(j) => net.augment(&search, j),
            None => break,
        }
    }
    let reach = net.bfs(false);
    let rows: Vec<usize> = (0..inst.row_costs.len()).filter(|&i| !reach.row_seen[i]).collect();
    let cols: Vec<usize> = (0..inst.col_costs.len()).filter(|&j| reach.col_seen[j]).collect();
    let value =
        sum(rows.iter().map(|&i| inst.row_costs[i].clone())) + sum(cols.iter().map(|&j| inst.col_costs[j].clone()));
    let flow_value = sum(net.row_out.iter().cloned());
    CoverSolution { value, rows, cols, flow: net.flow, flow_value }
}
