//! Combinatorial kernels shared by the functionals: bipartite max-flow /
//! vertex cover, transportation by successive shortest paths, and a dense
//! simplex used purely as a cross-check.

mod cover;
mod simplex;
mod transportation;

pub use cover::{min_weighted_vertex_cover, BipartiteCoverInstance, CoverSolution};
pub use simplex::{dense_lp_solve, LinearProgram, LpSolution};
pub use transportation::{solve_transportation, TransportMode, TransportSolution, TransportationInstance};

use crate::scalar::Scalar;

/// The fractional relaxation of a cover instance: minimize
/// `Σ row_cost·y_r + Σ col_cost·y_c` with `y_r + y_c >= 1` per edge and
/// `0 <= y <= 1`. Variables are rows first, then columns.
pub fn cover_relaxation<S: Scalar>(inst: &BipartiteCoverInstance<S>) -> LinearProgram<S> {
    let (n, m) = (inst.row_costs().len(), inst.col_costs().len());
    let objective = inst.row_costs().iter().chain(inst.col_costs()).cloned().collect();
    let unit = |k: usize| (0..n + m).map(|v| if v == k { S::one() } else { S::zero() }).collect::<Vec<_>>();
    let mut lp = LinearProgram::minimize(objective);
    for &(i, j) in inst.edges() {
        let row = (0..n + m).map(|v| if v == i || v == n + j { S::one() } else { S::zero() }).collect();
        lp = lp.ge(row, S::one());
    }
    for k in 0..n + m {
        lp = lp.le(unit(k), S::one());
    }
    lp
}

/// The transportation instance as a dense LP over `x_ij` (row-major).
pub fn transportation_lp<S: Scalar>(inst: &TransportationInstance<S>) -> LinearProgram<S> {
    let (n, m) = inst.weights().shape();
    let w: Vec<S> = inst.weights().iter().cloned().collect();
    let mut lp = match inst.mode() {
        TransportMode::MaxProfit => LinearProgram::maximize(w),
        TransportMode::MinCost => LinearProgram::minimize(w),
    };
    for i in 0..n {
        let row = (0..n * m).map(|k| if k / m == i { S::one() } else { S::zero() }).collect();
        lp = match inst.mode() {
            TransportMode::MaxProfit => lp.le(row, inst.supplies()[i].clone()),
            TransportMode::MinCost => lp.eq(row, inst.supplies()[i].clone()),
        };
    }
    for j in 0..m {
        let row = (0..n * m).map(|k| if k % m == j { S::one() } else { S::zero() }).collect();
        lp = match inst.mode() {
            TransportMode::MaxProfit => lp.le(row, inst.demands()[j].clone()),
            TransportMode::MinCost => lp.eq(row, inst.demands()[j].clone()),
        };
    }
    lp
}
