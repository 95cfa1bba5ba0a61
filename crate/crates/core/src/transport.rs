//! Kantorovich transport on one metric space, the Kantorovich–Rubinstein
//! norm with its Lipschitz potential, and the two-level duality for a cost
//! matrix over `X × Y`.

use crate::error::{Error, Result};
use crate::flow::{solve_transportation, TransportMode, TransportationInstance};
use crate::matrix::Grid;
use crate::model::{pair_tol, validate_semimetric, MassView, MetricClass, MetricMatrix, Plan, ProductFunction};
use crate::scalar::{sum, Scalar, Tol};

#[derive(Debug, Clone, PartialEq)]
pub struct TransportResult<S> {
    pub cost: S,
    /// Marginals `μ₁` (rows) and `μ₂` (columns); stored as a bare grid since
    /// the marginals need not be probability weights of the space.
    pub plan: Grid<S>,
    /// 1-Lipschitz potential with `u(0) = 0`.
    pub potential: Vec<S>,
}

impl<S: Scalar> TransportResult<S> {
    /// `Σ u·(μ₁ − μ₂)`.
    pub fn dual_value(&self, mu1: &[S], mu2: &[S]) -> S {
        sum(self.potential.iter().zip(mu1.iter().zip(mu2)).map(|(u, (a, b))| u.clone() * (a.clone() - b.clone())))
    }

    /// Re-checks marginals, the Lipschitz bound, complementary slackness and
    /// a zero gap.
    pub fn verify(&self, mu1: &[S], mu2: &[S], rho: &MetricMatrix<S>) -> Result<()> {
        let tol = rho.space().tol();
        let n = rho.len();
        let fail = |detail: String| Err(Error::Validation { invariant: "transport certificate", detail });
        if self.plan.shape() != (n, n) || self.potential.len() != n || mu1.len() != n || mu2.len() != n {
            return Err(Error::dims("certificate sizes differ from the metric"));
        }
        if self.plan.iter().any(|m| m.lt_tol(&S::zero(), tol)) {
            return fail("negative plan entry".into());
        }
        for i in 0..n {
            let r = sum(self.plan.row(i).iter().cloned());
            let c = sum((0..n).map(|k| self.plan[(k, i)].clone()));
            if !r.eq_tol(&mu1[i], tol) || !c.eq_tol(&mu2[i], tol) {
                return fail(format!("marginal mismatch at atom {i}"));
            }
        }
        let residual = self.slackness_residual(rho);
        if !residual.is_zero_tol(tol) {
            return fail(format!("complementary slackness residual {}", residual.to_report_string()));
        }
        if let Some((i, j)) = lipschitz_violation(&self.potential, rho, tol) {
            return fail(format!("u({i}) - u({j}) exceeds rho({i}, {j})"));
        }
        let primal = sum(self.plan.indexed().map(|((i, j), m)| m.clone() * rho.get(i, j).clone()));
        if !primal.eq_tol(&self.cost, tol) || !self.dual_value(mu1, mu2).eq_tol(&self.cost, tol) {
            return fail("primal and dual values disagree".into());
        }
        Ok(())
    }

    /// Largest `|u(x) − u(y) − ρ(x, y)|` over cells carrying mass.
    pub fn slackness_residual(&self, rho: &MetricMatrix<S>) -> S {
        self.plan
            .indexed()
            .filter(|(_, m)| !m.is_zero_exact())
            .map(|((i, j), _)| (self.potential[i].clone() - self.potential[j].clone() - rho.get(i, j).clone()).abs())
            .reduce(|a, b| S::max_of(&a, &b))
            .unwrap_or_else(S::zero)
    }
}

/// First pair with `u(i) − u(j) > ρ(i, j)`.
pub fn lipschitz_violation<S: Scalar>(u: &[S], rho: &MetricMatrix<S>, tol: Tol) -> Option<(usize, usize)> {
    let n = rho.len();
    (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .find(|&(i, j)| !(u[i].clone() - u[j].clone()).le_tol(rho.get(i, j), tol))
}

fn check_measure<S: Scalar>(name: &str, mu: &[S], n: usize) -> Result<()> {
    if mu.len() != n {
        return Err(Error::dims(format!("{name} has {} entries, the space has {n} atoms", mu.len())));
    }
    if let Some(k) = mu.iter().position(|v| !v.is_finite() || *v < S::zero()) {
        return Err(Error::InvalidInput(format!("{name}[{k}] is negative or non-finite")));
    }
    Ok(())
}

pub fn kantorovich<S: Scalar>(mu1: &[S], mu2: &[S], rho: &MetricMatrix<S>) -> Result<TransportResult<S>> {
    if let MetricClass::Invalid(w) = validate_semimetric(rho) {
        return Err(Error::InvalidSemimetric(format!("{w:?}")));
    }
    let n = rho.len();
    check_measure("mu1", mu1, n)?;
    check_measure("mu2", mu2, n)?;
    let tol = rho.space().tol();
    let inst =
        TransportationInstance::new(mu1.to_vec(), mu2.to_vec(), rho.dist().clone(), TransportMode::MinCost, tol)?;
    let sol = solve_transportation(&inst, tol)?;

    // c-transform of the column potentials: 1-Lipschitz and tight on the support.
    let phi: Vec<S> = (0..n)
        .map(|x| {
            (0..n)
                .map(|j| rho.get(x, j).clone() - sol.sink_potentials[j].clone())
                .reduce(|a, b| S::min_of(&a, &b))
                .expect("space is nonempty")
        })
        .collect();
    let base = phi[0].clone();
    let potential = phi.into_iter().map(|p| p - base.clone()).collect();
    Ok(TransportResult { cost: sol.value, plan: sol.plan, potential })
}

#[derive(Debug, Clone, PartialEq)]
pub struct KrNorm<S> {
    pub value: S,
    pub potential: Vec<S>,
    pub transport: TransportResult<S>,
}

/// `sup{Σ u·signed : u ∈ Lip₁(ρ)}`, via transport between the positive and
/// negative parts of `signed`.
pub fn kr_norm<S: Scalar>(signed: &[S], rho: &MetricMatrix<S>) -> Result<KrNorm<S>> {
    let tol = rho.space().tol();
    if signed.len() != rho.len() {
        return Err(Error::dims("signed weights and metric have different sizes"));
    }
    if !sum(signed.iter().cloned()).is_zero_tol(tol) {
        return Err(Error::UnbalancedMarginals);
    }
    let zero = S::zero();
    let plus: Vec<S> = signed.iter().map(|s| S::max_of(s, &zero)).collect();
    let minus: Vec<S> = signed.iter().map(|s| S::max_of(&-s.clone(), &zero)).collect();
    let transport = kantorovich(&plus, &minus, rho)?;
    if let Some((i, j)) = lipschitz_violation(&transport.potential, rho, tol) {
        return Err(Error::Internal(format!("potential is not 1-Lipschitz at ({i}, {j})")));
    }
    Ok(KrNorm { value: transport.cost.clone(), potential: transport.potential.clone(), transport })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoLevelReport<S> {
    /// `inf Σ ρ·plan` over plans with the (reweighted) marginals.
    pub primal: S,
    /// `sup Σ μ w₁ + Σ ν w₂` over `w₁(i) + w₂(j) <= ρ(i, j)`.
    pub dual: S,
    pub gap: S,
    pub plan: Plan<S>,
    pub w1: Vec<S>,
    pub w2: Vec<S>,
}

impl<S: Scalar> TwoLevelReport<S> {
    /// Re-checks the plan marginals, dual feasibility of `(w₁, w₂)`, both
    /// values and the gap.
    pub fn verify(&self, rho: &ProductFunction<S>, z: Option<(&[S], &[S])>) -> Result<()> {
        let tol = rho.tol();
        let (mu, nu) = reweighted(rho, z)?;
        let fail = |detail: String| Err(Error::Validation { invariant: "two-level transport certificate", detail });
        let mass = &self.plan;
        if mass.mass().shape() != rho.shape() || self.w1.len() != mu.len() || self.w2.len() != nu.len() {
            return Err(Error::dims("certificate sizes differ from the cost matrix"));
        }
        if mass.mass().iter().any(|m| m.lt_tol(&S::zero(), tol)) {
            return fail("negative plan entry".into());
        }
        let rows = mass.row_marginals();
        let cols = mass.col_marginals();
        if let Some(i) = (0..mu.len()).find(|&i| !rows[i].eq_tol(&mu[i], tol)) {
            return fail(format!("row marginal mismatch at atom {i}"));
        }
        if let Some(j) = (0..nu.len()).find(|&j| !cols[j].eq_tol(&nu[j], tol)) {
            return fail(format!("column marginal mismatch at atom {j}"));
        }
        let violated =
            rho.values().indexed().find(|((i, j), c)| !(self.w1[*i].clone() + self.w2[*j].clone()).le_tol(c, tol));
        if let Some(((i, j), _)) = violated {
            return fail(format!("w1({i}) + w2({j}) exceeds the cost"));
        }
        let primal = sum(mass.mass().indexed().map(|((i, j), m)| m.clone() * rho.get(i, j).clone()));
        let dual = sum(self.w1.iter().zip(&mu).map(|(w, m)| w.clone() * m.clone()))
            + sum(self.w2.iter().zip(&nu).map(|(w, m)| w.clone() * m.clone()));
        if !primal.eq_tol(&self.primal, tol) || !dual.eq_tol(&self.dual, tol) {
            return fail("claimed values differ from the certificates".into());
        }
        if !primal.eq_tol(&dual, tol) {
            return fail(format!("duality gap {}", (primal - dual).to_report_string()));
        }
        if !self.gap.is_zero_tol(tol) {
            return fail(format!("claimed gap {} is not zero", self.gap.to_report_string()));
        }
        Ok(())
    }
}

fn reweighted<S: Scalar>(rho: &ProductFunction<S>, z: Option<(&[S], &[S])>) -> Result<(Vec<S>, Vec<S>)> {
    let (x, y) = (rho.x_space(), rho.y_space());
    let tol = pair_tol(x, y);
    Ok(match z {
        None => (x.weights().to_vec(), y.weights().to_vec()),
        Some((zx, zy)) => {
            if zx.len() != x.len() || zy.len() != y.len() {
                return Err(Error::dims("reweighting vectors have the wrong length"));
            }
            if zx.iter().chain(zy).any(|v| !v.is_pos(tol)) {
                return Err(Error::InvalidInput("reweighting must be strictly positive".into()));
            }
            (
                x.weights().iter().zip(zx).map(|(w, z)| w.clone() * z.clone()).collect(),
                y.weights().iter().zip(zy).map(|(w, z)| w.clone() * z.clone()).collect(),
            )
        }
    })
}

/// Primal and dual values of the transport problem with cost `rho` over
/// `X × Y`. `z = (zx, zy)` reweights the marginals to `μ·zx` and `ν·zy`;
/// `None` is `z = (1, 1)`.
pub fn two_level_duality_check<S: Scalar>(
    rho: &ProductFunction<S>,
    z: Option<(&[S], &[S])>,
) -> Result<TwoLevelReport<S>> {
    let (x, y) = (rho.x_space(), rho.y_space());
    let tol = pair_tol(x, y);
    let (mu, nu) = reweighted(rho, z)?;
    let inst = TransportationInstance::new(mu, nu, rho.values().clone(), TransportMode::MinCost, tol)?;
    let sol = solve_transportation(&inst, tol)?;
    let dual = sol.dual_value(&inst);
    let plan = Plan::new(x.clone(), y.clone(), sol.plan).expect("flow is nonnegative");
    Ok(TwoLevelReport {
        gap: sol.value.clone() - dual.clone(),
        primal: sol.value,
        dual,
        plan,
        w1: sol.source_potentials,
        w2: sol.sink_potentials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{dense_lp_solve, transportation_lp};
    use crate::model::{DiscreteSpace, SpaceRef};
    use crate::scalar::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn metric(rows: Vec<Vec<i64>>) -> MetricMatrix<Rational> {
        let n = rows.len();
        let space = DiscreteSpace::uniform(n).into_ref();
        let dist = Grid::from_rows(rows.into_iter().map(|r| r.into_iter().map(Rational::from_i64).collect()).collect())
            .unwrap();
        MetricMatrix::new(space, dist).unwrap()
    }

    #[test]
    fn equal_measures_cost_nothing() {
        let rho = metric(vec![vec![0, 1, 2], vec![1, 0, 1], vec![2, 1, 0]]);
        let mu = vec![q(1, 2), q(1, 4), q(1, 4)];
        let r = kantorovich(&mu, &mu, &rho).unwrap();
        assert_eq!(r.cost, q(0, 1));
        assert_eq!(r.potential, vec![q(0, 1); 3]);
        assert!(r.plan.indexed().all(|((i, j), m)| i == j || *m == q(0, 1)));
        r.verify(&mu, &mu, &rho).unwrap();
    }

    #[test]
    fn two_points() {
        let rho = metric(vec![vec![0, 3], vec![3, 0]]);
        let (a, b) = (vec![q(1, 1), q(0, 1)], vec![q(0, 1), q(1, 1)]);
        let r = kantorovich(&a, &b, &rho).unwrap();
        assert_eq!(r.cost, q(3, 1));
        r.verify(&a, &b, &rho).unwrap();
        let kr = kr_norm(&[q(1, 1), q(-1, 1)], &rho).unwrap();
        assert_eq!(kr.value, q(3, 1));
        assert_eq!(kr.potential[0].clone() - kr.potential[1].clone(), q(3, 1));
        assert_eq!(kr_norm(&[q(0, 1), q(0, 1)], &rho).unwrap().value, q(0, 1));
    }

    #[test]
    fn path_metric_matches_lp() {
        let rho = metric(vec![vec![0, 1, 2], vec![1, 0, 1], vec![2, 1, 0]]);
        let a = vec![q(1, 2), q(1, 2), q(0, 1)];
        let b = vec![q(0, 1), q(1, 2), q(1, 2)];
        let r = kantorovich(&a, &b, &rho).unwrap();
        let inst = TransportationInstance::new(
            a.clone(),
            b.clone(),
            rho.dist().clone(),
            TransportMode::MinCost,
            Tol::default(),
        )
        .unwrap();
        let lp = dense_lp_solve(&transportation_lp(&inst), Tol::default()).unwrap();
        assert_eq!(r.cost, -lp.value);
        assert_eq!(r.cost, q(1, 1));
        r.verify(&a, &b, &rho).unwrap();
    }

    #[test]
    fn rejects_bad_inputs() {
        let rho = metric(vec![vec![0, 1], vec![1, 0]]);
        assert_eq!(
            kantorovich(&[q(1, 1), q(0, 1)], &[q(1, 2), q(0, 1)], &rho).unwrap_err(),
            Error::UnbalancedMarginals
        );
        assert_eq!(kr_norm(&[q(1, 1), q(0, 1)], &rho).unwrap_err(), Error::UnbalancedMarginals);
        let bad = metric(vec![vec![0, 1, 5], vec![1, 0, 1], vec![5, 1, 0]]);
        let mu = vec![q(1, 3); 3];
        assert!(matches!(kantorovich(&mu, &mu, &bad), Err(Error::InvalidSemimetric(_))));
    }

    #[test]
    fn sparse_vertex_beats_spread_plans() {
        // Two points at distance 1, μ₁ = μ₂ = (1/2, 1/2): the diagonal plan
        // costs 0 while any plan with all four entries positive costs > 0.
        let rho = metric(vec![vec![0, 1], vec![1, 0]]);
        let mu = vec![q(1, 2), q(1, 2)];
        let r = kantorovich(&mu, &mu, &rho).unwrap();
        assert_eq!(r.cost, q(0, 1));
        for t in 1..50 {
            let e = q(t, 100);
            let spread =
                Grid::from_rows(vec![vec![q(1, 2) - e.clone(), e.clone()], vec![e.clone(), q(1, 2) - e.clone()]])
                    .unwrap();
            let c = sum(spread.indexed().map(|((i, j), m)| m.clone() * rho.get(i, j).clone()));
            assert!(c > r.cost);
        }
    }

    fn uniform(n: usize) -> SpaceRef<Rational> {
        DiscreteSpace::uniform(n).into_ref()
    }

    #[test]
    fn two_level_examples() {
        let x = uniform(3);
        let y = uniform(2);
        let zero = ProductFunction::constant(x.clone(), y.clone(), q(0, 1));
        let r = two_level_duality_check(&zero, None).unwrap();
        assert_eq!((r.primal.clone(), r.dual.clone()), (q(0, 1), q(0, 1)));
        let c = ProductFunction::constant(x.clone(), y.clone(), q(7, 3));
        let r = two_level_duality_check(&c, None).unwrap();
        assert_eq!((r.primal.clone(), r.gap.clone()), (q(7, 3), q(0, 1)));
        assert!(r.plan.is_bistochastic());
        r.verify(&c, None).unwrap();
        let tampered = TwoLevelReport { dual: r.dual.clone() + q(1, 1), ..r.clone() };
        assert!(tampered.verify(&c, None).is_err());
        let zx = vec![q(3, 1), q(0, 1), q(0, 1)];
        assert!(two_level_duality_check(&c, Some((&zx, &[q(1, 1), q(1, 1)]))).is_err());
        let zx = vec![q(2, 1), q(1, 2), q(1, 2)];
        let r = two_level_duality_check(&c, Some((&zx, &[q(1, 1), q(1, 1)]))).unwrap();
        assert_eq!((r.primal, r.gap), (q(7, 3), q(0, 1)));
    }
}
