//! Bistochastic plans: the largest mass a bistochastic plan can put on a
//! set, completion of subbistochastic plans, integration against plans and
//! the quasibistochastic norm.

use crate::error::{Error, Result};
use crate::matrix::Grid;
use crate::model::{MassView, Plan, ProductFunction, ProductSet};
use crate::scalar::{sum, Scalar};
use crate::thickness::{thickness, ThicknessResult};

#[derive(Debug, Clone, PartialEq)]
pub struct HallResult<S> {
    pub mass: S,
    /// Bistochastic plan with `plan(Z) = mass`.
    pub plan: Plan<S>,
    pub thickness_certificate: ThicknessResult<S>,
}

/// Max-flow on the cells of `z`, completed off `z` to a bistochastic plan.
pub fn max_bistochastic_mass<S: Scalar>(z: &ProductSet<S>) -> HallResult<S> {
    let th = thickness(z);
    let sub = Plan::new(z.x_space().clone(), z.y_space().clone(), th.flow.clone()).expect("flow is nonnegative");
    let plan = complete_to_bistochastic(&sub).expect("max-flow respects the marginals");
    HallResult { mass: plan.mass_on(z), plan, thickness_certificate: th }
}

/// Adds the northwest-corner plan of the row and column deficits of `sub`.
pub fn complete_to_bistochastic<S: Scalar>(sub: &Plan<S>) -> Result<Plan<S>> {
    if !sub.is_subbistochastic() {
        return Err(Error::NotSubbistochastic("a marginal of the plan exceeds its space weight".into()));
    }
    let tol = sub.tol();
    let (x, y) = (sub.x_space(), sub.y_space());
    let clamp = |v: S| if v.is_pos(tol) { v } else { S::zero() };
    let mut rows: Vec<S> =
        sub.row_marginals().into_iter().zip(x.weights()).map(|(m, w)| clamp(w.clone() - m)).collect();
    let mut cols: Vec<S> =
        sub.col_marginals().into_iter().zip(y.weights()).map(|(m, w)| clamp(w.clone() - m)).collect();
    let mut mass = sub.mass().clone();
    let (mut i, mut j) = (0, 0);
    while i < rows.len() && j < cols.len() {
        let step = S::min_of(&rows[i], &cols[j]);
        mass[(i, j)] = mass[(i, j)].clone() + step.clone();
        rows[i] = rows[i].clone() - step.clone();
        cols[j] = cols[j].clone() - step;
        if rows[i].is_pos(tol) {
            j += 1;
        } else {
            i += 1;
        }
    }
    Ok(Plan::new(x.clone(), y.clone(), mass).expect("completion adds nonnegative mass"))
}

/// `Σ f(i, j) · mass(i, j)`; signed masses allowed.
pub fn integrate_against_plan<S: Scalar, M: MassView<S>>(f: &ProductFunction<S>, plan: &M) -> Result<S> {
    if plan.mass().shape() != f.shape() {
        return Err(Error::dims("plan and function have different shapes"));
    }
    f.check_same_factors(plan.x_space(), plan.y_space())?;
    Ok(sum(plan.mass().indexed().map(|((i, j), m)| m.clone() * f.get(i, j).clone())))
}

/// Larger of the sup-norms of the two marginal densities of `|η|`.
pub fn qb_norm<S: Scalar, M: MassView<S>>(eta: &M) -> S {
    let abs: Grid<S> = eta.mass().map(|m| m.abs());
    let (n, m) = abs.shape();
    let x = eta.x_space().weights();
    let y = eta.y_space().weights();
    let rows = (0..n).map(|i| sum(abs.row(i).iter().cloned()) / x[i].clone());
    let cols = (0..m).map(|j| sum((0..n).map(|i| abs[(i, j)].clone())) / y[j].clone());
    rows.chain(cols).reduce(|a, b| S::max_of(&a, &b)).unwrap_or_else(S::zero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DiscreteSpace, SignedPlan, SpaceRef};
    use crate::scalar::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn uniform(n: usize) -> SpaceRef<Rational> {
        DiscreteSpace::uniform(n).into_ref()
    }

    #[test]
    fn hall_examples() {
        let x = uniform(5);
        let full = max_bistochastic_mass(&ProductSet::full(x.clone(), x.clone()));
        assert_eq!(full.mass, q(1, 1));
        assert!(full.plan.is_bistochastic());

        let diag = ProductSet::from_fn(x.clone(), x.clone(), |i, j| i == j);
        let r = max_bistochastic_mass(&diag);
        assert_eq!(r.mass, q(1, 1));
        assert_eq!(r.plan, Plan::diagonal(x.clone(), x.clone()).unwrap());

        let y = DiscreteSpace::from_weights(vec![q(1, 2), q(1, 3), q(1, 6)]).unwrap().into_ref();
        let column = ProductSet::from_fn(x.clone(), y.clone(), |_, j| j == 1);
        let r = max_bistochastic_mass(&column);
        assert_eq!(r.mass, q(1, 3));
        assert_eq!(r.mass, r.thickness_certificate.value);
        assert!(r.plan.is_bistochastic());
    }

    #[test]
    fn completion_examples() {
        let x = DiscreteSpace::from_weights(vec![q(1, 2), q(1, 2)]).unwrap().into_ref();
        let y = DiscreteSpace::from_weights(vec![q(1, 3), q(1, 3), q(1, 3)]).unwrap().into_ref();
        let product = Plan::product(x.clone(), y.clone());
        assert_eq!(complete_to_bistochastic(&product).unwrap(), product);

        let nw = complete_to_bistochastic(&Plan::zero(x.clone(), y.clone())).unwrap();
        let expect = Grid::from_rows(vec![vec![q(1, 3), q(1, 6), q(0, 1)], vec![q(0, 1), q(1, 6), q(1, 3)]]).unwrap();
        assert_eq!(nw.mass(), &expect);

        let half = Plan::new(x.clone(), y.clone(), product.mass().map(|m| m.clone() * q(1, 2))).unwrap();
        let done = complete_to_bistochastic(&half).unwrap();
        assert!(done.is_bistochastic());
        assert!(done.mass().iter().zip(half.mass().iter()).all(|(a, b)| a >= b));

        let over = Plan::new(x.clone(), y, Grid::filled(2, 3, q(1, 4))).unwrap();
        assert!(matches!(complete_to_bistochastic(&over), Err(Error::NotSubbistochastic(_))));
    }

    #[test]
    fn integration_examples() {
        let n = 16;
        let x = uniform(n);
        let grid = |i: usize| q(i as i64, n as i64);
        let f = ProductFunction::from_fn(x.clone(), x.clone(), |i, j| grid(i) + grid(j)).unwrap();
        let product = Plan::product(x.clone(), x.clone());
        let diag = Plan::diagonal(x.clone(), x.clone()).unwrap();
        let double = sum((0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| (grid(i) + grid(j)) * q(1, (n * n) as i64)));
        assert_eq!(integrate_against_plan(&f, &product).unwrap(), double);
        let trace = sum((0..n).map(|i| q(1, n as i64) * q(2, 1) * grid(i)));
        assert_eq!(integrate_against_plan(&f, &diag).unwrap(), trace);
        let rho = ProductFunction::from_fn(x.clone(), x.clone(), |i, j| (grid(i) - grid(j)).abs()).unwrap();
        assert_eq!(integrate_against_plan(&rho, &diag).unwrap(), q(0, 1));
        let other = uniform(3);
        assert!(integrate_against_plan(&f, &Plan::product(other.clone(), other)).is_err());
    }

    #[test]
    fn qb_norm_examples() {
        let x = DiscreteSpace::from_weights(vec![q(1, 4), q(3, 4)]).unwrap().into_ref();
        let product = Plan::product(x.clone(), x.clone());
        assert_eq!(qb_norm(&product), q(1, 1));
        assert_eq!(qb_norm(&Plan::diagonal(x.clone(), x.clone()).unwrap()), q(1, 1));
        let signed = SignedPlan::from(&product).scale(&q(-2, 1));
        assert_eq!(qb_norm(&signed), q(2, 1));
    }
}
