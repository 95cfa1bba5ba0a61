//! The regulator norm `‖f‖ = inf{∫a dμ + ∫b dν : a, b >= 0, a(x) + b(y) >= |f(x, y)|}`
//! and the quantities it is compared against.
//!
//! The infimum is the dual of a max-profit transportation problem with
//! profits `|f|` and marginal bounds `μ`, `ν`; the optimal plan is a
//! subbistochastic measure `λ` with `Σ |f|·λ = ‖f‖`.

use crate::error::{Error, Result};
use crate::flow::{solve_transportation, TransportMode, TransportationInstance};
use crate::model::{pair_tol, MassView, Plan, ProductFunction, SeparableMajorant, SpaceRef};
use crate::scalar::{sum, Scalar};
use crate::tau::breakpoints;
use crate::thickness::thickness_of_level_set;

#[derive(Debug, Clone, PartialEq)]
pub struct SrNormResult<S> {
    pub value: S,
    pub majorant: SeparableMajorant<S>,
    /// Subbistochastic witness, stored as masses `h_ij μ_i ν_j`.
    pub dual_plan: Plan<S>,
    /// `Σ |f|·dual_plan`.
    pub dual_value: S,
}

impl<S: Scalar> SrNormResult<S> {
    pub fn gap(&self) -> S {
        self.value.clone() - self.dual_value.clone()
    }

    /// Re-checks both certificates against `f` without re-solving.
    pub fn verify(&self, f: &ProductFunction<S>) -> Result<()> {
        verify_certificates(f, &self.majorant, &self.dual_plan, &self.value, &self.dual_value)
    }
}

/// Primal feasibility of `majorant`, subbistochasticity of `plan`, both
/// claimed values, and a zero gap.
pub fn verify_certificates<S: Scalar>(
    f: &ProductFunction<S>,
    majorant: &SeparableMajorant<S>,
    plan: &Plan<S>,
    primal: &S,
    dual: &S,
) -> Result<()> {
    let tol = f.tol();
    let fail = |detail: String| Err(Error::Validation { invariant: "regulator norm certificate", detail });
    plan_matches(f, plan)?;
    if majorant.a.len() != f.shape().0 || majorant.b.len() != f.shape().1 {
        return Err(Error::dims("majorant length differs from the factor sizes"));
    }
    if let Some((i, j)) = majorant.violation(f, tol) {
        return fail(format!("a({i}) + b({j}) < |f({i}, {j})|"));
    }
    if majorant.a.iter().chain(&majorant.b).any(|v| v.lt_tol(&S::zero(), tol)) {
        return fail("negative majorant entry".into());
    }
    if !majorant.integral(f.x_space(), f.y_space()).eq_tol(primal, tol) {
        return fail("majorant integral differs from the primal value".into());
    }
    if !plan.is_subbistochastic() {
        return fail("dual plan exceeds a marginal".into());
    }
    if !pair_abs(f, plan).eq_tol(dual, tol) {
        return fail("pairing with the dual plan differs from the dual value".into());
    }
    if !primal.eq_tol(dual, tol) {
        return fail(format!("duality gap {}", (primal.clone() - dual.clone()).to_report_string()));
    }
    Ok(())
}

fn plan_matches<S: Scalar>(f: &ProductFunction<S>, plan: &Plan<S>) -> Result<()> {
    if plan.mass().shape() != f.shape() {
        return Err(Error::dims("plan shape differs from the function shape"));
    }
    Ok(())
}

fn pair_abs<S: Scalar>(f: &ProductFunction<S>, plan: &Plan<S>) -> S {
    sum(plan.mass().indexed().map(|((i, j), m)| m.clone() * f.get(i, j).abs()))
}

pub fn sr_norm<S: Scalar>(f: &ProductFunction<S>) -> SrNormResult<S> {
    let (x, y) = (f.x_space(), f.y_space());
    let tol = f.tol();
    let inst = TransportationInstance::new(
        x.weights().to_vec(),
        y.weights().to_vec(),
        f.abs().values().clone(),
        TransportMode::MaxProfit,
        tol,
    )
    .expect("space weights are valid supplies and demands");
    let sol = solve_transportation(&inst, tol).expect("max-profit transportation is always feasible");

    let shift = sol.source_potentials.iter().cloned().reduce(|a, b| S::min_of(&a, &b)).unwrap_or_else(S::zero);
    let a: Vec<S> = sol.source_potentials.iter().map(|v| v.clone() - shift.clone()).collect();
    let b: Vec<S> = sol.sink_potentials.iter().map(|v| v.clone() + shift.clone()).collect();
    let majorant = SeparableMajorant { a, b };
    let value = majorant.integral(x, y);
    let dual_plan = Plan::new(x.clone(), y.clone(), sol.plan).expect("flow is nonnegative");
    let dual_value = pair_abs(f, &dual_plan);
    SrNormResult { value, majorant, dual_plan, dual_value }
}

/// `∫₀^∞ th({|f| >= λ}) dλ`, summed exactly over the piecewise-constant integrand.
pub fn layer_cake_integral<S: Scalar>(f: &ProductFunction<S>) -> S {
    let levels = breakpoints(f);
    let mut total = S::zero();
    for w in levels.windows(2) {
        total = total + (w[1].clone() - w[0].clone()) * thickness_of_level_set(f, &w[1]);
    }
    total
}

/// Entrywise clamp to `[−n, n]`.
pub fn cutoff<S: Scalar>(f: &ProductFunction<S>, n: &S) -> Result<ProductFunction<S>> {
    if *n < S::zero() {
        return Err(Error::InvalidInput("cut-off level must be nonnegative".into()));
    }
    let lo = -n.clone();
    Ok(f.map(|v| S::min_of(&S::max_of(v, &lo), n)))
}

/// One term `s · u(x) · v(y)` of a nuclear kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct RankOneTerm<S> {
    pub s: S,
    pub u: Vec<S>,
    pub v: Vec<S>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NuclearBound<S> {
    /// `Σ |s_k|`.
    pub bound: S,
    /// `½Σ|s_k|u_k²(x) + ½Σ|s_k|v_k²(y)`, which dominates `|K|`.
    pub majorant: SeparableMajorant<S>,
    /// `K = Σ s_k u_k ⊗ v_k`.
    pub kernel: ProductFunction<S>,
}

pub fn nuclear_bound<S: Scalar>(terms: &[RankOneTerm<S>], x: &SpaceRef<S>, y: &SpaceRef<S>) -> Result<NuclearBound<S>> {
    let tol = pair_tol(x, y);
    let norm2 = |w: &[S], v: &[S]| sum(w.iter().zip(v).map(|(w, v)| w.clone() * v.clone() * v.clone()));
    for (k, t) in terms.iter().enumerate() {
        if t.u.len() != x.len() || t.v.len() != y.len() {
            return Err(Error::dims(format!("term {k} has factors of the wrong length")));
        }
        if !norm2(x.weights(), &t.u).eq_tol(&S::one(), tol) || !norm2(y.weights(), &t.v).eq_tol(&S::one(), tol) {
            return Err(Error::NotNormalized(format!("term {k}")));
        }
    }
    let half = S::half();
    let a = (0..x.len())
        .map(|i| half.clone() * sum(terms.iter().map(|t| t.s.abs() * t.u[i].clone() * t.u[i].clone())))
        .collect();
    let b = (0..y.len())
        .map(|j| half.clone() * sum(terms.iter().map(|t| t.s.abs() * t.v[j].clone() * t.v[j].clone())))
        .collect();
    let kernel = ProductFunction::from_fn(x.clone(), y.clone(), |i, j| {
        sum(terms.iter().map(|t| t.s.clone() * t.u[i].clone() * t.v[j].clone()))
    })?;
    Ok(NuclearBound { bound: sum(terms.iter().map(|t| t.s.abs())), majorant: SeparableMajorant { a, b }, kernel })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DiscreteSpace;
    use crate::scalar::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn uniform(n: usize) -> SpaceRef<Rational> {
        DiscreteSpace::uniform(n).into_ref()
    }

    #[test]
    fn constant_function() {
        let x = uniform(3);
        let f = ProductFunction::constant(x.clone(), x, q(-5, 2));
        let r = sr_norm(&f);
        assert_eq!(r.value, q(5, 2));
        assert_eq!(r.gap(), q(0, 1));
        r.verify(&f).unwrap();
    }

    #[test]
    fn separable_function() {
        let x = DiscreteSpace::from_weights(vec![q(1, 2), q(1, 3), q(1, 6)]).unwrap().into_ref();
        let y = uniform(2);
        let a0 = [q(1, 1), q(0, 1), q(3, 1)];
        let b0 = [q(2, 1), q(1, 2)];
        let f = ProductFunction::from_fn(x.clone(), y.clone(), |i, j| a0[i].clone() + b0[j].clone()).unwrap();
        let expect = q(1, 2) + q(1, 2) + q(5, 4);
        let r = sr_norm(&f);
        assert_eq!(r.value, expect);
        r.verify(&f).unwrap();
    }

    #[test]
    fn single_cell() {
        for n in [2usize, 5, 10] {
            let x = uniform(n);
            let f = ProductFunction::from_fn(x.clone(), x, |i, j| if (i, j) == (1, 0) { q(1, 1) } else { q(0, 1) })
                .unwrap();
            let r = sr_norm(&f);
            assert_eq!(r.value, q(1, n as i64));
            assert_eq!(r.majorant.a.iter().cloned().fold(q(1, 1), |a, b| a.min(b)), q(0, 1));
            r.verify(&f).unwrap();
        }
    }

    #[test]
    fn layer_cake_examples() {
        let x = uniform(10);
        assert_eq!(layer_cake_integral(&ProductFunction::constant(x.clone(), x.clone(), q(1, 1))), q(1, 1));
        assert_eq!(layer_cake_integral(&ProductFunction::constant(x.clone(), x.clone(), q(0, 1))), q(0, 1));
        let f =
            ProductFunction::from_fn(x.clone(), x, |i, j| if (i, j) == (2, 2) { q(3, 5) } else { q(0, 1) }).unwrap();
        assert_eq!(layer_cake_integral(&f), q(6, 100));
    }

    #[test]
    fn cutoff_examples() {
        let x = uniform(1);
        let y = uniform(2);
        let f = ProductFunction::from_fn(x.clone(), y.clone(), |_, j| if j == 0 { q(-3, 1) } else { q(1, 1) }).unwrap();
        assert_eq!(cutoff(&f, &q(1, 1)).unwrap().values().as_slice(), &[q(-1, 1), q(1, 1)]);
        assert_eq!(cutoff(&f, &q(7, 1)).unwrap(), f);
        let five = ProductFunction::constant(x, y, q(5, 1));
        assert_eq!(cutoff(&five, &q(2, 1)).unwrap().values().as_slice(), &[q(2, 1), q(2, 1)]);
        assert!(cutoff(&five, &q(-1, 1)).is_err());
    }

    #[test]
    fn nuclear_examples() {
        let x = uniform(4);
        let ones = vec![q(1, 1); 4];
        let nb = nuclear_bound(&[RankOneTerm { s: q(1, 1), u: ones.clone(), v: ones.clone() }], &x, &x).unwrap();
        assert_eq!(nb.bound, q(1, 1));
        assert_eq!(sr_norm(&nb.kernel).value, q(1, 1));

        let empty = nuclear_bound(&[], &x, &x).unwrap();
        assert_eq!(empty.bound, q(0, 1));
        assert!(empty.kernel.values().iter().all(|v| *v == q(0, 1)));

        let alt: Vec<Rational> = (0..4).map(|i| if i % 2 == 0 { q(1, 1) } else { q(-1, 1) }).collect();
        let terms = [
            RankOneTerm { s: q(1, 2), u: ones.clone(), v: ones.clone() },
            RankOneTerm { s: q(1, 2), u: alt.clone(), v: alt },
        ];
        let nb = nuclear_bound(&terms, &x, &x).unwrap();
        assert_eq!(nb.bound, q(1, 1));
        assert!(sr_norm(&nb.kernel).value <= nb.bound);
        assert_eq!(nb.majorant.violation(&nb.kernel, x.tol()), None);

        let bad = RankOneTerm { s: q(1, 1), u: vec![q(2, 1); 4], v: ones };
        assert!(matches!(nuclear_bound(&[bad], &x, &x), Err(Error::NotNormalized(_))));
    }
}
