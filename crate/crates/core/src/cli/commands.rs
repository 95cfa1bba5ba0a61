//! Dispatch of parsed jobs to the library and report assembly.

use std::path::Path;

use serde_json::{json, Value};

use crate::coupling::max_bistochastic_mass;
use crate::error::Error;
use crate::matrix::Grid;
use crate::model::{level_set, LevelMode, MassView, ProductFunction, ProductSet, SpaceRef};
use crate::scalar::{sum, Scalar, Tol};
use crate::sr_norm::sr_norm;
use crate::tau::tau_distance;
use crate::thickness::{thickness, ThicknessResult};
use crate::transport::{kantorovich, kr_norm, two_level_duality_check};
use crate::vc::{
    matrix_distribution_exact, matrix_distribution_sample, refinement_study, sampling_tolerance, step_fit_exists,
    vc_profile, Family, MatrixDistribution, StepFit,
};

use super::io::{emit_matrix, grid_value, object, scalar_array, scalar_value as sv, Loader, MatrixKind};
use super::{check, Command, JobError, JobSpec};

/// A finished report: the JSON document and, for matrix payloads, its CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub json: Value,
    pub csv: Option<String>,
}

fn path_text(p: &Path) -> Value {
    Value::String(p.display().to_string())
}

/// Header reference of a space named in `file`, as seen from the working
/// directory.
fn resolved(file: &Path, reference: &str) -> String {
    file.parent().unwrap_or(Path::new("")).join(reference).display().to_string()
}

pub(super) fn envelope(command: &str, mode_tol: Option<Tol>, inputs: Value, result: Value) -> Value {
    let mut doc = object([
        ("command", Value::String(command.to_string())),
        ("inputs", inputs),
        ("mode", Value::String(if mode_tol.is_some() { "float" } else { "exact" }.to_string())),
        ("result", result),
    ]);
    if let Some(tol) = mode_tol {
        doc["tolerance"] = sv(&tol.0);
    }
    doc
}

fn labels_of(space: &SpaceRef<impl Scalar>, picks: &[usize]) -> Value {
    Value::Array(picks.iter().map(|&i| Value::String(space.labels()[i].clone())).collect())
}

pub(super) fn thickness_block<S: Scalar>(z: &ProductSet<S>, th: &ThicknessResult<S>) -> Value {
    object([
        ("value", sv(&th.value)),
        ("cover_x", labels_of(z.x_space(), &th.cover_x)),
        ("cover_y", labels_of(z.y_space(), &th.cover_y)),
        ("fractional_f", scalar_array(&th.fractional_f)),
        ("fractional_g", scalar_array(&th.fractional_g)),
        ("flow", grid_value(&th.flow)),
    ])
}

fn duality<S: Scalar>(primal: &S, dual: &S) -> [(&'static str, Value); 3] {
    [("primal", sv(primal)), ("dual", sv(dual)), ("gap", sv(&(primal.clone() - dual.clone())))]
}

fn fit_value<S: Scalar>(fit: &StepFit<S>) -> Value {
    object([
        ("x_blocks", json!(fit.x_blocks)),
        ("y_blocks", json!(fit.y_blocks)),
        ("levels", grid_value(&fit.levels)),
        ("epsilon", sv(&fit.epsilon)),
        ("deviation", sv(&fit.deviation)),
        ("exceptional_x", sv(&fit.exceptional_x)),
        ("exceptional_y", sv(&fit.exceptional_y)),
        ("error", sv(&fit.error())),
    ])
}

fn support_value<S: Scalar>(d: &MatrixDistribution<S>) -> Value {
    Value::Array(d.support.iter().map(|(m, p)| object([("matrix", grid_value(m)), ("probability", sv(p))])).collect())
}

fn plan_csv<S: Scalar>(x_ref: &str, y_ref: &str, x: &SpaceRef<S>, y: &SpaceRef<S>, mass: &Grid<S>) -> Option<String> {
    Some(emit_matrix(MatrixKind::Plan, x_ref, y_ref, x.labels(), y.labels(), mass))
}

fn internal(e: Error) -> JobError {
    JobError { code: 2, message: e.to_string() }
}

fn need_classes(classes: usize) -> Result<(), JobError> {
    if classes == 0 {
        return Err(JobError::input("--classes must be at least 1"));
    }
    Ok(())
}

fn function_with_refs<S: Scalar>(
    loader: &mut Loader<S>,
    path: &Path,
) -> Result<(ProductFunction<S>, String, String), JobError> {
    let m = loader.matrix(path)?;
    let (xr, yr) = (resolved(path, &m.x_ref), resolved(path, &m.y_ref));
    Ok((m.into_function()?, xr, yr))
}

fn set_with_refs<S: Scalar>(loader: &mut Loader<S>, path: &Path) -> Result<(ProductSet<S>, String, String), JobError> {
    let m = loader.matrix(path)?;
    let (xr, yr) = (resolved(path, &m.x_ref), resolved(path, &m.y_ref));
    Ok((m.into_set()?, xr, yr))
}

pub(super) fn execute<S: Scalar>(job: &JobSpec) -> Result<Report, JobError> {
    let tol = Tol(job.tol);
    let mode_tol = (!S::is_exact()).then_some(tol);
    let mut loader = Loader::<S>::new(tol);
    let name = job.command.name();
    let done = |inputs: Value, result: Value, csv: Option<String>| -> Result<Report, JobError> {
        Ok(Report { json: envelope(name, mode_tol, inputs, result), csv })
    };
    match &job.command {
        Command::Thickness { set } => {
            let (z, xr, yr) = set_with_refs(&mut loader, set)?;
            let th = thickness(&z);
            th.verify(&z).map_err(internal)?;
            let flow_total = sum(th.flow.iter().cloned());
            let mut result = thickness_block(&z, &th);
            for (k, v) in duality(&th.value, &flow_total) {
                result[k] = v;
            }
            let csv = plan_csv(&xr, &yr, z.x_space(), z.y_space(), &th.flow);
            done(json!({ "set": path_text(set) }), result, csv)
        }
        Command::Tau { f, g } => {
            let f_fn = loader.function(f)?;
            let g_fn = loader.function(g)?;
            let t = tau_distance(&f_fn, &g_fn)?;
            let d = f_fn.sub(&g_fn)?.abs();
            let z = level_set(&d, &t.witness_level, LevelMode::Above);
            let th = thickness(&z);
            let result = object([
                ("value", sv(&t.value)),
                ("witness_level", sv(&t.witness_level)),
                ("witness_set_thickness", sv(&t.witness_set_thickness)),
                ("witness_cover", thickness_block(&z, &th)),
            ]);
            done(json!({ "f": path_text(f), "g": path_text(g) }), result, None)
        }
        Command::Srnorm { f } => {
            let (func, xr, yr) = function_with_refs(&mut loader, f)?;
            let r = sr_norm(&func);
            r.verify(&func).map_err(internal)?;
            let mut result = object([
                ("value", sv(&r.value)),
                ("majorant", object([("a", scalar_array(&r.majorant.a)), ("b", scalar_array(&r.majorant.b))])),
                ("dual_plan", grid_value(r.dual_plan.mass())),
            ]);
            for (k, v) in duality(&r.value, &r.dual_value) {
                result[k] = v;
            }
            let csv = plan_csv(&xr, &yr, func.x_space(), func.y_space(), r.dual_plan.mass());
            done(json!({ "f": path_text(f) }), result, csv)
        }
        Command::Hall { set } => {
            let (z, xr, yr) = set_with_refs(&mut loader, set)?;
            let h = max_bistochastic_mass(&z);
            if !h.plan.is_bistochastic() {
                return Err(JobError { code: 2, message: "completed plan is not bistochastic".into() });
            }
            let th = &h.thickness_certificate;
            let mut result = object([
                ("mass", sv(&h.mass)),
                ("plan", grid_value(h.plan.mass())),
                ("thickness", thickness_block(&z, th)),
            ]);
            for (k, v) in duality(&th.value, &h.mass) {
                result[k] = v;
            }
            let csv = plan_csv(&xr, &yr, z.x_space(), z.y_space(), h.plan.mass());
            done(json!({ "set": path_text(set) }), result, csv)
        }
        Command::Transport { metric: Some(metric), mu1, mu2, .. } => {
            let (Some(mu1), Some(mu2)) = (mu1, mu2) else {
                return Err(JobError::input("--metric needs --mu1 and --mu2"));
            };
            let rho = loader.metric(metric)?;
            let (a, b) = (loader.measure(mu1)?, loader.measure(mu2)?);
            let r = kantorovich(&a, &b, &rho)?;
            r.verify(&a, &b, &rho).map_err(internal)?;
            let mut result = object([
                ("cost", sv(&r.cost)),
                ("plan", grid_value(&r.plan)),
                ("potential", scalar_array(&r.potential)),
                ("slackness_residual", sv(&r.slackness_residual(&rho))),
            ]);
            for (k, v) in duality(&r.cost, &r.dual_value(&a, &b)) {
                result[k] = v;
            }
            let m = metric.display().to_string();
            let csv = plan_csv(&m, &m, rho.space(), rho.space(), &r.plan);
            let inputs = json!({ "metric": path_text(metric), "mu1": path_text(mu1), "mu2": path_text(mu2) });
            done(inputs, result, csv)
        }
        Command::Transport { cost: Some(cost), zx, zy, .. } => {
            let (c, xr, yr) = function_with_refs(&mut loader, cost)?;
            let z = match (zx, zy) {
                (Some(zx), Some(zy)) => Some((loader.measure(zx)?, loader.measure(zy)?)),
                _ => None,
            };
            let zref = z.as_ref().map(|(a, b)| (a.as_slice(), b.as_slice()));
            let r = two_level_duality_check(&c, zref)?;
            r.verify(&c, zref).map_err(internal)?;
            let mut result =
                object([("plan", grid_value(r.plan.mass())), ("w1", scalar_array(&r.w1)), ("w2", scalar_array(&r.w2))]);
            for (k, v) in duality(&r.primal, &r.dual) {
                result[k] = v;
            }
            let mut inputs = json!({ "cost": path_text(cost) });
            if let (Some(zx), Some(zy)) = (zx, zy) {
                inputs["zx"] = path_text(zx);
                inputs["zy"] = path_text(zy);
            }
            let csv = plan_csv(&xr, &yr, c.x_space(), c.y_space(), r.plan.mass());
            done(inputs, result, csv)
        }
        Command::Transport { .. } => Err(JobError::input("transport needs --metric or --cost")),
        Command::Krnorm { metric, signed } => {
            let rho = loader.metric(metric)?;
            let w = loader.measure(signed)?;
            let k = kr_norm(&w, &rho)?;
            let dual = sum(k.potential.iter().zip(&w).map(|(u, s)| u.clone() * s.clone()));
            let mut result = object([
                ("value", sv(&k.value)),
                ("potential", scalar_array(&k.potential)),
                ("plan", grid_value(&k.transport.plan)),
            ]);
            for (key, v) in duality(&k.value, &dual) {
                result[key] = v;
            }
            let m = metric.display().to_string();
            let csv = plan_csv(&m, &m, rho.space(), rho.space(), &k.transport.plan);
            done(json!({ "metric": path_text(metric), "signed": path_text(signed) }), result, csv)
        }
        Command::Stepfit { f, classes, eps } => {
            need_classes(*classes)?;
            let func = loader.function(f)?;
            let eps_v = S::parse(eps).map_err(|m| JobError::input(format!("--eps: {m}")))?;
            if !eps_v.is_pos(Tol(0.0)) {
                return Err(JobError::input("--eps must be positive"));
            }
            let out = step_fit_exists(&func, *classes, &eps_v);
            let result = object([
                ("exists", Value::Bool(out.fit.is_some())),
                ("exhaustive", Value::Bool(out.exhaustive)),
                ("classes", json!(classes)),
                ("epsilon", sv(&eps_v)),
                ("fit", out.fit.as_ref().map_or(Value::Null, fit_value)),
            ]);
            done(json!({ "f": path_text(f) }), result, None)
        }
        Command::Vcprofile { f, classes } => {
            need_classes(*classes)?;
            let func = loader.function(f)?;
            let p = vc_profile(&func, *classes);
            let result = object([
                ("value", sv(&p.value)),
                ("exact", Value::Bool(p.exact)),
                ("classes", json!(classes)),
                ("witness", fit_value(&p.witness)),
            ]);
            done(json!({ "f": path_text(f) }), result, None)
        }
        Command::Refine { family, sizes, classes } => {
            need_classes(*classes)?;
            let fam = Family::from_name(family).ok_or_else(|| {
                let known: Vec<&str> = Family::ALL.iter().map(|f| f.name()).collect();
                JobError::input(format!("unknown family {family:?}; known: {}", known.join(", ")))
            })?;
            if sizes.contains(&0) {
                return Err(JobError::input("grid sizes must be positive"));
            }
            let rows = refinement_study::<S>(fam, sizes, *classes);
            let rows = rows
                .iter()
                .map(|r| {
                    object([
                        ("n", json!(r.n)),
                        ("upper", sv(&r.upper)),
                        ("lower", r.lower.as_ref().map_or(Value::Null, sv)),
                        ("exact", Value::Bool(r.exact)),
                    ])
                })
                .collect();
            let result = object([
                ("family", Value::String(fam.name().to_string())),
                ("classes", json!(classes)),
                ("rows", Value::Array(rows)),
            ]);
            done(json!({ "family": family, "sizes": sizes }), result, None)
        }
        Command::Matdist { metric, k, count } => {
            let rho = loader.metric(metric)?;
            let inputs = json!({ "metric": path_text(metric) });
            let mut result = object([("k", json!(k))]);
            let Some(count) = count else {
                let d = matrix_distribution_exact(&rho, *k)?;
                result["support"] = support_value(&d);
                return done(inputs, result, None);
            };
            let seed = job.seed.expect("validated");
            let sample = matrix_distribution_sample(&rho, *k, *count, seed)?;
            let empirical = MatrixDistribution::empirical(*k, &sample);
            result["count"] = json!(count);
            result["seed"] = json!(seed);
            result["empirical"] = support_value(&empirical);
            result["exact_comparison"] = match matrix_distribution_exact(&rho, *k) {
                Ok(exact) => {
                    let tv = empirical.total_variation(&exact);
                    let bound = sampling_tolerance(exact.support.len(), *count);
                    object([
                        ("total_variation", sv(&tv)),
                        ("bound", sv(&bound)),
                        ("within_bound", Value::Bool(tv.to_f64() <= bound)),
                    ])
                }
                Err(Error::TooLarge(_)) => Value::Null,
                Err(e) => return Err(e.into()),
            };
            done(inputs, result, None)
        }
        Command::Check { report } => check::run(report),
    }
}
