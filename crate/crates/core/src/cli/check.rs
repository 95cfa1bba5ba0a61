//! Re-verification of emitted reports from their certificates alone.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::error::Error;
use crate::matrix::Grid;
use crate::model::{level_set, LevelMode, Plan, ProductFunction, ProductSet, SeparableMajorant, SpaceRef};
use crate::scalar::{sum, Rational, Scalar, Tol};
use crate::sr_norm::verify_certificates;
use crate::thickness::ThicknessResult;
use crate::transport::{TransportResult, TwoLevelReport};
use crate::vc::{evaluate_partition, StepFit};

use super::io::{object, parse_scalar_array, parse_scalar_value, Loader};
use super::{JobError, Report};

fn malformed(what: impl Into<String>) -> JobError {
    JobError::input(format!("malformed report: {}", what.into()))
}

fn failed(what: impl Into<String>) -> JobError {
    JobError { code: 2, message: format!("check failed: {}", what.into()) }
}

fn verify_err(e: Error) -> JobError {
    failed(e.to_string())
}

struct Doc<'a> {
    inputs: &'a Value,
    result: &'a Value,
}

impl<'a> Doc<'a> {
    fn path(&self, key: &str) -> Result<PathBuf, JobError> {
        self.inputs
            .get(key)
            .and_then(Value::as_str)
            .map(PathBuf::from)
            .ok_or_else(|| malformed(format!("inputs.{key}")))
    }

    fn has_input(&self, key: &str) -> bool {
        self.inputs.get(key).is_some()
    }
}

fn get<'v>(v: &'v Value, key: &str) -> Result<&'v Value, JobError> {
    v.get(key).ok_or_else(|| malformed(format!("missing {key}")))
}

fn scalar<S: Scalar>(v: &Value, key: &str) -> Result<S, JobError> {
    parse_scalar_value(get(v, key)?, || key.to_string()).map_err(|e| malformed(e.to_string()))
}

fn vector<S: Scalar>(v: &Value, key: &str, len: usize) -> Result<Vec<S>, JobError> {
    let out: Vec<S> = parse_scalar_array(get(v, key)?, "report", key).map_err(|e| malformed(e.to_string()))?;
    if out.len() != len {
        return Err(malformed(format!("{key} has {} entries, expected {len}", out.len())));
    }
    Ok(out)
}

fn grid<S: Scalar>(v: &Value, key: &str, shape: (usize, usize)) -> Result<Grid<S>, JobError> {
    let rows = get(v, key)?.as_array().ok_or_else(|| malformed(format!("{key} is not a matrix")))?;
    if rows.len() != shape.0 {
        return Err(malformed(format!("{key} has {} rows, expected {}", rows.len(), shape.0)));
    }
    let rows = rows
        .iter()
        .map(|r| parse_scalar_array(r, "report", key).map_err(|e| malformed(e.to_string())))
        .collect::<Result<Vec<Vec<S>>, _>>()?;
    if rows.iter().any(|r| r.len() != shape.1) {
        return Err(malformed(format!("{key} rows must have {} entries", shape.1)));
    }
    Ok(if shape.0 == 0 { Grid::filled(0, shape.1, S::zero()) } else { Grid::from_rows(rows)? })
}

fn indices<S: Scalar>(v: &Value, key: &str, space: &SpaceRef<S>) -> Result<Vec<usize>, JobError> {
    let items = get(v, key)?.as_array().ok_or_else(|| malformed(format!("{key} is not a label list")))?;
    items
        .iter()
        .map(|l| {
            l.as_str().and_then(|l| space.index_of(l)).ok_or_else(|| malformed(format!("{key}: unknown label {l}")))
        })
        .collect()
}

fn usizes(v: &Value, key: &str, len: usize) -> Result<Vec<usize>, JobError> {
    let items = get(v, key)?.as_array().ok_or_else(|| malformed(format!("{key} is not a list")))?;
    let out = items
        .iter()
        .map(|i| i.as_u64().map(|i| i as usize).ok_or_else(|| malformed(format!("{key}: expected integers"))))
        .collect::<Result<Vec<_>, _>>()?;
    if out.len() != len {
        return Err(malformed(format!("{key} has {} entries, expected {len}", out.len())));
    }
    Ok(out)
}

fn expect_eq<S: Scalar>(what: &str, claimed: &S, actual: &S, tol: Tol) -> Result<(), JobError> {
    if claimed.eq_tol(actual, tol) {
        Ok(())
    } else {
        Err(failed(format!(
            "{what}: report says {}, certificate gives {}",
            claimed.to_report_string(),
            actual.to_report_string()
        )))
    }
}

/// `primal`, `dual` and `gap` agree with the certified values and the gap
/// vanishes.
fn duality<S: Scalar>(result: &Value, primal: &S, dual: &S, tol: Tol) -> Result<(), JobError> {
    expect_eq("primal", &scalar::<S>(result, "primal")?, primal, tol)?;
    expect_eq("dual", &scalar::<S>(result, "dual")?, dual, tol)?;
    let gap = scalar::<S>(result, "gap")?;
    expect_eq("gap", &gap, &(primal.clone() - dual.clone()), tol)?;
    expect_eq("gap", &gap, &S::zero(), tol)
}

fn thickness_certificate<S: Scalar>(block: &Value, z: &ProductSet<S>) -> Result<ThicknessResult<S>, JobError> {
    let (n, m) = (z.x_space().len(), z.y_space().len());
    let th = ThicknessResult {
        value: scalar(block, "value")?,
        cover_x: indices(block, "cover_x", z.x_space())?,
        cover_y: indices(block, "cover_y", z.y_space())?,
        fractional_f: vector(block, "fractional_f", n)?,
        fractional_g: vector(block, "fractional_g", m)?,
        flow: grid(block, "flow", (n, m))?,
    };
    th.verify(z).map_err(|e| failed(e.to_string()))?;
    Ok(th)
}

fn fit_certificate<S: Scalar>(v: &Value, n: usize, m: usize, classes: usize) -> Result<StepFit<S>, JobError> {
    Ok(StepFit {
        x_blocks: usizes(v, "x_blocks", n)?,
        y_blocks: usizes(v, "y_blocks", m)?,
        levels: grid(v, "levels", (classes, classes))?,
        epsilon: scalar(v, "epsilon")?,
        deviation: scalar(v, "deviation")?,
        exceptional_x: scalar(v, "exceptional_x")?,
        exceptional_y: scalar(v, "exceptional_y")?,
        exhaustive: false,
    })
}

/// Levels and error components of a claimed partition, recomputed from `f`.
fn recompute_fit<S: Scalar>(f: &ProductFunction<S>, cert: &StepFit<S>, tol: Tol) -> Result<StepFit<S>, JobError> {
    let classes = cert.classes();
    if cert.x_blocks.iter().chain(&cert.y_blocks).any(|&c| c > classes) {
        return Err(failed("block label exceeds the class count"));
    }
    let direct = evaluate_partition(f, classes, cert.x_blocks.clone(), cert.y_blocks.clone(), S::zero(), false);
    expect_eq("deviation", &cert.deviation, &direct.deviation, tol)?;
    expect_eq("exceptional_x", &cert.exceptional_x, &direct.exceptional_x, tol)?;
    expect_eq("exceptional_y", &cert.exceptional_y, &direct.exceptional_y, tol)?;
    if let Some(((a, b), _)) = direct.levels.indexed().find(|((a, b), v)| !v.eq_tol(&cert.levels[(*a, *b)], tol)) {
        return Err(failed(format!("level of block ({}, {}) differs", a + 1, b + 1)));
    }
    Ok(direct)
}

fn classes_of(result: &Value) -> Result<usize, JobError> {
    match get(result, "classes")?.as_u64() {
        Some(c) if c >= 1 => Ok(c as usize),
        _ => Err(malformed("classes must be a positive integer")),
    }
}

fn verify<S: Scalar>(command: &str, doc: &Doc, tol: Tol) -> Result<(), JobError> {
    let mut loader = Loader::<S>::new(tol);
    let r = doc.result;
    match command {
        "thickness" => {
            let z = loader.set(&doc.path("set")?)?;
            let th = thickness_certificate(r, &z)?;
            duality(r, &th.value, &sum(th.flow.iter().cloned()), tol)
        }
        "hall" => {
            let z = loader.set(&doc.path("set")?)?;
            let th = thickness_certificate(get(r, "thickness")?, &z)?;
            let (x, y) = (z.x_space().clone(), z.y_space().clone());
            let plan = Plan::new(x.clone(), y.clone(), grid(r, "plan", (x.len(), y.len()))?).map_err(verify_err)?;
            if !plan.is_bistochastic() {
                return Err(failed("plan marginals differ from the space weights"));
            }
            let mass = scalar::<S>(r, "mass")?;
            expect_eq("mass", &mass, &plan.mass_on(&z), tol)?;
            duality(r, &th.value, &mass, tol)
        }
        "srnorm" => {
            let f = loader.function(&doc.path("f")?)?;
            let (n, m) = f.shape();
            let maj = get(r, "majorant")?;
            let majorant = SeparableMajorant::new(vector(maj, "a", n)?, vector(maj, "b", m)?).map_err(verify_err)?;
            let plan = Plan::new(f.x_space().clone(), f.y_space().clone(), grid(r, "dual_plan", (n, m))?)
                .map_err(verify_err)?;
            let (primal, dual) = (scalar::<S>(r, "primal")?, scalar::<S>(r, "dual")?);
            verify_certificates(&f, &majorant, &plan, &primal, &dual).map_err(verify_err)?;
            expect_eq("value", &scalar::<S>(r, "value")?, &primal, tol)?;
            duality(r, &primal, &dual, tol)
        }
        "transport" if doc.has_input("metric") => {
            let rho = loader.metric(&doc.path("metric")?)?;
            let (a, b) = (loader.measure(&doc.path("mu1")?)?, loader.measure(&doc.path("mu2")?)?);
            let n = rho.len();
            let cert = TransportResult {
                cost: scalar(r, "cost")?,
                plan: grid(r, "plan", (n, n))?,
                potential: vector(r, "potential", n)?,
            };
            cert.verify(&a, &b, &rho).map_err(verify_err)?;
            duality(r, &cert.cost, &cert.dual_value(&a, &b), tol)
        }
        "transport" => {
            let c = loader.function(&doc.path("cost")?)?;
            let z = match (doc.has_input("zx"), doc.has_input("zy")) {
                (true, true) => Some((loader.measure(&doc.path("zx")?)?, loader.measure(&doc.path("zy")?)?)),
                _ => None,
            };
            let zref = z.as_ref().map(|(a, b)| (a.as_slice(), b.as_slice()));
            let (n, m) = c.shape();
            let cert = TwoLevelReport {
                primal: scalar(r, "primal")?,
                dual: scalar(r, "dual")?,
                gap: scalar(r, "gap")?,
                plan: Plan::new(c.x_space().clone(), c.y_space().clone(), grid(r, "plan", (n, m))?)
                    .map_err(verify_err)?,
                w1: vector(r, "w1", n)?,
                w2: vector(r, "w2", m)?,
            };
            cert.verify(&c, zref).map_err(verify_err)?;
            duality(r, &cert.primal, &cert.dual, tol)
        }
        "krnorm" => {
            let rho = loader.metric(&doc.path("metric")?)?;
            let w = loader.measure(&doc.path("signed")?)?;
            let n = rho.len();
            if w.len() != n {
                return Err(JobError::input("signed measure and metric have different sizes"));
            }
            let zero = S::zero();
            let plus: Vec<S> = w.iter().map(|s| S::max_of(s, &zero)).collect();
            let minus: Vec<S> = w.iter().map(|s| S::max_of(&-s.clone(), &zero)).collect();
            let cert = TransportResult {
                cost: scalar(r, "value")?,
                plan: grid(r, "plan", (n, n))?,
                potential: vector(r, "potential", n)?,
            };
            cert.verify(&plus, &minus, &rho).map_err(verify_err)?;
            let dual = sum(cert.potential.iter().zip(&w).map(|(u, s)| u.clone() * s.clone()));
            duality(r, &cert.cost, &dual, tol)
        }
        "tau" => {
            let f = loader.function(&doc.path("f")?)?;
            let g = loader.function(&doc.path("g")?)?;
            let d = f.sub(&g)?.abs();
            let level = scalar::<S>(r, "witness_level")?;
            let z = level_set(&d, &level, LevelMode::Above);
            let th = thickness_certificate(get(r, "witness_cover")?, &z)?;
            expect_eq("witness_set_thickness", &scalar::<S>(r, "witness_set_thickness")?, &th.value, tol)?;
            expect_eq("value", &scalar::<S>(r, "value")?, &S::max_of(&level, &th.value), tol)
        }
        "stepfit" => {
            let f = loader.function(&doc.path("f")?)?;
            let fit = get(r, "fit")?;
            if fit.is_null() {
                return Err(JobError::input("report carries no certificate: no fit was found"));
            }
            let (n, m) = f.shape();
            let cert = fit_certificate::<S>(fit, n, m, classes_of(r)?)?;
            expect_eq("epsilon", &scalar::<S>(r, "epsilon")?, &cert.epsilon, tol)?;
            let direct = recompute_fit(&f, &cert, tol)?;
            expect_eq("error", &scalar::<S>(fit, "error")?, &direct.error(), tol)?;
            if !cert.verify(&f) {
                return Err(failed("step function does not fit within epsilon"));
            }
            Ok(())
        }
        "vcprofile" => {
            let f = loader.function(&doc.path("f")?)?;
            let (n, m) = f.shape();
            let classes = classes_of(r)?;
            let cert = fit_certificate::<S>(get(r, "witness")?, n, m, classes)?;
            let direct = recompute_fit(&f, &cert, tol)?;
            expect_eq("value", &scalar::<S>(r, "value")?, &direct.error(), tol)
        }
        "refine" | "matdist" => Err(JobError::input(format!("{command} reports carry no certificate"))),
        other => Err(malformed(format!("unknown command {other:?}"))),
    }
}

pub(super) fn run(path: &Path) -> Result<Report, JobError> {
    let text = fs::read_to_string(path).map_err(|e| JobError::input(format!("{}: {e}", path.display())))?;
    let doc: Value = serde_json::from_str(&text)
        .map_err(|e| malformed(format!("{}:{}:{}: {e}", path.display(), e.line(), e.column())))?;
    let command = get(&doc, "command")?.as_str().ok_or_else(|| malformed("command"))?;
    let parts = Doc { inputs: get(&doc, "inputs")?, result: get(&doc, "result")? };
    match get(&doc, "mode")?.as_str() {
        Some("exact") => verify::<Rational>(command, &parts, Tol::DEFAULT)?,
        Some("float") => {
            let tol = scalar::<f64>(&doc, "tolerance")?;
            if tol.is_nan() || tol <= 0.0 {
                return Err(malformed("tolerance must be positive"));
            }
            verify::<f64>(command, &parts, Tol(tol))?
        }
        _ => return Err(malformed("mode")),
    }
    let json = object([
        ("command", Value::String("check".into())),
        ("checked", Value::String(command.to_string())),
        ("report", Value::String(path.display().to_string())),
        ("status", Value::String("verified".into())),
    ]);
    Ok(Report { json, csv: None })
}
