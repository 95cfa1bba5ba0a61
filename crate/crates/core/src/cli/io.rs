//! Input files and their canonical serialization.
//!
//! Spaces, metrics and measures are JSON objects:
//!
//! ```text
//! {"labels": ["a", "b"], "weights": ["1/2", "1/2"]}
//! {"labels": ["a", "b"], "weights": ["1/2", "1/2"], "dist": [["0", "1"], ["1", "0"]]}
//! {"weights": ["1/4", "3/4"]}
//! ```
//!
//! Numbers are `p/q` strings, decimal strings or JSON numbers. Dense
//! matrices are CSV: a one-line JSON header `{"kind", "x", "y"}` naming the
//! factor space files (relative to the CSV), a row of Y labels behind a
//! corner cell, then one row per X atom led by its label.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::matrix::Grid;
use crate::model::{DiscreteSpace, MetricMatrix, Plan, ProductFunction, ProductSet, SpaceRef};
use crate::scalar::{Scalar, Tol};

pub fn scalar_value<S: Scalar>(v: &S) -> Value {
    Value::String(v.to_report_string())
}

pub fn scalar_array<S: Scalar>(v: &[S]) -> Value {
    Value::Array(v.iter().map(scalar_value).collect())
}

pub fn grid_value<S: Scalar>(g: &Grid<S>) -> Value {
    Value::Array((0..g.rows()).map(|i| scalar_array(g.row(i))).collect())
}

/// Indented JSON with a trailing newline. Object keys come out sorted and
/// arrays of scalars stay on one line.
pub fn to_json_text(v: &Value) -> String {
    let mut out = String::new();
    write_json(v, 0, &mut out);
    out.push('\n');
    out
}

fn is_flat(items: &[Value]) -> bool {
    items.iter().all(|i| !i.is_array() && !i.is_object())
}

fn write_json(v: &Value, depth: usize, out: &mut String) {
    let pad = |d: usize| "  ".repeat(d);
    match v {
        Value::Array(items) if is_flat(items) => {
            let cells: Vec<String> = items.iter().map(Value::to_string).collect();
            out.push_str(&format!("[{}]", cells.join(", ")));
        }
        Value::Array(items) => {
            out.push_str("[\n");
            for (k, item) in items.iter().enumerate() {
                out.push_str(&pad(depth + 1));
                write_json(item, depth + 1, out);
                out.push_str(if k + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(depth));
            out.push(']');
        }
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Object(map) => {
            out.push_str("{\n");
            for (k, (key, item)) in map.iter().enumerate() {
                out.push_str(&format!("{}{}: ", pad(depth + 1), Value::String(key.clone())));
                write_json(item, depth + 1, out);
                out.push_str(if k + 1 < map.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(depth));
            out.push('}');
        }
        scalar => out.push_str(&scalar.to_string()),
    }
}

fn parse_json(text: &str, origin: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::parse(format!("{origin}:{}:{}", e.line(), e.column()), e.to_string()))
}

fn field<'a>(obj: &'a Value, name: &str, origin: &str) -> Result<&'a Value> {
    obj.get(name).ok_or_else(|| Error::parse(format!("{origin}: {name}"), "missing field"))
}

pub fn parse_scalar_value<S: Scalar>(v: &Value, at: impl FnOnce() -> String) -> Result<S> {
    let parsed = match v {
        Value::String(s) => S::parse(s),
        Value::Number(n) => S::parse(&n.to_string()),
        _ => Err("expected a number or a numeric string".to_string()),
    };
    parsed.map_err(|m| Error::parse(at(), m))
}

pub fn parse_scalar_array<S: Scalar>(v: &Value, origin: &str, name: &str) -> Result<Vec<S>> {
    let items = v.as_array().ok_or_else(|| Error::parse(format!("{origin}: {name}"), "expected an array"))?;
    items.iter().enumerate().map(|(k, item)| parse_scalar_value(item, || format!("{origin}: {name}[{k}]"))).collect()
}

fn parse_grid<S: Scalar>(v: &Value, origin: &str, name: &str) -> Result<Grid<S>> {
    let rows = v.as_array().ok_or_else(|| Error::parse(format!("{origin}: {name}"), "expected an array of rows"))?;
    let rows = rows
        .iter()
        .enumerate()
        .map(|(i, r)| parse_scalar_array(r, origin, &format!("{name}[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    if rows.is_empty() {
        return Ok(Grid::filled(0, 0, S::zero()));
    }
    Grid::from_rows(rows)
}

fn labels_of(obj: &Value, n: usize, origin: &str) -> Result<Vec<String>> {
    match obj.get("labels") {
        None => Ok((0..n).map(|i| i.to_string()).collect()),
        Some(Value::Array(items)) => items
            .iter()
            .enumerate()
            .map(|(k, l)| {
                l.as_str()
                    .map(str::to_string)
                    .ok_or_else(|| Error::parse(format!("{origin}: labels[{k}]"), "expected a string"))
            })
            .collect(),
        Some(_) => Err(Error::parse(format!("{origin}: labels"), "expected an array of strings")),
    }
}

fn space_from_value<S: Scalar>(v: &Value, origin: &str, tol: Tol) -> Result<DiscreteSpace<S>> {
    let weights = parse_scalar_array(field(v, "weights", origin)?, origin, "weights")?;
    let labels = labels_of(v, weights.len(), origin)?;
    DiscreteSpace::raw(labels, weights).with_tol(tol).validated()
}

/// Parses a space file. Metric files are accepted too; `dist` is ignored.
pub fn parse_space<S: Scalar>(text: &str, origin: &str, tol: Tol) -> Result<DiscreteSpace<S>> {
    space_from_value(&parse_json(text, origin)?, origin, tol)
}

pub fn emit_space<S: Scalar>(space: &DiscreteSpace<S>) -> String {
    to_json_text(&space_value(space))
}

fn space_value<S: Scalar>(space: &DiscreteSpace<S>) -> Value {
    json!({ "labels": space.labels(), "weights": scalar_array(space.weights()) })
}

pub fn parse_metric<S: Scalar>(text: &str, origin: &str, tol: Tol) -> Result<MetricMatrix<S>> {
    let v = parse_json(text, origin)?;
    let space = space_from_value(&v, origin, tol)?.into_ref();
    let dist = parse_grid(field(&v, "dist", origin)?, origin, "dist")?;
    MetricMatrix::new(space, dist)
}

pub fn emit_metric<S: Scalar>(m: &MetricMatrix<S>) -> String {
    let mut v = space_value(m.space());
    v["dist"] = grid_value(m.dist());
    to_json_text(&v)
}

/// Weights of a (possibly signed or unnormalized) measure.
pub fn parse_measure<S: Scalar>(text: &str, origin: &str) -> Result<Vec<S>> {
    let v = parse_json(text, origin)?;
    parse_scalar_array(field(&v, "weights", origin)?, origin, "weights")
}

pub fn emit_measure<S: Scalar>(weights: &[S]) -> String {
    to_json_text(&json!({ "weights": scalar_array(weights) }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixKind {
    Function,
    Set,
    Plan,
}

impl MatrixKind {
    pub fn name(self) -> &'static str {
        match self {
            MatrixKind::Function => "function",
            MatrixKind::Set => "set",
            MatrixKind::Plan => "plan",
        }
    }

    fn from_name(name: &str) -> Option<Self> {
        [MatrixKind::Function, MatrixKind::Set, MatrixKind::Plan].into_iter().find(|k| k.name() == name)
    }
}

/// A parsed matrix file. Set cells hold 0 or 1.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixFile<S> {
    pub kind: MatrixKind,
    /// Header references, as written.
    pub x_ref: String,
    pub y_ref: String,
    pub x: SpaceRef<S>,
    pub y: SpaceRef<S>,
    pub values: Grid<S>,
}

impl<S: Scalar> MatrixFile<S> {
    fn expect_kind(&self, kind: MatrixKind) -> Result<()> {
        if self.kind == kind {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("expected a {} matrix, found {}", kind.name(), self.kind.name())))
        }
    }

    pub fn into_function(self) -> Result<ProductFunction<S>> {
        self.expect_kind(MatrixKind::Function)?;
        ProductFunction::new(self.x, self.y, self.values)
    }

    pub fn into_set(self) -> Result<ProductSet<S>> {
        self.expect_kind(MatrixKind::Set)?;
        let members = self.values.map(|v| !v.is_zero_exact());
        ProductSet::new(self.x, self.y, members)
    }

    pub fn into_plan(self) -> Result<Plan<S>> {
        self.expect_kind(MatrixKind::Plan)?;
        Plan::new(self.x, self.y, self.values)
    }
}

fn csv_error(origin: &str, e: csv::Error) -> Error {
    let location = match e.position() {
        Some(p) => format!("{origin}:{}", p.line() + 1),
        None => origin.to_string(),
    };
    Error::parse(location, e.to_string())
}

/// Parses a matrix file; `resolve` turns header references into spaces.
pub fn parse_matrix<S: Scalar>(
    text: &str,
    origin: &str,
    mut resolve: impl FnMut(&str) -> Result<SpaceRef<S>>,
) -> Result<MatrixFile<S>> {
    let (header, body) = text.split_once('\n').unwrap_or((text, ""));
    let header = parse_json(header.trim_end_matches('\r'), &format!("{origin} header"))?;
    let text_field = |name: &str| -> Result<String> {
        field(&header, name, origin)?
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| Error::parse(format!("{origin}:1: {name}"), "expected a string"))
    };
    let kind_name = text_field("kind")?;
    let kind = MatrixKind::from_name(&kind_name)
        .ok_or_else(|| Error::parse(format!("{origin}:1: kind"), format!("unknown matrix kind {kind_name:?}")))?;
    let (x_ref, y_ref) = (text_field("x")?, text_field("y")?);
    let x = resolve(&x_ref)?;
    let y = resolve(&y_ref)?;

    let mut reader = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(body.as_bytes());
    let mut records = reader.records();
    let labels = match records.next() {
        Some(r) => r.map_err(|e| csv_error(origin, e))?,
        None => return Err(Error::parse(format!("{origin}:2"), "missing the Y label row")),
    };
    let y_labels: Vec<&str> = labels.iter().skip(1).collect();
    if y_labels != y.labels().iter().map(String::as_str).collect::<Vec<_>>() {
        return Err(Error::dims(format!("{origin}:2: column labels differ from the Y space labels")));
    }
    let mut rows = Vec::new();
    for (i, record) in records.enumerate() {
        let record = record.map_err(|e| csv_error(origin, e))?;
        let line = i + 3;
        if record.len() != y.len() + 1 {
            return Err(Error::dims(format!("{origin}:{line}: {} cells, expected {}", record.len(), y.len() + 1)));
        }
        match x.labels().get(i) {
            Some(l) if l == &record[0] => {}
            _ => return Err(Error::dims(format!("{origin}:{line}: row label {:?} out of order", &record[0]))),
        }
        let row = record
            .iter()
            .skip(1)
            .enumerate()
            .map(|(j, cell)| {
                let at = || format!("{origin}:{line}: column {}", j + 2);
                match kind {
                    MatrixKind::Set => match cell.trim() {
                        "0" => Ok(S::zero()),
                        "1" => Ok(S::one()),
                        other => Err(Error::parse(at(), format!("set cells are 0 or 1, found {other:?}"))),
                    },
                    _ => S::parse(cell).map_err(|m| Error::parse(at(), m)),
                }
            })
            .collect::<Result<Vec<S>>>()?;
        rows.push(row);
    }
    if rows.len() != x.len() {
        return Err(Error::dims(format!("{origin}: {} rows, the X space has {} atoms", rows.len(), x.len())));
    }
    let values = if rows.is_empty() { Grid::filled(0, y.len(), S::zero()) } else { Grid::from_rows(rows)? };
    Ok(MatrixFile { kind, x_ref, y_ref, x, y, values })
}

pub fn emit_matrix<S: Scalar>(
    kind: MatrixKind,
    x_ref: &str,
    y_ref: &str,
    x_labels: &[String],
    y_labels: &[String],
    values: &Grid<S>,
) -> String {
    let header = json!({ "kind": kind.name(), "x": x_ref, "y": y_ref });
    let mut out = serde_json::to_string(&header).expect("header serializes");
    out.push('\n');
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let corner = std::iter::once("");
    w.write_record(corner.chain(y_labels.iter().map(String::as_str))).expect("in-memory write");
    for (i, label) in x_labels.iter().enumerate() {
        let cells = values.row(i).iter().map(|v| match kind {
            MatrixKind::Set => (if v.is_zero_exact() { "0" } else { "1" }).to_string(),
            _ => v.to_report_string(),
        });
        w.write_record(std::iter::once(label.clone()).chain(cells)).expect("in-memory write");
    }
    out.push_str(&String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input"));
    out
}

pub fn emit_function<S: Scalar>(f: &ProductFunction<S>, x_ref: &str, y_ref: &str) -> String {
    emit_matrix(MatrixKind::Function, x_ref, y_ref, f.x_space().labels(), f.y_space().labels(), f.values())
}

pub fn emit_set<S: Scalar>(z: &ProductSet<S>, x_ref: &str, y_ref: &str) -> String {
    let values = z.members().map(|&b| if b { S::one() } else { S::zero() });
    emit_matrix(MatrixKind::Set, x_ref, y_ref, z.x_space().labels(), z.y_space().labels(), &values)
}

/// Loads files relative to the working directory, sharing spaces that
/// resolve to the same path.
#[derive(Debug)]
pub struct Loader<S> {
    tol: Tol,
    spaces: HashMap<PathBuf, SpaceRef<S>>,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

impl<S: Scalar> Loader<S> {
    pub fn new(tol: Tol) -> Self {
        Loader { tol, spaces: HashMap::new() }
    }

    pub fn space(&mut self, path: &Path) -> Result<SpaceRef<S>> {
        let key = fs::canonicalize(path).unwrap_or_else(|_| path.to_path_buf());
        if let Some(s) = self.spaces.get(&key) {
            return Ok(s.clone());
        }
        let space = parse_space(&read(path)?, &path.display().to_string(), self.tol)?.into_ref();
        self.spaces.insert(key, space.clone());
        Ok(space)
    }

    pub fn metric(&mut self, path: &Path) -> Result<MetricMatrix<S>> {
        let m = parse_metric(&read(path)?, &path.display().to_string(), self.tol)?;
        let key = fs::canonicalize(path).unwrap_or_else(|_| path.to_path_buf());
        let space = self.spaces.entry(key).or_insert_with(|| m.space().clone()).clone();
        MetricMatrix::new(space, m.dist().clone())
    }

    pub fn measure(&mut self, path: &Path) -> Result<Vec<S>> {
        parse_measure(&read(path)?, &path.display().to_string())
    }

    pub fn matrix(&mut self, path: &Path) -> Result<MatrixFile<S>> {
        let text = read(path)?;
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        parse_matrix(&text, &path.display().to_string(), |r| self.space(&dir.join(r)))
    }

    pub fn function(&mut self, path: &Path) -> Result<ProductFunction<S>> {
        self.matrix(path)?.into_function()
    }

    pub fn set(&mut self, path: &Path) -> Result<ProductSet<S>> {
        self.matrix(path)?.into_set()
    }
}

/// Fields of a JSON object as a sorted map.
pub fn object(entries: impl IntoIterator<Item = (&'static str, Value)>) -> Value {
    Value::Object(entries.into_iter().map(|(k, v)| (k.to_string(), v)).collect::<Map<String, Value>>())
}
