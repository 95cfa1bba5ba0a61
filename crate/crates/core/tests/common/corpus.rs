use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use vcont::cli::io::{
    emit_matrix, emit_measure, emit_metric, emit_space, parse_matrix, parse_measure, parse_metric, parse_space,
};
use vcont::{Rational, SpaceRef, Tol};

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn fixture_names() -> Vec<String> {
    let mut names: Vec<String> =
        fs::read_dir(fixtures()).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    names
}

/// Runs the binary inside the fixture directory.
pub fn vcont(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vcont")).current_dir(fixtures()).args(args).output().unwrap()
}

pub const JOBS: &[&[&str]] = &[
    &["thickness", "--set", "band_set.csv"],
    &["thickness", "--set", "empty_set.csv"],
    &["thickness", "--set", "column_set.csv", "--format", "csv"],
    &["hall", "--set", "column_set.csv"],
    &["srnorm", "--f", "mixed_fn.csv"],
    &["srnorm", "--f", "single_cell.csv", "--format", "text"],
    &["srnorm", "--f", "mixed_fn.csv", "--mode", "float"],
    &["tau", "--f", "mixed_fn.csv", "--g", "zero_fn.csv"],
    &["transport", "--metric", "path3.json", "--mu1", "mu_left.json", "--mu2", "mu_right.json"],
    &["transport", "--cost", "cost.csv"],
    &["transport", "--cost", "cost.csv", "--zx", "zx.json", "--zy", "zy.json"],
    &["krnorm", "--metric", "path3.json", "--signed", "signed.json"],
    &["stepfit", "--f", "triangle8.csv", "--classes", "4", "--eps", "3/10"],
    &["vcprofile", "--f", "triangle8.csv", "--classes", "4"],
    &["vcprofile", "--f", "xy8.csv", "--classes", "4", "--mode", "float"],
    &["refine", "--family", "metric_kernel", "--sizes", "8,16", "--classes", "4"],
    &["matdist", "--metric", "metric4.json", "--k", "2"],
    &["matdist", "--metric", "metric4.json", "--k", "2", "--count", "2000", "--seed", "3"],
];

pub fn resolve(dir: &Path) -> impl FnMut(&str) -> vcont::Result<SpaceRef<Rational>> + '_ {
    move |r| Ok(parse_space::<Rational>(&fs::read_to_string(dir.join(r)).unwrap(), r, Tol::DEFAULT)?.into_ref())
}

/// Emits a parsed fixture back in the same format.
pub fn reemit(dir: &Path, name: &str, text: &str) -> String {
    if name.ends_with(".csv") {
        let m = parse_matrix::<Rational>(text, name, resolve(dir)).unwrap();
        let again = emit_matrix(m.kind, &m.x_ref, &m.y_ref, m.x.labels(), m.y.labels(), &m.values);
        assert_eq!(parse_matrix::<Rational>(&again, name, resolve(dir)).unwrap(), m);
        again
    } else if text.contains("\"dist\"") {
        emit_metric(&parse_metric::<Rational>(text, name, Tol::DEFAULT).unwrap())
    } else if text.contains("\"labels\"") {
        emit_space(&parse_space::<Rational>(text, name, Tol::DEFAULT).unwrap())
    } else {
        emit_measure(&parse_measure::<Rational>(text, name).unwrap())
    }
}
