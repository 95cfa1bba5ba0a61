//! Command-line front end. One job per invocation; output is byte-stable
//! for fixed inputs, mode, tolerance and seed.

mod check;
mod commands;
pub mod io;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::Value;

use crate::error::Error;
use crate::scalar::{Mode, Rational, Tol};

pub use commands::Report;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    match s {
        "exact" => Ok(Mode::Exact),
        "float" => Ok(Mode::Float),
        other => Err(format!("unknown mode {other:?}, expected exact or float")),
    }
}

#[derive(Debug, Clone, Parser)]
#[command(name = "vcont", version, about = "Thickness, regulator norms, transport duality and step-function fits")]
pub struct JobSpec {
    /// Arithmetic: exact rationals or f64 with an absolute tolerance.
    #[arg(long, global = true, value_parser = parse_mode, default_value = "exact")]
    pub mode: Mode,
    /// Absolute tolerance of float mode.
    #[arg(long, global = true, default_value_t = Tol::DEFAULT.0)]
    pub tol: f64,
    /// Seed for sampling commands.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Worker threads for internal parallelism; output does not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Thickness of a set, with cover and flow certificates.
    Thickness {
        #[arg(long)]
        set: PathBuf,
    },
    /// Distance in thickness between two functions.
    Tau {
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        g: PathBuf,
    },
    /// Regulator norm with majorant and subbistochastic certificates.
    Srnorm {
        #[arg(long)]
        f: PathBuf,
    },
    /// Largest mass a bistochastic plan puts on a set.
    Hall {
        #[arg(long)]
        set: PathBuf,
    },
    /// Kantorovich transport between two measures on a metric space, or the
    /// two-level transport problem of a cost matrix.
    Transport {
        #[arg(long, conflicts_with = "cost", requires_all = ["mu1", "mu2"])]
        metric: Option<PathBuf>,
        #[arg(long)]
        mu1: Option<PathBuf>,
        #[arg(long)]
        mu2: Option<PathBuf>,
        #[arg(long, required_unless_present = "metric")]
        cost: Option<PathBuf>,
        /// Reweighting of the X marginal (with --cost).
        #[arg(long, requires_all = ["cost", "zy"])]
        zx: Option<PathBuf>,
        #[arg(long, requires_all = ["cost", "zx"])]
        zy: Option<PathBuf>,
    },
    /// Kantorovich–Rubinstein norm of a balanced signed measure.
    Krnorm {
        #[arg(long)]
        metric: PathBuf,
        #[arg(long)]
        signed: PathBuf,
    },
    /// Whether an N-class step function fits within eps.
    Stepfit {
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        classes: usize,
        #[arg(long)]
        eps: String,
    },
    /// Least partition error with N classes.
    Vcprofile {
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        classes: usize,
    },
    /// Profiles of a kernel family sampled on refining grids.
    Refine {
        #[arg(long)]
        family: String,
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        #[arg(long)]
        classes: usize,
    },
    /// Distribution of the k x k distance matrix at random points; exact
    /// unless --count asks for a sample.
    Matdist {
        #[arg(long)]
        metric: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        count: Option<usize>,
    },
    /// Re-verifies the certificates of an emitted JSON report.
    Check {
        #[arg(long)]
        report: PathBuf,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Thickness { .. } => "thickness",
            Command::Tau { .. } => "tau",
            Command::Srnorm { .. } => "srnorm",
            Command::Hall { .. } => "hall",
            Command::Transport { .. } => "transport",
            Command::Krnorm { .. } => "krnorm",
            Command::Stepfit { .. } => "stepfit",
            Command::Vcprofile { .. } => "vcprofile",
            Command::Refine { .. } => "refine",
            Command::Matdist { .. } => "matdist",
            Command::Check { .. } => "check",
        }
    }
}

/// Exit status and captured streams of one job.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome { code: 0, stdout, stderr: String::new() }
    }

    fn fail(code: i32, message: String) -> Self {
        Outcome { code, stdout: String::new(), stderr: format!("error: {message}\n") }
    }
}

/// A failed job: 1 for bad input, 2 for an internal fault or a failed check.
#[derive(Debug, Clone, PartialEq)]
pub struct JobError {
    pub code: i32,
    pub message: String,
}

impl From<Error> for JobError {
    fn from(e: Error) -> Self {
        JobError { code: if e.is_input_error() { 1 } else { 2 }, message: e.to_string() }
    }
}

impl JobError {
    fn input(message: impl Into<String>) -> Self {
        JobError { code: 1, message: message.into() }
    }
}

impl JobSpec {
    pub fn validate(&self) -> Result<(), JobError> {
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(JobError::input("tolerance must be positive"));
        }
        if let Command::Matdist { count: Some(_), .. } = self.command {
            if self.seed.is_none() {
                return Err(JobError::input("sampling needs --seed"));
            }
        }
        if self.threads == Some(0) {
            return Err(JobError::input("--threads must be at least 1"));
        }
        Ok(())
    }

    fn execute(&self) -> Result<Report, JobError> {
        match self.mode {
            Mode::Exact => commands::execute::<Rational>(self),
            Mode::Float => commands::execute::<f64>(self),
        }
    }
}

fn render(report: &Report, format: Format) -> String {
    match format {
        Format::Json => io::to_json_text(&report.json),
        Format::Csv => report.csv.clone().unwrap_or_else(|| scalar_csv(&report.json)),
        Format::Text => text_summary(&report.json),
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(map) => map.iter().for_each(|(k, v)| flatten(&key(k), v, out)),
        Value::Array(items) if items.iter().all(|i| !i.is_array() && !i.is_object()) => {
            let cells: Vec<String> = items.iter().map(plain).collect();
            out.push((prefix.to_string(), cells.join(" ")));
        }
        Value::Array(items) if items.iter().all(Value::is_array) => {
            let cols = items.first().and_then(Value::as_array).map_or(0, Vec::len);
            out.push((prefix.to_string(), format!("[{} x {} matrix]", items.len(), cols)));
        }
        Value::Array(items) => {
            items.iter().enumerate().for_each(|(i, item)| flatten(&format!("{prefix}[{i}]"), item, out))
        }
        other => out.push((prefix.to_string(), plain(other))),
    }
}

fn plain(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "none".to_string(),
        other => other.to_string(),
    }
}

fn text_summary(report: &Value) -> String {
    let mut rows = Vec::new();
    flatten("", report, &mut rows);
    rows.into_iter().map(|(k, v)| format!("{k}: {v}\n")).collect()
}

fn scalar_csv(report: &Value) -> String {
    let mut rows = Vec::new();
    flatten("", report, &mut rows);
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(["field", "value"]).expect("in-memory write");
    for (k, v) in rows {
        w.write_record([k, v]).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

/// Runs a job. Nothing is written to `stdout` unless the job succeeds.
pub fn run(job: &JobSpec) -> Outcome {
    let work = || job.validate().and_then(|()| job.execute());
    let result = match job.threads {
        None => work(),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
            Ok(pool) => pool.install(work),
            Err(e) => Err(JobError { code: 2, message: format!("thread pool: {e}") }),
        },
    };
    match result {
        Ok(report) => Outcome::ok(render(&report, job.format)),
        Err(e) => Outcome::fail(e.code, e.message),
    }
}

/// Parses arguments and runs the job; usage errors exit with status 1.
pub fn run_args<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match JobSpec::try_parse_from(args) {
        Ok(job) => run(&job),
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                Outcome { code: 1, stdout: String::new(), stderr: text }
            } else {
                Outcome::ok(text)
            }
        }
    }
}
