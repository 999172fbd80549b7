use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use compcond::condition::{cond_report, CondReport, CondValue};
use compcond::experiments::{self, csv, ExperimentError, McConfig};
use compcond::matrix::{parse_vector, vector_to_text};
use compcond::rng::GaussianStream;
use compcond::{Matrix, Pattern, PatternError, PatternSpec, SeedSpec};
use serde_json::{json, Value};
use thiserror::Error;

use crate::args::{CondArgs, ExpCommand, RunArgs, SampleArgs};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Pattern(#[from] PatternError),
    #[error(transparent)]
    Cond(#[from] compcond::CondError),
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
    #[error("{0}")]
    Usage(String),
    #[error("cannot write {path}: {msg}")]
    Write { path: String, msg: String },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Experiment(
                ExperimentError::VacuousPattern { .. } | ExperimentError::NormPrecondition { .. },
            ) => 3,
            CliError::Write { .. } => 1,
            _ => 2,
        }
    }
}

pub fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Write {
            path: path.display().to_string(),
            msg: e.to_string(),
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| {
        PatternError::Io {
            path: path.to_path_buf(),
            msg: e.to_string(),
        }
        .into()
    })
}

pub fn cond(args: &CondArgs) -> Result<String, CliError> {
    let a = Matrix::read_file(&args.matrix)?;
    let b = match &args.rhs {
        Some(path) => Some(parse_vector(&read_text(path)?)?),
        None => None,
    };
    let report = cond_report(&a, b.as_deref(), args.bounds)?;
    Ok(if args.json {
        let mut text = serde_json::to_string_pretty(&report_json(&report, b.is_some()))
            .expect("report serializes");
        text.push('\n');
        text
    } else {
        report_text(&report, b.is_some())
    })
}

fn cond_json(v: CondValue) -> Value {
    serde_json::to_value(v).expect("condition value serializes")
}

fn table(n: usize, cells: impl Fn(usize, usize) -> Value) -> Value {
    Value::Array(
        (0..n)
            .map(|k| Value::Array((0..n).map(|l| cells(k, l)).collect()))
            .collect(),
    )
}

/// JSON keys use 1-based indices for argmax positions.
pub fn report_json(report: &CondReport, with_rhs: bool) -> Value {
    let n = report.n;
    let infinite = cond_json(CondValue::Infinite);
    let mut obj = json!({
        "n": n,
        "cond_det": cond_json(report.cond_det),
    });
    let map = obj.as_object_mut().expect("object");
    match &report.inverse {
        Some(inv) => {
            map.insert("cond_inv".into(), cond_json(inv.cond));
            map.insert(
                "cond_inv_argmax".into(),
                json!([inv.argmax.0 + 1, inv.argmax.1 + 1]),
            );
            map.insert("mixed_inv".into(), cond_json(inv.mixed));
            map.insert(
                "cond_inv_table".into(),
                table(n, |k, l| cond_json(inv.entry(k, l))),
            );
        }
        None => {
            map.insert("cond_inv".into(), infinite.clone());
            map.insert("cond_inv_argmax".into(), Value::Null);
            map.insert("mixed_inv".into(), infinite.clone());
        }
    }
    if with_rhs {
        match &report.solve {
            Some(s) => {
                map.insert("cond_solve".into(), cond_json(s.cond));
                map.insert("cond_solve_argmax".into(), json!(s.argmax + 1));
                map.insert("mixed_solve".into(), cond_json(s.mixed));
                map.insert(
                    "cond_solve_entries".into(),
                    Value::Array(s.entries.iter().map(|&c| cond_json(c)).collect()),
                );
                map.insert("x".into(), json!(s.x));
            }
            None => {
                map.insert("cond_solve".into(), infinite.clone());
                map.insert("cond_solve_argmax".into(), Value::Null);
                map.insert("mixed_solve".into(), infinite);
            }
        }
    }
    if let Some(bounds) = &report.bounds {
        map.insert(
            "bound_inv".into(),
            table(n, |k, l| json!(bounds.inv[k * n + l])),
        );
        if let Some(solve) = &bounds.solve {
            map.insert("bound_solve".into(), json!(solve));
        }
    }
    if let Some(p) = report.min_pivot_mag {
        map.insert("min_pivot_mag".into(), json!(p));
    }
    obj
}

fn report_text(report: &CondReport, with_rhs: bool) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "n           {}", report.n);
    let _ = writeln!(out, "cond_det    {}", report.cond_det);
    match &report.inverse {
        Some(inv) => {
            let (k, l) = inv.argmax;
            let _ = writeln!(out, "cond_inv    {} at ({}, {})", inv.cond, k + 1, l + 1);
            let _ = writeln!(out, "mixed_inv   {}", inv.mixed);
        }
        None => {
            let _ = writeln!(out, "cond_inv    inf (singular)");
            let _ = writeln!(out, "mixed_inv   inf (singular)");
        }
    }
    if with_rhs {
        match &report.solve {
            Some(s) => {
                let _ = writeln!(out, "cond_solve  {} at {}", s.cond, s.argmax + 1);
                let _ = writeln!(out, "mixed_solve {}", s.mixed);
            }
            None => {
                let _ = writeln!(out, "cond_solve  inf (singular)");
                let _ = writeln!(out, "mixed_solve inf (singular)");
            }
        }
    }
    if let Some(bounds) = &report.bounds {
        let n = report.n;
        let _ = writeln!(out, "bound_inv");
        for k in 0..n {
            let row: Vec<String> = (0..n).map(|l| bounds.inv[k * n + l].to_string()).collect();
            let _ = writeln!(out, "  {}", row.join(" "));
        }
        if let Some(solve) = &bounds.solve {
            let row: Vec<String> = solve.iter().map(f64::to_string).collect();
            let _ = writeln!(out, "bound_solve {}", row.join(" "));
        }
    }
    out
}

pub fn sample(args: &SampleArgs) -> Result<(String, Option<String>), CliError> {
    let pattern = Arc::new(args.pattern.resolve(args.n)?);
    let mut stream = GaussianStream::new(SeedSpec::new(args.seed, args.trial));
    let a = stream.matrix(&pattern);
    let rhs = args
        .rhs_out
        .as_ref()
        .map(|_| vector_to_text(&stream.vector(pattern.n())));
    Ok((a.to_text(), rhs))
}

fn config(trials: u64, run: &RunArgs) -> Result<McConfig, CliError> {
    let mut cfg = McConfig::new(trials, run.seed);
    match run.threads {
        Some(0) => return Err(CliError::Usage("--threads must be positive".into())),
        Some(t) => cfg = cfg.with_threads(t),
        None => {}
    }
    Ok(cfg)
}

fn resolve_sizes(spec: &PatternSpec, sizes: &[usize]) -> Result<Vec<Arc<Pattern>>, CliError> {
    match (spec, sizes) {
        (PatternSpec::File(_), []) => Ok(vec![Arc::new(spec.resolve(None)?)]),
        (_, []) => Err(CliError::Usage(format!(
            "--sizes is required for pattern `{spec}`"
        ))),
        _ => sizes
            .iter()
            .map(|&n| Ok(Arc::new(spec.resolve(Some(n))?)))
            .collect(),
    }
}

fn note(message: String) {
    eprintln!("note: {message}");
}

pub fn exp(command: &ExpCommand) -> Result<(String, Option<&Path>), CliError> {
    match command {
        ExpCommand::Tail {
            which,
            pattern,
            n,
            trials,
            t,
            run,
        } => {
            let pattern = Arc::new(pattern.resolve(*n)?);
            let curve = experiments::tail_experiment(*which, &pattern, t, &config(*trials, run)?)?;
            if curve.near_singular > 0 {
                note(format!(
                    "{} near-singular trials counted as exceeding every t",
                    curve.near_singular
                ));
            }
            Ok((csv::tail(&curve), run.out.as_deref()))
        }
        ExpCommand::Explog {
            which,
            pattern,
            sizes,
            trials,
            base,
            run,
        } => {
            let cfg = config(*trials, run)?;
            let mut rows = Vec::new();
            for p in resolve_sizes(pattern, sizes)? {
                let size_cfg = cfg.reseeded(SeedSpec::derive_master(cfg.master_seed, p.n() as u64));
                let r = experiments::expected_log_experiment(*which, &p, *base, &size_cfg)?;
                if r.excluded > 0 {
                    note(format!(
                        "n={}: {} near-singular or infinite trials excluded from the mean",
                        r.n, r.excluded
                    ));
                }
                rows.push(r);
            }
            Ok((csv::explog(&rows), run.out.as_deref()))
        }
        ExpCommand::Stail {
            p,
            q,
            trials,
            t,
            run,
        } => {
            let curve = experiments::stail_experiment(p, q, t, &config(*trials, run)?)?;
            Ok((csv::stail(&curve), run.out.as_deref()))
        }
        ExpCommand::Slope {
            which,
            sizes,
            trials,
            run,
        } => {
            let result = experiments::slope_experiment(*which, sizes, &config(*trials, run)?)?;
            for r in result.rows.iter().filter(|r| r.excluded > 0) {
                note(format!(
                    "n={}: {} trials excluded from the mean",
                    r.n, r.excluded
                ));
            }
            Ok((csv::slope(&result), run.out.as_deref()))
        }
        ExpCommand::Kappa { sizes, trials, run } => {
            let rows = experiments::kappa_experiment(sizes, &config(*trials, run)?)?;
            Ok((csv::kappa(&rows), run.out.as_deref()))
        }
        ExpCommand::Accuracy { n, trials, run } => {
            let rows = experiments::accuracy_experiment(*n, &config(*trials, run)?)?;
            let flagged = rows.iter().filter(|r| r.near_singular).count();
            if flagged > 0 {
                note(format!("{flagged} near-singular trials"));
            }
            Ok((csv::accuracy(&rows), run.out.as_deref()))
        }
    }
}
