use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::{info, warn};
use serde::Serialize;
use sha2::{Digest, Sha256};

use stam_core::linalg;
use stam_core::solvers::{run_solver, Evaluator, RunSummary};
use stam_core::RngStream;

use crate::config::{AlgoConfig, RunConfig};
use crate::error::{CliError, Result};
use crate::setup::{build, Experiment, SplitInfo, SAMPLING_STREAM};
use crate::trace::{write_header, write_record};

pub const OUTPUT_DIR_ENV: &str = "STAM_OUTPUT_DIR";

/// `$STAM_OUTPUT_DIR`, then the config's `output_dir`, then the working
/// directory.
pub fn output_dir(cfg: &RunConfig) -> PathBuf {
    std::env::var_os(OUTPUT_DIR_ENV)
        .map(PathBuf::from)
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."))
}

pub fn load_config(path: &Path) -> Result<(RunConfig, String)> {
    let bytes = std::fs::read(path)?;
    let digest = hex::encode(Sha256::digest(&bytes));
    let src = String::from_utf8(bytes)
        .map_err(|_| CliError::Config(format!("{} is not valid UTF-8", path.display())))?;
    Ok((RunConfig::parse(&src)?, digest))
}

#[derive(Debug, Clone, Serialize)]
pub struct FinalNorms {
    pub y: f64,
    pub x: f64,
    pub u: f64,
    pub z: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub name: String,
    pub label: String,
    pub seed: u64,
    pub config_sha256: String,
    pub wall_time_secs: f64,
    pub split: Option<SplitInfo>,
    pub final_norms: FinalNorms,
    pub best_combined: Option<f64>,
    pub summary: RunSummary,
}

/// Runs one algorithm section and streams its trace to `trace_path`. The
/// file is flushed before an error is returned, so a diverged run leaves its
/// partial trace behind.
fn run_one(
    cfg: &RunConfig,
    exp: &Experiment,
    algo: &AlgoConfig,
    trace_path: &Path,
    digest: &str,
) -> Result<RunReport> {
    let problem = if algo.is_reference() {
        &exp.reference
    } else {
        &exp.problem
    };
    let spec = algo.run_spec(cfg, problem.n_components())?;
    let mut out = BufWriter::new(File::create(trace_path)?);
    write_header(&mut out)?;
    let mut rng = RngStream::new(cfg.seed, SAMPLING_STREAM);
    let evaluator = exp.evaluator.as_ref().map(|e| e as &dyn Evaluator);
    let start = Instant::now();
    let result = {
        let mut sink = |r: &stam_core::solvers::TraceRecord| -> stam_core::Result<()> {
            Ok(write_record(&mut out, r)?)
        };
        run_solver(problem, &spec, exp.y0.clone(), &mut rng, evaluator, &mut sink)
    };
    out.flush()?;
    let outcome = result?;
    let s = &outcome.state;
    Ok(RunReport {
        name: cfg.name.clone(),
        label: algo.label(),
        seed: cfg.seed,
        config_sha256: digest.to_string(),
        wall_time_secs: start.elapsed().as_secs_f64(),
        split: exp.split.clone(),
        final_norms: FinalNorms {
            y: linalg::norm(&s.y),
            x: linalg::norm(&s.x),
            u: linalg::norm(&s.u),
            z: linalg::norm(&s.z),
        },
        best_combined: outcome.summary.best_combined,
        summary: outcome.summary,
    })
}

/// `stam run`: exactly one algorithm section. Writes `<name>.csv` and
/// `<name>.summary.json`.
pub fn cmd_run(config_path: &Path) -> Result<RunReport> {
    let (cfg, digest) = load_config(config_path)?;
    if cfg.algos.len() != 1 {
        return Err(CliError::Config(format!(
            "`run` takes exactly one [[algo]] section, found {}; use `compare`",
            cfg.algos.len()
        )));
    }
    let dir = output_dir(&cfg);
    std::fs::create_dir_all(&dir)?;
    let exp = build(&cfg)?;
    let trace = dir.join(format!("{}.csv", cfg.name));
    let report = run_one(&cfg, &exp, &cfg.algos[0], &trace, &digest)?;
    let summary = dir.join(format!("{}.summary.json", cfg.name));
    std::fs::write(&summary, serde_json::to_string_pretty(&report)?)?;
    info!("wrote {} and {}", trace.display(), summary.display());
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRow {
    pub label: String,
    pub algorithm: String,
    pub reference: bool,
    pub best_train_acc: Option<f64>,
    pub best_test_acc: Option<f64>,
    pub best_combined: Option<f64>,
    pub final_objective: Option<f64>,
    pub status: String,
}

impl CompareRow {
    pub fn failed(&self) -> bool {
        self.status != "ok"
    }
}

fn fmt_opt(v: Option<f64>, acc: bool) -> String {
    match v {
        None => "-".into(),
        Some(x) if acc => format!("{x:.4}"),
        Some(x) => format!("{x:.4e}"),
    }
}

/// Aligned plain-text table; wall time is left out so reruns compare equal.
pub fn render_table(rows: &[CompareRow]) -> String {
    let head = ["label", "algorithm", "train_acc", "test_acc", "best_combined", "final_objective", "status"];
    let cells: Vec<[String; 7]> = rows
        .iter()
        .map(|r| {
            let label = if r.reference {
                format!("{} (ref)", r.label)
            } else {
                r.label.clone()
            };
            [
                label,
                r.algorithm.clone(),
                fmt_opt(r.best_train_acc, true),
                fmt_opt(r.best_test_acc, true),
                fmt_opt(r.best_combined, false),
                fmt_opt(r.final_objective, false),
                r.status.clone(),
            ]
        })
        .collect();
    let mut width: Vec<usize> = head.iter().map(|h| h.len()).collect();
    for row in &cells {
        for (w, c) in width.iter_mut().zip(row) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |items: Vec<&str>| -> String {
        let parts: Vec<String> = items
            .iter()
            .zip(&width)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect();
        parts.join("  ").trim_end().to_string() + "\n"
    };
    let mut s = line(head.to_vec());
    s += &line(width.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().iter().map(String::as_str).collect());
    for row in &cells {
        s += &line(row.iter().map(String::as_str).collect());
    }
    s
}

/// `stam compare`: every algorithm section on the same problem, data split,
/// starting point and sampling seed. A failing sub-run is recorded in its
/// row and the others still run.
pub fn cmd_compare(config_path: &Path) -> Result<Vec<CompareRow>> {
    let (cfg, digest) = load_config(config_path)?;
    let dir = output_dir(&cfg);
    std::fs::create_dir_all(&dir)?;
    let exp = build(&cfg)?;
    let mut rows = Vec::new();
    for algo in &cfg.algos {
        let label = algo.label();
        let trace = dir.join(format!("{}.{label}.csv", cfg.name));
        let algorithm = algo.run_spec(&cfg, exp.problem.n_components())?.algorithm.name().to_string();
        let row = match run_one(&cfg, &exp, algo, &trace, &digest) {
            Ok(rep) => CompareRow {
                label,
                algorithm,
                reference: algo.is_reference(),
                best_train_acc: rep.summary.best_train_acc,
                best_test_acc: rep.summary.best_test_acc,
                best_combined: rep.summary.best_combined,
                final_objective: rep.summary.final_objective,
                status: "ok".into(),
            },
            Err(e) => {
                warn!("{label}: {e}");
                CompareRow {
                    label,
                    algorithm,
                    reference: algo.is_reference(),
                    best_train_acc: None,
                    best_test_acc: None,
                    best_combined: None,
                    final_objective: None,
                    status: format!("failed: {e}"),
                }
            }
        };
        rows.push(row);
    }
    let mut w = csv::Writer::from_path(dir.join(format!("{}.compare.csv", cfg.name)))?;
    for r in &rows {
        w.serialize(r)?;
    }
    w.flush()?;
    std::fs::write(dir.join(format!("{}.compare.txt", cfg.name)), render_table(&rows))?;
    Ok(rows)
}
