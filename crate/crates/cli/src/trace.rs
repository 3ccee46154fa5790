use std::io::{Read, Write};

use stam_core::solvers::TraceRecord;

use crate::error::{CliError, Result};

pub const TRACE_HEADER: &str =
    "t,epoch,objective,eta,dist_sq_proxy,combined,z_residual,merit,train_acc,test_acc,gamma,beta,lambda";

/// Shortest representation that parses back to the same value; `inf` and
/// `NaN` are the sentinels for an infinite objective and an unused parameter.
fn num(v: f64) -> String {
    format!("{v}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn write_header(out: &mut impl Write) -> std::io::Result<()> {
    writeln!(out, "{TRACE_HEADER}")
}

pub fn write_record(out: &mut impl Write, r: &TraceRecord) -> std::io::Result<()> {
    writeln!(
        out,
        "{},{},{},{},{},{},{},{},{},{},{},{},{}",
        r.t,
        r.epoch,
        num(r.objective),
        num(r.eta),
        num(r.dist_sq_proxy),
        num(r.combined),
        num(r.z_residual),
        num(r.merit),
        opt(r.train_acc),
        opt(r.test_acc),
        num(r.gamma),
        num(r.beta),
        num(r.lambda)
    )
}

pub fn read_trace(input: impl Read) -> Result<Vec<TraceRecord>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header.join(",") != TRACE_HEADER {
        return Err(CliError::Config(format!("unexpected trace header `{}`", header.join(","))));
    }
    let mut out = Vec::new();
    for (k, row) in rdr.records().enumerate() {
        let row = row?;
        let line = k + 2;
        let f = |i: usize| -> Result<f64> {
            row[i]
                .parse()
                .map_err(|_| CliError::Config(format!("trace line {line}: bad number `{}`", &row[i])))
        };
        let o = |i: usize| -> Result<Option<f64>> {
            if row[i].is_empty() {
                Ok(None)
            } else {
                f(i).map(Some)
            }
        };
        let u = |i: usize| -> Result<u64> {
            row[i]
                .parse()
                .map_err(|_| CliError::Config(format!("trace line {line}: bad integer `{}`", &row[i])))
        };
        out.push(TraceRecord {
            t: u(0)?,
            epoch: u(1)?,
            objective: f(2)?,
            eta: f(3)?,
            dist_sq_proxy: f(4)?,
            combined: f(5)?,
            z_residual: f(6)?,
            merit: f(7)?,
            train_acc: o(8)?,
            test_acc: o(9)?,
            gamma: f(10)?,
            beta: f(11)?,
            lambda: f(12)?,
        });
    }
    Ok(out)
}
