use std::borrow::Cow;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{baseline_stationarity, merit_value, splitting_constants, stationarity};
use crate::error::{check_len, Result, StamError};
use crate::linalg;
use crate::model::{evaluate_phi, ParamSchedule, ProblemInstance, SolverState};
use crate::problems::with_weight_decay;
use crate::sampling::{BatchSampler, RngStream, SamplingMode};
use crate::solvers::baselines::{bc_step, br_step, psgd_step, sgd_step, BaselineState, BrParams};
use crate::solvers::stam::stam_step;

/// STAM-specific schedules. `lambda` overrides the coupling weight of the
/// problem when present.
#[derive(Debug, Clone, PartialEq)]
pub struct StamParams {
    pub beta: ParamSchedule,
    pub lambda: Option<ParamSchedule>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Algorithm {
    Stam(StamParams),
    Psgd,
    Bc,
    Br(BrParams),
    /// Unquantized SGD on `G`, used as a full-precision reference.
    Sgd,
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Stam(_) => "stam",
            Algorithm::Psgd => "psgd",
            Algorithm::Bc => "bc",
            Algorithm::Br(_) => "br",
            Algorithm::Sgd => "sgd",
        }
    }
}

/// Everything a run needs besides the problem and the starting point.
///
/// `gamma` is the prox step for STAM and the learning rate for the
/// baselines. Schedules are keyed by epoch: one epoch is one iteration when
/// `epoch_length` is `None`, otherwise `epoch = ⌊t / epoch_length⌋`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub algorithm: Algorithm,
    pub gamma: ParamSchedule,
    pub iterations: u64,
    pub batch_size: usize,
    pub sampling: SamplingMode,
    pub epoch_length: Option<u64>,
    pub log_every: u64,
    /// L2 penalty added to the loss of the baselines (never to STAM).
    pub weight_decay: f64,
}

impl RunSpec {
    pub fn validate(&self, n_components: usize) -> Result<()> {
        self.gamma.validate()?;
        if let Algorithm::Stam(p) = &self.algorithm {
            p.beta.validate()?;
            if let Some(l) = &p.lambda {
                l.validate()?;
            }
        }
        if let Algorithm::Br(p) = &self.algorithm {
            p.validate()?;
        }
        if self.batch_size == 0 || self.batch_size > n_components {
            return Err(StamError::arg(format!(
                "batch size {} outside [1, {n_components}]",
                self.batch_size
            )));
        }
        if self.log_every == 0 {
            return Err(StamError::arg("log_every must be ≥ 1"));
        }
        if self.epoch_length == Some(0) {
            return Err(StamError::arg("epoch length must be ≥ 1"));
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return Err(StamError::arg(format!("invalid weight decay {}", self.weight_decay)));
        }
        Ok(())
    }

    /// Epoch in effect while computing iteration `t + 1` from iterate `t`.
    pub fn epoch_of(&self, t: u64) -> u64 {
        match self.epoch_length {
            Some(len) => t / len,
            None => t,
        }
    }
}

/// Accuracy of a weight vector on the training and test data, if any.
pub trait Evaluator {
    fn accuracies(&self, params: &[f64]) -> (Option<f64>, Option<f64>);
}

/// One logged row of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub t: u64,
    pub epoch: u64,
    /// `+∞` when the iterate leaves the domain of `F`.
    pub objective: f64,
    pub eta: f64,
    pub dist_sq_proxy: f64,
    pub combined: f64,
    pub z_residual: f64,
    pub merit: f64,
    pub train_acc: Option<f64>,
    pub test_acc: Option<f64>,
    pub gamma: f64,
    pub beta: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub algorithm: String,
    pub iterations: u64,
    pub epochs: u64,
    pub grad_draws: u64,
    pub prox_calls: u64,
    pub records: u64,
    pub best_combined: Option<f64>,
    pub best_train_acc: Option<f64>,
    pub best_test_acc: Option<f64>,
    pub final_objective: Option<f64>,
    /// Iterations run with `K1 ≤ 0` (STAM only).
    pub k1_violations: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub state: SolverState,
    pub summary: RunSummary,
}

struct Tracker<'a> {
    sink: &'a mut dyn FnMut(&TraceRecord) -> Result<()>,
    summary: RunSummary,
}

impl Tracker<'_> {
    fn emit(&mut self, rec: TraceRecord) -> Result<()> {
        let s = &mut self.summary;
        s.records += 1;
        s.best_combined = Some(s.best_combined.map_or(rec.combined, |b| b.min(rec.combined)));
        if let Some(a) = rec.train_acc {
            s.best_train_acc = Some(s.best_train_acc.map_or(a, |b| b.max(a)));
        }
        if let Some(a) = rec.test_acc {
            s.best_test_acc = Some(s.best_test_acc.map_or(a, |b| b.max(a)));
        }
        s.final_objective = Some(rec.objective);
        (self.sink)(&rec)
    }
}

fn should_log(t: u64, spec: &RunSpec) -> bool {
    t.is_multiple_of(spec.log_every) || t == spec.iterations
}

/// Runs `spec.iterations` steps from `y0` and feeds a [`TraceRecord`] to
/// `sink` every `log_every` iterations and after the last one. On error the
/// records emitted so far have already reached the sink.
///
/// For the baselines the returned state maps `U` to `y` and `W̃` to `x`, `u`
/// and `z`.
pub fn run_solver(
    problem: &ProblemInstance,
    spec: &RunSpec,
    y0: Vec<f64>,
    rng: &mut RngStream,
    evaluator: Option<&dyn Evaluator>,
    sink: &mut dyn FnMut(&TraceRecord) -> Result<()>,
) -> Result<RunOutcome> {
    spec.validate(problem.n_components())?;
    check_len("starting point", problem.dim_y(), y0.len())?;
    let mut tracker = Tracker {
        sink,
        summary: RunSummary {
            algorithm: spec.algorithm.name().to_string(),
            iterations: 0,
            epochs: 0,
            grad_draws: 0,
            prox_calls: 0,
            records: 0,
            best_combined: None,
            best_train_acc: None,
            best_test_acc: None,
            final_objective: None,
            k1_violations: 0,
        },
    };
    let mut sampler = BatchSampler::new(spec.sampling, problem.n_components(), spec.batch_size)?;
    let state = match &spec.algorithm {
        Algorithm::Stam(params) => {
            run_stam(problem, spec, params, y0, rng, &mut sampler, evaluator, &mut tracker)?
        }
        _ => run_baseline(problem, spec, y0, rng, &mut sampler, evaluator, &mut tracker)?,
    };
    let mut summary = tracker.summary;
    summary.iterations = spec.iterations;
    summary.epochs = if spec.iterations == 0 {
        0
    } else {
        spec.epoch_of(spec.iterations - 1) + 1
    };
    Ok(RunOutcome { state, summary })
}

#[allow(clippy::too_many_arguments)]
fn run_stam(
    problem: &ProblemInstance,
    spec: &RunSpec,
    params: &StamParams,
    y0: Vec<f64>,
    rng: &mut RngStream,
    sampler: &mut BatchSampler,
    evaluator: Option<&dyn Evaluator>,
    tracker: &mut Tracker<'_>,
) -> Result<SolverState> {
    let lambda_at = |epoch: u64| -> Result<Option<f64>> {
        params.lambda.as_ref().map(|s| s.evaluate(epoch as i64)).transpose()
    };
    let mut current: Cow<'_, ProblemInstance> = Cow::Borrowed(problem);
    let mut current_lambda = None;
    let mut last_gamma = f64::NAN;

    let gamma0 = spec.gamma.evaluate(0)?;
    let mut state = SolverState::initial(problem, y0, gamma0)?;
    for t in 0..spec.iterations {
        let epoch = spec.epoch_of(t);
        let gamma = spec.gamma.evaluate(epoch as i64)?;
        let beta = params.beta.evaluate(epoch as i64)?;
        if let Some(l) = lambda_at(epoch)? {
            if current_lambda != Some(l) {
                current = Cow::Owned(problem.with_coupling_weight(l)?);
                current_lambda = Some(l);
                last_gamma = f64::NAN;
            }
        }
        let report = splitting_constants(gamma, current.smoothness())?;
        if !report.satisfied {
            if gamma != last_gamma {
                log::warn!(
                    "γ = {gamma} at epoch {epoch} exceeds the threshold {:.6}; K1 = {:.4e} ≤ 0",
                    report.gamma_max,
                    report.k1
                );
            }
            tracker.summary.k1_violations += 1;
        }
        last_gamma = gamma;

        let batch = sampler.next_batch(rng)?;
        let step = stam_step(&state, &current, gamma, beta, &batch)?;
        tracker.summary.grad_draws += step.grad_draws as u64;
        tracker.summary.prox_calls += step.prox_calls as u64;
        state = step.state;

        let t1 = t + 1;
        if should_log(t1, spec) {
            let p: &ProblemInstance = &current;
            let st = stationarity(p, &state, gamma, p.smoothness().l2_star)?;
            let objective = evaluate_phi(p, &state.y, &state.u)?.to_f64();
            let merit = merit_value(p, &state, gamma).to_f64();
            let (train_acc, test_acc) = evaluator.map_or((None, None), |e| e.accuracies(&state.u));
            tracker.emit(TraceRecord {
                t: t1,
                epoch,
                objective,
                eta: st.eta,
                dist_sq_proxy: st.dist_sq_proxy,
                combined: st.combined,
                z_residual: st.z_residual,
                merit,
                train_acc,
                test_acc,
                gamma,
                beta,
                lambda: p.coupling().quadratic_weight().unwrap_or(f64::NAN),
            })?;
        }
    }
    Ok(state)
}

fn run_baseline(
    problem: &ProblemInstance,
    spec: &RunSpec,
    y0: Vec<f64>,
    rng: &mut RngStream,
    sampler: &mut BatchSampler,
    evaluator: Option<&dyn Evaluator>,
    tracker: &mut Tracker<'_>,
) -> Result<SolverState> {
    let decayed;
    let problem = if spec.weight_decay > 0.0 {
        decayed = with_weight_decay(problem, spec.weight_decay)?;
        &decayed
    } else {
        problem
    };
    let lambda0 = match &spec.algorithm {
        Algorithm::Br(p) => p.lambda0,
        _ => 0.0,
    };
    let mut state = BaselineState::initial(problem, y0, lambda0)?;
    if matches!(spec.algorithm, Algorithm::Sgd) {
        state.w_tilde = state.u.clone();
        state.w_prev = state.u.clone();
    }
    for t in 0..spec.iterations {
        let epoch = spec.epoch_of(t);
        let gamma = spec.gamma.evaluate(epoch as i64)?;
        let lambda_used = state.lambda;
        let batch = sampler.next_batch(rng)?;
        state = match &spec.algorithm {
            Algorithm::Psgd => psgd_step(&state, problem, gamma, &batch)?,
            Algorithm::Bc => bc_step(&state, problem, gamma, &batch)?,
            Algorithm::Br(p) => br_step(&state, problem, gamma, p, epoch, &batch)?,
            Algorithm::Sgd => sgd_step(&state, problem, gamma, &batch)?,
            Algorithm::Stam(_) => unreachable!("handled by run_stam"),
        };
        tracker.summary.grad_draws += batch.size() as u64;
        if !matches!(spec.algorithm, Algorithm::Sgd) {
            tracker.summary.prox_calls += 1;
        }

        let t1 = t + 1;
        if should_log(t1, spec) {
            // stationarity measures need a positive step; a zero learning
            // rate is reported with unit scaling
            let scale = if gamma > 0.0 { gamma } else { 1.0 };
            let st = if matches!(spec.algorithm, Algorithm::Sgd) {
                let eta = linalg::norm_sq(&crate::model::full_gradient_g(problem, &state.u)?);
                crate::diagnostics::StationarityRecord {
                    eta,
                    dist_sq_proxy: 0.0,
                    combined: eta,
                    z_residual: linalg::dist(&state.w_tilde, &state.w_prev) / scale,
                }
            } else {
                baseline_stationarity(problem, &state, scale)?
            };
            let objective = (problem.value_f(&state.w_tilde) + problem.value_g(&state.w_tilde)).to_f64();
            let (train_acc, test_acc) =
                evaluator.map_or((None, None), |e| e.accuracies(&state.w_tilde));
            tracker.emit(TraceRecord {
                t: t1,
                epoch,
                objective,
                eta: st.eta,
                dist_sq_proxy: st.dist_sq_proxy,
                combined: st.combined,
                z_residual: st.z_residual,
                merit: objective,
                train_acc,
                test_acc,
                gamma,
                beta: f64::NAN,
                lambda: match &spec.algorithm {
                    Algorithm::Br(_) => lambda_used,
                    _ => f64::NAN,
                },
            })?;
        }
    }
    let w = state.w_tilde.clone();
    Ok(SolverState {
        y: state.u,
        x: w.clone(),
        u: w.clone(),
        z: w,
        z_prev: state.w_prev,
        t: state.t,
    })
}
