use std::sync::Arc;

use serde::Serialize;

use stam_core::model::ZeroRegularizer;
use stam_core::problems::{
    load_csv_dataset, make_blobs, make_least_squares, make_logistic, make_mlp_problem,
    train_test_split, Activation, Dataset, LeastSquares, MlpSpec, NonsmoothTerm,
};
use stam_core::solvers::Evaluator;
use stam_core::{ProblemInstance, QuantizedSpace, RngStream};

use crate::config::{DatasetConfig, InitConfig, ProblemConfig, RunConfig};
use crate::error::{CliError, Result};

/// Stream ids derived from the run seed.
pub const DATA_STREAM: u64 = 0;
pub const SPLIT_STREAM: u64 = 1;
pub const INIT_STREAM: u64 = 2;
pub const SAMPLING_STREAM: u64 = 3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitInfo {
    pub train: usize,
    pub test: usize,
    pub test_fraction: f64,
}

pub struct MlpEvaluator {
    pub spec: MlpSpec,
    pub train: Dataset,
    pub test: Dataset,
}

impl Evaluator for MlpEvaluator {
    fn accuracies(&self, params: &[f64]) -> (Option<f64>, Option<f64>) {
        (
            self.spec.accuracy(params, &self.train),
            self.spec.accuracy(params, &self.test),
        )
    }
}

/// A ready-to-run experiment: the quantized problem, its unquantized twin for
/// the full-precision reference, the starting point and, for networks, the
/// accuracy evaluator.
pub struct Experiment {
    pub problem: ProblemInstance,
    pub reference: ProblemInstance,
    pub y0: Vec<f64>,
    pub evaluator: Option<MlpEvaluator>,
    pub split: Option<SplitInfo>,
}

fn nonsmooth(quantize: bool, layers: &Option<Vec<usize>>, dim: usize) -> Result<NonsmoothTerm> {
    if !quantize {
        return Ok(NonsmoothTerm::Zero);
    }
    let space = match layers {
        Some(l) => QuantizedSpace::from_lengths(l)?,
        None => QuantizedSpace::single(dim),
    };
    Ok(NonsmoothTerm::Quantized(space))
}

pub fn build(cfg: &RunConfig) -> Result<Experiment> {
    let mut data_rng = RngStream::new(cfg.seed, DATA_STREAM);
    let mut init_rng = RngStream::new(cfg.seed, INIT_STREAM);
    let (problem, evaluator, split, net) = match &cfg.problem {
        ProblemConfig::LeastSquares {
            n,
            dim,
            lambda,
            noise,
            rows,
            targets,
            quantize,
            layers,
        } => {
            let p = match (rows, targets) {
                (Some(rows), Some(targets)) => {
                    let d = rows.first().map_or(0, Vec::len);
                    LeastSquares::from_data(
                        rows.clone(),
                        targets.clone(),
                        *lambda,
                        nonsmooth(*quantize, layers, d)?,
                    )?
                }
                (None, None) => make_least_squares(
                    *n,
                    *dim,
                    *lambda,
                    *noise,
                    nonsmooth(*quantize, layers, *dim)?,
                    &mut data_rng,
                )?,
                _ => {
                    return Err(CliError::Config(
                        "`rows` and `targets` must be given together".into(),
                    ))
                }
            };
            (p, None, None, None)
        }
        ProblemConfig::Logistic {
            n,
            dim,
            lambda,
            quantize,
            layers,
        } => {
            let p = make_logistic(*n, *dim, *lambda, nonsmooth(*quantize, layers, *dim)?, &mut data_rng)?;
            (p, None, None, None)
        }
        ProblemConfig::Mlp {
            widths,
            loss,
            lambda,
            declared_l1,
            init_scale,
            test_fraction,
            dataset,
        } => {
            let data = match dataset {
                DatasetConfig::Blobs {
                    n_per_class,
                    n_classes,
                    dim,
                    separation,
                } => make_blobs(*n_per_class, *n_classes, *dim, *separation, &mut data_rng)?,
                DatasetConfig::Csv {
                    path,
                    label_column,
                    n_classes,
                } => load_csv_dataset(path, label_column, Some(*n_classes))?,
            };
            let (train, test) =
                train_test_split(&data, *test_fraction, &mut RngStream::new(cfg.seed, SPLIT_STREAM))?;
            let spec = MlpSpec::new(widths.clone(), Activation::Relu, *loss)?;
            let split = SplitInfo {
                train: train.len(),
                test: test.len(),
                test_fraction: *test_fraction,
            };
            let p = make_mlp_problem(spec.clone(), train.clone(), *lambda, *declared_l1, true)?;
            let ev = MlpEvaluator {
                spec: spec.clone(),
                train,
                test,
            };
            (p, Some(ev), Some(split), Some((spec, *init_scale)))
        }
    };
    let dim = problem.dim_y();
    let y0 = match &cfg.init {
        InitConfig::Default => match &net {
            Some((spec, scale)) => spec.init_params(*scale, &mut init_rng),
            None => vec![0.0; dim],
        },
        InitConfig::Constant { value } => vec![*value; dim],
        InitConfig::Explicit { values } => {
            if values.len() != dim {
                return Err(CliError::Config(format!(
                    "init has {} values, the problem has dimension {dim}",
                    values.len()
                )));
            }
            values.clone()
        }
        InitConfig::Uniform { scale } => (0..dim)
            .map(|_| scale * (2.0 * init_rng.uniform() - 1.0))
            .collect(),
    };
    let reference = problem.with_regularizer(Arc::new(ZeroRegularizer));
    Ok(Experiment {
        problem,
        reference,
        y0,
        evaluator,
        split,
    })
}
