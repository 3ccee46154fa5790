use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use stam_core::model::ParamSchedule;
use stam_core::sampling::SamplingMode;
use stam_core::solvers::{Algorithm, BrParams, RunSpec, StamParams};

use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// One experiment: a problem, a starting point and one or more algorithm
/// sections. `run` requires exactly one section, `compare` takes several.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default = "default_name")]
    pub name: String,
    pub seed: u64,
    /// Total iterations; mutually exclusive with `epochs`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterations: Option<u64>,
    /// Number of data passes; requires `epoch_unit = "pass"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epochs: Option<u64>,
    pub batch_size: usize,
    #[serde(default = "default_sampling")]
    pub sampling: SamplingMode,
    #[serde(default)]
    pub epoch_unit: EpochUnit,
    #[serde(default = "default_log_every")]
    pub log_every: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub problem: ProblemConfig,
    #[serde(default)]
    pub init: InitConfig,
    #[serde(rename = "algo")]
    pub algos: Vec<AlgoConfig>,
}

fn default_name() -> String {
    "run".into()
}

fn default_sampling() -> SamplingMode {
    SamplingMode::BNice
}

fn default_log_every() -> u64 {
    1
}

/// What advances the schedules: every iteration, or every full pass over
/// the `N` components (`⌈N/b⌉` iterations).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpochUnit {
    #[default]
    Iteration,
    Pass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemConfig {
    LeastSquares {
        /// Random instance size; ignored when `rows` is given.
        #[serde(default)]
        n: usize,
        #[serde(default)]
        dim: usize,
        lambda: f64,
        #[serde(default)]
        noise: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rows: Option<Vec<Vec<f64>>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        targets: Option<Vec<f64>>,
        #[serde(default)]
        quantize: bool,
        /// Layer lengths of Q; one layer over all coordinates when omitted.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        layers: Option<Vec<usize>>,
    },
    Logistic {
        n: usize,
        dim: usize,
        lambda: f64,
        #[serde(default)]
        quantize: bool,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        layers: Option<Vec<usize>>,
    },
    Mlp {
        widths: Vec<usize>,
        #[serde(default = "default_loss")]
        loss: stam_core::problems::Loss,
        lambda: f64,
        /// Declared smoothness estimate; there is no analytic value.
        declared_l1: f64,
        #[serde(default = "default_init_scale")]
        init_scale: f64,
        #[serde(default = "default_test_fraction")]
        test_fraction: f64,
        dataset: DatasetConfig,
    },
}

fn default_loss() -> stam_core::problems::Loss {
    stam_core::problems::Loss::SoftmaxCrossEntropy
}

fn default_init_scale() -> f64 {
    1.0
}

fn default_test_fraction() -> f64 {
    0.2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetConfig {
    Blobs {
        n_per_class: usize,
        n_classes: usize,
        dim: usize,
        separation: f64,
    },
    Csv {
        path: PathBuf,
        label_column: String,
        n_classes: usize,
    },
}

/// Starting point `y⁰`. Network problems default to a He-normal draw.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitConfig {
    #[default]
    Default,
    Constant {
        value: f64,
    },
    Explicit {
        values: Vec<f64>,
    },
    /// Coordinates uniform in `[−scale, scale]`.
    Uniform {
        scale: f64,
    },
}

/// One algorithm section. `lr` plays the role of `γ` in the baseline
/// updates; STAM has its own `gamma` (prox step) and `beta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AlgoConfig {
    Stam {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
        gamma: ParamSchedule,
        beta: ParamSchedule,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lambda: Option<ParamSchedule>,
    },
    Psgd {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
        lr: ParamSchedule,
        #[serde(default)]
        weight_decay: f64,
    },
    Bc {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
        lr: ParamSchedule,
        #[serde(default)]
        weight_decay: f64,
    },
    Br {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
        lr: ParamSchedule,
        lambda0: f64,
        rho: f64,
        phase_switch_k: u64,
        #[serde(default)]
        weight_decay: f64,
    },
    /// Full-precision reference: plain SGD on the unquantized loss.
    Sgd {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
        lr: ParamSchedule,
        #[serde(default)]
        weight_decay: f64,
    },
}

impl AlgoConfig {
    pub fn label(&self) -> String {
        let (label, kind) = match self {
            AlgoConfig::Stam { label, .. } => (label, "stam"),
            AlgoConfig::Psgd { label, .. } => (label, "psgd"),
            AlgoConfig::Bc { label, .. } => (label, "bc"),
            AlgoConfig::Br { label, .. } => (label, "br"),
            AlgoConfig::Sgd { label, .. } => (label, "sgd"),
        };
        label.clone().unwrap_or_else(|| kind.to_string())
    }

    pub fn is_reference(&self) -> bool {
        matches!(self, AlgoConfig::Sgd { .. })
    }

    /// Run specification for a problem with `n_components` summands.
    pub fn run_spec(&self, cfg: &RunConfig, n_components: usize) -> Result<RunSpec> {
        let epoch_length = match cfg.epoch_unit {
            EpochUnit::Iteration => None,
            EpochUnit::Pass => Some(n_components.div_ceil(cfg.batch_size) as u64),
        };
        let iterations = match (cfg.iterations, cfg.epochs, epoch_length) {
            (Some(t), None, _) => t,
            (None, Some(e), Some(len)) => e * len,
            (None, Some(_), None) => {
                return Err(CliError::Config("`epochs` needs epoch_unit = \"pass\"".into()))
            }
            _ => {
                return Err(CliError::Config(
                    "exactly one of `iterations` and `epochs` must be set".into(),
                ))
            }
        };
        let (algorithm, gamma, weight_decay) = match self.clone() {
            AlgoConfig::Stam {
                gamma, beta, lambda, ..
            } => (Algorithm::Stam(StamParams { beta, lambda }), gamma, 0.0),
            AlgoConfig::Psgd {
                lr, weight_decay, ..
            } => (Algorithm::Psgd, lr, weight_decay),
            AlgoConfig::Bc {
                lr, weight_decay, ..
            } => (Algorithm::Bc, lr, weight_decay),
            AlgoConfig::Br {
                lr,
                lambda0,
                rho,
                phase_switch_k,
                weight_decay,
                ..
            } => (
                Algorithm::Br(BrParams {
                    lambda0,
                    rho,
                    phase_switch_k,
                }),
                lr,
                weight_decay,
            ),
            AlgoConfig::Sgd {
                lr, weight_decay, ..
            } => (Algorithm::Sgd, lr, weight_decay),
        };
        let spec = RunSpec {
            algorithm,
            gamma,
            iterations,
            batch_size: cfg.batch_size,
            sampling: cfg.sampling,
            epoch_length,
            log_every: cfg.log_every,
            weight_decay,
        };
        spec.validate(n_components)
            .map_err(|e| CliError::Config(e.to_string()))?;
        Ok(spec)
    }
}

/// 1-based line and column of a byte offset.
fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rfind('\n').map_or(before.chars().count(), |p| before[p + 1..].chars().count()) + 1;
    (line, col)
}

impl RunConfig {
    pub fn parse(src: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(src).map_err(|e| {
            let (line, column) = e.span().map_or((0, 0), |s| line_col(src, s.start));
            CliError::ConfigParse {
                line,
                column,
                message: e.message().to_string(),
            }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }

    fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.algos.is_empty() {
            return Err(CliError::Config("at least one [[algo]] section is required".into()));
        }
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(CliError::Config(format!("invalid run name `{}`", self.name)));
        }
        let mut labels: Vec<String> = self.algos.iter().map(|a| a.label()).collect();
        labels.sort();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(CliError::Config("algorithm labels must be distinct".into()));
        }
        for a in &self.algos {
            match a {
                AlgoConfig::Stam {
                    gamma, beta, lambda, ..
                } => {
                    for s in [Some(gamma), Some(beta), lambda.as_ref()].into_iter().flatten() {
                        s.validate().map_err(|e| CliError::Config(e.to_string()))?;
                    }
                }
                AlgoConfig::Psgd { lr, .. }
                | AlgoConfig::Bc { lr, .. }
                | AlgoConfig::Br { lr, .. }
                | AlgoConfig::Sgd { lr, .. } => {
                    lr.validate().map_err(|e| CliError::Config(e.to_string()))?
                }
            }
        }
        Ok(())
    }
}
