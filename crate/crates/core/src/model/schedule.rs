use serde::{Deserialize, Serialize};

use crate::error::{Result, StamError};

/// Epoch-indexed parameter schedule.
///
/// Every variant is a pure function of the epoch, so a schedule can be
/// evaluated out of order and repeatedly without carrying state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ParamSchedule {
    Constant {
        base: f64,
    },
    /// `base` until `switch_epoch`, then multiplied by `decay` at `switch_epoch`
    /// and every `period` epochs after it, up to and including `stop_epoch`.
    StepDecay {
        base: f64,
        decay: f64,
        switch_epoch: u64,
        period: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        stop_epoch: Option<u64>,
    },
    /// `base` up to and including `switch_epoch`; afterwards each epoch applies
    /// `v ← max(decay · v, floor)`.
    MultiplicativeFloor {
        base: f64,
        decay: f64,
        floor: f64,
        #[serde(default)]
        switch_epoch: u64,
    },
    /// `base` up to and including `switch_epoch`; afterwards either the constant
    /// `post_value` or the nested `after` schedule, restarted at its epoch 0.
    PhaseSwitch {
        base: f64,
        switch_epoch: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        post_value: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        after: Option<Box<ParamSchedule>>,
    },
}

impl ParamSchedule {
    pub fn constant(value: f64) -> Self {
        ParamSchedule::Constant { base: value }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |name: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(StamError::Config(format!("schedule field `{name}` is not finite")))
            }
        };
        match self {
            ParamSchedule::Constant { base } => finite("base", *base),
            ParamSchedule::StepDecay {
                base,
                decay,
                period,
                switch_epoch,
                stop_epoch,
            } => {
                finite("base", *base)?;
                finite("decay", *decay)?;
                if *period == 0 {
                    return Err(StamError::Config("step_decay period must be ≥ 1".into()));
                }
                if let Some(stop) = stop_epoch {
                    if stop < switch_epoch {
                        return Err(StamError::Config(
                            "step_decay stop_epoch precedes switch_epoch".into(),
                        ));
                    }
                }
                Ok(())
            }
            ParamSchedule::MultiplicativeFloor {
                base, decay, floor, ..
            } => {
                finite("base", *base)?;
                finite("decay", *decay)?;
                finite("floor", *floor)?;
                if *decay < 0.0 {
                    return Err(StamError::Config(
                        "multiplicative_floor decay must be nonnegative".into(),
                    ));
                }
                Ok(())
            }
            ParamSchedule::PhaseSwitch {
                base,
                post_value,
                after,
                ..
            } => {
                finite("base", *base)?;
                match (post_value, after) {
                    (Some(v), None) => finite("post_value", *v),
                    (None, Some(next)) => next.validate(),
                    _ => Err(StamError::Config(
                        "phase_switch needs exactly one of `post_value` or `after`".into(),
                    )),
                }
            }
        }
    }

    /// Value at a possibly negative epoch; negative epochs are rejected.
    pub fn evaluate(&self, epoch: i64) -> Result<f64> {
        if epoch < 0 {
            return Err(StamError::arg(format!("negative epoch {epoch}")));
        }
        Ok(self.at(epoch as u64))
    }

    pub fn at(&self, epoch: u64) -> f64 {
        match self {
            ParamSchedule::Constant { base } => *base,
            ParamSchedule::StepDecay {
                base,
                decay,
                switch_epoch,
                period,
                stop_epoch,
            } => {
                if epoch < *switch_epoch {
                    return *base;
                }
                let last = stop_epoch.map_or(epoch, |s| epoch.min(s));
                let steps = (last - switch_epoch) / period.max(&1) + 1;
                base * decay.powi(steps.min(i32::MAX as u64) as i32)
            }
            ParamSchedule::MultiplicativeFloor {
                base,
                decay,
                floor,
                switch_epoch,
            } => {
                if epoch <= *switch_epoch {
                    return *base;
                }
                let k = (epoch - switch_epoch).min(i32::MAX as u64) as i32;
                // Unrolled form of v_k = max(d·v_{k-1}, f) for d ≥ 0:
                // v_k = max(d^k·v_0, f·max(1, d^(k-1))).
                let head = base * decay.powi(k);
                let tail = floor * decay.powi(k - 1).max(1.0);
                head.max(tail)
            }
            ParamSchedule::PhaseSwitch {
                base,
                switch_epoch,
                post_value,
                after,
            } => {
                if epoch <= *switch_epoch {
                    *base
                } else if let Some(next) = after {
                    next.at(epoch - switch_epoch - 1)
                } else {
                    post_value.unwrap_or(*base)
                }
            }
        }
    }
}
