use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::PhsConfig;

/// How the goal threshold is derived from the baseline loss L₀.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TriggerMode {
    /// Fire once the loss has been reduced by the target fraction:
    /// threshold = (1 − τ)·L₀.
    Reduction,
    /// Fire once the loss falls to the target fraction of L₀:
    /// threshold = τ·L₀.
    AbsoluteFraction,
}

/// Which loss signal the trigger watches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum LossMonitor {
    /// Raw per-step mini-batch loss.
    Minibatch,
    /// Exponential moving average of mini-batch losses.
    Ema { decay: f64 },
    /// Full-set evaluation every `every` steps.
    FullEval { every: u64 },
}

impl Default for LossMonitor {
    fn default() -> Self {
        LossMonitor::Ema { decay: 0.9 }
    }
}

/// Goal-oriented braking policy: a loss target τ relative to the baseline,
/// a friction multiplier β > 1, and a monotone latch that guarantees the
/// friction switch happens at most once per run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoalPolicy {
    pub target: f64,
    pub factor: f64,
    pub mode: TriggerMode,
    pub monitor: LossMonitor,
    latched: bool,
}

impl GoalPolicy {
    pub fn new(target: f64, factor: f64, mode: TriggerMode, monitor: LossMonitor) -> Result<Self> {
        if !(target > 0.0 && target < 1.0) {
            return Err(Error::Config(format!(
                "goal target must lie in (0,1), got {target}"
            )));
        }
        if !(factor > 1.0) || !factor.is_finite() {
            return Err(Error::Config(format!(
                "braking factor must exceed 1, got {factor}"
            )));
        }
        if let LossMonitor::Ema { decay } = monitor {
            if !(decay > 0.0 && decay < 1.0) {
                return Err(Error::Config(format!(
                    "EMA decay must lie in (0,1), got {decay}"
                )));
            }
        }
        if let LossMonitor::FullEval { every } = monitor {
            if every == 0 {
                return Err(Error::Config("full-eval cadence must be positive".into()));
            }
        }
        Ok(Self { target, factor, mode, monitor, latched: false })
    }

    pub fn latched(&self) -> bool {
        self.latched
    }

    /// Loss level at which the trigger fires, given the baseline L₀.
    pub fn threshold(&self, initial_loss: f64) -> Result<f64> {
        if !(initial_loss > 0.0) || !initial_loss.is_finite() {
            return Err(Error::Config(format!(
                "baseline loss must be positive to define a goal threshold, got {initial_loss}"
            )));
        }
        Ok(match self.mode {
            TriggerMode::Reduction => (1.0 - self.target) * initial_loss,
            TriggerMode::AbsoluteFraction => self.target * initial_loss,
        })
    }
}

/// Returns true exactly once: the first time `monitored_loss` reaches the
/// policy threshold. On that call the policy latches permanently.
pub fn goal_trigger(
    policy: &mut GoalPolicy,
    monitored_loss: f64,
    initial_loss: f64,
) -> Result<bool> {
    let threshold = policy.threshold(initial_loss)?;
    if policy.latched {
        return Ok(false);
    }
    if monitored_loss <= threshold {
        policy.latched = true;
        Ok(true)
    } else {
        Ok(false)
    }
}

/// Friction switch: returns the config with γ replaced by γ·β.
///
/// Requires the policy latch to be set; the latch is what makes braking a
/// once-per-run event. α and m pass through untouched.
pub fn apply_braking(config: &PhsConfig, policy: &GoalPolicy) -> Result<PhsConfig> {
    if !policy.latched {
        return Err(Error::Contract(
            "apply_braking called before the goal trigger fired".into(),
        ));
    }
    Ok(PhsConfig {
        alpha: config.alpha,
        mass: config.mass,
        friction: config.friction * policy.factor,
    })
}
