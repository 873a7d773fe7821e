use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::BatchPlan;
use crate::error::{check_dims, Error, Result};
use crate::objective::Objective;
use crate::optim::{
    apply_braking, goal_trigger, hamiltonian, phs_step, sgd_step, EnergyRecord, GoalPolicy,
    LossMonitor, PhsConfig, PhsState,
};
use crate::vector::ParamVector;

/// Which update rule drives the run. Goal-oriented braking carries its policy
/// here, so a braking run cannot be configured without one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Method {
    Sgd { alpha: f64 },
    Phs { config: PhsConfig },
    GoalPhs { config: PhsConfig, policy: GoalPolicy },
}

impl Method {
    pub fn alpha(&self) -> f64 {
        match self {
            Method::Sgd { alpha } => *alpha,
            Method::Phs { config } | Method::GoalPhs { config, .. } => config.alpha,
        }
    }
}

/// Step budget and recording cadences for one run.
///
/// For data-backed objectives an epoch is one pass over the mini-batches;
/// for analytic landscapes an epoch is a single full-gradient step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepBudget {
    pub epochs: usize,
    pub batch_size: usize,
    pub drop_last: bool,
    /// Record an `EnergyRecord` every this many steps (0 disables).
    pub energy_stride: u64,
    /// Invoke the evaluation hook every this many epochs (0 disables).
    pub eval_every_epochs: usize,
    /// Sample count for the fixed baseline-loss batch; clamped to the set size.
    pub baseline_eval_samples: usize,
    /// Standard deviation of additive Gaussian gradient noise (0 disables).
    /// Lets analytic landscapes emulate mini-batch gradient noise.
    pub grad_noise: f64,
}

impl Default for StepBudget {
    fn default() -> Self {
        Self {
            epochs: 1,
            batch_size: 128,
            drop_last: false,
            energy_stride: 1,
            eval_every_epochs: 1,
            baseline_eval_samples: 2048,
            grad_noise: 0.0,
        }
    }
}

/// Periodic evaluation result (e.g. test accuracy) attached to a step index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalPoint {
    pub step: u64,
    pub value: f64,
}

/// Everything one run produced, serializable for the harness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub seed: u64,
    /// Baseline loss L₀ measured before the first update.
    pub initial_loss: f64,
    /// Per-step mini-batch training loss, evaluated at θ_k before the update.
    pub loss: Vec<f64>,
    /// Per-step monitored loss (EMA by default).
    pub ema_loss: Vec<f64>,
    /// Friction coefficient in effect at each step (0 for SGD).
    pub friction: Vec<f64>,
    pub energy: Vec<EnergyRecord>,
    /// Hook results, one per evaluation epoch.
    pub evals: Vec<EvalPoint>,
    /// First step executed with the braked friction, if the trigger fired.
    pub trigger_step: Option<u64>,
    pub final_state: PhsState,
    pub steps_taken: u64,
    pub diverged: bool,
    /// Diagnostic set when the run aborted.
    pub divergence: Option<String>,
}

/// Consecutive monitored-loss evaluations above 10·L₀ before a run is
/// declared diverged.
const DIVERGENCE_PATIENCE: u32 = 3;
const DIVERGENCE_FACTOR: f64 = 10.0;

// Separate ChaCha streams so batch order and gradient noise stay independent.
const STREAM_BASELINE: u64 = 1;
const STREAM_BATCHES: u64 = 2;
const STREAM_NOISE: u64 = 3;

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Drives one seeded optimization run and records its history.
///
/// The run is deterministic given (`objective`, `init`, `method`, `schedule`,
/// `seed`). A non-finite loss or parameter overflow does not error out: the
/// partial trace is returned with `diverged` set and a diagnostic attached.
/// `eval_hook` is called after every `eval_every_epochs`-th epoch with the
/// step index and current parameters (the harness uses it for test accuracy).
pub fn run_optimizer(
    objective: &dyn Objective,
    init: PhsState,
    method: &Method,
    schedule: &StepBudget,
    seed: u64,
    mut eval_hook: Option<&mut dyn FnMut(u64, &ParamVector) -> f64>,
) -> Result<RunTrace> {
    check_dims(objective.dim(), init.dim())?;
    if schedule.epochs == 0 {
        return Err(Error::Config("step budget must cover at least one epoch".into()));
    }

    let baseline_batch = baseline_batch(objective, schedule, seed)?;
    let initial_loss = objective.loss(init.theta(), baseline_batch.as_deref())?;
    if !initial_loss.is_finite() {
        return Err(Error::NonFinite("baseline loss".into()));
    }

    // Mutable copies of the controller state for this run.
    let mut config = match method {
        Method::Sgd { .. } => None,
        Method::Phs { config } | Method::GoalPhs { config, .. } => Some(config.clone()),
    };
    let mut policy = match method {
        Method::GoalPhs { policy, .. } => Some(policy.clone()),
        _ => None,
    };
    let monitor = policy.as_ref().map(|p| p.monitor).unwrap_or_default();
    let ema_decay = match monitor {
        LossMonitor::Ema { decay } => decay,
        _ => 0.9,
    };

    let mut noise_rng = stream_rng(seed, STREAM_NOISE);
    let batch_plan = objective.sample_count().map(|_| BatchPlan {
        batch_size: schedule.batch_size,
        seed: seed ^ STREAM_BATCHES,
        drop_last: schedule.drop_last,
    });

    let mut state = init;
    let mut trace = RunTrace {
        seed,
        initial_loss,
        loss: Vec::new(),
        ema_loss: Vec::new(),
        friction: Vec::new(),
        energy: Vec::new(),
        evals: Vec::new(),
        trigger_step: None,
        final_state: state.clone(),
        steps_taken: 0,
        diverged: false,
        divergence: None,
    };

    // The EMA starts at L₀ so the monitored signal is defined from step 0.
    let mut ema = initial_loss;
    // Monitored value for trigger checks; updated per the monitor kind.
    let mut monitored = initial_loss;
    let mut step: u64 = 0;
    let mut divergence_streak: u32 = 0;

    'epochs: for epoch in 0..schedule.epochs {
        let batches: Vec<Option<Vec<usize>>> = match (&batch_plan, objective.sample_count()) {
            (Some(plan), Some(n)) => plan
                .epoch_batches(n, epoch as u64)?
                .into_iter()
                .map(Some)
                .collect(),
            _ => vec![None],
        };

        for batch in batches {
            // Trigger check happens before the step, so `trigger_step` is the
            // first step executed with the braked friction.
            if let (Some(p), Some(c)) = (policy.as_mut(), config.as_mut()) {
                if !p.latched() && goal_trigger(p, monitored, initial_loss)? {
                    *c = apply_braking(c, p)?;
                    trace.trigger_step = Some(step);
                }
            }

            let batch_ref = batch.as_deref();
            let (loss, mut grad) = match objective.loss_grad(state.theta(), batch_ref) {
                Ok(lg) => lg,
                Err(Error::NonFinite(what)) => {
                    abort(&mut trace, &state, step, format!("non-finite {what} at step {step}"));
                    break 'epochs;
                }
                Err(e) => return Err(e),
            };
            if !loss.is_finite() {
                abort(&mut trace, &state, step, format!("non-finite loss at step {step}"));
                break 'epochs;
            }

            if schedule.grad_noise > 0.0 {
                for g in grad.as_mut_slice() {
                    let z: f64 = StandardNormal.sample(&mut noise_rng);
                    *g += schedule.grad_noise * z;
                }
            }

            let friction_now = config.as_ref().map(|c| c.friction).unwrap_or(0.0);
            trace.loss.push(loss);
            trace.friction.push(friction_now);

            if schedule.energy_stride > 0 && step % schedule.energy_stride == 0 {
                let mass = config.as_ref().map(|c| c.mass).unwrap_or(1.0);
                trace.energy.push(hamiltonian(&state, loss, mass)?);
            }

            let next = match (&*method, config.as_ref()) {
                (Method::Sgd { alpha }, _) => {
                    match sgd_step(state.theta(), &grad, *alpha) {
                        Ok(theta) => PhsState {
                            // SGD carries no momentum; keep a zero vector so the
                            // state shape stays uniform across methods.
                            momentum: ParamVector::zeros(theta.dim()),
                            theta,
                            step: state.step() + 1,
                        },
                        Err(Error::NonFinite(what)) => {
                            abort(&mut trace, &state, step, format!("{what} overflow at step {step}"));
                            break 'epochs;
                        }
                        Err(e) => return Err(e),
                    }
                }
                (_, Some(c)) => match phs_step(&state, &grad, c) {
                    Ok(s) => s,
                    Err(Error::NonFinite(what)) => {
                        abort(&mut trace, &state, step, format!("{what} overflow at step {step}"));
                        break 'epochs;
                    }
                    Err(e) => return Err(e),
                },
                _ => unreachable!("non-SGD method always carries a config"),
            };
            state = next;

            ema = ema_decay * ema + (1.0 - ema_decay) * loss;
            trace.ema_loss.push(ema);
            monitored = match monitor {
                LossMonitor::Minibatch => loss,
                LossMonitor::Ema { .. } => ema,
                LossMonitor::FullEval { every } => {
                    if (step + 1) % every == 0 {
                        objective.loss(state.theta(), None)?
                    } else {
                        monitored
                    }
                }
            };
            step += 1;
        }

        if schedule.eval_every_epochs > 0 && (epoch + 1) % schedule.eval_every_epochs == 0 {
            if let Some(hook) = eval_hook.as_mut() {
                trace.evals.push(EvalPoint {
                    step: step.saturating_sub(1),
                    value: hook(step.saturating_sub(1), state.theta()),
                });
            }
        }

        // Epoch-level runaway check: EMA far above the baseline for several
        // consecutive evaluations counts as divergence even while finite.
        if ema > DIVERGENCE_FACTOR * initial_loss.abs() {
            divergence_streak += 1;
            if divergence_streak >= DIVERGENCE_PATIENCE {
                abort(
                    &mut trace,
                    &state,
                    step,
                    format!("EMA loss exceeded {DIVERGENCE_FACTOR}×L0 for {DIVERGENCE_PATIENCE} consecutive epochs"),
                );
                break 'epochs;
            }
        } else {
            divergence_streak = 0;
        }
    }

    if !trace.diverged {
        trace.final_state = state;
        trace.steps_taken = step;
    }
    Ok(trace)
}

fn abort(trace: &mut RunTrace, state: &PhsState, step: u64, why: String) {
    trace.diverged = true;
    trace.divergence = Some(why);
    trace.final_state = state.clone();
    trace.steps_taken = step;
}

/// Fixed index set for the baseline loss L₀: a seeded draw of
/// `baseline_eval_samples` indices (or the full set when smaller), decoupled
/// from the first mini-batch so the goal threshold is stable under batch noise.
fn baseline_batch(
    objective: &dyn Objective,
    schedule: &StepBudget,
    seed: u64,
) -> Result<Option<Vec<usize>>> {
    let Some(n) = objective.sample_count() else {
        return Ok(None);
    };
    if schedule.baseline_eval_samples >= n {
        return Ok(None); // full set
    }
    use rand::seq::SliceRandom;
    let mut rng = stream_rng(seed, STREAM_BASELINE);
    let mut indices: Vec<usize> = (0..n).collect();
    indices.shuffle(&mut rng);
    indices.truncate(schedule.baseline_eval_samples);
    indices.sort_unstable();
    Ok(Some(indices))
}
