//! Optimizer state machines: plain gradient descent, the port-Hamiltonian
//! momentum step, energy accounting, and the goal-triggered friction switch.

mod energy;
mod goal;
mod runner;

pub use energy::{hamiltonian, EnergyRecord};
pub use goal::{apply_braking, goal_trigger, GoalPolicy, LossMonitor, TriggerMode};
pub use runner::{run_optimizer, EvalPoint, Method, RunTrace, StepBudget};

use serde::{Deserialize, Serialize};

use crate::error::{check_dims, Error, Result};
use crate::vector::ParamVector;

/// Step length α, mass m and friction coefficient γ of the momentum update.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhsConfig {
    pub alpha: f64,
    pub mass: f64,
    pub friction: f64,
}

impl PhsConfig {
    pub fn new(alpha: f64, mass: f64, friction: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::Config(format!("alpha must be positive, got {alpha}")));
        }
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(Error::Config(format!("mass must be positive, got {mass}")));
        }
        if !(friction >= 0.0) || !friction.is_finite() {
            return Err(Error::Config(format!("friction must be non-negative, got {friction}")));
        }
        Ok(Self { alpha, mass, friction })
    }

    /// Explicit-Euler stability check on a quadratic with largest curvature
    /// `lambda_max`.
    ///
    /// The one-step map on a curvature-λ mode has determinant
    /// `1 − αγ/m + α²λ/m` and trace `2 − αγ/m`; both Jury conditions hold when
    ///
    /// * `γ > α·λ`            (dissipation beats the Euler energy injection), and
    /// * `α·(γ + α·λ)/m < 2`  (no momentum overshoot).
    ///
    /// The second line is slightly conservative (the exact bound carries a
    /// minus sign); configs violating either are expected to diverge.
    pub fn stable_on_quadratic(&self, lambda_max: f64) -> bool {
        self.friction > self.alpha * lambda_max
            && self.alpha * (self.friction + self.alpha * lambda_max) / self.mass < 2.0
    }
}

/// Optimizer state x = (θ, p) plus a step counter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhsState {
    theta: ParamVector,
    momentum: ParamVector,
    step: u64,
}

impl PhsState {
    pub fn new(theta: ParamVector, momentum: ParamVector) -> Result<Self> {
        check_dims(theta.dim(), momentum.dim())?;
        Ok(Self { theta, momentum, step: 0 })
    }

    /// State at θ with zero initial momentum, so H(x₀) = L(θ₀).
    pub fn at_rest(theta: ParamVector) -> Self {
        let momentum = ParamVector::zeros(theta.dim());
        Self { theta, momentum, step: 0 }
    }

    pub fn theta(&self) -> &ParamVector {
        &self.theta
    }

    pub fn momentum(&self) -> &ParamVector {
        &self.momentum
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn dim(&self) -> usize {
        self.theta.dim()
    }
}

/// One explicit-Euler step of the gradient flow: θ − α·∇L(θ).
pub fn sgd_step(theta: &ParamVector, grad: &ParamVector, alpha: f64) -> Result<ParamVector> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::Config(format!("alpha must be positive, got {alpha}")));
    }
    if !grad.is_finite() {
        return Err(Error::NonFinite("gradient".into()));
    }
    theta.add_scaled(grad, -alpha)
}

/// One momentum step:
///
/// ```text
/// θ_{k+1} = θ_k + α·(1/m)·p_k
/// p_{k+1} = p_k − α·(γ/m)·p_k − α·∇L(θ_k)
/// ```
///
/// Both lines read the old momentum p_k (simultaneous update), and the
/// gradient is the caller-supplied ∇L evaluated at θ_k.
pub fn phs_step(state: &PhsState, grad: &ParamVector, config: &PhsConfig) -> Result<PhsState> {
    check_dims(state.dim(), grad.dim())?;
    if !grad.is_finite() {
        return Err(Error::NonFinite("gradient".into()));
    }
    let p_k = &state.momentum;
    let theta_next = state.theta.add_scaled(p_k, config.alpha / config.mass)?;
    let damped = p_k.add_scaled(p_k, -config.alpha * config.friction / config.mass)?;
    let p_next = damped.add_scaled(grad, -config.alpha)?;
    Ok(PhsState {
        theta: theta_next,
        momentum: p_next,
        step: state.step + 1,
    })
}
