//! Port-Hamiltonian momentum optimization with goal-triggered friction
//! braking.
//!
//! The update rule treats the parameter vector θ and a momentum p as a damped
//! mechanical system: mass m controls inertia, friction γ controls energy
//! dissipation. Low friction explores the loss landscape, high friction
//! exploits a basin like plain gradient descent. The goal-oriented controller
//! starts with low friction and multiplies γ by a factor β exactly once, the
//! first time a monitored loss reaches a pre-declared reduction target
//! ("heavy braking").
//!
//! Modules:
//! - [`optim`] — SGD and momentum steps, the energy ledger, the braking
//!   controller, and the seeded run loop.
//! - [`models`] — objectives with hand-coded gradients: analytic landscapes
//!   and a softmax MLP classifier.
//! - [`data`] — IDX/CIFAR-10 binary loaders, synthetic blobs, splits, and the
//!   seeded mini-batch sampler.

pub mod data;
mod error;
pub mod models;
mod objective;
pub mod optim;
mod vector;

pub use error::{Error, Result};
pub use objective::{finite_difference_grad, Objective};
pub use vector::ParamVector;
