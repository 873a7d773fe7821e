use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::PhsState;

/// Energy snapshot along a trajectory: kinetic ‖p‖²/(2m), potential L(θ),
/// and their sum H.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyRecord {
    pub step: u64,
    pub kinetic: f64,
    pub potential: f64,
    pub total: f64,
}

/// Total energy H(x) = ‖p‖²/(2m) + L(θ).
///
/// `loss_value` must be L(θ) evaluated by the caller on the same data the
/// trajectory step used, so the ledger stays comparable step to step.
pub fn hamiltonian(state: &PhsState, loss_value: f64, mass: f64) -> Result<EnergyRecord> {
    if !(mass > 0.0) || !mass.is_finite() {
        return Err(Error::Config(format!("mass must be positive, got {mass}")));
    }
    if !loss_value.is_finite() {
        return Err(Error::NonFinite("loss value".into()));
    }
    let kinetic = state.momentum().norm_sq() / (2.0 * mass);
    Ok(EnergyRecord {
        step: state.step(),
        kinetic,
        potential: loss_value,
        total: kinetic + loss_value,
    })
}
