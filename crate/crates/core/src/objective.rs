use crate::error::{Error, Result};
use crate::vector::ParamVector;

/// A differentiable loss with hand-coded gradients.
///
/// Stochastic objectives evaluate on an index subset of their backing samples
/// (`batch`); analytic landscapes ignore the batch argument and report
/// `sample_count() == None`. Implementations are immutable after construction
/// and safe to share across parallel runs.
pub trait Objective: Send + Sync {
    /// Number of parameters.
    fn dim(&self) -> usize;

    /// Number of backing samples, if the loss is an average over data.
    fn sample_count(&self) -> Option<usize> {
        None
    }

    /// Loss at `theta`, over `batch` indices if given (mean over the batch),
    /// otherwise over all samples.
    fn loss(&self, theta: &ParamVector, batch: Option<&[usize]>) -> Result<f64>;

    /// Gradient of the loss at `theta` over the same batch semantics.
    fn grad(&self, theta: &ParamVector, batch: Option<&[usize]>) -> Result<ParamVector>;

    /// Loss and gradient in one pass. Default calls the two separately;
    /// implementations override when a shared forward pass pays off.
    fn loss_grad(&self, theta: &ParamVector, batch: Option<&[usize]>) -> Result<(f64, ParamVector)> {
        Ok((self.loss(theta, batch)?, self.grad(theta, batch)?))
    }
}

/// Central-difference gradient estimate: (L(θ+h·eᵢ) − L(θ−h·eᵢ)) / 2h.
///
/// Verification oracle for hand-coded gradients; deliberately evaluates the
/// loss only, never the gradient under test.
pub fn finite_difference_grad(
    objective: &dyn Objective,
    theta: &ParamVector,
    h: f64,
    batch: Option<&[usize]>,
) -> Result<ParamVector> {
    if !(h > 0.0) {
        return Err(Error::Config(format!("finite-difference step must be positive, got {h}")));
    }
    let mut probe = theta.clone();
    let mut out = Vec::with_capacity(theta.dim());
    for i in 0..theta.dim() {
        let orig = probe[i];
        probe.as_mut_slice()[i] = orig + h;
        let plus = objective.loss(&probe, batch)?;
        probe.as_mut_slice()[i] = orig - h;
        let minus = objective.loss(&probe, batch)?;
        probe.as_mut_slice()[i] = orig;
        if !plus.is_finite() || !minus.is_finite() {
            return Err(Error::NonFinite(format!("finite-difference probe at coordinate {i}")));
        }
        out.push((plus - minus) / (2.0 * h));
    }
    ParamVector::new(out)
}
