//! Differentiable objectives with hand-coded gradients: analytic test
//! landscapes and a softmax classifier, plus the finite-difference oracle in
//! [`crate::objective`].

mod mlp;

pub use mlp::{mlp_classifier, Activation, MlpClassifier, MlpSpec};

use crate::error::{check_dims, Error, Result};
use crate::objective::Objective;
use crate::vector::ParamVector;

/// Convex quadratic L(θ) = ½·Σ λᵢθᵢ², minimum 0 at the origin.
#[derive(Debug, Clone)]
pub struct Quadratic {
    curvatures: Vec<f64>,
}

/// Builds a quadratic objective from a positive curvature spectrum.
pub fn quadratic(curvatures: Vec<f64>) -> Result<Quadratic> {
    if curvatures.is_empty() {
        return Err(Error::Config("curvature spectrum must be non-empty".into()));
    }
    if let Some(&bad) = curvatures.iter().find(|&&l| !(l > 0.0) || !l.is_finite()) {
        return Err(Error::Config(format!("curvatures must be positive, got {bad}")));
    }
    Ok(Quadratic { curvatures })
}

impl Objective for Quadratic {
    fn dim(&self) -> usize {
        self.curvatures.len()
    }

    fn loss(&self, theta: &ParamVector, _batch: Option<&[usize]>) -> Result<f64> {
        check_dims(self.dim(), theta.dim())?;
        Ok(0.5
            * theta
                .iter()
                .zip(&self.curvatures)
                .map(|(t, l)| l * t * t)
                .sum::<f64>())
    }

    fn grad(&self, theta: &ParamVector, _batch: Option<&[usize]>) -> Result<ParamVector> {
        check_dims(self.dim(), theta.dim())?;
        ParamVector::new(
            theta
                .iter()
                .zip(&self.curvatures)
                .map(|(t, l)| l * t)
                .collect(),
        )
    }
}

/// Largest offset for which both wells of the tilted double well survive:
/// 8/(3√3), where the cubic 4θ³ − 4θ + offset loses its extra real roots.
pub const DOUBLE_WELL_OFFSET_BOUND: f64 = 1.5396007178390018;

/// One-dimensional tilted double well L(θ) = (θ²−1)² + offset·θ.
///
/// For offset > 0 the left well (θ ≈ −1) is global and the right well
/// (θ ≈ +1) is a higher local minimum, the minimal landscape on which
/// momentum can overcome a poor basin while plain descent cannot.
#[derive(Debug, Clone)]
pub struct DoubleWell {
    offset: f64,
}

pub fn double_well(offset: f64) -> Result<DoubleWell> {
    if !offset.is_finite() || offset.abs() >= DOUBLE_WELL_OFFSET_BOUND {
        return Err(Error::Config(format!(
            "offset must satisfy |offset| < {DOUBLE_WELL_OFFSET_BOUND} so both wells persist, got {offset}"
        )));
    }
    Ok(DoubleWell { offset })
}

impl DoubleWell {
    pub fn offset(&self) -> f64 {
        self.offset
    }
}

impl Objective for DoubleWell {
    fn dim(&self) -> usize {
        1
    }

    fn loss(&self, theta: &ParamVector, _batch: Option<&[usize]>) -> Result<f64> {
        check_dims(1, theta.dim())?;
        let t = theta[0];
        Ok((t * t - 1.0).powi(2) + self.offset * t)
    }

    fn grad(&self, theta: &ParamVector, _batch: Option<&[usize]>) -> Result<ParamVector> {
        check_dims(1, theta.dim())?;
        let t = theta[0];
        ParamVector::new(vec![4.0 * t * (t * t - 1.0) + self.offset])
    }
}

/// Standard n-dimensional Rosenbrock valley, minimum 0 at all-ones.
#[derive(Debug, Clone)]
pub struct Rosenbrock {
    dim: usize,
}

pub fn rosenbrock(dim: usize) -> Result<Rosenbrock> {
    if dim < 2 {
        return Err(Error::Config(format!("rosenbrock needs dim >= 2, got {dim}")));
    }
    Ok(Rosenbrock { dim })
}

impl Objective for Rosenbrock {
    fn dim(&self) -> usize {
        self.dim
    }

    fn loss(&self, theta: &ParamVector, _batch: Option<&[usize]>) -> Result<f64> {
        check_dims(self.dim, theta.dim())?;
        let t = theta.as_slice();
        Ok(t.windows(2)
            .map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (1.0 - w[0]).powi(2))
            .sum())
    }

    fn grad(&self, theta: &ParamVector, _batch: Option<&[usize]>) -> Result<ParamVector> {
        check_dims(self.dim, theta.dim())?;
        let t = theta.as_slice();
        let n = self.dim;
        let mut g = vec![0.0; n];
        for i in 0..n - 1 {
            let gap = t[i + 1] - t[i] * t[i];
            g[i] += -400.0 * t[i] * gap - 2.0 * (1.0 - t[i]);
            g[i + 1] += 200.0 * gap;
        }
        ParamVector::new(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::finite_difference_grad;
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pv(v: &[f64]) -> ParamVector {
        ParamVector::new(v.to_vec()).unwrap()
    }

    fn rel_err(a: &ParamVector, b: &ParamVector) -> f64 {
        let diff: f64 = a
            .iter()
            .zip(b.iter())
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt();
        diff / b.norm_sq().sqrt().max(1e-12)
    }

    #[test]
    fn quadratic_closed_form() {
        let q = quadratic(vec![1.0, 1.0]).unwrap();
        assert_eq!(q.loss(&pv(&[1.0, 1.0]), None).unwrap(), 1.0);
        assert_eq!(q.grad(&pv(&[1.0, 1.0]), None).unwrap().as_slice(), &[1.0, 1.0]);
        assert_eq!(q.loss(&pv(&[0.0, 0.0]), None).unwrap(), 0.0);
        assert_eq!(q.grad(&pv(&[0.0, 0.0]), None).unwrap().as_slice(), &[0.0, 0.0]);
    }

    #[test]
    fn quadratic_rejects_bad_spectrum() {
        assert!(quadratic(vec![]).is_err());
        assert!(quadratic(vec![1.0, 0.0]).is_err());
        assert!(quadratic(vec![1.0, -2.0]).is_err());
    }

    #[test]
    fn quadratic_gradient_check() {
        let q = quadratic(vec![1.0, 100.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let theta = pv(&[rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)]);
            let analytic = q.grad(&theta, None).unwrap();
            let numeric = finite_difference_grad(&q, &theta, 1e-6, None).unwrap();
            assert!(rel_err(&analytic, &numeric) < 1e-8);
        }
    }

    #[test]
    fn double_well_symmetric_minima_at_zero_offset() {
        let dw = double_well(0.0).unwrap();
        for t in [-1.0, 1.0] {
            assert_eq!(dw.loss(&pv(&[t]), None).unwrap(), 0.0);
            assert_eq!(dw.grad(&pv(&[t]), None).unwrap().as_slice(), &[0.0]);
        }
    }

    #[test]
    fn double_well_offset_bound() {
        assert!(double_well(1.54).is_err());
        assert!(double_well(-1.54).is_err());
        assert!(double_well(1.53).is_ok());
    }

    /// Bisection root-finder for the stationarity cubic 4θ³ − 4θ + offset,
    /// independent of the gradient implementation.
    fn cubic_root(offset: f64, mut lo: f64, mut hi: f64) -> f64 {
        let f = |t: f64| 4.0 * t * t * t - 4.0 * t + offset;
        assert!(f(lo) * f(hi) < 0.0, "root not bracketed");
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(lo) * f(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn double_well_stationary_points_match_root_finding() {
        let dw = double_well(0.3).unwrap();
        // Brackets chosen around the three sign changes of the cubic.
        let deep = cubic_root(0.3, -1.5, -0.5);
        let barrier = cubic_root(0.3, 0.0, 0.5);
        let shallow = cubic_root(0.3, 0.5, 1.5);

        assert_relative_eq!(deep, -1.0355787140888537, max_relative = 1e-10);
        assert_relative_eq!(barrier, 0.07542915856974822, max_relative = 1e-10);
        assert_relative_eq!(shallow, 0.9601495555191055, max_relative = 1e-10);

        for root in [deep, barrier, shallow] {
            assert!(dw.grad(&pv(&[root]), None).unwrap()[0].abs() < 1e-9);
        }

        // Well values: the left well is global, the right well sits higher.
        let l_deep = dw.loss(&pv(&[deep]), None).unwrap();
        let l_shallow = dw.loss(&pv(&[shallow]), None).unwrap();
        assert_relative_eq!(l_deep, -0.30542848374391596, epsilon = 1e-10);
        assert_relative_eq!(l_shallow, 0.29414648102826285, epsilon = 1e-10);
        assert!(l_deep < l_shallow);

        // Second derivative 12θ²−4 separates the two minima from the barrier.
        for (root, is_min) in [(deep, true), (barrier, false), (shallow, true)] {
            let curv = 12.0 * root * root - 4.0;
            assert_eq!(curv > 0.0, is_min);
        }
    }

    #[test]
    fn double_well_gradient_check() {
        let dw = double_well(0.3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let theta = pv(&[rng.gen_range(-2.0..2.0)]);
            let analytic = dw.grad(&theta, None).unwrap();
            let numeric = finite_difference_grad(&dw, &theta, 1e-6, None).unwrap();
            assert!(rel_err(&analytic, &numeric) < 1e-8);
        }
    }

    #[test]
    fn rosenbrock_known_values() {
        let r = rosenbrock(2).unwrap();
        assert_eq!(r.loss(&pv(&[1.0, 1.0]), None).unwrap(), 0.0);
        assert_eq!(r.grad(&pv(&[1.0, 1.0]), None).unwrap().as_slice(), &[0.0, 0.0]);
        assert_eq!(r.loss(&pv(&[0.0, 0.0]), None).unwrap(), 1.0);

        let r5 = rosenbrock(5).unwrap();
        assert_eq!(r5.loss(&pv(&[1.0; 5]), None).unwrap(), 0.0);
    }

    #[test]
    fn rosenbrock_needs_two_dims() {
        assert!(rosenbrock(1).is_err());
        assert!(rosenbrock(2).is_ok());
    }

    #[test]
    fn rosenbrock_gradient_check() {
        let r = rosenbrock(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let theta = pv(&(0..4).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<_>>());
            let analytic = r.grad(&theta, None).unwrap();
            let numeric = finite_difference_grad(&r, &theta, 1e-6, None).unwrap();
            assert!(rel_err(&analytic, &numeric) < 1e-8, "rel err {}", rel_err(&analytic, &numeric));
        }
    }

    #[test]
    fn finite_difference_exact_on_linear_gradient() {
        // Quadratic loss has exactly representable central differences.
        let q = quadratic(vec![1.0]).unwrap();
        let fd = finite_difference_grad(&q, &pv(&[2.0]), 1e-6, None).unwrap();
        assert_relative_eq!(fd[0], 2.0, epsilon = 1e-9);
    }
}
