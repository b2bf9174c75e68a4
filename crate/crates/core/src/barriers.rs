//! Barrier functions with exact gradients and the linear extended class-K map.
//!
//! Both barriers are treated as globally defined, continuously differentiable
//! functions; no regularity domain is tracked.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Value and gradient of a barrier at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct BarrierEval {
    pub value: f64,
    /// Row vector `∂h/∂x`.
    pub grad: Vec<f64>,
}

pub trait Barrier {
    fn dim(&self) -> usize;
    fn eval(&self, x: &[f64]) -> BarrierEval;
}

/// `α(r) = α·r`, defined for negative `r` as well.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearClassK {
    alpha: f64,
}

impl LinearClassK {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha > 0.0 && alpha.is_finite() {
            Ok(Self { alpha })
        } else {
            Err(Error::Config(format!("class-K gain must be positive, got {alpha}")))
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn apply(&self, r: f64) -> f64 {
        self.alpha * r
    }
}

/// Position-limit barrier for the double integrator built by backstepping:
///
/// `h(x) = (x₁max² − x₁²) − (x₂ + Δx₁)²/ρ`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BacksteppingBarrier {
    pub x1_max: f64,
    pub rho: f64,
    pub delta: f64,
}

impl BacksteppingBarrier {
    pub fn new(x1_max: f64, rho: f64, delta: f64) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::Config(format!("barrier.rho must be positive, got {rho}")));
        }
        Ok(Self { x1_max, rho, delta })
    }
}

impl Barrier for BacksteppingBarrier {
    fn dim(&self) -> usize {
        2
    }

    fn eval(&self, x: &[f64]) -> BarrierEval {
        let (x1, x2) = (x[0], x[1]);
        let z = x2 + self.delta * x1;
        BarrierEval {
            value: (self.x1_max * self.x1_max - x1 * x1) - z * z / self.rho,
            grad: vec![
                -2.0 * x1 - 2.0 * self.delta / self.rho * z,
                -2.0 / self.rho * z,
            ],
        }
    }
}

/// Smooth minimum of the box constraints `|qᵢ| ≤ q_m`:
///
/// `h(q) = −(1/λ_h) ln Σᵢ exp(−λ_h (q_m² − qᵢ²))`
///
/// Exponents are shifted by their maximum before exponentiation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogSumExpBoxBarrier {
    pub q_max: f64,
    pub lambda_h: f64,
    pub dim: usize,
}

impl LogSumExpBoxBarrier {
    pub fn new(q_max: f64, lambda_h: f64, dim: usize) -> Result<Self> {
        if !(q_max > 0.0 && lambda_h > 0.0 && q_max.is_finite() && lambda_h.is_finite()) {
            return Err(Error::Config(format!(
                "barrier needs q_max > 0 and lambda_h > 0, got {q_max}, {lambda_h}"
            )));
        }
        if dim == 0 {
            return Err(Error::Config("barrier dimension must be positive".into()));
        }
        Ok(Self { q_max, lambda_h, dim })
    }

    /// Softmin weights, summing to one.
    pub fn weights(&self, q: &[f64]) -> Vec<f64> {
        let exps = self.exponents(q);
        let top = exps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let shifted: Vec<f64> = exps.iter().map(|e| libm::exp(e - top)).collect();
        let total: f64 = shifted.iter().sum();
        shifted.into_iter().map(|e| e / total).collect()
    }

    fn exponents(&self, q: &[f64]) -> Vec<f64> {
        let qm2 = self.q_max * self.q_max;
        q.iter().map(|qi| -self.lambda_h * (qm2 - qi * qi)).collect()
    }
}

impl Barrier for LogSumExpBoxBarrier {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, q: &[f64]) -> BarrierEval {
        let exps = self.exponents(q);
        let top = exps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let shifted: Vec<f64> = exps.iter().map(|e| libm::exp(e - top)).collect();
        let total: f64 = shifted.iter().sum();
        let value = -(top + libm::log(total)) / self.lambda_h;
        let grad = q
            .iter()
            .zip(&shifted)
            .map(|(qi, e)| -2.0 * qi * (e / total))
            .collect();
        BarrierEval { value, grad }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::{LN_2, PI};

    const TOL: f64 = 1e-12;

    fn di() -> BacksteppingBarrier {
        BacksteppingBarrier::new(1.0, 50.0, 0.1).unwrap()
    }

    #[test]
    fn backstepping_origin() {
        let e = di().eval(&[0.0, 0.0]);
        assert_eq!(e.value, 1.0);
        assert_eq!(e.grad, vec![0.0, 0.0]);
    }

    #[test]
    fn backstepping_at_double_integrator_start() {
        // (1 − 0.5625) − 0.075²/50 = 0.4375 − 0.0001125
        let e = di().eval(&[0.75, 0.0]);
        assert!((e.value - 0.437_387_5).abs() < TOL);
        // −1.5 − (0.2/50)·0.075 and −(2/50)·0.075
        assert!((e.grad[0] + 1.5003).abs() < TOL);
        assert!((e.grad[1] + 0.003).abs() < TOL);
    }

    #[test]
    fn backstepping_outside_set_is_negative() {
        let e = di().eval(&[1.0, 0.0]);
        assert!((e.value + 0.0002).abs() < TOL);
    }

    #[test]
    fn backstepping_rejects_nonpositive_rho() {
        assert!(BacksteppingBarrier::new(1.0, 0.0, 0.1).is_err());
        assert!(BacksteppingBarrier::new(1.0, -2.0, 0.1).is_err());
    }

    #[test]
    fn logsumexp_symmetric_origin() {
        let qm = PI / 6.0;
        let b = LogSumExpBoxBarrier::new(qm, 10.0, 2).unwrap();
        let e = b.eval(&[0.0, 0.0]);
        assert!((e.value - (qm * qm - LN_2 / 10.0)).abs() < TOL);
        assert!((e.value - 0.204_840_96).abs() < 1e-8);
        assert_eq!(e.grad, vec![0.0, 0.0]);
    }

    #[test]
    fn logsumexp_both_constraints_active() {
        let qm = PI / 6.0;
        let b = LogSumExpBoxBarrier::new(qm, 10.0, 2).unwrap();
        let e = b.eval(&[qm, qm]);
        assert!((e.value + LN_2 / 10.0).abs() < TOL);
    }

    #[test]
    fn logsumexp_single_constraint_limit() {
        let qm = PI / 6.0;
        let q = [0.4, 0.0];
        let target = qm * qm - 0.16;
        let mut last_gap = f64::INFINITY;
        for lambda in [10.0, 100.0, 1000.0, 10000.0] {
            let b = LogSumExpBoxBarrier::new(qm, lambda, 2).unwrap();
            let gap = libm::fabs(b.eval(&q).value - target);
            assert!(gap <= last_gap);
            last_gap = gap;
        }
        assert!(last_gap < 1e-12);
    }

    #[test]
    fn logsumexp_survives_huge_exponents() {
        let b = LogSumExpBoxBarrier::new(0.5, 1e4, 2).unwrap();
        let e = b.eval(&[3.0, 0.0]);
        assert!(e.value.is_finite());
        assert!((e.value - (0.25 - 9.0)).abs() < 1e-9);
        assert!(e.grad.iter().all(|g| g.is_finite()));
    }

    #[test]
    fn class_k_examples() {
        assert_eq!(LinearClassK::new(2.5).unwrap().apply(0.0), 0.0);
        assert_eq!(LinearClassK::new(2.5).unwrap().apply(0.4), 1.0);
        assert_eq!(LinearClassK::new(10.0).unwrap().apply(-0.1), -1.0);
        assert!(LinearClassK::new(0.0).is_err());
    }
}
