//! Shared state, gain and trace types.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{check_dim, Error, Result};
use crate::linalg::MAX_DIM;

/// Plant state `x` (or `(q, q̇)` for a manipulator) at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantState {
    pub t: f64,
    pub x: Vec<f64>,
}

/// Intermediate estimate `ν` and the filtered estimate `θ̂` handed to the controller.
///
/// For the first-order (gradient) update laws the two coincide and are
/// integrated with the same right-hand side.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorState {
    pub nu: Vec<f64>,
    pub theta_hat: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedState {
    pub plant: PlantState,
    pub est: EstimatorState,
}

impl AugmentedState {
    /// Flattens to `(x, ν, θ̂)` for the integrator.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = self.plant.x.clone();
        v.extend_from_slice(&self.est.nu);
        v.extend_from_slice(&self.est.theta_hat);
        v
    }

    pub fn from_slice(t: f64, n: usize, p: usize, z: &[f64]) -> Self {
        debug_assert_eq!(z.len(), n + 2 * p);
        Self {
            plant: PlantState { t, x: z[..n].to_vec() },
            est: EstimatorState { nu: z[n..n + p].to_vec(), theta_hat: z[n + p..].to_vec() },
        }
    }
}

/// Adaptation, safety and feedback gains. All matrix gains are diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct GainSet {
    /// Diagonal of the adaptation gain `Γ`.
    pub gamma: Vec<f64>,
    /// Tuner filter bandwidth `β`.
    pub beta: f64,
    /// Linear class-K gain `α`.
    pub alpha: f64,
    /// Diagonal of the sliding-variable feedback gain `K` (robot only).
    pub k: Vec<f64>,
    /// Diagonal of the tracking gain `Λ` (robot only).
    pub lambda: Vec<f64>,
    pub mu: f64,
    pub epsilon: f64,
    /// Known bound `‖ϑ̃‖` on the parameter estimation error.
    pub theta_tilde_bound: f64,
}

impl GainSet {
    pub fn validate(&self) -> Result<()> {
        positive_diag("gains.gamma", &self.gamma)?;
        if !self.k.is_empty() {
            positive_diag("gains.K", &self.k)?;
        }
        if !self.lambda.is_empty() {
            positive_diag("gains.Lambda", &self.lambda)?;
        }
        for (name, v) in [
            ("gains.beta", self.beta),
            ("gains.alpha", self.alpha),
            ("gains.mu", self.mu),
            ("gains.epsilon", self.epsilon),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if !(self.theta_tilde_bound >= 0.0 && self.theta_tilde_bound.is_finite()) {
            return Err(Error::Config(format!(
                "gains.theta_tilde_bound must be nonnegative, got {}",
                self.theta_tilde_bound
            )));
        }
        Ok(())
    }

    /// Worst case of `½ ϑ̃ᵀΓ⁻¹ϑ̃` over all `ϑ̃` with the configured norm.
    pub fn worst_case_error_energy(&self) -> f64 {
        0.5 * self.theta_tilde_bound * self.theta_tilde_bound / min_eigen_diag(&self.gamma)
    }
}

fn positive_diag(name: &str, d: &[f64]) -> Result<()> {
    if d.is_empty() || d.len() > MAX_DIM {
        return Err(Error::Config(format!("{name} must have 1..={MAX_DIM} entries, got {}", d.len())));
    }
    if let Some(v) = d.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(Error::Config(format!("{name} entries must be positive, got {v}")));
    }
    Ok(())
}

/// Per-record certificate values, depending on the plant family.
#[derive(Debug, Clone, PartialEq)]
pub enum Certificate {
    /// Augmented barrier `h_a` for control-affine runs.
    Affine { h_a: f64 },
    /// Lyapunov-like `V`, barrier `B = h − V/μ` and sliding variable `s` for robot runs.
    Robot { v: f64, b: f64, s: Vec<f64> },
}

/// One logged integration step.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub t: f64,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub nu: Vec<f64>,
    pub theta_hat: Vec<f64>,
    pub h: f64,
    pub certificate: Certificate,
    /// `a·u − b` of the active safety constraint at the applied input.
    pub constraint_margin: f64,
}

/// `½ Σ vᵢ² / Γᵢᵢ`
pub fn weighted_quadratic(v: &[f64], gamma: &[f64]) -> Result<f64> {
    check_dim("weighted_quadratic", gamma.len(), v.len())?;
    Ok(0.5 * v.iter().zip(gamma).map(|(vi, gi)| vi * vi / gi).sum::<f64>())
}

/// Smallest eigenvalue of a diagonal matrix given by its diagonal.
pub fn min_eigen_diag(gamma: &[f64]) -> f64 {
    assert!(!gamma.is_empty(), "empty diagonal");
    gamma.iter().copied().fold(f64::INFINITY, f64::min)
}
