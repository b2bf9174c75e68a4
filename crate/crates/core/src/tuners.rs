//! Parameter-estimate dynamics: the gradient law, the high-order tuner and a
//! smooth projection on the intermediate estimate.

use alloc::format;
use alloc::vec::Vec;

use crate::barriers::BarrierEval;
use crate::error::{check_dim, Error, Result};
use crate::filters::AffineTerms;
use crate::linalg::{self, Mat};

/// Time derivatives of `(ν, θ̂)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TunerRates {
    pub nu_dot: Vec<f64>,
    pub theta_hat_dot: Vec<f64>,
}

/// `ν̇ = −Γψ` with `ψ = (∂h/∂x·G·Φ)ᵀ`.
pub fn gradient_update(terms: &AffineTerms, bar: &BarrierEval, gamma: &[f64]) -> Result<Vec<f64>> {
    check_dim("gradient_update", terms.drift.len(), bar.grad.len())?;
    let psi = terms.psi(bar);
    check_dim("gamma", psi.len(), gamma.len())?;
    Ok(psi.iter().zip(gamma).map(|(p, g)| -g * p).collect())
}

/// High-order tuner: `ν̇ = −Γψ`, `θ̂̇ = βΓ(ν − θ̂)`.
pub fn hot_update(nu: &[f64], theta_hat: &[f64], psi: &[f64], gamma: &[f64], beta: f64) -> Result<TunerRates> {
    let p = gamma.len();
    check_dim("hot_update nu", p, nu.len())?;
    check_dim("hot_update theta_hat", p, theta_hat.len())?;
    check_dim("hot_update psi", p, psi.len())?;
    Ok(TunerRates {
        nu_dot: psi.iter().zip(gamma).map(|(ps, g)| -g * ps).collect(),
        theta_hat_dot: (0..p).map(|i| beta * gamma[i] * (nu[i] - theta_hat[i])).collect(),
    })
}

/// Robot form of the high-order tuner with `ψ = Wᵀs`.
pub fn hot_update_robot(
    nu: &[f64],
    theta_hat: &[f64],
    w: &Mat,
    s: &[f64],
    gamma: &[f64],
    beta: f64,
) -> Result<TunerRates> {
    check_dim("hot_update_robot s", w.rows(), s.len())?;
    hot_update(nu, theta_hat, &w.tr_mul_vec(s), gamma, beta)
}

/// Ball `‖ν − c‖ ≤ r` with a boundary layer of relative width `ε_proj`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionBall {
    pub center: Vec<f64>,
    pub radius: f64,
    pub boundary_layer: f64,
}

impl ProjectionBall {
    pub fn new(center: Vec<f64>, radius: f64, boundary_layer: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite() && boundary_layer > 0.0 && boundary_layer.is_finite()) {
            return Err(Error::Config(format!(
                "projection ball needs radius > 0 and boundary layer > 0, got {radius}, {boundary_layer}"
            )));
        }
        Ok(Self { center, radius, boundary_layer })
    }

    /// `p(ν) = (‖ν−c‖² − r²)/(ε r²)`; zero on the sphere, one on the outer edge of the layer.
    pub fn level(&self, nu: &[f64]) -> f64 {
        let r2 = self.radius * self.radius;
        (linalg::norm_sq(&linalg::sub(nu, &self.center)) - r2) / (self.boundary_layer * r2)
    }

    /// `r√(1 + ε)`
    pub fn outer_radius(&self) -> f64 {
        self.radius * libm::sqrt(1.0 + self.boundary_layer)
    }
}

/// Smooth projection of `ν̇`: strips a growing share of the outward normal
/// component inside the boundary layer, all of it at the outer edge.
pub fn project_rate(nu: &[f64], nu_dot: &[f64], ball: &ProjectionBall) -> Result<Vec<f64>> {
    check_dim("project_rate nu", ball.center.len(), nu.len())?;
    check_dim("project_rate nu_dot", nu.len(), nu_dot.len())?;
    let level = ball.level(nu);
    // ∇p is parallel to ν − c; its scale cancels in the projector.
    let normal = linalg::sub(nu, &ball.center);
    let outward = linalg::dot(&normal, nu_dot);
    if level <= 0.0 || outward <= 0.0 {
        return Ok(nu_dot.to_vec());
    }
    let mut out = nu_dot.to_vec();
    linalg::axpy(&mut out, -level.min(1.0) * outward / linalg::norm_sq(&normal), &normal);
    Ok(out)
}
