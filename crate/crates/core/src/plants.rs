//! Benchmark plants.
//!
//! Each plant is split into a parameter-free model (what controllers and
//! tuners may see) and a wrapper carrying the true parameters, which only the
//! simulator and the certificate monitors read.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_dim, Error, Result};
use crate::filters::AffineTerms;
use crate::linalg::{self, Mat};

/// `ẋ = f(x) + G(x)(u + Φ(x)θ)`
pub trait ControlAffine {
    fn state_dim(&self) -> usize;
    fn input_dim(&self) -> usize;
    fn param_dim(&self) -> usize;
    fn terms(&self, x: &[f64]) -> AffineTerms;
}

/// `ẋ₁ = x₂`, `ẋ₂ = θ₁x₁ + θ₂x₂ + u`
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DoubleIntegrator;

impl ControlAffine for DoubleIntegrator {
    fn state_dim(&self) -> usize {
        2
    }
    fn input_dim(&self) -> usize {
        1
    }
    fn param_dim(&self) -> usize {
        2
    }
    fn terms(&self, x: &[f64]) -> AffineTerms {
        AffineTerms {
            drift: vec![x[1], 0.0],
            input: Mat::from_rows(&[&[0.0], &[1.0]]),
            regressor: Mat::from_rows(&[&[x[0], x[1]]]),
        }
    }
}

/// A control-affine model together with its true parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinePlant<M> {
    pub model: M,
    theta_true: Vec<f64>,
}

impl<M: ControlAffine> AffinePlant<M> {
    pub fn new(model: M, theta_true: Vec<f64>) -> Result<Self> {
        check_dim("theta_true", model.param_dim(), theta_true.len())?;
        Ok(Self { model, theta_true })
    }

    /// Ground truth; for simulation and monitoring only.
    pub fn theta_true(&self) -> &[f64] {
        &self.theta_true
    }

    /// `f + G(u + Φθ)`
    pub fn dynamics(&self, x: &[f64], u: &[f64]) -> Result<Vec<f64>> {
        check_dim("state", self.model.state_dim(), x.len())?;
        check_dim("input", self.model.input_dim(), u.len())?;
        let t = self.model.terms(x);
        let total = linalg::add(u, &t.regressor.mul_vec(&self.theta_true));
        Ok(linalg::add(&t.drift, &t.input.mul_vec(&total)))
    }
}

/// Double integrator with `θ = (10, 10)`.
pub fn double_integrator() -> AffinePlant<DoubleIntegrator> {
    AffinePlant { model: DoubleIntegrator, theta_true: vec![10.0, 10.0] }
}

/// Planar two-link arm parameterised by `θ = (p₁, p₂, p₃)`.
///
/// `M = [[p₁ + 2p₃c₂, p₂ + p₃c₂], [p₂ + p₃c₂, p₂]]`,
/// `C = [[−p₃s₂q̇₂, −p₃s₂(q̇₁+q̇₂)], [p₃s₂q̇₁, 0]]`, `g = 0`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TwoLink;

pub const TWO_LINK_THETA: [f64; 3] = [3.473, 0.196, 0.242];

impl TwoLink {
    pub const DOF: usize = 2;
    pub const PARAMS: usize = 3;

    pub fn inertia(&self, q: &[f64], th: &[f64]) -> Mat {
        let c2 = libm::cos(q[1]);
        let off = th[1] + th[2] * c2;
        Mat::from_rows(&[&[th[0] + 2.0 * th[2] * c2, off], &[off, th[1]]])
    }

    /// `Ṁ(q, q̇)`
    pub fn inertia_rate(&self, q: &[f64], qd: &[f64], th: &[f64]) -> Mat {
        let k = -th[2] * libm::sin(q[1]) * qd[1];
        Mat::from_rows(&[&[2.0 * k, k], &[k, 0.0]])
    }

    pub fn coriolis(&self, q: &[f64], qd: &[f64], th: &[f64]) -> Mat {
        let k = th[2] * libm::sin(q[1]);
        Mat::from_rows(&[&[-k * qd[1], -k * (qd[0] + qd[1])], &[k * qd[0], 0.0]])
    }

    pub fn gravity(&self, _q: &[f64], _th: &[f64]) -> Vec<f64> {
        vec![0.0, 0.0]
    }

    /// `Y` with `Y(q, q̇, r, ṙ)θ = M(q)ṙ + C(q, q̇)r + g(q)`.
    pub fn regressor(&self, q: &[f64], qd: &[f64], r: &[f64], rd: &[f64]) -> Mat {
        let (c2, s2) = (libm::cos(q[1]), libm::sin(q[1]));
        let y13 = 2.0 * c2 * rd[0] + c2 * rd[1] - s2 * qd[1] * r[0] - s2 * (qd[0] + qd[1]) * r[1];
        let y23 = c2 * rd[0] + s2 * qd[0] * r[0];
        Mat::from_rows(&[&[rd[0], rd[1], y13], &[0.0, rd[0] + rd[1], y23]])
    }
}

/// Free-standing form of [`TwoLink::regressor`].
pub fn lip_regressor(q: &[f64], qd: &[f64], r: &[f64], rd: &[f64]) -> Mat {
    TwoLink.regressor(q, qd, r, rd)
}

/// Below this `det M` the inertia is reported singular.
pub const SINGULAR_DET: f64 = 1e-9;

/// A manipulator model together with its true parameters and inertia bound `M̄`.
#[derive(Debug, Clone, PartialEq)]
pub struct ManipulatorPlant {
    pub model: TwoLink,
    theta_true: Vec<f64>,
    pub m_upper: f64,
}

impl ManipulatorPlant {
    pub fn new(theta_true: Vec<f64>, m_upper: f64) -> Result<Self> {
        check_dim("theta_true", TwoLink::PARAMS, theta_true.len())?;
        Ok(Self { model: TwoLink, theta_true, m_upper })
    }

    /// Ground truth; for simulation and monitoring only.
    pub fn theta_true(&self) -> &[f64] {
        &self.theta_true
    }

    pub fn inertia(&self, q: &[f64]) -> Mat {
        self.model.inertia(q, &self.theta_true)
    }

    pub fn coriolis(&self, q: &[f64], qd: &[f64]) -> Mat {
        self.model.coriolis(q, qd, &self.theta_true)
    }

    pub fn gravity(&self, q: &[f64]) -> Vec<f64> {
        self.model.gravity(q, &self.theta_true)
    }

    /// `q̈ = M⁻¹(u − Cq̇ − g)`
    pub fn accel(&self, q: &[f64], qd: &[f64], u: &[f64]) -> Result<Vec<f64>> {
        check_dim("q", TwoLink::DOF, q.len())?;
        check_dim("qdot", TwoLink::DOF, qd.len())?;
        check_dim("u", TwoLink::DOF, u.len())?;
        let m = self.inertia(q);
        let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
        if libm::fabs(det) < SINGULAR_DET || det.is_nan() {
            return Err(Error::SingularInertia { det });
        }
        let rhs = linalg::sub(&linalg::sub(u, &self.coriolis(q, qd).mul_vec(qd)), &self.gravity(q));
        Ok(vec![
            (m[(1, 1)] * rhs[0] - m[(0, 1)] * rhs[1]) / det,
            (m[(0, 0)] * rhs[1] - m[(1, 0)] * rhs[0]) / det,
        ])
    }

    /// `½ q̇ᵀ M(q) q̇`
    pub fn kinetic_energy(&self, q: &[f64], qd: &[f64]) -> f64 {
        0.5 * self.inertia(q).quad_form(qd)
    }
}

/// Two-link arm with `θ = (3.473, 0.196, 0.242)` and `M̄ = 5`.
pub fn two_link() -> ManipulatorPlant {
    ManipulatorPlant { model: TwoLink, theta_true: TWO_LINK_THETA.to_vec(), m_upper: 5.0 }
}

/// `s = q̇ − r`
pub fn sliding_variable(qd: &[f64], r: &[f64]) -> Result<Vec<f64>> {
    check_dim("sliding_variable", qd.len(), r.len())?;
    Ok(linalg::sub(qd, r))
}
