//! Fixed-step integration of plant + estimator closed loops.

use alloc::vec::Vec;

use crate::barriers::Barrier;
use crate::certify;
use crate::controllers::{AffineSafetyController, RobotController};
use crate::error::{Error, Result};
use crate::linalg;
use crate::plants::{AffinePlant, ControlAffine, ManipulatorPlant, TwoLink};
use crate::tuners::{self, ProjectionBall, TunerRates};
use crate::types::{AugmentedState, Certificate, EstimatorState, PlantState, TraceRecord};

/// Any state entry above this magnitude counts as divergence.
pub const DIVERGENCE_BOUND: f64 = 1e9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Integrator {
    Rk4,
    Euler,
}

impl Integrator {
    pub fn name(self) -> &'static str {
        match self {
            Self::Rk4 => "rk4",
            Self::Euler => "euler",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "rk4" => Some(Self::Rk4),
            "euler" => Some(Self::Euler),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub dt: f64,
    pub horizon: f64,
    pub integrator: Integrator,
    pub log_stride: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self { dt: 1e-3, horizon: 10.0, integrator: Integrator::Rk4, log_stride: 1 }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(alloc::format!("sim.dt must be positive, got {}", self.dt)));
        }
        if !(self.horizon >= 0.0 && self.horizon.is_finite()) {
            return Err(Error::Config(alloc::format!("sim.horizon must be nonnegative, got {}", self.horizon)));
        }
        if self.log_stride == 0 {
            return Err(Error::Config("sim.log_stride must be at least 1".into()));
        }
        Ok(())
    }

    /// Number of integration steps, `round(horizon/dt)`.
    pub fn steps(&self) -> usize {
        libm::round(self.horizon / self.dt) as usize
    }
}

/// One classical Runge-Kutta step of `ż = f(t, z)`.
pub fn rk4<F>(mut f: F, t: f64, z: &[f64], dt: f64) -> Result<Vec<f64>>
where
    F: FnMut(f64, &[f64]) -> Result<Vec<f64>>,
{
    let k1 = f(t, z)?;
    let mut tmp = z.to_vec();
    linalg::axpy(&mut tmp, 0.5 * dt, &k1);
    let k2 = f(t + 0.5 * dt, &tmp)?;
    tmp.copy_from_slice(z);
    linalg::axpy(&mut tmp, 0.5 * dt, &k2);
    let k3 = f(t + 0.5 * dt, &tmp)?;
    tmp.copy_from_slice(z);
    linalg::axpy(&mut tmp, dt, &k3);
    let k4 = f(t + dt, &tmp)?;
    let mut out = z.to_vec();
    for i in 0..out.len() {
        out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    Ok(out)
}

pub fn euler<F>(mut f: F, t: f64, z: &[f64], dt: f64) -> Result<Vec<f64>>
where
    F: FnMut(f64, &[f64]) -> Result<Vec<f64>>,
{
    let mut out = z.to_vec();
    linalg::axpy(&mut out, dt, &f(t, z)?);
    Ok(out)
}

/// A closed loop in flattened coordinates `z = (x, ν, θ̂)`.
pub trait ClosedLoop {
    fn state_dim(&self) -> usize;
    fn param_dim(&self) -> usize;
    /// Leading state entries that are constrained positions.
    fn position_dim(&self) -> usize;
    fn rhs(&self, t: f64, z: &[f64]) -> Result<Vec<f64>>;
    fn record(&self, t: f64, z: &[f64]) -> Result<TraceRecord>;
    /// Distance of the tracked output from its reference.
    fn tracking_error(&self, t: f64, z: &[f64]) -> f64;
}

/// Advances a closed loop by one step and checks the result for divergence.
pub fn step<L: ClosedLoop + ?Sized>(sys: &L, integrator: Integrator, t: f64, z: &[f64], dt: f64) -> Result<Vec<f64>> {
    let next = match integrator {
        Integrator::Rk4 => rk4(|t, z| sys.rhs(t, z), t, z, dt)?,
        Integrator::Euler => euler(|t, z| sys.rhs(t, z), t, z, dt)?,
    };
    if next.iter().all(|v| v.is_finite() && libm::fabs(*v) <= DIVERGENCE_BOUND) {
        Ok(next)
    } else {
        Err(Error::Divergence { t: t + dt })
    }
}

fn estimator_rates(
    uses_hot: bool,
    nu: &[f64],
    theta_hat: &[f64],
    psi: &[f64],
    gamma: &[f64],
    beta: f64,
    projection: Option<&ProjectionBall>,
) -> Result<TunerRates> {
    let mut rates = tuners::hot_update(nu, theta_hat, psi, gamma, beta)?;
    if let Some(ball) = projection {
        rates.nu_dot = tuners::project_rate(nu, &rates.nu_dot, ball)?;
    }
    if !uses_hot {
        rates.theta_hat_dot = rates.nu_dot.clone();
    }
    Ok(rates)
}

/// Control-affine plant under an adaptive safety controller.
#[derive(Debug, Clone)]
pub struct AffineClosedLoop<'a, M, B> {
    pub plant: &'a AffinePlant<M>,
    pub controller: &'a AffineSafetyController<M, B>,
    pub projection: Option<&'a ProjectionBall>,
}

impl<M: ControlAffine, B: Barrier> AffineClosedLoop<'_, M, B> {
    fn split<'z>(&self, z: &'z [f64]) -> (&'z [f64], &'z [f64], &'z [f64]) {
        let (n, p) = (self.state_dim(), self.param_dim());
        (&z[..n], &z[n..n + p], &z[n + p..])
    }
}

impl<M: ControlAffine, B: Barrier> ClosedLoop for AffineClosedLoop<'_, M, B> {
    fn state_dim(&self) -> usize {
        self.plant.model.state_dim()
    }

    fn param_dim(&self) -> usize {
        self.plant.model.param_dim()
    }

    fn position_dim(&self) -> usize {
        1
    }

    fn rhs(&self, t: f64, z: &[f64]) -> Result<Vec<f64>> {
        let (x, nu, th) = self.split(z);
        let c = self.controller.control(t, x, th)?;
        let psi = c.terms.psi(&c.bar);
        let g = &self.controller.gains;
        let rates = estimator_rates(self.controller.kind.uses_high_order_tuner(), nu, th, &psi, &g.gamma, g.beta, self.projection)?;
        let mut out = self.plant.dynamics(x, &c.u)?;
        out.extend_from_slice(&rates.nu_dot);
        out.extend_from_slice(&rates.theta_hat_dot);
        Ok(out)
    }

    fn record(&self, t: f64, z: &[f64]) -> Result<TraceRecord> {
        let (x, nu, th) = self.split(z);
        let c = self.controller.control(t, x, th)?;
        let gamma = &self.controller.gains.gamma;
        let h_a = if self.controller.kind.uses_high_order_tuner() {
            certify::augmented_barrier_tuner(c.bar.value, self.plant.theta_true(), nu, th, gamma)?
        } else {
            certify::augmented_barrier_gradient(c.bar.value, self.plant.theta_true(), th, gamma)?
        };
        Ok(TraceRecord {
            t,
            x: x.to_vec(),
            constraint_margin: c.constraint.margin(&c.u),
            u: c.u,
            nu: nu.to_vec(),
            theta_hat: th.to_vec(),
            h: c.bar.value,
            certificate: Certificate::Affine { h_a },
        })
    }

    fn tracking_error(&self, t: f64, z: &[f64]) -> f64 {
        libm::fabs(z[0] - self.controller.reference.value(t))
    }
}

/// Two-link arm under the Slotine-Li controller with high-order tuner.
#[derive(Debug, Clone)]
pub struct RobotClosedLoop<'a> {
    pub plant: &'a ManipulatorPlant,
    pub controller: &'a RobotController,
    pub projection: Option<&'a ProjectionBall>,
}

impl RobotClosedLoop<'_> {
    fn split<'z>(&self, z: &'z [f64]) -> (&'z [f64], &'z [f64], &'z [f64], &'z [f64]) {
        let n = TwoLink::DOF;
        let p = TwoLink::PARAMS;
        (&z[..n], &z[n..2 * n], &z[2 * n..2 * n + p], &z[2 * n + p..])
    }
}

impl ClosedLoop for RobotClosedLoop<'_> {
    fn state_dim(&self) -> usize {
        2 * TwoLink::DOF
    }

    fn param_dim(&self) -> usize {
        TwoLink::PARAMS
    }

    fn position_dim(&self) -> usize {
        TwoLink::DOF
    }

    fn rhs(&self, t: f64, z: &[f64]) -> Result<Vec<f64>> {
        let (q, qd, nu, th) = self.split(z);
        let c = self.controller.control(t, q, qd, th)?;
        let qdd = self.plant.accel(q, qd, &c.u)?;
        let psi = c.w.tr_mul_vec(&c.s);
        let g = &self.controller.gains;
        let rates = estimator_rates(true, nu, th, &psi, &g.gamma, g.beta, self.projection)?;
        let mut out = qd.to_vec();
        out.extend_from_slice(&qdd);
        out.extend_from_slice(&rates.nu_dot);
        out.extend_from_slice(&rates.theta_hat_dot);
        Ok(out)
    }

    fn record(&self, t: f64, z: &[f64]) -> Result<TraceRecord> {
        let (q, qd, nu, th) = self.split(z);
        let c = self.controller.control(t, q, qd, th)?;
        let g = &self.controller.gains;
        let v = certify::lyapunov_v(&self.plant.inertia(q), &c.s, self.plant.theta_true(), nu, th, &g.gamma)?;
        Ok(TraceRecord {
            t,
            x: z[..self.state_dim()].to_vec(),
            u: c.u,
            nu: nu.to_vec(),
            theta_hat: th.to_vec(),
            h: c.bar.value,
            certificate: Certificate::Robot { v, b: c.bar.value - v / g.mu, s: c.s },
            constraint_margin: c.margin,
        })
    }

    fn tracking_error(&self, t: f64, z: &[f64]) -> f64 {
        let (qd, _) = self.controller.desired(t);
        linalg::norm(&linalg::sub(&z[..TwoLink::DOF], &qd))
    }
}

/// Aggregate figures of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub records: usize,
    pub final_time: f64,
    pub min_h: f64,
    /// Minimum of `h_a` (affine) or `B` (robot).
    pub min_certificate: f64,
    pub max_u_norm: f64,
    /// `∫‖u‖² dt` over the logged grid.
    pub l2_effort: f64,
    pub final_tracking_error: f64,
    /// `max |x₁|` (affine) or `max |qᵢ|` (robot).
    pub max_abs_position: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub trace: Vec<TraceRecord>,
    pub summary: Summary,
    /// State at the last completed step.
    pub final_state: AugmentedState,
    /// Set when the run stopped early; the trace holds everything logged before.
    pub error: Option<Error>,
}

/// Integrates `sys` from `z0` at `t = 0` over the configured horizon.
pub fn run<L: ClosedLoop + ?Sized>(sys: &L, z0: &[f64], cfg: &SimConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let (n, p) = (sys.state_dim(), sys.param_dim());
    crate::error::check_dim("initial state", n + 2 * p, z0.len())?;
    let steps = cfg.steps();
    let mut trace = Vec::with_capacity(steps / cfg.log_stride + 1);
    let mut z = z0.to_vec();
    let mut t = 0.0;
    let mut error = None;
    trace.push(sys.record(0.0, &z)?);
    for k in 0..steps {
        match step(sys, cfg.integrator, t, &z, cfg.dt) {
            Ok(next) => z = next,
            Err(e) => {
                error = Some(e);
                break;
            }
        }
        t = (k + 1) as f64 * cfg.dt;
        if (k + 1) % cfg.log_stride == 0 || k + 1 == steps {
            match sys.record(t, &z) {
                Ok(r) => trace.push(r),
                Err(e) => {
                    error = Some(e);
                    break;
                }
            }
        }
    }
    let summary = summarize(&trace, sys.tracking_error(t, &z), sys.position_dim());
    Ok(RunOutput { trace, summary, final_state: AugmentedState::from_slice(t, n, p, &z), error })
}

fn summarize(trace: &[TraceRecord], final_tracking_error: f64, positions: usize) -> Summary {
    let mut s = Summary {
        records: trace.len(),
        final_time: trace.last().map_or(0.0, |r| r.t),
        min_h: f64::INFINITY,
        min_certificate: f64::INFINITY,
        max_u_norm: 0.0,
        l2_effort: certify::effort_metrics(trace).l2_effort,
        final_tracking_error,
        max_abs_position: 0.0,
    };
    for r in trace {
        s.min_h = s.min_h.min(r.h);
        s.min_certificate = s.min_certificate.min(match &r.certificate {
            Certificate::Affine { h_a } => *h_a,
            Certificate::Robot { b, .. } => *b,
        });
        s.max_u_norm = s.max_u_norm.max(linalg::norm(&r.u));
        for xi in &r.x[..positions] {
            s.max_abs_position = s.max_abs_position.max(libm::fabs(*xi));
        }
    }
    s
}

/// Builds the flat initial vector `(x₀, ν₀, θ̂₀)`.
pub fn initial_state(x0: &[f64], nu0: &[f64], theta_hat0: &[f64]) -> Vec<f64> {
    AugmentedState {
        plant: PlantState { t: 0.0, x: x0.to_vec() },
        est: EstimatorState { nu: nu0.to_vec(), theta_hat: theta_hat0.to_vec() },
    }
    .to_vec()
}
