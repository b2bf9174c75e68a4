//! Scenario description and the glue that turns it into a simulation.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_4, FRAC_PI_6};

use crate::barriers::{BacksteppingBarrier, LogSumExpBoxBarrier};
use crate::certify::{self, ConditionReport, MonitorTolerances};
use crate::controllers::{AffineSafetyController, ControllerKind, RobotController, Sinusoid};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, MAX_DIM};
use crate::plants::{self, AffinePlant, DoubleIntegrator, ManipulatorPlant, TwoLink};
use crate::sim::{self, AffineClosedLoop, Integrator, RobotClosedLoop, RunOutput, SimConfig};
use crate::tuners::ProjectionBall;
use crate::types::GainSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlantKind {
    DoubleIntegrator,
    TwoLink,
}

impl PlantKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::DoubleIntegrator => "double_integrator",
            Self::TwoLink => "two_link",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "double_integrator" => Some(Self::DoubleIntegrator),
            "two_link" => Some(Self::TwoLink),
            _ => None,
        }
    }

    pub fn state_dim(self) -> usize {
        match self {
            Self::DoubleIntegrator => 2,
            Self::TwoLink => 2 * TwoLink::DOF,
        }
    }

    pub fn param_dim(self) -> usize {
        match self {
            Self::DoubleIntegrator => 2,
            Self::TwoLink => TwoLink::PARAMS,
        }
    }
}

/// Barrier parameters; which fields apply depends on the plant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierParams {
    /// Position limit `x₁max` (double integrator).
    pub x1_max: f64,
    pub rho: f64,
    pub delta: f64,
    /// Joint limit `q_m` (two-link).
    pub q_max: f64,
    pub lambda_h: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionConfig {
    pub enabled: bool,
    pub center: Vec<f64>,
    pub radius: f64,
    pub boundary_layer: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub plant: PlantKind,
    pub controller: ControllerKind,
    pub theta_true: Vec<f64>,
    /// Inertia bound `M̄` (two-link).
    pub m_upper: f64,
    pub gains: GainSet,
    pub barrier: BarrierParams,
    /// Smooth-filter sharpness `σ` (two-link).
    pub sigma: f64,
    /// `x₀`, or `(q₀, q̇₀)` for the two-link arm.
    pub x0: Vec<f64>,
    pub theta_hat0: Vec<f64>,
    pub nu0: Vec<f64>,
    pub reference: Sinusoid,
    /// Backstepping gains (double integrator).
    pub k1: f64,
    pub k2: f64,
    pub sim: SimConfig,
    pub projection: ProjectionConfig,
}

impl ScenarioConfig {
    /// Double-integrator study: `θ = (10, 10)`, `x₀ = (0.75, 0)`, `x₁d = 1.5 sin 2t`.
    pub fn double_integrator(kind: ControllerKind) -> Self {
        let bound = 14.14;
        Self {
            name: String::from(match kind {
                ControllerKind::Racbf => "di_racbf",
                ControllerKind::Acbf => "di_acbf",
                _ => "di_tracbf",
            }),
            plant: PlantKind::DoubleIntegrator,
            controller: kind,
            theta_true: vec![10.0, 10.0],
            m_upper: 0.0,
            gains: GainSet {
                gamma: vec![250.0, 250.0],
                beta: 0.05,
                alpha: 2.5,
                k: vec![],
                lambda: vec![],
                mu: 1.0,
                epsilon: 1.0,
                theta_tilde_bound: bound,
            },
            barrier: BarrierParams { x1_max: 1.0, rho: 50.0, delta: 0.1, q_max: 0.0, lambda_h: 0.0 },
            sigma: 0.1,
            x0: vec![0.75, 0.0],
            theta_hat0: vec![0.0, 0.0],
            nu0: vec![0.0, 0.0],
            reference: Sinusoid { amplitude: 1.5, omega: 2.0 },
            k1: 10.0,
            k2: 10.0,
            sim: SimConfig { dt: 1e-3, horizon: 10.0, integrator: Integrator::Rk4, log_stride: 1 },
            projection: ProjectionConfig { enabled: true, center: vec![0.0, 0.0], radius: bound, boundary_layer: 0.1 },
        }
    }

    /// Two-link study: `q_d = (π/4) sin 2t`, `q₀ = q̇₀ = 0`.
    pub fn two_link() -> Self {
        let bound = 8.66;
        Self {
            name: String::from("two_link"),
            plant: PlantKind::TwoLink,
            controller: ControllerKind::SlotineLiHot,
            theta_true: plants::TWO_LINK_THETA.to_vec(),
            m_upper: 5.0,
            gains: GainSet {
                gamma: vec![150.0; 3],
                beta: 0.25,
                alpha: 10.0,
                k: vec![50.0, 50.0],
                lambda: vec![0.25, 0.25],
                mu: 10.0,
                epsilon: 10.0,
                theta_tilde_bound: bound,
            },
            barrier: BarrierParams { x1_max: 0.0, rho: 0.0, delta: 0.0, q_max: FRAC_PI_6, lambda_h: 10.0 },
            sigma: 0.1,
            x0: vec![0.0; 4],
            theta_hat0: vec![0.0; 3],
            nu0: vec![0.0; 3],
            reference: Sinusoid { amplitude: FRAC_PI_4, omega: 2.0 },
            k1: 0.0,
            k2: 0.0,
            sim: SimConfig { dt: 2e-5, horizon: 10.0, integrator: Integrator::Rk4, log_stride: 50 },
            projection: ProjectionConfig { enabled: false, center: vec![0.0; 3], radius: bound, boundary_layer: 0.1 },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (n, p) = (self.plant.state_dim(), self.plant.param_dim());
        check_dim("x0", n, self.x0.len())?;
        check_dim("theta_true", p, self.theta_true.len())?;
        check_dim("theta_hat0", p, self.theta_hat0.len())?;
        check_dim("nu0", p, self.nu0.len())?;
        check_dim("gains.gamma", p, self.gains.gamma.len())?;
        if n > MAX_DIM || p > MAX_DIM {
            return Err(Error::Config(format!("dimensions above {MAX_DIM} are not supported")));
        }
        self.gains.validate()?;
        self.sim.validate()?;
        for (name, v) in [("x0", &self.x0), ("theta_hat0", &self.theta_hat0), ("nu0", &self.nu0)] {
            if !linalg::all_finite(v) {
                return Err(Error::Config(format!("{name} must be finite")));
            }
        }
        match (self.plant, self.controller.is_affine()) {
            (PlantKind::DoubleIntegrator, true) | (PlantKind::TwoLink, false) => {}
            (plant, _) => {
                return Err(Error::Config(format!(
                    "controller {} does not apply to plant {}",
                    self.controller.name(),
                    plant.name()
                )))
            }
        }
        if self.plant == PlantKind::TwoLink {
            check_dim("gains.K", TwoLink::DOF, self.gains.k.len())?;
            check_dim("gains.Lambda", TwoLink::DOF, self.gains.lambda.len())?;
            if !(self.sigma > 0.0 && self.sigma.is_finite()) {
                return Err(Error::Config(format!("sigma must be positive, got {}", self.sigma)));
            }
            if self.m_upper <= 0.0 || self.m_upper.is_nan() {
                return Err(Error::Config(format!("plant.m_upper must be positive, got {}", self.m_upper)));
            }
        }
        if self.projection.enabled {
            check_dim("projection.center", p, self.projection.center.len())?;
            self.projection_ball()?;
        }
        Ok(())
    }

    pub fn backstepping_barrier(&self) -> Result<BacksteppingBarrier> {
        BacksteppingBarrier::new(self.barrier.x1_max, self.barrier.rho, self.barrier.delta)
    }

    pub fn logsumexp_barrier(&self) -> Result<LogSumExpBoxBarrier> {
        LogSumExpBoxBarrier::new(self.barrier.q_max, self.barrier.lambda_h, TwoLink::DOF)
    }

    pub fn projection_ball(&self) -> Result<Option<ProjectionBall>> {
        if !self.projection.enabled {
            return Ok(None);
        }
        let p = &self.projection;
        ProjectionBall::new(p.center.clone(), p.radius, p.boundary_layer).map(Some)
    }

    pub fn affine_plant(&self) -> Result<AffinePlant<DoubleIntegrator>> {
        AffinePlant::new(DoubleIntegrator, self.theta_true.clone())
    }

    pub fn affine_controller(&self) -> Result<AffineSafetyController<DoubleIntegrator, BacksteppingBarrier>> {
        Ok(AffineSafetyController {
            kind: self.controller,
            model: DoubleIntegrator,
            barrier: self.backstepping_barrier()?,
            gains: self.gains.clone(),
            reference: self.reference,
            k1: self.k1,
            k2: self.k2,
        })
    }

    pub fn manipulator_plant(&self) -> Result<ManipulatorPlant> {
        ManipulatorPlant::new(self.theta_true.clone(), self.m_upper)
    }

    pub fn robot_controller(&self) -> Result<RobotController> {
        Ok(RobotController {
            model: TwoLink,
            barrier: self.logsumexp_barrier()?,
            gains: self.gains.clone(),
            reference: self.reference,
            sigma: self.sigma,
        })
    }

    pub fn initial_state(&self) -> Vec<f64> {
        sim::initial_state(&self.x0, &self.nu0, &self.theta_hat0)
    }

    /// Integrates the scenario. Does not apply the condition gate.
    pub fn run(&self) -> Result<RunOutput> {
        self.validate()?;
        let ball = self.projection_ball()?;
        match self.plant {
            PlantKind::DoubleIntegrator => {
                let plant = self.affine_plant()?;
                let controller = self.affine_controller()?;
                let sys = AffineClosedLoop { plant: &plant, controller: &controller, projection: ball.as_ref() };
                sim::run(&sys, &self.initial_state(), &self.sim)
            }
            PlantKind::TwoLink => {
                let plant = self.manipulator_plant()?;
                let controller = self.robot_controller()?;
                let sys = RobotClosedLoop { plant: &plant, controller: &controller, projection: ball.as_ref() };
                sim::run(&sys, &self.initial_state(), &self.sim)
            }
        }
    }

    pub fn check_conditions(&self) -> Result<ConditionReport> {
        certify::check_conditions(self)
    }

    /// Runs the monitors that apply to this scenario over a finished trace.
    pub fn monitor(&self, out: &RunOutput) -> Result<ConditionReport> {
        match self.plant {
            PlantKind::DoubleIntegrator => certify::monitor_affine(
                &out.trace,
                &self.theta_true,
                &self.gains,
                self.controller,
                self.barrier.x1_max,
                &MonitorTolerances::default(),
            ),
            PlantKind::TwoLink => Ok(certify::monitor_robot(
                &out.trace,
                &self.gains,
                self.barrier.q_max,
                &MonitorTolerances::robot(),
            )),
        }
    }
}
