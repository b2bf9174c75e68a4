//! Closed-loop control laws: the backstepping nominal, the QP-filtered adaptive
//! safety controllers and the Slotine-Li controller with high-order tuner.
//!
//! Nothing here can see true plant parameters; controllers receive models only.

use alloc::vec;
use alloc::vec::Vec;

use crate::barriers::{Barrier, BarrierEval, LogSumExpBoxBarrier};
use crate::error::{check_dim, Result};
use crate::filters::{self, HalfSpaceConstraint};
use crate::linalg::{self, Mat};
use crate::plants::{self, ControlAffine, TwoLink};
use crate::types::GainSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ControllerKind {
    Acbf,
    Racbf,
    Tracbf,
    SlotineLiHot,
}

impl ControllerKind {
    pub const ALL: [ControllerKind; 4] = [Self::Acbf, Self::Racbf, Self::Tracbf, Self::SlotineLiHot];

    pub fn name(self) -> &'static str {
        match self {
            Self::Acbf => "acbf",
            Self::Racbf => "racbf",
            Self::Tracbf => "tracbf",
            Self::SlotineLiHot => "slotine_li_hot",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    /// Whether `(ν, θ̂)` follow the high-order tuner rather than the gradient law.
    pub fn uses_high_order_tuner(self) -> bool {
        matches!(self, Self::Tracbf | Self::SlotineLiHot)
    }

    pub fn is_affine(self) -> bool {
        !matches!(self, Self::SlotineLiHot)
    }
}

/// `A sin(ωt)` with its first two derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sinusoid {
    pub amplitude: f64,
    pub omega: f64,
}

impl Sinusoid {
    pub fn value(&self, t: f64) -> f64 {
        self.amplitude * libm::sin(self.omega * t)
    }
    pub fn rate(&self, t: f64) -> f64 {
        self.amplitude * self.omega * libm::cos(self.omega * t)
    }
    pub fn accel(&self, t: f64) -> f64 {
        -self.amplitude * self.omega * self.omega * libm::sin(self.omega * t)
    }
}

/// Backstepping tracker for the double integrator, `x₁ → x₁d`.
#[allow(clippy::too_many_arguments)]
pub fn backstepping_nominal(
    x: &[f64],
    theta_hat: &[f64],
    x1d: f64,
    x1d_dot: f64,
    x1d_ddot: f64,
    k1: f64,
    k2: f64,
) -> f64 {
    let e1 = x[0] - x1d;
    let v = x1d_dot - k1 * e1;
    let e2 = x[1] - v;
    let v_dot = x1d_ddot - k1 * (x[1] - x1d_dot);
    -(theta_hat[0] * x[0] + theta_hat[1] * x[1]) + v_dot - e1 - k2 * e2
}

/// Builds the constraint row of `kind` at one state.
pub fn safety_constraint(
    kind: ControllerKind,
    terms: &filters::AffineTerms,
    bar: &BarrierEval,
    theta_hat: &[f64],
    gains: &GainSet,
) -> Result<HalfSpaceConstraint> {
    match kind {
        ControllerKind::Acbf => filters::build_acbf_constraint(terms, bar, theta_hat),
        ControllerKind::Racbf => filters::build_racbf_constraint(terms, bar, theta_hat, gains),
        ControllerKind::Tracbf => filters::build_tracbf_constraint(terms, bar, theta_hat, gains),
        ControllerKind::SlotineLiHot => Err(crate::error::Error::Config(
            "slotine_li_hot is not a control-affine safety controller".into(),
        )),
    }
}

/// Output of one affine controller evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineControl {
    pub u: Vec<f64>,
    pub nominal: Vec<f64>,
    pub constraint: HalfSpaceConstraint,
    pub bar: BarrierEval,
    pub terms: filters::AffineTerms,
}

/// QP-filtered backstepping tracker for a control-affine model.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineSafetyController<M, B> {
    pub kind: ControllerKind,
    pub model: M,
    pub barrier: B,
    pub gains: GainSet,
    pub reference: Sinusoid,
    pub k1: f64,
    pub k2: f64,
}

impl<M: ControlAffine, B: Barrier> AffineSafetyController<M, B> {
    pub fn control(&self, t: f64, x: &[f64], theta_hat: &[f64]) -> Result<AffineControl> {
        check_dim("state", self.model.state_dim(), x.len())?;
        let nominal = vec![backstepping_nominal(
            x,
            theta_hat,
            self.reference.value(t),
            self.reference.rate(t),
            self.reference.accel(t),
            self.k1,
            self.k2,
        )];
        let bar = self.barrier.eval(x);
        let terms = self.model.terms(x);
        let constraint = safety_constraint(self.kind, &terms, &bar, theta_hat, &self.gains)?;
        let u = filters::qp_filter(&nominal, &constraint)?;
        Ok(AffineControl { u, nominal, constraint, bar, terms })
    }
}

/// `u = −Ks + Wθ̂ − (2/β)WWᵀs` with diagonal `K`.
pub fn slotine_li_hot(w: &Mat, s: &[f64], theta_hat: &[f64], k: &[f64], beta: f64) -> Result<Vec<f64>> {
    check_dim("slotine_li_hot s", w.rows(), s.len())?;
    check_dim("slotine_li_hot K", s.len(), k.len())?;
    check_dim("slotine_li_hot theta_hat", w.cols(), theta_hat.len())?;
    let wts = w.tr_mul_vec(s);
    let mut u = w.mul_vec(theta_hat);
    linalg::axpy(&mut u, -2.0 / beta, &w.mul_vec(&wts));
    for ((ui, ki), si) in u.iter_mut().zip(k).zip(s) {
        *ui -= ki * si;
    }
    Ok(u)
}

/// `r_d = q̇_d − Λ(q − q_d)` with diagonal `Λ`.
pub fn desired_reference_rd(q: &[f64], qd: &[f64], qd_dot: &[f64], lambda: &[f64]) -> Result<Vec<f64>> {
    check_dim("desired_reference_rd q_d", q.len(), qd.len())?;
    check_dim("desired_reference_rd q̇_d", q.len(), qd_dot.len())?;
    check_dim("desired_reference_rd Lambda", q.len(), lambda.len())?;
    Ok((0..q.len()).map(|i| qd_dot[i] - lambda[i] * (q[i] - qd[i])).collect())
}

/// Output of one robot controller evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct RobotControl {
    pub u: Vec<f64>,
    pub r: Vec<f64>,
    pub r_dot: Vec<f64>,
    pub s: Vec<f64>,
    pub w: Mat,
    pub bar: BarrierEval,
    /// `a·r − b` of the safe-velocity constraint.
    pub margin: f64,
}

/// Slotine-Li controller tracking `q_d(t) = A sin(ωt)·𝟙` through the safe
/// reference velocity.
#[derive(Debug, Clone, PartialEq)]
pub struct RobotController {
    pub model: TwoLink,
    pub barrier: LogSumExpBoxBarrier,
    pub gains: GainSet,
    pub reference: Sinusoid,
    pub sigma: f64,
}

impl RobotController {
    pub fn desired(&self, t: f64) -> (Vec<f64>, Vec<f64>) {
        let n = TwoLink::DOF;
        (vec![self.reference.value(t); n], vec![self.reference.rate(t); n])
    }

    pub fn desired_velocity(&self, q: &[f64], t: f64) -> Result<Vec<f64>> {
        let (qd, qd_dot) = self.desired(t);
        desired_reference_rd(q, &qd, &qd_dot, &self.gains.lambda)
    }

    pub fn reference_velocity(&self, q: &[f64], t: f64) -> Result<Vec<f64>> {
        let rd = self.desired_velocity(q, t)?;
        filters::safe_reference_velocity(&self.barrier.eval(q), &rd, &self.gains, self.sigma)
    }

    pub fn reference_rate(&self, q: &[f64], qdot: &[f64], t: f64) -> Result<Vec<f64>> {
        filters::reference_velocity_rate(q, qdot, t, |q, t| self.reference_velocity(q, t))
    }

    pub fn control(&self, t: f64, q: &[f64], qdot: &[f64], theta_hat: &[f64]) -> Result<RobotControl> {
        check_dim("q", TwoLink::DOF, q.len())?;
        let bar = self.barrier.eval(q);
        let rd = self.desired_velocity(q, t)?;
        let constraint = filters::reference_velocity_constraint(&bar, &self.gains);
        let r = filters::smooth_filter(&rd, &constraint, self.sigma)?;
        let r_dot = self.reference_rate(q, qdot, t)?;
        let s = plants::sliding_variable(qdot, &r)?;
        let w = self.model.regressor(q, qdot, &r, &r_dot);
        let u = slotine_li_hot(&w, &s, theta_hat, &self.gains.k, self.gains.beta)?;
        let margin = constraint.margin(&r);
        Ok(RobotControl { u, r, r_dot, s, w, bar, margin })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::barriers::BacksteppingBarrier;
    use crate::plants::DoubleIntegrator;

    fn di_gains() -> GainSet {
        GainSet {
            gamma: vec![250.0, 250.0],
            beta: 0.05,
            alpha: 2.5,
            k: vec![],
            lambda: vec![],
            mu: 1.0,
            epsilon: 1.0,
            theta_tilde_bound: 14.14,
        }
    }

    fn di_controller(kind: ControllerKind) -> AffineSafetyController<DoubleIntegrator, BacksteppingBarrier> {
        AffineSafetyController {
            kind,
            model: DoubleIntegrator,
            barrier: BacksteppingBarrier::new(1.0, 50.0, 0.1).unwrap(),
            gains: di_gains(),
            reference: Sinusoid { amplitude: 1.5, omega: 2.0 },
            k1: 2.0,
            k2: 2.0,
        }
    }

    #[test]
    fn kind_names_round_trip() {
        for k in ControllerKind::ALL {
            assert_eq!(ControllerKind::from_name(k.name()), Some(k));
        }
        assert_eq!(ControllerKind::from_name("cbf"), None);
    }

    #[test]
    fn backstepping_zero_at_rest_on_zero_reference() {
        assert_eq!(backstepping_nominal(&[0.0, 0.0], &[0.0, 0.0], 0.0, 0.0, 0.0, 2.0, 2.0), 0.0);
    }

    #[test]
    fn backstepping_on_reference_is_feedforward() {
        let (x1d, x1d_dot, x1d_ddot) = (0.3, -0.2, 0.7);
        let th = [10.0, 10.0];
        let x = [x1d, x1d_dot];
        let u = backstepping_nominal(&x, &th, x1d, x1d_dot, x1d_ddot, 2.0, 2.0);
        assert!((u - (x1d_ddot - 10.0 * x1d - 10.0 * x1d_dot)).abs() < 1e-14);
    }

    #[test]
    fn inactive_filter_returns_nominal() {
        let c = di_controller(ControllerKind::Tracbf);
        let out = c.control(0.0, &[0.0, 0.0], &[0.0, 0.0]).unwrap();
        assert_eq!(out.u, out.nominal);
    }

    #[test]
    fn tracbf_and_racbf_differ_by_margin_shift_when_active() {
        // Heading for the boundary fast: both filters active.
        let x = [0.9, 1.0];
        let th = [0.0, 0.0];
        let r = di_controller(ControllerKind::Racbf).control(0.0, &x, &th).unwrap();
        let t = di_controller(ControllerKind::Tracbf).control(0.0, &x, &th).unwrap();
        assert!(r.u[0] != r.nominal[0] && t.u[0] != t.nominal[0]);
        let psi = t.terms.psi(&t.bar);
        let a = &t.constraint.a;
        let expected = 2.0 / 0.05 * linalg::norm_sq(&psi) / linalg::norm_sq(a) * a[0];
        assert!((t.u[0] - r.u[0] - expected).abs() < 1e-9 * expected.abs().max(1.0));
    }

    #[test]
    fn kinds_coincide_when_all_inactive_and_psi_vanishes() {
        // x₂ = −Δx₁ zeroes ∂h/∂x·G, hence ψ.
        let x = [0.2, -0.02];
        let th = [1.0, 1.0];
        let us: Vec<f64> = [ControllerKind::Acbf, ControllerKind::Racbf, ControllerKind::Tracbf]
            .into_iter()
            .map(|k| di_controller(k).control(0.4, &x, &th).unwrap().u[0])
            .collect();
        assert_eq!(us[0], us[1]);
        assert_eq!(us[1], us[2]);
    }

    #[test]
    fn slotine_li_examples() {
        let w = Mat::from_rows(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]]);
        let th = [0.5, -0.25, 3.0];
        let k = [50.0, 50.0];
        assert_eq!(slotine_li_hot(&w, &[0.0, 0.0], &th, &k, 0.25).unwrap(), vec![0.5, -0.25]);
        let zero = Mat::zeros(2, 3);
        assert_eq!(slotine_li_hot(&zero, &[1.0, -2.0], &th, &k, 0.25).unwrap(), vec![-50.0, 100.0]);
        // −50 + θ̂₁ − (2/0.25)·1
        let u = slotine_li_hot(&w, &[1.0, 0.0], &th, &k, 0.25).unwrap();
        assert_eq!(u, vec![-50.0 + 0.5 - 8.0, -0.25]);
    }

    #[test]
    fn desired_reference_examples() {
        let l = [0.25, 0.25];
        assert_eq!(desired_reference_rd(&[0.1, 0.2], &[0.1, 0.2], &[1.0, 2.0], &l).unwrap(), vec![1.0, 2.0]);
        assert_eq!(desired_reference_rd(&[0.4, 0.0], &[0.0, 0.0], &[0.0, 0.0], &l).unwrap(), vec![-0.1, 0.0]);
    }

    fn robot() -> RobotController {
        RobotController {
            model: TwoLink,
            barrier: LogSumExpBoxBarrier::new(core::f64::consts::FRAC_PI_6, 10.0, 2).unwrap(),
            gains: GainSet {
                gamma: vec![150.0; 3],
                beta: 0.25,
                alpha: 10.0,
                k: vec![50.0, 50.0],
                lambda: vec![0.25, 0.25],
                mu: 10.0,
                epsilon: 10.0,
                theta_tilde_bound: 8.66,
            },
            reference: Sinusoid { amplitude: core::f64::consts::FRAC_PI_4, omega: 2.0 },
            sigma: 0.1,
        }
    }

    #[test]
    fn safe_velocity_at_origin_with_zero_desired_velocity() {
        let c = robot();
        let bar = c.barrier.eval(&[0.0, 0.0]);
        let con = filters::reference_velocity_constraint(&bar, &c.gains);
        assert_eq!(con.a, vec![0.0, 0.0]);
        let w: f64 = 0.5 * 8.66 * 8.66 / 150.0 / 10.0;
        assert!((w - 0.025).abs() < 1e-3);
        assert!((con.b + 10.0 * (bar.value - w)).abs() < 1e-14);
        assert!((con.b + 1.798).abs() < 1e-3);
        // q_d(0) = 0 and q̇_d(0) ≠ 0; with the row degenerate, r passes r_d through.
        let r = c.reference_velocity(&[0.0, 0.0], 0.0).unwrap();
        assert_eq!(r, c.desired_velocity(&[0.0, 0.0], 0.0).unwrap());
    }

    #[test]
    fn safe_velocity_points_inward_near_the_limit() {
        let c = robot();
        let qm = core::f64::consts::FRAC_PI_6;
        let mut last = f64::INFINITY;
        for frac in [0.5, 0.8, 0.9, 0.95, 0.97, 0.995, 1.0] {
            let q = [frac * qm, 0.0];
            let r = c.reference_velocity(&q, 0.0).unwrap();
            assert!(r[0] < last);
            last = r[0];
            if frac >= 0.95 {
                assert!(r[0] < 0.0, "r₁ = {} at q₁ = {}", r[0], q[0]);
            }
        }
    }

    #[test]
    fn reference_rate_matches_analytic_rate_where_filter_is_inactive() {
        let c = robot();
        let (q, qdot) = ([0.05, -0.02], [0.3, 0.4]);
        for t in [0.37, 1.2] {
            let rate = c.reference_rate(&q, &qdot, t).unwrap();
            let (qd, qd_dot) = c.desired(t);
            let acc = c.reference.accel(t);
            let _ = qd;
            for i in 0..2 {
                let exact = acc - 0.25 * (qdot[i] - qd_dot[i]);
                assert!((rate[i] - exact).abs() < 1e-6, "{} vs {}", rate[i], exact);
            }
        }
    }
}
