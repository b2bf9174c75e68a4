//! Sufficient-condition gates and along-trajectory certificate monitors.
//!
//! Monitors read true parameters on purpose: `h_a`, `V` and `B` are functions
//! of the unknown `θ`. They never modify the trace they inspect.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::barriers::Barrier;
use crate::controllers::ControllerKind;
use crate::error::{check_dim, Result};
use crate::linalg::{self, Mat};
use crate::scenario::{PlantKind, ScenarioConfig};
use crate::types::{min_eigen_diag, weighted_quadratic, Certificate, GainSet, TraceRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    AtLeast,
    AtMost,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Self::AtLeast => ">=",
            Self::AtMost => "<=",
        }
    }
}

/// One checked inequality `lhs ≥ rhs` or `lhs ≤ rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionEntry {
    pub name: String,
    pub lhs: f64,
    pub relation: Relation,
    pub rhs: f64,
    pub satisfied: bool,
}

impl ConditionEntry {
    pub fn new(name: &str, lhs: f64, relation: Relation, rhs: f64) -> Self {
        let satisfied = match relation {
            Relation::AtLeast => lhs >= rhs,
            Relation::AtMost => lhs <= rhs,
        };
        Self { name: name.to_string(), lhs, relation, rhs, satisfied }
    }
}

impl fmt::Display for ConditionEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:.10} {} {:.10} {}",
            self.name,
            self.lhs,
            self.relation.symbol(),
            self.rhs,
            if self.satisfied { "PASS" } else { "FAIL" }
        )
    }
}

/// Ordered list of checks; passes iff every entry does.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConditionReport {
    pub entries: Vec<ConditionEntry>,
}

impl ConditionReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.satisfied)
    }

    pub fn get(&self, name: &str) -> Option<&ConditionEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ConditionEntry> {
        self.entries.iter().filter(|e| !e.satisfied)
    }

    fn push(&mut self, name: &str, lhs: f64, relation: Relation, rhs: f64) {
        self.entries.push(ConditionEntry::new(name, lhs, relation, rhs));
    }
}

impl fmt::Display for ConditionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.entries {
            writeln!(f, "{e}")?;
        }
        Ok(())
    }
}

/// `h − ½(θ−θ̂)ᵀΓ⁻¹(θ−θ̂)`
pub fn augmented_barrier_gradient(h: f64, theta: &[f64], theta_hat: &[f64], gamma: &[f64]) -> Result<f64> {
    check_dim("theta_hat", theta.len(), theta_hat.len())?;
    Ok(h - weighted_quadratic(&linalg::sub(theta, theta_hat), gamma)?)
}

/// `h − ½(θ−ν)ᵀΓ⁻¹(θ−ν) − ½(ν−θ̂)ᵀΓ⁻¹(ν−θ̂)`
pub fn augmented_barrier_tuner(h: f64, theta: &[f64], nu: &[f64], theta_hat: &[f64], gamma: &[f64]) -> Result<f64> {
    check_dim("nu", theta.len(), nu.len())?;
    check_dim("theta_hat", theta.len(), theta_hat.len())?;
    Ok(h - weighted_quadratic(&linalg::sub(theta, nu), gamma)?
        - weighted_quadratic(&linalg::sub(nu, theta_hat), gamma)?)
}

/// `V = ½(sᵀMs + θ̃ᵀΓ⁻¹θ̃ + ν̃ᵀΓ⁻¹ν̃)` with `θ̃ = θ − ν`, `ν̃ = ν − θ̂`.
pub fn lyapunov_v(m: &Mat, s: &[f64], theta: &[f64], nu: &[f64], theta_hat: &[f64], gamma: &[f64]) -> Result<f64> {
    check_dim("s", m.rows(), s.len())?;
    Ok(0.5 * m.quad_form(s) + weighted_quadratic(&linalg::sub(theta, nu), gamma)?
        + weighted_quadratic(&linalg::sub(nu, theta_hat), gamma)?)
}

/// Closed-loop `V̇` without projection:
/// `−sᵀKs − (2/β)‖Wᵀs‖² − β‖ν̃‖² − 2ν̃ᵀWᵀs`.
pub fn analytic_vdot(w: &Mat, s: &[f64], nu: &[f64], theta_hat: &[f64], k: &[f64], beta: f64) -> Result<f64> {
    check_dim("K", s.len(), k.len())?;
    let wts = w.tr_mul_vec(s);
    let nu_tilde = linalg::sub(nu, theta_hat);
    let sks: f64 = s.iter().zip(k).map(|(si, ki)| ki * si * si).sum();
    Ok(-sks - 2.0 / beta * linalg::norm_sq(&wts) - beta * linalg::norm_sq(&nu_tilde)
        - 2.0 * linalg::dot(&nu_tilde, &wts))
}

/// Upper bound on `V̇`: `−λ_min(K)‖s‖² − (β/2)‖ν − θ̂‖²`.
pub fn vdot_decrease_bound(s: &[f64], nu: &[f64], theta_hat: &[f64], k: &[f64], beta: f64) -> f64 {
    -min_eigen_diag(k) * linalg::norm_sq(s) - 0.5 * beta * linalg::norm_sq(&linalg::sub(nu, theta_hat))
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EffortMetrics {
    /// `∫‖u‖² dt`, trapezoid rule.
    pub l2_effort: f64,
    pub max_abs_u: f64,
    /// `∫‖Δu/Δt‖² dt`
    pub smoothness: f64,
}

pub fn effort_metrics(trace: &[TraceRecord]) -> EffortMetrics {
    let mut m = EffortMetrics::default();
    for r in trace {
        for ui in &r.u {
            m.max_abs_u = m.max_abs_u.max(libm::fabs(*ui));
        }
    }
    for pair in trace.windows(2) {
        let dt = pair[1].t - pair[0].t;
        if dt <= 0.0 {
            continue;
        }
        m.l2_effort += 0.5 * dt * (linalg::norm_sq(&pair[0].u) + linalg::norm_sq(&pair[1].u));
        m.smoothness += linalg::norm_sq(&linalg::sub(&pair[1].u, &pair[0].u)) / dt;
    }
    m
}

/// Monitor thresholds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonitorTolerances {
    /// Absolute slack on `h ≥ 0`, `h_a ≥ 0` and `B ≥ 0`.
    pub invariance: f64,
    /// Absolute slack on the one-step bound `c(t+Δ) ≥ c(t)e^{−αΔ}`.
    pub gronwall: f64,
    /// Slack on position limits.
    pub position: f64,
    /// Relative slack on the `V̇` bound, scaled by `max(1, V)`.
    pub derivative: f64,
    /// Share of interior records that must meet the `V̇` bound.
    pub vdot_bound_fraction: f64,
    /// End-of-run bounds on `‖s‖` and `‖ν − θ̂‖`.
    pub final_s: f64,
    pub final_nu_gap: f64,
}

impl Default for MonitorTolerances {
    fn default() -> Self {
        Self {
            invariance: 1e-6,
            gronwall: 1e-5,
            position: 1e-4,
            derivative: 1e-3,
            vdot_bound_fraction: 0.999,
            final_s: 0.05,
            final_nu_gap: 0.05,
        }
    }
}

impl MonitorTolerances {
    pub fn robot() -> Self {
        Self { position: 1e-3, ..Self::default() }
    }
}

/// Worst value of `c(t_{k+1}) − c(t_k)e^{−α(t_{k+1}−t_k)}` over the trace.
pub fn gronwall_worst(times: &[f64], values: &[f64], alpha: f64) -> f64 {
    times
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, c)| c[1] - c[0] * libm::exp(-alpha * (t[1] - t[0])))
        .fold(f64::INFINITY, f64::min)
}

fn min_of(values: impl Iterator<Item = f64>) -> f64 {
    values.fold(f64::INFINITY, f64::min)
}

/// Checks `h ≥ 0`, the position limit, `h_a ≥ 0` and the Grönwall bound on `h_a`.
///
/// `h_a` is recomputed from the trace: the three-term form when `kind` uses the
/// high-order tuner, the two-term form otherwise.
pub fn monitor_affine(
    trace: &[TraceRecord],
    theta_true: &[f64],
    gains: &GainSet,
    kind: ControllerKind,
    x1_max: f64,
    tol: &MonitorTolerances,
) -> Result<ConditionReport> {
    let mut h_a = Vec::with_capacity(trace.len());
    for r in trace {
        h_a.push(if kind.uses_high_order_tuner() {
            augmented_barrier_tuner(r.h, theta_true, &r.nu, &r.theta_hat, &gains.gamma)?
        } else {
            augmented_barrier_gradient(r.h, theta_true, &r.theta_hat, &gains.gamma)?
        });
    }
    let times: Vec<f64> = trace.iter().map(|r| r.t).collect();
    let mut rep = ConditionReport::default();
    rep.push("min_h", min_of(trace.iter().map(|r| r.h)), Relation::AtLeast, -tol.invariance);
    rep.push(
        "max_abs_x1",
        trace.iter().map(|r| libm::fabs(r.x[0])).fold(0.0, f64::max),
        Relation::AtMost,
        x1_max + tol.position,
    );
    rep.push("min_h_a", min_of(h_a.iter().copied()), Relation::AtLeast, -tol.invariance);
    if trace.len() > 1 {
        rep.push("gronwall_h_a", gronwall_worst(&times, &h_a, gains.alpha), Relation::AtLeast, -tol.gronwall);
    }
    rep.push(
        "min_constraint_margin",
        min_of(trace.iter().map(|r| r.constraint_margin)),
        Relation::AtLeast,
        -1e-10,
    );
    Ok(rep)
}

/// Along-trajectory data a robot monitor derives from a trace.
#[derive(Debug, Clone, PartialEq)]
pub struct RobotSeries {
    pub t: Vec<f64>,
    pub v: Vec<f64>,
    pub b: Vec<f64>,
    /// Decrease bound `−λ_min(K)‖s‖² − (β/2)‖ν̃‖²` per record.
    pub bound: Vec<f64>,
}

pub fn robot_series(trace: &[TraceRecord], gains: &GainSet) -> RobotSeries {
    let mut out = RobotSeries { t: Vec::new(), v: Vec::new(), b: Vec::new(), bound: Vec::new() };
    for r in trace {
        if let Certificate::Robot { v, b, s } = &r.certificate {
            out.t.push(r.t);
            out.v.push(*v);
            out.b.push(*b);
            out.bound.push(vdot_decrease_bound(s, &r.nu, &r.theta_hat, &gains.k, gains.beta));
        }
    }
    out
}

/// Share of interior records where the central-difference `V̇` meets the
/// decrease bound up to `derivative·max(1, V)`.
pub fn vdot_bound_fraction(series: &RobotSeries, derivative_tol: f64) -> f64 {
    let n = series.t.len();
    if n < 3 {
        return 1.0;
    }
    let ok = (1..n - 1)
        .filter(|&k| {
            let vdot = (series.v[k + 1] - series.v[k - 1]) / (series.t[k + 1] - series.t[k - 1]);
            vdot <= series.bound[k] + derivative_tol * series.v[k].max(1.0)
        })
        .count();
    ok as f64 / (n - 2) as f64
}

/// Checks `B ≥ 0`, the position limit, the `V̇` decrease bound, the Grönwall bound
/// on `B` and the end-of-run convergence proxies.
pub fn monitor_robot(
    trace: &[TraceRecord],
    gains: &GainSet,
    q_max: f64,
    tol: &MonitorTolerances,
) -> ConditionReport {
    let series = robot_series(trace, gains);
    let mut rep = ConditionReport::default();
    rep.push("min_B", min_of(series.b.iter().copied()), Relation::AtLeast, -tol.invariance);
    let max_q = trace
        .iter()
        .flat_map(|r| r.x[..2].iter().map(|v| libm::fabs(*v)))
        .fold(0.0, f64::max);
    rep.push("max_abs_q", max_q, Relation::AtMost, q_max + tol.position);
    rep.push("vdot_bound_fraction", vdot_bound_fraction(&series, tol.derivative), Relation::AtLeast, tol.vdot_bound_fraction);
    if series.t.len() > 1 {
        rep.push("gronwall_B", gronwall_worst(&series.t, &series.b, gains.alpha), Relation::AtLeast, -tol.gronwall);
    }
    if let Some(last) = trace.last() {
        if let Certificate::Robot { s, .. } = &last.certificate {
            rep.push("final_s_norm", linalg::norm(s), Relation::AtMost, tol.final_s);
        }
        rep.push(
            "final_nu_gap",
            linalg::norm(&linalg::sub(&last.nu, &last.theta_hat)),
            Relation::AtMost,
            tol.final_nu_gap,
        );
    }
    rep
}

/// Pre-run gate: every sufficient condition that applies to the scenario.
///
/// Start conditions use the true initial error `‖θ − ν₀‖`.
pub fn check_conditions(sc: &ScenarioConfig) -> Result<ConditionReport> {
    sc.validate()?;
    let g = &sc.gains;
    let lmin = min_eigen_diag(&g.gamma);
    let mut rep = ConditionReport::default();
    match sc.plant {
        PlantKind::DoubleIntegrator => {
            let h0 = sc.backstepping_barrier()?.eval(&sc.x0).value;
            if sc.controller.uses_high_order_tuner() {
                rep.push("nu0_equals_theta_hat0", linalg::norm(&linalg::sub(&sc.nu0, &sc.theta_hat0)), Relation::AtMost, 0.0);
                let err = linalg::norm_sq(&linalg::sub(&sc.theta_true, &sc.nu0));
                rep.push("start_condition_tracbf", h0, Relation::AtLeast, err / (2.0 * lmin));
                rep.push("beta_gain_condition", g.beta, Relation::AtLeast, g.alpha / lmin);
            } else {
                let err = linalg::norm_sq(&linalg::sub(&sc.theta_true, &sc.theta_hat0));
                rep.push("start_condition_acbf", h0, Relation::AtLeast, err / (2.0 * lmin));
            }
        }
        PlantKind::TwoLink => {
            let plant = sc.manipulator_plant()?;
            let ctrl = sc.robot_controller()?;
            let (q0, qd0) = sc.x0.split_at(2);
            let s0 = linalg::sub(qd0, &ctrl.reference_velocity(q0, 0.0)?);
            let h0 = ctrl.barrier.eval(q0).value;
            rep.push("nu0_equals_theta_hat0", linalg::norm(&linalg::sub(&sc.nu0, &sc.theta_hat0)), Relation::AtMost, 0.0);
            rep.push(
                "gain_condition_K",
                min_eigen_diag(&g.k),
                Relation::AtLeast,
                (g.epsilon * g.mu / 2.0).max(g.alpha * plant.m_upper),
            );
            rep.push("beta_gain_condition", g.beta, Relation::AtLeast, g.alpha / lmin);
            let err = linalg::norm_sq(&linalg::sub(&sc.theta_true, &sc.nu0));
            rep.push(
                "start_condition_robot",
                h0,
                Relation::AtLeast,
                plant.m_upper * linalg::norm_sq(&s0) / (2.0 * g.mu) + err / (2.0 * g.mu * lmin),
            );
        }
    }
    Ok(rep)
}
