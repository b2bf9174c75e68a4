//! Single-constraint safety filters and the constraint builders that feed them.
//!
//! Every filter here solves (or smooths) `min ½‖u − k_d‖²  s.t.  a·u ≥ b`,
//! whose solution has the closed form `u = k_d + max(0, b − a·k_d)/‖a‖² · a`.

use alloc::vec::Vec;

use crate::barriers::BarrierEval;
use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, Mat};
use crate::types::GainSet;

/// Admissible inputs satisfy `a·u ≥ b`.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpaceConstraint {
    pub a: Vec<f64>,
    pub b: f64,
}

impl HalfSpaceConstraint {
    /// `a·u − b`; nonnegative iff `u` is admissible.
    pub fn margin(&self, u: &[f64]) -> f64 {
        linalg::dot(&self.a, u) - self.b
    }
}

/// Below this `‖a‖²` the constraint row is treated as degenerate.
pub const DEGENERATE_ROW: f64 = 1e-24;

/// Minimum-norm correction of `kd` onto the half-space.
pub fn qp_filter(kd: &[f64], c: &HalfSpaceConstraint) -> Result<Vec<f64>> {
    check_dim("qp_filter", c.a.len(), kd.len())?;
    let aa = linalg::norm_sq(&c.a);
    if aa <= DEGENERATE_ROW {
        return if c.b <= 0.0 { Ok(kd.to_vec()) } else { Err(Error::InfeasibleConstraint { b: c.b }) };
    }
    let violation = c.b - linalg::dot(&c.a, kd);
    let mut u = kd.to_vec();
    if violation > 0.0 {
        linalg::axpy(&mut u, violation / aa, &c.a);
    }
    Ok(u)
}

/// `σ ln(1 + e^{x/σ})`, evaluated without overflow.
pub fn softplus(x: f64, sigma: f64) -> f64 {
    let z = x / sigma;
    if z > 0.0 {
        x + sigma * libm::log1p(libm::exp(-z))
    } else {
        sigma * libm::log1p(libm::exp(z))
    }
}

/// Smooth (C^∞ for `a ≠ 0`) counterpart of [`qp_filter`].
///
/// The QP multiplier `max(0, (b − a·k_d)/‖a‖²)` is replaced by its softplus
/// with sharpness `σ`:
///
/// `u = k_d + σ ln(1 + exp((b − a·k_d)/(σ‖a‖²))) · a`
///
/// The resulting margin is `a·u − b = ‖a‖² σ ln(1 + exp((a·k_d − b)/(σ‖a‖²))) > 0`,
/// the correction vanishes smoothly as `a → 0` with `b < 0`, and the output
/// converges to [`qp_filter`] as `σ → 0`.
pub fn smooth_filter(kd: &[f64], c: &HalfSpaceConstraint, sigma: f64) -> Result<Vec<f64>> {
    check_dim("smooth_filter", c.a.len(), kd.len())?;
    assert!(sigma > 0.0, "smooth_filter needs sigma > 0");
    let aa = linalg::norm_sq(&c.a);
    if aa <= DEGENERATE_ROW {
        return if c.b <= 0.0 { Ok(kd.to_vec()) } else { Err(Error::InfeasibleConstraint { b: c.b }) };
    }
    let normalized_violation = (c.b - linalg::dot(&c.a, kd)) / aa;
    let gain = softplus(normalized_violation, sigma);
    let mut u = kd.to_vec();
    linalg::axpy(&mut u, gain, &c.a);
    Ok(u)
}

/// Control-affine model terms `f(x)`, `G(x)`, `Φ(x)` evaluated at one state.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineTerms {
    pub drift: Vec<f64>,
    /// `G(x)`, n×m.
    pub input: Mat,
    /// `Φ(x)`, m×p.
    pub regressor: Mat,
}

impl AffineTerms {
    /// `∂h/∂x · G` as a length-m vector.
    pub fn lie_input(&self, bar: &BarrierEval) -> Vec<f64> {
        self.input.tr_mul_vec(&bar.grad)
    }

    /// `ψ = (∂h/∂x · G · Φ)ᵀ`
    pub fn psi(&self, bar: &BarrierEval) -> Vec<f64> {
        self.regressor.tr_mul_vec(&self.lie_input(bar))
    }
}

/// Half-space from the adaptive CBF condition: `ḣ(x, θ̂, u) ≥ 0`.
pub fn build_acbf_constraint(
    terms: &AffineTerms,
    bar: &BarrierEval,
    theta_hat: &[f64],
) -> Result<HalfSpaceConstraint> {
    check_dim("barrier gradient", terms.drift.len(), bar.grad.len())?;
    check_dim("theta_hat", terms.regressor.cols(), theta_hat.len())?;
    let a = terms.lie_input(bar);
    let psi = terms.regressor.tr_mul_vec(&a);
    let b = -linalg::dot(&bar.grad, &terms.drift) - linalg::dot(&psi, theta_hat);
    Ok(HalfSpaceConstraint { a, b })
}

/// Robust adaptive CBF: `ḣ(x, θ̂, u) ≥ −α[h − ½ϑ̃ᵀΓ⁻¹ϑ̃]`, with the quadratic
/// replaced by its worst case `½‖ϑ̃‖²/λ_min(Γ)`.
pub fn build_racbf_constraint(
    terms: &AffineTerms,
    bar: &BarrierEval,
    theta_hat: &[f64],
    gains: &GainSet,
) -> Result<HalfSpaceConstraint> {
    check_dim("gamma", theta_hat.len(), gains.gamma.len())?;
    let mut c = build_acbf_constraint(terms, bar, theta_hat)?;
    c.b -= gains.alpha * (bar.value - gains.worst_case_error_energy());
    Ok(c)
}

/// Tunable robust adaptive CBF: the robust condition plus the margin `(2/β)‖ψ‖²`
/// that covers the lag of the high-order tuner.
pub fn build_tracbf_constraint(
    terms: &AffineTerms,
    bar: &BarrierEval,
    theta_hat: &[f64],
    gains: &GainSet,
) -> Result<HalfSpaceConstraint> {
    let mut c = build_racbf_constraint(terms, bar, theta_hat, gains)?;
    let psi = terms.psi(bar);
    c.b += 2.0 / gains.beta * linalg::norm_sq(&psi);
    Ok(c)
}

/// Velocity-level constraint for the manipulator reference:
///
/// `∂h/∂q · r ≥ −α[h − ½ϑ̃ᵀΓ⁻¹ϑ̃/μ] + ‖∂h/∂q‖²/ε`
pub fn reference_velocity_constraint(bar: &BarrierEval, gains: &GainSet) -> HalfSpaceConstraint {
    let a = bar.grad.clone();
    let b = -gains.alpha * (bar.value - gains.worst_case_error_energy() / gains.mu)
        + linalg::norm_sq(&a) / gains.epsilon;
    HalfSpaceConstraint { a, b }
}

/// Safe reference velocity: the desired velocity `rd` passed through the smooth filter.
pub fn safe_reference_velocity(
    bar: &BarrierEval,
    rd: &[f64],
    gains: &GainSet,
    sigma: f64,
) -> Result<Vec<f64>> {
    smooth_filter(rd, &reference_velocity_constraint(bar, gains), sigma)
}

/// Step used by [`reference_velocity_rate`].
pub const RATE_STEP: f64 = 1e-5;

/// `ṙ(q, q̇, t)` by a central difference along the flow `(q̇, 1)`.
pub fn reference_velocity_rate<F>(q: &[f64], qdot: &[f64], t: f64, mut r: F) -> Result<Vec<f64>>
where
    F: FnMut(&[f64], f64) -> Result<Vec<f64>>,
{
    check_dim("reference_velocity_rate", q.len(), qdot.len())?;
    let d = RATE_STEP;
    let plus: Vec<f64> = q.iter().zip(qdot).map(|(qi, vi)| qi + d * vi).collect();
    let minus: Vec<f64> = q.iter().zip(qdot).map(|(qi, vi)| qi - d * vi).collect();
    let rp = r(&plus, t + d)?;
    let rm = r(&minus, t - d)?;
    Ok(rp.iter().zip(&rm).map(|(a, b)| (a - b) / (2.0 * d)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use core::f64::consts::LN_2;

    fn hs(a: &[f64], b: f64) -> HalfSpaceConstraint {
        HalfSpaceConstraint { a: a.to_vec(), b }
    }

    #[test]
    fn qp_inactive_is_identity() {
        let kd = [3.0, -1.0];
        assert_eq!(qp_filter(&kd, &hs(&[1.0, 0.0], 2.0)).unwrap(), kd.to_vec());
    }

    #[test]
    fn qp_unit_row() {
        assert_eq!(qp_filter(&[0.0, 0.0], &hs(&[0.0, 1.0], 2.0)).unwrap(), vec![0.0, 2.0]);
    }

    #[test]
    fn qp_diagonal_row() {
        assert_eq!(qp_filter(&[1.0, 1.0], &hs(&[1.0, 1.0], 4.0)).unwrap(), vec![2.0, 2.0]);
    }

    #[test]
    fn qp_degenerate_row() {
        assert_eq!(qp_filter(&[1.0], &hs(&[0.0], -1.0)).unwrap(), vec![1.0]);
        assert_eq!(qp_filter(&[1.0], &hs(&[0.0], 0.0)).unwrap(), vec![1.0]);
        assert!(matches!(qp_filter(&[1.0], &hs(&[0.0], 0.5)), Err(Error::InfeasibleConstraint { .. })));
    }

    #[test]
    fn qp_rejects_dimension_mismatch() {
        assert!(matches!(
            qp_filter(&[1.0, 2.0], &hs(&[1.0], 0.0)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn softplus_is_stable_at_extremes() {
        assert_eq!(softplus(-1e4, 0.1), 0.0);
        assert_eq!(softplus(1e4, 0.1), 1e4);
        assert!((softplus(0.0, 0.1) - 0.1 * LN_2).abs() < 1e-16);
    }

    #[test]
    fn smooth_deep_interior_is_nearly_identity() {
        let sigma = 0.1;
        let c = hs(&[2.0, 0.0], 1.0);
        let kd = [1.0 + 10.0 * sigma * 4.0 / 2.0, 0.0];
        // normalized slack (a·kd − b)/‖a‖² = 10σ
        let u = smooth_filter(&kd, &c, sigma).unwrap();
        let dev = linalg::norm(&linalg::sub(&u, &kd));
        assert!(dev <= sigma * libm::exp(-10.0) * 2.0 + 1e-15);
    }

    #[test]
    fn smooth_on_boundary_adds_sigma_ln2() {
        let sigma = 0.3;
        let c = hs(&[1.0, 2.0], 5.0);
        let kd = [1.0, 2.0];
        let u = smooth_filter(&kd, &c, sigma).unwrap();
        let expect = [1.0 + sigma * LN_2, 2.0 + 2.0 * sigma * LN_2];
        assert!((u[0] - expect[0]).abs() < 1e-14 && (u[1] - expect[1]).abs() < 1e-14);
        assert!(c.margin(&u) > 0.0);
    }

    #[test]
    fn smooth_correction_vanishes_with_the_row() {
        // b < 0 and a → 0: correction must go to zero, not blow up.
        let kd = [0.5, 0.5];
        let mut last = f64::INFINITY;
        for scale in [1e-1, 1e-2, 1e-3, 1e-6, 1e-9] {
            let u = smooth_filter(&kd, &hs(&[scale, scale], -1.8), 0.1).unwrap();
            let dev = linalg::norm(&linalg::sub(&u, &kd));
            assert!(dev <= last);
            last = dev;
        }
        assert!(last < 1e-300);
    }

    #[test]
    fn smooth_approaches_qp_as_sigma_shrinks() {
        let c = hs(&[1.0, -2.0], 3.0);
        let kd = [0.2, 0.1];
        let exact = qp_filter(&kd, &c).unwrap();
        let smooth = smooth_filter(&kd, &c, 1e-6).unwrap();
        assert!(linalg::norm(&linalg::sub(&exact, &smooth)) < 1e-4);
    }

    fn di_terms(x: &[f64]) -> AffineTerms {
        AffineTerms {
            drift: vec![x[1], 0.0],
            input: Mat::from_rows(&[&[0.0], &[1.0]]),
            regressor: Mat::from_rows(&[&[x[0], x[1]]]),
        }
    }

    fn di_gains(beta: f64) -> GainSet {
        GainSet {
            gamma: vec![250.0, 250.0],
            beta,
            alpha: 2.5,
            k: vec![],
            lambda: vec![],
            mu: 1.0,
            epsilon: 1.0,
            theta_tilde_bound: 14.14,
        }
    }

    fn di_bar(x: &[f64]) -> BarrierEval {
        use crate::barriers::{BacksteppingBarrier, Barrier};
        BacksteppingBarrier::new(1.0, 50.0, 0.1).unwrap().eval(x)
    }

    #[test]
    fn tracbf_margin_at_double_integrator_start() {
        let x = [0.75, 0.0];
        let (terms, bar) = (di_terms(&x), di_bar(&x));
        let psi = terms.psi(&bar);
        assert!((psi[0] + 0.00225).abs() < 1e-15 && psi[1] == 0.0);
        let th = [0.0, 0.0];
        let r = build_racbf_constraint(&terms, &bar, &th, &di_gains(0.05)).unwrap();
        let t = build_tracbf_constraint(&terms, &bar, &th, &di_gains(0.05)).unwrap();
        assert_eq!(r.a, t.a);
        assert!((t.b - r.b - 2.025e-4).abs() < 1e-15);
    }

    #[test]
    fn tracbf_reduces_to_racbf_for_stiff_filter() {
        let x = [0.3, -0.4];
        let (terms, bar) = (di_terms(&x), di_bar(&x));
        let th = [1.0, 2.0];
        let r = build_racbf_constraint(&terms, &bar, &th, &di_gains(1.0)).unwrap();
        let t = build_tracbf_constraint(&terms, &bar, &th, &di_gains(1e12)).unwrap();
        assert!((t.b - r.b).abs() < 1e-12);
    }

    #[test]
    fn racbf_with_perfect_knowledge_is_plain_cbf() {
        let x = [0.3, -0.4];
        let (terms, bar) = (di_terms(&x), di_bar(&x));
        let mut g = di_gains(1.0);
        g.theta_tilde_bound = 0.0;
        let th = [1.0, 2.0];
        let a = build_acbf_constraint(&terms, &bar, &th).unwrap();
        let r = build_racbf_constraint(&terms, &bar, &th, &g).unwrap();
        assert!((r.b - (a.b - 2.5 * bar.value)).abs() < 1e-15);
    }

    #[test]
    fn acbf_at_double_integrator_start() {
        let x = [0.75, 0.0];
        let (terms, bar) = (di_terms(&x), di_bar(&x));
        // −∂h/∂x·f − ψ·θ̂ with f = (0, 0) at x₂ = 0: only the θ̂ term survives.
        let c = build_acbf_constraint(&terms, &bar, &[2.0, 0.0]).unwrap();
        assert!((c.a[0] + 0.003).abs() < 1e-15);
        assert!((c.b - 0.0045).abs() < 1e-15);
        assert!(c.margin(&[5.0]) < 0.0);
        assert!(c.margin(&[-5.0]) > 0.0);
    }

    #[test]
    fn degenerate_row_leaves_b_to_decide_feasibility() {
        // x₂ = −Δx₁ makes ∂h/∂x·G vanish.
        let x = [0.5, -0.05];
        let (terms, bar) = (di_terms(&x), di_bar(&x));
        let c = build_tracbf_constraint(&terms, &bar, &[0.0, 0.0], &di_gains(0.05)).unwrap();
        assert!(linalg::norm(&c.a) < 1e-15);
        assert!(c.b <= 0.0);
        assert_eq!(qp_filter(&[1.0], &c).unwrap(), vec![1.0]);
    }

    #[test]
    fn rate_of_constant_reference_is_zero() {
        let rate = reference_velocity_rate(&[0.1, 0.2], &[1.0, -1.0], 0.3, |_, _| Ok(vec![2.0, 3.0])).unwrap();
        assert_eq!(rate, vec![0.0, 0.0]);
    }
}
