//! Serializing a parsed scenario and parsing it again gives the same scenario.

use proptest::collection::vec;
use proptest::prelude::*;
use tracbf::config;
use tracbf_core::controllers::{ControllerKind, Sinusoid};
use tracbf_core::scenario::{BarrierParams, PlantKind, ProjectionConfig, ScenarioConfig};
use tracbf_core::sim::{Integrator, SimConfig};
use tracbf_core::types::GainSet;

fn num() -> impl Strategy<Value = f64> {
    prop_oneof![
        any::<f64>().prop_filter("finite", |v| v.is_finite()),
        -1e3..1e3f64,
        Just(0.0),
        Just(-0.0),
        Just(std::f64::consts::FRAC_PI_6),
    ]
}

fn nums() -> impl Strategy<Value = Vec<f64>> {
    vec(num(), 0..5)
}

fn scenario() -> impl Strategy<Value = ScenarioConfig> {
    let head = (
        "[a-z][a-z0-9_]{0,12}",
        prop_oneof![Just(PlantKind::DoubleIntegrator), Just(PlantKind::TwoLink)],
        prop::sample::select(ControllerKind::ALL.to_vec()),
        nums(),
        num(),
    );
    let gains = (nums(), num(), num(), nums(), nums(), num(), num(), num()).prop_map(
        |(gamma, beta, alpha, k, lambda, mu, epsilon, theta_tilde_bound)| GainSet {
            gamma,
            beta,
            alpha,
            k,
            lambda,
            mu,
            epsilon,
            theta_tilde_bound,
        },
    );
    let barrier = (num(), num(), num(), num(), num())
        .prop_map(|(x1_max, rho, delta, q_max, lambda_h)| BarrierParams { x1_max, rho, delta, q_max, lambda_h });
    let rest = (num(), nums(), nums(), nums(), num(), num(), num(), num());
    let sim = (num(), num(), prop_oneof![Just(Integrator::Rk4), Just(Integrator::Euler)], 0usize..1000)
        .prop_map(|(dt, horizon, integrator, log_stride)| SimConfig { dt, horizon, integrator, log_stride });
    let projection = (any::<bool>(), nums(), num(), num())
        .prop_map(|(enabled, center, radius, boundary_layer)| ProjectionConfig { enabled, center, radius, boundary_layer });
    (head, gains, barrier, rest, sim, projection).prop_map(
        |((name, plant, controller, theta_true, m_upper), gains, barrier, (sigma, x0, theta_hat0, nu0, a, w, k1, k2), sim, projection)| {
            ScenarioConfig {
                name,
                plant,
                controller,
                theta_true,
                m_upper,
                gains,
                barrier,
                sigma,
                x0,
                theta_hat0,
                nu0,
                reference: Sinusoid { amplitude: a, omega: w },
                k1,
                k2,
                sim,
                projection,
            }
        },
    )
}

fn same_bits(a: &ScenarioConfig, b: &ScenarioConfig) -> bool {
    // PartialEq treats 0.0 and -0.0 as equal; the text form must keep the sign too.
    config::serialize(a) == config::serialize(b)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn serialize_then_parse_is_identity(sc in scenario()) {
        let text = config::serialize(&sc);
        let back = config::parse(&text, "generated").unwrap();
        prop_assert_eq!(&back, &sc);
        prop_assert!(same_bits(&back, &sc));
    }

    #[test]
    fn key_order_and_comments_do_not_matter(sc in scenario(), seed in any::<u64>()) {
        let text = config::serialize(&sc);
        let mut lines: Vec<String> = text.lines().map(|l| format!("  {l}   # note")).collect();
        let n = lines.len();
        for i in 0..n {
            let j = (seed.wrapping_mul(6364136223846793005).wrapping_add(i as u64) % n as u64) as usize;
            lines.swap(i, j);
        }
        let back = config::parse(&lines.join("\n"), "shuffled").unwrap();
        prop_assert_eq!(back, sc);
    }
}
