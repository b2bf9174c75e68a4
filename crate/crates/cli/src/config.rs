//! Scenario files.
//!
//! One `key = value` pair per line; `#` starts a comment. Keys are dotted
//! (`gains.beta`, `sim.dt`). Vectors are comma separated, an empty value is an
//! empty vector. Numbers may also be written as `pi`, `pi/N` or `N*pi`.
//!
//! `plant` is required. Every other key is optional and defaults to the
//! built-in scenario for that plant, so a file may override just a few values.

use std::collections::HashSet;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, FRAC_PI_6, FRAC_PI_8, PI};
use std::fmt::Write as _;

use tracbf_core::controllers::ControllerKind;
use tracbf_core::scenario::{PlantKind, ScenarioConfig};
use tracbf_core::sim::Integrator;

use crate::error::{CliError, Result};

/// Every key the parser accepts, in serialization order.
pub const KEYS: &[&str] = &[
    "name",
    "plant",
    "controller",
    "plant.theta_true",
    "plant.m_upper",
    "gains.gamma",
    "gains.beta",
    "gains.alpha",
    "gains.k",
    "gains.lambda",
    "gains.mu",
    "gains.epsilon",
    "gains.theta_tilde_bound",
    "barrier.x1_max",
    "barrier.rho",
    "barrier.delta",
    "barrier.q_max",
    "barrier.lambda_h",
    "filter.sigma",
    "init.x0",
    "init.theta_hat0",
    "init.nu0",
    "reference.amplitude",
    "reference.omega",
    "nominal.k1",
    "nominal.k2",
    "sim.dt",
    "sim.horizon",
    "sim.integrator",
    "sim.log_stride",
    "projection.enabled",
    "projection.center",
    "projection.radius",
    "projection.boundary_layer",
];

/// Built-in scenario for a plant, with its default controller.
pub fn builtin(plant: PlantKind) -> ScenarioConfig {
    match plant {
        PlantKind::DoubleIntegrator => ScenarioConfig::double_integrator(ControllerKind::Tracbf),
        PlantKind::TwoLink => ScenarioConfig::two_link(),
    }
}

struct Entry<'a> {
    line: usize,
    key: &'a str,
    value: &'a str,
}

pub fn parse(text: &str, source_name: &str) -> Result<ScenarioConfig> {
    let err = |line: usize, msg: String| CliError::Parse { source_name: source_name.to_string(), line, msg };

    let mut entries = Vec::new();
    let mut seen = HashSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (key, value) = body.split_once('=').ok_or_else(|| err(line, format!("expected `key = value`, got `{body}`")))?;
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(err(line, format!("unknown key `{key}`")));
        }
        if !seen.insert(key) {
            return Err(err(line, format!("duplicate key `{key}`")));
        }
        entries.push(Entry { line, key, value });
    }

    let plant_entry = entries.iter().find(|e| e.key == "plant").ok_or_else(|| err(0, "missing key `plant`".into()))?;
    let plant = PlantKind::from_name(plant_entry.value)
        .ok_or_else(|| err(plant_entry.line, format!("unknown plant `{}`", plant_entry.value)))?;
    let mut sc = builtin(plant);

    for e in &entries {
        apply(&mut sc, e.key, e.value).map_err(|msg| err(e.line, format!("{}: {msg}", e.key)))?;
    }
    Ok(sc)
}

fn apply(sc: &mut ScenarioConfig, key: &str, v: &str) -> std::result::Result<(), String> {
    match key {
        "name" => sc.name = v.to_string(),
        "plant" => {}
        "controller" => {
            sc.controller = ControllerKind::from_name(v).ok_or_else(|| format!("unknown controller `{v}`"))?
        }
        "plant.theta_true" => sc.theta_true = vector(v)?,
        "plant.m_upper" => sc.m_upper = number(v)?,
        "gains.gamma" => sc.gains.gamma = vector(v)?,
        "gains.beta" => sc.gains.beta = number(v)?,
        "gains.alpha" => sc.gains.alpha = number(v)?,
        "gains.k" => sc.gains.k = vector(v)?,
        "gains.lambda" => sc.gains.lambda = vector(v)?,
        "gains.mu" => sc.gains.mu = number(v)?,
        "gains.epsilon" => sc.gains.epsilon = number(v)?,
        "gains.theta_tilde_bound" => sc.gains.theta_tilde_bound = number(v)?,
        "barrier.x1_max" => sc.barrier.x1_max = number(v)?,
        "barrier.rho" => sc.barrier.rho = number(v)?,
        "barrier.delta" => sc.barrier.delta = number(v)?,
        "barrier.q_max" => sc.barrier.q_max = number(v)?,
        "barrier.lambda_h" => sc.barrier.lambda_h = number(v)?,
        "filter.sigma" => sc.sigma = number(v)?,
        "init.x0" => sc.x0 = vector(v)?,
        "init.theta_hat0" => sc.theta_hat0 = vector(v)?,
        "init.nu0" => sc.nu0 = vector(v)?,
        "reference.amplitude" => sc.reference.amplitude = number(v)?,
        "reference.omega" => sc.reference.omega = number(v)?,
        "nominal.k1" => sc.k1 = number(v)?,
        "nominal.k2" => sc.k2 = number(v)?,
        "sim.dt" => sc.sim.dt = number(v)?,
        "sim.horizon" => sc.sim.horizon = number(v)?,
        "sim.integrator" => {
            sc.sim.integrator = Integrator::from_name(v).ok_or_else(|| format!("unknown integrator `{v}`"))?
        }
        "sim.log_stride" => sc.sim.log_stride = v.parse().map_err(|_| format!("expected a positive integer, got `{v}`"))?,
        "projection.enabled" => {
            sc.projection.enabled = match v {
                "true" => true,
                "false" => false,
                _ => return Err(format!("expected `true` or `false`, got `{v}`")),
            }
        }
        "projection.center" => sc.projection.center = vector(v)?,
        "projection.radius" => sc.projection.radius = number(v)?,
        "projection.boundary_layer" => sc.projection.boundary_layer = number(v)?,
        _ => unreachable!("key list and setters disagree on `{key}`"),
    }
    Ok(())
}

/// Parses a float, `pi`, `pi/N` or `N*pi`, with an optional leading minus.
pub fn number(s: &str) -> std::result::Result<f64, String> {
    let s = s.trim();
    if let Some(rest) = s.strip_prefix('-') {
        if rest.trim_start().starts_with("pi") || rest.contains("*pi") {
            return number(rest).map(|v| -v);
        }
    }
    let parse = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("expected a number, got `{s}`"));
    if s == "pi" {
        Ok(PI)
    } else if let Some(d) = s.strip_prefix("pi/") {
        // Correctly rounded constants where std has them.
        Ok(match d.trim() {
            "2" => FRAC_PI_2,
            "3" => FRAC_PI_3,
            "4" => FRAC_PI_4,
            "6" => FRAC_PI_6,
            "8" => FRAC_PI_8,
            _ => PI / parse(d)?,
        })
    } else if let Some(m) = s.strip_suffix("*pi") {
        Ok(parse(m)? * PI)
    } else {
        parse(s)
    }
}

pub fn vector(s: &str) -> std::result::Result<Vec<f64>, String> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(number).collect()
}

fn fmt_vec(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ")
}

/// Writes every key. Floats use the shortest form that parses back exactly.
pub fn serialize(sc: &ScenarioConfig) -> String {
    let g = &sc.gains;
    let b = &sc.barrier;
    let p = &sc.projection;
    let values: Vec<String> = vec![
        sc.name.clone(),
        sc.plant.name().to_string(),
        sc.controller.name().to_string(),
        fmt_vec(&sc.theta_true),
        format!("{:?}", sc.m_upper),
        fmt_vec(&g.gamma),
        format!("{:?}", g.beta),
        format!("{:?}", g.alpha),
        fmt_vec(&g.k),
        fmt_vec(&g.lambda),
        format!("{:?}", g.mu),
        format!("{:?}", g.epsilon),
        format!("{:?}", g.theta_tilde_bound),
        format!("{:?}", b.x1_max),
        format!("{:?}", b.rho),
        format!("{:?}", b.delta),
        format!("{:?}", b.q_max),
        format!("{:?}", b.lambda_h),
        format!("{:?}", sc.sigma),
        fmt_vec(&sc.x0),
        fmt_vec(&sc.theta_hat0),
        fmt_vec(&sc.nu0),
        format!("{:?}", sc.reference.amplitude),
        format!("{:?}", sc.reference.omega),
        format!("{:?}", sc.k1),
        format!("{:?}", sc.k2),
        format!("{:?}", sc.sim.dt),
        format!("{:?}", sc.sim.horizon),
        sc.sim.integrator.name().to_string(),
        sc.sim.log_stride.to_string(),
        p.enabled.to_string(),
        fmt_vec(&p.center),
        format!("{:?}", p.radius),
        format!("{:?}", p.boundary_layer),
    ];
    debug_assert_eq!(values.len(), KEYS.len());
    let mut out = String::new();
    for (k, v) in KEYS.iter().zip(values) {
        let _ = writeln!(out, "{k} = {v}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_round_trip() {
        for sc in [
            ScenarioConfig::double_integrator(ControllerKind::Tracbf),
            ScenarioConfig::double_integrator(ControllerKind::Racbf),
            ScenarioConfig::two_link(),
        ] {
            assert_eq!(parse(&serialize(&sc), "mem").unwrap(), sc);
        }
    }

    #[test]
    fn partial_file_overrides_defaults() {
        let sc = parse("plant = double_integrator\ngains.beta = 0.5 # wider filter\n", "mem").unwrap();
        let mut expected = ScenarioConfig::double_integrator(ControllerKind::Tracbf);
        expected.gains.beta = 0.5;
        assert_eq!(sc, expected);
    }

    #[test]
    fn pi_forms() {
        assert_eq!(number("pi/6").unwrap(), FRAC_PI_6);
        assert_eq!(number("pi/5").unwrap(), PI / 5.0);
        assert_eq!(number("2*pi").unwrap(), 2.0 * PI);
        assert_eq!(number("-pi/4").unwrap(), -FRAC_PI_4);
        assert_eq!(number("-1.5").unwrap(), -1.5);
        assert!(number("pie").is_err());
    }

    #[test]
    fn empty_vector() {
        assert_eq!(vector("").unwrap(), Vec::<f64>::new());
        assert_eq!(vector(" 1, 2 ,3").unwrap(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = parse("plant = two_link\n\nsim.dt = fast\n", "f.conf").unwrap_err();
        assert_eq!(e.to_string(), "f.conf:3: sim.dt: expected a number, got `fast`");
        let e = parse("plant = two_link\nbogus = 1\n", "f.conf").unwrap_err();
        assert!(e.to_string().contains(":2: unknown key `bogus`"));
        let e = parse("plant = two_link\nsim.dt = 1\nsim.dt = 2\n", "f.conf").unwrap_err();
        assert!(e.to_string().contains("duplicate key"));
        assert!(parse("sim.dt = 1\n", "f.conf").unwrap_err().to_string().contains("missing key `plant`"));
        assert!(parse("plant two_link\n", "f.conf").is_err());
    }
}
