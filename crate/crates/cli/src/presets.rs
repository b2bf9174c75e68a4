//! Scenario files shipped with the binary.

pub const PRESETS: &[(&str, &str)] = &[
    ("di_tracbf", include_str!("../presets/di_tracbf.conf")),
    ("di_racbf", include_str!("../presets/di_racbf.conf")),
    ("di_compare", include_str!("../presets/di_compare.conf")),
    ("two_link", include_str!("../presets/two_link.conf")),
    ("two_link_manifold", include_str!("../presets/two_link_manifold.conf")),
];

pub fn preset(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

pub fn names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(n, _)| *n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config;
    use tracbf_core::controllers::ControllerKind;
    use tracbf_core::scenario::ScenarioConfig;

    fn load(name: &str) -> ScenarioConfig {
        config::parse(preset(name).unwrap(), name).unwrap()
    }

    #[test]
    fn double_integrator_presets_match_builtins() {
        assert_eq!(load("di_tracbf"), ScenarioConfig::double_integrator(ControllerKind::Tracbf));
        assert_eq!(load("di_racbf"), ScenarioConfig::double_integrator(ControllerKind::Racbf));
        let mut cmp = ScenarioConfig::double_integrator(ControllerKind::Tracbf);
        cmp.name = "di_compare".into();
        assert_eq!(load("di_compare"), cmp);
    }

    #[test]
    fn two_link_presets_match_builtin() {
        assert_eq!(load("two_link"), ScenarioConfig::two_link());
        let mut on = ScenarioConfig::two_link();
        on.name = "two_link_manifold".into();
        on.x0 = vec![0.0, 0.0, std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2];
        assert_eq!(load("two_link_manifold"), on);
    }

    #[test]
    fn every_preset_validates() {
        for n in names() {
            load(n).validate().unwrap();
        }
    }
}
