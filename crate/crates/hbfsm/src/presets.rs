//! Shipped experiment files, also available as `--preset <name>`.

pub const PRESETS: [(&str, &str); 3] = [
    ("fig2", include_str!("../presets/fig2.toml")),
    ("fig3", include_str!("../presets/fig3.toml")),
    ("fig4", include_str!("../presets/fig4.toml")),
];

pub fn preset(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

pub fn names() -> Vec<&'static str> {
    PRESETS.iter().map(|(n, _)| *n).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{CurveScheme, ExperimentConfig};

    #[test]
    fn all_presets_validate() {
        for (name, text) in PRESETS {
            let exp = ExperimentConfig::from_toml(text).unwrap().resolve().unwrap();
            assert_eq!(exp.config.name, name);
            assert!(!exp.snr_points.is_empty());
        }
    }

    #[test]
    fn fig3_dimensions() {
        let exp = ExperimentConfig::from_toml(preset("fig3").unwrap()).unwrap().resolve().unwrap();
        let s = &exp.config.system;
        assert_eq!((s.k, s.n_a, s.n_t, s.n_r, s.order), (2, 4, 8, 1, 4));
        assert_eq!(exp.curves.len(), 3);
    }

    #[test]
    fn fig4_is_comparable() {
        let exp = ExperimentConfig::from_toml(preset("fig4").unwrap()).unwrap().resolve().unwrap();
        let r = exp.check_comparable().unwrap();
        assert!(matches!(exp.curves[r].scheme, CurveScheme::ClassicalSm { n_t: 4, .. }));
        assert!(exp.curves.iter().all(|c| c.bits_per_use() == (2, 2)));
    }
}
