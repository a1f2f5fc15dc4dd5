use super::config::{parse_scenarios, Overrides, Scenario};
use crate::error::{Error, Result};

/// A built-in scenario file.
#[derive(Clone, Copy, Debug)]
pub struct Preset {
    pub name: &'static str,
    pub source: &'static str,
}

pub const PRESETS: &[Preset] = &[
    Preset { name: "fig2-upper", source: include_str!("../../presets/fig2-upper.toml") },
    Preset { name: "fig2-lower", source: include_str!("../../presets/fig2-lower.toml") },
    Preset { name: "fig3", source: include_str!("../../presets/fig3.toml") },
    Preset { name: "fig4", source: include_str!("../../presets/fig4.toml") },
    Preset { name: "ivb", source: include_str!("../../presets/ivb.toml") },
    Preset { name: "offswitch", source: include_str!("../../presets/offswitch.toml") },
];

pub fn preset_names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|p| p.name)
}

/// Resolves a preset by name.
pub fn preset(name: &str, overrides: &Overrides) -> Result<Vec<Scenario>> {
    let p = PRESETS
        .iter()
        .find(|p| p.name == name)
        .ok_or_else(|| Error::Config(format!("unknown preset `{name}`; see list-presets")))?;
    parse_scenarios(p.source, overrides)
}

/// Resolves a preset name or, failing that, reads a scenario file.
pub fn load(target: &str, overrides: &Overrides) -> Result<Vec<Scenario>> {
    if PRESETS.iter().any(|p| p.name == target) {
        return preset(target, overrides);
    }
    let path = std::path::Path::new(target);
    if !path.exists() {
        return Err(Error::Config(format!("`{target}` is neither a preset nor an existing file")));
    }
    parse_scenarios(&std::fs::read_to_string(path)?, overrides)
}

/// First line of a preset's description.
pub fn preset_description(p: &Preset) -> String {
    parse_scenarios(p.source, &Overrides::default())
        .ok()
        .and_then(|v| v.into_iter().next())
        .map(|s| s.description)
        .unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_parses() {
        for p in PRESETS {
            let scenarios = preset(p.name, &Overrides::default()).unwrap();
            assert!(!scenarios.is_empty(), "{}", p.name);
            assert!(scenarios.iter().all(|s| !s.description.is_empty()));
        }
        assert!(preset("nope", &Overrides::default()).is_err());
    }
}
