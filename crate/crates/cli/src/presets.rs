//! Scenarios shipped with the binary.

use crate::config::{parse_config, ScenarioConfig};

#[derive(Debug, Clone, Copy)]
pub struct Preset {
    pub name: &'static str,
    pub file: &'static str,
    pub description: &'static str,
    /// Density surfaces the preset produces, one per species.
    pub surfaces: &'static [&'static str],
    pub text: &'static str,
}

impl Preset {
    pub fn config(&self) -> ScenarioConfig {
        parse_config(self.text).expect("bundled presets are valid")
    }
}

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "eichhornia-const140",
        file: "eichhornia.cfg",
        description: "water hyacinth, w(x,0) = 140",
        surfaces: &["w(x,t) hyacinth"],
        text: include_str!("../presets/eichhornia.cfg"),
    },
    Preset {
        name: "eichhornia-linear80x",
        file: "eichhornia-linear80x.cfg",
        description: "water hyacinth, w(x,0) = 80x",
        surfaces: &["w(x,t) hyacinth"],
        text: include_str!("../presets/eichhornia-linear80x.cfg"),
    },
    Preset {
        name: "two-plant-high-700-350",
        file: "two-plant-high.cfg",
        description: "water hyacinth and water lettuce, (w1,w2)(x,0) = (700,350)",
        surfaces: &["w1(x,t) hyacinth", "w2(x,t) lettuce"],
        text: include_str!("../presets/two-plant-high.cfg"),
    },
    Preset {
        name: "two-plant-low-280-80",
        file: "two-plant-low.cfg",
        description: "water hyacinth and water lettuce, (w1,w2)(x,0) = (280,80)",
        surfaces: &["w1(x,t) hyacinth", "w2(x,t) lettuce"],
        text: include_str!("../presets/two-plant-low.cfg"),
    },
];

pub fn list_presets() -> &'static [Preset] {
    PRESETS
}

/// Looks a preset up by name or by file name.
pub fn find_preset(key: &str) -> Option<&'static Preset> {
    let key = key.strip_prefix("preset:").unwrap_or(key);
    PRESETS.iter().find(|p| p.name == key || p.file == key)
}
