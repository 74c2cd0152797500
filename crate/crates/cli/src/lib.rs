//! Scenario files, bundled presets and output writers for `pondctl`.

pub mod batch;
pub mod config;
pub mod output;
pub mod presets;
pub mod scenario;

pub use config::{parse_config, render, ConfigError, InitialCondition, ScenarioConfig};
pub use presets::{find_preset, list_presets, Preset};
pub use scenario::{load_config, run_scenario, Mode, RunRequest, ScenarioError, ScenarioReport};
