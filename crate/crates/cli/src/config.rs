//! Scenario files.
//!
//! A scenario is a flat list of `key = value` lines. `#` starts a comment.
//! Species are numbered from 1 and addressed as `species.<j>.<field>`:
//!
//! ```text
//! name = eichhornia-const140
//! species = 1
//! species.1.a = 0.103
//! species.1.b = 0.000147          # row j of the interaction matrix
//! species.1.tau = 1
//! species.1.diffusion = 1.33
//! species.1.initial = const 140   # or `linear <c>` (w = c·x) or `nodes v1 v2 ...`
//! grid.length = 10
//! grid.n_space = 100
//! time.horizon = 30
//! time.n_time = 5000
//! output.stride = 10
//! control.enabled = true
//! control.switch_rule = cross-species
//! ```
//!
//! Only `species` and the five per-species keys are required.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use pondctl_core::{Discretization, ModelSpec, SwitchRule};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },

    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },

    #[error("line {line}: duplicate key `{key}`")]
    DuplicateKey { line: usize, key: String },

    #[error("missing required key `{key}`")]
    MissingRequiredKey { key: String },

    #[error("line {line}: invalid value for `{key}`: {message}")]
    InvalidValue {
        line: usize,
        key: String,
        message: String,
    },

    #[error("invalid model: {0}")]
    Validation(#[from] pondctl_core::Error),
}

/// Initial density profile of one species.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    /// `w(x, 0) = v`
    Const(f64),
    /// `w(x, 0) = c·x`
    Linear(f64),
    /// One value per node.
    Nodes(Vec<f64>),
}

impl InitialCondition {
    pub fn profile(&self, grid: &Discretization) -> Vec<f64> {
        match self {
            Self::Const(v) => vec![*v; grid.n_space()],
            Self::Linear(c) => grid.nodes().map(|x| c * x).collect(),
            Self::Nodes(v) => v.clone(),
        }
    }

    fn parse(text: &str) -> Result<Self, String> {
        let mut parts = text.split_whitespace();
        let kind = parts.next().ok_or("empty initial condition")?;
        let numbers = parts
            .map(|p| {
                p.parse::<f64>()
                    .map_err(|_| format!("`{p}` is not a number"))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if let Some(v) = numbers.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(format!(
                "initial values must be finite and non-negative, got {v}"
            ));
        }
        let single = |numbers: Vec<f64>| match numbers.as_slice() {
            [v] => Ok(*v),
            _ => Err(format!("`{kind}` takes exactly one value")),
        };
        match kind {
            "const" => single(numbers).map(Self::Const),
            "linear" => single(numbers).map(Self::Linear),
            "nodes" if !numbers.is_empty() => Ok(Self::Nodes(numbers)),
            "nodes" => Err("`nodes` needs at least one value".into()),
            other => Err(format!("unknown initial condition `{other}`")),
        }
    }

    fn render(&self) -> String {
        match self {
            Self::Const(v) => format!("const {v}"),
            Self::Linear(c) => format!("linear {c}"),
            Self::Nodes(v) => {
                let mut s = String::from("nodes");
                for x in v {
                    let _ = write!(s, " {x}");
                }
                s
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ControlSettings {
    pub enabled: bool,
    pub switch_rule: SwitchRule,
    pub freeze_after: Option<usize>,
}

impl Default for ControlSettings {
    fn default() -> Self {
        Self {
            enabled: true,
            switch_rule: SwitchRule::CrossSpecies,
            freeze_after: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputSettings {
    pub dir: PathBuf,
    pub csv: bool,
    pub plot: bool,
    pub stride: usize,
}

impl Default for OutputSettings {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            csv: true,
            plot: false,
            stride: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub model: ModelSpec,
    pub grid: Discretization,
    pub initial: Vec<InitialCondition>,
    pub control: ControlSettings,
    pub output: OutputSettings,
}

fn rule_name(rule: SwitchRule) -> &'static str {
    match rule {
        SwitchRule::CrossSpecies => "cross-species",
        SwitchRule::SelfDensity => "self-density",
    }
}

struct Entry<'a> {
    line: usize,
    value: &'a str,
    used: bool,
}

struct Entries<'a>(BTreeMap<String, Entry<'a>>);

impl<'a> Entries<'a> {
    fn take(&mut self, key: &str) -> Option<(usize, &'a str)> {
        self.0.get_mut(key).map(|e| {
            e.used = true;
            (e.line, e.value)
        })
    }

    fn required(&mut self, key: &str) -> Result<(usize, &'a str), ConfigError> {
        self.take(key)
            .ok_or_else(|| ConfigError::MissingRequiredKey {
                key: key.to_string(),
            })
    }

    fn parsed<T: std::str::FromStr>(&mut self, key: &str, default: T) -> Result<T, ConfigError> {
        match self.take(key) {
            None => Ok(default),
            Some((line, v)) => parse_value(line, key, v),
        }
    }
}

fn parse_value<T: std::str::FromStr>(
    line: usize,
    key: &str,
    value: &str,
) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::InvalidValue {
        line,
        key: key.to_string(),
        message: format!("cannot parse `{value}`"),
    })
}

fn parse_numbers(line: usize, key: &str, value: &str) -> Result<Vec<f64>, ConfigError> {
    value
        .split_whitespace()
        .map(|v| parse_value::<f64>(line, key, v))
        .collect()
}

fn parse_scalar(line: usize, key: &str, value: &str) -> Result<f64, ConfigError> {
    parse_value(line, key, value.trim())
}

const GLOBAL_KEYS: &[&str] = &[
    "name",
    "species",
    "grid.length",
    "grid.n_space",
    "time.horizon",
    "time.n_time",
    "output.stride",
    "output.dir",
    "output.formats",
    "control.enabled",
    "control.switch_rule",
    "control.freeze_after",
];
const SPECIES_FIELDS: &[&str] = &["a", "b", "tau", "diffusion", "initial"];

/// Parses and validates a scenario.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line,
            message: format!("expected `key = value`, got `{content}`"),
        })?;
        let key = key.trim();
        if key.is_empty() || key.contains(char::is_whitespace) {
            return Err(ConfigError::Syntax {
                line,
                message: format!("malformed key `{key}`"),
            });
        }
        let entry = Entry {
            line,
            value: value.trim(),
            used: false,
        };
        if map.insert(key.to_string(), entry).is_some() {
            return Err(ConfigError::DuplicateKey {
                line,
                key: key.to_string(),
            });
        }
    }
    let mut entries = Entries(map);

    let (line, n) = entries.required("species")?;
    let n: usize = parse_value(line, "species", n)?;
    if n == 0 {
        return Err(ConfigError::InvalidValue {
            line,
            key: "species".into(),
            message: "need at least one species".into(),
        });
    }

    // Reject unknown keys before reporting missing ones.
    for (key, entry) in &entries.0 {
        let known = GLOBAL_KEYS.contains(&key.as_str())
            || key
                .strip_prefix("species.")
                .and_then(|rest| rest.split_once('.'))
                .is_some_and(|(j, field)| {
                    j.parse::<usize>().is_ok_and(|j| (1..=n).contains(&j))
                        && SPECIES_FIELDS.contains(&field)
                });
        if !known {
            return Err(ConfigError::UnknownKey {
                line: entry.line,
                key: key.clone(),
            });
        }
    }

    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    let mut tau = Vec::with_capacity(n);
    let mut diffusion = Vec::with_capacity(n);
    let mut initial = Vec::with_capacity(n);
    let mut initial_lines = Vec::with_capacity(n);
    for j in 1..=n {
        let key = |field: &str| format!("species.{j}.{field}");

        let k = key("a");
        let (line, v) = entries.required(&k)?;
        a.push(parse_scalar(line, &k, v)?);

        let k = key("b");
        let (line, v) = entries.required(&k)?;
        let row = parse_numbers(line, &k, v)?;
        if row.len() != n {
            return Err(ConfigError::InvalidValue {
                line,
                key: k,
                message: format!("expected {n} interaction coefficients, got {}", row.len()),
            });
        }
        b.push(row);

        let k = key("tau");
        let (line, v) = entries.required(&k)?;
        tau.push(parse_scalar(line, &k, v)?);

        let k = key("diffusion");
        let (line, v) = entries.required(&k)?;
        diffusion.push(parse_scalar(line, &k, v)?);

        let k = key("initial");
        let (line, v) = entries.required(&k)?;
        initial.push(
            InitialCondition::parse(v).map_err(|message| ConfigError::InvalidValue {
                line,
                key: k,
                message,
            })?,
        );
        initial_lines.push(line);
    }
    let model = ModelSpec::new(a, b, tau, diffusion)?;

    let defaults = Discretization::default();
    let grid = Discretization::new(
        entries.parsed("grid.length", defaults.length())?,
        entries.parsed("grid.n_space", defaults.n_space())?,
        entries.parsed("time.horizon", defaults.horizon())?,
        entries.parsed("time.n_time", defaults.n_time())?,
    )?;

    for (j, (ic, line)) in initial.iter().zip(&initial_lines).enumerate() {
        if let InitialCondition::Nodes(v) = ic {
            if v.len() != grid.n_space() {
                return Err(ConfigError::InvalidValue {
                    line: *line,
                    key: format!("species.{}.initial", j + 1),
                    message: format!("expected {} node values, got {}", grid.n_space(), v.len()),
                });
            }
        }
    }

    let mut control = ControlSettings {
        enabled: entries.parsed("control.enabled", true)?,
        ..ControlSettings::default()
    };
    if let Some((line, v)) = entries.take("control.switch_rule") {
        control.switch_rule = match v {
            "cross-species" => SwitchRule::CrossSpecies,
            "self-density" => SwitchRule::SelfDensity,
            other => {
                return Err(ConfigError::InvalidValue {
                    line,
                    key: "control.switch_rule".into(),
                    message: format!("expected `cross-species` or `self-density`, got `{other}`"),
                })
            }
        };
    }
    if let Some((line, v)) = entries.take("control.freeze_after") {
        let k: usize = parse_value(line, "control.freeze_after", v)?;
        control.freeze_after = (k > 0).then_some(k);
    }

    let mut output = OutputSettings {
        stride: entries.parsed("output.stride", 10usize)?,
        ..OutputSettings::default()
    };
    if output.stride == 0 {
        let (line, _) = entries.take("output.stride").unwrap_or((0, ""));
        return Err(ConfigError::InvalidValue {
            line,
            key: "output.stride".into(),
            message: "stride must be at least 1".into(),
        });
    }
    if let Some((_, v)) = entries.take("output.dir") {
        output.dir = PathBuf::from(v);
    }
    if let Some((line, v)) = entries.take("output.formats") {
        output.csv = false;
        for f in v.split_whitespace() {
            match f {
                "csv" => output.csv = true,
                "plot" => output.plot = true,
                other => {
                    return Err(ConfigError::InvalidValue {
                        line,
                        key: "output.formats".into(),
                        message: format!("unknown format `{other}`"),
                    })
                }
            }
        }
    }

    let name = entries
        .take("name")
        .map_or_else(|| "scenario".to_string(), |(_, v)| v.to_string());

    debug_assert!(entries.0.values().all(|e| e.used));
    Ok(ScenarioConfig {
        name,
        model,
        grid,
        initial,
        control,
        output,
    })
}

/// Writes a config back out in the canonical key order.
pub fn render(config: &ScenarioConfig) -> String {
    let mut s = String::new();
    let m = &config.model;
    let n = m.n_species();
    let _ = writeln!(s, "name = {}", config.name);
    let _ = writeln!(s, "species = {n}");
    for j in 0..n {
        let id = j + 1;
        let row: Vec<String> = m.interaction().row(j).iter().map(f64::to_string).collect();
        let _ = writeln!(s, "species.{id}.a = {}", m.growth()[j]);
        let _ = writeln!(s, "species.{id}.b = {}", row.join(" "));
        let _ = writeln!(s, "species.{id}.tau = {}", m.harvest_capacity()[j]);
        let _ = writeln!(s, "species.{id}.diffusion = {}", m.diffusion()[j]);
        let _ = writeln!(s, "species.{id}.initial = {}", config.initial[j].render());
    }
    let g = &config.grid;
    let _ = writeln!(s, "grid.length = {}", g.length());
    let _ = writeln!(s, "grid.n_space = {}", g.n_space());
    let _ = writeln!(s, "time.horizon = {}", g.horizon());
    let _ = writeln!(s, "time.n_time = {}", g.n_time());
    let _ = writeln!(s, "control.enabled = {}", config.control.enabled);
    let _ = writeln!(
        s,
        "control.switch_rule = {}",
        rule_name(config.control.switch_rule)
    );
    if let Some(k) = config.control.freeze_after {
        let _ = writeln!(s, "control.freeze_after = {k}");
    }
    let o = &config.output;
    let _ = writeln!(s, "output.stride = {}", o.stride);
    let _ = writeln!(s, "output.dir = {}", o.dir.display());
    let formats: Vec<&str> = [(o.csv, "csv"), (o.plot, "plot")]
        .into_iter()
        .filter_map(|(on, f)| on.then_some(f))
        .collect();
    let _ = writeln!(s, "output.formats = {}", formats.join(" "));
    s
}
