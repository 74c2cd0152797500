//! Running a configured scenario and writing its files.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use pondctl_core::{
    equilibrium_levels, integrate_temporal, run_pde, ControlLevels, Dynamics, RunOptions,
    StateField, StepOptions,
};
use thiserror::Error;

use crate::config::{parse_config, ConfigError, InitialCondition, ScenarioConfig};
use crate::output;
use crate::presets::find_preset;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error("{0}")]
    Unsupported(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("numerical failure: {0}")]
    Numerical(pondctl_core::Error),
}

impl ScenarioError {
    /// 1 for bad input or I/O, 2 when the numerics broke down.
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Numerical(_) => 2,
            _ => 1,
        }
    }
}

impl From<pondctl_core::Error> for ScenarioError {
    fn from(e: pondctl_core::Error) -> Self {
        if e.is_numerical() {
            Self::Numerical(e)
        } else {
            Self::Config(ConfigError::Validation(e))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Pde,
    /// Spatially uniform run of the temporal model; needs `const` initial data.
    Ode,
}

/// Command-line adjustments applied on top of a config.
#[derive(Debug, Clone, Default)]
pub struct RunRequest {
    pub mode: Mode,
    pub disable_control: bool,
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct ScenarioReport {
    pub name: String,
    pub out_dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub levels: ControlLevels,
    /// Final state per species (and per node for PDE runs).
    pub terminal: Vec<Vec<f64>>,
    pub max_inner_iterations: usize,
}

/// Reads a config from a file path, or from a bundled preset of that name.
pub fn load_config(source: &str) -> Result<ScenarioConfig, ScenarioError> {
    let path = Path::new(source);
    if !path.exists() {
        if let Some(p) = find_preset(source) {
            return Ok(p.config());
        }
    }
    let text = fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(parse_config(&text)?)
}

fn initial_field(config: &ScenarioConfig) -> Result<StateField, ScenarioError> {
    let rows = config
        .initial
        .iter()
        .map(|ic| ic.profile(&config.grid))
        .collect();
    Ok(StateField::new(rows, 0.0)?)
}

fn uniform_initial(config: &ScenarioConfig) -> Result<Vec<f64>, ScenarioError> {
    config
        .initial
        .iter()
        .enumerate()
        .map(|(j, ic)| match ic {
            InitialCondition::Const(v) => Ok(*v),
            _ => Err(ScenarioError::Unsupported(format!(
                "ODE mode needs `const` initial data, species {} is not uniform",
                j + 1
            ))),
        })
        .collect()
}

fn dynamics(config: &ScenarioConfig, request: &RunRequest) -> Dynamics {
    if config.control.enabled && !request.disable_control {
        Dynamics::Controlled
    } else {
        Dynamics::Free
    }
}

/// Tracks written files so a failed run leaves nothing half-done behind.
struct Writer {
    dir: PathBuf,
    created_dir: bool,
    files: Vec<PathBuf>,
}

impl Writer {
    fn new(dir: &Path) -> Result<Self, ScenarioError> {
        let created_dir = !dir.exists();
        fs::create_dir_all(dir).map_err(|source| ScenarioError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        Ok(Self {
            dir: dir.to_path_buf(),
            created_dir,
            files: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<(), ScenarioError> {
        let path = self.dir.join(name);
        self.files.push(path.clone());
        fs::write(&path, contents).map_err(|source| ScenarioError::Io { path, source })
    }

    fn discard(self) {
        for f in &self.files {
            let _ = fs::remove_file(f);
        }
        if self.created_dir {
            let _ = fs::remove_dir(&self.dir);
        }
    }
}

/// Runs the scenario and writes its output files.
pub fn run_scenario(
    config: &ScenarioConfig,
    request: &RunRequest,
) -> Result<ScenarioReport, ScenarioError> {
    let out_dir = request
        .out_dir
        .clone()
        .unwrap_or_else(|| config.output.dir.clone());
    // Validate inputs before touching the filesystem.
    let levels = equilibrium_levels(&config.model)?;
    let uniform = match request.mode {
        Mode::Ode => Some(uniform_initial(config)?),
        Mode::Pde => None,
    };
    let mut writer = Writer::new(&out_dir)?;
    match write_outputs(config, request, &levels, uniform, &mut writer) {
        Ok((terminal, max_inner_iterations)) => Ok(ScenarioReport {
            name: config.name.clone(),
            out_dir,
            files: writer.files,
            levels,
            terminal,
            max_inner_iterations,
        }),
        Err(e) => {
            writer.discard();
            Err(e)
        }
    }
}

fn write_outputs(
    config: &ScenarioConfig,
    request: &RunRequest,
    levels: &ControlLevels,
    uniform: Option<Vec<f64>>,
    writer: &mut Writer,
) -> Result<(Vec<Vec<f64>>, usize), ScenarioError> {
    let dynamics = dynamics(config, request);
    let n = config.model.n_species();
    let result = if let Some(w0) = uniform {
        let grid = &config.grid;
        let traj = integrate_temporal(
            &config.model,
            levels,
            &w0,
            grid.horizon(),
            grid.dt(),
            dynamics,
        )?;
        if config.output.csv {
            writer.write(
                "trajectory.csv",
                &output::trajectory_csv(&traj, config.output.stride),
            )?;
        }
        (traj.terminal().iter().map(|&v| vec![v]).collect(), 0)
    } else {
        let options = RunOptions {
            step: StepOptions {
                dynamics,
                switch_rule: config.control.switch_rule,
                freeze_regimes_after: config.control.freeze_after,
                ..StepOptions::default()
            },
            output_stride: config.output.stride,
        };
        let initial = initial_field(config)?;
        let run = run_pde(&config.model, levels, &config.grid, &initial, &options)?;
        if config.output.csv {
            writer.write("field.csv", &output::field_csv(&run))?;
            writer.write(
                "diagnostics.csv",
                &output::diagnostics_csv(&run.diagnostics, n),
            )?;
        }
        if config.output.plot {
            writer.write("field.gp", &output::plot_script(&config.name, n))?;
        }
        (run.terminal().values().to_vec(), run.max_inner_iterations())
    };
    writer.write("levels.txt", &output::levels_text(&config.name, levels))?;
    writer.write("levels.csv", &output::levels_csv(levels))?;
    Ok(result)
}

/// `levels.txt` contents for a config, without running anything.
pub fn levels_report(config: &ScenarioConfig) -> Result<String, ScenarioError> {
    let levels = equilibrium_levels(&config.model)?;
    Ok(output::levels_text(&config.name, &levels))
}
