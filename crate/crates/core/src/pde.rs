//! Controlled Fisher-Kolmogorov system on a 1-D channel with zero-flux ends.
//!
//! Each time step `l` solves, for every species `j`,
//!
//! ```text
//! (ŵ_j − w_j^{l−1}) / dt = D_j·D_xx·ŵ_j + H_j(ŵ)
//! ```
//!
//! where `H_j` is the reaction term linearized about the current inner
//! iterate `w^p`:
//!
//! ```text
//! free node:       a_j·ŵ_j − 2·Σ_k b_jk·ŵ_j·w_k^p + Σ_k b_jk·w_j^p·w_k^p
//! harvested node:  a_j·ξ_j − Σ_k b_jk·ξ_j·ξ_k − τ_j·u_j,   u_j = w_j^p − ξ_j
//! ```
//!
//! The regime of every node is fixed from `w^p` before the solve. Inner
//! iterations repeat until `max_j ‖ŵ_j − w_j^p‖∞ <= 1e-4` or the iteration
//! budget runs out. Every solve is one tridiagonal system per species.

use crate::control::{harvest, ControlLevels};
use crate::error::{Error, Result};
use crate::model::{Discretization, Dynamics, ModelSpec, StateField};
use crate::tridiag::solve_tridiagonal_into;

/// Stopping threshold on the inner-iteration update.
pub const INNER_TOLERANCE: f64 = 1e-4;
/// Iteration counter bound; at most `MAX_INNER_ITERATIONS − 1` solves run.
pub const MAX_INNER_ITERATIONS: usize = 100;
/// Undershoots down to this are clamped to zero; below it is an error.
pub const NEGATIVE_CLAMP: f64 = 1e-9;

/// Second-difference matrix with zero-flux end rows, scaled by `1/dx²`.
///
/// Interior rows are `(1, −2, 1)`, the first row `(−1, 1)` and the last
/// `(1, −1)`. It is symmetric and every row sums to zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionOperator {
    n: usize,
    inv_dx2: f64,
}

/// Builds the operator for `n` nodes spaced `dx` apart.
pub fn assemble_dxx(n: usize, dx: f64) -> Result<DiffusionOperator> {
    if n < 2 {
        return Err(Error::InvalidGrid(format!(
            "need at least 2 nodes, got {n}"
        )));
    }
    if !(dx > 0.0 && dx.is_finite()) {
        return Err(Error::InvalidGrid(format!(
            "spacing must be positive, got {dx}"
        )));
    }
    Ok(DiffusionOperator {
        n,
        inv_dx2: 1.0 / (dx * dx),
    })
}

impl DiffusionOperator {
    pub fn for_grid(disc: &Discretization) -> Result<Self> {
        assemble_dxx(disc.n_space(), disc.dx())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn inv_dx2(&self) -> f64 {
        self.inv_dx2
    }

    /// Unscaled stencil weight of row `i` on its diagonal.
    fn center(&self, i: usize) -> f64 {
        if i == 0 || i == self.n - 1 {
            -1.0
        } else {
            -2.0
        }
    }

    /// Entry `(i, k)` of the scaled matrix.
    pub fn entry(&self, i: usize, k: usize) -> f64 {
        let raw = if i == k {
            self.center(i)
        } else if i.abs_diff(k) == 1 {
            1.0
        } else {
            0.0
        };
        raw * self.inv_dx2
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|k| self.entry(i, k)).collect())
            .collect()
    }

    /// `D_xx · w`.
    pub fn apply(&self, w: &[f64]) -> Vec<f64> {
        assert_eq!(w.len(), self.n, "field length must match operator size");
        let n = self.n;
        (0..n)
            .map(|i| {
                let mut acc = self.center(i) * w[i];
                if i > 0 {
                    acc += w[i - 1];
                }
                if i + 1 < n {
                    acc += w[i + 1];
                }
                acc * self.inv_dx2
            })
            .collect()
    }
}

/// How the switch indicator combines densities at a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SwitchRule {
    /// `A_j = −a_j + Σ_k (b_jk + b_kj)·w_k`, each species at its own density.
    #[default]
    CrossSpecies,
    /// `A_j = −a_j + Σ_k (b_jk + b_kj)·w_j`, the literal stepping-loop form.
    /// Identical to [`SwitchRule::CrossSpecies`] for one species.
    SelfDensity,
}

#[inline]
fn node_indicator(
    spec: &ModelSpec,
    rule: SwitchRule,
    j: usize,
    values: &[Vec<f64>],
    s: usize,
) -> f64 {
    let row = spec.symmetrized().row(j);
    let sum: f64 = match rule {
        SwitchRule::CrossSpecies => row.iter().zip(values).map(|(sjk, wk)| sjk * wk[s]).sum(),
        SwitchRule::SelfDensity => row.iter().sum::<f64>() * values[j][s],
    };
    sum - spec.growth()[j]
}

/// Nodewise switch indicator, `result[j][s]`.
pub fn spatial_switch(
    spec: &ModelSpec,
    field: &StateField,
    rule: SwitchRule,
) -> Result<Vec<Vec<f64>>> {
    field.check_shape(spec.n_species(), field.n_space())?;
    let values = field.values();
    Ok((0..spec.n_species())
        .map(|j| {
            (0..field.n_space())
                .map(|s| node_indicator(spec, rule, j, values, s))
                .collect()
        })
        .collect())
}

/// Harvest field `u[j][s]` implied by the indicator for a given field.
pub fn control_field(
    spec: &ModelSpec,
    levels: &ControlLevels,
    field: &StateField,
    rule: SwitchRule,
) -> Result<Vec<Vec<f64>>> {
    spec.check_len("levels", levels.n_species())?;
    let indicator = spatial_switch(spec, field, rule)?;
    Ok(indicator
        .iter()
        .enumerate()
        .map(|(j, row)| {
            row.iter()
                .zip(field.species(j))
                .map(|(&a, &w)| harvest(a, w, levels.xi[j]).0)
                .collect()
        })
        .collect())
}

/// Per-step tuning of the inner iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOptions {
    pub dynamics: Dynamics,
    pub switch_rule: SwitchRule,
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Stop re-flagging regimes after this many inner iterations.
    ///
    /// `None` re-flags on every iteration. With two or more species a node
    /// can sit where the harvested and free branches disagree and flip on
    /// every pass; freezing the flags lets the iteration settle on one branch.
    pub freeze_regimes_after: Option<usize>,
}

impl Default for StepOptions {
    fn default() -> Self {
        Self {
            dynamics: Dynamics::Controlled,
            switch_rule: SwitchRule::CrossSpecies,
            tolerance: INNER_TOLERANCE,
            max_iterations: MAX_INNER_ITERATIONS,
            freeze_regimes_after: None,
        }
    }
}

/// What the inner iteration did during one time step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepDiagnostics {
    /// Time at the end of the step.
    pub time: f64,
    /// Number of linearized solves performed.
    pub inner_iterations: usize,
    /// `max_j ‖ŵ_j − w_j^p‖∞` of the last solve.
    pub final_residual: f64,
    /// Per species, nodes flagged as harvested by the last iterate used for
    /// flagging.
    pub controlled_node_count: Vec<usize>,
    /// Harvest values clamped into `[0, w]` during the step.
    pub clamped_controls: usize,
}

/// Reusable buffers for repeated steps on one grid.
#[derive(Debug, Clone)]
pub struct Stepper {
    op: DiffusionOperator,
    options: StepOptions,
    iterate: Vec<Vec<f64>>,
    next: Vec<Vec<f64>>,
    controlled: Vec<Vec<bool>>,
    harvest: Vec<Vec<f64>>,
    lower: Vec<f64>,
    diag: Vec<f64>,
    rhs: Vec<f64>,
    scratch: Vec<f64>,
}

impl Stepper {
    pub fn new(op: DiffusionOperator, n_species: usize, options: StepOptions) -> Self {
        let n = op.n();
        Self {
            op,
            options,
            iterate: vec![vec![0.0; n]; n_species],
            next: vec![vec![0.0; n]; n_species],
            controlled: vec![vec![false; n]; n_species],
            harvest: vec![vec![0.0; n]; n_species],
            lower: vec![0.0; n - 1],
            diag: vec![0.0; n],
            rhs: vec![0.0; n],
            scratch: vec![0.0; n],
        }
    }

    /// Regime flags `[j][s]` used by the last linearized solve.
    pub fn controlled_flags(&self) -> &[Vec<bool>] {
        &self.controlled
    }

    /// Advances `prev` by `dt`.
    pub fn step(
        &mut self,
        spec: &ModelSpec,
        levels: &ControlLevels,
        prev: &StateField,
        dt: f64,
    ) -> Result<(StateField, StepDiagnostics)> {
        let n_species = spec.n_species();
        let n = self.op.n();
        prev.check_shape(n_species, n)?;
        spec.check_len("levels", levels.n_species())?;
        if self.iterate.len() != n_species {
            *self = Self::new(self.op, n_species, self.options);
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "time step must be positive, got {dt}"
            )));
        }

        let time = prev.time() + dt;
        for (it, w) in self.iterate.iter_mut().zip(prev.values()) {
            it.copy_from_slice(w);
        }

        let mut residual = f64::INFINITY;
        let mut iterations = 0;
        let mut clamped = 0;
        let mut p = 1;
        while residual > self.options.tolerance && p < self.options.max_iterations {
            let frozen = self
                .options
                .freeze_regimes_after
                .is_some_and(|k| iterations >= k.max(1));
            if frozen {
                clamped += self.refresh_harvest(levels);
            } else {
                clamped += self.flag_nodes(spec, levels);
            }
            for j in 0..n_species {
                self.solve_species(spec, levels, prev.species(j), dt, j)?;
                for species_value in self.next[j].iter_mut() {
                    if !species_value.is_finite() {
                        return Err(Error::NonFiniteState { time });
                    }
                    if *species_value < 0.0 {
                        if *species_value < -NEGATIVE_CLAMP {
                            return Err(Error::NegativeDensity {
                                species: j,
                                value: *species_value,
                            });
                        }
                        *species_value = 0.0;
                    }
                }
            }
            residual = self
                .next
                .iter()
                .zip(&self.iterate)
                .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
                .fold(0.0, f64::max);
            std::mem::swap(&mut self.iterate, &mut self.next);
            iterations += 1;
            p += 1;
        }
        if residual > self.options.tolerance {
            return Err(Error::InnerIterationDiverged {
                iterations,
                residual,
            });
        }

        let diagnostics = StepDiagnostics {
            time,
            inner_iterations: iterations,
            final_residual: residual,
            controlled_node_count: self
                .controlled
                .iter()
                .map(|row| row.iter().filter(|&&c| c).count())
                .collect(),
            clamped_controls: clamped,
        };
        Ok((
            StateField::from_parts_unchecked(self.iterate.clone(), time),
            diagnostics,
        ))
    }

    /// Sets regime flags and harvest from the current iterate; returns the
    /// number of clamped harvest values.
    fn flag_nodes(&mut self, spec: &ModelSpec, levels: &ControlLevels) -> usize {
        let mut clamped = 0;
        let controlled_dynamics = self.options.dynamics == Dynamics::Controlled;
        for j in 0..spec.n_species() {
            for s in 0..self.op.n() {
                let (flag, u) = if controlled_dynamics {
                    let a = node_indicator(spec, self.options.switch_rule, j, &self.iterate, s);
                    let (u, c) = harvest(a, self.iterate[j][s], levels.xi[j]);
                    clamped += usize::from(c);
                    (a > 0.0, u)
                } else {
                    (false, 0.0)
                };
                self.controlled[j][s] = flag;
                self.harvest[j][s] = u;
            }
        }
        clamped
    }

    /// Recomputes harvest on already-flagged nodes from the current iterate.
    fn refresh_harvest(&mut self, levels: &ControlLevels) -> usize {
        let mut clamped = 0;
        for (j, (flags, u)) in self.controlled.iter().zip(&mut self.harvest).enumerate() {
            for s in 0..flags.len() {
                let indicator = if flags[s] { 1.0 } else { 0.0 };
                let (value, c) = harvest(indicator, self.iterate[j][s], levels.xi[j]);
                clamped += usize::from(c);
                u[s] = value;
            }
        }
        clamped
    }

    /// Assembles `(I/dt − D_j·D_xx − diag(lin))·ŵ_j = w_prev/dt + c` and solves
    /// it into `self.next[j]`.
    fn solve_species(
        &mut self,
        spec: &ModelSpec,
        levels: &ControlLevels,
        prev: &[f64],
        dt: f64,
        j: usize,
    ) -> Result<()> {
        let n = self.op.n();
        let r = spec.diffusion()[j] * self.op.inv_dx2();
        let a = spec.growth()[j];
        let b = spec.interaction().row(j);
        let tau = spec.harvest_capacity()[j];
        let held = levels.held_growth(spec, j);
        let inv_dt = 1.0 / dt;

        self.lower.iter_mut().for_each(|v| *v = -r);
        for s in 0..n {
            let (lin, constant) = match self.options.dynamics {
                Dynamics::DiffusionOnly => (0.0, 0.0),
                _ if self.controlled[j][s] => (0.0, held - tau * self.harvest[j][s]),
                _ => {
                    let competition: f64 = b
                        .iter()
                        .zip(&self.iterate)
                        .map(|(bjk, wk)| bjk * wk[s])
                        .sum();
                    (a - 2.0 * competition, competition * self.iterate[j][s])
                }
            };
            self.diag[s] = inv_dt - r * self.op.center(s) - lin;
            self.rhs[s] = prev[s] * inv_dt + constant;
        }
        // Symmetric operator: the super-diagonal equals the sub-diagonal.
        solve_tridiagonal_into(
            &self.lower,
            &self.diag,
            &self.lower,
            &self.rhs,
            &mut self.scratch,
            &mut self.next[j],
        )
    }
}

/// One outer time step.
pub fn semi_implicit_step(
    spec: &ModelSpec,
    levels: &ControlLevels,
    op: &DiffusionOperator,
    prev: &StateField,
    dt: f64,
    options: &StepOptions,
) -> Result<(StateField, StepDiagnostics)> {
    Stepper::new(*op, spec.n_species(), *options).step(spec, levels, prev, dt)
}

/// Options for [`run_pde`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub step: StepOptions,
    /// Store every `output_stride`-th time level; the last level is always
    /// stored.
    pub output_stride: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            step: StepOptions::default(),
            output_stride: 10,
        }
    }
}

impl RunOptions {
    pub fn with_dynamics(dynamics: Dynamics) -> Self {
        let mut options = Self::default();
        options.step.dynamics = dynamics;
        options
    }
}

/// Recorded PDE trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationRun {
    pub grid: Discretization,
    /// Stored fields, starting with the initial condition.
    pub snapshots: Vec<StateField>,
    /// Harvest field `u[j][s]` matching each snapshot.
    pub controls: Vec<Vec<Vec<f64>>>,
    /// One entry per time step.
    pub diagnostics: Vec<StepDiagnostics>,
}

impl SimulationRun {
    pub fn terminal(&self) -> &StateField {
        self.snapshots
            .last()
            .expect("a run stores at least the initial field")
    }

    /// Last stored snapshot with `time <= t`.
    pub fn snapshot_at(&self, t: f64) -> Option<&StateField> {
        self.snapshots
            .iter()
            .take_while(|f| f.time() <= t + 1e-9)
            .last()
    }

    pub fn max_inner_iterations(&self) -> usize {
        self.diagnostics
            .iter()
            .map(|d| d.inner_iterations)
            .max()
            .unwrap_or(0)
    }
}

/// Advances `initial` over the whole time grid of `disc`.
pub fn run_pde(
    spec: &ModelSpec,
    levels: &ControlLevels,
    disc: &Discretization,
    initial: &StateField,
    options: &RunOptions,
) -> Result<SimulationRun> {
    initial.check_shape(spec.n_species(), disc.n_space())?;
    spec.check_len("levels", levels.n_species())?;
    let stride = options.output_stride.max(1);
    let op = DiffusionOperator::for_grid(disc)?;
    let mut stepper = Stepper::new(op, spec.n_species(), options.step);
    let dt = disc.dt();

    let harvest_of = |field: &StateField| -> Result<Vec<Vec<f64>>> {
        if options.step.dynamics == Dynamics::Controlled {
            control_field(spec, levels, field, options.step.switch_rule)
        } else {
            Ok(vec![vec![0.0; field.n_space()]; field.n_species()])
        }
    };

    let start = StateField::from_parts_unchecked(initial.values().to_vec(), 0.0);
    let mut run = SimulationRun {
        grid: *disc,
        controls: vec![harvest_of(&start)?],
        snapshots: vec![start],
        diagnostics: Vec::with_capacity(disc.n_time()),
    };
    let mut current = run.snapshots[0].clone();
    for level in 1..=disc.n_time() {
        let (mut next, diag) =
            stepper
                .step(spec, levels, &current, dt)
                .map_err(|e| Error::Step {
                    step: level,
                    source: Box::new(e),
                })?;
        // Pin the clock to the grid instead of accumulating dt.
        next = StateField::from_parts_unchecked(next.values().to_vec(), disc.t(level));
        run.diagnostics.push(StepDiagnostics {
            time: disc.t(level),
            ..diag
        });
        if level % stride == 0 || level == disc.n_time() {
            run.controls.push(harvest_of(&next)?);
            run.snapshots.push(next.clone());
        }
        current = next;
    }
    Ok(run)
}
