//! Model parameters, grids and state containers.
//!
//! Units follow the pond-management setting: densities in g·m⁻² dry mass,
//! time in days, space in meters. They are documented, not type-checked.

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

/// Parameters of N competing species.
///
/// `b[(j, k)]` is the effect of species `k` on the growth of species `j`.
/// Instances only exist in validated form; see [`ModelSpec::new`].
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    a: Vec<f64>,
    b: DenseMatrix,
    tau: Vec<f64>,
    diffusion: Vec<f64>,
    symmetrized: DenseMatrix,
}

impl ModelSpec {
    /// Validates raw parameters and builds a spec.
    ///
    /// Checks, in order: matching dimensions, finiteness, `a > 0`, `tau > 0`,
    /// `diffusion >= 0`, positive diagonal and non-negative off-diagonal of
    /// `b`, and invertibility of `b + bᵀ`.
    pub fn new(a: Vec<f64>, b: Vec<Vec<f64>>, tau: Vec<f64>, diffusion: Vec<f64>) -> Result<Self> {
        let n = a.len();
        if n == 0 {
            return Err(Error::DimensionMismatch {
                what: "species count",
                expected: 1,
                found: 0,
            });
        }
        for (what, len) in [
            ("interaction rows", b.len()),
            ("harvest capacities", tau.len()),
            ("diffusion coefficients", diffusion.len()),
        ] {
            if len != n {
                return Err(Error::DimensionMismatch {
                    what,
                    expected: n,
                    found: len,
                });
            }
        }
        let b = DenseMatrix::from_rows(&b)?;

        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        if !finite(&a) {
            return Err(Error::NonFiniteParameter { name: "a" });
        }
        if !finite(&tau) {
            return Err(Error::NonFiniteParameter { name: "tau" });
        }
        if !finite(&diffusion) {
            return Err(Error::NonFiniteParameter { name: "diffusion" });
        }
        if !(0..n).all(|j| finite(b.row(j))) {
            return Err(Error::NonFiniteParameter { name: "b" });
        }

        if let Some((species, &value)) = a.iter().enumerate().find(|(_, &v)| v <= 0.0) {
            return Err(Error::NonPositiveGrowth { species, value });
        }
        if let Some((species, &value)) = tau.iter().enumerate().find(|(_, &v)| v <= 0.0) {
            return Err(Error::NonPositiveHarvestCapacity { species, value });
        }
        if let Some((species, &value)) = diffusion.iter().enumerate().find(|(_, &v)| v < 0.0) {
            return Err(Error::NegativeDiffusion { species, value });
        }
        for row in 0..n {
            for col in 0..n {
                let value = b[(row, col)];
                if row == col && value <= 0.0 {
                    return Err(Error::NonPositiveSelfInteraction {
                        species: row,
                        value,
                    });
                }
                if row != col && value < 0.0 {
                    return Err(Error::NegativeInteraction { row, col, value });
                }
            }
        }

        let bt = b.transpose();
        let mut symmetrized = DenseMatrix::zeros(n);
        for j in 0..n {
            for k in 0..n {
                symmetrized[(j, k)] = b[(j, k)] + bt[(j, k)];
            }
        }
        // Invertibility; the solution itself is recomputed by the control law.
        symmetrized.solve_checked(&a)?;

        Ok(Self {
            a,
            b,
            tau,
            diffusion,
            symmetrized,
        })
    }

    /// Single-species *Eichhornia crassipes* parameters.
    pub fn eichhornia() -> Self {
        Self::new(vec![0.103], vec![vec![0.000147]], vec![1.0], vec![1.33])
            .expect("preset parameters are valid")
    }

    /// Two-species *Eichhornia crassipes* / *Pistia stratiotes* parameters.
    pub fn eichhornia_pistia() -> Self {
        Self::new(
            vec![0.061, 0.087],
            vec![vec![0.0000614, 0.00001], vec![0.0001, 0.0001992]],
            vec![1.0, 1.0],
            vec![1.33, 1.3],
        )
        .expect("preset parameters are valid")
    }

    pub fn n_species(&self) -> usize {
        self.a.len()
    }

    pub fn growth(&self) -> &[f64] {
        &self.a
    }

    pub fn interaction(&self) -> &DenseMatrix {
        &self.b
    }

    /// `b[j][k] + b[k][j]`.
    pub fn symmetrized(&self) -> &DenseMatrix {
        &self.symmetrized
    }

    pub fn harvest_capacity(&self) -> &[f64] {
        &self.tau
    }

    pub fn diffusion(&self) -> &[f64] {
        &self.diffusion
    }

    /// Re-runs validation on this spec's parameters.
    pub fn validate(&self) -> Result<Self> {
        Self::new(
            self.a.clone(),
            self.b.rows(),
            self.tau.clone(),
            self.diffusion.clone(),
        )
    }

    /// Uncontrolled single-species equilibria `a[j] / b[j][j]`.
    pub fn carrying_capacity(&self) -> Vec<f64> {
        self.a
            .iter()
            .enumerate()
            .map(|(j, a)| a / self.b[(j, j)])
            .collect()
    }

    pub(crate) fn check_len(&self, what: &'static str, len: usize) -> Result<()> {
        if len == self.n_species() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                what,
                expected: self.n_species(),
                found: len,
            })
        }
    }
}

/// Which right-hand side a simulation advances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Dynamics {
    /// Threshold harvesting switched on by the indicator sign.
    #[default]
    Controlled,
    /// Plain competition dynamics, no harvest.
    Free,
    /// Reaction switched off; only diffusion acts (zero rhs without space).
    DiffusionOnly,
}

/// Uniform space and time grids.
///
/// Nodes sit at `x_s = s·dx` for `s = 0..n_space`, so both channel ends are
/// grid points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discretization {
    length: f64,
    n_space: usize,
    horizon: f64,
    n_time: usize,
}

impl Discretization {
    pub fn new(length: f64, n_space: usize, horizon: f64, n_time: usize) -> Result<Self> {
        if n_space < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 spatial nodes, got {n_space}"
            )));
        }
        if n_time < 1 {
            return Err(Error::InvalidGrid("need at least 1 time step".into()));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "channel length must be positive, got {length}"
            )));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "horizon must be positive, got {horizon}"
            )));
        }
        Ok(Self {
            length,
            n_space,
            horizon,
            n_time,
        })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn n_space(&self) -> usize {
        self.n_space
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn n_time(&self) -> usize {
        self.n_time
    }

    pub fn dx(&self) -> f64 {
        self.length / (self.n_space - 1) as f64
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.n_time as f64
    }

    pub fn x(&self, node: usize) -> f64 {
        node as f64 * self.dx()
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_space).map(|s| self.x(s))
    }

    /// Time of level `l`.
    pub fn t(&self, level: usize) -> f64 {
        level as f64 * self.dt()
    }

    /// Same grid with `factor` times as many time steps.
    pub fn refine_time(&self, factor: usize) -> Self {
        Self {
            n_time: self.n_time * factor,
            ..*self
        }
    }

    pub fn with_horizon(&self, horizon: f64, n_time: usize) -> Result<Self> {
        Self::new(self.length, self.n_space, horizon, n_time)
    }
}

impl Default for Discretization {
    /// 10 m channel, 100 nodes, 30 days in 5000 steps.
    fn default() -> Self {
        Self {
            length: 10.0,
            n_space: 100,
            horizon: 30.0,
            n_time: 5000,
        }
    }
}

/// Densities of every species over the spatial grid at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct StateField {
    values: Vec<Vec<f64>>,
    time: f64,
}

impl StateField {
    /// `values[j][s]` is species `j` at node `s`.
    pub fn new(values: Vec<Vec<f64>>, time: f64) -> Result<Self> {
        let n_space = values.first().map_or(0, Vec::len);
        for (species, row) in values.iter().enumerate() {
            if row.len() != n_space {
                return Err(Error::DimensionMismatch {
                    what: "field row",
                    expected: n_space,
                    found: row.len(),
                });
            }
            if let Some(&value) = row.iter().find(|v| v.is_nan() || **v < 0.0) {
                return Err(if value.is_finite() {
                    Error::NegativeDensity { species, value }
                } else {
                    Error::NonFiniteState { time }
                });
            }
        }
        Ok(Self { values, time })
    }

    /// Every species constant in space.
    pub fn uniform(levels: &[f64], n_space: usize) -> Result<Self> {
        Self::new(levels.iter().map(|&v| vec![v; n_space]).collect(), 0.0)
    }

    pub(crate) fn from_parts_unchecked(values: Vec<Vec<f64>>, time: f64) -> Self {
        Self { values, time }
    }

    pub fn n_species(&self) -> usize {
        self.values.len()
    }

    pub fn n_space(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn species(&self, j: usize) -> &[f64] {
        &self.values[j]
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    /// Densities of all species at one node.
    pub fn at_node(&self, s: usize) -> Vec<f64> {
        self.values.iter().map(|row| row[s]).collect()
    }

    pub fn check_shape(&self, n_species: usize, n_space: usize) -> Result<()> {
        if self.n_species() != n_species {
            return Err(Error::DimensionMismatch {
                what: "field species",
                expected: n_species,
                found: self.n_species(),
            });
        }
        if self.n_space() != n_space {
            return Err(Error::DimensionMismatch {
                what: "field nodes",
                expected: n_space,
                found: self.n_space(),
            });
        }
        Ok(())
    }
}

/// Densities of every species for the space-free model.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    values: Vec<f64>,
    time: f64,
}

impl StateVector {
    pub fn new(values: Vec<f64>, time: f64) -> Result<Self> {
        if let Some((species, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| v.is_nan() || **v < 0.0)
        {
            return Err(if value.is_finite() {
                Error::NegativeDensity { species, value }
            } else {
                Error::NonFiniteState { time }
            });
        }
        Ok(Self { values, time })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn time(&self) -> f64 {
        self.time
    }
}
