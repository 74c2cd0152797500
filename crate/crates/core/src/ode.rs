//! Space-free controlled competition dynamics.
//!
//! Species `j` follows the Lotka-Volterra right-hand side while
//! `A_j(w) <= 0` and the linear harvested branch `P_j − τ_j·w_j` otherwise.
//! Cross-species terms in the free branch use the raw densities `w_k`.

use crate::control::{self, indicator_row, ControlLevels};
use crate::error::{Error, Result};
use crate::model::{Dynamics, ModelSpec};

/// `a_j·w_j − Σ_k b_jk·w_j·w_k`.
pub fn rhs_uncontrolled(spec: &ModelSpec, w: &[f64]) -> Result<Vec<f64>> {
    spec.check_len("densities", w.len())?;
    Ok((0..spec.n_species())
        .map(|j| free_rate(spec, j, w))
        .collect())
}

#[inline]
fn free_rate(spec: &ModelSpec, j: usize, w: &[f64]) -> f64 {
    let competition: f64 = spec
        .interaction()
        .row(j)
        .iter()
        .zip(w)
        .map(|(b, wk)| b * wk)
        .sum();
    w[j] * (spec.growth()[j] - competition)
}

#[inline]
fn harvested_rate(spec: &ModelSpec, levels: &ControlLevels, j: usize, w: &[f64]) -> f64 {
    levels.held_growth(spec, j) - spec.harvest_capacity()[j] * (w[j] - levels.xi[j])
}

/// Piecewise right-hand side, each species branching on its own indicator.
pub fn rhs_controlled(spec: &ModelSpec, levels: &ControlLevels, w: &[f64]) -> Result<Vec<f64>> {
    spec.check_len("densities", w.len())?;
    spec.check_len("levels", levels.n_species())?;
    Ok(rhs(spec, levels, w, Dynamics::Controlled))
}

fn rhs(spec: &ModelSpec, levels: &ControlLevels, w: &[f64], dynamics: Dynamics) -> Vec<f64> {
    (0..spec.n_species())
        .map(|j| match dynamics {
            Dynamics::DiffusionOnly => 0.0,
            Dynamics::Free => free_rate(spec, j, w),
            Dynamics::Controlled => {
                if indicator_row(spec, j, |k| w[k]) > 0.0 {
                    harvested_rate(spec, levels, j, w)
                } else {
                    free_rate(spec, j, w)
                }
            }
        })
        .collect()
}

/// Exact solution of the harvested branch:
/// `w_j(t) = w*_j + (w0_j − w*_j)·exp(−τ_j·t)`.
///
/// Only meaningful while every species stays in the controlled regime.
pub fn controlled_regime_closed_form(
    spec: &ModelSpec,
    levels: &ControlLevels,
    w0: &[f64],
    t: f64,
) -> Vec<f64> {
    w0.iter()
        .zip(&levels.w_star)
        .zip(spec.harvest_capacity())
        .map(|((w0, ws), tau)| ws + (w0 - ws) * (-tau * t).exp())
        .collect()
}

/// Sampled solution of the temporal model.
#[derive(Debug, Clone, PartialEq)]
pub struct OdeTrajectory {
    /// Sample instants, strictly increasing, starting at 0.
    pub times: Vec<f64>,
    /// `states[i][j]`: species `j` at `times[i]`.
    pub states: Vec<Vec<f64>>,
    /// Harvest applied at each sample.
    pub controls: Vec<Vec<f64>>,
    /// `regime[i][j]`: harvesting active for species `j` at sample `i`.
    pub regime: Vec<Vec<bool>>,
}

impl OdeTrajectory {
    pub fn terminal(&self) -> &[f64] {
        self.states.last().map_or(&[], Vec::as_slice)
    }

    /// Time series of one species.
    pub fn species(&self, j: usize) -> Vec<f64> {
        self.states.iter().map(|w| w[j]).collect()
    }

    pub fn objective(&self, spec: &ModelSpec) -> Result<f64> {
        control::evaluate_objective(spec, &self.times, &self.states, &self.controls)
    }
}

fn record(
    spec: &ModelSpec,
    levels: &ControlLevels,
    dynamics: Dynamics,
    w: &[f64],
    traj: &mut OdeTrajectory,
    t: f64,
) -> Result<()> {
    let (u, regime) = if dynamics == Dynamics::Controlled {
        let indicator = control::switch_indicator(spec, w)?;
        let u = control::control(spec, levels, w)?;
        (u, indicator.iter().map(|&a| a > 0.0).collect())
    } else {
        (vec![0.0; w.len()], vec![false; w.len()])
    };
    traj.times.push(t);
    traj.states.push(w.to_vec());
    traj.controls.push(u);
    traj.regime.push(regime);
    Ok(())
}

/// Integrates the temporal model with classical RK4.
///
/// The step is `horizon / n` with `n = ⌈horizon / dt⌉`, so the last sample
/// lands on `horizon`. Regimes are re-evaluated at every stage; switch times
/// are not localized.
pub fn integrate_temporal(
    spec: &ModelSpec,
    levels: &ControlLevels,
    w0: &[f64],
    horizon: f64,
    dt: f64,
    dynamics: Dynamics,
) -> Result<OdeTrajectory> {
    spec.check_len("initial state", w0.len())?;
    spec.check_len("levels", levels.n_species())?;
    if !(dt > 0.0 && dt.is_finite()) || !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidGrid(format!(
            "need positive step and horizon, got dt = {dt}, horizon = {horizon}"
        )));
    }
    if let Some((species, &value)) = w0.iter().enumerate().find(|(_, v)| v.is_nan() || **v < 0.0) {
        return Err(Error::NegativeDensity { species, value });
    }

    let steps = ((horizon / dt) - 1e-9).ceil().max(1.0) as usize;
    let h = horizon / steps as f64;
    let n = w0.len();
    let mut traj = OdeTrajectory {
        times: Vec::with_capacity(steps + 1),
        states: Vec::with_capacity(steps + 1),
        controls: Vec::with_capacity(steps + 1),
        regime: Vec::with_capacity(steps + 1),
    };
    let mut w = w0.to_vec();
    record(spec, levels, dynamics, &w, &mut traj, 0.0)?;

    let f = |w: &[f64]| rhs(spec, levels, w, dynamics);
    let mut stage = vec![0.0; n];
    for step in 1..=steps {
        let k1 = f(&w);
        for i in 0..n {
            stage[i] = w[i] + 0.5 * h * k1[i];
        }
        let k2 = f(&stage);
        for i in 0..n {
            stage[i] = w[i] + 0.5 * h * k2[i];
        }
        let k3 = f(&stage);
        for i in 0..n {
            stage[i] = w[i] + h * k3[i];
        }
        let k4 = f(&stage);
        let t = step as f64 * h;
        for (species, wi) in w.iter_mut().enumerate() {
            *wi += h / 6.0 * (k1[species] + 2.0 * k2[species] + 2.0 * k3[species] + k4[species]);
            if !wi.is_finite() {
                return Err(Error::NonFiniteState { time: t });
            }
            if *wi < 0.0 {
                if *wi < -1e-9 {
                    return Err(Error::NegativeDensity {
                        species,
                        value: *wi,
                    });
                }
                *wi = 0.0;
            }
        }
        record(spec, levels, dynamics, &w, &mut traj, t)?;
    }
    Ok(traj)
}
