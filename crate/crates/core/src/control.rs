//! Threshold harvesting control.
//!
//! The optimal level `ξ` solves `S·ξ = a` with `S = b + bᵀ`. The switch
//! indicator `A_j(w) = −a_j + Σ_k S[j][k]·w_k` is zero at `ξ`; harvesting
//! `u_j = w_j − ξ_j` is applied to species `j` only while `A_j > 0`.
//!
//! Once harvesting is active the dynamics of species `j` are linear,
//! `dw_j/dt = P_j − τ_j·w_j`, with equilibrium `w*_j = P_j/τ_j` and a steady
//! daily removal `u*_j = w*_j − ξ_j`.

use crate::error::{Error, Result};
use crate::model::ModelSpec;

/// Levels derived from a [`ModelSpec`] by [`equilibrium_levels`].
#[derive(Debug, Clone, PartialEq)]
pub struct ControlLevels {
    /// Optimal population levels `ξ`.
    pub xi: Vec<f64>,
    /// Constant source of the controlled branch, `P_j`.
    pub p: Vec<f64>,
    /// Controlled equilibria `P_j / τ_j`.
    pub w_star: Vec<f64>,
    /// Steady daily removals `w*_j − ξ_j`.
    pub u_star: Vec<f64>,
}

impl ControlLevels {
    pub fn n_species(&self) -> usize {
        self.xi.len()
    }

    /// `a_j·ξ_j − Σ_k b_jk·ξ_j·ξ_k`: growth of species `j` held at `ξ`.
    pub fn held_growth(&self, spec: &ModelSpec, j: usize) -> f64 {
        self.p[j] - spec.harvest_capacity()[j] * self.xi[j]
    }
}

/// Solves `(b + bᵀ)·ξ = a`.
pub fn compute_xi(spec: &ModelSpec) -> Result<Vec<f64>> {
    spec.symmetrized().solve_checked(spec.growth())
}

/// `A_j = −a_j + Σ_k (b_jk + b_kj)·w_k` for every species.
pub fn switch_indicator(spec: &ModelSpec, w: &[f64]) -> Result<Vec<f64>> {
    spec.check_len("densities", w.len())?;
    Ok((0..spec.n_species())
        .map(|j| indicator_row(spec, j, |k| w[k]))
        .collect())
}

/// Indicator for species `j`, with densities supplied per species index.
#[inline]
pub(crate) fn indicator_row(spec: &ModelSpec, j: usize, w: impl Fn(usize) -> f64) -> f64 {
    let s = spec.symmetrized().row(j);
    s.iter()
        .enumerate()
        .fold(-spec.growth()[j], |acc, (k, sjk)| acc + sjk * w(k))
}

/// Harvest for one species given its indicator value.
///
/// Returns the control and whether it had to be clamped into `[0, w]`.
#[inline]
pub(crate) fn harvest(indicator: f64, w: f64, xi: f64) -> (f64, bool) {
    if indicator > 0.0 {
        let raw = w - xi;
        let u = raw.clamp(0.0, w.max(0.0));
        (u, u != raw)
    } else {
        (0.0, false)
    }
}

/// Pointwise control `u_k = w_k − ξ_k` where `A_k(w) > 0`, else 0.
pub fn control(spec: &ModelSpec, levels: &ControlLevels, w: &[f64]) -> Result<Vec<f64>> {
    control_with_clamps(spec, levels, w).map(|(u, _)| u)
}

/// As [`control`], also counting entries clamped into `[0, w]`.
pub fn control_with_clamps(
    spec: &ModelSpec,
    levels: &ControlLevels,
    w: &[f64],
) -> Result<(Vec<f64>, usize)> {
    spec.check_len("levels", levels.n_species())?;
    let indicator = switch_indicator(spec, w)?;
    let mut clamps = 0;
    let u = indicator
        .iter()
        .zip(w)
        .zip(&levels.xi)
        .map(|((&ind, &wj), &xi)| {
            let (u, clamped) = harvest(ind, wj, xi);
            clamps += usize::from(clamped);
            u
        })
        .collect();
    Ok((u, clamps))
}

/// Computes `ξ`, `P`, `w*` and `u*`.
///
/// `P_j = a_j·ξ_j − Σ_k b_jk·ξ_j·ξ_k + τ_j·ξ_j`. For a single species this is
/// `a²/(4b) + aτ/(2b)` and `u* = a²/(4bτ)`.
pub fn equilibrium_levels(spec: &ModelSpec) -> Result<ControlLevels> {
    let xi = compute_xi(spec)?;
    let b = spec.interaction();
    let p: Vec<f64> = (0..spec.n_species())
        .map(|j| {
            let competition: f64 = (0..spec.n_species()).map(|k| b[(j, k)] * xi[k]).sum();
            xi[j] * (spec.growth()[j] - competition + spec.harvest_capacity()[j])
        })
        .collect();
    let w_star: Vec<f64> = p
        .iter()
        .zip(spec.harvest_capacity())
        .map(|(p, tau)| p / tau)
        .collect();
    let u_star = w_star.iter().zip(&xi).map(|(w, x)| w - x).collect();
    Ok(ControlLevels {
        xi,
        p,
        w_star,
        u_star,
    })
}

/// `J = −Σ_j w_j(T) − Σ_j τ_j ∫₀ᵀ u_j dt`, with the integral by the
/// trapezoid rule over the samples.
///
/// `states[i]` and `controls[i]` are the per-species values at `times[i]`.
pub fn evaluate_objective(
    spec: &ModelSpec,
    times: &[f64],
    states: &[Vec<f64>],
    controls: &[Vec<f64>],
) -> Result<f64> {
    if times.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    for (what, len) in [
        ("state samples", states.len()),
        ("control samples", controls.len()),
    ] {
        if len != times.len() {
            return Err(Error::DimensionMismatch {
                what,
                expected: times.len(),
                found: len,
            });
        }
    }
    for (w, u) in states.iter().zip(controls) {
        spec.check_len("state sample", w.len())?;
        spec.check_len("control sample", u.len())?;
    }

    let terminal: f64 = states[states.len() - 1].iter().sum();
    let harvested: f64 = (0..spec.n_species())
        .map(|j| {
            let integral: f64 = times
                .windows(2)
                .zip(controls.windows(2))
                .map(|(t, u)| 0.5 * (t[1] - t[0]) * (u[0][j] + u[1][j]))
                .sum();
            spec.harvest_capacity()[j] * integral
        })
        .sum();
    Ok(-terminal - harvested)
}
