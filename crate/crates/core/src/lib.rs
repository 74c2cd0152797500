//! Threshold-harvest control of competing populations.
//!
//! The crate covers three layers:
//!
//! * [`control`]: optimal levels `ξ`, the switch indicator, the harvest law
//!   and the controlled equilibria derived from a [`ModelSpec`].
//! * [`ode`]: the space-free Lotka-Volterra system with harvesting, an RK4
//!   integrator and the closed-form solution of the harvested branch.
//! * [`pde`]: the Fisher-Kolmogorov system on a channel with zero-flux ends,
//!   advanced by a semi-implicit scheme with an inner linearization loop.
//!
//! ```
//! use pondctl_core::{equilibrium_levels, ModelSpec};
//!
//! let levels = equilibrium_levels(&ModelSpec::eichhornia()).unwrap();
//! assert_eq!(format!("{:.2}", levels.u_star[0]), "18.04");
//! ```

pub mod control;
pub mod error;
pub mod linalg;
pub mod model;
pub mod ode;
pub mod pde;
pub mod tridiag;

pub use control::{
    compute_xi, control, equilibrium_levels, evaluate_objective, switch_indicator, ControlLevels,
};
pub use error::{Error, Result};
pub use model::{Discretization, Dynamics, ModelSpec, StateField, StateVector};
pub use ode::{
    controlled_regime_closed_form, integrate_temporal, rhs_controlled, rhs_uncontrolled,
    OdeTrajectory,
};
pub use pde::{
    assemble_dxx, run_pde, semi_implicit_step, spatial_switch, DiffusionOperator, RunOptions,
    SimulationRun, StepDiagnostics, StepOptions, SwitchRule,
};
pub use tridiag::solve_tridiagonal;
