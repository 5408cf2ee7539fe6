//! Ground-state spectral solver and photon statistics for the quantum Rabi model
//! `H = Δσ_z + ωa†a + gσ_x(a + a†)`.
//!
//! The pipeline for one parameter point is
//! [`spectral::ground_solution`] → [`state::build_branch_state`] →
//! [`stats::photon_statistics`], wrapped by [`solve_point`]. The [`oracle`]
//! module recomputes the same panel by direct diagonalization, [`sweep`] maps
//! points over a grid, and [`ridge`] extracts and fits the squeezing ridge.

// `!(a < b)` is deliberate throughout: a NaN must fail every acceptance check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod error;
pub mod io;
pub mod oracle;
pub mod params;
pub mod ridge;
pub mod solve;
pub mod spectral;
pub mod state;
pub mod stats;
pub mod sweep;

pub use error::{RabiError, Result};
pub use params::{Branch, Parity, Phase, RabiParams};
pub use solve::{solve_point, PointSolution, SolverConfig};
pub use sweep::{run_sweep, Execution, GridAxis, Method, SweepRecord, SweepSpec};
