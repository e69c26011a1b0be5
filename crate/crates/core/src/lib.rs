//! Solver for the spatially homogeneous matrix-valued Boltzmann equation of
//! the weakly interacting Fermi-Hubbard chain.
//!
//! The state is a 2x2 Hermitian Wigner matrix per momentum on the Brillouin
//! zone `[-1/2, 1/2)`. The library evaluates the conservative (Vlasov) and
//! dissipative collision operators for four dispersion families, integrates
//! in time with the conservation-exact explicit midpoint rule, computes
//! thermal and non-thermal stationary states from the conserved quantities,
//! and fits thermalization rates from entropy trajectories.
//!
//! Modules follow the pipeline:
//! [`matrix2`] (Hermitian kernels) -> [`dispersion`] -> [`wigner`] (grid
//! state) -> [`manifold`] (collision quadrature) -> [`collision`] ->
//! [`evolve`] -> [`stationary`] / [`analysis`], with [`io`] for the CSV
//! surfaces shared with the command-line front end.

pub mod analysis;
pub mod collision;
pub mod dispersion;
pub mod error;
pub mod evolve;
pub mod io;
pub mod manifold;
pub mod matrix2;
pub mod stationary;
pub mod wigner;

pub use dispersion::DispersionModel;
pub use error::{Error, Result};
pub use evolve::{run, RunConfig, RunResult, TrajectoryRecord};
pub use manifold::{Branch, ManifoldCache, ManifoldSample};
pub use matrix2::Herm2;
pub use stationary::{NonThermalParams, SpinBasis, ThermalParams};
pub use wigner::WignerState;
