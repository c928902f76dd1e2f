//! Two-dimensional incompressible flow on a staggered grid, with a family of
//! pressure-equation solvers built around aggressive (16h-32h) coarsening.
//!
//! The crate is organised bottom-up:
//!
//! * [`field`] grid geometry, ghost-ringed storage and boundary closures
//! * [`smoother`] five- and nine-point stencils, residuals and Gauss-Seidel sweeps
//! * [`coarsening`] coarse operators (interpolated stencil, additive correction,
//!   re-discretised five-point) and grid transfers
//! * [`cycles`] solver drivers with convergence control
//! * [`metrics`] iteration / synchronisation / arithmetic-intensity accounting
//! * [`projection`] incremental pressure-correction time stepping
//! * [`bench`] benchmark setups and the table sweep harness
//! * [`io`] VTK and CSV snapshot writers

pub mod bench;
pub mod coarsening;
pub mod cycles;
pub mod error;
pub mod field;
pub mod io;
pub mod metrics;
pub mod projection;
pub mod real;
pub mod smoother;

pub use error::{Error, Result};
pub use real::Real;
