//! Whole-line spectral solver for the Benjamin equation
//!
//! ```text
//! u_t = -alpha u_x + beta H[u_xx] + gamma u_xxx - delta (u^2)_x,   x in R
//! ```
//!
//! and its Korteweg-de Vries (`beta = 0`) special case. Space is discretized by
//! collocation in the Malmquist-Takenaka-Christov (MTC) rational basis, in which
//! differentiation is banded and the Hilbert transform is an exact even/odd
//! swap. Time is advanced by the 4-stage, order-8 Gauss implicit Runge-Kutta
//! method with fixed-point stage iterations.
//!
//! Module map:
//! - [`basis`]: collocation grid and pointwise evaluation of MTC functions
//! - [`transform`]: nodal <-> coefficient transforms (naive and FFT-based)
//! - [`operators`]: the banded operators `J`, `H` and `D = aJ + bHJ^2 - gJ^3`
//! - [`integrator`]: Gauss tableau, shifted-system stage solver, time loop
//! - [`model`]: the semi-discrete Benjamin system, Hamiltonian, forcing
//! - [`oracles`]: closed-form reference solutions
//! - [`travelwave`]: traveling-wave profiles by continuation in `sigma`
//! - [`harness`]: error norms, the numbered experiments and convergence sweeps

pub mod banded;
pub mod basis;
mod error;
pub mod exec;
pub mod harness;
pub mod integrator;
pub mod model;
pub mod operators;
pub mod oracles;
pub mod transform;
pub mod travelwave;

pub use basis::BasisGrid;
pub use error::{Error, Result};
pub use exec::Exec;
pub use integrator::{IrkTableau, StageSolver, StepperConfig};
pub use model::{BenjaminSystem, Source};
pub use operators::{ModelParams, OperatorBundle};
pub use transform::{NodalField, SpectralField, Transform};
