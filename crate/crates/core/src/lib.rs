//! Finite volume solvers for Keller-Segel type chemotaxis systems.
//!
//! The crate discretizes the cell density / chemoattractant pair on an
//! admissible (here: uniform rectangular) mesh with a two-point flux and a
//! hybrid central/upwind convective flux. Time marching is decoupled: the
//! chemoattractant equation is solved first, then the cell equation. The
//! corrected variant adds a lagged increment of the chemoattractant source to
//! the right-hand side, recovering most of the accuracy of the fully coupled
//! scheme at the cost of two linear solves per step.
//!
//! Module map:
//! - [`mesh`]: control volumes with their edge geometry.
//! - [`model`]: PDE coefficients and experiment presets.
//! - [`scheme`]: assembly and time steppers.
//! - [`linalg`]: CSR matrices and linear solvers.
//! - [`sim`]: time loop and convergence studies.
//! - [`io`]: CSV / legacy VTK writers and readers.

pub mod error;
pub mod io;
pub mod linalg;
pub mod mesh;
pub mod model;
pub mod scheme;
pub mod sim;

pub use error::{Error, Result};
pub use linalg::{LinearSolver, SolveReport, SparseMatrix};
pub use mesh::Mesh;
pub use model::{ChemDynamics, ChemSource, Growth, InitialConditionSpec, ModelSpec, Preset, Region};
pub use scheme::{BetaPolicy, FluxLimiter, SchemeKind, SchemeVariant, State, Stepper};
pub use sim::{Diagnostics, RunConfig, RunOutput, StudyReport};
