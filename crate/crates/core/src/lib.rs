//! Metric projections onto the LMI cones `K_n`, their polars and the PSD
//! slices `T_n = A K_n`, together with probes that measure how the
//! semismoothness order of these projections degrades as `n` grows.

mod alm;
pub mod cli;
pub mod cones;
pub mod error;
pub mod probe;
pub mod project;
pub mod space;
pub mod symmat;
pub mod verify;

pub use cones::{ConeModel, ConePoint, NormalRay};
pub use error::{Error, Result};
pub use probe::{ProbeMode, ProbeReport};
pub use project::{SolveStats, SolverConfig};
pub use space::Euclidean;
pub use symmat::{BlockSymMatrix, Sym2, SymMatrix};
