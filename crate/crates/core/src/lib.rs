//! Discontinuous Galerkin solvers for 1D linear hyperbolic systems with
//! discretely exact adjoints and parameter gradients.

pub mod basis;
pub mod error;
pub mod field;
pub mod mesh;
pub mod models;
pub mod objective;
pub mod problem;
pub mod time;
pub mod verification;

pub use basis::{NodalBasis, QuadratureMode};
pub use error::Error;
pub use field::{DgField, Discretization};
pub use mesh::{BoundaryKind, Mesh1D, Side};
