//! Explicit two-step dual scattering channel solver for buoyancy-driven
//! quasi-incompressible flow on unstructured hexahedral meshes.

// `!(x >= bound)` is used on purpose so NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// index loops mirror the component notation of the update formulas
#![allow(clippy::needless_range_loop)]

pub mod boundary;
pub mod boussinesq;
pub mod dsc_state;
pub mod error;
pub mod gradops;
pub mod hexmesh;
pub mod pressure;
pub mod sim;

pub use error::{DscError, Result};
