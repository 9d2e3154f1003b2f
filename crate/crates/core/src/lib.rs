//! Numerical integral geometry of Minkowski planes and spaces.
//!
//! The crate computes Crofton densities of normed spaces, measures curve
//! lengths and surface areas by integrating intersection counts over the
//! space of lines and planes, and checks each result against an independent
//! closed form or quadrature.

// `!(x > 0.0)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod crofton2d;
pub mod crofton3d;
pub mod error;
pub mod geodesics;
pub mod htarea2d;
pub mod json;
pub mod lines;
pub mod mc;
pub mod norms;
pub mod quad;
pub mod sphere;
pub mod symplectic2d;

pub use error::{Error, Result};
pub use mc::{McEstimate, McOptions};
pub use norms::MinkowskiNorm;
