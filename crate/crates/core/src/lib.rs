//! Numerical tools for cavitation and critical loads of polyconvex
//! stored energies under affine boundary stretches.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod config;
pub mod critload2d;
pub mod critload3d;
pub mod error;
pub mod fields;
pub mod quadrature;
pub mod radial;
pub mod reduce;
pub mod search;
pub mod svcalc;
pub mod volumetric;
pub mod zhang;

pub use error::{Error, Result};
