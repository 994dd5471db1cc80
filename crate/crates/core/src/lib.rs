//! Discontinuous Galerkin discretizations that preserve the divergence or curl
//! constraint of linear hyperbolic systems in a discrete, distributional sense.
//!
//! The building blocks are a periodic polygonal mesh, reference-element
//! quadrature, a discrete de Rham-like complex of finite element spaces, the
//! discrete adjoint operators acting on it, and an explicit SSP Runge-Kutta
//! driver for the wave, Maxwell and magnetic induction systems.

// NaN must fail positivity checks, and index loops mirror the formulas.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod app;
pub mod diagnostics;
pub mod error;
pub mod linalg;
pub mod mesh;
pub mod operators;
pub mod quadrature;
pub mod solver;
pub mod spaces;
pub mod systems;

pub use error::{Error, Result};
