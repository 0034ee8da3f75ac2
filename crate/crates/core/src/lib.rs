//! Space-time finite elements for the scalar wave equation
//! `u_tt - Δu = f` on the unit square with homogeneous Dirichlet data.
//!
//! Time is discretized slab by slab with continuous Galerkin-Petrov
//! (`cGP(k)`) or Galerkin-collocation (`cGP-C1(k)`, `cGP-C2(k)`) methods;
//! space uses continuous `Q_r` elements on uniform quadrilateral meshes.

pub mod diagnostics;
pub mod error;
pub mod lifting;
pub mod polytime;
pub mod spacefem;
pub mod slabsolver;
pub mod sparsela;
pub mod study;

pub use error::{Error, Result};
