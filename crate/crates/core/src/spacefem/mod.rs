//! Continuous `Q_r` finite elements on uniform meshes of the unit square:
//! mesh families, the nodal space, global mass and stiffness matrices,
//! projections and error norms.

mod assemble;
mod mesh;
mod space;

pub use assemble::{assemble_full, ElementMatrices, Field, GradField, Operators};
pub use mesh::{Mesh, MeshFamily};
pub use space::{FeSpace, LagrangeBasis1d, Tabulation, MAX_DEGREE, NO_DOF};
