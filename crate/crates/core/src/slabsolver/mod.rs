//! Slab-by-slab time marching for the first-order system
//! `∂_t u⁰ = u¹`, `∂_t u¹ + A_h u⁰ = f` with the `cGP`, `cGP-C1` and
//! `cGP-C2` families, plus structural checks of the discrete solution.

pub mod checks;
mod march;
mod problem;
mod scheme;
mod system;

pub use march::{
    initial_state, initial_state_with, left_data, march, march_checked, run, run_with, slab_count, InitialData, DiscreteSolution, SlabBasis, SlabSolution, SlabStepper,
    StatePair,
};
pub use problem::{check_manufactured, ExactSolution, ManufacturedProblem, ProblemKind, WaveProblem};
pub use scheme::{RowKind, Scheme, TimeBasis};
pub use system::{FemForcing, FnForcing, Forcing, MatrixOperators, SpatialOperators, ZeroForcing};
