//! Sparse matrices, a direct LU solver and the block-system container used
//! for the per-slab linear problems.

mod block;
mod csr;
mod lu;

pub use block::{solve_block, Block, BlockFactorization, BlockOrdering, BlockSystem};
pub use csr::SparseMatrix;
pub use lu::{relative_residual, reverse_cuthill_mckee, solve, LinearSolver, LuFactorization};
