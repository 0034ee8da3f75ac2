use super::csr::SparseMatrix;
use super::lu::{LinearSolver, LuFactorization};
use crate::error::{Error, Result};

/// One block of a [`BlockSystem`]: zero or `mass * M + stiffness * K`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Block {
    Zero,
    Combo { mass: f64, stiffness: f64 },
}

impl Block {
    pub fn mass(alpha: f64) -> Block {
        Block::Combo {
            mass: alpha,
            stiffness: 0.0,
        }
    }

    pub fn stiffness(beta: f64) -> Block {
        Block::Combo {
            mass: 0.0,
            stiffness: beta,
        }
    }

    fn coefficients(self) -> (f64, f64) {
        match self {
            Block::Zero => (0.0, 0.0),
            Block::Combo { mass, stiffness } => (mass, stiffness),
        }
    }
}

/// How global unknowns are numbered when blocks are expanded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockOrdering {
    /// `block * n + dof`
    BlockMajor,
    /// `dof * n_blocks + block`
    Interleaved,
}

impl BlockOrdering {
    #[inline]
    fn index(self, block: usize, dof: usize, n_blocks: usize, n: usize) -> usize {
        match self {
            BlockOrdering::BlockMajor => block * n + dof,
            BlockOrdering::Interleaved => dof * n_blocks + block,
        }
    }
}

/// Square grid of blocks, each a scalar combination of one shared mass
/// matrix `M` and one shared stiffness matrix `K`.
#[derive(Debug, Clone)]
pub struct BlockSystem<'a> {
    mass: &'a SparseMatrix,
    stiffness: &'a SparseMatrix,
    n_blocks: usize,
    blocks: Vec<Block>,
    ordering: BlockOrdering,
}

impl<'a> BlockSystem<'a> {
    pub fn new(mass: &'a SparseMatrix, stiffness: &'a SparseMatrix, n_blocks: usize) -> Result<Self> {
        if !mass.is_square() || mass.nrows() != stiffness.nrows() || !stiffness.is_square() {
            return Err(Error::DimensionMismatch {
                expected: mass.nrows(),
                got: stiffness.nrows(),
            });
        }
        Ok(BlockSystem {
            mass,
            stiffness,
            n_blocks,
            blocks: vec![Block::Zero; n_blocks * n_blocks],
            ordering: BlockOrdering::Interleaved,
        })
    }

    pub fn with_ordering(mut self, ordering: BlockOrdering) -> Self {
        self.ordering = ordering;
        self
    }

    pub fn ordering(&self) -> BlockOrdering {
        self.ordering
    }

    pub fn n_blocks(&self) -> usize {
        self.n_blocks
    }

    pub fn block_dim(&self) -> usize {
        self.mass.nrows()
    }

    pub fn dim(&self) -> usize {
        self.n_blocks * self.block_dim()
    }

    pub fn block(&self, row: usize, col: usize) -> Block {
        self.blocks[row * self.n_blocks + col]
    }

    pub fn set(&mut self, row: usize, col: usize, block: Block) {
        self.blocks[row * self.n_blocks + col] = block;
    }

    /// Adds `mass * M + stiffness * K` to block `(row, col)`.
    pub fn add(&mut self, row: usize, col: usize, mass: f64, stiffness: f64) {
        let (m0, k0) = self.block(row, col).coefficients();
        let (m, k) = (m0 + mass, k0 + stiffness);
        let b = if m == 0.0 && k == 0.0 {
            Block::Zero
        } else {
            Block::Combo { mass: m, stiffness: k }
        };
        self.set(row, col, b);
    }

    /// Expands the block grid into one sparse matrix in [`Self::ordering`].
    pub fn assemble(&self) -> SparseMatrix {
        let n = self.block_dim();
        let nb = self.n_blocks;
        let mut triplets = Vec::new();
        for br in 0..nb {
            for bc in 0..nb {
                let (alpha, beta) = self.block(br, bc).coefficients();
                for (mat, s) in [(self.mass, alpha), (self.stiffness, beta)] {
                    if s == 0.0 {
                        continue;
                    }
                    for i in 0..n {
                        let gi = self.ordering.index(br, i, nb, n);
                        for (j, v) in mat.row(i) {
                            triplets.push((gi, self.ordering.index(bc, j, nb, n), s * v));
                        }
                    }
                }
            }
        }
        SparseMatrix::from_triplets(nb * n, nb * n, &triplets).expect("indices in range")
    }

    /// Block matrix-vector product without expansion.
    pub fn apply(&self, x: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        self.check_blocks(x)?;
        let n = self.block_dim();
        let mut y = vec![vec![0.0; n]; self.n_blocks];
        for (br, yr) in y.iter_mut().enumerate() {
            for (bc, xc) in x.iter().enumerate() {
                let (alpha, beta) = self.block(br, bc).coefficients();
                if alpha != 0.0 {
                    for (o, v) in yr.iter_mut().zip(self.mass.matvec(xc)) {
                        *o += alpha * v;
                    }
                }
                if beta != 0.0 {
                    for (o, v) in yr.iter_mut().zip(self.stiffness.matvec(xc)) {
                        *o += beta * v;
                    }
                }
            }
        }
        Ok(y)
    }

    fn check_blocks(&self, v: &[Vec<f64>]) -> Result<()> {
        if v.len() != self.n_blocks {
            return Err(Error::DimensionMismatch {
                expected: self.n_blocks,
                got: v.len(),
            });
        }
        let n = self.block_dim();
        if let Some(bad) = v.iter().find(|b| b.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: bad.len(),
            });
        }
        Ok(())
    }

    pub fn factorize(&self) -> Result<BlockFactorization> {
        Ok(BlockFactorization {
            lu: LuFactorization::new(&self.assemble())?,
            n_blocks: self.n_blocks,
            block_dim: self.block_dim(),
            ordering: self.ordering,
        })
    }
}

/// Factorized block system, reusable for many right-hand sides.
#[derive(Debug, Clone)]
pub struct BlockFactorization {
    lu: LuFactorization,
    n_blocks: usize,
    block_dim: usize,
    ordering: BlockOrdering,
}

impl BlockFactorization {
    pub fn solve(&self, rhs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        let (nb, n) = (self.n_blocks, self.block_dim);
        if rhs.len() != nb {
            return Err(Error::DimensionMismatch {
                expected: nb,
                got: rhs.len(),
            });
        }
        let mut flat = vec![0.0; nb * n];
        for (b, block) in rhs.iter().enumerate() {
            if block.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: block.len(),
                });
            }
            for (i, v) in block.iter().enumerate() {
                flat[self.ordering.index(b, i, nb, n)] = *v;
            }
        }
        let x = self.lu.solve(&flat)?;
        Ok((0..nb)
            .map(|b| (0..n).map(|i| x[self.ordering.index(b, i, nb, n)]).collect())
            .collect())
    }
}

/// Expands, factorizes and solves `system * x = rhs`.
pub fn solve_block(system: &BlockSystem<'_>, rhs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    system.check_blocks(rhs)?;
    system.factorize()?.solve(rhs)
}
