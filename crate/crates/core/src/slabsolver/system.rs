use super::problem::WaveProblem;
use crate::error::Result;
use crate::spacefem::Operators;
use crate::sparsela::{LinearSolver, LuFactorization, SparseMatrix};

/// The semi-discrete operators `M`, `K` of `M u'' + K u = F(t)`.
pub trait SpatialOperators: Sync {
    fn n_dof(&self) -> usize;
    fn mass(&self) -> &SparseMatrix;
    fn stiffness(&self) -> &SparseMatrix;
    fn mass_solve(&self, b: &[f64]) -> Result<Vec<f64>>;
}

impl SpatialOperators for Operators {
    fn n_dof(&self) -> usize {
        Operators::n_dof(self)
    }

    fn mass(&self) -> &SparseMatrix {
        Operators::mass(self)
    }

    fn stiffness(&self) -> &SparseMatrix {
        Operators::stiffness(self)
    }

    fn mass_solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        Operators::mass_solve(self, b)
    }
}

/// Explicitly given `M` and `K`, e.g. a single oscillator `u'' + u = 0`.
#[derive(Debug, Clone)]
pub struct MatrixOperators {
    mass: SparseMatrix,
    stiffness: SparseMatrix,
    mass_lu: LuFactorization,
}

impl MatrixOperators {
    pub fn new(mass: SparseMatrix, stiffness: SparseMatrix) -> Result<Self> {
        let mass_lu = LuFactorization::new(&mass)?;
        Ok(MatrixOperators {
            mass,
            stiffness,
            mass_lu,
        })
    }

    /// `M = [1]`, `K = [omega^2]`.
    pub fn oscillator(omega: f64) -> Self {
        MatrixOperators::new(SparseMatrix::identity(1), SparseMatrix::from_dense(&[vec![omega * omega]]))
            .expect("unit mass is regular")
    }
}

impl SpatialOperators for MatrixOperators {
    fn n_dof(&self) -> usize {
        self.mass.nrows()
    }

    fn mass(&self) -> &SparseMatrix {
        &self.mass
    }

    fn stiffness(&self) -> &SparseMatrix {
        &self.stiffness
    }

    fn mass_solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        self.mass_lu.solve(b)
    }
}

/// The load vector `F(t)` and its time derivative.
pub trait Forcing: Sync {
    /// `d^order F / dt^order` at `t`, for `order` 0 or 1.
    fn load(&self, t: f64, order: usize) -> Vec<f64>;

    fn is_zero(&self) -> bool {
        false
    }
}

/// `F ≡ 0`.
#[derive(Debug, Clone, Copy)]
pub struct ZeroForcing {
    pub n_dof: usize,
}

impl Forcing for ZeroForcing {
    fn load(&self, _: f64, _: usize) -> Vec<f64> {
        vec![0.0; self.n_dof]
    }

    fn is_zero(&self) -> bool {
        true
    }
}

/// Load vector given by a closure `(t, order) -> F^{(order)}(t)`.
pub struct FnForcing<F>(pub F);

impl<F> Forcing for FnForcing<F>
where
    F: Fn(f64, usize) -> Vec<f64> + Sync,
{
    fn load(&self, t: f64, order: usize) -> Vec<f64> {
        (self.0)(t, order)
    }
}

/// `F_i(t) = ∫ f(t) φ_i` for a [`WaveProblem`] on a finite element space.
pub struct FemForcing<'a> {
    ops: &'a Operators,
    problem: &'a dyn WaveProblem,
}

impl<'a> FemForcing<'a> {
    pub fn new(ops: &'a Operators, problem: &'a dyn WaveProblem) -> Self {
        FemForcing { ops, problem }
    }
}

impl Forcing for FemForcing<'_> {
    fn load(&self, t: f64, order: usize) -> Vec<f64> {
        if self.problem.source_free() {
            return vec![0.0; self.ops.n_dof()];
        }
        let p = self.problem;
        match order {
            0 => self.ops.load_vector(&|x, y| p.f(t, x, y)),
            1 => self.ops.load_vector(&|x, y| p.dt_f(t, x, y)),
            _ => panic!("load derivatives above first order are not available"),
        }
    }

    fn is_zero(&self) -> bool {
        self.problem.source_free()
    }
}
