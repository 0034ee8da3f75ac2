use rayon::prelude::*;

use super::space::{FeSpace, Tabulation, NO_DOF};
use crate::error::{Error, Result};
use crate::sparsela::{LinearSolver, LuFactorization, SparseMatrix};

/// Scalar field on the unit square.
pub type Field<'a> = &'a (dyn Fn(f64, f64) -> f64 + Sync);
/// Gradient field on the unit square.
pub type GradField<'a> = &'a (dyn Fn(f64, f64) -> (f64, f64) + Sync);

/// Local mass and stiffness matrices of one cell, row-major `n_local x n_local`.
/// All cells are congruent squares, so these are computed once.
#[derive(Debug, Clone)]
pub struct ElementMatrices {
    pub n_local: usize,
    pub mass: Vec<f64>,
    pub stiffness: Vec<f64>,
}

impl ElementMatrices {
    pub fn new(space: &FeSpace) -> Self {
        let tab = space.tabulate(space.degree() + 1);
        let nl = tab.n_local;
        let half = 0.5 * space.mesh().cell_size();
        let jac = half * half;
        let mut mass = vec![0.0; nl * nl];
        let mut stiffness = vec![0.0; nl * nl];
        for q in 0..tab.n_points() {
            let w = tab.weights[q];
            let v = &tab.values[q * nl..(q + 1) * nl];
            let dx = &tab.d_xi[q * nl..(q + 1) * nl];
            let dy = &tab.d_eta[q * nl..(q + 1) * nl];
            for i in 0..nl {
                for j in 0..nl {
                    mass[i * nl + j] += w * jac * v[i] * v[j];
                    // Gradient scaling 1/half cancels the Jacobian in 2D.
                    stiffness[i * nl + j] += w * (dx[i] * dx[j] + dy[i] * dy[j]);
                }
            }
        }
        ElementMatrices { n_local: nl, mass, stiffness }
    }
}

/// Global mass and stiffness matrices on the Dirichlet-free unknowns, with
/// their factorizations and the quadrature tables used for loads and errors.
pub struct Operators {
    space: FeSpace,
    mass: SparseMatrix,
    stiffness: SparseMatrix,
    mass_lu: LuFactorization,
    stiffness_lu: LuFactorization,
    load_tab: Tabulation,
    error_tab: Tabulation,
    error_points: usize,
}

impl std::fmt::Debug for Operators {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Operators")
            .field("n_dof", &self.space.n_dof())
            .field("mass_nnz", &self.mass.nnz())
            .field("stiffness_nnz", &self.stiffness.nnz())
            .finish()
    }
}

impl Operators {
    pub fn new(space: FeSpace) -> Result<Self> {
        let el = ElementMatrices::new(&space);
        let (mass, stiffness) = assemble_interior(&space, &el)?;
        let mass_lu = LuFactorization::new(&mass)?;
        let stiffness_lu = LuFactorization::new(&stiffness)?;
        let r = space.degree();
        Ok(Operators {
            load_tab: space.tabulate(r + 2),
            error_tab: space.tabulate(r + 3),
            error_points: r + 3,
            space,
            mass,
            stiffness,
            mass_lu,
            stiffness_lu,
        })
    }

    /// Replaces the per-cell Gauss rule used by [`Operators::error_norms`]
    /// (default `r + 3` points per direction).
    pub fn with_error_points(mut self, points: usize) -> Result<Self> {
        if !(1..=16).contains(&points) {
            return Err(Error::InvalidArgument(format!("error quadrature needs 1..=16 points, got {points}")));
        }
        self.error_tab = self.space.tabulate(points);
        self.error_points = points;
        Ok(self)
    }

    /// Gauss points per direction of the error quadrature.
    pub fn error_points(&self) -> usize {
        self.error_points
    }

    pub fn space(&self) -> &FeSpace {
        &self.space
    }

    pub fn n_dof(&self) -> usize {
        self.space.n_dof()
    }

    pub fn mass(&self) -> &SparseMatrix {
        &self.mass
    }

    pub fn stiffness(&self) -> &SparseMatrix {
        &self.stiffness
    }

    /// `M^{-1} b`.
    pub fn mass_solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        self.mass_lu.solve(b)
    }

    /// `K^{-1} b`.
    pub fn stiffness_solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        self.stiffness_lu.solve(b)
    }

    /// `F_i = ∫ g φ_i`, integrated with the `(r+2)`-point tensor Gauss rule.
    pub fn load_vector(&self, g: Field<'_>) -> Vec<f64> {
        let tab = &self.load_tab;
        let space = &self.space;
        let half = 0.5 * space.mesh().cell_size();
        let jac = half * half;
        self.scatter(|c, local| {
            for q in 0..tab.n_points() {
                let (xi, eta) = tab.points[q];
                let (x, y) = space.map_point(c, xi, eta);
                let gw = g(x, y) * tab.weights[q] * jac;
                let v = &tab.values[q * tab.n_local..(q + 1) * tab.n_local];
                for (l, vl) in local.iter_mut().zip(v) {
                    *l += gw * vl;
                }
            }
        })
    }

    /// `b_i = ∫ ∇g · ∇φ_i`.
    pub fn gradient_load(&self, grad: GradField<'_>) -> Vec<f64> {
        let tab = &self.load_tab;
        let space = &self.space;
        let half = 0.5 * space.mesh().cell_size();
        self.scatter(|c, local| {
            for q in 0..tab.n_points() {
                let (xi, eta) = tab.points[q];
                let (x, y) = space.map_point(c, xi, eta);
                let (gx, gy) = grad(x, y);
                // Physical gradient of φ is reference gradient / half; area factor half^2.
                let w = tab.weights[q] * half;
                let nl = tab.n_local;
                let dx = &tab.d_xi[q * nl..(q + 1) * nl];
                let dy = &tab.d_eta[q * nl..(q + 1) * nl];
                for l in 0..nl {
                    local[l] += w * (gx * dx[l] + gy * dy[l]);
                }
            }
        })
    }

    /// L² projection `P_h g`.
    pub fn l2_projection(&self, g: Field<'_>) -> Result<Vec<f64>> {
        self.mass_solve(&self.load_vector(g))
    }

    /// Elliptic projection `R_h g` of a field vanishing on the boundary.
    pub fn elliptic_projection(&self, grad: GradField<'_>) -> Result<Vec<f64>> {
        self.stiffness_solve(&self.gradient_load(grad))
    }

    /// `‖x‖_M`, the L² norm of the finite element function with coefficients `x`.
    pub fn mass_norm(&self, x: &[f64]) -> f64 {
        self.mass.bilinear(x, x).max(0.0).sqrt()
    }

    /// `(‖g - x_h‖_{L²}, ‖∇(g - x_h)‖_{L²})`, with the `(r+3)`-point rule.
    /// Either exact field may be omitted, in which case that norm is zero.
    pub fn error_norms(&self, x: &[f64], g: Option<Field<'_>>, grad: Option<GradField<'_>>) -> Result<(f64, f64)> {
        if x.len() != self.n_dof() {
            return Err(Error::DimensionMismatch {
                expected: self.n_dof(),
                got: x.len(),
            });
        }
        let tab = &self.error_tab;
        let space = &self.space;
        let half = 0.5 * space.mesh().cell_size();
        let jac = half * half;
        let nl = tab.n_local;
        let (l2, h1) = (0..space.mesh().n_cells())
            .into_par_iter()
            .map(|c| {
                let dofs = space.cell_dofs(c);
                let coef: Vec<f64> = dofs.iter().map(|&d| if d == NO_DOF { 0.0 } else { x[d] }).collect();
                let (mut l2, mut h1) = (0.0, 0.0);
                for q in 0..tab.n_points() {
                    let (xi, eta) = tab.points[q];
                    let (px, py) = space.map_point(c, xi, eta);
                    let w = tab.weights[q] * jac;
                    if let Some(g) = g {
                        let v = &tab.values[q * nl..(q + 1) * nl];
                        let uh: f64 = coef.iter().zip(v).map(|(a, b)| a * b).sum();
                        let e = g(px, py) - uh;
                        l2 += w * e * e;
                    }
                    if let Some(grad) = grad {
                        let dx = &tab.d_xi[q * nl..(q + 1) * nl];
                        let dy = &tab.d_eta[q * nl..(q + 1) * nl];
                        let gx_h: f64 = coef.iter().zip(dx).map(|(a, b)| a * b).sum::<f64>() / half;
                        let gy_h: f64 = coef.iter().zip(dy).map(|(a, b)| a * b).sum::<f64>() / half;
                        let (gx, gy) = grad(px, py);
                        h1 += w * ((gx - gx_h).powi(2) + (gy - gy_h).powi(2));
                    }
                }
                (l2, h1)
            })
            .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
        Ok((l2.sqrt(), h1.sqrt()))
    }

    fn scatter<F>(&self, local_fn: F) -> Vec<f64>
    where
        F: Fn(usize, &mut [f64]) + Sync,
    {
        let nl = self.space.n_local();
        let locals: Vec<Vec<f64>> = (0..self.space.mesh().n_cells())
            .into_par_iter()
            .map(|c| {
                let mut local = vec![0.0; nl];
                local_fn(c, &mut local);
                local
            })
            .collect();
        let mut out = vec![0.0; self.n_dof()];
        for (c, local) in locals.iter().enumerate() {
            for (&d, &v) in self.space.cell_dofs(c).iter().zip(local) {
                if d != NO_DOF {
                    out[d] += v;
                }
            }
        }
        out
    }
}

fn assemble_interior(space: &FeSpace, el: &ElementMatrices) -> Result<(SparseMatrix, SparseMatrix)> {
    let nl = el.n_local;
    let mut tm = Vec::with_capacity(space.mesh().n_cells() * nl * nl);
    let mut tk = Vec::with_capacity(tm.capacity());
    for c in 0..space.mesh().n_cells() {
        let dofs = space.cell_dofs(c);
        for i in 0..nl {
            if dofs[i] == NO_DOF {
                continue;
            }
            for j in 0..nl {
                if dofs[j] == NO_DOF {
                    continue;
                }
                tm.push((dofs[i], dofs[j], el.mass[i * nl + j]));
                tk.push((dofs[i], dofs[j], el.stiffness[i * nl + j]));
            }
        }
    }
    let n = space.n_dof();
    Ok((SparseMatrix::from_triplets(n, n, &tm)?, SparseMatrix::from_triplets(n, n, &tk)?))
}

/// Mass and stiffness matrices on the full lattice, boundary points included.
pub fn assemble_full(space: &FeSpace) -> Result<(SparseMatrix, SparseMatrix)> {
    let el = ElementMatrices::new(space);
    let nl = el.n_local;
    let mut tm = Vec::new();
    let mut tk = Vec::new();
    for c in 0..space.mesh().n_cells() {
        let g = space.cell_lattice(c);
        for i in 0..nl {
            for j in 0..nl {
                tm.push((g[i], g[j], el.mass[i * nl + j]));
                tk.push((g[i], g[j], el.stiffness[i * nl + j]));
            }
        }
    }
    let n = space.n_lattice();
    Ok((SparseMatrix::from_triplets(n, n, &tm)?, SparseMatrix::from_triplets(n, n, &tk)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spacefem::MeshFamily;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn ops(family: MeshFamily, level: usize, r: usize) -> Operators {
        Operators::new(FeSpace::build(family, level, r).unwrap()).unwrap()
    }

    #[test]
    fn full_matrices_partition_unity() {
        for r in 1..=4 {
            let s = FeSpace::build(MeshFamily::Doubling, 0, r).unwrap();
            let (m, k) = assemble_full(&s).unwrap();
            let ones = vec![1.0; m.nrows()];
            assert_abs_diff_eq!(m.bilinear(&ones, &ones), 1.0, epsilon = 1e-13);
            let k1 = k.matvec(&ones);
            assert!(k1.iter().all(|v| v.abs() < 1e-12));
        }
    }

    #[test]
    fn matrices_symmetric() {
        let o = ops(MeshFamily::Doubling, 1, 3);
        for (a, b) in [(o.mass(), o.mass().transpose()), (o.stiffness(), o.stiffness().transpose())] {
            for i in 0..a.nrows() {
                for (j, v) in a.row(i) {
                    assert_abs_diff_eq!(v, b.get(i, j), epsilon = 1e-14);
                }
            }
        }
    }

    #[test]
    fn smallest_eigenvalue() {
        // Inverse iteration on K x = λ M x.
        let o = ops(MeshFamily::Doubling, 2, 1);
        let mut x = vec![1.0; o.n_dof()];
        let mut lambda = 0.0;
        for _ in 0..200 {
            let y = o.stiffness_solve(&o.mass().matvec(&x)).unwrap();
            let n = o.mass_norm(&y);
            x = y.iter().map(|v| v / n).collect();
            lambda = o.stiffness().bilinear(&x, &x);
        }
        let exact = 2.0 * PI * PI;
        assert!((lambda - exact).abs() / exact < 0.03, "λ = {lambda}");
    }

    #[test]
    fn projection_reproduces_discrete_functions() {
        let o = ops(MeshFamily::Doubling, 0, 2);
        let sp = o.space().clone();
        // A piecewise-biquadratic function in the space: nodal interpolant of a bi-quadratic bubble.
        let g = |x: f64, y: f64| x * (1.0 - x) * y * (1.0 - y);
        let nodal = sp.interpolate(&g);
        let p = o.l2_projection(&g).unwrap();
        for (a, b) in nodal.iter().zip(&p) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-13);
        }
        let grad = |x: f64, y: f64| ((1.0 - 2.0 * x) * y * (1.0 - y), x * (1.0 - x) * (1.0 - 2.0 * y));
        let r = o.elliptic_projection(&grad).unwrap();
        for (a, b) in nodal.iter().zip(&r) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-13);
        }
    }

    #[test]
    fn error_of_zero_vector() {
        let o = ops(MeshFamily::Doubling, 1, 2);
        let g = |x: f64, y: f64| (2.0 * PI * x).sin() * (2.0 * PI * y).sin();
        let (l2, _) = o.error_norms(&vec![0.0; o.n_dof()], Some(&g), None).unwrap();
        assert_abs_diff_eq!(l2, 0.5, epsilon = 1e-10);
        assert!(o.error_norms(&[0.0], Some(&g), None).is_err());
    }

    #[test]
    fn mass_norm_matches_quadrature() {
        let o = ops(MeshFamily::Doubling, 1, 3);
        let g = |x: f64, y: f64| (PI * x).sin() * (PI * y).sin() * (1.0 + x);
        let x = o.l2_projection(&g).unwrap();
        let zero = |_: f64, _: f64| 0.0;
        let (l2, _) = o.error_norms(&x, Some(&zero), None).unwrap();
        assert_abs_diff_eq!(l2, o.mass_norm(&x), epsilon = 1e-12);
    }

    #[test]
    fn galerkin_orthogonality_and_l2_optimality() {
        let o = ops(MeshFamily::Doubling, 1, 2);
        let g = |x: f64, y: f64| (PI * x).sin() * (2.0 * PI * y).sin() * (1.0 + x * y);
        let grad = |x: f64, y: f64| {
            let (sx, cx) = (PI * x).sin_cos();
            let (sy, cy) = (2.0 * PI * y).sin_cos();
            (
                PI * cx * sy * (1.0 + x * y) + sx * sy * y,
                2.0 * PI * sx * cy * (1.0 + x * y) + sx * sy * x,
            )
        };
        let rh = o.elliptic_projection(&grad).unwrap();
        // a(R_h g - g, φ_i) = 0 for every basis function.
        let lhs = o.stiffness().matvec(&rh);
        let rhs = o.gradient_load(&grad);
        for (a, b) in lhs.iter().zip(&rhs) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
        let ph = o.l2_projection(&g).unwrap();
        let (ep, _) = o.error_norms(&ph, Some(&g), None).unwrap();
        let (ei, _) = o.error_norms(&o.space().interpolate(&g), Some(&g), None).unwrap();
        assert!(ep <= ei * (1.0 + 1e-12));
    }

    #[test]
    fn elliptic_projection_order() {
        let g = |x: f64, y: f64| (PI * x).sin() * (PI * y).sin();
        let grad = |x: f64, y: f64| (PI * (PI * x).cos() * (PI * y).sin(), PI * (PI * x).sin() * (PI * y).cos());
        for r in 1..=3 {
            let errs: Vec<f64> = (1..3)
                .map(|l| {
                    let o = ops(MeshFamily::Doubling, l, r);
                    let x = o.elliptic_projection(&grad).unwrap();
                    o.error_norms(&x, Some(&g), None).unwrap().0
                })
                .collect();
            let order = (errs[0] / errs[1]).log2();
            assert!((order - (r + 1) as f64).abs() < 0.3, "r = {r}, order {order}");
        }
    }
}
