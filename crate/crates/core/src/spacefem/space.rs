use super::mesh::{Mesh, MeshFamily};
use crate::error::{Error, Result};
use crate::polytime::{cardinal_basis, gauss_points, lobatto_points, NodalFunctional, PolyCoeffs, QuadRule};

/// Marker for lattice points on the boundary, which carry no unknown.
pub const NO_DOF: usize = usize::MAX;

/// Largest supported polynomial degree in space.
pub const MAX_DEGREE: usize = 6;

/// One-dimensional Lagrange basis on the Gauss-Lobatto points of `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct LagrangeBasis1d {
    nodes: Vec<f64>,
    basis: Vec<PolyCoeffs>,
    derivs: Vec<PolyCoeffs>,
}

impl LagrangeBasis1d {
    pub fn new(degree: usize) -> Self {
        let nodes = lobatto_points(degree + 1);
        let functionals: Vec<_> = nodes.iter().map(|&t| NodalFunctional::Value(t)).collect();
        let basis = cardinal_basis(&functionals).expect("distinct Lobatto points");
        let derivs = basis.iter().map(PolyCoeffs::derivative).collect();
        LagrangeBasis1d { nodes, basis, derivs }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, a: usize, xi: f64) -> f64 {
        self.basis[a].eval(xi)
    }

    pub fn derivative(&self, a: usize, xi: f64) -> f64 {
        self.derivs[a].eval(xi)
    }
}

/// Tensor-product basis values and reference gradients at the points of a
/// tensor Gauss rule on `[-1, 1]^2`.
#[derive(Debug, Clone)]
pub struct Tabulation {
    /// Reference coordinates of the quadrature points.
    pub points: Vec<(f64, f64)>,
    /// Tensor weights (sum 4).
    pub weights: Vec<f64>,
    /// `values[q * n_local + l]`
    pub values: Vec<f64>,
    pub d_xi: Vec<f64>,
    pub d_eta: Vec<f64>,
    pub n_local: usize,
}

impl Tabulation {
    pub fn new(basis: &LagrangeBasis1d, gauss_npts: usize) -> Self {
        let rule = QuadRule::gauss(gauss_npts);
        debug_assert_eq!(rule.nodes, gauss_points(gauss_npts));
        let p = basis.len();
        let n_local = p * p;
        let nq = gauss_npts * gauss_npts;
        let mut t = Tabulation {
            points: Vec::with_capacity(nq),
            weights: Vec::with_capacity(nq),
            values: Vec::with_capacity(nq * n_local),
            d_xi: Vec::with_capacity(nq * n_local),
            d_eta: Vec::with_capacity(nq * n_local),
            n_local,
        };
        for (j, &eta) in rule.nodes.iter().enumerate() {
            for (i, &xi) in rule.nodes.iter().enumerate() {
                t.points.push((xi, eta));
                t.weights.push(rule.value_weights[i] * rule.value_weights[j]);
                for b in 0..p {
                    for a in 0..p {
                        let (va, vb) = (basis.value(a, xi), basis.value(b, eta));
                        t.values.push(va * vb);
                        t.d_xi.push(basis.derivative(a, xi) * vb);
                        t.d_eta.push(va * basis.derivative(b, eta));
                    }
                }
            }
        }
        t
    }

    pub fn n_points(&self) -> usize {
        self.weights.len()
    }
}

/// Continuous `Q_r` space on a uniform mesh with homogeneous Dirichlet
/// conditions. Unknowns sit at interior points of the tensor Gauss-Lobatto
/// lattice; local index `l = a + (r+1) b` with `a` along `x`.
#[derive(Debug, Clone)]
pub struct FeSpace {
    mesh: Mesh,
    degree: usize,
    basis: LagrangeBasis1d,
    /// Per cell, `(r+1)^2` interior-DOF indices or [`NO_DOF`].
    cell_dofs: Vec<usize>,
    /// Per cell, `(r+1)^2` full-lattice indices.
    cell_lattice: Vec<usize>,
    /// Full-lattice index of each interior DOF.
    interior: Vec<usize>,
    n_dof: usize,
}

impl FeSpace {
    pub fn new(mesh: Mesh, degree: usize) -> Result<Self> {
        if degree == 0 || degree > MAX_DEGREE {
            return Err(Error::InvalidArgument(format!(
                "spatial degree must be in 1..={MAX_DEGREE}, got {degree}"
            )));
        }
        let n = mesh.cells_per_side();
        let np = n * degree + 1;
        let interior_side = np - 2;
        let p = degree + 1;
        let mut cell_dofs = Vec::with_capacity(mesh.n_cells() * p * p);
        let mut cell_lattice = Vec::with_capacity(mesh.n_cells() * p * p);
        for cy in 0..n {
            for cx in 0..n {
                for b in 0..p {
                    for a in 0..p {
                        let (gi, gj) = (cx * degree + a, cy * degree + b);
                        cell_lattice.push(gi + np * gj);
                        let on_boundary = gi == 0 || gj == 0 || gi == np - 1 || gj == np - 1;
                        cell_dofs.push(if on_boundary {
                            NO_DOF
                        } else {
                            (gi - 1) + interior_side * (gj - 1)
                        });
                    }
                }
            }
        }
        let mut interior = Vec::with_capacity(interior_side * interior_side);
        for gj in 1..np - 1 {
            for gi in 1..np - 1 {
                interior.push(gi + np * gj);
            }
        }
        Ok(FeSpace {
            mesh,
            degree,
            basis: LagrangeBasis1d::new(degree),
            cell_dofs,
            cell_lattice,
            n_dof: interior.len(),
            interior,
        })
    }

    /// Space on level `level` of `family`.
    pub fn build(family: MeshFamily, level: usize, degree: usize) -> Result<Self> {
        FeSpace::new(family.mesh(level)?, degree)
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn n_dof(&self) -> usize {
        self.n_dof
    }

    pub fn n_local(&self) -> usize {
        (self.degree + 1) * (self.degree + 1)
    }

    /// Number of lattice points including the boundary.
    pub fn n_lattice(&self) -> usize {
        let np = self.lattice_side();
        np * np
    }

    fn lattice_side(&self) -> usize {
        self.mesh.cells_per_side() * self.degree + 1
    }

    pub fn basis_1d(&self) -> &LagrangeBasis1d {
        &self.basis
    }

    /// Interior DOF indices of cell `c` (row-major cell numbering).
    pub fn cell_dofs(&self, c: usize) -> &[usize] {
        let nl = self.n_local();
        &self.cell_dofs[c * nl..(c + 1) * nl]
    }

    /// Full-lattice indices of cell `c`.
    pub fn cell_lattice(&self, c: usize) -> &[usize] {
        let nl = self.n_local();
        &self.cell_lattice[c * nl..(c + 1) * nl]
    }

    /// Full-lattice index of each interior DOF.
    pub fn interior_lattice(&self) -> &[usize] {
        &self.interior
    }

    /// Cell origin of cell `c`.
    pub fn cell_origin(&self, c: usize) -> (f64, f64) {
        let n = self.mesh.cells_per_side();
        self.mesh.cell_origin(c % n, c / n)
    }

    /// Physical point of reference coordinates `(xi, eta)` in cell `c`.
    pub fn map_point(&self, c: usize, xi: f64, eta: f64) -> (f64, f64) {
        let (x0, y0) = self.cell_origin(c);
        let s = 0.5 * self.mesh.cell_size();
        (x0 + (xi + 1.0) * s, y0 + (eta + 1.0) * s)
    }

    /// Coordinates of every lattice point, by full-lattice index.
    pub fn lattice_points(&self) -> Vec<(f64, f64)> {
        let np = self.lattice_side();
        let mut pts = vec![(0.0, 0.0); np * np];
        for c in 0..self.mesh.n_cells() {
            let p = self.degree + 1;
            for b in 0..p {
                for a in 0..p {
                    let l = a + p * b;
                    let (xi, eta) = (self.basis.nodes()[a], self.basis.nodes()[b]);
                    pts[self.cell_lattice(c)[l]] = self.map_point(c, xi, eta);
                }
            }
        }
        pts
    }

    /// Coordinates of the interior DOFs.
    pub fn dof_points(&self) -> Vec<(f64, f64)> {
        let pts = self.lattice_points();
        self.interior.iter().map(|&g| pts[g]).collect()
    }

    /// Nodal interpolant at the DOF lattice.
    pub fn interpolate(&self, g: &dyn Fn(f64, f64) -> f64) -> Vec<f64> {
        self.dof_points().iter().map(|&(x, y)| g(x, y)).collect()
    }

    pub fn tabulate(&self, gauss_npts: usize) -> Tabulation {
        Tabulation::new(&self.basis, gauss_npts)
    }
}
