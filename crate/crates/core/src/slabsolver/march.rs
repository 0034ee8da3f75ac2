use std::sync::Arc;

use super::problem::WaveProblem;
use super::scheme::{RowKind, Scheme, TimeBasis};
use super::system::{FemForcing, Forcing, SpatialOperators};
use crate::error::{Error, Result};
use crate::polytime::{PolyCoeffs, SlabMap};
use crate::spacefem::Operators;
use crate::sparsela::{BlockFactorization, BlockSystem};

/// Pair of DOF vectors `(u⁰, u¹)`.
pub type StatePair = (Vec<f64>, Vec<f64>);

/// Highest time derivative precomputed for evaluation.
const MAX_EVAL_ORDER: usize = 3;

/// Reference polynomials of a slab and their derivatives up to third order.
#[derive(Debug, Clone)]
pub struct SlabBasis {
    /// `derivs[m][a]` is the `m`-th derivative of basis function `a`.
    derivs: Vec<Vec<PolyCoeffs>>,
}

impl SlabBasis {
    pub fn new(basis: Vec<PolyCoeffs>) -> Self {
        let mut derivs = vec![basis];
        for m in 1..=MAX_EVAL_ORDER {
            let next = derivs[m - 1].iter().map(PolyCoeffs::derivative).collect();
            derivs.push(next);
        }
        SlabBasis { derivs }
    }

    pub fn len(&self) -> usize {
        self.derivs[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.derivs[0].is_empty()
    }

    pub fn polys(&self) -> &[PolyCoeffs] {
        &self.derivs[0]
    }

    /// `d^order B_a / ds^order (s)`.
    pub fn eval(&self, a: usize, s: f64, order: usize) -> f64 {
        if order <= MAX_EVAL_ORDER {
            self.derivs[order][a].eval(s)
        } else {
            self.derivs[0][a].nth_derivative(order).eval(s)
        }
    }

    /// Largest degree among the basis polynomials.
    pub fn degree(&self) -> usize {
        self.derivs[0].iter().map(|p| p.degree(1e-13).unwrap_or(0)).max().unwrap_or(0)
    }
}

/// Discrete solution on one slab: `U(t) = Σ_a c_a B_a(T_n^{-1} t)` per component.
#[derive(Debug, Clone)]
pub struct SlabSolution {
    slab: SlabMap,
    basis: Arc<SlabBasis>,
    /// `coeffs[component][a]`
    coeffs: [Vec<Vec<f64>>; 2],
}

impl SlabSolution {
    pub fn new(slab: SlabMap, basis: Arc<SlabBasis>, coeffs: [Vec<Vec<f64>>; 2]) -> Result<Self> {
        for c in &coeffs {
            if c.len() != basis.len() {
                return Err(Error::DimensionMismatch {
                    expected: basis.len(),
                    got: c.len(),
                });
            }
        }
        Ok(SlabSolution { slab, basis, coeffs })
    }

    pub fn slab(&self) -> &SlabMap {
        &self.slab
    }

    pub fn basis(&self) -> &Arc<SlabBasis> {
        &self.basis
    }

    pub fn coeffs(&self) -> &[Vec<Vec<f64>>; 2] {
        &self.coeffs
    }

    pub fn n_dof(&self) -> usize {
        self.coeffs[0].first().map_or(0, Vec::len)
    }

    /// Physical `order`-th time derivative at reference point `s`.
    pub fn eval_reference(&self, s: f64, order: usize) -> StatePair {
        let scale = (2.0 / self.slab.tau()).powi(order as i32);
        let n = self.n_dof();
        let mut out = (vec![0.0; n], vec![0.0; n]);
        for a in 0..self.basis.len() {
            let w = scale * self.basis.eval(a, s, order);
            if w == 0.0 {
                continue;
            }
            for (o, c) in out.0.iter_mut().zip(&self.coeffs[0][a]) {
                *o += w * c;
            }
            for (o, c) in out.1.iter_mut().zip(&self.coeffs[1][a]) {
                *o += w * c;
            }
        }
        out
    }

    /// Physical `order`-th time derivative at `t`, extended polynomially if
    /// `t` lies outside the slab.
    pub fn eval(&self, t: f64, order: usize) -> StatePair {
        self.eval_reference(self.slab.to_reference(t), order)
    }
}

/// Slab-wise solution on `(0, T]` with uniform step.
#[derive(Debug, Clone)]
pub struct DiscreteSolution {
    scheme: Scheme,
    degree: usize,
    tau: f64,
    slabs: Vec<SlabSolution>,
}

impl DiscreteSolution {
    pub fn new(scheme: Scheme, degree: usize, tau: f64, slabs: Vec<SlabSolution>) -> Result<Self> {
        if slabs.is_empty() {
            return Err(Error::InvalidArgument("solution needs at least one slab".into()));
        }
        for w in slabs.windows(2) {
            if (w[0].slab().t_right() - w[1].slab().t_left()).abs() > 1e-12 {
                return Err(Error::InvalidArgument("slabs must tile the time interval".into()));
            }
        }
        Ok(DiscreteSolution {
            scheme,
            degree,
            tau,
            slabs,
        })
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn slabs(&self) -> &[SlabSolution] {
        &self.slabs
    }

    pub fn n_slabs(&self) -> usize {
        self.slabs.len()
    }

    pub fn end_time(&self) -> f64 {
        self.slabs.last().unwrap().slab().t_right()
    }

    pub fn n_dof(&self) -> usize {
        self.slabs[0].n_dof()
    }

    /// Time points `t_0, ..., t_N`.
    pub fn time_mesh(&self) -> Vec<f64> {
        let mut t: Vec<f64> = self.slabs.iter().map(|s| s.slab().t_left()).collect();
        t.push(self.end_time());
        t
    }

    /// Index of the slab owning `t`: right-sided at interior interfaces,
    /// the last slab at `T`.
    pub fn slab_index(&self, t: f64) -> Result<usize> {
        let end = self.end_time();
        let start = self.slabs[0].slab().t_left();
        if !(t >= start - 1e-12 && t <= end + 1e-12) {
            return Err(Error::TimeOutOfRange { t, end });
        }
        let n = self.slabs.len();
        let mut i = (((t - start) / self.tau).floor().max(0.0) as usize).min(n - 1);
        while i + 1 < n && t >= self.slabs[i + 1].slab().t_left() {
            i += 1;
        }
        while i > 0 && t < self.slabs[i].slab().t_left() {
            i -= 1;
        }
        Ok(i)
    }

    /// `order`-th time derivative of `(u⁰, u¹)` at `t`.
    pub fn evaluate(&self, t: f64, order: usize) -> Result<StatePair> {
        let i = self.slab_index(t)?;
        Ok(self.slabs[i].eval(t, order))
    }

    /// Left limit at `t` (equal to [`Self::evaluate`] away from interfaces).
    pub fn evaluate_left(&self, t: f64, order: usize) -> Result<StatePair> {
        let mut i = self.slab_index(t)?;
        if i > 0 && t <= self.slabs[i].slab().t_left() {
            i -= 1;
        }
        Ok(self.slabs[i].eval(t, order))
    }
}

/// One linear functional of a row: `weight * d^order/dt^order (·)` at reference point `s`.
#[derive(Debug, Clone, Copy)]
struct Atom {
    s: f64,
    order: usize,
    weight: f64,
}

/// Per-scheme, per-step slab solver. The block matrix does not depend on the
/// slab for uniform steps, so it is factorized once.
pub struct SlabStepper<'a> {
    time: TimeBasis,
    basis: Arc<SlabBasis>,
    tau: f64,
    ops: &'a dyn SpatialOperators,
    rows: Vec<Vec<Atom>>,
    /// `alpha[row][a] = Λ_row(∂_t B_a)`
    alpha: Vec<Vec<f64>>,
    /// `beta[row][a] = Λ_row(B_a)`
    beta: Vec<Vec<f64>>,
    /// Distinct `(s, order)` pairs where loads are needed.
    load_points: Vec<(f64, usize)>,
    system: BlockSystem<'a>,
    factorization: BlockFactorization,
    /// Largest accepted relative residual of a slab solve.
    residual_tol: Option<f64>,
}

impl<'a> SlabStepper<'a> {
    pub fn new(scheme: Scheme, k: usize, tau: f64, ops: &'a dyn SpatialOperators) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::InvalidArgument(format!("time step must be positive, got {tau}")));
        }
        let time = TimeBasis::new(scheme, k)?;
        let basis = Arc::new(SlabBasis::new(time.basis().to_vec()));
        let half = 0.5 * tau;
        let rows: Vec<Vec<Atom>> = time.rows().iter().map(|r| row_atoms(r, time.rule(), half)).collect();

        let phys = |a: usize, s: f64, order: usize| basis.eval(a, s, order) / half.powi(order as i32);
        let lam = |atoms: &[Atom], a: usize, shift: usize| -> f64 {
            atoms.iter().map(|at| at.weight * phys(a, at.s, at.order + shift)).sum()
        };
        let alpha: Vec<Vec<f64>> = rows.iter().map(|r| (0..basis.len()).map(|a| lam(r, a, 1)).collect()).collect();
        let beta: Vec<Vec<f64>> = rows.iter().map(|r| (0..basis.len()).map(|a| lam(r, a, 0)).collect()).collect();

        let mut load_points: Vec<(f64, usize)> = Vec::new();
        for at in rows.iter().flatten() {
            if !load_points.iter().any(|&(s, o)| s == at.s && o == at.order) {
                load_points.push((at.s, at.order));
            }
        }

        let nf = time.free().len();
        let mut system = BlockSystem::new(ops.mass(), ops.stiffness(), 2 * nf)?;
        for rho in 0..nf {
            for (j, &a) in time.free().iter().enumerate() {
                // u⁰ row: M ∂_t U⁰ - M U¹
                system.add(rho, j, alpha[rho][a], 0.0);
                system.add(rho, nf + j, -beta[rho][a], 0.0);
                // u¹ row: M ∂_t U¹ + K U⁰
                system.add(nf + rho, j, 0.0, beta[rho][a]);
                system.add(nf + rho, nf + j, alpha[rho][a], 0.0);
            }
        }
        let factorization = system.factorize()?;
        Ok(SlabStepper {
            time,
            basis,
            tau,
            ops,
            rows,
            alpha,
            beta,
            load_points,
            system,
            factorization,
            residual_tol: None,
        })
    }

    /// Rejects slab solves whose relative residual exceeds `tol`.
    pub fn with_residual_tolerance(mut self, tol: Option<f64>) -> Result<Self> {
        if let Some(t) = tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::InvalidArgument(format!("solver tolerance must be positive, got {t}")));
            }
        }
        self.residual_tol = tol;
        Ok(self)
    }

    pub fn time_basis(&self) -> &TimeBasis {
        &self.time
    }

    pub fn slab_basis(&self) -> &Arc<SlabBasis> {
        &self.basis
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Solves one slab. `left[d]` holds the `d`-th time derivative of
    /// `(u⁰, u¹)` at `t_{n-1}`, for `d` up to the scheme's smoothness.
    pub fn advance(&self, slab: SlabMap, left: &[StatePair], forcing: &dyn Forcing) -> Result<SlabSolution> {
        let scheme = self.time.scheme();
        if left.len() <= scheme.smoothness() {
            return Err(Error::InvalidArgument(format!(
                "{scheme} needs left data up to derivative order {}",
                scheme.smoothness()
            )));
        }
        if (slab.tau() - self.tau).abs() > 1e-12 * self.tau {
            return Err(Error::InvalidArgument(format!(
                "slab length {} differs from the factorized step {}",
                slab.tau(),
                self.tau
            )));
        }
        let n = self.ops.n_dof();
        let half = 0.5 * self.tau;
        let nb = self.basis.len();
        let mut c0 = vec![vec![0.0; n]; nb];
        let mut c1 = vec![vec![0.0; n]; nb];
        for &(a, d) in self.time.fixed() {
            let scale = half.powi(d as i32);
            let (ref l0, ref l1) = left[d];
            if l0.len() != n || l1.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: l0.len().min(l1.len()),
                });
            }
            c0[a] = l0.iter().map(|v| scale * v).collect();
            c1[a] = l1.iter().map(|v| scale * v).collect();
        }

        let loads: Vec<Vec<f64>> = if forcing.is_zero() {
            Vec::new()
        } else {
            self.load_points
                .iter()
                .map(|&(s, o)| forcing.load(slab.to_time(s), o))
                .collect()
        };

        let nf = self.time.free().len();
        let mut rhs = vec![vec![0.0; n]; 2 * nf];
        let mass = self.ops.mass();
        let stiffness = self.ops.stiffness();
        for (rho, atoms) in self.rows.iter().enumerate() {
            let mut m0 = vec![0.0; n];
            let mut m1 = vec![0.0; n];
            let mut k1 = vec![0.0; n];
            for &(a, _) in self.time.fixed() {
                let (al, be) = (self.alpha[rho][a], self.beta[rho][a]);
                for i in 0..n {
                    m0[i] += -al * c0[a][i] + be * c1[a][i];
                    m1[i] -= al * c1[a][i];
                    k1[i] -= be * c0[a][i];
                }
            }
            rhs[rho] = mass.matvec(&m0);
            let mm = mass.matvec(&m1);
            let kk = stiffness.matvec(&k1);
            let mut r1: Vec<f64> = mm.iter().zip(&kk).map(|(a, b)| a + b).collect();
            if !loads.is_empty() {
                for at in atoms {
                    let p = self
                        .load_points
                        .iter()
                        .position(|&(s, o)| s == at.s && o == at.order)
                        .expect("load point registered");
                    for (r, l) in r1.iter_mut().zip(&loads[p]) {
                        *r += at.weight * l;
                    }
                }
            }
            rhs[nf + rho] = r1;
        }

        let x = self.factorization.solve(&rhs)?;
        if let Some(tol) = self.residual_tol {
            let ax = self.system.apply(&x)?;
            let norm = |v: &[Vec<f64>]| v.iter().flatten().map(|a| a * a).sum::<f64>().sqrt();
            let diff: f64 = ax.iter().flatten().zip(rhs.iter().flatten()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            let scale = norm(&rhs);
            let residual = if scale > 0.0 { diff / scale } else { diff };
            if !(residual <= tol) {
                return Err(Error::ResidualTooLarge { residual, tol });
            }
        }
        for (j, &a) in self.time.free().iter().enumerate() {
            c0[a] = x[j].clone();
            c1[a] = x[nf + j].clone();
        }
        SlabSolution::new(slab, Arc::clone(&self.basis), [c0, c1])
    }
}

/// Row functional as weighted point derivatives. Variational rows carry the
/// rule scaled by `1/(τ/2)`; `order`-th collocation rows carry `(τ/2)^order`.
fn row_atoms(row: &RowKind, rule: &crate::polytime::QuadRule, half: f64) -> Vec<Atom> {
    match row {
        RowKind::Collocation { order } => vec![Atom {
            s: 1.0,
            order: *order,
            weight: half.powi(*order as i32),
        }],
        RowKind::Variational { test } => {
            let mut atoms: Vec<Atom> = rule
                .nodes
                .iter()
                .zip(&rule.value_weights)
                .map(|(&s, &w)| Atom {
                    s,
                    order: 0,
                    weight: w * test.eval(s),
                })
                .collect();
            if rule.kind.uses_derivatives() {
                let dtest = test.derivative();
                for (s, w) in [(-1.0, rule.deriv_weight_left), (1.0, rule.deriv_weight_right)] {
                    // d/ds (ψ r) = ψ' r + ψ (τ/2) ∂_t r
                    atoms.push(Atom {
                        s,
                        order: 0,
                        weight: w * dtest.eval(s),
                    });
                    atoms.push(Atom {
                        s,
                        order: 1,
                        weight: w * half * test.eval(s),
                    });
                }
            }
            atoms.retain(|a| a.weight != 0.0);
            atoms
        }
    }
}

/// Derivatives `0..=smoothness` of `(u⁰, u¹)` at `t` from the collocation
/// identities `∂_t u⁰ = u¹`, `M ∂_t u¹ = F - K u⁰` and their time derivative.
pub fn left_data(
    smoothness: usize,
    ops: &dyn SpatialOperators,
    forcing: &dyn Forcing,
    t: f64,
    value: StatePair,
) -> Result<Vec<StatePair>> {
    let mut data = vec![value];
    if smoothness >= 1 {
        let (ref x0, ref x1) = data[0];
        let kx0 = ops.stiffness().matvec(x0);
        let f = forcing.load(t, 0);
        let rhs: Vec<f64> = f.iter().zip(&kx0).map(|(a, b)| a - b).collect();
        let d1 = ops.mass_solve(&rhs)?;
        data.push((x1.clone(), d1));
    }
    if smoothness >= 2 {
        let kx1 = ops.stiffness().matvec(&data[0].1);
        let df = forcing.load(t, 1);
        let rhs: Vec<f64> = df.iter().zip(&kx1).map(|(a, b)| a - b).collect();
        let d2 = ops.mass_solve(&rhs)?;
        data.push((data[1].1.clone(), d2));
    }
    Ok(data)
}

/// Number of uniform slabs covering `(0, t_end]` with step at most `tau`.
pub fn slab_count(t_end: f64, tau: f64) -> Result<usize> {
    if !(tau > 0.0 && t_end > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need positive step and final time, got tau = {tau}, T = {t_end}"
        )));
    }
    Ok(((t_end / tau) - 1e-9).ceil().max(1.0) as usize)
}

/// Marches `init` over `n` uniform slabs of `(0, t_end]`.
pub fn march(
    scheme: Scheme,
    k: usize,
    ops: &dyn SpatialOperators,
    forcing: &dyn Forcing,
    init: StatePair,
    tau: f64,
    t_end: f64,
) -> Result<DiscreteSolution> {
    march_checked(scheme, k, ops, forcing, init, tau, t_end, None)
}

/// [`march`] with an optional bound on the relative residual of every slab solve.
#[allow(clippy::too_many_arguments)]
pub fn march_checked(
    scheme: Scheme,
    k: usize,
    ops: &dyn SpatialOperators,
    forcing: &dyn Forcing,
    init: StatePair,
    tau: f64,
    t_end: f64,
    residual_tol: Option<f64>,
) -> Result<DiscreteSolution> {
    let n = slab_count(t_end, tau)?;
    let tau = t_end / n as f64;
    let stepper = SlabStepper::new(scheme, k, tau, ops)?.with_residual_tolerance(residual_tol)?;
    let mut slabs: Vec<SlabSolution> = Vec::with_capacity(n);
    let mut value = init;
    for i in 0..n {
        let t_left = if i == 0 { 0.0 } else { slabs[i - 1].slab().t_right() };
        let t_right = if i + 1 == n { t_end } else { (i + 1) as f64 * tau };
        let wrap = |e: Error| Error::Slab {
            slab: i + 1,
            source: Box::new(e),
        };
        let slab = SlabMap::new(t_left, t_right).map_err(wrap)?;
        let left = left_data(scheme.smoothness(), ops, forcing, t_left, value).map_err(wrap)?;
        let sol = stepper.advance(slab, &left, forcing).map_err(wrap)?;
        value = sol.eval_reference(1.0, 0);
        if value.0.iter().chain(&value.1).any(|v| !v.is_finite()) {
            return Err(wrap(Error::InvalidArgument("non-finite solution values".into())));
        }
        slabs.push(sol);
    }
    DiscreteSolution::new(scheme, k, tau, slabs)
}

/// How the discrete initial state is obtained from `(u_0, u_1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitialData {
    /// `(R_h u_0, R_h u_1)`.
    #[default]
    Elliptic,
    /// `(R_h u_0, I_h u_1)` with `I_h` the nodal interpolant.
    NodalVelocity,
}

impl InitialData {
    pub fn name(self) -> &'static str {
        match self {
            InitialData::Elliptic => "elliptic",
            InitialData::NodalVelocity => "nodal-velocity",
        }
    }
}

impl std::str::FromStr for InitialData {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        [InitialData::Elliptic, InitialData::NodalVelocity]
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown initial data mode '{s}'")))
    }
}

/// `(R_h u_0, R_h u_1)`.
pub fn initial_state(problem: &dyn WaveProblem, ops: &Operators) -> Result<StatePair> {
    initial_state_with(problem, ops, InitialData::Elliptic)
}

pub fn initial_state_with(problem: &dyn WaveProblem, ops: &Operators, mode: InitialData) -> Result<StatePair> {
    let x0 = ops.elliptic_projection(&|x, y| problem.grad_u0(x, y))?;
    let x1 = match mode {
        InitialData::Elliptic => ops.elliptic_projection(&|x, y| problem.grad_u1(x, y))?,
        InitialData::NodalVelocity => ops.space().interpolate(&|x, y| problem.u1(x, y)),
    };
    Ok((x0, x1))
}

/// Solves `problem` on the space of `ops` with step `tau` up to its final time.
pub fn run(problem: &dyn WaveProblem, ops: &Operators, scheme: Scheme, k: usize, tau: f64) -> Result<DiscreteSolution> {
    run_with(problem, ops, scheme, k, tau, InitialData::Elliptic)
}

pub fn run_with(
    problem: &dyn WaveProblem,
    ops: &Operators,
    scheme: Scheme,
    k: usize,
    tau: f64,
    init: InitialData,
) -> Result<DiscreteSolution> {
    scheme.check_degree(k)?;
    let init = initial_state_with(problem, ops, init)?;
    let forcing = FemForcing::new(ops, problem);
    march(scheme, k, ops, &forcing, init, tau, problem.end_time())
}
