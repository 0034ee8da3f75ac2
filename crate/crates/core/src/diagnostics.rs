//! Error norms in space-time, the discrete energy, the time sampling grid
//! and experimental orders of convergence.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::polytime::QuadRule;
use crate::slabsolver::{DiscreteSolution, ExactSolution, SpatialOperators, StatePair, WaveProblem};
use crate::spacefem::Operators;

/// Default number of samples per slab for the `L∞`-in-time norms.
pub const DEFAULT_SAMPLES_PER_SLAB: usize = 100;
/// Samples per slab of the reference grid with spacing `τ_n / 1000`.
pub const FINE_SAMPLES_PER_SLAB: usize = 1000;

/// Gauss points per slab for the `L²`-in-time columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimePoints {
    /// `k + 2` points for a solution of degree `k`.
    DegreePlusTwo,
    Fixed(usize),
}

impl TimePoints {
    pub fn count(self, degree: usize) -> usize {
        match self {
            TimePoints::DegreePlusTwo => degree + 2,
            TimePoints::Fixed(n) => n,
        }
    }
}

/// Time samples of the `L∞`-in-time columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampling {
    /// [`sampling_grid`] with the given samples per slab.
    Grid(usize),
    /// Midpoints of `s` equal parts of every slab, `t_{n-1} + (j + 1/2) τ_n / s`.
    Midpoints(usize),
}

impl Sampling {
    pub fn times(self, time_mesh: &[f64]) -> Result<Vec<f64>> {
        match self {
            Sampling::Grid(s) => sampling_grid(time_mesh, s),
            Sampling::Midpoints(s) => {
                if s == 0 {
                    return Err(Error::InvalidArgument("need at least one sample per slab".into()));
                }
                check_time_mesh(time_mesh)?;
                Ok(time_mesh
                    .windows(2)
                    .flat_map(|w| (0..s).map(move |j| w[0] + (j as f64 + 0.5) * (w[1] - w[0]) / s as f64))
                    .collect())
            }
        }
    }
}

/// How the space-time norms of an [`ErrorReport`] are discretized in time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NormOptions {
    pub sampling: Sampling,
    pub time_points: TimePoints,
}

impl Default for NormOptions {
    fn default() -> Self {
        NormOptions {
            sampling: Sampling::Grid(DEFAULT_SAMPLES_PER_SLAB),
            time_points: TimePoints::DegreePlusTwo,
        }
    }
}

impl NormOptions {
    /// Samples at `t_{n-1} + τ/4` and `t_{n-1} + 3τ/4` and a `points`-point
    /// Gauss rule, under which the reference error values are reproduced.
    pub fn reference(points: usize) -> Self {
        NormOptions {
            sampling: Sampling::Midpoints(2),
            time_points: TimePoints::Fixed(points),
        }
    }

    pub fn with_sampling(self, sampling: Sampling) -> Self {
        NormOptions { sampling, ..self }
    }
}

/// Column names of an [`ErrorReport`], in order.
pub const ERROR_COLUMNS: [&str; 6] = ["e0_linf_l2", "e1_linf_l2", "energy_linf", "e0_l2_l2", "e1_l2_l2", "energy_l2"];

/// Space-time errors of one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    pub tau: f64,
    pub h: f64,
    /// `max_t ‖u - u⁰_h‖`
    pub e0_linf_l2: f64,
    /// `max_t ‖∂_t u - u¹_h‖`
    pub e1_linf_l2: f64,
    /// `max_t (‖∇(u - u⁰_h)‖² + ‖∂_t u - u¹_h‖²)^{1/2}`
    pub energy_linf: f64,
    pub e0_l2_l2: f64,
    pub e1_l2_l2: f64,
    pub energy_l2: f64,
}

impl ErrorReport {
    pub fn columns(&self) -> [f64; 6] {
        [
            self.e0_linf_l2,
            self.e1_linf_l2,
            self.energy_linf,
            self.e0_l2_l2,
            self.e1_l2_l2,
            self.energy_l2,
        ]
    }
}

fn check_time_mesh(time_mesh: &[f64]) -> Result<()> {
    if time_mesh.len() < 2 || time_mesh.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("time mesh must be strictly increasing".into()));
    }
    Ok(())
}

/// `{t_{n-1} + j τ_n / s : j < s}` over all slabs, followed by `t_N`.
pub fn sampling_grid(time_mesh: &[f64], samples_per_slab: usize) -> Result<Vec<f64>> {
    if samples_per_slab < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 samples per slab, got {samples_per_slab}"
        )));
    }
    check_time_mesh(time_mesh)?;
    let s = samples_per_slab;
    let mut grid = Vec::with_capacity((time_mesh.len() - 1) * s + 1);
    for w in time_mesh.windows(2) {
        let tau = w[1] - w[0];
        grid.extend((0..s).map(|j| w[0] + j as f64 * tau / s as f64));
    }
    grid.push(*time_mesh.last().unwrap());
    Ok(grid)
}

/// Squared spatial errors `(‖e⁰‖², ‖∇e⁰‖², ‖e¹‖²)` at `t`.
fn squared_errors(sol: &DiscreteSolution, exact: &dyn ExactSolution, ops: &Operators, t: f64) -> Result<[f64; 3]> {
    let (u0, u1) = sol.evaluate(t, 0)?;
    let (l2_0, h1_0) = ops.error_norms(&u0, Some(&|x, y| exact.u(t, x, y)), Some(&|x, y| exact.grad_u(t, x, y)))?;
    let (l2_1, _) = ops.error_norms(&u1, Some(&|x, y| exact.dt_u(t, x, y)), None)?;
    Ok([l2_0 * l2_0, h1_0 * h1_0, l2_1 * l2_1])
}

/// The six error columns of `sol` against the exact solution of `problem`.
pub fn error_report(
    sol: &DiscreteSolution,
    problem: &dyn WaveProblem,
    ops: &Operators,
    options: &NormOptions,
) -> Result<ErrorReport> {
    let exact = problem.exact().ok_or(Error::MissingExactSolution)?;
    if sol.n_dof() != ops.n_dof() {
        return Err(Error::DimensionMismatch {
            expected: ops.n_dof(),
            got: sol.n_dof(),
        });
    }
    let grid = options.sampling.times(&sol.time_mesh())?;
    let sampled: Vec<[f64; 3]> = grid
        .par_iter()
        .map(|&t| squared_errors(sol, exact, ops, t))
        .collect::<Result<_>>()?;
    let mut linf = [0.0f64; 3];
    for e in &sampled {
        linf[0] = linf[0].max(e[0]);
        linf[1] = linf[1].max(e[2]);
        linf[2] = linf[2].max(e[1] + e[2]);
    }

    let npts = options.time_points.count(sol.degree());
    if npts == 0 {
        return Err(Error::InvalidArgument("time quadrature needs at least one point".into()));
    }
    let rule = QuadRule::gauss(npts);
    let points: Vec<(f64, f64)> = sol
        .slabs()
        .iter()
        .flat_map(|s| {
            let m = *s.slab();
            rule.nodes
                .iter()
                .zip(&rule.value_weights)
                .map(move |(&x, &w)| (m.to_time(x), 0.5 * m.tau() * w))
        })
        .collect();
    let l2: [f64; 3] = points
        .par_iter()
        .map(|&(t, w)| squared_errors(sol, exact, ops, t).map(|e| [w * e[0], w * e[2], w * (e[1] + e[2])]))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold([0.0; 3], |a, b| [a[0] + b[0], a[1] + b[1], a[2] + b[2]]);

    Ok(ErrorReport {
        tau: sol.tau(),
        h: ops.space().mesh().h(),
        e0_linf_l2: linf[0].sqrt(),
        e1_linf_l2: linf[1].sqrt(),
        energy_linf: linf[2].sqrt(),
        e0_l2_l2: l2[0].sqrt(),
        e1_l2_l2: l2[1].sqrt(),
        energy_l2: l2[2].sqrt(),
    })
}

/// `(x¹)ᵀ M x¹ + (x⁰)ᵀ K x⁰` for a state pair.
pub fn state_energy(ops: &dyn SpatialOperators, state: &StatePair) -> f64 {
    ops.mass().bilinear(&state.1, &state.1) + ops.stiffness().bilinear(&state.0, &state.0)
}

/// Discrete energy `‖u¹_h(t)‖² + ‖∇u⁰_h(t)‖²`.
pub fn energy(sol: &DiscreteSolution, ops: &dyn SpatialOperators, t: f64) -> Result<f64> {
    Ok(state_energy(ops, &sol.evaluate(t, 0)?))
}

/// `max_n |E(t_n) - E(0)| / E(0)` over the time nodes.
pub fn energy_drift(sol: &DiscreteSolution, ops: &dyn SpatialOperators) -> Result<f64> {
    let mesh = sol.time_mesh();
    let e0 = energy(sol, ops, mesh[0])?;
    if e0 == 0.0 {
        return Err(Error::InvalidArgument("initial energy is zero".into()));
    }
    let mut worst = 0.0f64;
    for &t in &mesh[1..] {
        worst = worst.max((energy(sol, ops, t)? - e0).abs() / e0);
    }
    Ok(worst)
}

/// `rate_i = log(e_{i-1} / e_i) / log(factor)`.
pub fn eoc(errors: &[f64], refinement_factor: f64) -> Result<Vec<f64>> {
    if errors.len() < 2 {
        return Err(Error::InvalidArgument("need at least two errors for an order".into()));
    }
    if !(refinement_factor > 1.0) {
        return Err(Error::InvalidArgument(format!(
            "refinement factor must exceed 1, got {refinement_factor}"
        )));
    }
    if let Some(e) = errors.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
        return Err(Error::InvalidArgument(format!("errors must be positive, got {e}")));
    }
    Ok(errors
        .windows(2)
        .map(|w| (w[0] / w[1]).ln() / refinement_factor.ln())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::slabsolver::{run, ManufacturedProblem, ProblemKind, Scheme};
    use crate::spacefem::{FeSpace, MeshFamily};
    use approx::assert_abs_diff_eq;

    #[test]
    fn grid_examples() {
        assert_eq!(sampling_grid(&[0.0, 1.0], 2).unwrap(), vec![0.0, 0.5, 1.0]);
        let g = sampling_grid(&[0.0, 0.1, 0.2], 4).unwrap();
        assert_eq!(g.len(), 9);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        assert!(sampling_grid(&[0.0, 1.0], 1).is_err());
        let m = Sampling::Midpoints(2).times(&[0.0, 0.2, 0.4]).unwrap();
        assert_eq!(m.len(), 4);
        assert_abs_diff_eq!(m[2], 0.25, epsilon = 1e-15);
        let g = sampling_grid(&[0.0, 0.1], FINE_SAMPLES_PER_SLAB).unwrap();
        assert_abs_diff_eq!(g[1] - g[0], 1e-4, epsilon = 1e-16);
    }

    #[test]
    fn eoc_examples() {
        assert_abs_diff_eq!(eoc(&[1.0, 1.0 / 16.0], 2.0).unwrap()[0], 4.0, epsilon = 1e-15);
        assert_abs_diff_eq!(eoc(&[3.714e-07, 2.325e-08], 2.0).unwrap()[0], 4.0, epsilon = 0.01);
        assert_abs_diff_eq!(eoc(&[1.180e-11, 1.851e-13], 2.0).unwrap()[0], 6.0, epsilon = 0.01);
        let seq: Vec<f64> = (0..5).map(|i| 3.0 * 3f64.powf(-2.5 * i as f64)).collect();
        for r in eoc(&seq, 3.0).unwrap() {
            assert_abs_diff_eq!(r, 2.5, epsilon = 1e-13);
        }
        assert!(eoc(&[1.0], 2.0).is_err());
        assert!(eoc(&[1.0, 0.0], 2.0).is_err());
    }

    fn small_run(kind: ProblemKind) -> (Operators, ManufacturedProblem, DiscreteSolution) {
        let ops = Operators::new(FeSpace::build(MeshFamily::Doubling, 0, 2).unwrap()).unwrap();
        let p = ManufacturedProblem::new(kind, 0.3).unwrap();
        let sol = run(&p, &ops, Scheme::CgpC1, 3, 0.1).unwrap();
        (ops, p, sol)
    }

    #[test]
    fn zero_problem_has_zero_errors() {
        let (ops, p, sol) = small_run(ProblemKind::Zero);
        let r = error_report(&sol, &p, &ops, &NormOptions::default().with_sampling(Sampling::Grid(4))).unwrap();
        assert!(r.columns().iter().all(|c| *c == 0.0));
        assert_eq!(energy(&sol, &ops, 0.2).unwrap(), 0.0);
    }

    #[test]
    fn sampling_refinement_properties() {
        let (ops, p, sol) = small_run(ProblemKind::ExSol1);
        let a = error_report(&sol, &p, &ops, &NormOptions::default().with_sampling(Sampling::Grid(4))).unwrap();
        let b = error_report(&sol, &p, &ops, &NormOptions::default().with_sampling(Sampling::Grid(8))).unwrap();
        for i in 0..3 {
            assert!(b.columns()[i] >= a.columns()[i]);
        }
        for i in 3..6 {
            assert_eq!(b.columns()[i], a.columns()[i]);
        }
        assert!(a.columns().iter().all(|c| *c > 0.0));
        assert!(a.energy_linf >= a.e1_linf_l2);
    }

    #[test]
    fn energy_is_conserved_without_forcing() {
        let (ops, _, sol) = small_run(ProblemKind::StandingWave);
        assert!(energy_drift(&sol, &ops).unwrap() < 1e-12);
        let (ops, _, sol) = small_run(ProblemKind::ExSol1);
        assert!(energy_drift(&sol, &ops).unwrap() > 1e-3);
    }

    #[test]
    fn initial_energy_definition() {
        let (ops, _, sol) = small_run(ProblemKind::StandingWave);
        let (x0, x1) = sol.evaluate(0.0, 0).unwrap();
        let e = ops.mass().bilinear(&x1, &x1) + ops.stiffness().bilinear(&x0, &x0);
        assert_eq!(energy(&sol, &ops, 0.0).unwrap(), e);
        assert!(energy(&sol, &ops, 0.5).is_err());
    }
}
