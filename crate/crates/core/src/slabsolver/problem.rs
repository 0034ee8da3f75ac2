use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Closed-form solution of a wave problem, used to measure errors.
pub trait ExactSolution: Sync {
    fn u(&self, t: f64, x: f64, y: f64) -> f64;
    fn dt_u(&self, t: f64, x: f64, y: f64) -> f64;
    fn dtt_u(&self, t: f64, x: f64, y: f64) -> f64;
    fn grad_u(&self, t: f64, x: f64, y: f64) -> (f64, f64);
    fn grad_dt_u(&self, t: f64, x: f64, y: f64) -> (f64, f64);
    fn laplace_u(&self, t: f64, x: f64, y: f64) -> f64;
}

/// `u_tt - Δu = f` on the unit square with homogeneous Dirichlet data.
pub trait WaveProblem: Sync {
    fn end_time(&self) -> f64;
    fn u0(&self, x: f64, y: f64) -> f64;
    fn u1(&self, x: f64, y: f64) -> f64;
    fn grad_u0(&self, x: f64, y: f64) -> (f64, f64);
    fn grad_u1(&self, x: f64, y: f64) -> (f64, f64);
    fn f(&self, t: f64, x: f64, y: f64) -> f64;
    fn dt_f(&self, t: f64, x: f64, y: f64) -> f64;
    fn exact(&self) -> Option<&dyn ExactSolution>;

    /// `true` if `f` vanishes identically, letting load assembly be skipped.
    fn source_free(&self) -> bool {
        false
    }
}

/// The built-in test problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    /// `u = sin(4πt) sin(2πx) sin(2πy)`
    ExSol1,
    /// `u = sin(4πt) x(1-x) y(1-y)`
    ExSol2,
    /// `u = cos(√2 πt) sin(πx) sin(πy)`, `f = 0`
    StandingWave,
    /// `u = 0`
    Zero,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 4] = [
        ProblemKind::ExSol1,
        ProblemKind::ExSol2,
        ProblemKind::StandingWave,
        ProblemKind::Zero,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::ExSol1 => "exsol1",
            ProblemKind::ExSol2 => "exsol2",
            ProblemKind::StandingWave => "standing-wave",
            ProblemKind::Zero => "zero",
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProblemKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ProblemKind::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown problem '{s}'")))
    }
}

/// Separable solution `u = T(t) X(x, y)` of one of the built-in kinds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManufacturedProblem {
    kind: ProblemKind,
    end_time: f64,
}

impl ManufacturedProblem {
    pub fn new(kind: ProblemKind, end_time: f64) -> Result<Self> {
        if !(end_time > 0.0 && end_time.is_finite()) {
            return Err(Error::InvalidArgument(format!("final time must be positive, got {end_time}")));
        }
        Ok(ManufacturedProblem { kind, end_time })
    }

    pub fn kind(&self) -> ProblemKind {
        self.kind
    }

    /// `d^m T / dt^m`.
    fn temporal(&self, t: f64, m: usize) -> f64 {
        let (w, phase) = match self.kind {
            ProblemKind::ExSol1 | ProblemKind::ExSol2 => (4.0 * PI, 0.0),
            ProblemKind::StandingWave => (2f64.sqrt() * PI, 0.5 * PI),
            ProblemKind::Zero => return 0.0,
        };
        // d^m/dt^m sin(wt + phase) = w^m sin(wt + phase + mπ/2)
        w.powi(m as i32) * (w * t + phase + m as f64 * 0.5 * PI).sin()
    }

    /// `(X, ∂X/∂x, ∂X/∂y, ΔX)`.
    fn spatial(&self, x: f64, y: f64) -> (f64, f64, f64, f64) {
        match self.kind {
            ProblemKind::ExSol1 => {
                let w = 2.0 * PI;
                let (sx, cx) = (w * x).sin_cos();
                let (sy, cy) = (w * y).sin_cos();
                (sx * sy, w * cx * sy, w * sx * cy, -2.0 * w * w * sx * sy)
            }
            ProblemKind::ExSol2 => {
                let (gx, gy) = (x * (1.0 - x), y * (1.0 - y));
                (gx * gy, (1.0 - 2.0 * x) * gy, gx * (1.0 - 2.0 * y), -2.0 * (gx + gy))
            }
            ProblemKind::StandingWave => {
                let (sx, cx) = (PI * x).sin_cos();
                let (sy, cy) = (PI * y).sin_cos();
                (sx * sy, PI * cx * sy, PI * sx * cy, -2.0 * PI * PI * sx * sy)
            }
            ProblemKind::Zero => (0.0, 0.0, 0.0, 0.0),
        }
    }
}

impl ExactSolution for ManufacturedProblem {
    fn u(&self, t: f64, x: f64, y: f64) -> f64 {
        self.temporal(t, 0) * self.spatial(x, y).0
    }

    fn dt_u(&self, t: f64, x: f64, y: f64) -> f64 {
        self.temporal(t, 1) * self.spatial(x, y).0
    }

    fn dtt_u(&self, t: f64, x: f64, y: f64) -> f64 {
        self.temporal(t, 2) * self.spatial(x, y).0
    }

    fn grad_u(&self, t: f64, x: f64, y: f64) -> (f64, f64) {
        let (_, gx, gy, _) = self.spatial(x, y);
        let a = self.temporal(t, 0);
        (a * gx, a * gy)
    }

    fn grad_dt_u(&self, t: f64, x: f64, y: f64) -> (f64, f64) {
        let (_, gx, gy, _) = self.spatial(x, y);
        let a = self.temporal(t, 1);
        (a * gx, a * gy)
    }

    fn laplace_u(&self, t: f64, x: f64, y: f64) -> f64 {
        self.temporal(t, 0) * self.spatial(x, y).3
    }
}

impl WaveProblem for ManufacturedProblem {
    fn end_time(&self) -> f64 {
        self.end_time
    }

    fn u0(&self, x: f64, y: f64) -> f64 {
        self.u(0.0, x, y)
    }

    fn u1(&self, x: f64, y: f64) -> f64 {
        self.dt_u(0.0, x, y)
    }

    fn grad_u0(&self, x: f64, y: f64) -> (f64, f64) {
        self.grad_u(0.0, x, y)
    }

    fn grad_u1(&self, x: f64, y: f64) -> (f64, f64) {
        self.grad_dt_u(0.0, x, y)
    }

    fn f(&self, t: f64, x: f64, y: f64) -> f64 {
        let (v, _, _, lap) = self.spatial(x, y);
        self.temporal(t, 2) * v - self.temporal(t, 0) * lap
    }

    fn dt_f(&self, t: f64, x: f64, y: f64) -> f64 {
        let (v, _, _, lap) = self.spatial(x, y);
        self.temporal(t, 3) * v - self.temporal(t, 1) * lap
    }

    fn exact(&self) -> Option<&dyn ExactSolution> {
        Some(self)
    }

    fn source_free(&self) -> bool {
        matches!(self.kind, ProblemKind::StandingWave | ProblemKind::Zero)
    }
}

/// Checks `f = u_tt - Δu` and `∂_t f` (against a centered difference of `f`)
/// at 20 pseudo-random space-time points. Returns the largest relative
/// discrepancy of the first check.
pub fn check_manufactured(problem: &dyn WaveProblem) -> Result<f64> {
    const SAMPLES: usize = 20;
    const TOL: f64 = 1e-8;
    let exact = problem.exact().ok_or(Error::MissingExactSolution)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let end = problem.end_time();
    let mut worst = 0.0f64;
    for _ in 0..SAMPLES {
        let (t, x, y) = (rng.random_range(0.0..end), rng.random::<f64>(), rng.random::<f64>());
        let f = problem.f(t, x, y);
        let g = exact.dtt_u(t, x, y) - exact.laplace_u(t, x, y);
        let scale = f.abs().max(g.abs()).max(1.0);
        worst = worst.max((f - g).abs() / scale);

        let eps = 1e-5;
        let fd = (problem.f(t + eps, x, y) - problem.f(t - eps, x, y)) / (2.0 * eps);
        let df = problem.dt_f(t, x, y);
        if (fd - df).abs() > 1e-5 * df.abs().max(fd.abs()).max(1.0) {
            return Err(Error::InvalidArgument(format!(
                "dt_f inconsistent with f at (t, x, y) = ({t}, {x}, {y}): {df} vs {fd}"
            )));
        }
    }
    if worst > TOL {
        return Err(Error::InvalidArgument(format!(
            "source term inconsistent with exact solution (relative mismatch {worst:.3e})"
        )));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn builtin_problems_are_consistent() {
        for kind in ProblemKind::ALL {
            let p = ManufacturedProblem::new(kind, 1.0).unwrap();
            assert!(check_manufactured(&p).unwrap() < 1e-12, "{kind}");
            assert_eq!(kind.name().parse::<ProblemKind>().unwrap(), kind);
        }
    }

    #[test]
    fn closed_forms() {
        let p = ManufacturedProblem::new(ProblemKind::ExSol1, 1.0).unwrap();
        let (t, x, y) = (0.3, 0.2, 0.7);
        let u = (4.0 * PI * t).sin() * (2.0 * PI * x).sin() * (2.0 * PI * y).sin();
        assert_abs_diff_eq!(p.u(t, x, y), u, epsilon = 1e-14);
        assert_abs_diff_eq!(p.f(t, x, y), -8.0 * PI * PI * u, epsilon = 1e-12);
        assert_abs_diff_eq!(p.u1(x, y), 4.0 * PI * (2.0 * PI * x).sin() * (2.0 * PI * y).sin(), epsilon = 1e-13);

        let p = ManufacturedProblem::new(ProblemKind::ExSol2, 1.0).unwrap();
        let g = x * (1.0 - x) * y * (1.0 - y);
        let f = (4.0 * PI * t).sin() * (-16.0 * PI * PI * g + 2.0 * (y * (1.0 - y) + x * (1.0 - x)));
        assert_abs_diff_eq!(p.f(t, x, y), f, epsilon = 1e-13);

        let p = ManufacturedProblem::new(ProblemKind::StandingWave, 1.0).unwrap();
        assert_abs_diff_eq!(p.u0(0.5, 0.5), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.f(t, x, y), 0.0, epsilon = 1e-12);
        assert!(p.source_free());
        assert!(ManufacturedProblem::new(ProblemKind::Zero, 0.0).is_err());
    }

    struct BadSource;
    impl WaveProblem for BadSource {
        fn end_time(&self) -> f64 {
            1.0
        }
        fn u0(&self, _: f64, _: f64) -> f64 {
            0.0
        }
        fn u1(&self, _: f64, _: f64) -> f64 {
            0.0
        }
        fn grad_u0(&self, _: f64, _: f64) -> (f64, f64) {
            (0.0, 0.0)
        }
        fn grad_u1(&self, _: f64, _: f64) -> (f64, f64) {
            (0.0, 0.0)
        }
        fn f(&self, t: f64, _: f64, _: f64) -> f64 {
            t
        }
        fn dt_f(&self, _: f64, _: f64, _: f64) -> f64 {
            1.0
        }
        fn exact(&self) -> Option<&dyn ExactSolution> {
            None
        }
    }

    #[test]
    fn missing_exact_solution_reported() {
        assert!(matches!(check_manufactured(&BadSource), Err(Error::MissingExactSolution)));
    }
}
