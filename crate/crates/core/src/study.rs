//! Convergence studies over a sequence of refinement levels.

use std::fmt;
use std::str::FromStr;

use crate::diagnostics::{eoc, error_report, ErrorReport, NormOptions, Sampling};
use crate::error::{Error, Result};
use crate::lifting::lift;
use crate::slabsolver::{initial_state_with, march_checked, DiscreteSolution, FemForcing, InitialData, ManufacturedProblem, ProblemKind, Scheme};
use crate::spacefem::{FeSpace, MeshFamily, Operators};

/// A time discretization as run by a study, including the lifted variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Direct(Scheme),
    /// `cGP-C1(k)` followed by the lift to degree `k + 1`.
    LiftedC1,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Direct(Scheme::Cgp),
        Method::Direct(Scheme::CgpC1),
        Method::Direct(Scheme::CgpC2),
        Method::LiftedC1,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Direct(s) => s.name(),
            Method::LiftedC1 => "cgp-c1-lifted",
        }
    }

    /// Scheme that is actually marched.
    pub fn base_scheme(self) -> Scheme {
        match self {
            Method::Direct(s) => s,
            Method::LiftedC1 => Scheme::CgpC1,
        }
    }

    /// Scheme and degree of the solution that is evaluated.
    pub fn evaluated(self, k: usize) -> (Scheme, usize) {
        match self {
            Method::Direct(s) => (s, k),
            Method::LiftedC1 => (Scheme::CgpC2, k + 1),
        }
    }

    pub fn check_degree(self, k: usize) -> Result<()> {
        self.base_scheme().check_degree(k)?;
        if self == Method::LiftedC1 && k + 1 < Scheme::CgpC2.min_k() {
            return Err(Error::InvalidArgument(format!(
                "{self} needs k >= {}, got {k}",
                Scheme::CgpC2.min_k() - 1
            )));
        }
        Ok(())
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let norm = s.replace('_', "-");
        Method::ALL
            .into_iter()
            .find(|m| m.name() == norm)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown scheme '{s}'")))
    }
}

/// Evaluation conventions of a study.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Conventions {
    /// Elliptic initial data, `r + 3` spatial error points, `k + 2` Gauss
    /// points in time and 100 samples per slab.
    Standard,
    /// Nodal interpolation of `u_1`, `r + 1` spatial error points and
    /// [`NormOptions::reference`] in time. Reproduces the reference
    /// error values.
    Reference,
}

impl Conventions {
    pub fn name(self) -> &'static str {
        match self {
            Conventions::Standard => "standard",
            Conventions::Reference => "reference",
        }
    }

    /// Time norms for `method` at degree `k`. The reference rule has
    /// `degree + 1 - smoothness` Gauss points of the evaluated solution, so a
    /// lifted run and the direct `cGP-C2` run share it.
    pub fn norms(self, method: Method, k: usize) -> NormOptions {
        match self {
            Conventions::Standard => NormOptions::default(),
            Conventions::Reference => {
                let (scheme, degree) = method.evaluated(k);
                NormOptions::reference((degree + 1).saturating_sub(scheme.smoothness()).max(1))
            }
        }
    }

    pub fn initial_data(self) -> InitialData {
        match self {
            Conventions::Standard => InitialData::Elliptic,
            Conventions::Reference => InitialData::NodalVelocity,
        }
    }

    pub fn error_points(self, r: usize) -> usize {
        match self {
            Conventions::Standard => r + 3,
            Conventions::Reference => r + 1,
        }
    }
}

impl FromStr for Conventions {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        [Conventions::Standard, Conventions::Reference]
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown conventions '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub method: Method,
    pub k: usize,
    pub r: usize,
    pub family: MeshFamily,
    pub levels: Vec<usize>,
    pub tau0: f64,
    pub end_time: f64,
    pub problem: ProblemKind,
    pub norms: NormOptions,
    pub initial: InitialData,
    /// Spatial error quadrature points per direction.
    pub error_points: usize,
    /// Largest accepted relative residual of a slab solve.
    pub solver_tol: Option<f64>,
}

impl StudyConfig {
    pub fn new(
        method: Method,
        k: usize,
        r: usize,
        family: MeshFamily,
        levels: Vec<usize>,
        problem: ProblemKind,
        conventions: Conventions,
    ) -> Self {
        StudyConfig {
            method,
            k,
            r,
            family,
            levels,
            tau0: 0.1,
            end_time: 1.0,
            problem,
            norms: conventions.norms(method, k),
            initial: conventions.initial_data(),
            error_points: conventions.error_points(r),
            solver_tol: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.method.check_degree(self.k)?;
        if self.levels.is_empty() {
            return Err(Error::InvalidArgument("level range is empty".into()));
        }
        if self.levels.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("levels must be increasing".into()));
        }
        if !(self.tau0 > 0.0 && self.tau0.is_finite()) {
            return Err(Error::InvalidArgument(format!("tau0 must be positive, got {}", self.tau0)));
        }
        if !(self.end_time > 0.0 && self.end_time.is_finite()) {
            return Err(Error::InvalidArgument(format!("final time must be positive, got {}", self.end_time)));
        }
        if let Some(t) = self.solver_tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::InvalidArgument(format!("solver tolerance must be positive, got {t}")));
            }
        }
        match self.norms.sampling {
            Sampling::Grid(s) if s < 2 => {
                return Err(Error::InvalidArgument("need at least 2 samples per slab".into()));
            }
            Sampling::Midpoints(0) => return Err(Error::InvalidArgument("need at least 1 sample per slab".into())),
            _ => {}
        }
        Ok(())
    }

    pub fn tau(&self, level: usize) -> f64 {
        self.tau0 / (1u64 << level) as f64
    }
}

/// Everything produced at one level.
pub struct LevelRun {
    pub level: usize,
    pub ops: Operators,
    pub problem: ManufacturedProblem,
    pub solution: DiscreteSolution,
}

impl LevelRun {
    pub fn forcing(&self) -> FemForcing<'_> {
        FemForcing::new(&self.ops, &self.problem)
    }
}

/// Builds the space and solves one level.
pub fn solve_level(config: &StudyConfig, level: usize) -> Result<LevelRun> {
    config.validate()?;
    let ops = Operators::new(FeSpace::build(config.family, level, config.r)?)?.with_error_points(config.error_points)?;
    let problem = ManufacturedProblem::new(config.problem, config.end_time)?;
    let init = initial_state_with(&problem, &ops, config.initial)?;
    let forcing = FemForcing::new(&ops, &problem);
    let scheme = config.method.base_scheme();
    let mut solution = march_checked(
        scheme,
        config.k,
        &ops,
        &forcing,
        init,
        config.tau(level),
        config.end_time,
        config.solver_tol,
    )?;
    if config.method == Method::LiftedC1 {
        solution = lift(&solution, &ops, &forcing)?;
    }
    Ok(LevelRun {
        level,
        ops,
        problem,
        solution,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelResult {
    pub level: usize,
    pub n_dof: usize,
    pub n_slabs: usize,
    pub report: ErrorReport,
}

pub fn run_level(config: &StudyConfig, level: usize) -> Result<LevelResult> {
    let run = solve_level(config, level)?;
    let report = error_report(&run.solution, &run.problem, &run.ops, &config.norms)?;
    Ok(LevelResult {
        level,
        n_dof: run.ops.n_dof(),
        n_slabs: run.solution.n_slabs(),
        report,
    })
}

/// Runs the levels coarse to fine, handing each result to `on_level` as soon
/// as it is available.
pub fn run_study(config: &StudyConfig, mut on_level: impl FnMut(&LevelResult)) -> Result<Vec<LevelResult>> {
    config.validate()?;
    let mut out = Vec::with_capacity(config.levels.len());
    for &level in &config.levels {
        let r = run_level(config, level)?;
        on_level(&r);
        out.push(r);
    }
    Ok(out)
}

/// Orders of the six columns from the two finest levels, `None` for a
/// column with a zero error or fewer than two levels.
pub fn final_eoc(results: &[LevelResult]) -> [Option<f64>; 6] {
    let mut out = [None; 6];
    if let [.., a, b] = results {
        let factor = (1u64 << (b.level - a.level)) as f64;
        let (ca, cb) = (a.report.columns(), b.report.columns());
        for i in 0..6 {
            out[i] = eoc(&[ca[i], cb[i]], factor).ok().map(|r| r[0]);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::TimePoints;

    #[test]
    fn parse_methods() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert_eq!("cgp_c1_lifted".parse::<Method>().unwrap(), Method::LiftedC1);
        assert!(Method::LiftedC1.check_degree(3).is_err());
        assert!(Method::LiftedC1.check_degree(4).is_ok());
        let pts = |m: Method, k: usize| Conventions::Reference.norms(m, k).time_points;
        assert_eq!(pts(Method::LiftedC1, 4), pts(Method::Direct(Scheme::CgpC2), 5));
        assert_eq!(pts(Method::Direct(Scheme::CgpC1), 3), TimePoints::Fixed(3));
        assert_eq!("reference".parse::<Conventions>().unwrap(), Conventions::Reference);
    }

    #[test]
    fn zero_problem_gives_zero_and_no_orders() {
        let cfg = StudyConfig::new(
            Method::Direct(Scheme::CgpC1),
            3,
            1,
            MeshFamily::Doubling,
            vec![0, 1],
            ProblemKind::Zero,
            Conventions::Standard,
        );
        let res = run_study(&cfg, |_| {}).unwrap();
        assert!(res.iter().all(|r| r.report.columns().iter().all(|c| *c == 0.0)));
        assert_eq!(final_eoc(&res), [None; 6]);
    }

    #[test]
    fn validation() {
        let mut cfg = StudyConfig::new(
            Method::Direct(Scheme::CgpC2),
            4,
            1,
            MeshFamily::Doubling,
            vec![0],
            ProblemKind::Zero,
            Conventions::Standard,
        );
        assert!(cfg.validate().is_err());
        cfg.k = 5;
        assert!(cfg.validate().is_ok());
        cfg.solver_tol = Some(-1.0);
        assert!(cfg.validate().is_err());
        cfg.solver_tol = None;
        cfg.levels.clear();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn solver_tolerance_failure_names_the_slab() {
        let mut cfg = StudyConfig::new(
            Method::Direct(Scheme::CgpC1),
            3,
            1,
            MeshFamily::Doubling,
            vec![0],
            ProblemKind::ExSol1,
            Conventions::Standard,
        );
        cfg.solver_tol = Some(1e-8);
        assert!(run_level(&cfg, 0).is_ok());
        cfg.solver_tol = Some(1e-300);
        match run_level(&cfg, 0) {
            Err(Error::Slab { slab: 1, source }) => assert!(matches!(*source, Error::ResidualTooLarge { .. })),
            other => panic!("unexpected {:?}", other.map(|r| r.level)),
        }
    }
}
