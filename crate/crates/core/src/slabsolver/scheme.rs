use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::polytime::{cardinal_basis, hermite_functionals, jacobi_roots, lobatto_points, NodalFunctional, PolyCoeffs, QuadKind, QuadRule};

/// Time discretization family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Continuous Galerkin-Petrov `cGP(k)`.
    Cgp,
    /// Galerkin-collocation `cGP-C1(k)`.
    CgpC1,
    /// Galerkin-collocation `cGP-C2(k)`.
    CgpC2,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Cgp, Scheme::CgpC1, Scheme::CgpC2];

    pub fn min_k(self) -> usize {
        match self {
            Scheme::Cgp => 1,
            Scheme::CgpC1 => 3,
            Scheme::CgpC2 => 5,
        }
    }

    /// Order of global continuity in time.
    pub fn smoothness(self) -> usize {
        match self {
            Scheme::Cgp => 0,
            Scheme::CgpC1 => 1,
            Scheme::CgpC2 => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Cgp => "cgp",
            Scheme::CgpC1 => "cgp-c1",
            Scheme::CgpC2 => "cgp-c2",
        }
    }

    pub fn check_degree(self, k: usize) -> Result<()> {
        if k < self.min_k() {
            return Err(Error::InvalidArgument(format!(
                "{self} needs k >= {}, got {k}",
                self.min_k()
            )));
        }
        if k > 12 {
            return Err(Error::InvalidArgument(format!("time degree {k} is not supported (max 12)")));
        }
        Ok(())
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|x| x.name() == s || x.name().replace('-', "_") == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown scheme '{s}'")))
    }
}

/// One equation row on the reference slab.
#[derive(Debug, Clone, PartialEq)]
pub enum RowKind {
    /// The residual's `order`-th time derivative vanishes at `t_n`.
    Collocation { order: usize },
    /// The residual, tested with `test`, integrates to zero under the scheme's rule.
    Variational { test: PolyCoeffs },
}

/// Nodal time basis of one scheme and degree on `[-1, 1]`, together with
/// the split into coefficients fixed by left-end data and free ones, and
/// the equation rows that determine the free coefficients.
#[derive(Debug, Clone)]
pub struct TimeBasis {
    scheme: Scheme,
    k: usize,
    functionals: Vec<NodalFunctional>,
    basis: Vec<PolyCoeffs>,
    /// `(basis index, derivative order of the left-end datum)`.
    fixed: Vec<(usize, usize)>,
    free: Vec<usize>,
    rows: Vec<RowKind>,
    rule: QuadRule,
}

impl TimeBasis {
    pub fn new(scheme: Scheme, k: usize) -> Result<Self> {
        scheme.check_degree(k)?;
        let left = |order: usize| -> NodalFunctional {
            if order == 0 {
                NodalFunctional::Value(-1.0)
            } else {
                NodalFunctional::Derivative { at: -1.0, order }
            }
        };
        let right = |order: usize| -> NodalFunctional {
            if order == 0 {
                NodalFunctional::Value(1.0)
            } else {
                NodalFunctional::Derivative { at: 1.0, order }
            }
        };
        let legendre_rows = |n: usize| (0..n).map(|j| RowKind::Variational { test: PolyCoeffs::legendre(j) });

        let (functionals, rule, rows): (Vec<NodalFunctional>, QuadRule, Vec<RowKind>) = match scheme {
            Scheme::Cgp => (
                lobatto_points(k + 1).into_iter().map(NodalFunctional::Value).collect(),
                QuadRule::lobatto(k + 1),
                legendre_rows(k).collect(),
            ),
            Scheme::CgpC1 => {
                let mut rows = vec![RowKind::Collocation { order: 0 }];
                rows.extend(legendre_rows(k - 2));
                (hermite_functionals(k), QuadRule::build(QuadKind::HermiteShort, k)?, rows)
            }
            Scheme::CgpC2 => {
                let mut f = vec![left(0), left(1), left(2)];
                f.extend(jacobi_roots(2, 2, k - 5).into_iter().map(NodalFunctional::Value));
                f.extend([right(0), right(1), right(2)]);
                let mut rows = vec![RowKind::Collocation { order: 0 }, RowKind::Collocation { order: 1 }];
                rows.extend(legendre_rows(k - 4));
                (f, QuadRule::build(QuadKind::HermiteLong, k)?, rows)
            }
        };
        let basis = cardinal_basis(&functionals)?;
        let mut fixed = Vec::new();
        let mut free = Vec::new();
        for (a, func) in functionals.iter().enumerate() {
            match *func {
                NodalFunctional::Value(-1.0) => fixed.push((a, 0)),
                NodalFunctional::Derivative { at: -1.0, order } => fixed.push((a, order)),
                _ => free.push(a),
            }
        }
        fixed.sort_by_key(|f| f.1);
        debug_assert_eq!(fixed.len(), scheme.smoothness() + 1);
        debug_assert_eq!(free.len(), rows.len());
        Ok(TimeBasis {
            scheme,
            k,
            functionals,
            basis,
            fixed,
            free,
            rows,
            rule,
        })
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn degree(&self) -> usize {
        self.k
    }

    pub fn functionals(&self) -> &[NodalFunctional] {
        &self.functionals
    }

    pub fn basis(&self) -> &[PolyCoeffs] {
        &self.basis
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn fixed(&self) -> &[(usize, usize)] {
        &self.fixed
    }

    pub fn free(&self) -> &[usize] {
        &self.free
    }

    pub fn rows(&self) -> &[RowKind] {
        &self.rows
    }

    /// Quadrature rule of the variational rows.
    pub fn rule(&self) -> &QuadRule {
        &self.rule
    }
}
