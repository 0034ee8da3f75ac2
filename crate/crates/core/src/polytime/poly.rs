use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Polynomial on the reference interval `[-1, 1]`, stored by its Legendre
/// modal coefficients `c_0, c_1, ..., c_d`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PolyCoeffs {
    coefficients: Vec<f64>,
}

impl PolyCoeffs {
    pub fn new(coefficients: Vec<f64>) -> Self {
        PolyCoeffs { coefficients }
    }

    pub fn zero() -> Self {
        PolyCoeffs::default()
    }

    pub fn constant(c: f64) -> Self {
        PolyCoeffs::new(vec![c])
    }

    /// The Legendre polynomial `P_n`.
    pub fn legendre(n: usize) -> Self {
        let mut c = vec![0.0; n + 1];
        c[n] = 1.0;
        PolyCoeffs::new(c)
    }

    /// Converts monomial coefficients `a_0 + a_1 t + ...` to the Legendre basis.
    pub fn from_monomials(monomials: &[f64]) -> Self {
        // Horner in the Legendre basis, using t P_n = ((n+1) P_{n+1} + n P_{n-1}) / (2n+1).
        let mut acc = PolyCoeffs::zero();
        for &a in monomials.iter().rev() {
            acc = acc.mul_t();
            acc = acc + PolyCoeffs::constant(a);
        }
        acc
    }

    /// Product with the identity polynomial `t`.
    pub fn mul_t(&self) -> Self {
        if self.coefficients.is_empty() {
            return PolyCoeffs::zero();
        }
        let n = self.coefficients.len();
        let mut out = vec![0.0; n + 1];
        for (j, &c) in self.coefficients.iter().enumerate() {
            let jf = j as f64;
            out[j + 1] += c * (jf + 1.0) / (2.0 * jf + 1.0);
            if j > 0 {
                out[j - 1] += c * jf / (2.0 * jf + 1.0);
            }
        }
        PolyCoeffs::new(out)
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Length of the stored coefficient vector minus one; trailing zeros are
    /// not trimmed, so this is an upper bound on the true degree.
    pub fn nominal_degree(&self) -> usize {
        self.coefficients.len().saturating_sub(1)
    }

    /// Degree ignoring trailing coefficients below `tol` in magnitude.
    /// Returns `None` for the zero polynomial.
    pub fn degree(&self, tol: f64) -> Option<usize> {
        self.coefficients.iter().rposition(|c| c.abs() > tol)
    }

    /// Clenshaw evaluation.
    pub fn eval(&self, t: f64) -> f64 {
        let c = &self.coefficients;
        if c.is_empty() {
            return 0.0;
        }
        // P_{n+1} = alpha_n P_n + beta_n P_{n-1} with alpha_n = (2n+1) t/(n+1), beta_n = -n/(n+1).
        let mut b1 = 0.0;
        let mut b2 = 0.0;
        for n in (1..c.len()).rev() {
            let nf = n as f64;
            let alpha = (2.0 * nf + 1.0) * t / (nf + 1.0);
            let beta_next = -(nf + 1.0) / (nf + 2.0);
            let b0 = c[n] + alpha * b1 + beta_next * b2;
            b2 = b1;
            b1 = b0;
        }
        // P_0 = 1, P_1 = t, beta_1 = -1/2
        c[0] + t * b1 - 0.5 * b2
    }

    /// `d/dt`, in the same basis. Uses `P'_{n+1} - P'_{n-1} = (2n+1) P_n`.
    pub fn derivative(&self) -> Self {
        let c = &self.coefficients;
        if c.len() <= 1 {
            return PolyCoeffs::zero();
        }
        let d = c.len() - 1;
        let mut out = vec![0.0; d];
        // out_j = (2j+1) * (c_{j+1} + c_{j+3} + ...)
        let mut tail = vec![0.0; d + 2];
        for j in (0..d).rev() {
            tail[j] = c[j + 1] + tail[j + 2];
            out[j] = (2.0 * j as f64 + 1.0) * tail[j];
        }
        PolyCoeffs::new(out)
    }

    pub fn nth_derivative(&self, order: usize) -> Self {
        (0..order).fold(self.clone(), |p, _| p.derivative())
    }

    /// Exact integral over `[-1, 1]`.
    pub fn integral(&self) -> f64 {
        2.0 * self.coefficients.first().copied().unwrap_or(0.0)
    }

    pub fn scale(&self, s: f64) -> Self {
        PolyCoeffs::new(self.coefficients.iter().map(|c| c * s).collect())
    }

    /// Product of two polynomials, by Horner in `t` over the monomial
    /// coefficients of `other`. Intended for the small degrees used here.
    pub fn product(&self, other: &PolyCoeffs) -> Self {
        let mono = other.to_monomials();
        let mut acc = PolyCoeffs::zero();
        for &a in mono.iter().rev() {
            acc = acc.mul_t();
            acc = acc + self.scale(a);
        }
        acc
    }

    /// Monomial coefficients. Only well conditioned for small degree.
    pub fn to_monomials(&self) -> Vec<f64> {
        let n = self.coefficients.len();
        let mut out = vec![0.0; n];
        // p_{j}(t) in monomials by the three-term recurrence
        let mut pm1: Vec<f64> = vec![];
        let mut p0: Vec<f64> = vec![1.0];
        for (j, &c) in self.coefficients.iter().enumerate() {
            for (o, v) in out.iter_mut().zip(p0.iter()) {
                *o += c * v;
            }
            let jf = j as f64;
            let mut next = vec![0.0; j + 2];
            for (i, v) in p0.iter().enumerate() {
                next[i + 1] += (2.0 * jf + 1.0) / (jf + 1.0) * v;
            }
            for (i, v) in pm1.iter().enumerate() {
                next[i] -= jf / (jf + 1.0) * v;
            }
            pm1 = p0;
            p0 = next;
        }
        out
    }
}

impl Add for PolyCoeffs {
    type Output = PolyCoeffs;
    fn add(self, rhs: PolyCoeffs) -> PolyCoeffs {
        let n = self.coefficients.len().max(rhs.coefficients.len());
        let c = (0..n)
            .map(|i| {
                self.coefficients.get(i).copied().unwrap_or(0.0)
                    + rhs.coefficients.get(i).copied().unwrap_or(0.0)
            })
            .collect();
        PolyCoeffs::new(c)
    }
}

impl Sub for PolyCoeffs {
    type Output = PolyCoeffs;
    fn sub(self, rhs: PolyCoeffs) -> PolyCoeffs {
        self + (-rhs)
    }
}

impl Neg for PolyCoeffs {
    type Output = PolyCoeffs;
    fn neg(self) -> PolyCoeffs {
        self.scale(-1.0)
    }
}

impl Mul<f64> for PolyCoeffs {
    type Output = PolyCoeffs;
    fn mul(self, rhs: f64) -> PolyCoeffs {
        self.scale(rhs)
    }
}

/// A linear functional used as interpolation datum: a point value or a
/// derivative of given order at a point of `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NodalFunctional {
    Value(f64),
    Derivative { at: f64, order: usize },
}

impl NodalFunctional {
    pub fn apply(&self, p: &PolyCoeffs) -> f64 {
        match *self {
            NodalFunctional::Value(t) => p.eval(t),
            NodalFunctional::Derivative { at, order } => p.nth_derivative(order).eval(at),
        }
    }
}

fn functional_matrix(functionals: &[NodalFunctional]) -> DMatrix<f64> {
    let n = functionals.len();
    let basis: Vec<PolyCoeffs> = (0..n).map(PolyCoeffs::legendre).collect();
    DMatrix::from_fn(n, n, |i, j| functionals[i].apply(&basis[j]))
}

/// Unique polynomial of degree `< functionals.len()` matching `data`.
pub fn interpolate_functionals(functionals: &[NodalFunctional], data: &[f64]) -> Result<PolyCoeffs> {
    if functionals.len() != data.len() {
        return Err(Error::DimensionMismatch {
            expected: functionals.len(),
            got: data.len(),
        });
    }
    if functionals.is_empty() {
        return Ok(PolyCoeffs::zero());
    }
    let g = functional_matrix(functionals);
    let rhs = nalgebra::DVector::from_column_slice(data);
    let sol = g
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::InvalidArgument("interpolation data are not unisolvent".into()))?;
    Ok(PolyCoeffs::new(sol.iter().copied().collect()))
}

/// Cardinal (dual) basis: `basis[j]` has functional `i` equal to `delta_ij`.
pub fn cardinal_basis(functionals: &[NodalFunctional]) -> Result<Vec<PolyCoeffs>> {
    let n = functionals.len();
    let g = functional_matrix(functionals);
    let inv = g
        .try_inverse()
        .ok_or_else(|| Error::InvalidArgument("interpolation data are not unisolvent".into()))?;
    Ok((0..n)
        .map(|j| PolyCoeffs::new(inv.column(j).iter().copied().collect()))
        .collect())
}
