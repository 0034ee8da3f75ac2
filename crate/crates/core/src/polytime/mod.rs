//! Polynomial machinery on the reference interval `[-1, 1]`: Jacobi roots,
//! the Gauss, Gauss-Lobatto and Hermite-type quadrature rules, the attached
//! interpolation operators and the lifting kernel.

mod jacobi;
mod poly;
mod rule;

pub use jacobi::{gauss_points, jacobi_eval, jacobi_roots, lobatto_points};
pub use poly::{cardinal_basis, interpolate_functionals, NodalFunctional, PolyCoeffs};
pub use rule::{
    hermite_functionals, interpolate, interpolation_nodes, theta_kernel, InterpKind, QuadKind, QuadRule,
    EXACTNESS_TOL,
};

use crate::error::{Error, Result};

/// Affine map from `[-1, 1]` onto the slab `[t_left, t_right]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlabMap {
    t_left: f64,
    t_right: f64,
}

impl SlabMap {
    pub fn new(t_left: f64, t_right: f64) -> Result<Self> {
        if !(t_left < t_right) || !t_left.is_finite() || !t_right.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "slab needs t_left < t_right, got [{t_left}, {t_right}]"
            )));
        }
        Ok(SlabMap { t_left, t_right })
    }

    pub fn t_left(&self) -> f64 {
        self.t_left
    }

    pub fn t_right(&self) -> f64 {
        self.t_right
    }

    pub fn tau(&self) -> f64 {
        self.t_right - self.t_left
    }

    /// `T_n(s)`.
    pub fn to_time(&self, s: f64) -> f64 {
        0.5 * (self.t_left + self.t_right) + 0.5 * self.tau() * s
    }

    /// `T_n^{-1}(t)`.
    pub fn to_reference(&self, t: f64) -> f64 {
        (2.0 * t - self.t_left - self.t_right) / self.tau()
    }

    /// Factor `dt/ds = tau/2`.
    pub fn half_tau(&self) -> f64 {
        0.5 * self.tau()
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.t_left && t <= self.t_right
    }
}
