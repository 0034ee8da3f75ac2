use std::fmt;

use super::jacobi::{gauss_points, jacobi_roots, lobatto_points};
use super::poly::{cardinal_basis, interpolate_functionals, NodalFunctional, PolyCoeffs};
use super::SlabMap;
use crate::error::{Error, Result};

/// Absolute tolerance of the monomial sweep that certifies exactness.
pub const EXACTNESS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QuadKind {
    /// `k - 1` Gauss-Legendre points.
    Gauss,
    /// `k` Gauss-Lobatto points.
    GaussLobatto,
    /// Values at `-1`, `1` and the `k - 3` Jacobi(2,2) roots plus first
    /// derivatives at both endpoints. Integrates `P_{2k-3}` exactly.
    HermiteShort,
    /// Hermite-type rule of the twice-differentiable scheme of degree `k`:
    /// endpoint values and first derivatives plus the `k - 4` Jacobi(2,2)
    /// roots. Integrates `P_{2k-5}` exactly.
    HermiteLong,
}

impl QuadKind {
    pub const ALL: [QuadKind; 4] = [
        QuadKind::Gauss,
        QuadKind::GaussLobatto,
        QuadKind::HermiteShort,
        QuadKind::HermiteLong,
    ];

    pub fn min_k(self) -> usize {
        match self {
            QuadKind::HermiteLong => 5,
            _ => 3,
        }
    }

    pub fn uses_derivatives(self) -> bool {
        matches!(self, QuadKind::HermiteShort | QuadKind::HermiteLong)
    }

    pub fn name(self) -> &'static str {
        match self {
            QuadKind::Gauss => "gauss",
            QuadKind::GaussLobatto => "gauss_lobatto",
            QuadKind::HermiteShort => "hermite_short",
            QuadKind::HermiteLong => "hermite_long",
        }
    }
}

impl fmt::Display for QuadKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Quadrature rule on `[-1, 1]` of the form
/// `w_L g'(-1) + sum_s w_s g(t_s) + w_R g'(1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadRule {
    pub kind: QuadKind,
    pub nodes: Vec<f64>,
    pub value_weights: Vec<f64>,
    pub deriv_weight_left: f64,
    pub deriv_weight_right: f64,
    pub exactness_degree: usize,
}

impl QuadRule {
    /// Builds the rule of `kind` for time degree `k`.
    pub fn build(kind: QuadKind, k: usize) -> Result<QuadRule> {
        if k < kind.min_k() {
            return Err(Error::InvalidArgument(format!(
                "{kind} rule needs k >= {}, got {k}",
                kind.min_k()
            )));
        }
        let nodes = match kind {
            QuadKind::Gauss => gauss_points(k - 1),
            QuadKind::GaussLobatto => lobatto_points(k),
            QuadKind::HermiteShort => hermite_nodes(k - 3),
            QuadKind::HermiteLong => hermite_nodes(k - 4),
        };
        Ok(Self::synthesize(kind, nodes))
    }

    /// Gauss-Lobatto rule with an explicit point count (`npts >= 2`).
    pub fn lobatto(npts: usize) -> QuadRule {
        Self::synthesize(QuadKind::GaussLobatto, lobatto_points(npts))
    }

    /// Gauss-Legendre rule with an explicit point count (`npts >= 1`).
    pub fn gauss(npts: usize) -> QuadRule {
        Self::synthesize(QuadKind::Gauss, gauss_points(npts))
    }

    fn synthesize(kind: QuadKind, nodes: Vec<f64>) -> QuadRule {
        let functionals = interpolation_functionals(kind, &nodes);
        let basis = cardinal_basis(&functionals).expect("quadrature nodes are distinct");
        let mut weights: Vec<f64> = basis.iter().map(PolyCoeffs::integral).collect();
        let (deriv_weight_left, deriv_weight_right) = if kind.uses_derivatives() {
            let right = weights.pop().unwrap();
            let left = weights.remove(0);
            (left, right)
        } else {
            (0.0, 0.0)
        };
        let mut rule = QuadRule {
            kind,
            nodes,
            value_weights: weights,
            deriv_weight_left,
            deriv_weight_right,
            exactness_degree: 0,
        };
        rule.exactness_degree = rule.certify_exactness();
        rule
    }

    /// Largest `d` such that all monomials of degree `<= d` integrate to within
    /// [`EXACTNESS_TOL`].
    fn certify_exactness(&self) -> usize {
        let cap = 4 * self.nodes.len() + 8;
        let mut degree = 0;
        for m in 0..=cap {
            if (self.reference_monomial(m) - monomial_integral(m)).abs() > EXACTNESS_TOL {
                break;
            }
            degree = m;
        }
        degree
    }

    fn reference_monomial(&self, m: usize) -> f64 {
        let values: Vec<f64> = self.nodes.iter().map(|&t| t.powi(m as i32)).collect();
        let d = |t: f64| if m == 0 { 0.0 } else { m as f64 * t.powi(m as i32 - 1) };
        self.integrate_reference(&values, (d(-1.0), d(1.0)))
    }

    /// Rule applied on `[-1, 1]` to sampled data. `end_derivatives` are
    /// reference-variable derivatives at `(-1, 1)`; ignored for Lagrange kinds.
    pub fn integrate_reference(&self, values: &[f64], end_derivatives: (f64, f64)) -> f64 {
        let mut s: f64 = self
            .value_weights
            .iter()
            .zip(values)
            .map(|(w, v)| w * v)
            .sum();
        s += self.deriv_weight_left * end_derivatives.0 + self.deriv_weight_right * end_derivatives.1;
        s
    }

    /// Rule mapped to `slab`: value weights scale with `tau/2`, derivative
    /// weights with `(tau/2)^2`. `end_derivatives` are physical `d/dt` values.
    pub fn apply(&self, slab: &SlabMap, values: &[f64], end_derivatives: Option<(f64, f64)>) -> Result<f64> {
        if values.len() != self.nodes.len() {
            return Err(Error::DimensionMismatch {
                expected: self.nodes.len(),
                got: values.len(),
            });
        }
        let half = 0.5 * slab.tau();
        let derivs = match (self.kind.uses_derivatives(), end_derivatives) {
            (true, Some((l, r))) => (half * l, half * r),
            (false, _) => (0.0, 0.0),
            (true, None) => {
                return Err(Error::InvalidArgument(format!(
                    "{} rule requires endpoint derivatives",
                    self.kind
                )))
            }
        };
        Ok(half * self.integrate_reference(values, derivs))
    }

    /// Rule applied to a reference polynomial.
    pub fn integrate_poly(&self, p: &PolyCoeffs) -> f64 {
        let values: Vec<f64> = self.nodes.iter().map(|&t| p.eval(t)).collect();
        let d = p.derivative();
        self.integrate_reference(&values, (d.eval(-1.0), d.eval(1.0)))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Endpoints plus the roots of the Jacobi(2,2) polynomial of `interior_degree`.
fn hermite_nodes(interior_degree: usize) -> Vec<f64> {
    let mut nodes = vec![-1.0];
    nodes.extend(jacobi_roots(2, 2, interior_degree));
    nodes.push(1.0);
    nodes
}

fn interpolation_functionals(kind: QuadKind, nodes: &[f64]) -> Vec<NodalFunctional> {
    let mut f = Vec::with_capacity(nodes.len() + 2);
    if kind.uses_derivatives() {
        f.push(NodalFunctional::Derivative { at: -1.0, order: 1 });
    }
    f.extend(nodes.iter().map(|&t| NodalFunctional::Value(t)));
    if kind.uses_derivatives() {
        f.push(NodalFunctional::Derivative { at: 1.0, order: 1 });
    }
    f
}

fn monomial_integral(m: usize) -> f64 {
    if m % 2 == 1 {
        0.0
    } else {
        2.0 / (m as f64 + 1.0)
    }
}

/// The interpolation operators attached to the rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterpKind {
    /// Hermite interpolation into `P_k` from `k - 1` values and two endpoint derivatives.
    Hermite,
    /// Lagrange interpolation into `P_{k-2}` at the `k - 1` Gauss points.
    Gauss,
    /// Lagrange interpolation into `P_{k-1}` at the `k` Gauss-Lobatto points.
    GaussLobatto,
}

/// Reference-interval interpolant of the given kind. `end_derivatives` are
/// reference derivatives at `(-1, 1)` and must be present exactly for
/// [`InterpKind::Hermite`].
pub fn interpolate(
    kind: InterpKind,
    k: usize,
    values_at_nodes: &[f64],
    end_derivatives: Option<(f64, f64)>,
) -> Result<PolyCoeffs> {
    let (rule_kind, with_derivs) = match kind {
        InterpKind::Hermite => (QuadKind::HermiteShort, true),
        InterpKind::Gauss => (QuadKind::Gauss, false),
        InterpKind::GaussLobatto => (QuadKind::GaussLobatto, false),
    };
    if k < 3 {
        return Err(Error::InvalidArgument(format!("interpolation needs k >= 3, got {k}")));
    }
    let nodes = interpolation_nodes(kind, k);
    if values_at_nodes.len() != nodes.len() {
        return Err(Error::DimensionMismatch {
            expected: nodes.len(),
            got: values_at_nodes.len(),
        });
    }
    let functionals = interpolation_functionals(rule_kind, &nodes);
    let mut data = Vec::with_capacity(functionals.len());
    match (with_derivs, end_derivatives) {
        (true, Some((l, r))) => {
            data.push(l);
            data.extend_from_slice(values_at_nodes);
            data.push(r);
        }
        (false, None) => data.extend_from_slice(values_at_nodes),
        (true, None) => {
            return Err(Error::InvalidArgument(
                "Hermite interpolation requires endpoint derivatives".into(),
            ))
        }
        (false, Some(_)) => {
            return Err(Error::InvalidArgument(
                "Lagrange interpolation takes no derivative data".into(),
            ))
        }
    }
    interpolate_functionals(&functionals, &data)
}

/// Nodes of the interpolation operator of `kind` at time degree `k`.
pub fn interpolation_nodes(kind: InterpKind, k: usize) -> Vec<f64> {
    match kind {
        InterpKind::Hermite => hermite_nodes(k - 3),
        InterpKind::Gauss => gauss_points(k - 1),
        InterpKind::GaussLobatto => lobatto_points(k),
    }
}

/// Functionals defining the Hermite interpolation `I^H` at degree `k`, in the
/// order `[d(-1), v(-1), v(interior)..., v(1), d(1)]`.
pub fn hermite_functionals(k: usize) -> Vec<NodalFunctional> {
    interpolation_functionals(QuadKind::HermiteShort, &hermite_nodes(k - 3))
}

/// The lifting kernel: the unique polynomial of degree `k + 1` annihilated by
/// the Hermite interpolation of degree `k` with second derivative 1 at `-1`.
pub fn theta_kernel(k: usize) -> Result<PolyCoeffs> {
    if k < 3 {
        return Err(Error::InvalidArgument(format!("lifting kernel needs k >= 3, got {k}")));
    }
    let mut functionals = hermite_functionals(k);
    let mut data = vec![0.0; functionals.len()];
    functionals.push(NodalFunctional::Derivative { at: -1.0, order: 2 });
    data.push(1.0);
    interpolate_functionals(&functionals, &data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn hermite_short_k3() {
        let r = QuadRule::build(QuadKind::HermiteShort, 3).unwrap();
        assert_eq!(r.nodes, vec![-1.0, 1.0]);
        assert_abs_diff_eq!(r.value_weights[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(r.value_weights[1], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(r.deriv_weight_left, 1.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(r.deriv_weight_right, -1.0 / 3.0, epsilon = 1e-14);
        assert_eq!(r.exactness_degree, 3);
    }

    #[test]
    fn gauss_lobatto_k3() {
        let r = QuadRule::build(QuadKind::GaussLobatto, 3).unwrap();
        assert_eq!(r.nodes, vec![-1.0, 0.0, 1.0]);
        for (w, e) in r.value_weights.iter().zip([1.0 / 3.0, 4.0 / 3.0, 1.0 / 3.0]) {
            assert_abs_diff_eq!(*w, e, epsilon = 1e-14);
        }
        assert_eq!(r.exactness_degree, 3);
    }

    #[test]
    fn gauss_k3() {
        let r = QuadRule::build(QuadKind::Gauss, 3).unwrap();
        let e = 1.0 / 3.0f64.sqrt();
        assert_abs_diff_eq!(r.nodes[0], -e, epsilon = 1e-15);
        assert_abs_diff_eq!(r.nodes[1], e, epsilon = 1e-15);
        assert_abs_diff_eq!(r.value_weights[0], 1.0, epsilon = 1e-14);
        assert_eq!(r.exactness_degree, 3);
        assert_eq!(r.deriv_weight_left, 0.0);
    }

    #[test]
    fn rejects_small_k() {
        assert!(QuadRule::build(QuadKind::Gauss, 2).is_err());
        assert!(QuadRule::build(QuadKind::HermiteLong, 4).is_err());
        assert!(theta_kernel(2).is_err());
    }

    #[test]
    fn apply_on_slab() {
        let r = QuadRule::build(QuadKind::HermiteShort, 3).unwrap();
        let slab = SlabMap::new(0.0, 1.0).unwrap();
        let vals: Vec<f64> = r.nodes.iter().map(|&s| slab.to_time(s).powi(3)).collect();
        let v = r.apply(&slab, &vals, Some((0.0, 3.0))).unwrap();
        assert_abs_diff_eq!(v, 0.25, epsilon = 1e-14);

        let gl = QuadRule::build(QuadKind::GaussLobatto, 3).unwrap();
        let slab = SlabMap::new(0.0, 2.0).unwrap();
        let vals: Vec<f64> = gl.nodes.iter().map(|&s| slab.to_time(s).powi(2)).collect();
        assert_abs_diff_eq!(gl.apply(&slab, &vals, None).unwrap(), 8.0 / 3.0, epsilon = 1e-14);

        for kind in QuadKind::ALL {
            let rule = QuadRule::build(kind, 6).unwrap();
            let slab = SlabMap::new(0.3, 0.55).unwrap();
            let vals = vec![1.7; rule.len()];
            let v = rule.apply(&slab, &vals, Some((0.0, 0.0))).unwrap();
            assert_abs_diff_eq!(v, 1.7 * 0.25, epsilon = 1e-14);
        }
        assert!(r.apply(&slab, &[1.0], Some((0.0, 0.0))).is_err());
        assert!(r.apply(&slab, &[1.0, 1.0], None).is_err());
    }

    #[test]
    fn interpolation_examples() {
        let z = interpolate(InterpKind::Hermite, 3, &[0.0, 0.0], Some((0.0, 0.0))).unwrap();
        assert_eq!(z.degree(0.0), None);

        let cubic = interpolate(InterpKind::Hermite, 3, &[-1.0, 1.0], Some((3.0, 3.0))).unwrap();
        let m = cubic.to_monomials();
        assert_abs_diff_eq!(m[3], 1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(m[1], 0.0, epsilon = 1e-13);

        let nodes = interpolation_nodes(InterpKind::GaussLobatto, 4);
        let vals: Vec<f64> = nodes.iter().map(|t| t.powi(4)).collect();
        let p = interpolate(InterpKind::GaussLobatto, 4, &vals, None).unwrap();
        assert!(p.degree(1e-13).unwrap() <= 3);
        for (t, v) in nodes.iter().zip(vals.iter()) {
            assert_abs_diff_eq!(p.eval(*t), *v, epsilon = 1e-13);
        }
        // Vandermonde oracle: nodes +-1, +-1/sqrt5 -> t^4 interpolant is (6 t^2 - 1)/5.
        assert_abs_diff_eq!(p.eval(0.0), -0.2, epsilon = 1e-13);

        assert!(interpolate(InterpKind::Gauss, 4, &[1.0, 2.0], None).is_err());
        assert!(interpolate(InterpKind::Hermite, 4, &[1.0, 2.0, 3.0], None).is_err());
    }

    #[test]
    fn theta_examples() {
        let t3 = theta_kernel(3).unwrap();
        // (t^2 - 1)^2 / 8
        let m = t3.to_monomials();
        for (a, e) in m.iter().zip([1.0 / 8.0, 0.0, -2.0 / 8.0, 0.0, 1.0 / 8.0]) {
            assert_abs_diff_eq!(*a, e, epsilon = 1e-13);
        }
        let t4 = theta_kernel(4).unwrap();
        // -t (t^2 - 1)^2 / 8
        let m = t4.to_monomials();
        for (a, e) in m.iter().zip([0.0, -1.0 / 8.0, 0.0, 2.0 / 8.0, 0.0, -1.0 / 8.0]) {
            assert_abs_diff_eq!(*a, e, epsilon = 1e-13);
        }
    }
}
