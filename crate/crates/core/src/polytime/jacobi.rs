//! Jacobi polynomials `P_n^{(alpha, beta)}` on `[-1, 1]` and their roots.

use nalgebra::{DMatrix, SymmetricEigen};

/// Value and first derivative of `P_n^{(alpha, beta)}(x)` from the three-term
/// recurrence.
pub fn jacobi_eval(alpha: u32, beta: u32, n: usize, x: f64) -> (f64, f64) {
    let value = jacobi_value(alpha as f64, beta as f64, n, x);
    let deriv = if n == 0 {
        0.0
    } else {
        0.5 * (n as f64 + alpha as f64 + beta as f64 + 1.0)
            * jacobi_value(alpha as f64 + 1.0, beta as f64 + 1.0, n - 1, x)
    };
    (value, deriv)
}

fn jacobi_value(a: f64, b: f64, n: usize, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut pm1 = 1.0;
    let mut p = (a + 1.0) + 0.5 * (a + b + 2.0) * (x - 1.0);
    for m in 2..=n {
        let m = m as f64;
        let s = 2.0 * m + a + b;
        let c1 = 2.0 * m * (m + a + b) * (s - 2.0);
        let c2 = (s - 1.0) * (s * (s - 2.0) * x + a * a - b * b);
        let c3 = 2.0 * (m + a - 1.0) * (m + b - 1.0) * s;
        let next = (c2 * p - c3 * pm1) / c1;
        pm1 = p;
        p = next;
    }
    p
}

/// Roots of `P_degree^{(alpha, beta)}`, ascending.
///
/// Golub-Welsch: eigenvalues of the symmetric Jacobi matrix of the
/// orthonormal recurrence, each followed by one Newton step on the
/// recurrence-evaluated polynomial.
pub fn jacobi_roots(alpha: u32, beta: u32, degree: usize) -> Vec<f64> {
    if degree == 0 {
        return Vec::new();
    }
    let a = alpha as f64;
    let b = beta as f64;
    let mut jm = DMatrix::<f64>::zeros(degree, degree);
    for j in 0..degree {
        let jf = j as f64;
        let s = 2.0 * jf + a + b;
        jm[(j, j)] = if j == 0 {
            (b - a) / (a + b + 2.0)
        } else {
            (b * b - a * a) / (s * (s + 2.0))
        };
        if j + 1 < degree {
            let i = jf + 1.0;
            let s = 2.0 * i + a + b;
            let num = 4.0 * i * (i + a) * (i + b) * (i + a + b);
            let den = s * s * (s + 1.0) * (s - 1.0);
            let off = (num / den).sqrt();
            jm[(j, j + 1)] = off;
            jm[(j + 1, j)] = off;
        }
    }
    let mut roots: Vec<f64> = SymmetricEigen::new(jm).eigenvalues.iter().copied().collect();
    roots.sort_by(|x, y| x.total_cmp(y));
    for r in roots.iter_mut() {
        let (p, dp) = jacobi_eval(alpha, beta, degree, *r);
        if dp != 0.0 {
            *r -= p / dp;
        }
    }
    // Exact symmetry for symmetric weights.
    if alpha == beta {
        for i in 0..degree / 2 {
            let m = 0.5 * (roots[degree - 1 - i] - roots[i]);
            roots[i] = -m;
            roots[degree - 1 - i] = m;
        }
        if degree % 2 == 1 {
            roots[degree / 2] = 0.0;
        }
    }
    roots
}

/// `npts` Gauss-Legendre points.
pub fn gauss_points(npts: usize) -> Vec<f64> {
    jacobi_roots(0, 0, npts)
}

/// `npts >= 2` Gauss-Lobatto points: the endpoints plus the Jacobi(1,1) roots.
pub fn lobatto_points(npts: usize) -> Vec<f64> {
    assert!(npts >= 2, "Gauss-Lobatto rule needs at least two points");
    let mut pts = vec![-1.0];
    pts.extend(jacobi_roots(1, 1, npts - 2));
    pts.push(1.0);
    pts
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Sign-change bisection on the recurrence-evaluated polynomial; independent
    /// of the eigenvalue route.
    fn bisection_roots(alpha: u32, beta: u32, n: usize) -> Vec<f64> {
        let grid = 20000;
        let f = |x: f64| jacobi_eval(alpha, beta, n, x).0;
        let mut roots = vec![];
        let mut x0 = -1.0;
        let mut f0 = f(x0);
        for i in 1..=grid {
            let x1 = -1.0 + 2.0 * i as f64 / grid as f64;
            let f1 = f(x1);
            if f0 == 0.0 {
                roots.push(x0);
            } else if f0 * f1 < 0.0 {
                let (mut lo, mut hi) = (x0, x1);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if f(lo) * f(mid) <= 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                roots.push(0.5 * (lo + hi));
            }
            x0 = x1;
            f0 = f1;
        }
        roots
    }

    #[test]
    fn trivial_degrees() {
        assert!(jacobi_roots(2, 2, 0).is_empty());
        assert_eq!(jacobi_roots(2, 2, 1), vec![0.0]);
    }

    #[test]
    fn jacobi22_degree_two_is_plus_minus_inv_sqrt7() {
        let r = jacobi_roots(2, 2, 2);
        let e = 1.0 / 7.0f64.sqrt();
        assert_abs_diff_eq!(r[0], -e, epsilon = 1e-14);
        assert_abs_diff_eq!(r[1], e, epsilon = 1e-14);
        assert_abs_diff_eq!(r[1], 0.377_964_473_009_227_2, epsilon = 1e-14);
    }

    #[test]
    fn eigen_route_agrees_with_bisection() {
        for &(a, b) in &[(0u32, 0u32), (1, 1), (2, 2)] {
            for n in 1..=12 {
                let gw = jacobi_roots(a, b, n);
                let bis = bisection_roots(a, b, n);
                assert_eq!(gw.len(), bis.len(), "({a},{b}) degree {n}");
                for (x, y) in gw.iter().zip(bis.iter()) {
                    assert_abs_diff_eq!(x, y, epsilon = 1e-13);
                }
            }
        }
    }

    #[test]
    fn legendre_and_lobatto_points() {
        let g = gauss_points(2);
        assert_abs_diff_eq!(g[1], 1.0 / 3.0f64.sqrt(), epsilon = 1e-15);
        let gl = lobatto_points(3);
        assert_eq!(gl, vec![-1.0, 0.0, 1.0]);
        // interior GLL points of 4-point rule: +-1/sqrt(5)
        let gl4 = lobatto_points(4);
        assert_abs_diff_eq!(gl4[2], 1.0 / 5.0f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let h = 1e-6;
        for n in 1..7 {
            let x = 0.37;
            let (_, d) = jacobi_eval(2, 2, n, x);
            let fd = (jacobi_eval(2, 2, n, x + h).0 - jacobi_eval(2, 2, n, x - h).0) / (2.0 * h);
            assert_abs_diff_eq!(d, fd, epsilon = 1e-6 * d.abs().max(1.0));
        }
    }
}
