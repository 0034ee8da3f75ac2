//! Direct LU: reverse Cuthill-McKee reordering followed by band Gaussian
//! elimination with partial pivoting.

use std::collections::VecDeque;

use super::csr::SparseMatrix;
use crate::error::{Error, Result};

/// A solver for `A x = b` with a fixed matrix. Implemented by [`LuFactorization`];
/// iterative solvers can plug in here later.
pub trait LinearSolver: Send + Sync {
    fn dim(&self) -> usize;
    fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>>;
}

/// Symmetric reverse Cuthill-McKee permutation of the pattern of `A + A^T`.
/// Returns `perm` with `perm[new] = old`.
pub fn reverse_cuthill_mckee(a: &SparseMatrix) -> Vec<usize> {
    let n = a.nrows();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for (j, _) in a.row(i) {
            if i != j {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    for nb in adj.iter_mut() {
        nb.sort_unstable();
        nb.dedup();
    }
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    for nb in adj.iter_mut() {
        nb.sort_by_key(|&j| (degree[j], j));
    }

    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&i| (degree[i], i));
    for &seed in &by_degree {
        if visited[seed] {
            continue;
        }
        let start = pseudo_peripheral(seed, &adj, &degree);
        visited[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &w in &adj[v] {
                if !visited[w] {
                    visited[w] = true;
                    queue.push_back(w);
                }
            }
        }
    }
    order.reverse();
    order
}

/// Repeated BFS from the last level towards a node of large eccentricity.
fn pseudo_peripheral(seed: usize, adj: &[Vec<usize>], degree: &[usize]) -> usize {
    let mut current = seed;
    let mut best_depth = 0;
    for _ in 0..4 {
        let (depth, last_level) = bfs_levels(current, adj);
        let candidate = *last_level
            .iter()
            .min_by_key(|&&v| (degree[v], v))
            .expect("non-empty level");
        if depth <= best_depth {
            break;
        }
        best_depth = depth;
        current = candidate;
    }
    current
}

fn bfs_levels(start: usize, adj: &[Vec<usize>]) -> (usize, Vec<usize>) {
    let mut level = vec![usize::MAX; adj.len()];
    level[start] = 0;
    let mut frontier = vec![start];
    let mut depth = 0;
    loop {
        let mut next = Vec::new();
        for &v in &frontier {
            for &w in &adj[v] {
                if level[w] == usize::MAX {
                    level[w] = depth + 1;
                    next.push(w);
                }
            }
        }
        if next.is_empty() {
            return (depth, frontier);
        }
        depth += 1;
        frontier = next;
    }
}

/// LU factors `P_r B = L U` of the reordered matrix `B = Q A Q^T`, stored in
/// band format.
#[derive(Debug, Clone)]
pub struct LuFactorization {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    band: Vec<f64>,
    pivots: Vec<usize>,
    perm: Vec<usize>,
}

impl LuFactorization {
    pub fn new(a: &SparseMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch {
                expected: a.nrows(),
                got: a.ncols(),
            });
        }
        let n = a.nrows();
        let perm = reverse_cuthill_mckee(a);
        let mut inv = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let (mut kl, mut ku) = (0usize, 0usize);
        for i in 0..n {
            for (j, _) in a.row(i) {
                let (pi, pj) = (inv[i], inv[j]);
                if pi > pj {
                    kl = kl.max(pi - pj);
                } else {
                    ku = ku.max(pj - pi);
                }
            }
        }
        let width = 2 * kl + ku + 1;
        let mut band = vec![0.0; n * width];
        for i in 0..n {
            for (j, v) in a.row(i) {
                let (pi, pj) = (inv[i], inv[j]);
                band[pi * width + pj + kl - pi] += v;
            }
        }
        let mut lu = LuFactorization {
            n,
            kl,
            ku,
            width,
            band,
            pivots: vec![0; n],
            perm,
        };
        lu.eliminate(a.max_abs())?;
        Ok(lu)
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        i * self.width + j + self.kl - i
    }

    fn eliminate(&mut self, scale: f64) -> Result<()> {
        let n = self.n;
        let tiny = f64::EPSILON * scale.max(f64::MIN_POSITIVE);
        let reach = self.kl + self.ku;
        for c in 0..n {
            let last = (c + self.kl).min(n - 1);
            let mut p = c;
            let mut best = self.band[self.idx(c, c)].abs();
            for r in c + 1..=last {
                let v = self.band[self.idx(r, c)].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best <= tiny {
                return Err(Error::SingularMatrix { pivot: c });
            }
            self.pivots[c] = p;
            let jend = (c + reach).min(n - 1);
            if p != c {
                for j in c..=jend {
                    let (a, b) = (self.idx(c, j), self.idx(p, j));
                    self.band.swap(a, b);
                }
            }
            let diag = self.band[self.idx(c, c)];
            let pivot_row = self.idx(c, c);
            for r in c + 1..=last {
                let rc = self.idx(r, c);
                let l = self.band[rc] / diag;
                if l == 0.0 {
                    continue;
                }
                self.band[rc] = l;
                let row_base = self.idx(r, c);
                for off in 1..=(jend - c) {
                    self.band[row_base + off] -= l * self.band[pivot_row + off];
                }
            }
        }
        Ok(())
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }
}

impl LinearSolver for LuFactorization {
    fn dim(&self) -> usize {
        self.n
    }

    fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        if rhs.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: rhs.len(),
            });
        }
        let mut y: Vec<f64> = self.perm.iter().map(|&old| rhs[old]).collect();
        for c in 0..n {
            let p = self.pivots[c];
            if p != c {
                y.swap(c, p);
            }
            let yc = y[c];
            if yc != 0.0 {
                let last = (c + self.kl).min(n - 1);
                for r in c + 1..=last {
                    y[r] -= self.band[self.idx(r, c)] * yc;
                }
            }
        }
        let reach = self.kl + self.ku;
        for i in (0..n).rev() {
            let base = self.idx(i, i);
            let jend = (i + reach).min(n - 1);
            let mut s = y[i];
            for off in 1..=(jend - i) {
                s -= self.band[base + off] * y[i + off];
            }
            y[i] = s / self.band[base];
        }
        let mut x = vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        Ok(x)
    }
}

/// Factorizes and solves once.
pub fn solve(a: &SparseMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    LuFactorization::new(a)?.solve(rhs)
}

/// `||A x - b|| / ||b||` in the Euclidean norm.
pub fn relative_residual(a: &SparseMatrix, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.matvec(x);
    let num: f64 = ax.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn conjugate_gradient(a: &SparseMatrix, b: &[f64], tol: f64) -> Vec<f64> {
        let n = b.len();
        let mut x = vec![0.0; n];
        let mut r = b.to_vec();
        let mut p = r.clone();
        let bnorm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut rr: f64 = r.iter().map(|v| v * v).sum();
        for _ in 0..10 * n {
            if rr.sqrt() <= tol * bnorm {
                break;
            }
            let ap = a.matvec(&p);
            let alpha = rr / p.iter().zip(&ap).map(|(u, v)| u * v).sum::<f64>();
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            let rr_new: f64 = r.iter().map(|v| v * v).sum();
            let beta = rr_new / rr;
            rr = rr_new;
            for i in 0..n {
                p[i] = r[i] + beta * p[i];
            }
        }
        x
    }

    /// 2D five-point Laplacian plus a shift: SPD, banded after reordering.
    fn laplacian(m: usize, shift: f64) -> SparseMatrix {
        let n = m * m;
        let mut t = vec![];
        for i in 0..m {
            for j in 0..m {
                let p = i * m + j;
                t.push((p, p, 4.0 + shift));
                if i > 0 {
                    t.push((p, p - m, -1.0));
                }
                if i + 1 < m {
                    t.push((p, p + m, -1.0));
                }
                if j > 0 {
                    t.push((p, p - 1, -1.0));
                }
                if j + 1 < m {
                    t.push((p, p + 1, -1.0));
                }
            }
        }
        SparseMatrix::from_triplets(n, n, &t).unwrap()
    }

    #[test]
    fn identity_and_permutation() {
        let b = vec![1.0, -2.0, 3.5];
        assert_eq!(solve(&SparseMatrix::identity(3), &b).unwrap(), b);
        let p = SparseMatrix::from_dense(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        let x = solve(&p, &[1.0, 2.0]).unwrap();
        assert_abs_diff_eq!(x[0], 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(x[1], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn singular_reports_pivot() {
        let a = SparseMatrix::from_dense(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
        match LuFactorization::new(&a) {
            Err(Error::SingularMatrix { pivot }) => assert_eq!(pivot, 1),
            other => panic!("expected singular, got {other:?}"),
        }
        let z = SparseMatrix::from_triplets(3, 3, &[(0, 0, 1.0), (2, 2, 1.0)]).unwrap();
        assert!(matches!(LuFactorization::new(&z), Err(Error::SingularMatrix { .. })));
    }

    #[test]
    fn random_nonsymmetric_systems() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let n = 30;
            let mut t = vec![];
            for i in 0..n {
                t.push((i, i, rng.random_range(-1.0..1.0)));
                for _ in 0..4 {
                    t.push((i, rng.random_range(0..n), rng.random_range(-1.0..1.0)));
                }
            }
            let a = SparseMatrix::from_triplets(n, n, &t).unwrap();
            let b: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            if let Ok(lu) = LuFactorization::new(&a) {
                let x = lu.solve(&b).unwrap();
                assert!(relative_residual(&a, &x, &b) < 1e-9);
            }
        }
    }

    #[test]
    fn agrees_with_conjugate_gradient_on_spd() {
        for &(m, shift) in &[(10usize, 0.0), (31, 0.1)] {
            let a = laplacian(m, shift);
            assert!(a.nrows() <= 1000);
            let b: Vec<f64> = (0..a.nrows()).map(|i| ((i * 7 % 13) as f64 - 6.0) / 6.0).collect();
            let x = solve(&a, &b).unwrap();
            let y = conjugate_gradient(&a, &b, 1e-15);
            let scale = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for (u, v) in x.iter().zip(&y) {
                assert!((u - v).abs() <= 1e-12 * scale.max(1.0), "{u} vs {v}");
            }
            assert!(relative_residual(&a, &x, &b) < 1e-13);
        }
    }

    #[test]
    fn rcm_is_a_permutation_and_narrows_band() {
        let a = laplacian(12, 0.0);
        // scramble the ordering
        let n = a.nrows();
        let scramble: Vec<usize> = (0..n).map(|i| (i * 37) % n).collect();
        let mut t = vec![];
        for i in 0..n {
            for (j, v) in a.row(i) {
                t.push((scramble[i], scramble[j], v));
            }
        }
        let s = SparseMatrix::from_triplets(n, n, &t).unwrap();
        let mut p = reverse_cuthill_mckee(&s);
        let lu = LuFactorization::new(&s).unwrap();
        assert!(lu.bandwidths().0 <= 16, "{:?}", lu.bandwidths());
        p.sort_unstable();
        assert_eq!(p, (0..n).collect::<Vec<_>>());
    }
}
