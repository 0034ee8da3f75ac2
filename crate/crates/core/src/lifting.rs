//! Post-processing of a `cGP-C1(k)` solution into a globally `C²` solution
//! of degree `k + 1` by adding one kernel polynomial per slab.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::polytime::theta_kernel;
use crate::slabsolver::{left_data, DiscreteSolution, Forcing, Scheme, SlabBasis, SlabSolution, SpatialOperators, StatePair};

/// One lifted slab `Ũ = U - K_n ϑ_n` together with its correction `K_n`.
#[derive(Debug, Clone)]
pub struct LiftedSlab {
    pub slab: SlabSolution,
    pub correction: StatePair,
}

/// Lifts every slab of `base` and returns the slabs with their corrections.
pub fn lift_slabs(base: &DiscreteSolution, ops: &dyn SpatialOperators, forcing: &dyn Forcing) -> Result<Vec<LiftedSlab>> {
    if base.scheme() != Scheme::CgpC1 {
        return Err(Error::InvalidArgument(format!(
            "lifting needs a {} solution, got {}",
            Scheme::CgpC1,
            base.scheme()
        )));
    }
    let k = base.degree();
    if k + 1 < Scheme::CgpC2.min_k() {
        return Err(Error::InvalidArgument(format!(
            "lifting needs k >= {}, got {k}",
            Scheme::CgpC2.min_k() - 1
        )));
    }
    if base.n_dof() != ops.n_dof() {
        return Err(Error::DimensionMismatch {
            expected: ops.n_dof(),
            got: base.n_dof(),
        });
    }
    let theta = theta_kernel(k)?;
    let first = &base.slabs()[0];
    let mut polys = first.basis().polys().to_vec();
    polys.push(theta);
    let basis = Arc::new(SlabBasis::new(polys));

    let mut out: Vec<LiftedSlab> = Vec::with_capacity(base.n_slabs());
    for (i, s) in base.slabs().iter().enumerate() {
        let wrap = |e: Error| Error::Slab {
            slab: i + 1,
            source: Box::new(e),
        };
        let target = match out.last() {
            None => {
                let t0 = s.slab().t_left();
                let mut data = left_data(2, ops, forcing, t0, s.eval_reference(-1.0, 0)).map_err(wrap)?;
                data.swap_remove(2)
            }
            Some(prev) => prev.slab.eval_reference(1.0, 2),
        };
        let own = s.eval_reference(-1.0, 2);
        let correction: StatePair = (
            own.0.iter().zip(&target.0).map(|(a, b)| a - b).collect(),
            own.1.iter().zip(&target.1).map(|(a, b)| a - b).collect(),
        );
        let half = 0.5 * s.slab().tau();
        let scale = -half * half;
        let [mut c0, mut c1] = s.coeffs().clone();
        c0.push(correction.0.iter().map(|v| scale * v).collect());
        c1.push(correction.1.iter().map(|v| scale * v).collect());
        let slab = SlabSolution::new(*s.slab(), Arc::clone(&basis), [c0, c1]).map_err(wrap)?;
        out.push(LiftedSlab { slab, correction });
    }
    Ok(out)
}

/// The lifted solution, tagged as `cGP-C2(k + 1)`.
pub fn lift(base: &DiscreteSolution, ops: &dyn SpatialOperators, forcing: &dyn Forcing) -> Result<DiscreteSolution> {
    let slabs = lift_slabs(base, ops, forcing)?.into_iter().map(|l| l.slab).collect();
    DiscreteSolution::new(Scheme::CgpC2, base.degree() + 1, base.tau(), slabs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytime::interpolation_nodes;
    use crate::polytime::InterpKind;
    use crate::slabsolver::{march, MatrixOperators, ZeroForcing};

    fn oscillator(scheme: Scheme, k: usize, tau: f64, t_end: f64) -> DiscreteSolution {
        let ops = MatrixOperators::oscillator(1.0);
        march(scheme, k, &ops, &ZeroForcing { n_dof: 1 }, (vec![1.0], vec![0.0]), tau, t_end).unwrap()
    }

    /// Sup-norm error of `u` against `cos t` over 40 samples per slab.
    fn sampled_error(sol: &DiscreteSolution) -> f64 {
        let n = 40 * sol.n_slabs();
        (0..=n)
            .map(|j| {
                let t = sol.end_time() * j as f64 / n as f64;
                (sol.evaluate(t, 0).unwrap().0[0] - t.cos()).abs()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn rejects_wrong_input() {
        let ops = MatrixOperators::oscillator(1.0);
        let z = ZeroForcing { n_dof: 1 };
        assert!(lift(&oscillator(Scheme::Cgp, 4, 0.1, 0.3), &ops, &z).is_err());
        assert!(lift(&oscillator(Scheme::CgpC1, 3, 0.1, 0.3), &ops, &z).is_err());
    }

    #[test]
    fn zero_solution_stays_zero() {
        let ops = MatrixOperators::new(
            crate::sparsela::SparseMatrix::identity(3),
            crate::sparsela::SparseMatrix::identity(3),
        )
        .unwrap();
        let z = ZeroForcing { n_dof: 3 };
        let base = march(Scheme::CgpC1, 4, &ops, &z, (vec![0.0; 3], vec![0.0; 3]), 0.1, 0.5).unwrap();
        for l in lift_slabs(&base, &ops, &z).unwrap() {
            assert!(l.correction.0.iter().chain(&l.correction.1).all(|v| *v == 0.0));
        }
    }

    #[test]
    fn matches_direct_c2_on_oscillator() {
        let ops = MatrixOperators::oscillator(1.0);
        let z = ZeroForcing { n_dof: 1 };
        let lifted = lift(&oscillator(Scheme::CgpC1, 4, 0.1, 1.0), &ops, &z).unwrap();
        let direct = oscillator(Scheme::CgpC2, 5, 0.1, 1.0);
        for j in 0..=200 {
            let t = j as f64 / 200.0;
            let a = lifted.evaluate(t, 0).unwrap();
            let b = direct.evaluate(t, 0).unwrap();
            assert!((a.0[0] - b.0[0]).abs() < 1e-12 && (a.1[0] - b.1[0]).abs() < 1e-12, "t = {t}");
        }
    }

    #[test]
    fn interfaces_are_c2() {
        let ops = MatrixOperators::oscillator(2.0);
        let z = ZeroForcing { n_dof: 1 };
        let base = march(Scheme::CgpC1, 5, &ops, &z, (vec![0.3], vec![1.0]), 0.05, 0.5).unwrap();
        let lifted = lift(&base, &ops, &z).unwrap();
        for t in &lifted.time_mesh()[1..lifted.n_slabs()] {
            for order in 0..=2 {
                let l = lifted.evaluate_left(*t, order).unwrap();
                let r = lifted.evaluate(*t, order).unwrap();
                assert!((l.0[0] - r.0[0]).abs() < 1e-10 && (l.1[0] - r.1[0]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn correction_vanishes_on_hermite_data() {
        let ops = MatrixOperators::oscillator(1.0);
        let z = ZeroForcing { n_dof: 1 };
        let base = oscillator(Scheme::CgpC1, 6, 0.2, 0.6);
        let lifted = lift(&base, &ops, &z).unwrap();
        let nodes = interpolation_nodes(InterpKind::Hermite, 6);
        for (b, l) in base.slabs().iter().zip(lifted.slabs()) {
            for &s in &nodes {
                assert!((b.eval_reference(s, 0).0[0] - l.eval_reference(s, 0).0[0]).abs() < 1e-14);
            }
            for s in [-1.0, 1.0] {
                assert!((b.eval_reference(s, 1).1[0] - l.eval_reference(s, 1).1[0]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn lifting_gains_one_order() {
        let ops = MatrixOperators::oscillator(1.0);
        let z = ZeroForcing { n_dof: 1 };
        let rate = |f: &dyn Fn(f64) -> DiscreteSolution| (sampled_error(&f(0.2)) / sampled_error(&f(0.1))).log2();
        let base = rate(&|tau| oscillator(Scheme::CgpC1, 4, tau, 1.0));
        let lifted = rate(&|tau| lift(&oscillator(Scheme::CgpC1, 4, tau, 1.0), &ops, &z).unwrap());
        assert!(base > 4.5 && base < 5.5, "base rate {base}");
        assert!(lifted > 5.5, "lifted rate {lifted}");
    }
}
