//! Structural checks of a discrete solution: endpoint collocation, interface
//! smoothness and the two identities satisfied by `cGP-C1` solutions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::march::{DiscreteSolution, SlabSolution};
use super::scheme::Scheme;
use super::system::{Forcing, SpatialOperators};
use crate::error::{Error, Result};
use crate::polytime::{cardinal_basis, hermite_functionals, lobatto_points, NodalFunctional, PolyCoeffs, QuadRule};

/// Random evaluation points per slab for [`evolution_residual`].
pub const EVOLUTION_POINTS_PER_SLAB: usize = 7;
const EVOLUTION_SEED: u64 = 0x37;

/// `(∂u⁰, ∂u¹, u⁰, u¹, I^H F)` at one quadrature node.
type NodeValues = (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>);

/// Largest residual found by each check (all relative).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructuralReport {
    pub collocation: f64,
    pub interface_jump: f64,
    pub evolution: f64,
    pub gl_identity: f64,
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn combine(terms: &[(f64, &[f64])]) -> Vec<f64> {
    let n = terms[0].1.len();
    let mut out = vec![0.0; n];
    for &(c, v) in terms {
        for (o, x) in out.iter_mut().zip(v) {
            *o += c * x;
        }
    }
    out
}

/// Largest residual `sup |Σ c_i v_i|` over all evaluations, relative to the
/// largest single term `sup |c_i v_i|` seen by the same check.
#[derive(Default)]
struct Relative {
    residual: f64,
    scale: f64,
}

impl Relative {
    fn add(&mut self, terms: &[(f64, &[f64])]) {
        let scale = terms.iter().map(|&(c, v)| c.abs() * sup(v)).fold(0.0, f64::max);
        self.scale = self.scale.max(scale);
        self.residual = self.residual.max(sup(&combine(terms)));
    }

    fn value(&self) -> f64 {
        if self.scale == 0.0 {
            0.0
        } else {
            self.residual / self.scale
        }
    }
}

/// Weak residuals of `∂_t^{d+1} u⁰ = ∂_t^d u¹` and
/// `M ∂_t^{d+1} u¹ + K ∂_t^d u⁰ = ∂_t^d F` at both ends of every slab, for
/// `d` below the scheme's smoothness.
pub fn collocation_residual(sol: &DiscreteSolution, ops: &dyn SpatialOperators, forcing: &dyn Forcing) -> f64 {
    let m = sol.scheme().smoothness();
    let mut acc: Vec<[Relative; 2]> = (0..m).map(|_| Default::default()).collect();
    for s in sol.slabs() {
        for end in [-1.0, 1.0] {
            let t = s.slab().to_time(end);
            for (d, [a, b]) in acc.iter_mut().enumerate() {
                let lo = s.eval_reference(end, d);
                let hi = s.eval_reference(end, d + 1);
                let m_hi0 = ops.mass().matvec(&hi.0);
                let m_lo1 = ops.mass().matvec(&lo.1);
                let m_hi1 = ops.mass().matvec(&hi.1);
                let k_lo0 = ops.stiffness().matvec(&lo.0);
                let f = forcing.load(t, d);
                a.add(&[(1.0, &m_hi0), (-1.0, &m_lo1)]);
                b.add(&[(1.0, &m_hi1), (1.0, &k_lo0), (-1.0, &f)]);
            }
        }
    }
    acc.iter().flatten().map(Relative::value).fold(0.0, f64::max)
}

/// Relative jumps of the derivatives `0..=smoothness` at interior time nodes.
pub fn interface_jump(sol: &DiscreteSolution) -> f64 {
    let m = sol.scheme().smoothness();
    let mut acc: Vec<[Relative; 2]> = (0..=m).map(|_| Default::default()).collect();
    for w in sol.slabs().windows(2) {
        for (d, [a, b]) in acc.iter_mut().enumerate() {
            let l = w[0].eval_reference(1.0, d);
            let r = w[1].eval_reference(-1.0, d);
            a.add(&[(1.0, &l.0), (-1.0, &r.0)]);
            b.add(&[(1.0, &l.1), (-1.0, &r.1)]);
        }
    }
    acc.iter().flatten().map(Relative::value).fold(0.0, f64::max)
}

/// Hermite interpolant `I^H F` on one slab, as load vectors at the cardinal
/// basis data.
struct HermiteLoads {
    basis: Vec<PolyCoeffs>,
    data: Vec<Vec<f64>>,
}

impl HermiteLoads {
    fn new(k: usize, slab: &SlabSolution, forcing: &dyn Forcing) -> Result<Self> {
        let functionals = hermite_functionals(k);
        let basis = cardinal_basis(&functionals)?;
        let half = 0.5 * slab.slab().tau();
        let data = functionals
            .iter()
            .map(|f| match *f {
                NodalFunctional::Value(s) => forcing.load(slab.slab().to_time(s), 0),
                NodalFunctional::Derivative { at, .. } => {
                    forcing.load(slab.slab().to_time(at), 1).iter().map(|v| half * v).collect()
                }
            })
            .collect();
        Ok(HermiteLoads { basis, data })
    }

    fn eval(&self, s: f64) -> Vec<f64> {
        let terms: Vec<(f64, &[f64])> = self.basis.iter().zip(&self.data).map(|(b, d)| (b.eval(s), d.as_slice())).collect();
        combine(&terms)
    }
}

fn require_c1(sol: &DiscreteSolution) -> Result<()> {
    if sol.scheme() != Scheme::CgpC1 {
        return Err(Error::InvalidArgument(format!(
            "identity check needs a {} solution, got {}",
            Scheme::CgpC1,
            sol.scheme()
        )));
    }
    Ok(())
}

/// Pointwise residual of `∂_t U + I^GL 𝒜_h U - P_h I^GL I^H F = 0` in weak
/// form at seeded random points of every slab.
pub fn evolution_residual(sol: &DiscreteSolution, ops: &dyn SpatialOperators, forcing: &dyn Forcing) -> Result<f64> {
    require_c1(sol)?;
    let k = sol.degree();
    let gl = lobatto_points(k);
    let lagrange = cardinal_basis(&gl.iter().map(|&s| NodalFunctional::Value(s)).collect::<Vec<_>>())?;
    let mut rng = ChaCha8Rng::seed_from_u64(EVOLUTION_SEED);
    let (mut a, mut b) = (Relative::default(), Relative::default());
    for s in sol.slabs() {
        let herm = HermiteLoads::new(k, s, forcing)?;
        let at_gl: Vec<(Vec<f64>, Vec<f64>, Vec<f64>)> = gl
            .iter()
            .map(|&x| {
                let (u0, u1) = s.eval_reference(x, 0);
                (u0, u1, herm.eval(x))
            })
            .collect();
        for _ in 0..EVOLUTION_POINTS_PER_SLAB {
            let x: f64 = rng.random_range(-1.0..=1.0);
            let l: Vec<f64> = lagrange.iter().map(|p| p.eval(x)).collect();
            let i_u0 = combine(&at_gl.iter().zip(&l).map(|(v, &c)| (c, v.0.as_slice())).collect::<Vec<_>>());
            let i_u1 = combine(&at_gl.iter().zip(&l).map(|(v, &c)| (c, v.1.as_slice())).collect::<Vec<_>>());
            let i_f = combine(&at_gl.iter().zip(&l).map(|(v, &c)| (c, v.2.as_slice())).collect::<Vec<_>>());
            let (d0, d1) = s.eval_reference(x, 1);
            let md0 = ops.mass().matvec(&d0);
            let mi1 = ops.mass().matvec(&i_u1);
            let md1 = ops.mass().matvec(&d1);
            let ki0 = ops.stiffness().matvec(&i_u0);
            a.add(&[(1.0, &md0), (-1.0, &mi1)]);
                b.add(&[(1.0, &md1), (1.0, &ki0), (-1.0, &i_f)]);
        }
    }
    Ok(a.value().max(b.value()))
}

/// Residual of the variational equations under the `k`-point Gauss-Lobatto
/// rule with `I^H F` on the right, for the Legendre tests of degree `< k - 1`.
pub fn gl_identity_residual(sol: &DiscreteSolution, ops: &dyn SpatialOperators, forcing: &dyn Forcing) -> Result<f64> {
    require_c1(sol)?;
    let k = sol.degree();
    let rule = QuadRule::lobatto(k);
    let (mut a, mut b) = (Relative::default(), Relative::default());
    for s in sol.slabs() {
        let herm = HermiteLoads::new(k, s, forcing)?;
        let pts: Vec<NodeValues> = rule
            .nodes
            .iter()
            .map(|&x| {
                let (d0, d1) = s.eval_reference(x, 1);
                let (u0, u1) = s.eval_reference(x, 0);
                (d0, d1, u0, u1, herm.eval(x))
            })
            .collect();
        for j in 0..k - 1 {
            let psi = PolyCoeffs::legendre(j);
            let w: Vec<f64> = rule.nodes.iter().zip(&rule.value_weights).map(|(&x, &w)| w * psi.eval(x)).collect();
            let sum = |pick: &dyn Fn(&NodeValues) -> &Vec<f64>| {
                combine(&pts.iter().zip(&w).map(|(p, &c)| (c, pick(p).as_slice())).collect::<Vec<_>>())
            };
            let md0 = ops.mass().matvec(&sum(&|p| &p.0));
            let mu1 = ops.mass().matvec(&sum(&|p| &p.3));
            let md1 = ops.mass().matvec(&sum(&|p| &p.1));
            let ku0 = ops.stiffness().matvec(&sum(&|p| &p.2));
            let f = sum(&|p| &p.4);
            a.add(&[(1.0, &md0), (-1.0, &mu1)]);
            b.add(&[(1.0, &md1), (1.0, &ku0), (-1.0, &f)]);
        }
    }
    Ok(a.value().max(b.value()))
}

/// Runs every check; the two identities only apply to `cGP-C1` and are
/// reported as zero otherwise.
pub fn structural_report(
    sol: &DiscreteSolution,
    ops: &dyn SpatialOperators,
    forcing: &dyn Forcing,
) -> Result<StructuralReport> {
    let c1 = sol.scheme() == Scheme::CgpC1;
    Ok(StructuralReport {
        collocation: collocation_residual(sol, ops, forcing),
        interface_jump: interface_jump(sol),
        evolution: if c1 { evolution_residual(sol, ops, forcing)? } else { 0.0 },
        gl_identity: if c1 { gl_identity_residual(sol, ops, forcing)? } else { 0.0 },
    })
}
