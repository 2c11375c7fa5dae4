//! Barrier KKT vector field, its Jacobian in a tangent basis, Newton steps
//! and the extrapolated start point of the outer iteration.
//!
//! The field is
//!
//! ```text
//! F(x, y, z; mu) = ( grad_x L(x, y, z),  S(x) y - mu 1,  h(x) ),   S(x) = diag(g(x))
//! ```
//!
//! and its Jacobian does not depend on `mu`. In an orthonormal basis of
//! `T_x M` with gradient-coefficient matrices `G_g` (d x m) and `G_h` (d x p):
//!
//! ```text
//! [ Hess_x L   -G_g   G_h ]
//! [ Y G_g^T     S      0  ]
//! [ G_h^T       0      0  ]
//! ```

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::manifold::{TangentBasis, TangentVector};
use crate::problem::{ConstrainedProblem, PrimalDualPoint};

pub const DEFAULT_CONDITION_CAP: f64 = 1e12;

/// Value of `F(omega; mu)`, block by block.
#[derive(Debug, Clone, PartialEq)]
pub struct BarrierKktValue {
    pub grad_block: TangentVector,
    pub compl_block: DVector<f64>,
    pub eq_block: DVector<f64>,
}

impl BarrierKktValue {
    pub fn grad_norm(&self) -> f64 {
        self.grad_block.norm()
    }

    pub fn compl_norm(&self) -> f64 {
        self.compl_block.norm()
    }

    pub fn eq_norm(&self) -> f64 {
        self.eq_block.norm()
    }

    pub fn norm(&self) -> f64 {
        (self.grad_norm().powi(2) + self.compl_norm().powi(2) + self.eq_norm().powi(2)).sqrt()
    }

    /// Stacked coordinates `(B^T grad, compl, eq)` in the given basis.
    pub fn coefficients(&self, basis: &TangentBasis) -> Result<DVector<f64>> {
        let g = basis.coefficients(&self.grad_block)?;
        let mut out = DVector::zeros(g.len() + self.compl_block.len() + self.eq_block.len());
        out.rows_mut(0, g.len()).copy_from(&g);
        out.rows_mut(g.len(), self.compl_block.len())
            .copy_from(&self.compl_block);
        out.rows_mut(g.len() + self.compl_block.len(), self.eq_block.len())
            .copy_from(&self.eq_block);
        Ok(out)
    }
}

pub fn barrier_kkt(prob: &ConstrainedProblem, w: &PrimalDualPoint, mu: f64) -> Result<BarrierKktValue> {
    let grad_block = prob.lagrangian_grad(w)?;
    let g = prob.ineq_values(&w.x)?;
    let compl_block = g.component_mul(&w.y).add_scalar(-mu);
    let eq_block = prob.eq_values(&w.x)?;
    Ok(BarrierKktValue {
        grad_block,
        compl_block,
        eq_block,
    })
}

/// KKT residual of the unrelaxed system: `|F(omega; 0)|` plus the violation
/// of `g(x) >= 0` and `y >= 0`.
pub fn kkt_residual(prob: &ConstrainedProblem, w: &PrimalDualPoint) -> Result<f64> {
    let f = barrier_kkt(prob, w, 0.0)?;
    let g = prob.ineq_values(&w.x)?;
    let infeas: f64 = g
        .iter()
        .chain(w.y.iter())
        .map(|&v| v.min(0.0).powi(2))
        .sum();
    Ok((f.norm().powi(2) + infeas).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct JacobianMatrix {
    pub matrix: DMatrix<f64>,
    pub basis: TangentBasis,
}

/// Coefficient matrix whose columns are the given tangent vectors in `basis`.
pub(crate) fn coefficient_matrix(basis: &TangentBasis, vs: &[TangentVector]) -> Result<DMatrix<f64>> {
    let mut out = DMatrix::zeros(basis.dim(), vs.len());
    for (j, v) in vs.iter().enumerate() {
        out.set_column(j, &basis.coefficients(v)?);
    }
    Ok(out)
}

/// Matrix of `Hess_x L(omega)` in `basis`, symmetrized.
pub(crate) fn lagrangian_hessian_matrix(
    prob: &ConstrainedProblem,
    w: &PrimalDualPoint,
    basis: &TangentBasis,
) -> Result<DMatrix<f64>> {
    let d = basis.dim();
    let mut hess = DMatrix::zeros(d, d);
    for j in 0..d {
        let hv = prob.lagrangian_hess_vec(w, &basis.column(j))?;
        hess.set_column(j, &basis.coefficients(&hv)?);
    }
    Ok((&hess + hess.transpose()) * 0.5)
}

pub fn assemble_jacobian(
    prob: &ConstrainedProblem,
    w: &PrimalDualPoint,
    basis: &TangentBasis,
) -> Result<JacobianMatrix> {
    prob.check_omega(w)?;
    if basis.base() != &w.x {
        return Err(Error::BaseMismatch);
    }
    let (d, m, p) = (basis.dim(), prob.m(), prob.p());
    let gg = coefficient_matrix(basis, &prob.ineq_grads(&w.x)?)?;
    let gh = coefficient_matrix(basis, &prob.eq_grads(&w.x)?)?;
    let s = prob.ineq_values(&w.x)?;

    let mut j = DMatrix::zeros(d + m + p, d + m + p);
    j.view_mut((0, 0), (d, d))
        .copy_from(&lagrangian_hessian_matrix(prob, w, basis)?);
    j.view_mut((0, d), (d, m)).copy_from(&(-&gg));
    j.view_mut((0, d + m), (d, p)).copy_from(&gh);
    for i in 0..m {
        let row = gg.column(i).transpose() * w.y[i];
        j.view_mut((d + i, 0), (1, d)).copy_from(&row);
        j[(d + i, d + i)] = s[i];
    }
    j.view_mut((d + m, 0), (p, d)).copy_from(&gh.transpose());
    Ok(JacobianMatrix {
        matrix: j,
        basis: basis.clone(),
    })
}

/// 2-norm condition number from the singular values (infinite when singular).
pub fn condition_estimate(a: &DMatrix<f64>) -> f64 {
    if a.is_empty() {
        return 1.0;
    }
    let sv = a.singular_values();
    let max = sv.max();
    let min = sv.min();
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonStep {
    pub dx: TangentVector,
    pub dy: DVector<f64>,
    pub dz: DVector<f64>,
    pub condition_estimate: f64,
}

impl NewtonStep {
    /// Product-metric norm of `(dx, dy, dz)`.
    pub fn norm(&self) -> f64 {
        (self.dx.norm().powi(2) + self.dy.norm_squared() + self.dz.norm_squared()).sqrt()
    }

    /// `(R_x(dx), y + dy, z + dz)`; no feasibility safeguard.
    pub fn apply(&self, w: &PrimalDualPoint) -> Result<PrimalDualPoint> {
        Ok(PrimalDualPoint {
            x: w.x.retract(&self.dx)?,
            y: &w.y + &self.dy,
            z: &w.z + &self.dz,
        })
    }
}

/// Solves `J(omega) d = -F(omega; mu)` by fully pivoted LU with iterative
/// refinement.
pub fn newton_step(
    prob: &ConstrainedProblem,
    w: &PrimalDualPoint,
    mu: f64,
    condition_cap: f64,
) -> Result<NewtonStep> {
    let basis = w.x.tangent_basis();
    let jac = assemble_jacobian(prob, w, &basis)?;
    let rhs = -barrier_kkt(prob, w, mu)?.coefficients(&basis)?;
    let condition = condition_estimate(&jac.matrix);
    if !(condition <= condition_cap) {
        return Err(Error::NearSingularJacobian { condition });
    }
    let lu = jac.matrix.clone().full_piv_lu();
    let mut sol = lu
        .solve(&rhs)
        .ok_or(Error::NearSingularJacobian { condition })?;
    let target = 1e-12 * rhs.norm().max(1.0);
    for _ in 0..3 {
        let resid = &rhs - &jac.matrix * &sol;
        if resid.norm() <= target {
            break;
        }
        if let Some(corr) = lu.solve(&resid) {
            sol += corr;
        }
    }
    let (d, m, p) = (basis.dim(), prob.m(), prob.p());
    Ok(NewtonStep {
        dx: basis.vector(&sol.rows(0, d).into_owned())?,
        dy: sol.rows(d, m).into_owned(),
        dz: sol.rows(d + m, p).into_owned(),
        condition_estimate: condition,
    })
}

/// Newton extrapolation `(R_x(dx), y + dy, z + dz)` toward `F(.; mu) = 0`.
/// The caller decides whether the result is strictly feasible.
pub fn extrapolate(
    prob: &ConstrainedProblem,
    w: &PrimalDualPoint,
    mu: f64,
    condition_cap: f64,
) -> Result<PrimalDualPoint> {
    newton_step(prob, w, mu, condition_cap)?.apply(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{builtin_problem, builtin_start, BUILTIN_NAMES};
    use nalgebra::dmatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn t1(x: f64, y: f64) -> (ConstrainedProblem, PrimalDualPoint) {
        let (prob, _) = builtin_problem("T1").unwrap();
        let w = PrimalDualPoint::new(prob.point(&[x]).unwrap(), vec![y], vec![]);
        (prob, w)
    }

    /// Central differences of `F(.; mu)` along basis directions (x through
    /// the retraction, multipliers directly), gradient block read off in the
    /// basis at the unperturbed point.
    fn fd_jacobian(prob: &ConstrainedProblem, w: &PrimalDualPoint, mu: f64) -> DMatrix<f64> {
        let basis = w.x.tangent_basis();
        let (d, m, p) = (basis.dim(), prob.m(), prob.p());
        let n = d + m + p;
        let scale = (w.x.coords().norm_squared() + w.y.norm_squared() + w.z.norm_squared()).sqrt();
        let h = 1e-6 * scale.max(1.0);
        let eval = |wt: &PrimalDualPoint| {
            let f = barrier_kkt(prob, wt, mu).unwrap();
            let mut v = DVector::zeros(n);
            v.rows_mut(0, d)
                .copy_from(&basis.columns().tr_mul(f.grad_block.coords()));
            v.rows_mut(d, m).copy_from(&f.compl_block);
            v.rows_mut(d + m, p).copy_from(&f.eq_block);
            v
        };
        let mut out = DMatrix::zeros(n, n);
        for k in 0..n {
            let shifted = |t: f64| {
                let mut wt = w.clone();
                if k < d {
                    wt.x = w.x.retract(&basis.column(k).scaled(t)).unwrap();
                } else if k < d + m {
                    wt.y[k - d] += t;
                } else {
                    wt.z[k - d - m] += t;
                }
                wt
            };
            let col = (eval(&shifted(h)) - eval(&shifted(-h))) / (2.0 * h);
            out.set_column(k, &col);
        }
        out
    }

    #[test]
    fn barrier_kkt_examples() {
        let mu0 = 0.3;
        let (prob, w) = t1(mu0, 1.0);
        let f = barrier_kkt(&prob, &w, mu0).unwrap();
        assert_eq!((f.grad_norm(), f.compl_norm()), (0.0, 0.0));
        let (prob, w) = t1(1.0, 1.0);
        let f = barrier_kkt(&prob, &w, 0.0).unwrap();
        assert_eq!(f.grad_block.coords()[0], 0.0);
        assert_eq!(f.compl_block[0], 1.0);
        for name in BUILTIN_NAMES {
            let (prob, r) = builtin_problem(name).unwrap();
            assert!(barrier_kkt(&prob, &r.point, 0.0).unwrap().norm() <= 1e-10);
            assert!(kkt_residual(&prob, &r.point).unwrap() <= 1e-10);
        }
    }

    #[test]
    fn kkt_residual_counts_sign_violations() {
        let (prob, w) = t1(0.0, -2.0);
        // grad: 1 - (-2) = 3; compl 0; y violation 2.
        assert!((kkt_residual(&prob, &w).unwrap() - 13f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn jacobian_t1_by_hand() {
        let (prob, w) = t1(0.4, 1.7);
        let jac = assemble_jacobian(&prob, &w, &w.x.tangent_basis()).unwrap();
        assert_eq!(jac.matrix, dmatrix![0.0, -1.0; 1.7, 0.4]);
    }

    #[test]
    fn jacobian_t3_hessian_block_is_identity() {
        let (prob, _) = builtin_problem("T3").unwrap();
        let w = PrimalDualPoint::new(prob.point(&[0.2, 0.9]).unwrap(), vec![0.4], vec![-1.0]);
        let jac = assemble_jacobian(&prob, &w, &w.x.tangent_basis()).unwrap();
        assert_eq!(jac.matrix.view((0, 0), (2, 2)), DMatrix::<f64>::identity(2, 2));
    }

    #[test]
    fn jacobian_rejects_foreign_basis() {
        let (prob, w) = t1(0.4, 1.7);
        let other = prob.point(&[0.5]).unwrap().tangent_basis();
        assert_eq!(assemble_jacobian(&prob, &w, &other), Err(Error::BaseMismatch));
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for name in BUILTIN_NAMES {
            let (prob, r) = builtin_problem(name).unwrap();
            for _ in 0..20 {
                let x0 = &r.point.x;
                let pert = x0
                    .tangent(DVector::from_fn(x0.coords().len(), |_, _| {
                        0.2 * rng.sample::<f64, _>(StandardNormal)
                    }))
                    .unwrap();
                let w = PrimalDualPoint::new(
                    x0.retract(&pert).unwrap(),
                    DVector::from_fn(prob.m(), |_, _| rng.random_range(0.05..2.0)),
                    DVector::from_fn(prob.p(), |_, _| rng.random_range(-1.0..1.0)),
                );
                let mu = rng.random_range(1e-3..1.0);
                let jac = assemble_jacobian(&prob, &w, &w.x.tangent_basis()).unwrap();
                let fd = fd_jacobian(&prob, &w, mu);
                let err = (&fd - &jac.matrix).amax() / jac.matrix.amax().max(1.0);
                assert!(err <= 1e-5, "{name}: {err}");
            }
        }
    }

    #[test]
    fn jacobian_is_independent_of_mu() {
        let (prob, _) = builtin_problem("T4").unwrap();
        let w = builtin_start("T4").unwrap();
        let basis = w.x.tangent_basis();
        let j0 = assemble_jacobian(&prob, &w, &basis).unwrap();
        for mu in [0.0, 0.1, 1.0] {
            // The assembled matrix takes no mu; the FD reproduction does.
            let fd = fd_jacobian(&prob, &w, mu);
            assert!((&fd - &j0.matrix).amax() <= 1e-6);
        }
        assert_eq!(assemble_jacobian(&prob, &w, &basis).unwrap(), j0);
    }

    #[test]
    fn newton_step_on_t1_central_path() {
        let (mu0, mu1) = (0.5, 0.25);
        let (prob, w) = t1(mu0, 1.0);
        let step = newton_step(&prob, &w, mu1, DEFAULT_CONDITION_CAP).unwrap();
        assert!((step.dx.coords()[0] - (mu1 - mu0)).abs() <= 1e-15);
        assert_eq!(step.dy[0], 0.0);
        let next = extrapolate(&prob, &w, mu1, DEFAULT_CONDITION_CAP).unwrap();
        assert_eq!(next.x.coords()[0], mu1);
        assert_eq!(next.y[0], 1.0);
    }

    #[test]
    fn newton_step_is_zero_at_roots() {
        for name in ["T1", "T2", "T3", "T4"] {
            let (prob, r) = builtin_problem(name).unwrap();
            let step = newton_step(&prob, &r.point, 0.0, DEFAULT_CONDITION_CAP).unwrap();
            assert!(step.norm() <= 1e-12, "{name}: {}", step.norm());
            assert!(step.condition_estimate <= 1e6, "{name}: {}", step.condition_estimate);
            let same = step.apply(&r.point).unwrap();
            assert!(prob.distance(&same, &r.point).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn newton_step_residual_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for name in BUILTIN_NAMES {
            let (prob, _) = builtin_problem(name).unwrap();
            let w = builtin_start(name).unwrap();
            let mu = rng.random_range(1e-4..0.5);
            let step = newton_step(&prob, &w, mu, DEFAULT_CONDITION_CAP).unwrap();
            let basis = w.x.tangent_basis();
            let jac = assemble_jacobian(&prob, &w, &basis).unwrap();
            let f = barrier_kkt(&prob, &w, mu).unwrap();
            let mut sol = DVector::zeros(jac.matrix.nrows());
            let d = basis.dim();
            sol.rows_mut(0, d).copy_from(&basis.coefficients(&step.dx).unwrap());
            sol.rows_mut(d, prob.m()).copy_from(&step.dy);
            sol.rows_mut(d + prob.m(), prob.p()).copy_from(&step.dz);
            let resid = &jac.matrix * sol + f.coefficients(&basis).unwrap();
            assert!(resid.norm() <= 1e-10 * f.norm().max(1.0), "{name}");
        }
    }

    #[test]
    fn singular_jacobian_is_reported() {
        // T1 at x = 0, y = 0: [[0, -1], [0, 0]].
        let (prob, w) = t1(0.0, 0.0);
        assert!(matches!(
            newton_step(&prob, &w, 0.1, DEFAULT_CONDITION_CAP),
            Err(Error::NearSingularJacobian { .. })
        ));
    }

    #[test]
    fn extrapolation_near_t2_solution_stays_interior() {
        let (prob, r) = builtin_problem("T2").unwrap();
        // Walk the central path approximately: start from a nearby interior
        // point and extrapolate with decreasing mu.
        let mut w = r.point.clone();
        w.x = prob.point(&[0.5 + 1e-3, -0.86]).unwrap();
        w.y[0] = r.point.y[0] * 1.001;
        for mu in [1e-3, 1e-4, 1e-5, 1e-6] {
            w = extrapolate(&prob, &w, mu, DEFAULT_CONDITION_CAP).unwrap();
            assert!(prob.is_strictly_feasible(&w).unwrap(), "mu = {mu}");
        }
    }
}
