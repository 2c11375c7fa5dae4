//! Trust-region interior point variant for inequality-only problems.
//!
//! The inner model at `(x, y)` for barrier parameter `mu` is
//! `m(d) = <psi, d> + <d, H d> / 2` with the condensed Hessian
//!
//! ```text
//! H = Hess f - sum_i y_i Hess g_i + G Y S^-1 G^T,     psi = grad f - mu sum_i grad g_i / g_i,
//! ```
//!
//! and the multiplier step `dy = -y + mu S^-1 1 - Y S^-1 G^T d` that makes an
//! interior solution of the subproblem coincide with the Newton step.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::kkt::{coefficient_matrix, kkt_residual, lagrangian_hessian_matrix, newton_step};
use crate::manifold::{Point, TangentBasis, TangentVector};
use crate::problem::{ConstrainedProblem, PrimalDualPoint};
use crate::ripm::{fraction_to_boundary, stopping_check, ForcingFunctions, OuterConfig, SolveReport, SolveStatus};

fn positive_constraints(prob: &ConstrainedProblem, x: &Point) -> Result<DVector<f64>> {
    let g = prob.ineq_values(x)?;
    if let Some((index, &value)) = g.iter().enumerate().find(|(_, &v)| !(v > 0.0)) {
        return Err(Error::NonpositiveConstraint { index, value });
    }
    Ok(g)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CondensedHessian {
    pub matrix: DMatrix<f64>,
    pub basis: TangentBasis,
    pub lambda_min: f64,
}

pub fn condensed_hessian(prob: &ConstrainedProblem, x: &Point, y: &DVector<f64>) -> Result<CondensedHessian> {
    let g = positive_constraints(prob, x)?;
    let basis = x.tangent_basis();
    let w = PrimalDualPoint::new(x.clone(), y.clone(), DVector::zeros(prob.p()));
    let mut h = lagrangian_hessian_matrix(prob, &w, &basis)?;
    let gg = coefficient_matrix(&basis, &prob.ineq_grads(x)?)?;
    let weights = DMatrix::from_diagonal(&y.component_div(&g));
    h += &gg * weights * gg.transpose();
    let h = (&h + h.transpose()) * 0.5;
    let lambda_min = min_eigenvalue(&h);
    Ok(CondensedHessian {
        matrix: h,
        basis,
        lambda_min,
    })
}

fn min_eigenvalue(h: &DMatrix<f64>) -> f64 {
    if h.is_empty() {
        return f64::INFINITY;
    }
    SymmetricEigen::new(h.clone()).eigenvalues.min()
}

/// `psi_mu(x) = grad f(x) - mu sum_i grad g_i(x) / g_i(x)`.
pub fn barrier_gradient(prob: &ConstrainedProblem, x: &Point, mu: f64) -> Result<TangentVector> {
    let g = positive_constraints(prob, x)?;
    let mut psi = prob.objective().grad(x);
    for (i, gi) in prob.ineq_grads(x)?.iter().enumerate() {
        psi.axpy(-mu / g[i], gi)?;
    }
    Ok(psi)
}

/// Log-barrier merit `f(x) - mu sum_i log g_i(x)`.
pub fn barrier_merit(prob: &ConstrainedProblem, x: &Point, mu: f64) -> Result<f64> {
    let g = positive_constraints(prob, x)?;
    Ok(prob.objective().value(x) - mu * g.iter().map(|v| v.ln()).sum::<f64>())
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrsSolution {
    /// Step coefficients in the basis the model was assembled in.
    pub step: DVector<f64>,
    pub nu: f64,
    pub on_boundary: bool,
    pub hard_case: bool,
    /// `|(H + nu I) d + psi|`.
    pub stationarity: f64,
    /// `|nu (delta - |d|)|`.
    pub complementarity: f64,
    /// `max(0, |d| - delta)`.
    pub infeasibility: f64,
    /// `lambda_min(H) + nu`.
    pub psd_margin: f64,
}

impl TrsSolution {
    pub fn certified(&self, tol: f64) -> bool {
        self.stationarity <= tol
            && self.complementarity <= tol
            && self.infeasibility <= tol
            && self.psd_margin >= -tol
    }
}

/// `<psi, d> + <d, H d> / 2`.
pub fn trs_model(h: &DMatrix<f64>, psi: &DVector<f64>, d: &DVector<f64>) -> f64 {
    psi.dot(d) + 0.5 * d.dot(&(h * d))
}

/// Flips `v` so its first entry that is not negligible is positive.
fn fix_sign(mut v: DVector<f64>) -> DVector<f64> {
    let scale = v.amax();
    if let Some(first) = v.iter().copied().find(|x| x.abs() > 1e-12 * scale) {
        if first < 0.0 {
            v.neg_mut();
        }
    }
    v
}

/// Global minimizer of the model over `|d| <= delta` via the eigensystem
/// of `H`.
pub fn solve_trs_exact(h: &DMatrix<f64>, psi: &DVector<f64>, delta: f64) -> Result<TrsSolution> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidConfig(format!("trust-region radius must be positive, got {delta}")));
    }
    let n = psi.len();
    if h.nrows() != n || h.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: h.nrows(),
        });
    }
    let hs = (h + h.transpose()) * 0.5;
    let eig = SymmetricEigen::new(hs.clone());
    let lam = &eig.eigenvalues;
    let q = &eig.eigenvectors;
    let a = q.tr_mul(psi);
    let lam_min = if n == 0 { 0.0 } else { lam.min() };
    let scale = 1.0 + lam.amax();
    let step_for = |nu: f64, skip_min: bool| -> DVector<f64> {
        let mut d = DVector::zeros(n);
        for i in 0..n {
            if skip_min && lam[i] - lam_min <= 1e-12 * scale {
                continue;
            }
            d -= q.column(i) * (a[i] / (lam[i] + nu));
        }
        d
    };

    let (step, nu, hard_case) = 'solve: {
        if n == 0 {
            break 'solve (DVector::zeros(0), 0.0, false);
        }
        if lam_min > 0.0 {
            let d = step_for(0.0, false);
            if d.norm() <= delta {
                break 'solve (d, 0.0, false);
            }
        }
        let lo = (-lam_min).max(0.0);
        let min_space: Vec<usize> = (0..n).filter(|&i| lam[i] - lam_min <= 1e-12 * scale).collect();
        let a_min = min_space.iter().map(|&i| a[i] * a[i]).sum::<f64>().sqrt();
        if lam_min <= 0.0 && a_min <= 1e-10 * (1.0 + psi.norm()) {
            let d_rest = step_for(lo, true);
            let rest = d_rest.norm();
            if rest <= delta {
                let tau = (delta * delta - rest * rest).max(0.0).sqrt();
                let v = fix_sign(q.column(min_space[0]).into_owned());
                break 'solve (d_rest + v * tau, lo, true);
            }
        }
        // Secular equation 1/|d(nu)| = 1/delta on (lo, lo + |psi| / delta].
        let phi = |nu: f64| -> (f64, f64) {
            let mut s = 0.0;
            let mut ds = 0.0;
            for i in 0..n {
                let den = lam[i] + nu;
                s += a[i] * a[i] / (den * den);
                ds += -2.0 * a[i] * a[i] / (den * den * den);
            }
            (s.sqrt(), ds)
        };
        let (mut left, mut right) = (lo, lo + psi.norm() / delta);
        let mut nu = right;
        for _ in 0..200 {
            let (norm, dsq) = phi(nu);
            if (norm - delta).abs() <= 1e-14 * delta {
                break;
            }
            if norm > delta {
                left = nu;
            } else {
                right = nu;
            }
            // Newton on 1/|d| - 1/delta, whose derivative is -d(|d|^2)/(2 |d|^3).
            let g = 1.0 / norm - 1.0 / delta;
            let dg = -dsq / (2.0 * norm * norm * norm);
            let mut next = nu - g / dg;
            if !(next > left && next < right) || !next.is_finite() {
                next = 0.5 * (left + right);
            }
            if (right - left) <= 1e-15 * right.max(1.0) {
                break;
            }
            nu = next;
        }
        (step_for(nu, false), nu, false)
    };

    let norm = step.norm();
    let stationarity = (&hs * &step + &step * nu + psi).norm();
    Ok(TrsSolution {
        on_boundary: (norm - delta).abs() <= 1e-10 * delta,
        hard_case,
        stationarity,
        complementarity: (nu * (delta - norm)).abs(),
        infeasibility: (norm - delta).max(0.0),
        psd_margin: lam_min + nu,
        step,
        nu,
    })
}

/// `dy = -y + mu S^-1 1 - Y S^-1 G^T d`.
pub fn y_step(
    prob: &ConstrainedProblem,
    x: &Point,
    y: &DVector<f64>,
    mu: f64,
    d: &TangentVector,
) -> Result<DVector<f64>> {
    let g = positive_constraints(prob, x)?;
    let gd = prob
        .ineq_grads(x)?
        .iter()
        .map(|gi| x.inner(gi, d))
        .collect::<Result<Vec<f64>>>()?;
    Ok(DVector::from_fn(prob.m(), |i, _| {
        -y[i] + mu / g[i] - y[i] / g[i] * gd[i]
    }))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SospCheck {
    pub passed: bool,
    pub lambda_min: f64,
}

pub fn sosp_test(lambda_min: f64, mu: f64, forcing: &ForcingFunctions) -> bool {
    lambda_min >= -forcing.eps_sosp(mu)
}

pub fn sosp_check(
    prob: &ConstrainedProblem,
    x: &Point,
    y: &DVector<f64>,
    mu: f64,
    forcing: &ForcingFunctions,
) -> Result<SospCheck> {
    let lambda_min = condensed_hessian(prob, x, y)?.lambda_min;
    Ok(SospCheck {
        passed: sosp_test(lambda_min, mu, forcing),
        lambda_min,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrustRegionConfig {
    pub outer: OuterConfig,
    /// Largest admissible radius.
    pub max_radius: f64,
    /// Radius of the first outer iteration.
    pub initial_radius: f64,
    /// Lower bound for the radius carried into the next outer iteration.
    pub min_initial_radius: f64,
    pub accept_ratio: f64,
    pub shrink_below: f64,
    pub grow_above: f64,
    pub shrink_factor: f64,
    pub grow_factor: f64,
    pub y_floor: f64,
}

impl Default for TrustRegionConfig {
    fn default() -> Self {
        TrustRegionConfig {
            outer: OuterConfig::default(),
            max_radius: 10.0,
            initial_radius: 1.0,
            min_initial_radius: 0.1,
            accept_ratio: 0.1,
            shrink_below: 0.25,
            grow_above: 0.75,
            shrink_factor: 0.25,
            grow_factor: 2.0,
            y_floor: 1e-12,
        }
    }
}

impl TrustRegionConfig {
    pub fn validate(&self) -> Result<()> {
        self.outer.validate()?;
        let ok = self.max_radius > 0.0
            && self.initial_radius > 0.0
            && self.initial_radius <= self.max_radius
            && self.min_initial_radius > 0.0
            && self.min_initial_radius <= self.max_radius
            && 0.0 < self.accept_ratio
            && self.accept_ratio <= self.shrink_below
            && self.shrink_below < self.grow_above
            && self.grow_above < 1.0
            && 0.0 < self.shrink_factor
            && self.shrink_factor < 1.0
            && self.grow_factor > 1.0
            && self.y_floor > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("inconsistent trust-region parameters: {self:?}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct InnerOutcome {
    point: PrimalDualPoint,
    iterations: usize,
    radius: f64,
    nu: f64,
    lambda_min: f64,
    merits: Vec<f64>,
    visited: Vec<PrimalDualPoint>,
    first_step_norm: f64,
}

fn trs_at(
    prob: &ConstrainedProblem,
    w: &PrimalDualPoint,
    mu: f64,
    delta: f64,
) -> Result<(CondensedHessian, DVector<f64>, TrsSolution)> {
    let h = condensed_hessian(prob, &w.x, &w.y)?;
    let psi = h.basis.coefficients(&barrier_gradient(prob, &w.x, mu)?)?;
    let trs = solve_trs_exact(&h.matrix, &psi, delta)?;
    Ok((h, psi, trs))
}

fn inner_trust_region(
    prob: &ConstrainedProblem,
    w0: &PrimalDualPoint,
    mu: f64,
    radius: f64,
    config: &TrustRegionConfig,
) -> Result<InnerOutcome> {
    let forcing = &config.outer.forcing;
    let tau = config.outer.tau;
    let mut w = w0.clone();
    let mut delta = radius;
    let mut merits = vec![barrier_merit(prob, &w.x, mu)?];
    let mut visited = Vec::new();
    let mut first_step_norm = None;
    for it in 0..config.outer.max_inner {
        let (h, psi, trs) = trs_at(prob, &w, mu, delta)?;
        let d = h.basis.vector(&trs.step)?;
        let dy = y_step(prob, &w.x, &w.y, mu, &d)?;
        first_step_norm.get_or_insert((d.norm().powi(2) + dy.norm_squared()).sqrt());
        let cand = PrimalDualPoint::new(w.x.retract(&d)?, &w.y + &dy, w.z.clone());
        if prob.is_strictly_feasible(&cand)? {
            let stop = stopping_check(prob, &cand, mu, forcing)?;
            let sosp = sosp_check(prob, &cand.x, &cand.y, mu, forcing)?;
            let done = kkt_residual(prob, &cand)? <= config.outer.kkt_stop_tol;
            if (stop.passed && sosp.passed) || done {
                visited.push(cand.clone());
                return Ok(InnerOutcome {
                    point: cand,
                    iterations: it,
                    radius: delta,
                    nu: trs.nu,
                    lambda_min: sosp.lambda_min,
                    merits,
                    visited,
                    first_step_norm: first_step_norm.unwrap_or(0.0),
                });
            }
        }

        // Damped trial step along the retracted arc.
        let g0 = prob.ineq_values(&w.x)?;
        let mut alpha: f64 = 1.0;
        let x_new = loop {
            if alpha < 1e-12 {
                break None;
            }
            let x = w.x.retract(&d.scaled(alpha))?;
            let g = prob.ineq_values(&x)?;
            if g.iter().zip(g0.iter()).all(|(&gn, &go)| gn >= (1.0 - tau) * go && gn > 0.0) {
                break Some(x);
            }
            alpha *= 0.5;
        };
        let mut rho = 0.0;
        if let Some(x_new) = x_new {
            let phi_old = *merits.last().unwrap();
            let phi_new = barrier_merit(prob, &x_new, mu)?;
            let ared = phi_old - phi_new;
            let pred = -trs_model(&h.matrix, &psi, &(&trs.step * alpha));
            rho = if pred > 1e-300 {
                ared / pred
            } else if ared >= 0.0 {
                1.0
            } else {
                0.0
            };
            if rho >= config.accept_ratio && ared >= 0.0 {
                let beta = fraction_to_boundary(&w.y, &dy, tau);
                let y_new = (&w.y + &dy * beta).map(|v| v.max(config.y_floor));
                w = PrimalDualPoint::new(x_new, y_new, w.z.clone());
                merits.push(phi_new);
                visited.push(w.clone());
            }
        }
        if rho < config.shrink_below {
            delta *= config.shrink_factor;
        } else if rho > config.grow_above && trs.on_boundary {
            delta = (delta * config.grow_factor).min(config.max_radius);
        }
        if delta < 1e-14 {
            return Err(Error::InnerStalled(format!(
                "trust region collapsed at mu = {mu:e} after {it} iterations"
            )));
        }
    }
    Err(Error::InnerStalled(format!(
        "iteration cap {} reached at mu = {mu:e}",
        config.outer.max_inner
    )))
}

/// Outer barrier loop with a trust-region inner iteration. Only problems
/// without equality constraints are accepted.
pub fn riptrm_solve(
    prob: &ConstrainedProblem,
    w0: &PrimalDualPoint,
    config: &TrustRegionConfig,
) -> Result<SolveReport> {
    config.validate()?;
    if prob.p() > 0 {
        return Err(Error::EqualityConstraintsUnsupported);
    }
    if !prob.is_strictly_feasible(w0)? {
        return Err(Error::NotStrictlyFeasible("outer iteration start".into()));
    }
    let outer = &config.outer;
    let mut report = SolveReport::new("riptrm", w0);
    let mut w = w0.clone();
    let mut mu = outer.schedule.mu0;
    let mut radius = config.initial_radius;
    for k in 0..outer.max_outer {
        if k > 0 {
            mu = outer.schedule.update(mu)?;
        }
        let inner = match inner_trust_region(prob, &w, mu, radius, config) {
            Ok(r) => r,
            Err(e) => {
                report.fail(e)?;
                break;
            }
        };
        radius = inner.radius.max(config.min_initial_radius);
        let check = stopping_check(prob, &inner.point, mu, &outer.forcing)?;
        let mut row = crate::ripm::trace_row(k, mu, &check, inner.iterations);
        row.tr_radius = Some(inner.radius);
        row.tr_multiplier = Some(inner.nu);
        row.lambda_min_h = Some(inner.lambda_min);
        report.trace.push(row);
        report.step_norms.push(inner.first_step_norm);
        report.inner_merits.push(inner.merits);
        report.inner_points.extend(inner.visited.into_iter().map(|p| (k, p)));
        report.iterates.push(inner.point.clone());
        w = inner.point;
        if kkt_residual(prob, &w)? <= outer.kkt_stop_tol {
            report.status = SolveStatus::Converged;
            break;
        }
    }
    report.finish(prob)?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceReport {
    pub trs_dx: TangentVector,
    pub trs_dy: DVector<f64>,
    pub newton_dx: TangentVector,
    pub newton_dy: DVector<f64>,
    pub dx_diff: f64,
    pub dy_diff: f64,
}

impl EquivalenceReport {
    pub fn max_diff(&self) -> f64 {
        self.dx_diff.max(self.dy_diff)
    }
}

/// Compares the subproblem step (with its multiplier step) against the
/// Newton step on `F(.; mu)` when the subproblem solution is interior.
pub fn newton_equivalence_check(
    prob: &ConstrainedProblem,
    w: &PrimalDualPoint,
    mu: f64,
    delta: f64,
) -> Result<EquivalenceReport> {
    if prob.p() > 0 {
        return Err(Error::EqualityConstraintsUnsupported);
    }
    let (h, _, trs) = trs_at(prob, w, mu, delta)?;
    let norm = trs.step.norm();
    if norm >= delta - 1e-12 {
        return Err(Error::NotInterior { norm, radius: delta });
    }
    let trs_dx = h.basis.vector(&trs.step)?;
    let trs_dy = y_step(prob, &w.x, &w.y, mu, &trs_dx)?;
    let newton = newton_step(prob, w, mu, crate::kkt::DEFAULT_CONDITION_CAP)?;
    Ok(EquivalenceReport {
        dx_diff: (trs_dx.coords() - newton.dx.coords()).amax(),
        dy_diff: (&trs_dy - &newton.dy).amax(),
        trs_dx,
        trs_dy,
        newton_dx: newton.dx,
        newton_dy: newton.dy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{builtin_problem, builtin_start};
    use nalgebra::{dmatrix, dvector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn t1_point(x: f64) -> (ConstrainedProblem, Point) {
        let (prob, _) = builtin_problem("T1").unwrap();
        let p = prob.point(&[x]).unwrap();
        (prob, p)
    }

    #[test]
    fn condensed_hessian_t1() {
        let (prob, x) = t1_point(0.4);
        let h = condensed_hessian(&prob, &x, &dvector![1.7]).unwrap();
        assert!((h.matrix[(0, 0)] - 1.7 / 0.4).abs() < 1e-15);
        let mu = 0.01;
        let (prob, x) = t1_point(mu);
        let h = condensed_hessian(&prob, &x, &dvector![1.0]).unwrap();
        assert!((h.lambda_min - 1.0 / mu).abs() < 1e-12);
        let (prob, x) = t1_point(0.0);
        assert_eq!(
            condensed_hessian(&prob, &x, &dvector![1.0]),
            Err(Error::NonpositiveConstraint { index: 0, value: 0.0 })
        );
    }

    #[test]
    fn condensed_hessian_is_symmetric_on_t2() {
        let (prob, _) = builtin_problem("T2").unwrap();
        let w = builtin_start("T2").unwrap();
        let h = condensed_hessian(&prob, &w.x, &w.y).unwrap();
        assert!((&h.matrix - h.matrix.transpose()).amax() <= 1e-10);
    }

    #[test]
    fn barrier_gradient_examples() {
        let (prob, x) = t1_point(0.4);
        let psi = barrier_gradient(&prob, &x, 0.1).unwrap();
        assert!((psi.coords()[0] - (1.0 - 0.1 / 0.4)).abs() < 1e-15);
        let (prob, x) = t1_point(0.1);
        assert_eq!(barrier_gradient(&prob, &x, 0.1).unwrap().coords()[0], 0.0);
        let (prob, x) = t1_point(0.3);
        assert_eq!(barrier_gradient(&prob, &x, 0.0).unwrap(), prob.objective().grad(&x));
    }

    #[test]
    fn barrier_gradient_matches_merit_differences() {
        let (prob, _) = builtin_problem("T2").unwrap();
        let x = prob.point(&[0.8, -0.6]).unwrap();
        let mu = 0.05;
        let psi = barrier_gradient(&prob, &x, mu).unwrap();
        let basis = x.tangent_basis();
        let v = basis.column(0);
        let h = 1e-6;
        let fd = (barrier_merit(&prob, &x.retract(&v.scaled(h)).unwrap(), mu).unwrap()
            - barrier_merit(&prob, &x.retract(&v.scaled(-h)).unwrap(), mu).unwrap())
            / (2.0 * h);
        assert!((fd - x.inner(&psi, &v).unwrap()).abs() <= 1e-8);
    }

    #[test]
    fn trs_interior_example() {
        let s = solve_trs_exact(&DMatrix::identity(2, 2), &dvector![0.1, 0.0], 1.0).unwrap();
        assert_eq!(s.step, dvector![-0.1, 0.0]);
        assert_eq!(s.nu, 0.0);
        assert!(!s.on_boundary && s.certified(1e-12));
    }

    #[test]
    fn trs_boundary_example() {
        let s = solve_trs_exact(&DMatrix::identity(2, 2), &dvector![1.0, 0.0], 0.5).unwrap();
        assert!((s.nu - 1.0).abs() <= 1e-12);
        assert!((&s.step - dvector![-0.5, 0.0]).amax() <= 1e-12);
        assert!(s.on_boundary && s.certified(1e-10));
    }

    #[test]
    fn trs_hard_case_example() {
        let h = dmatrix![-1.0, 0.0; 0.0, 1.0];
        let psi = dvector![0.0, 1.0];
        let s = solve_trs_exact(&h, &psi, 1.0).unwrap();
        assert!(s.hard_case);
        assert!((s.nu - 1.0).abs() <= 1e-12);
        assert!((&s.step - dvector![0.75f64.sqrt(), -0.5]).amax() <= 1e-12);
        let mirrored = dvector![-(0.75f64.sqrt()), -0.5];
        assert!((trs_model(&h, &psi, &s.step) - trs_model(&h, &psi, &mirrored)).abs() <= 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let best = (0..10_000)
            .map(|_| {
                let v = dvector![rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal)];
                let r = rng.random::<f64>().sqrt();
                trs_model(&h, &psi, &(v.normalize() * r))
            })
            .fold(f64::INFINITY, f64::min);
        assert!(trs_model(&h, &psi, &s.step) <= best + 1e-9);
    }

    #[test]
    fn trs_negative_curvature_with_gradient() {
        let h = dmatrix![-2.0, 0.5; 0.5, 0.3];
        let psi = dvector![0.3, -0.2];
        for delta in [0.1, 1.0, 10.0] {
            let s = solve_trs_exact(&h, &psi, delta).unwrap();
            assert!(s.on_boundary && s.certified(1e-8), "{delta}: {s:?}");
        }
    }

    #[test]
    fn trs_rejects_bad_radius() {
        assert!(solve_trs_exact(&DMatrix::identity(1, 1), &dvector![1.0], 0.0).is_err());
    }

    #[test]
    fn y_step_examples() {
        let mu = 0.2;
        let (prob, x) = t1_point(mu);
        let dy = y_step(&prob, &x, &dvector![1.0], mu, &x.zero_tangent()).unwrap();
        assert_eq!(dy[0], 0.0);
        let (prob, x) = t1_point(1.0);
        let d = x.tangent(dvector![-0.5]).unwrap();
        let dy = y_step(&prob, &x, &dvector![1.0], 0.5, &d).unwrap();
        assert_eq!(dy[0], 0.0);
        let (prob, _) = builtin_problem("T2").unwrap();
        let x = prob.point(&[0.8, -0.6]).unwrap();
        let g = prob.ineq_values(&x).unwrap();
        let y = g.map(|v| 0.03 / v);
        let dy = y_step(&prob, &x, &y, 0.03, &x.zero_tangent()).unwrap();
        assert!(dy.amax() <= 1e-15);
    }

    #[test]
    fn sosp_examples() {
        let f = ForcingFunctions::default();
        let (prob, x) = t1_point(0.01);
        let c = sosp_check(&prob, &x, &dvector![1.0], 0.01, &f).unwrap();
        assert!(c.passed && c.lambda_min > 0.0);
        let mu = 0.1;
        assert!(!sosp_test(-2.0 * f.eps_sosp(mu), mu, &f));
        assert!(sosp_test(-mu / 2.0, mu, &f));
    }

    #[test]
    fn newton_equivalence_examples() {
        let (prob, _) = builtin_problem("T1").unwrap();
        let mu = 0.1;
        let w = PrimalDualPoint::new(prob.point(&[mu]).unwrap(), dvector![1.0], dvector![]);
        let r = newton_equivalence_check(&prob, &w, mu, 10.0).unwrap();
        assert!(r.trs_dx.norm() == 0.0 && r.newton_dx.norm() == 0.0 && r.max_diff() == 0.0);
        let w = PrimalDualPoint::new(prob.point(&[0.2]).unwrap(), dvector![1.0], dvector![]);
        let r = newton_equivalence_check(&prob, &w, mu, 10.0).unwrap();
        assert!(r.max_diff() <= 1e-10);
        assert!(matches!(
            newton_equivalence_check(&prob, &w, mu, 0.01),
            Err(Error::NotInterior { .. })
        ));
    }

    #[test]
    fn riptrm_rejects_equalities() {
        let (prob, _) = builtin_problem("T3").unwrap();
        assert_eq!(
            riptrm_solve(&prob, &builtin_start("T3").unwrap(), &TrustRegionConfig::default()),
            Err(Error::EqualityConstraintsUnsupported)
        );
    }

    #[test]
    fn riptrm_solves_t1_and_t2() {
        for name in ["T1", "T2"] {
            let (prob, r) = builtin_problem(name).unwrap();
            let rep = riptrm_solve(&prob, &builtin_start(name).unwrap(), &TrustRegionConfig::default())
                .unwrap()
                .with_reference(&prob, &r)
                .unwrap();
            assert_eq!(rep.status, SolveStatus::Converged, "{name}: {:?}", rep.failure);
            assert!(prob.distance(&rep.final_point, &r.point).unwrap() <= 1e-8);
            for m in &rep.inner_merits {
                assert!(m.windows(2).all(|p| p[1] <= p[0]));
            }
            assert!(rep.trace.iter().all(|t| t.tr_radius.is_some() && t.lambda_min_h.is_some()));
        }
    }

    #[test]
    fn riptrm_t1_returns_at_first_check() {
        let (prob, _) = builtin_problem("T1").unwrap();
        let rep = riptrm_solve(&prob, &builtin_start("T1").unwrap(), &TrustRegionConfig::default()).unwrap();
        assert!(rep.trace.iter().all(|t| t.inner_iters == 0));
    }
}
