//! Numerical certificates for the local theory: constraint qualification,
//! strict complementarity and second-order sufficiency at a KKT point,
//! barrier-schedule checks, convergence-order estimation and
//! finite-difference validation of the oracles.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::kkt::{assemble_jacobian, barrier_kkt, coefficient_matrix, kkt_residual, lagrangian_hessian_matrix};
use crate::manifold::{Point, TangentVector};
use crate::problem::{ConstrainedProblem, PrimalDualPoint, ScalarField};
use crate::ripm::BarrierSchedule;
use crate::trace::{IterationTrace, ThetaBand};

/// Errors at or below this are treated as roundoff and excluded from rate fits.
pub const ERROR_FLOOR: f64 = 1e-14;

pub const KKT_PRECONDITION_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LicqResult {
    pub passed: bool,
    /// Smallest singular value of the unit-normalized active gradients
    /// (infinite when nothing is active).
    pub sigma_min: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScResult {
    pub passed: bool,
    pub min_max_yg: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SoscStatus {
    Pass,
    VacuousPass,
    Fail,
    /// Failed on the null-space cone while weakly active constraints exist.
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SoscResult {
    pub status: SoscStatus,
    pub min_rayleigh: Option<f64>,
    pub cone_dim: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegularityReport {
    pub active: Vec<usize>,
    pub licq: LicqResult,
    pub sc: ScResult,
    pub sosc: SoscResult,
}

impl RegularityReport {
    pub fn passed(&self) -> bool {
        self.licq.passed
            && self.sc.passed
            && matches!(self.sosc.status, SoscStatus::Pass | SoscStatus::VacuousPass)
    }
}

fn normalized_columns(mut a: DMatrix<f64>) -> DMatrix<f64> {
    for mut col in a.column_iter_mut() {
        let n = col.norm();
        if n > 0.0 {
            col /= n;
        }
    }
    a
}

fn hstack(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(a.nrows(), a.ncols() + b.ncols());
    out.columns_mut(0, a.ncols()).copy_from(a);
    out.columns_mut(a.ncols(), b.ncols()).copy_from(b);
    out
}

fn select_columns(a: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), idx.len(), |r, c| a[(r, idx[c])])
}

/// Orthonormal basis of the null space of `a^T` (columns of `a` are the
/// constraint normals), from the eigenvectors of `a a^T` with negligible
/// eigenvalue.
fn orthogonal_complement(a: &DMatrix<f64>, d: usize) -> DMatrix<f64> {
    if a.ncols() == 0 {
        return DMatrix::identity(d, d);
    }
    let eig = SymmetricEigen::new(a * a.transpose());
    let keep: Vec<usize> = (0..d).filter(|&i| eig.eigenvalues[i] <= 1e-10).collect();
    select_columns(&eig.eigenvectors, &keep)
}

pub fn regularity_check(prob: &ConstrainedProblem, w: &PrimalDualPoint, tol: f64) -> Result<RegularityReport> {
    let residual = kkt_residual(prob, w)?;
    if !(residual <= KKT_PRECONDITION_TOL) {
        return Err(Error::NotApproximatelyKkt { residual });
    }
    let basis = w.x.tangent_basis();
    let d = basis.dim();
    let g = prob.ineq_values(&w.x)?;
    let gg = coefficient_matrix(&basis, &prob.ineq_grads(&w.x)?)?;
    let gh = coefficient_matrix(&basis, &prob.eq_grads(&w.x)?)?;
    let active = prob.active_set(&w.x, tol)?;

    let normals = normalized_columns(hstack(&select_columns(&gg, &active), &gh));
    let sigma_min = if normals.ncols() == 0 {
        f64::INFINITY
    } else if normals.ncols() > d {
        0.0
    } else {
        normals.singular_values().min()
    };
    let licq = LicqResult {
        passed: sigma_min > tol,
        sigma_min,
    };

    let mut sc_pass = true;
    let mut min_max_yg = f64::INFINITY;
    for i in 0..prob.m() {
        let (y_zero, g_zero) = (w.y[i] <= tol, g[i] <= tol);
        sc_pass &= y_zero != g_zero;
        min_max_yg = min_max_yg.min(w.y[i].max(g[i]));
    }
    let sc = ScResult {
        passed: sc_pass,
        min_max_yg,
    };

    let strong: Vec<usize> = active.iter().copied().filter(|&i| w.y[i] > tol).collect();
    let weak = active.len() > strong.len();
    let cone = orthogonal_complement(&hstack(&select_columns(&gg, &strong), &gh), d);
    let sosc = if cone.ncols() == 0 {
        SoscResult {
            status: SoscStatus::VacuousPass,
            min_rayleigh: None,
            cone_dim: 0,
        }
    } else {
        let hess = lagrangian_hessian_matrix(prob, w, &basis)?;
        let reduced = cone.transpose() * hess * &cone;
        let lam = SymmetricEigen::new((&reduced + reduced.transpose()) * 0.5)
            .eigenvalues
            .min();
        let status = if lam > tol {
            SoscStatus::Pass
        } else if weak {
            SoscStatus::Inconclusive
        } else {
            SoscStatus::Fail
        };
        SoscResult {
            status,
            min_rayleigh: Some(lam),
            cone_dim: cone.ncols(),
        }
    };
    Ok(RegularityReport {
        active,
        licq,
        sc,
        sosc,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleReport {
    pub passed: bool,
    /// `log10 mu_k`, `k = 0..=steps`.
    pub log10_mu: Vec<f64>,
    /// `log10 (mu_k^2 / mu_{k+1})`.
    pub log10_square_ratio: Vec<f64>,
    /// `log10 (mu_{k+1} / mu_k)`.
    pub log10_step_ratio: Vec<f64>,
}

impl ScheduleReport {
    pub fn final_log10_mu(&self) -> f64 {
        *self.log10_mu.last().unwrap()
    }
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

/// Checks a barrier sequence given by its base-10 logarithms, so schedules
/// far below the smallest positive double are still decided exactly.
pub fn schedule_check_log10(log10_mu: &[f64]) -> Result<ScheduleReport> {
    if log10_mu.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "schedule check needs at least 3 steps, got {}",
            log10_mu.len().saturating_sub(1)
        )));
    }
    let sq: Vec<f64> = log10_mu.windows(2).map(|w| 2.0 * w[0] - w[1]).collect();
    let st: Vec<f64> = log10_mu.windows(2).map(|w| w[1] - w[0]).collect();
    let passed = strictly_decreasing(log10_mu)
        && strictly_decreasing(&sq)
        && strictly_decreasing(&st)
        && *sq.last().unwrap() < -3.0
        && st.last().unwrap() < st.first().unwrap();
    Ok(ScheduleReport {
        passed,
        log10_mu: log10_mu.to_vec(),
        log10_square_ratio: sq,
        log10_step_ratio: st,
    })
}

pub fn schedule_check(schedule: &BarrierSchedule, steps: usize) -> Result<ScheduleReport> {
    schedule.validate()?;
    let mut l = vec![schedule.mu0.log10()];
    for _ in 0..steps {
        let last = *l.last().unwrap();
        l.push(schedule.kappa.log10() + (1.0 + schedule.theta) * last);
    }
    schedule_check_log10(&l)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    /// Usable errors (sub-floor tail removed).
    pub errors: Vec<f64>,
    /// `e_{k+1} / e_k`.
    pub ratios: Vec<f64>,
    /// `log(e_{k+1}/e_k) / log(e_k/e_{k-1})`, `None` where the previous
    /// error did not decrease.
    pub orders: Vec<Option<f64>>,
    /// Median of the last three defined orders.
    pub fitted_order: Option<f64>,
    /// `|omega_{k+1} - omega*| / mu_k`, when the barrier values are known.
    pub theta_ratios: Vec<f64>,
}

fn usable_prefix(errors: &[f64]) -> &[f64] {
    let n = errors
        .iter()
        .position(|&e| !(e > ERROR_FLOOR && e.is_finite()))
        .unwrap_or(errors.len());
    &errors[..n]
}

fn order_from_logs(l0: f64, l1: f64, l2: f64) -> Option<f64> {
    let den = l1 - l0;
    (den < 0.0).then(|| (l2 - l1) / den)
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn convergence_order(errors: &[f64]) -> Result<RateReport> {
    let e = usable_prefix(errors);
    if e.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} usable errors above {ERROR_FLOOR:e}, need 3",
            e.len()
        )));
    }
    let logs: Vec<f64> = e.iter().map(|v| v.ln()).collect();
    let ratios = e.windows(2).map(|w| w[1] / w[0]).collect();
    let orders: Vec<Option<f64>> = logs
        .windows(3)
        .map(|w| order_from_logs(w[0], w[1], w[2]))
        .collect();
    let mut tail: Vec<f64> = orders.iter().flatten().rev().take(3).copied().collect();
    let fitted_order = (!tail.is_empty()).then(|| median(&mut tail));
    Ok(RateReport {
        errors: e.to_vec(),
        ratios,
        orders,
        fitted_order,
        theta_ratios: Vec::new(),
    })
}

/// Order estimate attached to each trace row: defined at row `k` when the
/// errors of rows `k-2..=k` are all above the floor and row `k-1` improved.
pub fn pointwise_orders(errors: &[Option<f64>]) -> Vec<Option<f64>> {
    let usable = |e: Option<f64>| e.filter(|v| *v > ERROR_FLOOR && v.is_finite()).map(f64::ln);
    (0..errors.len())
        .map(|k| {
            if k < 2 {
                return None;
            }
            let l0 = usable(errors[k - 2])?;
            let l1 = usable(errors[k - 1])?;
            let l2 = usable(errors[k])?;
            order_from_logs(l0, l1, l2)
        })
        .collect()
}

/// Rate analysis of a solver trace, using the `err_to_ref` column.
pub fn rate_report(rows: &[IterationTrace]) -> Result<RateReport> {
    let errors: Vec<f64> = rows.iter().map(|r| r.err_to_ref.unwrap_or(f64::NAN)).collect();
    let mut report = convergence_order(&errors)?;
    report.theta_ratios = theta_ratios(rows);
    Ok(report)
}

fn theta_ratios(rows: &[IterationTrace]) -> Vec<f64> {
    rows.iter()
        .filter_map(|r| r.err_to_ref.filter(|e| *e > ERROR_FLOOR).map(|e| e / r.mu))
        .collect()
}

/// Spread of `|omega_{k+1} - omega*| / mu_k` over the last `last` rows
/// (roundoff-level errors excluded).
pub fn theta_band(rows: &[IterationTrace], last: usize) -> Option<ThetaBand> {
    let start = rows.len().saturating_sub(last);
    let r = theta_ratios(&rows[start..]);
    if r.is_empty() {
        return None;
    }
    let min = r.iter().copied().fold(f64::INFINITY, f64::min);
    let max = r.iter().copied().fold(0.0, f64::max);
    Some(ThetaBand {
        min,
        max,
        ratio: max / min,
    })
}

pub const FD_TOL: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq)]
pub struct FdReport {
    pub samples: usize,
    pub max_grad_error: f64,
    pub max_jacobian_error: f64,
    pub passed: bool,
}

/// Central differences of `F(.; mu)` along the tangent basis at `x`
/// (x through the retraction, multipliers directly), with step
/// `1e-6 max(1, |omega|)`.
pub fn fd_jacobian(prob: &ConstrainedProblem, w: &PrimalDualPoint, mu: f64) -> Result<DMatrix<f64>> {
    let basis = w.x.tangent_basis();
    let (d, m, p) = (basis.dim(), prob.m(), prob.p());
    let n = d + m + p;
    let size = (w.x.coords().norm_squared() + w.y.norm_squared() + w.z.norm_squared()).sqrt();
    let h = 1e-6 * size.max(1.0);
    let eval = |wt: &PrimalDualPoint| -> Result<DVector<f64>> {
        let f = barrier_kkt(prob, wt, mu)?;
        let mut v = DVector::zeros(n);
        v.rows_mut(0, d)
            .copy_from(&basis.columns().tr_mul(f.grad_block.coords()));
        v.rows_mut(d, m).copy_from(&f.compl_block);
        v.rows_mut(d + m, p).copy_from(&f.eq_block);
        Ok(v)
    };
    let shifted = |k: usize, t: f64| -> Result<PrimalDualPoint> {
        let mut wt = w.clone();
        if k < d {
            wt.x = w.x.retract(&basis.column(k).scaled(t))?;
        } else if k < d + m {
            wt.y[k - d] += t;
        } else {
            wt.z[k - d - m] += t;
        }
        Ok(wt)
    };
    let mut out = DMatrix::zeros(n, n);
    for k in 0..n {
        let col = (eval(&shifted(k, h)?)? - eval(&shifted(k, -h)?)?) / (2.0 * h);
        out.set_column(k, &col);
    }
    Ok(out)
}

/// Relative Jacobian error `max|J - J_fd| / max(1, max|J|)`.
pub fn jacobian_fd_error(prob: &ConstrainedProblem, w: &PrimalDualPoint, mu: f64) -> Result<f64> {
    let jac = assemble_jacobian(prob, w, &w.x.tangent_basis())?;
    let fd = fd_jacobian(prob, w, mu)?;
    Ok((&fd - &jac.matrix).amax() / jac.matrix.amax().max(1.0))
}

fn directional_error(field: &dyn ScalarField, x: &Point, v: &TangentVector) -> Result<f64> {
    let h = 1e-6 * x.coords().norm().max(1.0);
    let plus = field.value(&x.retract(&v.scaled(h))?);
    let minus = field.value(&x.retract(&v.scaled(-h))?);
    let fd = (plus - minus) / (2.0 * h);
    let exact = x.inner(&field.grad(x), v)?;
    Ok((fd - exact).abs() / exact.abs().max(1.0))
}

/// Seeded random primal-dual point; the primal part is redrawn until
/// strictly feasible (up to a bounded number of tries).
pub fn random_interior_point(prob: &ConstrainedProblem, rng: &mut impl Rng) -> Result<PrimalDualPoint> {
    let n = prob.manifold().ambient_dim();
    let mut x = None;
    for _ in 0..1000 {
        let cand = Point::new(
            prob.manifold().clone(),
            DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal)),
        )?;
        let ok = prob.ineq_values(&cand)?.iter().all(|&g| g > 1e-3);
        x = Some(cand);
        if ok {
            break;
        }
    }
    let x = x.expect("at least one draw");
    let y = DVector::from_fn(prob.m(), |_, _| rng.random_range(0.05..2.0));
    let z = DVector::from_fn(prob.p(), |_, _| rng.random_range(-1.0..1.0));
    Ok(PrimalDualPoint::new(x, y, z))
}

fn random_unit_tangent(x: &Point, rng: &mut impl Rng) -> Result<TangentVector> {
    loop {
        let v = x.tangent(DVector::from_fn(x.coords().len(), |_, _| {
            rng.sample::<f64, _>(StandardNormal)
        }))?;
        let n = v.norm();
        if n > 1e-8 {
            return Ok(v.scaled(1.0 / n));
        }
    }
}

pub fn fd_validate(prob: &ConstrainedProblem, samples: usize, seed: u64) -> Result<FdReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_grad_error: f64 = 0.0;
    let mut max_jacobian_error: f64 = 0.0;
    for _ in 0..samples {
        let w = random_interior_point(prob, &mut rng)?;
        let v = random_unit_tangent(&w.x, &mut rng)?;
        let fields = std::iter::once(prob.objective())
            .chain((0..prob.m()).map(|i| prob.inequality(i)))
            .chain((0..prob.p()).map(|j| prob.equality(j)));
        for field in fields {
            max_grad_error = max_grad_error.max(directional_error(field, &w.x, &v)?);
        }
        let mu = rng.random_range(1e-3..1.0);
        max_jacobian_error = max_jacobian_error.max(jacobian_fd_error(prob, &w, mu)?);
    }
    Ok(FdReport {
        samples,
        max_grad_error,
        max_jacobian_error,
        passed: max_grad_error <= FD_TOL && max_jacobian_error <= FD_TOL,
    })
}

/// Test fixture: wraps a field and adds `bias` times the projected all-ones
/// vector to its gradient, leaving values and Hessians untouched.
pub struct BiasedGradient<F> {
    pub inner: F,
    pub bias: f64,
}

impl<F: ScalarField> ScalarField for BiasedGradient<F> {
    fn value(&self, x: &Point) -> f64 {
        self.inner.value(x)
    }

    fn grad(&self, x: &Point) -> TangentVector {
        let ones = x
            .tangent(DVector::from_element(x.coords().len(), 1.0))
            .expect("ambient length matches");
        let mut g = self.inner.grad(x);
        g.axpy(self.bias, &ones).expect("same base point");
        g
    }

    fn hess_vec(&self, x: &Point, v: &TangentVector) -> TangentVector {
        self.inner.hess_vec(x, v)
    }

    fn ambient_dim(&self) -> Option<usize> {
        self.inner.ambient_dim()
    }
}
