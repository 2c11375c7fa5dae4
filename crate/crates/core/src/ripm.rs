//! Outer interior point iteration with Newton extrapolation.
//!
//! Each outer iteration fixes a barrier parameter `mu_k`, takes one Newton
//! step on `F(.; mu_k)` from the previous iterate and keeps it when it
//! already satisfies the barrier stopping test. Otherwise a damped Newton
//! fallback iterates on `F(.; mu_k)` until the test passes.

use nalgebra::DVector;

use crate::diagnostics::pointwise_orders;
use crate::error::{Error, Result};
use crate::kkt::{barrier_kkt, kkt_residual, newton_step, DEFAULT_CONDITION_CAP};
use crate::problem::{ConstrainedProblem, PrimalDualPoint, ReferenceSolution};
use crate::trace::{IterationTrace, SummaryReport};

/// Linear forcing functions `eps(mu) = c mu` for the stopping blocks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForcingFunctions {
    pub c_grad: f64,
    pub c_compl: f64,
    pub c_eq: f64,
    pub c_sosp: f64,
}

impl Default for ForcingFunctions {
    fn default() -> Self {
        ForcingFunctions {
            c_grad: 1.0,
            c_compl: 1.0,
            c_eq: 1.0,
            c_sosp: 1.0,
        }
    }
}

impl ForcingFunctions {
    pub fn validate(&self) -> Result<()> {
        for (name, c) in [
            ("c_grad", self.c_grad),
            ("c_compl", self.c_compl),
            ("c_eq", self.c_eq),
            ("c_sosp", self.c_sosp),
        ] {
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {c}")));
            }
        }
        Ok(())
    }

    pub fn eps_grad(&self, mu: f64) -> f64 {
        self.c_grad * mu
    }

    pub fn eps_compl(&self, mu: f64) -> f64 {
        self.c_compl * mu
    }

    pub fn eps_eq(&self, mu: f64) -> f64 {
        self.c_eq * mu
    }

    pub fn eps_sosp(&self, mu: f64) -> f64 {
        self.c_sosp * mu
    }

    /// Witnesses `(c_lo, c_hi)` with `c_lo mu <= eps(mu) <= c_hi mu` for
    /// every block and `0 < c_lo < 1 < c_hi`.
    pub fn linear_bounds(&self) -> (f64, f64) {
        let cs = [self.c_grad, self.c_compl, self.c_eq, self.c_sosp];
        let lo = cs.iter().copied().fold(0.5, f64::min);
        let hi = cs.iter().copied().fold(2.0, f64::max);
        (lo, hi)
    }
}

/// `mu_{k+1} = kappa mu_k^(1 + theta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierSchedule {
    pub mu0: f64,
    pub kappa: f64,
    pub theta: f64,
}

impl Default for BarrierSchedule {
    fn default() -> Self {
        BarrierSchedule {
            mu0: 0.1,
            kappa: 0.5,
            theta: 0.9,
        }
    }
}

impl BarrierSchedule {
    pub fn validate(&self) -> Result<()> {
        if !(self.mu0 > 0.0 && self.mu0 <= 1.0) {
            return Err(Error::InvalidConfig(format!("mu0 must lie in (0, 1], got {}", self.mu0)));
        }
        if !(self.kappa > 0.0 && self.kappa < 1.0) {
            return Err(Error::InvalidConfig(format!("kappa must lie in (0, 1), got {}", self.kappa)));
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(Error::InvalidConfig(format!("theta must lie in (0, 1), got {}", self.theta)));
        }
        Ok(())
    }

    pub fn update(&self, mu: f64) -> Result<f64> {
        barrier_update(mu, self)
    }
}

pub fn barrier_update(mu: f64, schedule: &BarrierSchedule) -> Result<f64> {
    if !(mu > 0.0 && mu <= 1.0) {
        return Err(Error::InvalidConfig(format!("barrier parameter must lie in (0, 1], got {mu}")));
    }
    Ok(schedule.kappa * mu.powf(1.0 + schedule.theta))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OuterConfig {
    pub schedule: BarrierSchedule,
    pub forcing: ForcingFunctions,
    pub max_outer: usize,
    pub kkt_stop_tol: f64,
    pub condition_cap: f64,
    /// Fraction-to-boundary factor.
    pub tau: f64,
    pub max_inner: usize,
}

impl Default for OuterConfig {
    fn default() -> Self {
        OuterConfig {
            schedule: BarrierSchedule::default(),
            forcing: ForcingFunctions::default(),
            max_outer: 50,
            kkt_stop_tol: 1e-10,
            condition_cap: DEFAULT_CONDITION_CAP,
            tau: 0.995,
            max_inner: 100,
        }
    }
}

impl OuterConfig {
    pub fn validate(&self) -> Result<()> {
        self.schedule.validate()?;
        self.forcing.validate()?;
        if !(self.tau > 0.9 && self.tau < 1.0) {
            return Err(Error::InvalidConfig(format!("tau must lie in (0.9, 1), got {}", self.tau)));
        }
        if self.max_outer == 0 || self.max_inner == 0 {
            return Err(Error::InvalidConfig("iteration caps must be positive".into()));
        }
        if !(self.kkt_stop_tol > 0.0) {
            return Err(Error::InvalidConfig("kkt_stop_tol must be positive".into()));
        }
        if !(self.condition_cap > 1.0) {
            return Err(Error::InvalidConfig("condition cap must exceed 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoppingCheck {
    pub passed: bool,
    pub grad_norm: f64,
    pub compl_norm: f64,
    pub eq_norm: f64,
    pub min_g: Option<f64>,
    pub min_y: Option<f64>,
}

fn min_entry(v: &DVector<f64>) -> Option<f64> {
    (!v.is_empty()).then(|| v.min())
}

pub fn stopping_check(
    prob: &ConstrainedProblem,
    w: &PrimalDualPoint,
    mu: f64,
    forcing: &ForcingFunctions,
) -> Result<StoppingCheck> {
    let f = barrier_kkt(prob, w, mu)?;
    let g = prob.ineq_values(&w.x)?;
    let (grad_norm, compl_norm, eq_norm) = (f.grad_norm(), f.compl_norm(), f.eq_norm());
    let interior = g.iter().all(|&v| v > 0.0) && w.y.iter().all(|&v| v > 0.0);
    Ok(StoppingCheck {
        passed: interior
            && grad_norm <= forcing.eps_grad(mu)
            && compl_norm <= forcing.eps_compl(mu)
            && eq_norm <= forcing.eps_eq(mu),
        grad_norm,
        compl_norm,
        eq_norm,
        min_g: min_entry(&g),
        min_y: min_entry(&w.y),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct InnerResult {
    pub point: PrimalDualPoint,
    pub iterations: usize,
    /// Merit values at the start point and after every accepted step.
    pub merits: Vec<f64>,
}

const ARMIJO_C: f64 = 1e-4;
const MIN_STEP: f64 = 1e-12;

/// Largest `alpha` in `(0, 1]` with `v + alpha dv >= (1 - tau) v`.
pub(crate) fn fraction_to_boundary(v: &DVector<f64>, dv: &DVector<f64>, tau: f64) -> f64 {
    v.iter()
        .zip(dv.iter())
        .filter(|(_, &d)| d < 0.0)
        .map(|(&vi, &d)| -tau * vi / d)
        .fold(1.0, f64::min)
}

/// Damped Newton on `F(.; mu)` with fraction-to-boundary damping and an
/// Armijo test on `|F|^2 / 2`.
pub fn inner_fallback(
    prob: &ConstrainedProblem,
    w_init: &PrimalDualPoint,
    mu: f64,
    forcing: &ForcingFunctions,
    config: &OuterConfig,
) -> Result<InnerResult> {
    if !prob.is_strictly_feasible(w_init)? {
        return Err(Error::NotStrictlyFeasible("inner iteration start".into()));
    }
    let merit = |w: &PrimalDualPoint| -> Result<f64> { Ok(0.5 * barrier_kkt(prob, w, mu)?.norm().powi(2)) };
    let mut w = w_init.clone();
    let mut phi = merit(&w)?;
    let mut merits = vec![phi];
    for it in 0..config.max_inner {
        if stopping_check(prob, &w, mu, forcing)?.passed {
            return Ok(InnerResult {
                point: w,
                iterations: it,
                merits,
            });
        }
        let step = newton_step(prob, &w, mu, config.condition_cap)?;
        let g0 = prob.ineq_values(&w.x)?;
        let mut alpha = fraction_to_boundary(&w.y, &step.dy, config.tau);
        let accepted = loop {
            if alpha < MIN_STEP {
                break None;
            }
            let cand = PrimalDualPoint {
                x: w.x.retract(&step.dx.scaled(alpha))?,
                y: &w.y + &step.dy * alpha,
                z: &w.z + &step.dz * alpha,
            };
            let g = prob.ineq_values(&cand.x)?;
            let kept = g.iter().zip(g0.iter()).all(|(&gn, &go)| gn >= (1.0 - config.tau) * go && gn > 0.0);
            if kept {
                let phi_new = merit(&cand)?;
                if phi_new <= phi - ARMIJO_C * alpha * 2.0 * phi {
                    break Some((cand, phi_new));
                }
            }
            alpha *= 0.5;
        };
        match accepted {
            Some((cand, phi_new)) => {
                w = cand;
                phi = phi_new;
                merits.push(phi);
            }
            None => {
                return Err(Error::InnerStalled(format!(
                    "no acceptable step at mu = {mu:e} after {it} iterations"
                )))
            }
        }
    }
    if stopping_check(prob, &w, mu, forcing)?.passed {
        return Ok(InnerResult {
            point: w,
            iterations: config.max_inner,
            merits,
        });
    }
    Err(Error::InnerStalled(format!(
        "iteration cap {} reached at mu = {mu:e}",
        config.max_inner
    )))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    MaxOuter,
    SingularJacobian,
    InnerStalled,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Converged => "Converged",
            SolveStatus::MaxOuter => "MaxOuter",
            SolveStatus::SingularJacobian => "SingularJacobian",
            SolveStatus::InnerStalled => "InnerStalled",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub algorithm: &'static str,
    pub final_point: PrimalDualPoint,
    pub status: SolveStatus,
    pub failure: Option<Error>,
    pub trace: Vec<IterationTrace>,
    /// Iterate accepted at each outer iteration (one per trace row).
    pub iterates: Vec<PrimalDualPoint>,
    /// Norm of the first Newton (or trust-region) step of each outer iteration.
    pub step_norms: Vec<f64>,
    /// Outer iterations whose extrapolated point violated strict feasibility.
    pub extrapolation_fallbacks: Vec<usize>,
    /// Every point the inner iterations visited, tagged with the outer index.
    pub inner_points: Vec<(usize, PrimalDualPoint)>,
    /// Merit history of each outer iteration's inner loop.
    pub inner_merits: Vec<Vec<f64>>,
    /// Errors measured against the final iterate instead of a reference.
    pub self_referenced: bool,
}

impl SolveReport {
    pub(crate) fn new(algorithm: &'static str, start: &PrimalDualPoint) -> Self {
        SolveReport {
            algorithm,
            final_point: start.clone(),
            status: SolveStatus::MaxOuter,
            failure: None,
            trace: Vec::new(),
            iterates: Vec::new(),
            step_norms: Vec::new(),
            extrapolation_fallbacks: Vec::new(),
            inner_points: Vec::new(),
            inner_merits: Vec::new(),
            self_referenced: true,
        }
    }

    pub(crate) fn fail(&mut self, err: Error) -> Result<()> {
        self.status = match err {
            Error::NearSingularJacobian { .. } => SolveStatus::SingularJacobian,
            Error::InnerStalled(_) => SolveStatus::InnerStalled,
            other => return Err(other),
        };
        self.failure = Some(err);
        Ok(())
    }

    fn fill_errors(&mut self, prob: &ConstrainedProblem, target: &PrimalDualPoint) -> Result<()> {
        let errors = self
            .iterates
            .iter()
            .map(|w| prob.distance(w, target).map(Some))
            .collect::<Result<Vec<_>>>()?;
        let orders = pointwise_orders(&errors);
        for ((row, e), p) in self.trace.iter_mut().zip(errors).zip(orders) {
            row.err_to_ref = e;
            row.order = p;
        }
        Ok(())
    }

    pub(crate) fn finish(&mut self, prob: &ConstrainedProblem) -> Result<()> {
        if let Some(last) = self.iterates.last() {
            self.final_point = last.clone();
        }
        let target = self.final_point.clone();
        self.self_referenced = true;
        self.fill_errors(prob, &target)
    }

    /// Recomputes `err_to_ref` and `order` against a known solution.
    pub fn with_reference(mut self, prob: &ConstrainedProblem, reference: &ReferenceSolution) -> Result<Self> {
        self.fill_errors(prob, &reference.point)?;
        self.self_referenced = false;
        Ok(self)
    }

    pub fn outer_iterations(&self) -> usize {
        self.trace.len()
    }

    pub fn summary(&self, prob: &ConstrainedProblem) -> Result<SummaryReport> {
        let f = barrier_kkt(prob, &self.final_point, 0.0)?;
        let fitted_order = crate::diagnostics::rate_report(&self.trace)
            .ok()
            .and_then(|r| r.fitted_order);
        Ok(SummaryReport {
            problem: prob.name().to_string(),
            algorithm: self.algorithm.to_string(),
            status: self.status.as_str().to_string(),
            outer_iterations: self.outer_iterations(),
            kkt_residual: kkt_residual(prob, &self.final_point)?,
            grad_norm: f.grad_norm(),
            compl_norm: f.compl_norm(),
            eq_norm: f.eq_norm(),
            self_referenced: self.self_referenced,
            extrapolation_fallbacks: self.extrapolation_fallbacks.clone(),
            fitted_order,
            theta_band: crate::diagnostics::theta_band(&self.trace, 5),
            failure: self.failure.as_ref().map(|e| e.to_string()),
        })
    }
}

pub(crate) fn trace_row(k: usize, mu: f64, check: &StoppingCheck, inner_iters: usize) -> IterationTrace {
    IterationTrace {
        k,
        mu,
        grad_norm: check.grad_norm,
        compl_norm: check.compl_norm,
        eq_norm: check.eq_norm,
        min_g: check.min_g,
        min_y: check.min_y,
        inner_iters,
        err_to_ref: None,
        order: None,
        tr_radius: None,
        tr_multiplier: None,
        lambda_min_h: None,
    }
}

/// Runs the outer iteration from a strictly feasible start. Errors are
/// reserved for invalid input; solver failures are reported through
/// [`SolveReport::status`]. Errors in the trace are measured against the
/// final iterate until [`SolveReport::with_reference`] is applied.
pub fn outer_solve(prob: &ConstrainedProblem, w0: &PrimalDualPoint, config: &OuterConfig) -> Result<SolveReport> {
    config.validate()?;
    if !prob.is_strictly_feasible(w0)? {
        return Err(Error::NotStrictlyFeasible("outer iteration start".into()));
    }
    let forcing = &config.forcing;
    let mut report = SolveReport::new("ripm", w0);
    let mut w = w0.clone();
    let mut mu = config.schedule.mu0;
    for k in 0..config.max_outer {
        if k > 0 {
            mu = config.schedule.update(mu)?;
        }
        let step = match newton_step(prob, &w, mu, config.condition_cap) {
            Ok(s) => s,
            Err(e) => {
                report.fail(e)?;
                break;
            }
        };
        report.step_norms.push(step.norm());
        let cand = step.apply(&w)?;
        let feasible = prob.is_strictly_feasible(&cand)?;
        let accept_now = feasible
            && (stopping_check(prob, &cand, mu, forcing)?.passed
                || kkt_residual(prob, &cand)? <= config.kkt_stop_tol);
        let (next, inner_iters) = if accept_now {
            report.inner_merits.push(Vec::new());
            (cand, 0)
        } else {
            if !feasible {
                report.extrapolation_fallbacks.push(k);
            }
            let start = if feasible { &cand } else { &w };
            match inner_fallback(prob, start, mu, forcing, config) {
                Ok(r) => {
                    report.inner_merits.push(r.merits);
                    report.inner_points.push((k, r.point.clone()));
                    (r.point, r.iterations)
                }
                Err(e) => {
                    report.fail(e)?;
                    break;
                }
            }
        };
        let check = stopping_check(prob, &next, mu, forcing)?;
        report.trace.push(trace_row(k, mu, &check, inner_iters));
        report.iterates.push(next.clone());
        w = next;
        if kkt_residual(prob, &w)? <= config.kkt_stop_tol {
            report.status = SolveStatus::Converged;
            break;
        }
    }
    report.finish(prob)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{builtin_problem, builtin_start, BUILTIN_NAMES};

    fn t1(x: f64, y: f64) -> (ConstrainedProblem, PrimalDualPoint) {
        let (prob, _) = builtin_problem("T1").unwrap();
        let w = PrimalDualPoint::new(prob.point(&[x]).unwrap(), vec![y], vec![]);
        (prob, w)
    }

    #[test]
    fn barrier_update_examples() {
        let s = BarrierSchedule {
            mu0: 1.0,
            kappa: 0.5,
            theta: 0.5,
        };
        assert_eq!(barrier_update(1.0, &s).unwrap(), 0.5);
        assert_eq!(barrier_update(0.25, &s).unwrap(), 0.0625);
        assert!(barrier_update(0.0, &s).is_err());
        assert!(barrier_update(1.5, &s).is_err());
        let mut mu = 1.0;
        for _ in 0..10 {
            let next = barrier_update(mu, &s).unwrap();
            assert!(next < mu);
            mu = next;
        }
    }

    #[test]
    fn config_validation() {
        assert!(OuterConfig::default().validate().is_ok());
        let mut c = OuterConfig::default();
        c.schedule.theta = 1.5;
        assert!(matches!(c.validate(), Err(Error::InvalidConfig(_))));
        let c = OuterConfig {
            tau: 0.5,
            ..OuterConfig::default()
        };
        assert!(c.validate().is_err());
        let mut c = OuterConfig::default();
        c.schedule.mu0 = 0.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn forcing_bounds_bracket_one() {
        for c in [0.1, 1.0, 5.0] {
            let f = ForcingFunctions {
                c_grad: c,
                c_compl: c,
                c_eq: c,
                c_sosp: c,
            };
            let (lo, hi) = f.linear_bounds();
            assert!(0.0 < lo && lo < 1.0 && 1.0 < hi);
            for mu in [1e-8, 0.3, 1.0] {
                assert!(lo * mu <= f.eps_grad(mu) && f.eps_grad(mu) <= hi * mu);
            }
        }
    }

    #[test]
    fn stopping_check_examples() {
        let f = ForcingFunctions::default();
        let (prob, w) = t1(0.1, 1.0);
        let c = stopping_check(&prob, &w, 0.1, &f).unwrap();
        assert!(c.passed);
        assert_eq!((c.grad_norm, c.compl_norm), (0.0, 0.0));
        let (prob, w) = t1(0.1, 0.5);
        let c = stopping_check(&prob, &w, 0.1, &f).unwrap();
        assert!(!c.passed);
        assert_eq!(c.grad_norm, 0.5);
        let (prob, w) = t1(0.1, 0.0);
        let loose = ForcingFunctions {
            c_grad: 1e6,
            c_compl: 1e6,
            c_eq: 1e6,
            c_sosp: 1.0,
        };
        assert!(!stopping_check(&prob, &w, 0.1, &loose).unwrap().passed);
    }

    #[test]
    fn inner_fallback_examples() {
        let cfg = OuterConfig::default();
        let f = ForcingFunctions::default();
        let (prob, w) = t1(0.1, 1.0);
        let r = inner_fallback(&prob, &w, 0.1, &f, &cfg).unwrap();
        assert_eq!((r.iterations, &r.point), (0, &w));

        let (prob, w) = t1(1.0, 1.0);
        let r = inner_fallback(&prob, &w, 0.1, &f, &cfg).unwrap();
        assert!(r.iterations <= 10);
        assert!((r.point.x.coords()[0] - 0.1).abs() <= 1e-12 && (r.point.y[0] - 1.0).abs() <= 1e-12);
        assert!(r.merits.windows(2).all(|m| m[1] < m[0]));

        let (prob, w) = t1(-0.1, 1.0);
        assert!(matches!(
            inner_fallback(&prob, &w, 0.1, &f, &cfg),
            Err(Error::NotStrictlyFeasible(_))
        ));
    }

    #[test]
    fn inner_fallback_damps_far_starts() {
        // Far from the central path the full Newton step leaves the interior.
        let (prob, _) = builtin_problem("T2").unwrap();
        let w = PrimalDualPoint::new(prob.point(&[0.99, 0.14]).unwrap(), vec![3.0], vec![]);
        let cfg = OuterConfig::default();
        let r = inner_fallback(&prob, &w, 0.05, &cfg.forcing, &cfg).unwrap();
        assert!(r.merits.windows(2).all(|m| m[1] < m[0]));
        assert!(stopping_check(&prob, &r.point, 0.05, &cfg.forcing).unwrap().passed);
    }

    #[test]
    fn t1_outer_solve_example() {
        let (prob, w0) = t1(0.8, 1.2);
        let cfg = OuterConfig {
            schedule: BarrierSchedule {
                mu0: 0.5,
                kappa: 0.5,
                theta: 0.9,
            },
            ..OuterConfig::default()
        };
        let rep = outer_solve(&prob, &w0, &cfg).unwrap();
        assert_eq!(rep.status, SolveStatus::Converged);
        assert!(rep.final_point.x.coords()[0].abs() <= 1e-10);
        for row in &rep.trace {
            if row.mu <= 1e-2 {
                assert_eq!(row.inner_iters, 0, "k = {}", row.k);
            }
        }
        assert_eq!(rep.trace.len(), rep.iterates.len());
    }

    #[test]
    fn t3_outer_solve_reaches_reference() {
        let (prob, r) = builtin_problem("T3").unwrap();
        let rep = outer_solve(&prob, &builtin_start("T3").unwrap(), &OuterConfig::default()).unwrap();
        assert_eq!(rep.status, SolveStatus::Converged);
        assert!(prob.distance(&rep.final_point, &r.point).unwrap() <= 1e-8);
    }

    #[test]
    fn all_builtins_converge_with_defaults() {
        for name in BUILTIN_NAMES {
            let (prob, r) = builtin_problem(name).unwrap();
            let rep = outer_solve(&prob, &builtin_start(name).unwrap(), &OuterConfig::default())
                .unwrap()
                .with_reference(&prob, &r)
                .unwrap();
            assert_eq!(rep.status, SolveStatus::Converged, "{name}: {:?}", rep.failure);
            assert!(kkt_residual(&prob, &rep.final_point).unwrap() <= 1e-10);
            assert!(!rep.self_referenced);
            assert!(rep.trace.iter().all(|t| t.err_to_ref.is_some()));
        }
    }

    #[test]
    fn infeasible_start_is_rejected() {
        let (prob, w) = t1(-0.5, 1.0);
        assert!(matches!(
            outer_solve(&prob, &w, &OuterConfig::default()),
            Err(Error::NotStrictlyFeasible(_))
        ));
    }

    #[test]
    fn singular_start_is_reported_in_status() {
        use crate::manifold::Manifold;
        use crate::problem::{Embedded, Monomial, Polynomial};
        // min -x^2/2 s.t. x >= 0: J = [[-1, -1], [y, x]] is singular on x = y.
        let f = Polynomial::new(1, vec![Monomial { coef: -0.5, powers: vec![2] }]).unwrap();
        let prob = ConstrainedProblem::new("concave", Manifold::euclidean(1).unwrap(), Embedded(f))
            .unwrap()
            .with_inequality(Embedded(Polynomial::affine(0.0, &[1.0])))
            .unwrap();
        let w = PrimalDualPoint::new(prob.point(&[0.5]).unwrap(), vec![0.5], vec![]);
        let rep = outer_solve(&prob, &w, &OuterConfig::default()).unwrap();
        assert_eq!(rep.status, SolveStatus::SingularJacobian);
        assert!(rep.trace.is_empty());
        assert_eq!(rep.final_point, w);
    }
}
