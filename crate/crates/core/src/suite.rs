//! Validation suite: each criterion runs a property at a fixed tolerance and
//! reports a single pass/fail outcome with a one-line detail.

use std::fmt;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::diagnostics::{
    jacobian_fd_error, random_interior_point, rate_report, regularity_check, schedule_check, theta_band,
};
use crate::error::{Error, Result};
use crate::kkt::{extrapolate, kkt_residual, DEFAULT_CONDITION_CAP};
use crate::manifold::Manifold;
use crate::problem::{
    builtin_problem, ConstrainedProblem, Embedded, Monomial, Polynomial, PrimalDualPoint, ProblemInstance,
};
use crate::ripm::{outer_solve, BarrierSchedule, SolveReport, SolveStatus};
use crate::riptrm::{condensed_hessian, newton_equivalence_check, riptrm_solve, solve_trs_exact, trs_model, TrustRegionConfig};
use crate::trace::trace_to_string;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Ripm,
    Riptrm,
}

impl Algorithm {
    pub fn as_str(&self) -> &'static str {
        match self {
            Algorithm::Ripm => "ripm",
            Algorithm::Riptrm => "riptrm",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Solves an instance and, when it carries a reference, measures errors
/// against it.
pub fn solve(inst: &ProblemInstance, algorithm: Algorithm, config: &TrustRegionConfig) -> Result<SolveReport> {
    let report = match algorithm {
        Algorithm::Ripm => outer_solve(&inst.problem, &inst.start, &config.outer)?,
        Algorithm::Riptrm => riptrm_solve(&inst.problem, &inst.start, config)?,
    };
    match &inst.reference {
        Some(r) => report.with_reference(&inst.problem, r),
        None => Ok(report),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionOutcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl fmt::Display for CriterionOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "criterion {:>2} [{}] {}: {} ({:.3}s)",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.detail,
            self.elapsed.as_secs_f64()
        )
    }
}

fn outcome(id: u8, name: &'static str, start: Instant, result: Result<(bool, String)>) -> CriterionOutcome {
    let (passed, detail) = result.unwrap_or_else(|e| (false, format!("error: {e}")));
    CriterionOutcome {
        id,
        name,
        passed,
        detail,
        elapsed: start.elapsed(),
    }
}

pub const RATE_PROBLEMS: [(Algorithm, &str); 5] = [
    (Algorithm::Ripm, "T1"),
    (Algorithm::Ripm, "T2"),
    (Algorithm::Ripm, "T3"),
    (Algorithm::Riptrm, "T1"),
    (Algorithm::Riptrm, "T2"),
];

/// Configuration of the rate runs: `kappa = 0.5, theta = 0.9, mu0 = 0.1`,
/// at most 30 outer iterations.
pub fn rate_config() -> TrustRegionConfig {
    let mut c = TrustRegionConfig::default();
    c.outer.schedule = BarrierSchedule {
        mu0: 0.1,
        kappa: 0.5,
        theta: 0.9,
    };
    c.outer.max_outer = 30;
    c
}

#[derive(Debug, Clone)]
pub struct RateRun {
    pub algorithm: Algorithm,
    pub problem: String,
    pub instance: ProblemInstance,
    pub report: Result<SolveReport>,
    pub elapsed: Duration,
}

impl RateRun {
    pub fn label(&self) -> String {
        format!("{}/{}", self.algorithm, self.problem)
    }
}

pub fn rate_runs() -> Vec<RateRun> {
    let config = rate_config();
    RATE_PROBLEMS
        .par_iter()
        .map(|&(algorithm, name)| {
            let instance = ProblemInstance::builtin(name).expect("built-in problem");
            let start = Instant::now();
            let report = solve(&instance, algorithm, &config);
            RateRun {
                algorithm,
                problem: name.to_string(),
                instance,
                report,
                elapsed: start.elapsed(),
            }
        })
        .collect()
}

fn per_run<F>(runs: &[RateRun], mut check: F) -> Result<(bool, String)>
where
    F: FnMut(&RateRun, &SolveReport) -> Result<(bool, String)>,
{
    let mut all = true;
    let mut parts = Vec::new();
    for run in runs {
        let (ok, msg) = match &run.report {
            Ok(rep) => check(run, rep)?,
            Err(e) => (false, format!("error {e}")),
        };
        all &= ok;
        parts.push(format!("{} {}", run.label(), msg));
    }
    Ok((all, parts.join("; ")))
}

pub fn criterion_1_jacobian(seed: u64) -> CriterionOutcome {
    let start = Instant::now();
    let result = (|| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        for name in crate::problem::BUILTIN_NAMES {
            let (prob, _) = builtin_problem(name)?;
            for _ in 0..20 {
                let w = random_interior_point(&prob, &mut rng)?;
                let mu = rng.random_range(1e-3..1.0);
                worst = worst.max(jacobian_fd_error(&prob, &w, mu)?);
            }
        }
        let secs = start.elapsed().as_secs_f64();
        Ok((
            worst <= 1e-5 && secs < 5.0,
            format!("max relative error {worst:.2e} over 80 points (tol 1e-5), {secs:.3}s (limit 5s)"),
        ))
    })();
    outcome(1, "Jacobian vs finite differences", start, result)
}

pub fn criterion_2_central_path() -> CriterionOutcome {
    let start = Instant::now();
    let result = (|| {
        let (prob, _) = builtin_problem("T1")?;
        let mut worst: f64 = 0.0;
        for (mu0, mu1) in [(0.5, 0.25), (0.1, 0.01)] {
            let w = PrimalDualPoint::new(prob.point(&[mu0])?, vec![1.0], vec![]);
            let next = extrapolate(&prob, &w, mu1, DEFAULT_CONDITION_CAP)?;
            let target = PrimalDualPoint::new(prob.point(&[mu1])?, vec![1.0], vec![]);
            worst = worst.max(prob.distance(&next, &target)?);
        }
        Ok((worst <= 1e-12, format!("max distance to (mu1, 1) {worst:.2e} (tol 1e-12)")))
    })();
    outcome(2, "central-path extrapolation", start, result)
}

fn random_orthogonal(d: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    let a = DMatrix::from_fn(d, d, |_, _| rng.sample::<f64, _>(StandardNormal));
    a.qr().q()
}

fn uniform_ball(d: usize, radius: f64, rng: &mut impl Rng) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
        let n = v.norm();
        if n > 1e-12 {
            let r = radius * rng.random::<f64>().powf(1.0 / d as f64);
            return v * (r / n);
        }
    }
}

/// Random subproblem with spectrum in `[-2, 2]`; `hard` makes the gradient
/// orthogonal to a negative lowest eigenvector and small enough that the
/// remaining Newton component stays inside the ball.
pub fn random_trs_instance(
    rng: &mut impl Rng,
    d: usize,
    delta: f64,
    hard: bool,
) -> (DMatrix<f64>, DVector<f64>) {
    let q = random_orthogonal(d, rng);
    let mut lam: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
    lam.sort_by(|a, b| a.total_cmp(b));
    let mut a: DVector<f64> = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
    if hard {
        let low = -rng.random_range(0.1..2.0);
        lam[0] = low;
        for l in lam.iter_mut().skip(1) {
            *l = l.max(low + 0.1);
        }
        a[0] = 0.0;
        let rest = (1..d)
            .map(|i| (a[i] / (lam[i] - lam[0])).powi(2))
            .sum::<f64>()
            .sqrt();
        if rest > 0.0 {
            a *= 0.5 * delta / rest;
        }
    }
    let h = &q * DMatrix::from_diagonal(&DVector::from_vec(lam)) * q.transpose();
    let h = (&h + h.transpose()) * 0.5;
    (h, &q * a)
}

pub fn criterion_3_trs(seed: u64) -> CriterionOutcome {
    let start = Instant::now();
    let result = (|| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst_cert: f64 = 0.0;
        let mut worst_gap = f64::NEG_INFINITY;
        let (mut forced, mut detected) = (0, 0);
        for t in 0..100 {
            let d = rng.random_range(1..=8);
            let delta = [0.1, 1.0, 10.0][t % 3];
            let hard = t % 10 == 0;
            let (h, psi) = random_trs_instance(&mut rng, d, delta, hard);
            let s = solve_trs_exact(&h, &psi, delta)?;
            forced += hard as usize;
            detected += (hard && s.hard_case) as usize;
            let cert = s
                .stationarity
                .max(s.complementarity)
                .max(s.infeasibility)
                .max(-s.psd_margin);
            worst_cert = worst_cert.max(cert);
            let value = trs_model(&h, &psi, &s.step);
            let oracle = (0..10_000)
                .map(|_| trs_model(&h, &psi, &uniform_ball(d, delta, &mut rng)))
                .fold(f64::INFINITY, f64::min);
            worst_gap = worst_gap.max(value - oracle);
        }
        let secs = start.elapsed().as_secs_f64();
        Ok((
            worst_cert <= 1e-8 && worst_gap <= 1e-9 && forced >= 5 && secs < 10.0,
            format!(
                "max certificate residual {worst_cert:.2e} (tol 1e-8), max objective minus sampling oracle {worst_gap:.2e} (tol 1e-9), {forced} forced hard cases ({detected} detected), {secs:.3}s (limit 10s)"
            ),
        ))
    })();
    outcome(3, "trust-region subproblem optimality", start, result)
}

pub fn criterion_4_equivalence(seed: u64) -> CriterionOutcome {
    let start = Instant::now();
    let result = (|| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (t1, _) = builtin_problem("T1")?;
        let (t2, _) = builtin_problem("T2")?;
        let mut worst: f64 = 0.0;
        let mut cases = 0;
        let mut draws = 0;
        while cases < 20 && draws < 10_000 {
            draws += 1;
            let mu = rng.random_range(1e-3..0.1);
            let (prob, w) = if cases % 2 == 0 {
                let x = rng.random_range(0.05..1.0);
                (&t1, PrimalDualPoint::new(t1.point(&[x])?, vec![rng.random_range(0.1..2.0)], vec![]))
            } else {
                let angle = rng.random_range(-1.5..-0.2f64);
                let x = t2.point(&[angle.cos(), angle.sin()])?;
                (&t2, PrimalDualPoint::new(x, vec![rng.random_range(0.1..2.0)], vec![]))
            };
            if !prob.is_strictly_feasible(&w)? {
                continue;
            }
            match newton_equivalence_check(prob, &w, mu, 10.0) {
                Ok(r) => {
                    worst = worst.max(r.max_diff());
                    cases += 1;
                }
                Err(Error::NotInterior { .. }) => continue,
                Err(e) => return Err(e),
            }
        }
        Ok((
            cases == 20 && worst <= 1e-8,
            format!("{cases} interior cases, max block difference {worst:.2e} (tol 1e-8)"),
        ))
    })();
    outcome(4, "Newton/trust-region step equivalence", start, result)
}

pub fn criterion_5_rates(runs: &[RateRun]) -> CriterionOutcome {
    let start = Instant::now();
    let result = per_run(runs, |run, rep| {
        let prob = &run.instance.problem;
        let resid = kkt_residual(prob, &rep.final_point)?;
        let rate = rate_report(&rep.trace);
        let order = rate.as_ref().ok().and_then(|r| r.fitted_order);
        let min_ratio = rate
            .as_ref()
            .map(|r| r.ratios.iter().copied().fold(f64::INFINITY, f64::min))
            .unwrap_or(f64::INFINITY);
        let secs = run.elapsed.as_secs_f64();
        let ok = rep.status == SolveStatus::Converged
            && rep.outer_iterations() <= 30
            && resid <= 1e-10
            && order.is_some_and(|p| p >= 1.5)
            && min_ratio < 0.1
            && secs < 1.0;
        Ok((
            ok,
            format!(
                "{} in {} its, residual {resid:.1e}, order {}, min ratio {min_ratio:.1e}, {secs:.3}s",
                rep.status.as_str(),
                rep.outer_iterations(),
                order.map_or("n/a".to_string(), |p| format!("{p:.3}")),
            ),
        ))
    });
    outcome(5, "superlinear and near-quadratic rate", start, result)
}

/// First outer index from which every inner count is zero.
pub fn zero_inner_tail_start(rep: &SolveReport) -> usize {
    rep.trace
        .iter()
        .rposition(|t| t.inner_iters != 0)
        .map_or(0, |k| k + 1)
}

pub fn criterion_6_zero_inner(runs: &[RateRun]) -> CriterionOutcome {
    let start = Instant::now();
    let result = per_run(runs, |_, rep| {
        let k = zero_inner_tail_start(rep);
        let n = rep.outer_iterations();
        Ok((k <= 10 && k < n, format!("K = {k} of {n}")))
    });
    outcome(6, "zero inner iterations near the solution", start, result)
}

pub fn criterion_7_theta_law(runs: &[RateRun]) -> CriterionOutcome {
    let start = Instant::now();
    let result = per_run(runs, |_, rep| {
        Ok(match theta_band(&rep.trace, 5) {
            Some(b) => (
                b.ratio <= 100.0,
                format!("band [{:.2e}, {:.2e}] ratio {:.2}", b.min, b.max, b.ratio),
            ),
            None => (false, "no usable errors".into()),
        })
    });
    outcome(7, "error proportional to the barrier parameter", start, result)
}

pub fn criterion_8_positive_hessian(runs: &[RateRun]) -> CriterionOutcome {
    let start = Instant::now();
    let result = per_run(
        &runs
            .iter()
            .filter(|r| r.algorithm == Algorithm::Riptrm)
            .cloned()
            .collect::<Vec<_>>(),
        |run, rep| {
            let prob = &run.instance.problem;
            let reference = run
                .instance
                .reference
                .as_ref()
                .ok_or_else(|| Error::InsufficientData("no reference".into()))?;
            let mut checked = 0;
            let mut min_lam = f64::INFINITY;
            let points = rep.inner_points.iter().map(|(_, p)| p).chain(rep.iterates.iter());
            for p in points {
                if prob.distance(p, &reference.point)? <= 1e-3 {
                    checked += 1;
                    min_lam = min_lam.min(condensed_hessian(prob, &p.x, &p.y)?.lambda_min);
                }
            }
            Ok((
                checked > 0 && min_lam > 0.0,
                format!("{checked} iterates within 1e-3, min eigenvalue {min_lam:.3e}"),
            ))
        },
    );
    outcome(8, "condensed Hessian positive definite near the solution", start, result)
}

pub fn criterion_9_schedule() -> CriterionOutcome {
    let start = Instant::now();
    let result = (|| {
        let mut all = true;
        let mut parts = Vec::new();
        for theta in [0.5, 0.9] {
            for mu0 in [1.0, 0.1] {
                let s = BarrierSchedule { mu0, kappa: 0.5, theta };
                let r = schedule_check(&s, 20)?;
                all &= r.passed;
                parts.push(format!(
                    "theta {theta} mu0 {mu0}: {} (log10 mu_20 = {:.3e})",
                    if r.passed { "pass" } else { "fail" },
                    r.final_log10_mu()
                ));
            }
        }
        Ok((all, parts.join("; ")))
    })();
    outcome(9, "barrier schedule assumptions", start, result)
}

/// `min x^2 / 2` s.t. `x >= 0` at `(x, y) = (0, 0)`: a KKT point without
/// strict complementarity.
pub fn sc_fault_fixture() -> Result<(ConstrainedProblem, PrimalDualPoint)> {
    let f = Polynomial::new(1, vec![Monomial { coef: 0.5, powers: vec![2] }])?;
    let prob = ConstrainedProblem::new("sc-fault", Manifold::euclidean(1)?, Embedded(f))?
        .with_inequality(Embedded(Polynomial::affine(0.0, &[1.0])))?;
    let w = PrimalDualPoint::new(prob.point(&[0.0])?, vec![0.0], vec![]);
    Ok((prob, w))
}

/// `min x` s.t. `x >= 0` twice, at `x = 0`: dependent active gradients.
pub fn licq_fault_fixture() -> Result<(ConstrainedProblem, PrimalDualPoint)> {
    let prob = ConstrainedProblem::new("licq-fault", Manifold::euclidean(1)?, Embedded(Polynomial::affine(0.0, &[1.0])))?
        .with_inequality(Embedded(Polynomial::affine(0.0, &[1.0])))?
        .with_inequality(Embedded(Polynomial::affine(0.0, &[2.0])))?;
    let w = PrimalDualPoint::new(prob.point(&[0.0])?, vec![0.5, 0.25], vec![]);
    Ok((prob, w))
}

pub fn criterion_10_regularity() -> CriterionOutcome {
    let start = Instant::now();
    let result = (|| {
        let tol = 1e-6;
        let mut all = true;
        let mut parts = Vec::new();
        for name in crate::problem::BUILTIN_NAMES {
            let (prob, r) = builtin_problem(name)?;
            let rep = regularity_check(&prob, &r.point, tol)?;
            all &= rep.passed();
            parts.push(format!("{name} {:?}", rep.sosc.status));
        }
        let (p, w) = sc_fault_fixture()?;
        let sc = regularity_check(&p, &w, tol)?;
        all &= !sc.sc.passed;
        parts.push(format!("SC fixture {}", if sc.sc.passed { "passed" } else { "failed" }));
        let (p, w) = licq_fault_fixture()?;
        let licq = regularity_check(&p, &w, tol)?;
        all &= !licq.licq.passed;
        parts.push(format!(
            "LICQ fixture {} (sigma_min {:.1e})",
            if licq.licq.passed { "passed" } else { "failed" },
            licq.licq.sigma_min
        ));
        Ok((all, parts.join("; ")))
    })();
    outcome(10, "regularity at references and fault fixtures", start, result)
}

/// Trace files of the rate runs as `(file name, contents)`.
pub fn suite_traces(runs: &[RateRun]) -> Vec<(String, String)> {
    runs.iter()
        .map(|run| {
            let body = match &run.report {
                Ok(rep) => trace_to_string(&rep.trace).unwrap_or_else(|e| format!("error: {e}\n")),
                Err(e) => format!("error: {e}\n"),
            };
            (format!("{}_{}.csv", run.algorithm, run.problem), body)
        })
        .collect()
}

pub fn criterion_11_determinism(runs: &[RateRun]) -> CriterionOutcome {
    let start = Instant::now();
    let first = suite_traces(runs);
    let again = suite_traces(&rate_runs());
    let same = first == again;
    let result = Ok((
        same,
        format!("{} trace files {}", first.len(), if same { "identical" } else { "differ" }),
    ));
    outcome(11, "deterministic traces", start, result)
}

#[derive(Debug, Clone)]
pub struct SuiteResult {
    pub outcomes: Vec<CriterionOutcome>,
    pub traces: Vec<(String, String)>,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed)
    }
}

pub fn run_suite(seed: u64) -> SuiteResult {
    let runs = rate_runs();
    let outcomes = vec![
        criterion_1_jacobian(seed),
        criterion_2_central_path(),
        criterion_3_trs(seed),
        criterion_4_equivalence(seed),
        criterion_5_rates(&runs),
        criterion_6_zero_inner(&runs),
        criterion_7_theta_law(&runs),
        criterion_8_positive_hessian(&runs),
        criterion_9_schedule(),
        criterion_10_regularity(),
        criterion_11_determinism(&runs),
    ];
    SuiteResult {
        outcomes,
        traces: suite_traces(&runs),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hard_instances_are_hard() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for d in 2..=8 {
            let (h, psi) = random_trs_instance(&mut rng, d, 1.0, true);
            let s = solve_trs_exact(&h, &psi, 1.0).unwrap();
            assert!(s.hard_case && s.certified(1e-8), "d = {d}: {s:?}");
        }
    }

    #[test]
    fn fixtures_are_kkt_points() {
        for (p, w) in [sc_fault_fixture().unwrap(), licq_fault_fixture().unwrap()] {
            assert_eq!(kkt_residual(&p, &w).unwrap(), 0.0);
        }
    }

    #[test]
    fn tail_start() {
        let (prob, _) = builtin_problem("T1").unwrap();
        let inst = ProblemInstance::builtin("T1").unwrap();
        let rep = solve(&inst, Algorithm::Ripm, &rate_config()).unwrap();
        assert_eq!(zero_inner_tail_start(&rep), 0);
        assert!(kkt_residual(&prob, &rep.final_point).unwrap() <= 1e-10);
    }
}
