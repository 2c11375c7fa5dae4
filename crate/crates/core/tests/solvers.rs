use ripm_core::diagnostics::{rate_report, ERROR_FLOOR};
use ripm_core::kkt::kkt_residual;
use ripm_core::problem::{builtin_problem, PrimalDualPoint, ProblemInstance, BUILTIN_NAMES};
use ripm_core::ripm::{outer_solve, OuterConfig, SolveStatus};
use ripm_core::riptrm::{condensed_hessian, TrustRegionConfig};
use ripm_core::suite::{rate_config, solve, Algorithm};

#[test]
fn step_norm_tracks_previous_barrier_parameter() {
    for name in BUILTIN_NAMES {
        let inst = ProblemInstance::builtin(name).unwrap();
        let rep = solve(&inst, Algorithm::Ripm, &rate_config()).unwrap();
        let c: Vec<f64> = (1..rep.trace.len())
            .map(|k| rep.step_norms[k] / rep.trace[k - 1].mu)
            .filter(|v| *v > ERROR_FLOOR)
            .collect();
        let tail = &c[c.len().saturating_sub(5)..];
        let max = tail.iter().copied().fold(0.0, f64::max);
        let min = tail.iter().copied().fold(f64::INFINITY, f64::min);
        println!("{name}: C = {tail:?}");
        assert!(max / min <= 10.0, "{name}: {tail:?}");
    }
}

#[test]
fn t4_converges_with_both_schedules() {
    for theta in [0.5, 0.9] {
        let mut cfg = rate_config();
        cfg.outer.schedule.theta = theta;
        let inst = ProblemInstance::builtin("T4").unwrap();
        let rep = solve(&inst, Algorithm::Ripm, &cfg).unwrap();
        assert_eq!(rep.status, SolveStatus::Converged);
        assert!(kkt_residual(&inst.problem, &rep.final_point).unwrap() <= 1e-10);
        let p = rate_report(&rep.trace).unwrap().fitted_order.unwrap();
        assert!(p >= 1.0 + theta - 0.2, "theta {theta}: order {p}");
    }
}

#[test]
fn infeasible_extrapolation_falls_back_to_inner_iteration() {
    // With a small multiplier the first Newton step (mu0 - x) / y toward
    // mu0 overshoots to x < 0.
    let (prob, r) = builtin_problem("T1").unwrap();
    let w0 = PrimalDualPoint::new(prob.point(&[1.0]).unwrap(), vec![0.1], vec![]);
    let cfg = OuterConfig::default();
    let rep = outer_solve(&prob, &w0, &cfg).unwrap().with_reference(&prob, &r).unwrap();
    assert_eq!(rep.status, SolveStatus::Converged);
    assert_eq!(rep.extrapolation_fallbacks, vec![0]);
    assert!(rep.trace[0].inner_iters > 0);
    let s = rep.summary(&prob).unwrap();
    assert_eq!(s.extrapolation_fallbacks, vec![0]);
}

#[test]
fn self_referenced_errors_without_reference() {
    let (prob, _) = builtin_problem("T2").unwrap();
    let inst = ProblemInstance::builtin("T2").unwrap();
    let rep = outer_solve(&prob, &inst.start, &OuterConfig::default()).unwrap();
    assert!(rep.self_referenced);
    assert_eq!(rep.trace.last().unwrap().err_to_ref, Some(0.0));
    assert!(rep.summary(&prob).unwrap().self_referenced);
}

#[test]
fn riptrm_merit_is_monotone_from_far_starts() {
    let (prob, r) = builtin_problem("T2").unwrap();
    for (x1, y) in [(0.99, 0.05), (0.6, 4.0), (0.95, 1.0)] {
        let x2 = -(1.0f64 - x1 * x1).sqrt();
        let w0 = PrimalDualPoint::new(prob.point(&[x1, x2]).unwrap(), vec![y], vec![]);
        let inst = ProblemInstance {
            problem: prob.clone(),
            reference: Some(r.clone()),
            start: w0,
        };
        let rep = solve(&inst, Algorithm::Riptrm, &TrustRegionConfig::default()).unwrap();
        assert_eq!(rep.status, SolveStatus::Converged, "({x1}, {y}): {:?}", rep.failure);
        for m in &rep.inner_merits {
            assert!(m.windows(2).all(|p| p[1] <= p[0]));
        }
        for (_, p) in &rep.inner_points {
            if prob.distance(p, &r.point).unwrap() <= 1e-3 {
                assert!(condensed_hessian(&prob, &p.x, &p.y).unwrap().lambda_min > 0.0);
            }
        }
    }
}
