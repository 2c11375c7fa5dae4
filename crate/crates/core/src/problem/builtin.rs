//! Built-in test problems with closed-form KKT points.
//!
//! | name | manifold               | problem                                                    |
//! |------|------------------------|------------------------------------------------------------|
//! | T1   | R                      | min x  s.t. x >= 0                                         |
//! | T2   | S^1 in R^2             | min x2 s.t. x1 - 1/2 >= 0                                  |
//! | T3   | R^2                    | min |x|^2/2 s.t. x1 + x2 - 1 = 0, x1 >= 0                  |
//! | T4   | S^1 x R                | min u2 s.t. s >= 0, s - (u1 - 1/2) = 0  (T2 with a slack)  |

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::manifold::{Manifold, Point};
use crate::problem::{ConstrainedProblem, Embedded, Polynomial, PrimalDualPoint, ReferenceSolution};

pub const BUILTIN_NAMES: [&str; 4] = ["T1", "T2", "T3", "T4"];

fn canonical(name: &str) -> Result<&'static str> {
    BUILTIN_NAMES
        .iter()
        .copied()
        .find(|n| n.eq_ignore_ascii_case(name))
        .ok_or_else(|| Error::UnknownProblem(name.to_string()))
}

fn reference(
    prob: &ConstrainedProblem,
    x: &[f64],
    y: &[f64],
    z: &[f64],
    provenance: &str,
) -> Result<ReferenceSolution> {
    Ok(ReferenceSolution {
        point: PrimalDualPoint::new(
            Point::from_slice(prob.manifold().clone(), x)?,
            DVector::from_column_slice(y),
            DVector::from_column_slice(z),
        ),
        provenance: provenance.to_string(),
    })
}

pub fn builtin_problem(name: &str) -> Result<(ConstrainedProblem, ReferenceSolution)> {
    let half_sqrt3 = 0.75f64.sqrt();
    let inv_sqrt3 = 1.0 / 3.0f64.sqrt();
    match canonical(name)? {
        "T1" => {
            let prob = ConstrainedProblem::new(
                "T1",
                Manifold::euclidean(1)?,
                Embedded(Polynomial::affine(0.0, &[1.0])),
            )?
            .with_inequality(Embedded(Polynomial::affine(0.0, &[1.0])))?;
            let r = reference(&prob, &[0.0], &[1.0], &[], "closed form: grad f = y grad g, x = 0")?;
            Ok((prob, r))
        }
        "T2" => {
            let prob = ConstrainedProblem::new(
                "T2",
                Manifold::sphere(2)?,
                Embedded(Polynomial::affine(0.0, &[0.0, 1.0])),
            )?
            .with_inequality(Embedded(Polynomial::affine(-0.5, &[1.0, 0.0])))?;
            let r = reference(
                &prob,
                &[0.5, -half_sqrt3],
                &[inv_sqrt3],
                &[],
                "closed form: active bound x1 = 1/2 on the lower half circle, y = 1/sqrt(3)",
            )?;
            Ok((prob, r))
        }
        "T3" => {
            let half_norm_sq = Polynomial::new(
                2,
                vec![
                    super::Monomial { coef: 0.5, powers: vec![2, 0] },
                    super::Monomial { coef: 0.5, powers: vec![0, 2] },
                ],
            )?;
            let prob = ConstrainedProblem::new("T3", Manifold::euclidean(2)?, Embedded(half_norm_sq))?
                .with_equality(Embedded(Polynomial::affine(-1.0, &[1.0, 1.0])))?
                .with_inequality(Embedded(Polynomial::affine(0.0, &[1.0, 0.0])))?;
            let r = reference(
                &prob,
                &[0.5, 0.5],
                &[0.0],
                &[-0.5],
                "closed form: linear KKT system x + z (1, 1) = 0, bound inactive",
            )?;
            Ok((prob, r))
        }
        "T4" => {
            let manifold = Manifold::product(vec![Manifold::Sphere(2), Manifold::Euclidean(1)])?;
            // Ambient coordinates (u1, u2, s).
            let prob = ConstrainedProblem::new(
                "T4",
                manifold,
                Embedded(Polynomial::affine(0.0, &[0.0, 1.0, 0.0])),
            )?
            .with_inequality(Embedded(Polynomial::affine(0.0, &[0.0, 0.0, 1.0])))?
            .with_equality(Embedded(Polynomial::affine(0.5, &[-1.0, 0.0, 1.0])))?;
            let r = reference(
                &prob,
                &[0.5, -half_sqrt3, 0.0],
                &[inv_sqrt3],
                &[inv_sqrt3],
                "closed form: T2 solution with slack s = 0, y = z = 1/sqrt(3)",
            )?;
            Ok((prob, r))
        }
        _ => unreachable!(),
    }
}

/// Default strictly feasible start point of a built-in problem.
pub fn builtin_start(name: &str) -> Result<PrimalDualPoint> {
    let (prob, _) = builtin_problem(name)?;
    let c = std::f64::consts::FRAC_1_SQRT_2;
    let (x, y, z): (&[f64], &[f64], &[f64]) = match prob.name() {
        "T1" => (&[1.0], &[1.0], &[]),
        "T2" => (&[c, -c], &[0.5], &[]),
        "T3" => (&[0.7, 0.5], &[0.5], &[0.0]),
        "T4" => (&[c, -c, 0.2], &[0.5], &[0.5]),
        _ => unreachable!(),
    };
    Ok(PrimalDualPoint::new(
        prob.point(x)?,
        DVector::from_column_slice(y),
        DVector::from_column_slice(z),
    ))
}
