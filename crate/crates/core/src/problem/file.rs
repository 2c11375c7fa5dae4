//! Problem-definition files for polynomial problems on `R^n`.
//!
//! TOML schema:
//!
//! ```toml
//! name = "box-qp"            # optional, defaults to the file stem
//! dimension = 2
//!
//! [objective]                # f(x) = sum coef * prod x_i^powers[i]
//! terms = [
//!   { coef = 0.5, powers = [2, 0] },
//!   { coef = 0.5, powers = [0, 2] },
//! ]
//!
//! [[inequalities]]           # g(x) >= 0, one table per constraint
//! terms = [{ coef = 1.0, powers = [1, 0] }]
//!
//! [[equalities]]             # h(x) = 0
//! terms = [{ coef = 1.0, powers = [1, 0] }, { coef = 1.0, powers = [0, 1] },
//!          { coef = -1.0, powers = [0, 0] }]
//!
//! [start]                    # strictly feasible start; y defaults to 1, z to 0
//! x = [0.7, 0.5]
//!
//! [reference]                # optional KKT point used for error traces
//! x = [0.5, 0.5]
//! y = [0.0]
//! z = [-0.5]
//! ```

use std::path::Path;

use nalgebra::DVector;
use serde::Deserialize;

use crate::error::{check_len, Error, Result};
use crate::manifold::Manifold;
use crate::problem::{
    ConstrainedProblem, Embedded, Monomial, Polynomial, PrimalDualPoint, ProblemInstance,
    ReferenceSolution,
};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemFile {
    name: Option<String>,
    dimension: usize,
    objective: PolynomialTable,
    #[serde(default)]
    inequalities: Vec<PolynomialTable>,
    #[serde(default)]
    equalities: Vec<PolynomialTable>,
    start: PointTable,
    reference: Option<PointTable>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolynomialTable {
    terms: Vec<Monomial>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PointTable {
    x: Vec<f64>,
    y: Option<Vec<f64>>,
    z: Option<Vec<f64>>,
}

impl PointTable {
    fn build(self, prob: &ConstrainedProblem) -> Result<PrimalDualPoint> {
        let x = prob.point(&self.x)?;
        let y = self.y.unwrap_or_else(|| vec![1.0; prob.m()]);
        let z = self.z.unwrap_or_else(|| vec![0.0; prob.p()]);
        check_len(prob.m(), y.len())?;
        check_len(prob.p(), z.len())?;
        Ok(PrimalDualPoint::new(x, DVector::from_vec(y), DVector::from_vec(z)))
    }
}

pub fn parse_problem_file(text: &str, default_name: &str) -> Result<ProblemInstance> {
    let parsed: ProblemFile = toml::from_str(text).map_err(|e| Error::ProblemFile(e.to_string()))?;
    let n = parsed.dimension;
    let poly = |t: PolynomialTable| Polynomial::new(n, t.terms).map(Embedded);
    let name = parsed.name.unwrap_or_else(|| default_name.to_string());
    let mut prob = ConstrainedProblem::new(name, Manifold::euclidean(n)?, poly(parsed.objective)?)?;
    for g in parsed.inequalities {
        prob = prob.with_inequality(poly(g)?)?;
    }
    for h in parsed.equalities {
        prob = prob.with_equality(poly(h)?)?;
    }
    let start = parsed.start.build(&prob)?;
    let reference = parsed
        .reference
        .map(|r| {
            r.build(&prob).map(|point| ReferenceSolution {
                point,
                provenance: "problem file".to_string(),
            })
        })
        .transpose()?;
    Ok(ProblemInstance {
        problem: prob,
        reference,
        start,
    })
}

pub fn load_problem_file(path: &Path) -> Result<ProblemInstance> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::ProblemFile(format!("{}: {e}", path.display())))?;
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("problem");
    parse_problem_file(&text, stem)
}

#[cfg(test)]
mod tests {
    use super::*;

    const T3_FILE: &str = r#"
dimension = 2

[objective]
terms = [{ coef = 0.5, powers = [2, 0] }, { coef = 0.5, powers = [0, 2] }]

[[inequalities]]
terms = [{ coef = 1.0, powers = [1, 0] }]

[[equalities]]
terms = [{ coef = 1.0, powers = [1, 0] }, { coef = 1.0, powers = [0, 1] },
         { coef = -1.0, powers = [0, 0] }]

[start]
x = [0.7, 0.5]

[reference]
x = [0.5, 0.5]
y = [0.0]
z = [-0.5]
"#;

    #[test]
    fn parses_the_documented_schema() {
        let inst = parse_problem_file(T3_FILE, "qp").unwrap();
        assert_eq!(inst.problem.name(), "qp");
        assert_eq!((inst.problem.m(), inst.problem.p()), (1, 1));
        assert_eq!(inst.start.y.as_slice(), &[1.0]);
        assert_eq!(inst.start.z.as_slice(), &[0.0]);
        let r = inst.reference.unwrap();
        let g = inst.problem.lagrangian_grad(&r.point).unwrap();
        assert_eq!(g.norm(), 0.0);
    }

    #[test]
    fn rejects_malformed_files() {
        assert!(matches!(
            parse_problem_file("dimension = 2", "x"),
            Err(Error::ProblemFile(_))
        ));
        let bad_powers = T3_FILE.replace("powers = [2, 0]", "powers = [2]");
        assert!(matches!(parse_problem_file(&bad_powers, "x"), Err(Error::ProblemFile(_))));
        let bad_start = T3_FILE.replace("x = [0.7, 0.5]", "x = [0.7]");
        assert!(matches!(
            parse_problem_file(&bad_start, "x"),
            Err(Error::DimensionMismatch { .. })
        ));
        let unknown = format!("{T3_FILE}\nextra = 1\n");
        assert!(parse_problem_file(&unknown, "x").is_err());
    }
}
