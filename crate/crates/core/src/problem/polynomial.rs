use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::AmbientField;

/// `coef * prod_i x_i^powers[i]`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Monomial {
    pub coef: f64,
    pub powers: Vec<u32>,
}

/// Polynomial on `R^n` given by a coefficient table of monomials.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    dim: usize,
    terms: Vec<Monomial>,
}

impl Polynomial {
    pub fn new(dim: usize, terms: Vec<Monomial>) -> Result<Self> {
        for (t, term) in terms.iter().enumerate() {
            if term.powers.len() != dim {
                return Err(Error::ProblemFile(format!(
                    "term {t} has {} exponents, expected {dim}",
                    term.powers.len()
                )));
            }
            if !term.coef.is_finite() {
                return Err(Error::ProblemFile(format!("term {t} has a non-finite coefficient")));
            }
        }
        Ok(Polynomial { dim, terms })
    }

    /// Affine function `c + a . x`.
    pub fn affine(constant: f64, linear: &[f64]) -> Self {
        let dim = linear.len();
        let mut terms = vec![Monomial {
            coef: constant,
            powers: vec![0; dim],
        }];
        for (i, &a) in linear.iter().enumerate() {
            let mut powers = vec![0; dim];
            powers[i] = 1;
            terms.push(Monomial { coef: a, powers });
        }
        terms.retain(|t| t.coef != 0.0);
        Polynomial { dim, terms }
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }
}

/// `x^p` with the derivative-friendly convention `x^0 = 1`.
fn pow(x: f64, p: u32) -> f64 {
    x.powi(p as i32)
}

impl AmbientField for Polynomial {
    fn ambient_dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &DVector<f64>) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coef * t.powers.iter().zip(x.iter()).map(|(&p, &xi)| pow(xi, p)).product::<f64>())
            .sum()
    }

    fn egrad(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut g = DVector::zeros(self.dim);
        for t in &self.terms {
            for i in 0..self.dim {
                let pi = t.powers[i];
                if pi == 0 {
                    continue;
                }
                let mut prod = t.coef * pi as f64 * pow(x[i], pi - 1);
                for (j, &pj) in t.powers.iter().enumerate() {
                    if j != i {
                        prod *= pow(x[j], pj);
                    }
                }
                g[i] += prod;
            }
        }
        g
    }

    fn ehess_vec(&self, x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        let n = self.dim;
        let mut out = DVector::zeros(n);
        for t in &self.terms {
            for i in 0..n {
                for j in 0..n {
                    let entry = second_partial(t, x, i, j);
                    out[i] += entry * v[j];
                }
            }
        }
        out
    }
}

fn second_partial(t: &Monomial, x: &DVector<f64>, i: usize, j: usize) -> f64 {
    let mut powers = t.powers.clone();
    let mut coef = t.coef;
    for k in [i, j] {
        if powers[k] == 0 {
            return 0.0;
        }
        coef *= powers[k] as f64;
        powers[k] -= 1;
    }
    coef * powers.iter().zip(x.iter()).map(|(&p, &xi)| pow(xi, p)).product::<f64>()
}
