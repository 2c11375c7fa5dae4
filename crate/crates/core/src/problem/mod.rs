//! Constrained problems on manifolds:
//!
//! ```text
//! minimize f(x)  over x in M
//! subject to g_i(x) >= 0 (i = 1..m),  h_j(x) = 0 (j = 1..p)
//! ```
//!
//! with Lagrangian `L(x, y, z) = f(x) - sum_i y_i g_i(x) + sum_j z_j h_j(x)`.

mod builtin;
mod file;
mod polynomial;

use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;

use crate::error::{check_len, Error, Result};
use crate::manifold::{Manifold, Point, TangentVector};

pub use builtin::{builtin_problem, builtin_start, BUILTIN_NAMES};
pub use file::{load_problem_file, parse_problem_file};
pub use polynomial::{Monomial, Polynomial};

/// A real function on a manifold with Riemannian derivatives.
///
/// Implementations may assume the arguments live on the manifold the owning
/// problem was built on; [`ConstrainedProblem`] checks this before calling.
pub trait ScalarField: Send + Sync {
    fn value(&self, x: &Point) -> f64;
    fn grad(&self, x: &Point) -> TangentVector;
    /// `Hess f(x)[v]`, with `v` based at `x`.
    fn hess_vec(&self, x: &Point, v: &TangentVector) -> TangentVector;
    /// Ambient dimension the field expects, when it has one.
    fn ambient_dim(&self) -> Option<usize> {
        None
    }
}

/// A smooth function on the ambient Euclidean space.
pub trait AmbientField: Send + Sync {
    fn ambient_dim(&self) -> usize;
    fn value(&self, x: &DVector<f64>) -> f64;
    fn egrad(&self, x: &DVector<f64>) -> DVector<f64>;
    fn ehess_vec(&self, x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64>;
}

/// Restriction of an ambient function to an embedded manifold.
#[derive(Debug, Clone)]
pub struct Embedded<F>(pub F);

impl<F: AmbientField> ScalarField for Embedded<F> {
    fn value(&self, x: &Point) -> f64 {
        self.0.value(x.coords())
    }

    fn grad(&self, x: &Point) -> TangentVector {
        x.egrad_to_rgrad(self.0.egrad(x.coords()))
            .expect("ambient dimension checked at construction")
    }

    fn hess_vec(&self, x: &Point, v: &TangentVector) -> TangentVector {
        let egrad = self.0.egrad(x.coords());
        let ehv = self.0.ehess_vec(x.coords(), v.coords());
        x.ehess_to_rhess(&egrad, ehv, v)
            .expect("ambient dimension checked at construction")
    }

    fn ambient_dim(&self) -> Option<usize> {
        Some(self.0.ambient_dim())
    }
}

/// Primal-dual point `(x, y, z)`: inequality multipliers `y`, equality
/// multipliers `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimalDualPoint {
    pub x: Point,
    pub y: DVector<f64>,
    pub z: DVector<f64>,
}

impl PrimalDualPoint {
    pub fn new(x: Point, y: impl Into<DVector<f64>>, z: impl Into<DVector<f64>>) -> Self {
        PrimalDualPoint {
            x,
            y: y.into(),
            z: z.into(),
        }
    }
}

/// Known KKT point of a problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSolution {
    pub point: PrimalDualPoint,
    pub provenance: String,
}

impl ReferenceSolution {
    pub fn x_star(&self) -> &Point {
        &self.point.x
    }

    pub fn y_star(&self) -> &DVector<f64> {
        &self.point.y
    }

    pub fn z_star(&self) -> &DVector<f64> {
        &self.point.z
    }
}

#[derive(Clone)]
pub struct ConstrainedProblem {
    name: String,
    manifold: Arc<Manifold>,
    objective: Arc<dyn ScalarField>,
    inequalities: Vec<Arc<dyn ScalarField>>,
    equalities: Vec<Arc<dyn ScalarField>>,
}

impl fmt::Debug for ConstrainedProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConstrainedProblem")
            .field("name", &self.name)
            .field("manifold", &self.manifold)
            .field("m", &self.m())
            .field("p", &self.p())
            .finish()
    }
}

impl ConstrainedProblem {
    pub fn new(
        name: impl Into<String>,
        manifold: Arc<Manifold>,
        objective: impl ScalarField + 'static,
    ) -> Result<Self> {
        check_field_dim(&manifold, &objective)?;
        Ok(ConstrainedProblem {
            name: name.into(),
            manifold,
            objective: Arc::new(objective),
            inequalities: Vec::new(),
            equalities: Vec::new(),
        })
    }

    /// Adds `g(x) >= 0`.
    pub fn with_inequality(mut self, g: impl ScalarField + 'static) -> Result<Self> {
        check_field_dim(&self.manifold, &g)?;
        self.inequalities.push(Arc::new(g));
        Ok(self)
    }

    /// Adds `h(x) = 0`.
    pub fn with_equality(mut self, h: impl ScalarField + 'static) -> Result<Self> {
        check_field_dim(&self.manifold, &h)?;
        self.equalities.push(Arc::new(h));
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn manifold(&self) -> &Arc<Manifold> {
        &self.manifold
    }

    /// Number of inequality constraints.
    pub fn m(&self) -> usize {
        self.inequalities.len()
    }

    /// Number of equality constraints.
    pub fn p(&self) -> usize {
        self.equalities.len()
    }

    pub fn objective(&self) -> &dyn ScalarField {
        self.objective.as_ref()
    }

    pub fn inequality(&self, i: usize) -> &dyn ScalarField {
        self.inequalities[i].as_ref()
    }

    pub fn equality(&self, j: usize) -> &dyn ScalarField {
        self.equalities[j].as_ref()
    }

    pub fn point(&self, coords: &[f64]) -> Result<Point> {
        Point::from_slice(self.manifold.clone(), coords)
    }

    pub(crate) fn check_point(&self, x: &Point) -> Result<()> {
        if x.manifold().as_ref() == self.manifold.as_ref() {
            Ok(())
        } else {
            Err(Error::InvalidManifold(format!(
                "point does not live on the manifold of problem `{}`",
                self.name
            )))
        }
    }

    pub(crate) fn check_omega(&self, w: &PrimalDualPoint) -> Result<()> {
        self.check_point(&w.x)?;
        check_len(self.m(), w.y.len())?;
        check_len(self.p(), w.z.len())
    }

    pub fn ineq_values(&self, x: &Point) -> Result<DVector<f64>> {
        self.check_point(x)?;
        Ok(DVector::from_iterator(
            self.m(),
            self.inequalities.iter().map(|g| g.value(x)),
        ))
    }

    pub fn eq_values(&self, x: &Point) -> Result<DVector<f64>> {
        self.check_point(x)?;
        Ok(DVector::from_iterator(
            self.p(),
            self.equalities.iter().map(|h| h.value(x)),
        ))
    }

    pub fn ineq_grads(&self, x: &Point) -> Result<Vec<TangentVector>> {
        self.check_point(x)?;
        Ok(self.inequalities.iter().map(|g| g.grad(x)).collect())
    }

    pub fn eq_grads(&self, x: &Point) -> Result<Vec<TangentVector>> {
        self.check_point(x)?;
        Ok(self.equalities.iter().map(|h| h.grad(x)).collect())
    }

    /// `grad f(x) - sum_i y_i grad g_i(x) + sum_j z_j grad h_j(x)`.
    pub fn lagrangian_grad(&self, w: &PrimalDualPoint) -> Result<TangentVector> {
        self.check_omega(w)?;
        let x = &w.x;
        let mut out = self.objective.grad(x);
        for (g, yi) in self.inequalities.iter().zip(w.y.iter()) {
            out.axpy(-yi, &g.grad(x))?;
        }
        for (h, zj) in self.equalities.iter().zip(w.z.iter()) {
            out.axpy(*zj, &h.grad(x))?;
        }
        Ok(out)
    }

    /// `Hess f(x)[v] - sum_i y_i Hess g_i(x)[v] + sum_j z_j Hess h_j(x)[v]`.
    pub fn lagrangian_hess_vec(
        &self,
        w: &PrimalDualPoint,
        v: &TangentVector,
    ) -> Result<TangentVector> {
        self.check_omega(w)?;
        let x = &w.x;
        x.norm(v)?;
        let mut out = self.objective.hess_vec(x, v);
        for (g, yi) in self.inequalities.iter().zip(w.y.iter()) {
            out.axpy(-yi, &g.hess_vec(x, v))?;
        }
        for (h, zj) in self.equalities.iter().zip(w.z.iter()) {
            out.axpy(*zj, &h.hess_vec(x, v))?;
        }
        Ok(out)
    }

    /// Indices `i` with `g_i(x) <= tol`.
    pub fn active_set(&self, x: &Point, tol: f64) -> Result<Vec<usize>> {
        let g = self.ineq_values(x)?;
        Ok((0..self.m()).filter(|&i| g[i] <= tol).collect())
    }

    /// `g(x) > 0` and `y > 0` componentwise.
    pub fn is_strictly_feasible(&self, w: &PrimalDualPoint) -> Result<bool> {
        self.check_omega(w)?;
        let g = self.ineq_values(&w.x)?;
        Ok(g.iter().all(|&gi| gi > 0.0) && w.y.iter().all(|&yi| yi > 0.0))
    }

    /// Product-metric distance: geodesic distance on `x`, Euclidean on `(y, z)`.
    pub fn distance(&self, a: &PrimalDualPoint, b: &PrimalDualPoint) -> Result<f64> {
        self.check_omega(a)?;
        self.check_omega(b)?;
        let dx = a.x.distance(&b.x)?;
        let dy = (&a.y - &b.y).norm();
        let dz = (&a.z - &b.z).norm();
        Ok((dx * dx + dy * dy + dz * dz).sqrt())
    }
}

fn check_field_dim(manifold: &Manifold, field: &dyn ScalarField) -> Result<()> {
    match field.ambient_dim() {
        Some(n) => check_len(manifold.ambient_dim(), n),
        None => Ok(()),
    }
}

/// A problem together with a start point and, when known, a reference KKT point.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    pub problem: ConstrainedProblem,
    pub reference: Option<ReferenceSolution>,
    pub start: PrimalDualPoint,
}

impl ProblemInstance {
    pub fn builtin(name: &str) -> Result<Self> {
        let (problem, reference) = builtin_problem(name)?;
        let start = builtin_start(name)?;
        Ok(ProblemInstance {
            problem,
            reference: Some(reference),
            start,
        })
    }

    /// A built-in name, or otherwise a path to a problem file.
    pub fn resolve(name_or_path: &str) -> Result<Self> {
        match Self::builtin(name_or_path) {
            Err(Error::UnknownProblem(_)) => load_problem_file(std::path::Path::new(name_or_path)),
            other => other,
        }
    }
}
