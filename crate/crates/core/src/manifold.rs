//! Geometry kernel: points, tangent vectors, metric, retraction, vector
//! transport and orthonormal tangent bases.
//!
//! Every manifold here is embedded in a Euclidean ambient space and carries
//! the induced metric, so points and tangent vectors are stored as ambient
//! coordinate vectors and the metric is the ambient dot product. Products
//! concatenate the ambient coordinates of their factors.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{check_len, Error, Result};

/// Tolerance on `|1 + <p, q>|` below which two sphere points count as antipodal.
const ANTIPODAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum Manifold {
    /// `R^n`.
    Euclidean(usize),
    /// Unit sphere in `R^n` (intrinsic dimension `n - 1`).
    Sphere(usize),
    Product(Vec<Manifold>),
}

#[derive(Debug, Clone, Copy)]
enum Leaf {
    Euclidean(usize),
    Sphere(usize),
}

impl Leaf {
    fn ambient_dim(self) -> usize {
        match self {
            Leaf::Euclidean(n) | Leaf::Sphere(n) => n,
        }
    }
}

impl Manifold {
    pub fn euclidean(n: usize) -> Result<Arc<Self>> {
        Manifold::Euclidean(n).validated()
    }

    pub fn sphere(n: usize) -> Result<Arc<Self>> {
        Manifold::Sphere(n).validated()
    }

    pub fn product(factors: Vec<Manifold>) -> Result<Arc<Self>> {
        Manifold::Product(factors).validated()
    }

    /// Checks the descriptor and wraps it for sharing between points.
    pub fn validated(self) -> Result<Arc<Self>> {
        self.validate()?;
        Ok(Arc::new(self))
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Manifold::Euclidean(0) => Err(Error::InvalidManifold(
                "Euclidean space needs dimension >= 1".into(),
            )),
            Manifold::Sphere(n) if *n < 2 => Err(Error::InvalidManifold(
                "sphere needs ambient dimension >= 2".into(),
            )),
            Manifold::Product(fs) if fs.is_empty() => {
                Err(Error::InvalidManifold("empty product".into()))
            }
            Manifold::Product(fs) => fs.iter().try_for_each(Manifold::validate),
            _ => Ok(()),
        }
    }

    pub fn intrinsic_dim(&self) -> usize {
        match self {
            Manifold::Euclidean(n) => *n,
            Manifold::Sphere(n) => n - 1,
            Manifold::Product(fs) => fs.iter().map(Manifold::intrinsic_dim).sum(),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        match self {
            Manifold::Euclidean(n) | Manifold::Sphere(n) => *n,
            Manifold::Product(fs) => fs.iter().map(Manifold::ambient_dim).sum(),
        }
    }

    /// Flattened factors with their offsets into the ambient coordinates.
    fn leaves(&self) -> Vec<(Leaf, usize)> {
        fn walk(m: &Manifold, offset: &mut usize, out: &mut Vec<(Leaf, usize)>) {
            match m {
                Manifold::Euclidean(n) => {
                    out.push((Leaf::Euclidean(*n), *offset));
                    *offset += n;
                }
                Manifold::Sphere(n) => {
                    out.push((Leaf::Sphere(*n), *offset));
                    *offset += n;
                }
                Manifold::Product(fs) => fs.iter().for_each(|f| walk(f, offset, out)),
            }
        }
        let mut out = Vec::new();
        walk(self, &mut 0, &mut out);
        out
    }

    fn project_point(&self, coords: &mut DVector<f64>) -> Result<()> {
        for (leaf, off) in self.leaves() {
            if let Leaf::Sphere(n) = leaf {
                let mut block = coords.rows_mut(off, n);
                let norm = block.norm();
                if !(norm > 0.0 && norm.is_finite()) {
                    return Err(Error::InvalidManifold(
                        "sphere point must have finite nonzero norm".into(),
                    ));
                }
                block /= norm;
            }
        }
        Ok(())
    }

    fn project_tangent(&self, p: &DVector<f64>, v: &mut DVector<f64>) {
        for (leaf, off) in self.leaves() {
            if let Leaf::Sphere(n) = leaf {
                let pb = p.rows(off, n);
                let c = pb.dot(&v.rows(off, n));
                v.rows_mut(off, n).axpy(-c, &pb, 1.0);
            }
        }
    }

    fn retract_coords(&self, p: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
        let mut q = p + u;
        for (leaf, off) in self.leaves() {
            if let Leaf::Sphere(n) = leaf {
                let mut block = q.rows_mut(off, n);
                // |p + u| >= 1 because u is orthogonal to the unit vector p.
                let norm = block.norm();
                block /= norm;
            }
        }
        q
    }

    fn transport_coords(
        &self,
        p: &DVector<f64>,
        q: &DVector<f64>,
        u: &DVector<f64>,
    ) -> Result<DVector<f64>> {
        let mut out = u.clone();
        for (leaf, off) in self.leaves() {
            if let Leaf::Sphere(n) = leaf {
                let pb = p.rows(off, n);
                let qb = q.rows(off, n);
                let denom = 1.0 + pb.dot(&qb);
                if denom <= ANTIPODAL_TOL {
                    return Err(Error::AntipodalPoints);
                }
                let c = qb.dot(&u.rows(off, n)) / denom;
                let mut ob = out.rows_mut(off, n);
                ob.axpy(-c, &pb, 1.0);
                ob.axpy(-c, &qb, 1.0);
            }
        }
        self.project_tangent(q, &mut out);
        Ok(out)
    }

    fn distance_coords(&self, p: &DVector<f64>, q: &DVector<f64>) -> f64 {
        self.leaves()
            .into_iter()
            .map(|(leaf, off)| {
                let n = leaf.ambient_dim();
                let chord = (p.rows(off, n) - q.rows(off, n)).norm();
                match leaf {
                    Leaf::Euclidean(_) => chord * chord,
                    Leaf::Sphere(_) => {
                        let angle = 2.0 * (0.5 * chord).min(1.0).asin();
                        angle * angle
                    }
                }
            })
            .sum::<f64>()
            .sqrt()
    }

    fn basis_coords(&self, p: &DVector<f64>) -> DMatrix<f64> {
        let mut cols = DMatrix::zeros(self.ambient_dim(), self.intrinsic_dim());
        let mut col = 0;
        for (leaf, off) in self.leaves() {
            match leaf {
                Leaf::Euclidean(n) => {
                    for i in 0..n {
                        cols[(off + i, col)] = 1.0;
                        col += 1;
                    }
                }
                Leaf::Sphere(n) => {
                    let pb: DVector<f64> = p.rows(off, n).into_owned();
                    for b in sphere_basis(&pb) {
                        cols.view_mut((off, col), (n, 1)).copy_from(&b);
                        col += 1;
                    }
                }
            }
        }
        cols
    }
}

/// Orthonormal basis of the tangent space of the unit sphere at `p`:
/// Gram-Schmidt of the standard basis (skipping the axis most aligned with
/// `p`) against `p`, each column signed so its first nonzero entry is positive.
fn sphere_basis(p: &DVector<f64>) -> Vec<DVector<f64>> {
    let n = p.len();
    let skip = p.iamax();
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(n - 1);
    for j in (0..n).filter(|&j| j != skip) {
        let mut v = DVector::zeros(n);
        v[j] = 1.0;
        for _ in 0..2 {
            let c = p.dot(&v);
            v.axpy(-c, p, 1.0);
            for b in &basis {
                let c = b.dot(&v);
                v.axpy(-c, b, 1.0);
            }
        }
        v /= v.norm();
        if let Some(first) = v.iter().find(|c| c.abs() > 1e-12) {
            if *first < 0.0 {
                v.neg_mut();
            }
        }
        basis.push(v);
    }
    basis
}

/// A point on a manifold, in ambient coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    coords: DVector<f64>,
    manifold: Arc<Manifold>,
}

/// A tangent vector in ambient coordinates together with its base point.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    coords: DVector<f64>,
    base: Point,
}

/// Orthonormal basis of a tangent space, stored as ambient columns.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentBasis {
    base: Point,
    columns: DMatrix<f64>,
}

impl Point {
    /// Builds a point; sphere factors are renormalized.
    pub fn new(manifold: Arc<Manifold>, coords: impl Into<DVector<f64>>) -> Result<Self> {
        let mut coords = coords.into();
        check_len(manifold.ambient_dim(), coords.len())?;
        manifold.project_point(&mut coords)?;
        Ok(Point { coords, manifold })
    }

    pub fn from_slice(manifold: Arc<Manifold>, coords: &[f64]) -> Result<Self> {
        Point::new(manifold, DVector::from_column_slice(coords))
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.coords
    }

    pub fn manifold(&self) -> &Arc<Manifold> {
        &self.manifold
    }

    pub fn dim(&self) -> usize {
        self.manifold.intrinsic_dim()
    }

    /// Projects ambient `coords` onto the tangent space at this point.
    pub fn tangent(&self, coords: impl Into<DVector<f64>>) -> Result<TangentVector> {
        let mut coords = coords.into();
        check_len(self.coords.len(), coords.len())?;
        self.manifold.project_tangent(&self.coords, &mut coords);
        Ok(TangentVector {
            coords,
            base: self.clone(),
        })
    }

    pub fn zero_tangent(&self) -> TangentVector {
        TangentVector {
            coords: DVector::zeros(self.coords.len()),
            base: self.clone(),
        }
    }

    fn check_base(&self, u: &TangentVector) -> Result<()> {
        if u.base.coords == self.coords && u.base.manifold == self.manifold {
            Ok(())
        } else {
            Err(Error::BaseMismatch)
        }
    }

    /// Riemannian metric at this point.
    pub fn inner(&self, u: &TangentVector, v: &TangentVector) -> Result<f64> {
        self.check_base(u)?;
        self.check_base(v)?;
        Ok(u.coords.dot(&v.coords))
    }

    pub fn norm(&self, u: &TangentVector) -> Result<f64> {
        self.check_base(u)?;
        Ok(u.coords.norm())
    }

    /// Second-order retraction: `p + u` on Euclidean factors, metric
    /// projection `(p + u) / |p + u|` on sphere factors.
    pub fn retract(&self, u: &TangentVector) -> Result<Point> {
        self.check_base(u)?;
        Ok(Point {
            coords: self.manifold.retract_coords(&self.coords, &u.coords),
            manifold: self.manifold.clone(),
        })
    }

    /// Parallel transport of `u` along the minimizing geodesic to `q`.
    pub fn transport(&self, q: &Point, u: &TangentVector) -> Result<TangentVector> {
        self.check_base(u)?;
        self.check_same_manifold(q)?;
        let coords = self
            .manifold
            .transport_coords(&self.coords, &q.coords, &u.coords)?;
        Ok(TangentVector {
            coords,
            base: q.clone(),
        })
    }

    /// Geodesic distance.
    pub fn distance(&self, q: &Point) -> Result<f64> {
        self.check_same_manifold(q)?;
        Ok(self.manifold.distance_coords(&self.coords, &q.coords))
    }

    pub fn tangent_basis(&self) -> TangentBasis {
        TangentBasis {
            columns: self.manifold.basis_coords(&self.coords),
            base: self.clone(),
        }
    }

    /// Riemannian gradient from the Euclidean gradient of a smooth extension.
    pub fn egrad_to_rgrad(&self, egrad: DVector<f64>) -> Result<TangentVector> {
        self.tangent(egrad)
    }

    /// Riemannian Hessian-vector product from Euclidean derivatives of a
    /// smooth extension: `Proj(D^2 f[v]) - <p, grad_e f> v` on sphere factors.
    pub fn ehess_to_rhess(
        &self,
        egrad: &DVector<f64>,
        ehess_v: DVector<f64>,
        v: &TangentVector,
    ) -> Result<TangentVector> {
        self.check_base(v)?;
        check_len(self.coords.len(), egrad.len())?;
        check_len(self.coords.len(), ehess_v.len())?;
        let mut out = ehess_v;
        self.manifold.project_tangent(&self.coords, &mut out);
        for (leaf, off) in self.manifold.leaves() {
            if let Leaf::Sphere(n) = leaf {
                let c = self.coords.rows(off, n).dot(&egrad.rows(off, n));
                out.rows_mut(off, n).axpy(-c, &v.coords.rows(off, n), 1.0);
            }
        }
        Ok(TangentVector {
            coords: out,
            base: self.clone(),
        })
    }

    fn check_same_manifold(&self, q: &Point) -> Result<()> {
        if self.manifold == q.manifold {
            Ok(())
        } else {
            Err(Error::InvalidManifold("points live on different manifolds".into()))
        }
    }
}

impl TangentVector {
    pub fn coords(&self) -> &DVector<f64> {
        &self.coords
    }

    pub fn base(&self) -> &Point {
        &self.base
    }

    pub fn into_coords(self) -> DVector<f64> {
        self.coords
    }

    pub fn scaled(&self, a: f64) -> TangentVector {
        TangentVector {
            coords: &self.coords * a,
            base: self.base.clone(),
        }
    }

    /// `self += a * other`
    pub fn axpy(&mut self, a: f64, other: &TangentVector) -> Result<()> {
        self.base.check_base(other)?;
        self.coords.axpy(a, &other.coords, 1.0);
        Ok(())
    }

    pub fn norm(&self) -> f64 {
        self.coords.norm()
    }
}

impl TangentBasis {
    pub fn base(&self) -> &Point {
        &self.base
    }

    /// Ambient coordinates of the basis vectors, one per column.
    pub fn columns(&self) -> &DMatrix<f64> {
        &self.columns
    }

    pub fn dim(&self) -> usize {
        self.columns.ncols()
    }

    pub fn column(&self, j: usize) -> TangentVector {
        TangentVector {
            coords: self.columns.column(j).into_owned(),
            base: self.base.clone(),
        }
    }

    /// Coefficients of `u` in this basis.
    pub fn coefficients(&self, u: &TangentVector) -> Result<DVector<f64>> {
        self.base.check_base(u)?;
        Ok(self.columns.tr_mul(&u.coords))
    }

    pub fn vector(&self, coefficients: &DVector<f64>) -> Result<TangentVector> {
        check_len(self.dim(), coefficients.len())?;
        Ok(TangentVector {
            coords: &self.columns * coefficients,
            base: self.base.clone(),
        })
    }
}
