//! Convex-set primitives backed by support functions.
//!
//! Every body exposes `h(u) = max_{x in body} <x, u>` through
//! [`ConvexBody::support_point`]; distances between bodies are computed by
//! GJK on the Minkowski difference (see [`gjk_distance`]) and containment in
//! a convex polygon by comparing face offsets against the support function.

mod gjk;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

pub use gjk::gjk_distance;

/// A point or direction in `d`-dimensional space.
pub type VecD = DVector<f64>;

/// Tolerance on asymmetry accepted when building a [`SymMatrix`].
const SYMMETRY_TOL: f64 = 1e-12;

/// Tolerance used by [`sym_sqrt`] for asymmetry and negative eigenvalues.
const SQRT_TOL: f64 = 1e-9;

/// Convenience constructor for a 2D vector.
pub fn vec2(x: f64, y: f64) -> VecD {
    DVector::from_vec(vec![x, y])
}

/// Symmetric square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix(DMatrix<f64>);

impl SymMatrix {
    /// Wraps `m` after checking that it is square and symmetric within
    /// `1e-12` (relative to its largest entry). The stored matrix is the
    /// exact symmetrization `(m + mᵀ)/2`.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        Self::with_tolerance(m, SYMMETRY_TOL)
    }

    fn with_tolerance(m: DMatrix<f64>, tol: f64) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::domain(format!(
                "matrix must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("matrix has non-finite entries"));
        }
        let scale = m.amax().max(1.0);
        let asym = (&m - m.transpose()).amax();
        if asym > tol * scale {
            return Err(Error::domain(format!(
                "matrix is not symmetric (max asymmetry {asym:e})"
            )));
        }
        let sym = (&m + m.transpose()) * 0.5;
        Ok(SymMatrix(sym))
    }

    pub fn identity(k: usize) -> Self {
        SymMatrix(DMatrix::identity(k, k))
    }

    pub fn scaled_identity(k: usize, value: f64) -> Self {
        SymMatrix(DMatrix::identity(k, k) * value)
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        SymMatrix(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    /// `Some(q)` when the matrix equals `q·I` exactly.
    pub fn isotropic_value(&self) -> Option<f64> {
        let k = self.dim();
        let q = self.0[(0, 0)];
        for i in 0..k {
            for j in 0..k {
                let expected = if i == j { q } else { 0.0 };
                if self.0[(i, j)] != expected {
                    return None;
                }
            }
        }
        Some(q)
    }

    /// Largest eigenvalue.
    pub fn max_eigenvalue(&self) -> f64 {
        if let Some(q) = self.isotropic_value() {
            return q;
        }
        SymmetricEigen::new(self.0.clone())
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Symmetric positive semidefinite square root `R` with `R·R = M`.
///
/// Computed from the eigendecomposition `M = V diag(σ) Vᵀ` as
/// `R = V diag(√σ) Vᵀ`. Eigenvalues in `[-1e-9, 0)` are treated as zero.
pub fn sym_sqrt(m: &DMatrix<f64>) -> Result<SymMatrix> {
    let sym = SymMatrix::with_tolerance(m.clone(), SQRT_TOL)?;
    let eig = SymmetricEigen::new(sym.0);
    let scale = eig.eigenvalues.amax().max(1.0);
    if let Some(min) = eig
        .eigenvalues
        .iter()
        .cloned()
        .reduce(f64::min)
        .filter(|&v| v < -SQRT_TOL * scale)
    {
        return Err(Error::domain(format!(
            "matrix is not positive semidefinite (eigenvalue {min:e})"
        )));
    }
    let roots = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
    let v = &eig.eigenvectors;
    let r = v * DMatrix::from_diagonal(&roots) * v.transpose();
    // symmetrize away the rounding from the triple product
    let r = (&r + r.transpose()) * 0.5;
    Ok(SymMatrix(r))
}

/// Convex body described by its support function.
#[derive(Debug, Clone, PartialEq)]
pub enum ConvexBody {
    /// Closed Euclidean ball.
    Disc { center: VecD, radius: f64 },
    /// Convex hull of a nonempty vertex list; vertices need not be extreme.
    Polytope { vertices: Vec<VecD> },
    /// `{center + scale · shape^½ v : ‖v‖ ≤ 1}` with `shape` PSD.
    Ellipsoid {
        center: VecD,
        shape: SymMatrix,
        scale: f64,
    },
}

fn check_finite(v: &VecD, what: &str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::Construction(format!("{what} has non-finite coordinates")))
    }
}

impl ConvexBody {
    pub fn disc(center: VecD, radius: f64) -> Result<Self> {
        check_finite(&center, "disc center")?;
        if !(radius >= 0.0 && radius.is_finite()) {
            return Err(Error::Construction(format!(
                "disc radius must be finite and nonnegative, got {radius}"
            )));
        }
        Ok(ConvexBody::Disc { center, radius })
    }

    pub fn point(p: VecD) -> Self {
        ConvexBody::Polytope { vertices: vec![p] }
    }

    pub fn polytope(vertices: Vec<VecD>) -> Result<Self> {
        let first = vertices
            .first()
            .ok_or_else(|| Error::Construction("polytope needs at least one vertex".into()))?;
        let d = first.len();
        for v in &vertices {
            if v.len() != d {
                return Err(Error::Construction(
                    "polytope vertices have mixed dimensions".into(),
                ));
            }
            check_finite(v, "polytope vertex")?;
        }
        Ok(ConvexBody::Polytope { vertices })
    }

    pub fn ellipsoid(center: VecD, shape: SymMatrix, scale: f64) -> Result<Self> {
        check_finite(&center, "ellipsoid center")?;
        if shape.dim() != center.len() {
            return Err(Error::Construction(format!(
                "ellipsoid shape is {}x{} but center has dimension {}",
                shape.dim(),
                shape.dim(),
                center.len()
            )));
        }
        if !(scale >= 0.0 && scale.is_finite()) {
            return Err(Error::Construction(format!(
                "ellipsoid scale must be finite and nonnegative, got {scale}"
            )));
        }
        // PSD check
        sym_sqrt(shape.as_matrix())
            .map_err(|e| Error::Construction(format!("ellipsoid shape: {e}")))?;
        Ok(ConvexBody::Ellipsoid {
            center,
            shape,
            scale,
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexBody::Disc { center, .. } => center.len(),
            ConvexBody::Polytope { vertices } => vertices[0].len(),
            ConvexBody::Ellipsoid { center, .. } => center.len(),
        }
    }

    /// Point of the body maximizing `<x, direction>`.
    pub fn support_point(&self, direction: &VecD) -> Result<VecD> {
        if direction.len() != self.dim() {
            return Err(Error::domain(format!(
                "direction has dimension {}, body has dimension {}",
                direction.len(),
                self.dim()
            )));
        }
        let norm = direction.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::domain("support direction must be nonzero and finite"));
        }
        Ok(self.support_unchecked(direction))
    }

    /// Support function value `h(u)`.
    pub fn support_value(&self, direction: &VecD) -> Result<f64> {
        Ok(self.support_point(direction)?.dot(direction))
    }

    /// Support point without argument validation; `direction` must be
    /// nonzero and of matching dimension.
    pub(crate) fn support_unchecked(&self, u: &VecD) -> VecD {
        match self {
            ConvexBody::Disc { center, radius } => center + u * (*radius / u.norm()),
            ConvexBody::Polytope { vertices } => {
                let mut best = &vertices[0];
                let mut best_val = best.dot(u);
                for v in &vertices[1..] {
                    let val = v.dot(u);
                    if val > best_val {
                        best = v;
                        best_val = val;
                    }
                }
                best.clone()
            }
            ConvexBody::Ellipsoid {
                center,
                shape,
                scale,
            } => {
                let qu = shape.as_matrix() * u;
                let quad = u.dot(&qu);
                if quad > 0.0 && *scale > 0.0 {
                    center + qu * (*scale / quad.sqrt())
                } else {
                    center.clone()
                }
            }
        }
    }

    /// Support value without argument validation.
    pub(crate) fn support_value_unchecked(&self, u: &VecD) -> f64 {
        match self {
            ConvexBody::Disc { center, radius } => center.dot(u) + radius * u.norm(),
            ConvexBody::Polytope { vertices } => vertices
                .iter()
                .map(|v| v.dot(u))
                .fold(f64::NEG_INFINITY, f64::max),
            ConvexBody::Ellipsoid {
                center,
                shape,
                scale,
            } => {
                let quad = u.dot(&(shape.as_matrix() * u)).max(0.0);
                center.dot(u) + scale * quad.sqrt()
            }
        }
    }

    /// Splits the body into a core and a uniform dilation radius, so that
    /// the body equals `core ⊕ B(0, margin)`. Discs and isotropic
    /// ellipsoids reduce to a point core.
    pub(crate) fn core(&self) -> (Core<'_>, f64) {
        match self {
            ConvexBody::Disc { center, radius } => (Core::Point(center), *radius),
            ConvexBody::Ellipsoid {
                center,
                shape,
                scale,
            } => match shape.isotropic_value() {
                Some(q) => (Core::Point(center), scale * q.max(0.0).sqrt()),
                None => (Core::Body(self), 0.0),
            },
            ConvexBody::Polytope { vertices } if vertices.len() == 1 => {
                (Core::Point(&vertices[0]), 0.0)
            }
            ConvexBody::Polytope { .. } => (Core::Body(self), 0.0),
        }
    }

    /// Center and radius of a ball enclosing the body.
    pub fn bounding_ball(&self) -> (VecD, f64) {
        match self {
            ConvexBody::Disc { center, radius } => (center.clone(), *radius),
            ConvexBody::Polytope { vertices } => {
                let mut c = VecD::zeros(vertices[0].len());
                for v in vertices {
                    c += v;
                }
                c /= vertices.len() as f64;
                let r = vertices
                    .iter()
                    .map(|v| (v - &c).norm())
                    .fold(0.0, f64::max);
                (c, r)
            }
            ConvexBody::Ellipsoid {
                center,
                shape,
                scale,
            } => (center.clone(), scale * shape.max_eigenvalue().max(0.0).sqrt()),
        }
    }

    /// Radius of the body relative to `point`: `max_{a in body} ‖a − point‖`.
    pub fn radius_about(&self, point: &VecD) -> f64 {
        match self {
            ConvexBody::Disc { center, radius } => (center - point).norm() + radius,
            ConvexBody::Polytope { vertices } => vertices
                .iter()
                .map(|v| (v - point).norm())
                .fold(0.0, f64::max),
            ConvexBody::Ellipsoid {
                center,
                shape,
                scale,
            } => {
                if let Some(q) = shape.isotropic_value() {
                    (center - point).norm() + scale * q.max(0.0).sqrt()
                } else if (center - point).norm() == 0.0 {
                    scale * shape.max_eigenvalue().max(0.0).sqrt()
                } else {
                    // Not needed for prediction sets (which are centered at
                    // the reference point); fall back to a bound.
                    (center - point).norm() + scale * shape.max_eigenvalue().max(0.0).sqrt()
                }
            }
        }
    }
}

/// Core of a body after removing a uniform dilation.
pub(crate) enum Core<'a> {
    Point(&'a VecD),
    Body(&'a ConvexBody),
}

impl Core<'_> {
    fn support(&self, u: &VecD) -> VecD {
        match self {
            Core::Point(p) => (*p).clone(),
            Core::Body(b) => b.support_unchecked(u),
        }
    }
}

/// Convex polygon in the plane with counterclockwise vertices and cached
/// outward face normals.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexPolygon {
    vertices: Vec<VecD>,
    normals: Vec<VecD>,
    offsets: Vec<f64>,
}

impl ConvexPolygon {
    /// Builds a polygon from at least three planar vertices. Clockwise input
    /// is reoriented; non-convex or zero-area input is rejected.
    pub fn new(mut vertices: Vec<VecD>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::domain("convex region needs at least 3 vertices"));
        }
        if vertices.iter().any(|v| v.len() != 2) {
            return Err(Error::domain("convex region must be planar (dimension 2)"));
        }
        for v in &vertices {
            check_finite(v, "region vertex").map_err(|e| Error::domain(e.to_string()))?;
        }
        let area = signed_area(&vertices);
        let scale = vertices
            .iter()
            .map(|v| v.amax())
            .fold(1.0, f64::max);
        if area.abs() <= 1e-12 * scale * scale {
            return Err(Error::domain("convex region has zero area"));
        }
        if area < 0.0 {
            vertices.reverse();
        }
        let k = vertices.len();
        let mut normals = Vec::with_capacity(k);
        let mut offsets = Vec::with_capacity(k);
        for i in 0..k {
            let a = &vertices[i];
            let b = &vertices[(i + 1) % k];
            let e = b - a;
            let len = e.norm();
            if len == 0.0 {
                return Err(Error::domain("convex region has repeated vertices"));
            }
            let n = vec2(e[1] / len, -e[0] / len);
            offsets.push(n.dot(a));
            normals.push(n);
        }
        for i in 0..k {
            let a = &vertices[i];
            let b = &vertices[(i + 1) % k];
            let c = &vertices[(i + 2) % k];
            let cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]);
            if cross < -1e-12 * scale * scale {
                return Err(Error::domain("region is not convex"));
            }
        }
        Ok(ConvexPolygon {
            vertices,
            normals,
            offsets,
        })
    }

    pub fn vertices(&self) -> &[VecD] {
        &self.vertices
    }

    /// Outward unit normals, one per edge `v_i → v_{i+1}`.
    pub fn normals(&self) -> &[VecD] {
        &self.normals
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn to_body(&self) -> ConvexBody {
        ConvexBody::Polytope {
            vertices: self.vertices.clone(),
        }
    }
}

/// Shoelace signed area (positive for counterclockwise order).
pub fn signed_area(vertices: &[VecD]) -> f64 {
    let k = vertices.len();
    (0..k)
        .map(|i| {
            let a = &vertices[i];
            let b = &vertices[(i + 1) % k];
            a[0] * b[1] - b[0] * a[1]
        })
        .sum::<f64>()
        * 0.5
}

/// Signed margin of `body` inside `region`: `min_i (offset_i − h(n_i))`.
///
/// Nonnegative iff the body lies in the region; when negative its magnitude
/// is the depth of the deepest protrusion through a face.
pub fn containment_margin(body: &ConvexBody, region: &ConvexPolygon) -> Result<f64> {
    if body.dim() != 2 {
        return Err(Error::domain(format!(
            "containment in a polygon needs a planar body, got dimension {}",
            body.dim()
        )));
    }
    Ok(region
        .normals
        .iter()
        .zip(&region.offsets)
        .map(|(n, off)| off - body.support_value_unchecked(n))
        .fold(f64::INFINITY, f64::min))
}
