//! GJK distance between convex bodies, in any dimension.
//!
//! The closest point of the current simplex to the origin is found by
//! enumerating its faces: for each vertex subset the origin is projected
//! onto the affine hull, and the shortest projection whose barycentric
//! coordinates are all positive is kept. Simplexes never exceed `d + 1`
//! vertices, so the enumeration is at most 15 subsets in 3D.

use nalgebra::{DMatrix, DVector};

use super::{ConvexBody, Core, VecD};
use crate::error::{Error, Result};

const MAX_ITERATIONS: usize = 128;
/// Relative progress tolerance on `‖v‖² − <v, w>`.
const REL_TOL: f64 = 1e-12;
/// Below this squared length the origin is considered reached.
const ABS_TOL_SQ: f64 = 1e-28;
/// Minimum relative pivot accepted when solving a face's Gram system.
const PIVOT_TOL: f64 = 1e-12;

/// Euclidean distance between two convex bodies; zero when they overlap.
pub fn gjk_distance(a: &ConvexBody, b: &ConvexBody) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::domain(format!(
            "cannot measure distance between bodies of dimension {} and {}",
            a.dim(),
            b.dim()
        )));
    }
    let (core_a, margin_a) = a.core();
    let (core_b, margin_b) = b.core();
    let d = match (&core_a, &core_b) {
        (Core::Point(p), Core::Point(q)) => (*p - *q).norm(),
        _ => core_distance(&core_a, &core_b, a.dim())?,
    };
    Ok((d - margin_a - margin_b).max(0.0))
}

fn core_distance(a: &Core<'_>, b: &Core<'_>, dim: usize) -> Result<f64> {
    let minkowski = |u: &VecD| -> VecD {
        let neg = -u;
        a.support(u) - b.support(&neg)
    };

    // Start from the support point along the first axis.
    let mut axis = VecD::zeros(dim);
    axis[0] = 1.0;
    let mut v = minkowski(&axis);
    let mut simplex: Vec<VecD> = vec![v.clone()];

    for _ in 0..MAX_ITERATIONS {
        let vv = v.norm_squared();
        if vv <= ABS_TOL_SQ {
            return Ok(0.0);
        }
        let w = minkowski(&(-&v));
        if vv - v.dot(&w) <= REL_TOL * vv {
            return Ok(vv.sqrt());
        }
        simplex.push(w);
        let (closest, kept) = closest_on_simplex(&simplex);
        simplex = kept;
        if simplex.len() > dim {
            // full-dimensional simplex containing the origin
            return Ok(0.0);
        }
        let new_vv = closest.norm_squared();
        if new_vv >= vv {
            // no further progress in floating point
            return Ok(vv.sqrt());
        }
        v = closest;
    }
    Err(Error::numeric(format!(
        "GJK did not converge within {MAX_ITERATIONS} iterations"
    )))
}

/// Closest point to the origin on `conv(points)` and the minimal vertex
/// subset supporting it.
fn closest_on_simplex(points: &[VecD]) -> (VecD, Vec<VecD>) {
    let m = points.len();
    let mut best: Option<(f64, VecD, u32)> = None;
    for mask in 1u32..(1u32 << m) {
        let subset: Vec<&VecD> = (0..m)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| &points[i])
            .collect();
        let Some((x, lambdas)) = affine_projection(&subset) else {
            continue;
        };
        if lambdas.iter().any(|&l| l <= 0.0) {
            continue;
        }
        let nn = x.norm_squared();
        let better = match &best {
            None => true,
            Some((b, _, _)) => nn < *b,
        };
        if better {
            best = Some((nn, x, mask));
        }
    }
    // singletons are always admissible, so `best` is set
    let (_, x, mask) = best.expect("nonempty simplex");
    let kept = (0..m)
        .filter(|i| mask & (1 << i) != 0)
        .map(|i| points[i].clone())
        .collect();
    (x, kept)
}

/// Projection of the origin onto the affine hull of `points`, with its
/// barycentric coordinates. `None` for (nearly) affinely dependent points.
fn affine_projection(points: &[&VecD]) -> Option<(VecD, Vec<f64>)> {
    let y0 = points[0];
    if points.len() == 1 {
        return Some((y0.clone(), vec![1.0]));
    }
    let k = points.len() - 1;
    let diffs: Vec<VecD> = points[1..].iter().map(|p| *p - y0).collect();
    let mut gram = DMatrix::zeros(k, k);
    let mut rhs = DVector::zeros(k);
    for i in 0..k {
        for j in i..k {
            let g = diffs[i].dot(&diffs[j]);
            gram[(i, j)] = g;
            gram[(j, i)] = g;
        }
        rhs[i] = -diffs[i].dot(y0);
    }
    let diag: Vec<f64> = (0..k).map(|i| gram[(i, i)]).collect();
    if diag.iter().any(|&g| g <= 0.0) {
        return None;
    }
    let chol = gram.cholesky()?;
    let l = chol.l_dirty();
    for i in 0..k {
        if l[(i, i)] * l[(i, i)] <= PIVOT_TOL * diag[i] {
            return None;
        }
    }
    let mu = chol.solve(&rhs);
    let mut x = y0.clone();
    for (i, d) in diffs.iter().enumerate() {
        x += d * mu[i];
    }
    let mut lambdas = Vec::with_capacity(k + 1);
    lambdas.push(1.0 - mu.sum());
    lambdas.extend(mu.iter().copied());
    Some((x, lambdas))
}
