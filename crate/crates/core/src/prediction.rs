//! Feedback motion prediction for PhD control with a frozen path parameter.
//!
//! Both predictors return a convex set that contains the future position
//! trajectory of `p⁽ⁿ⁾ = û(x, s, 0)` started from the current state:
//!
//! - Lyapunov ellipsoid: the level set of `‖x − r̄‖_P` projected onto the
//!   position coordinates, where `P = P_n ⊗ I_d` solves
//!   `(A ⊗ I)ᵀP + P(A ⊗ I) + I = 0`.
//! - Vandermonde simplex: the convex hull of `r` and the partial sums
//!   `Σ_{k=0}^{m} (ā_k/ā₀) p⁽ᵏ⁾`, `m = 0, …, n−1`, where `ā` are the gains
//!   of the roots with the maximal root removed.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ConvexBody, SymMatrix, VecD};
use crate::phd::{companion, reduced_gains, CompanionMatrix, PhdGains, RobotState};
use crate::refpath::ReferencePath;

/// Accepted Lyapunov residual (spectral norm).
pub const LYAPUNOV_RESIDUAL_TOL: f64 = 1e-10;

/// Solution of the `n×n` Lyapunov equation `AᵀP + PA + I = 0` for a
/// companion matrix `A`, together with the position-block data of `P⁻¹`.
#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovCertificate {
    p_small: SymMatrix,
    /// `(P_n⁻¹)₁₁`: the projected shape is this value times `I_d`.
    shape_value: f64,
    residual: f64,
}

impl LyapunovCertificate {
    pub fn p_small(&self) -> &SymMatrix {
        &self.p_small
    }

    /// Scalar `q` with `IᵀP⁻¹I = q·I_d`.
    pub fn shape_value(&self) -> f64 {
        self.shape_value
    }

    /// `‖IᵀP⁻¹I‖^½`.
    pub fn shape_norm(&self) -> f64 {
        self.shape_value.sqrt()
    }

    /// Spectral norm of `AᵀP + PA + I` at solve time.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn order(&self) -> usize {
        self.p_small.dim()
    }

    /// Projected shape matrix `IᵀP⁻¹I` for position dimension `d`.
    pub fn shape(&self, d: usize) -> SymMatrix {
        SymMatrix::scaled_identity(d, self.shape_value)
    }

    /// `‖x − r̄‖_P` with `r̄ = (r, 0, …, 0)`, evaluated blockwise.
    pub fn norm(&self, x: &RobotState, r: &VecD) -> f64 {
        let n = x.order();
        let p = self.p_small.as_matrix();
        let e0 = x.block(0) - r;
        let err = |k: usize| -> VecD {
            if k == 0 {
                e0.clone()
            } else {
                x.block(k).into_owned()
            }
        };
        let blocks: Vec<VecD> = (0..n).map(err).collect();
        let mut acc = 0.0;
        for i in 0..n {
            acc += p[(i, i)] * blocks[i].norm_squared();
            for j in (i + 1)..n {
                acc += 2.0 * p[(i, j)] * blocks[i].dot(&blocks[j]);
            }
        }
        acc.max(0.0).sqrt()
    }

    /// Projected Lyapunov ellipsoid `ℰ(r, IᵀP⁻¹I, ‖x − r̄‖_P)`.
    pub fn ellipsoid(&self, x: &RobotState, r: &VecD) -> ConvexBody {
        ConvexBody::Ellipsoid {
            center: r.clone(),
            shape: self.shape(x.dim()),
            scale: self.norm(x, r),
        }
    }

    /// Radius of the ellipsoid about `r`: `‖IᵀP⁻¹I‖^½ ‖x − r̄‖_P`.
    pub fn radius(&self, x: &RobotState, r: &VecD) -> f64 {
        self.shape_norm() * self.norm(x, r)
    }
}

fn tri_index(i: usize, j: usize, n: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    // row-major upper triangle
    i * n - i * (i + 1) / 2 + j
}

/// Spectral norm of `AᵀP + PA + I`.
pub(crate) fn residual_norm(a: &DMatrix<f64>, p: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let r = a.transpose() * p + p * a + DMatrix::identity(n, n);
    let r = (&r + r.transpose()) * 0.5;
    SymmetricEigen::new(r).eigenvalues.amax()
}

/// Solves `AᵀP + PA + I = 0` by direct elimination over the `n(n+1)/2`
/// unknowns of the symmetric `P`, with one step of iterative refinement.
pub fn solve_lyapunov(a: &CompanionMatrix) -> Result<LyapunovCertificate> {
    let a = a.as_matrix();
    let n = a.nrows();
    let m = n * (n + 1) / 2;
    let mut sys = DMatrix::<f64>::zeros(m, m);
    let mut rhs = DVector::<f64>::zeros(m);
    for i in 0..n {
        for j in i..n {
            let row = tri_index(i, j, n);
            // (AᵀP)_ij = Σ_k A_ki P_kj ; (PA)_ij = Σ_k P_ik A_kj
            for k in 0..n {
                sys[(row, tri_index(k, j, n))] += a[(k, i)];
                sys[(row, tri_index(i, k, n))] += a[(k, j)];
            }
            if i == j {
                rhs[row] = -1.0;
            }
        }
    }
    let lu = sys.clone().lu();
    let mut sol = lu
        .solve(&rhs)
        .ok_or_else(|| Error::numeric("Lyapunov system is singular"))?;
    let correction = lu
        .solve(&(&rhs - &sys * &sol))
        .ok_or_else(|| Error::numeric("Lyapunov system is singular"))?;
    sol += correction;

    let mut p = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            p[(i, j)] = sol[tri_index(i, j, n)];
        }
    }
    let residual = residual_norm(a, &p);
    if !(residual <= LYAPUNOV_RESIDUAL_TOL) {
        return Err(Error::numeric(format!(
            "Lyapunov residual {residual:e} exceeds {LYAPUNOV_RESIDUAL_TOL:e}"
        )));
    }
    let chol = p
        .clone()
        .cholesky()
        .ok_or_else(|| Error::numeric("Lyapunov solution is not positive definite"))?;
    let shape_value = chol.inverse()[(0, 0)];
    Ok(LyapunovCertificate {
        p_small: SymMatrix::new(p)?,
        shape_value,
        residual,
    })
}

fn check_vandermonde(reduced: &PhdGains, x: &RobotState, r: &VecD) -> Result<()> {
    if reduced.order() + 1 != x.order() {
        return Err(Error::domain(format!(
            "reduced gains of order {} do not match a state of order {}",
            reduced.order(),
            x.order()
        )));
    }
    if r.len() != x.dim() {
        return Err(Error::domain(format!(
            "reference has dimension {}, state has dimension {}",
            r.len(),
            x.dim()
        )));
    }
    Ok(())
}

/// Partial sums `Σ_{k=0}^{m} (ā_k/ā₀) p⁽ᵏ⁾` for `m = 0, …, n−1`.
fn vandermonde_vertices(reduced: &PhdGains, x: &RobotState) -> Vec<VecD> {
    let a = reduced.coeffs();
    let mut acc = x.position();
    let mut out = Vec::with_capacity(x.order());
    out.push(acc.clone());
    for k in 1..x.order() {
        acc += x.block(k) * (a[k] / a[0]);
        out.push(acc.clone());
    }
    out
}

/// Vandermonde motion simplex: `conv({r} ∪ partial sums)`, `n + 1` vertices
/// with `r` first.
pub fn vandermonde_simplex(reduced: &PhdGains, x: &RobotState, r: &VecD) -> Result<ConvexBody> {
    check_vandermonde(reduced, x, r)?;
    let mut vertices = Vec::with_capacity(x.order() + 1);
    vertices.push(r.clone());
    vertices.extend(vandermonde_vertices(reduced, x));
    Ok(ConvexBody::Polytope { vertices })
}

/// Largest vertex distance of the Vandermonde simplex to `r`.
pub fn vandermonde_radius(reduced: &PhdGains, x: &RobotState, r: &VecD) -> Result<f64> {
    check_vandermonde(reduced, x, r)?;
    Ok(vandermonde_vertices(reduced, x)
        .iter()
        .map(|v| (v - r).norm())
        .fold(0.0, f64::max))
}

/// Which motion prediction to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PredictorKind {
    Lyapunov,
    Vandermonde,
}

impl PredictorKind {
    pub fn name(self) -> &'static str {
        match self {
            PredictorKind::Lyapunov => "lyapunov",
            PredictorKind::Vandermonde => "vandermonde",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MotionPredictor {
    Lyapunov(LyapunovCertificate),
    /// Holds the reduced gains (maximal root removed).
    Vandermonde(PhdGains),
}

impl MotionPredictor {
    pub fn new(kind: PredictorKind, gains: &PhdGains) -> Result<Self> {
        match kind {
            PredictorKind::Lyapunov => Ok(MotionPredictor::Lyapunov(solve_lyapunov(
                &companion(gains),
            )?)),
            PredictorKind::Vandermonde => {
                if gains.order() < 2 {
                    return Err(Error::domain(
                        "Vandermonde prediction needs order n ≥ 2; use Lyapunov for n = 1",
                    ));
                }
                Ok(MotionPredictor::Vandermonde(reduced_gains(gains.roots())?))
            }
        }
    }

    pub fn kind(&self) -> PredictorKind {
        match self {
            MotionPredictor::Lyapunov(_) => PredictorKind::Lyapunov,
            MotionPredictor::Vandermonde(_) => PredictorKind::Vandermonde,
        }
    }

    /// Order `n` of the states this predictor accepts.
    pub fn order(&self) -> usize {
        match self {
            MotionPredictor::Lyapunov(c) => c.order(),
            MotionPredictor::Vandermonde(g) => g.order() + 1,
        }
    }

    fn check(&self, x: &RobotState, r: &VecD) -> Result<()> {
        if x.order() != self.order() {
            return Err(Error::domain(format!(
                "predictor expects order {}, state has order {}",
                self.order(),
                x.order()
            )));
        }
        if r.len() != x.dim() {
            return Err(Error::domain(format!(
                "reference has dimension {}, state has dimension {}",
                r.len(),
                x.dim()
            )));
        }
        Ok(())
    }

    /// Prediction set towards the reference point `r`.
    pub fn predict_at(&self, x: &RobotState, r: &VecD) -> Result<ConvexBody> {
        self.check(x, r)?;
        match self {
            MotionPredictor::Lyapunov(c) => Ok(c.ellipsoid(x, r)),
            MotionPredictor::Vandermonde(g) => vandermonde_simplex(g, x, r),
        }
    }

    /// Prediction set towards `path.eval(s)`.
    pub fn predict(&self, x: &RobotState, s: f64, path: &ReferencePath) -> Result<ConvexBody> {
        self.predict_at(x, &path.eval(s))
    }

    /// Radius of the prediction set about `r`.
    pub fn radius(&self, x: &RobotState, r: &VecD) -> Result<f64> {
        self.check(x, r)?;
        match self {
            MotionPredictor::Lyapunov(c) => Ok(c.radius(x, r)),
            MotionPredictor::Vandermonde(g) => vandermonde_radius(g, x, r),
        }
    }
}
