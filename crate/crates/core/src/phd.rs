//! Fully actuated `n`th-order robot model under PhD path-following control.
//!
//! The control law is
//!
//! ```text
//! p⁽ⁿ⁾ = −Σ_{k=0}^{n−1} a_k p⁽ᵏ⁾ + a₀ r(s) + a₁ (∂r/∂s) ṡ
//! ```
//!
//! where `a_k` are the coefficients of `∏ (λ − λ_k)` for negative real roots
//! `λ_k`. In state-space form this is `ẋ = (A ⊗ I)(x − (r, r′ṡ, 0, …, 0))`
//! with `A` the companion matrix of the roots.

use nalgebra::{DMatrix, DVector, DVectorView};

use crate::error::{Error, Result};
use crate::geometry::VecD;

/// Stacked position derivatives `(p⁽⁰⁾, …, p⁽ⁿ⁻¹⁾)` of a `d`-dimensional robot.
#[derive(Debug, Clone, PartialEq)]
pub struct RobotState {
    order: usize,
    dim: usize,
    data: DVector<f64>,
}

impl RobotState {
    pub fn new(blocks: Vec<VecD>) -> Result<Self> {
        let order = blocks.len();
        if order == 0 {
            return Err(Error::Construction(
                "robot state needs at least one derivative block".into(),
            ));
        }
        let dim = blocks[0].len();
        if dim == 0 {
            return Err(Error::Construction("robot dimension must be positive".into()));
        }
        let mut data = DVector::zeros(order * dim);
        for (k, b) in blocks.iter().enumerate() {
            if b.len() != dim {
                return Err(Error::Construction(format!(
                    "derivative block {k} has dimension {}, expected {dim}",
                    b.len()
                )));
            }
            if b.iter().any(|v| !v.is_finite()) {
                return Err(Error::Construction(format!(
                    "derivative block {k} is not finite"
                )));
            }
            data.rows_mut(k * dim, dim).copy_from(b);
        }
        Ok(RobotState { order, dim, data })
    }

    /// Robot at rest at `p`: `(p, 0, …, 0)`.
    pub fn at_rest(p: &VecD, order: usize) -> Self {
        let dim = p.len();
        let mut data = DVector::zeros(order * dim);
        data.rows_mut(0, dim).copy_from(p);
        RobotState { order, dim, data }
    }

    pub(crate) fn from_flat(order: usize, dim: usize, data: DVector<f64>) -> Self {
        debug_assert_eq!(data.len(), order * dim);
        RobotState { order, dim, data }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Derivative block `p⁽ᵏ⁾`.
    pub fn block(&self, k: usize) -> DVectorView<'_, f64> {
        self.data.rows(k * self.dim, self.dim)
    }

    pub fn position(&self) -> VecD {
        self.block(0).into_owned()
    }

    pub fn blocks(&self) -> Vec<VecD> {
        (0..self.order).map(|k| self.block(k).into_owned()).collect()
    }

    /// Flat stacked vector of length `n·d`.
    pub fn as_flat(&self) -> &DVector<f64> {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Gains of a PhD controller with prescribed negative real roots.
#[derive(Debug, Clone, PartialEq)]
pub struct PhdGains {
    roots: Vec<f64>,
    coeffs: Vec<f64>,
}

impl PhdGains {
    /// Controller order `n` (number of roots).
    pub fn order(&self) -> usize {
        self.roots.len()
    }

    pub fn roots(&self) -> &[f64] {
        &self.roots
    }

    /// Polynomial coefficients `a₀, …, aₙ` with `aₙ = 1`.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Largest (least negative) root.
    pub fn max_root(&self) -> f64 {
        self.roots
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Coefficients of `∏ₖ (λ − λₖ)` for strictly negative roots.
pub fn gains_from_roots(roots: &[f64]) -> Result<PhdGains> {
    if roots.is_empty() {
        return Err(Error::domain("at least one characteristic root is required"));
    }
    if let Some(r) = roots.iter().find(|r| !(**r < 0.0) || !r.is_finite()) {
        return Err(Error::domain(format!(
            "roots must be strictly negative, got {r}"
        )));
    }
    // multiply out (λ − λ_k) one factor at a time, lowest degree first
    let mut coeffs = vec![1.0];
    for &root in roots {
        let mut next = vec![0.0; coeffs.len() + 1];
        for (i, c) in coeffs.iter().enumerate() {
            next[i + 1] += c;
            next[i] -= root * c;
        }
        coeffs = next;
    }
    Ok(PhdGains {
        roots: roots.to_vec(),
        coeffs,
    })
}

/// Gains for the roots with one occurrence of the maximal root removed.
pub fn reduced_gains(roots: &[f64]) -> Result<PhdGains> {
    if roots.len() < 2 {
        return Err(Error::domain(
            "reduced gains need at least two roots (order n ≥ 2)",
        ));
    }
    // validate before searching for the maximum
    gains_from_roots(roots)?;
    let (imax, _) = roots
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| {
            if v > bv {
                (i, v)
            } else {
                (bi, bv)
            }
        });
    let rest: Vec<f64> = roots
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != imax)
        .map(|(_, &v)| v)
        .collect();
    gains_from_roots(&rest)
}

/// Companion matrix: ones on the superdiagonal, last row `(−a₀, …, −aₙ₋₁)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompanionMatrix(DMatrix<f64>);

impl CompanionMatrix {
    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }
}

pub fn companion(gains: &PhdGains) -> CompanionMatrix {
    let n = gains.order();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n.saturating_sub(1) {
        m[(i, i + 1)] = 1.0;
    }
    for j in 0..n {
        m[(n - 1, j)] = -gains.coeffs[j];
    }
    CompanionMatrix(m)
}

/// PhD control output `p⁽ⁿ⁾` for state `x`, reference point `r`, path
/// tangent and path parameter rate `sdot`.
pub fn phd_accel(
    gains: &PhdGains,
    x: &RobotState,
    r: &VecD,
    r_tangent: &VecD,
    sdot: f64,
) -> Result<VecD> {
    if x.order() != gains.order() {
        return Err(Error::domain(format!(
            "state has order {}, controller has order {}",
            x.order(),
            gains.order()
        )));
    }
    if r.len() != x.dim() || r_tangent.len() != x.dim() {
        return Err(Error::domain(format!(
            "reference has dimension {}/{}, state has dimension {}",
            r.len(),
            r_tangent.len(),
            x.dim()
        )));
    }
    Ok(accel_unchecked(gains, x, r, r_tangent, sdot))
}

pub(crate) fn accel_unchecked(
    gains: &PhdGains,
    x: &RobotState,
    r: &VecD,
    r_tangent: &VecD,
    sdot: f64,
) -> VecD {
    let a = &gains.coeffs;
    let mut out = (r - x.block(0)) * a[0];
    for (k, ak) in a.iter().enumerate().take(x.order()).skip(1) {
        out -= x.block(k) * *ak;
    }
    if sdot != 0.0 {
        out += r_tangent * (a[1] * sdot);
    }
    out
}

/// Time derivative of the closed-loop state: blocks shift up by one and the
/// top block is the control output.
pub(crate) fn closed_loop_derivative(
    gains: &PhdGains,
    x: &RobotState,
    r: &VecD,
    r_tangent: &VecD,
    sdot: f64,
) -> DVector<f64> {
    let (n, d) = (x.order(), x.dim());
    let mut dx = DVector::zeros(n * d);
    if n > 1 {
        dx.rows_mut(0, (n - 1) * d)
            .copy_from(&x.as_flat().rows(d, (n - 1) * d));
    }
    dx.rows_mut((n - 1) * d, d)
        .copy_from(&accel_unchecked(gains, x, r, r_tangent, sdot));
    dx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::vec2;
    use nalgebra::dmatrix;

    #[test]
    fn gains_examples() {
        assert_eq!(gains_from_roots(&[-3.0, -3.0]).unwrap().coeffs(), &[9.0, 6.0, 1.0]);
        assert_eq!(gains_from_roots(&[-1.0, -2.0]).unwrap().coeffs(), &[2.0, 3.0, 1.0]);
        assert_eq!(
            gains_from_roots(&[-3.0, -3.0, -3.0]).unwrap().coeffs(),
            &[27.0, 27.0, 9.0, 1.0]
        );
    }

    #[test]
    fn gains_reject_nonnegative_roots() {
        assert!(matches!(gains_from_roots(&[-1.0, 0.0]), Err(Error::Domain(_))));
        assert!(matches!(gains_from_roots(&[2.0]), Err(Error::Domain(_))));
        assert!(gains_from_roots(&[]).is_err());
    }

    #[test]
    fn reduced_examples() {
        let g = reduced_gains(&[-3.0, -3.0]).unwrap();
        assert_eq!(g.roots(), &[-3.0]);
        assert_eq!(g.coeffs(), &[3.0, 1.0]);
        let g = reduced_gains(&[-3.0, -3.0, -3.0]).unwrap();
        assert_eq!(g.coeffs(), &[9.0, 6.0, 1.0]);
        let g = reduced_gains(&[-1.0, -2.0]).unwrap();
        assert_eq!(g.roots(), &[-2.0]);
        assert_eq!(g.coeffs(), &[2.0, 1.0]);
        assert!(matches!(reduced_gains(&[-3.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn companion_layout() {
        let c = companion(&gains_from_roots(&[-3.0, -3.0]).unwrap());
        assert_eq!(c.as_matrix(), &dmatrix![0.0, 1.0; -9.0, -6.0]);
        let c = companion(&gains_from_roots(&[-3.0]).unwrap());
        assert_eq!(c.as_matrix(), &dmatrix![-3.0]);
        let c = companion(&gains_from_roots(&[-3.0, -3.0, -3.0]).unwrap());
        assert_eq!(
            c.as_matrix(),
            &dmatrix![0.0, 1.0, 0.0; 0.0, 0.0, 1.0; -27.0, -27.0, -9.0]
        );
    }

    #[test]
    fn accel_examples() {
        let g = gains_from_roots(&[-3.0, -3.0]).unwrap();
        let x = RobotState::new(vec![vec2(1.0, 0.0), vec2(0.0, 0.0)]).unwrap();
        let r = vec2(0.0, 0.0);
        let t = vec2(1.0, 0.0);
        assert_eq!(phd_accel(&g, &x, &r, &t, 0.0).unwrap(), vec2(-9.0, 0.0));
        assert_eq!(phd_accel(&g, &x, &r, &t, 2.0).unwrap(), vec2(3.0, 0.0));
        let eq = RobotState::at_rest(&vec2(2.0, -1.0), 2);
        assert_eq!(
            phd_accel(&g, &eq, &vec2(2.0, -1.0), &t, 0.0).unwrap(),
            vec2(0.0, 0.0)
        );
    }

    #[test]
    fn accel_rejects_mismatch() {
        let g = gains_from_roots(&[-3.0, -3.0]).unwrap();
        let x = RobotState::new(vec![vec2(1.0, 0.0)]).unwrap();
        assert!(phd_accel(&g, &x, &vec2(0.0, 0.0), &vec2(1.0, 0.0), 0.0).is_err());
        let x = RobotState::at_rest(&vec2(1.0, 0.0), 2);
        let r3 = VecD::zeros(3);
        assert!(phd_accel(&g, &x, &r3, &r3, 0.0).is_err());
    }

    #[test]
    fn state_blocks_round_trip() {
        let blocks = vec![vec2(1.0, 2.0), vec2(3.0, 4.0), vec2(5.0, 6.0)];
        let x = RobotState::new(blocks.clone()).unwrap();
        assert_eq!(x.blocks(), blocks);
        assert_eq!(x.position(), vec2(1.0, 2.0));
        assert!(RobotState::new(vec![vec2(1.0, 2.0), VecD::zeros(3)]).is_err());
    }
}
