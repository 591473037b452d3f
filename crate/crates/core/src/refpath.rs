//! Polyline reference paths parametrized by arc length.

use crate::environment::Environment;
use crate::error::{Error, Result};
use crate::geometry::VecD;

/// Polyline `r(s)`, `s ∈ [0, L]`, with `L` the total length.
///
/// The tangent is piecewise constant and right-continuous at the knots:
/// at an interior knot it is the direction of the following segment, and
/// at `s = L` it is the direction of the last segment.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferencePath {
    waypoints: Vec<VecD>,
    cumulative: Vec<f64>,
    tangents: Vec<VecD>,
}

/// A sampled path point closer than the requested margin to the free-space
/// boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClearanceViolation {
    pub s: f64,
    pub distance: f64,
}

impl ReferencePath {
    pub fn new(waypoints: Vec<VecD>) -> Result<Self> {
        if waypoints.len() < 2 {
            return Err(Error::Construction(
                "a reference path needs at least 2 waypoints".into(),
            ));
        }
        let d = waypoints[0].len();
        let mut cumulative = Vec::with_capacity(waypoints.len());
        let mut tangents = Vec::with_capacity(waypoints.len() - 1);
        cumulative.push(0.0);
        for (i, pair) in waypoints.windows(2).enumerate() {
            if pair[1].len() != d {
                return Err(Error::Construction(format!(
                    "waypoint {} has dimension {}, expected {d}",
                    i + 1,
                    pair[1].len()
                )));
            }
            if pair.iter().any(|w| w.iter().any(|v| !v.is_finite())) {
                return Err(Error::Construction("waypoints must be finite".into()));
            }
            let seg = &pair[1] - &pair[0];
            let len = seg.norm();
            if len == 0.0 {
                return Err(Error::Construction(format!(
                    "waypoints {i} and {} coincide (zero-length segment)",
                    i + 1
                )));
            }
            cumulative.push(cumulative[i] + len);
            tangents.push(seg / len);
        }
        Ok(ReferencePath {
            waypoints,
            cumulative,
            tangents,
        })
    }

    pub fn waypoints(&self) -> &[VecD] {
        &self.waypoints
    }

    pub fn knots(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn dim(&self) -> usize {
        self.waypoints[0].len()
    }

    /// Start of the parameter range (always 0).
    pub fn start(&self) -> f64 {
        0.0
    }

    /// End of the parameter range: the total length.
    pub fn end(&self) -> f64 {
        *self.cumulative.last().expect("at least two knots")
    }

    /// Index of the segment containing `s` (right-continuous at knots).
    fn segment(&self, s: f64) -> usize {
        let last = self.tangents.len() - 1;
        // first knot strictly greater than s, minus one
        let upper = self.cumulative.partition_point(|&c| c <= s);
        upper.saturating_sub(1).min(last)
    }

    /// `r(s)`, with `s` clamped to the parameter range.
    pub fn eval(&self, s: f64) -> VecD {
        let s = s.clamp(self.start(), self.end());
        if s >= self.end() {
            return self.waypoints.last().expect("nonempty").clone();
        }
        let i = self.segment(s);
        let len = self.cumulative[i + 1] - self.cumulative[i];
        let lambda = (s - self.cumulative[i]) / len;
        &self.waypoints[i] * (1.0 - lambda) + &self.waypoints[i + 1] * lambda
    }

    /// Unit tangent `∂r/∂s` of the segment containing `s`.
    pub fn tangent(&self, s: f64) -> &VecD {
        let s = s.clamp(self.start(), self.end());
        &self.tangents[self.segment(s)]
    }

    /// Samples `s` on a grid of spacing at most `sample_step` (always
    /// including every knot) and reports the samples whose free-space
    /// distance is below `margin`.
    pub fn validate_clearance(
        &self,
        env: &Environment,
        margin: f64,
        sample_step: f64,
    ) -> Result<Vec<ClearanceViolation>> {
        if !(sample_step > 0.0 && sample_step.is_finite()) {
            return Err(Error::domain(format!(
                "sample step must be positive, got {sample_step}"
            )));
        }
        let mut violations = Vec::new();
        for s in self.sample_grid(sample_step) {
            let distance = env.point_free_distance(&self.eval(s))?;
            if distance < margin {
                violations.push(ClearanceViolation { s, distance });
            }
        }
        Ok(violations)
    }

    fn sample_grid(&self, step: f64) -> Vec<f64> {
        let mut grid = Vec::new();
        for w in self.cumulative.windows(2) {
            let (a, b) = (w[0], w[1]);
            let n = ((b - a) / step).ceil().max(1.0) as usize;
            for j in 0..n {
                grid.push(a + (b - a) * j as f64 / n as f64);
            }
        }
        grid.push(self.end());
        grid
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{vec2, ConvexBody, ConvexPolygon};
    use proptest::prelude::*;

    fn l_path() -> ReferencePath {
        ReferencePath::new(vec![vec2(0.0, 0.0), vec2(3.0, 0.0), vec2(3.0, 4.0)]).unwrap()
    }

    #[test]
    fn build_lengths() {
        assert_eq!(l_path().end(), 7.0);
        let p = ReferencePath::new(vec![vec2(0.0, 0.0), vec2(1.0, 0.0)]).unwrap();
        assert_eq!(p.end(), 1.0);
        assert!(matches!(
            ReferencePath::new(vec![vec2(0.0, 0.0), vec2(0.0, 0.0), vec2(1.0, 0.0)]),
            Err(Error::Construction(_))
        ));
        assert!(ReferencePath::new(vec![vec2(0.0, 0.0)]).is_err());
    }

    #[test]
    fn evaluation() {
        let p = l_path();
        assert_eq!(p.eval(0.0), vec2(0.0, 0.0));
        assert_eq!(p.eval(5.0), vec2(3.0, 2.0));
        assert_eq!(p.eval(7.0), vec2(3.0, 4.0));
        assert_eq!(p.eval(-1.0), vec2(0.0, 0.0));
        assert_eq!(p.eval(9.0), vec2(3.0, 4.0));
    }

    #[test]
    fn tangents_are_right_continuous() {
        let p = l_path();
        assert_eq!(p.tangent(1.0), &vec2(1.0, 0.0));
        assert_eq!(p.tangent(3.0), &vec2(0.0, 1.0));
        assert_eq!(p.tangent(7.0), &vec2(0.0, 1.0));
        assert_eq!(p.tangent(0.0), &vec2(1.0, 0.0));
    }

    fn corridor_env() -> Environment {
        let ws = ConvexPolygon::new(vec![
            vec2(0.0, 0.0),
            vec2(10.0, 0.0),
            vec2(10.0, 2.0),
            vec2(0.0, 2.0),
        ])
        .unwrap();
        Environment::new(ws, vec![], 0.1, 0.8).unwrap()
    }

    #[test]
    fn clearance_validation() {
        let env = corridor_env();
        let centered = ReferencePath::new(vec![vec2(1.5, 1.0), vec2(8.5, 1.0)]).unwrap();
        assert!(centered.validate_clearance(&env, 0.8, 0.05).unwrap().is_empty());
        assert!(centered.validate_clearance(&env, 0.0, 0.05).unwrap().is_empty());

        let blocked = Environment::new(
            env.workspace().clone(),
            vec![ConvexBody::disc(vec2(5.0, 1.0), 0.3).unwrap()],
            0.1,
            0.8,
        )
        .unwrap();
        let bad = centered.validate_clearance(&blocked, 0.8, 0.05).unwrap();
        assert!(!bad.is_empty());
        assert!(bad.iter().any(|v| (v.s - 3.5).abs() < 0.1));
    }

    #[test]
    fn grid_includes_knots_and_endpoints() {
        let p = l_path();
        let grid = p.sample_grid(0.4);
        for k in p.knots() {
            assert!(grid.contains(k));
        }
        for w in grid.windows(2) {
            assert!(w[1] - w[0] <= 0.4 + 1e-12 && w[1] > w[0]);
        }
    }

    proptest! {
        #[test]
        fn eval_is_one_lipschitz(s1 in -1.0..8.0f64, s2 in -1.0..8.0f64) {
            let p = l_path();
            let lhs = (p.eval(s1) - p.eval(s2)).norm();
            let rhs = (s1.clamp(0.0, 7.0) - s2.clamp(0.0, 7.0)).abs();
            prop_assert!(lhs <= rhs + 1e-12);
        }

        #[test]
        fn tangent_is_unit(s in 0.0..7.0f64) {
            prop_assert!((l_path().tangent(s).norm() - 1.0).abs() <= 1e-12);
        }
    }
}
