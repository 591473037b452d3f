//! World model: a convex workspace, convex obstacles and a disc-shaped robot.

use crate::error::{Error, Result};
use crate::geometry::{containment_margin, gjk_distance, ConvexBody, ConvexPolygon, VecD};

#[derive(Debug, Clone)]
pub struct Environment {
    workspace: ConvexPolygon,
    obstacles: Vec<ConvexBody>,
    /// Enclosing balls of the obstacles, used to skip far-away GJK queries.
    bounds: Vec<(VecD, f64)>,
    robot_radius: f64,
    clearance: f64,
}

impl Environment {
    pub fn new(
        workspace: ConvexPolygon,
        obstacles: Vec<ConvexBody>,
        robot_radius: f64,
        clearance: f64,
    ) -> Result<Self> {
        if !(robot_radius > 0.0 && robot_radius.is_finite()) {
            return Err(Error::Construction(format!(
                "robot radius must be positive, got {robot_radius}"
            )));
        }
        if !(clearance > 0.0 && clearance.is_finite()) {
            return Err(Error::Construction(format!(
                "clearance must be positive, got {clearance}"
            )));
        }
        if let Some(i) = obstacles.iter().position(|o| o.dim() != 2) {
            return Err(Error::Construction(format!(
                "obstacle {i} has dimension {}, workspace is planar",
                obstacles[i].dim()
            )));
        }
        let bounds = obstacles.iter().map(ConvexBody::bounding_ball).collect();
        Ok(Environment {
            workspace,
            obstacles,
            bounds,
            robot_radius,
            clearance,
        })
    }

    pub fn workspace(&self) -> &ConvexPolygon {
        &self.workspace
    }

    pub fn obstacles(&self) -> &[ConvexBody] {
        &self.obstacles
    }

    pub fn robot_radius(&self) -> f64 {
        self.robot_radius
    }

    pub fn clearance(&self) -> f64 {
        self.clearance
    }

    pub fn dim(&self) -> usize {
        2
    }

    /// Free-space distance of a single robot position.
    pub fn point_free_distance(&self, p: &VecD) -> Result<f64> {
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("position has non-finite coordinates"));
        }
        self.set_free_distance(&ConvexBody::point(p.clone()))
    }

    /// Distance of a set of robot positions to the free-space boundary, zero
    /// if any position is not strictly inside the free space.
    pub fn set_free_distance(&self, body: &ConvexBody) -> Result<f64> {
        if body.dim() != self.dim() {
            return Err(Error::domain(format!(
                "body has dimension {}, environment is planar",
                body.dim()
            )));
        }
        let mut nearest = containment_margin(body, &self.workspace)?;
        if nearest <= self.robot_radius {
            return Ok(0.0);
        }
        let (center, reach) = body.bounding_ball();
        for (obstacle, (oc, or)) in self.obstacles.iter().zip(&self.bounds) {
            let lower = (&center - oc).norm() - reach - or;
            if lower >= nearest {
                continue;
            }
            nearest = nearest.min(gjk_distance(body, obstacle)?);
            if nearest <= self.robot_radius {
                return Ok(0.0);
            }
        }
        Ok((nearest - self.robot_radius).max(0.0))
    }

    /// Whether `p` has at least `margin` distance to the free-space boundary.
    pub fn in_clearance(&self, p: &VecD, margin: f64) -> Result<bool> {
        if !(margin >= 0.0) {
            return Err(Error::domain(format!(
                "clearance margin must be nonnegative, got {margin}"
            )));
        }
        Ok(self.point_free_distance(p)? >= margin)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::vec2;
    use proptest::prelude::*;

    fn square(x0: f64, y0: f64, x1: f64, y1: f64) -> Vec<VecD> {
        vec![vec2(x0, y0), vec2(x1, y0), vec2(x1, y1), vec2(x0, y1)]
    }

    pub(crate) fn reference_env() -> Environment {
        Environment::new(
            ConvexPolygon::new(square(0.0, 0.0, 10.0, 10.0)).unwrap(),
            vec![ConvexBody::polytope(square(4.0, 4.0, 6.0, 6.0)).unwrap()],
            0.5,
            0.5,
        )
        .unwrap()
    }

    #[test]
    fn point_distances() {
        let env = reference_env();
        assert!((env.point_free_distance(&vec2(2.0, 5.0)).unwrap() - 1.5).abs() < 1e-12);
        assert_eq!(env.point_free_distance(&vec2(4.5, 5.0)).unwrap(), 0.0);
        assert_eq!(env.point_free_distance(&vec2(0.4, 5.0)).unwrap(), 0.0);
    }

    #[test]
    fn set_distances() {
        let env = reference_env();
        let disc = ConvexBody::disc(vec2(2.0, 5.0), 0.3).unwrap();
        assert!((env.set_free_distance(&disc).unwrap() - 1.2).abs() < 1e-12);
        let pt = ConvexBody::polytope(vec![vec2(2.0, 5.0)]).unwrap();
        assert!((env.set_free_distance(&pt).unwrap() - 1.5).abs() < 1e-12);
        let hit = ConvexBody::polytope(vec![vec2(2.0, 5.0), vec2(5.0, 5.0)]).unwrap();
        assert_eq!(env.set_free_distance(&hit).unwrap(), 0.0);
    }

    #[test]
    fn clearance_queries() {
        let env = reference_env();
        assert!(env.in_clearance(&vec2(2.0, 5.0), 1.0).unwrap());
        assert!(!env.in_clearance(&vec2(2.0, 5.0), 2.0).unwrap());
        assert!(!env.in_clearance(&vec2(4.5, 5.0), 1e-9).unwrap());
        assert!(env.in_clearance(&vec2(2.0, 5.0), -1.0).is_err());
    }

    #[test]
    fn rejects_bad_parameters() {
        let ws = ConvexPolygon::new(square(0.0, 0.0, 1.0, 1.0)).unwrap();
        assert!(Environment::new(ws.clone(), vec![], 0.0, 0.1).is_err());
        assert!(Environment::new(ws, vec![], 0.1, -1.0).is_err());
    }

    proptest! {
        #[test]
        fn free_distance_is_one_lipschitz(
            px in -1.0..11.0f64, py in -1.0..11.0f64,
            qx in -1.0..11.0f64, qy in -1.0..11.0f64,
        ) {
            let env = reference_env();
            let p = vec2(px, py);
            let q = vec2(qx, qy);
            let dp = env.point_free_distance(&p).unwrap();
            let dq = env.point_free_distance(&q).unwrap();
            prop_assert!((dp - dq).abs() <= (p - q).norm() + 1e-12);
        }

        #[test]
        fn subsets_are_no_closer(
            cx in 1.0..9.0f64, cy in 1.0..9.0f64,
            r_inner in 0.0..0.5f64, extra in 0.0..0.5f64,
        ) {
            let env = reference_env();
            let inner = ConvexBody::disc(vec2(cx, cy), r_inner).unwrap();
            let outer = ConvexBody::disc(vec2(cx, cy), r_inner + extra).unwrap();
            prop_assert!(
                env.set_free_distance(&inner).unwrap() + 1e-12
                    >= env.set_free_distance(&outer).unwrap()
            );
        }

        #[test]
        fn positive_set_distance_implies_free_points(
            cx in 0.0..10.0f64, cy in 0.0..10.0f64, r in 0.0..1.5f64,
        ) {
            let env = reference_env();
            let body = ConvexBody::disc(vec2(cx, cy), r).unwrap();
            if env.set_free_distance(&body).unwrap() > 0.0 {
                for k in 0..32 {
                    let a = k as f64 * std::f64::consts::TAU / 32.0;
                    for frac in [0.0, 0.5, 1.0] {
                        let p = vec2(cx + frac * r * a.cos(), cy + frac * r * a.sin());
                        prop_assert!(env.point_free_distance(&p).unwrap() > 0.0);
                    }
                }
            }
        }
    }
}
