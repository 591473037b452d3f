//! Path-parameter rate laws.
//!
//! The safe time governor advances the path parameter at
//! `ṡ = min(κ_σ σ(x, s), κ_s (b − s))`, where the safety level `σ` is the
//! free-space distance of the predicted motion set. The heuristic baseline
//! slows down with the path-following error through a `tanh` saturation and
//! carries the same `κ_s (b − s)` cap so that it stops at the path end.

use crate::environment::Environment;
use crate::error::{Error, Result};
use crate::phd::RobotState;
use crate::prediction::MotionPredictor;
use crate::refpath::ReferencePath;

/// Gains of the safe time governor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GovernorParams {
    pub kappa_sigma: f64,
    pub kappa_s: f64,
    /// End of the path parameter range `b`.
    pub s_max: f64,
}

impl GovernorParams {
    pub fn new(kappa_sigma: f64, kappa_s: f64, s_max: f64) -> Result<Self> {
        if !(kappa_sigma > 0.0 && kappa_sigma.is_finite()) {
            return Err(Error::domain(format!(
                "kappa_sigma must be positive, got {kappa_sigma}"
            )));
        }
        if !(kappa_s > 0.0 && kappa_s.is_finite()) {
            return Err(Error::domain(format!(
                "kappa_s must be positive, got {kappa_s}"
            )));
        }
        Ok(GovernorParams {
            kappa_sigma,
            kappa_s,
            s_max,
        })
    }

    /// A governor that never advances (`κ_σ = 0`), for frozen-parameter runs.
    pub fn frozen(s_max: f64) -> Self {
        GovernorParams {
            kappa_sigma: 0.0,
            kappa_s: 1.0,
            s_max,
        }
    }
}

/// Parameters of the `tanh`-saturated heuristic rate law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeuristicParams {
    pub sdot_desired: f64,
    pub eta: f64,
    pub kappa_s: f64,
    pub s_max: f64,
}

impl HeuristicParams {
    pub fn new(sdot_desired: f64, eta: f64, kappa_s: f64, s_max: f64) -> Result<Self> {
        if !(sdot_desired > 0.0 && sdot_desired.is_finite()) {
            return Err(Error::domain(format!(
                "sdot_desired must be positive, got {sdot_desired}"
            )));
        }
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::domain(format!("eta must lie in [0, 1], got {eta}")));
        }
        if !(kappa_s > 0.0 && kappa_s.is_finite()) {
            return Err(Error::domain(format!(
                "kappa_s must be positive, got {kappa_s}"
            )));
        }
        Ok(HeuristicParams {
            sdot_desired,
            eta,
            kappa_s,
            s_max,
        })
    }
}

/// Safety level `σ(x, s)`: free-space distance of the motion prediction
/// towards `r(s)`.
pub fn safety_level(
    env: &Environment,
    predictor: &MotionPredictor,
    x: &RobotState,
    s: f64,
    path: &ReferencePath,
) -> Result<f64> {
    if !(path.start()..=path.end()).contains(&s) {
        return Err(Error::domain(format!(
            "path parameter {s} outside [{}, {}]",
            path.start(),
            path.end()
        )));
    }
    env.set_free_distance(&predictor.predict(x, s, path)?)
}

/// `min(κ_σ σ, κ_s (b − s))`.
pub fn safe_rate(params: &GovernorParams, sigma: f64, s: f64) -> Result<f64> {
    if s > params.s_max {
        return Err(Error::domain(format!(
            "path parameter {s} exceeds the path end {}",
            params.s_max
        )));
    }
    if !(sigma >= 0.0) {
        return Err(Error::domain(format!(
            "safety level must be nonnegative, got {sigma}"
        )));
    }
    Ok((params.kappa_sigma * sigma)
        .min(params.kappa_s * (params.s_max - s))
        .max(0.0))
}

/// `min(ṡ_d (1 − η tanh e), κ_s (b − s))`.
pub fn heuristic_rate(params: &HeuristicParams, path_error: f64, s: f64) -> f64 {
    let desired = params.sdot_desired * (1.0 - params.eta * path_error.max(0.0).tanh());
    desired
        .min(params.kappa_s * (params.s_max - s))
        .max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{vec2, ConvexBody, ConvexPolygon};
    use crate::phd::gains_from_roots;
    use crate::prediction::PredictorKind;
    use proptest::prelude::*;

    fn params() -> GovernorParams {
        GovernorParams::new(3.0, 1.0, 10.0).unwrap()
    }

    #[test]
    fn safe_rate_examples() {
        let p = params();
        assert!((safe_rate(&p, 0.2, 9.0).unwrap() - 0.6).abs() < 1e-15);
        assert!((safe_rate(&p, 5.0, 9.5).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(safe_rate(&p, 123.0, 10.0).unwrap(), 0.0);
        assert!(matches!(safe_rate(&p, 1.0, 10.5), Err(Error::Domain(_))));
    }

    #[test]
    fn heuristic_examples() {
        let h = HeuristicParams::new(1.0, 1.0, 1.0, 10.0).unwrap();
        assert_eq!(heuristic_rate(&h, 0.0, 0.0), 1.0);
        assert!(heuristic_rate(&h, 5.0, 0.0) <= 1.0 - 5f64.tanh() + 1e-15);
        assert_eq!(heuristic_rate(&h, 0.0, 10.0), 0.0);
        assert!(HeuristicParams::new(1.0, 1.5, 1.0, 10.0).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(GovernorParams::new(0.0, 1.0, 1.0).is_err());
        assert!(GovernorParams::new(1.0, -1.0, 1.0).is_err());
    }

    fn reference_env() -> Environment {
        let sq = |x0: f64, y0: f64, x1: f64, y1: f64| {
            vec![vec2(x0, y0), vec2(x1, y0), vec2(x1, y1), vec2(x0, y1)]
        };
        Environment::new(
            ConvexPolygon::new(sq(0.0, 0.0, 10.0, 10.0)).unwrap(),
            vec![ConvexBody::polytope(sq(4.0, 4.0, 6.0, 6.0)).unwrap()],
            0.5,
            0.5,
        )
        .unwrap()
    }

    #[test]
    fn safety_level_examples() {
        let env = reference_env();
        let g = gains_from_roots(&[-3.0]).unwrap();
        let pred = MotionPredictor::new(PredictorKind::Lyapunov, &g).unwrap();
        let path = ReferencePath::new(vec![vec2(2.0, 5.0), vec2(2.0, 8.0)]).unwrap();

        // first order: the Lyapunov ellipsoid is the disc B(r, |p − r|)
        let x = RobotState::new(vec![vec2(2.3, 5.0)]).unwrap();
        let sigma = safety_level(&env, &pred, &x, 0.0, &path).unwrap();
        assert!((sigma - 1.2).abs() < 1e-12);

        let far = RobotState::new(vec![vec2(4.5, 5.0)]).unwrap();
        assert_eq!(safety_level(&env, &pred, &far, 0.0, &path).unwrap(), 0.0);

        let at_ref = RobotState::at_rest(&path.eval(1.5), 1);
        let sigma = safety_level(&env, &pred, &at_ref, 1.5, &path).unwrap();
        assert!(sigma >= env.clearance());

        assert!(safety_level(&env, &pred, &x, 3.5, &path).is_err());
    }

    proptest! {
        #[test]
        fn safe_rate_nonnegative_and_zero_at_end(sigma in 0.0..10.0f64, s in 0.0..10.0f64) {
            let p = params();
            let rate = safe_rate(&p, sigma, s).unwrap();
            prop_assert!(rate >= 0.0);
            prop_assert_eq!(safe_rate(&p, sigma, 10.0).unwrap(), 0.0);
            prop_assert_eq!(rate > 0.0, sigma > 0.0 && s < 10.0);
        }

        #[test]
        fn safe_rate_lipschitz(
            s1 in 0.0..10.0f64, s2 in 0.0..10.0f64,
            g1 in 0.0..5.0f64, g2 in 0.0..5.0f64,
        ) {
            let p = params();
            let diff = (safe_rate(&p, g1, s1).unwrap() - safe_rate(&p, g2, s2).unwrap()).abs();
            let bound = p.kappa_sigma.max(p.kappa_s) * ((g1 - g2).abs().max((s1 - s2).abs()));
            prop_assert!(diff <= bound + 1e-12);
        }
    }
}
