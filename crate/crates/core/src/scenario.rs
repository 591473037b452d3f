//! JSON scenario files.
//!
//! ```json
//! {
//!   "schema": "timegov-scenario/1",
//!   "environment": {
//!     "workspace": [[0, 0], [10, 0], [10, 10], [0, 10]],
//!     "obstacles": [
//!       { "type": "polygon", "vertices": [[4, 4], [6, 4], [6, 6], [4, 6]] },
//!       { "type": "disc", "center": [2, 8], "radius": 0.5 }
//!     ],
//!     "robot_radius": 0.25,
//!     "clearance": 0.5
//!   },
//!   "path": [[1, 1], [9, 1], [9, 9]],
//!   "order": 2,
//!   "roots": [-3, -3],
//!   "governor": { "type": "safe", "kappa_sigma": 3, "kappa_s": 1 },
//!   "predictor": "vandermonde",
//!   "velocity_feedback": true,
//!   "sim": { "dt": 0.001, "t_max": 120, "s_tol": 0.001, "pos_tol": 0.01 }
//! }
//! ```
//!
//! Everything after `order` is optional. Missing roots default to `-3`
//! repeated `order` times, and the robot starts at rest at the path start
//! unless `initial_state` lists the blocks `p, ṗ, …`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::environment::Environment;
use crate::error::{Error, Result};
use crate::geometry::{vec2, ConvexBody, ConvexPolygon, VecD};
use crate::governor::{GovernorParams, HeuristicParams};
use crate::phd::{gains_from_roots, RobotState};
use crate::prediction::{MotionPredictor, PredictorKind};
use crate::refpath::ReferencePath;
use crate::simulator::{ClosedLoop, Governor, SimConfig};

pub const SCHEMA: &str = "timegov-scenario/1";

/// Default root of the controller polynomial.
pub const DEFAULT_ROOT: f64 = -3.0;

pub type Point = [f64; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ObstacleSpec {
    Polygon { vertices: Vec<Point> },
    Disc { center: Point, radius: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentSpec {
    pub workspace: Vec<Point>,
    #[serde(default)]
    pub obstacles: Vec<ObstacleSpec>,
    pub robot_radius: f64,
    pub clearance: f64,
}

fn default_kappa_sigma() -> f64 {
    3.0
}

fn default_kappa_s() -> f64 {
    1.0
}

fn default_eta() -> f64 {
    0.5
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum GovernorSpec {
    Safe {
        #[serde(default = "default_kappa_sigma")]
        kappa_sigma: f64,
        #[serde(default = "default_kappa_s")]
        kappa_s: f64,
    },
    Heuristic {
        sdot_desired: f64,
        #[serde(default = "default_eta")]
        eta: f64,
        #[serde(default = "default_kappa_s")]
        kappa_s: f64,
    },
}

impl Default for GovernorSpec {
    fn default() -> Self {
        GovernorSpec::Safe {
            kappa_sigma: default_kappa_sigma(),
            kappa_s: default_kappa_s(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSpec {
    pub dt: f64,
    pub t_max: f64,
    pub s_tol: f64,
    pub pos_tol: f64,
}

impl Default for SimSpec {
    fn default() -> Self {
        let c = SimConfig::default();
        SimSpec {
            dt: c.dt,
            t_max: c.t_max,
            s_tol: c.s_tol,
            pos_tol: c.pos_tol,
        }
    }
}

impl From<SimSpec> for SimConfig {
    fn from(s: SimSpec) -> Self {
        SimConfig {
            dt: s.dt,
            t_max: s.t_max,
            s_tol: s.s_tol,
            pos_tol: s.pos_tol,
        }
    }
}

fn default_predictor() -> PredictorKind {
    PredictorKind::Vandermonde
}

fn default_true() -> bool {
    true
}

/// A scenario as written on disk, with defaults filled in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema: String,
    pub environment: EnvironmentSpec,
    pub path: Vec<Point>,
    pub order: usize,
    #[serde(default)]
    pub roots: Vec<f64>,
    #[serde(default)]
    pub governor: GovernorSpec,
    #[serde(default = "default_predictor")]
    pub predictor: PredictorKind,
    #[serde(default = "default_true")]
    pub velocity_feedback: bool,
    #[serde(default)]
    pub sim: SimSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_state: Option<Vec<Point>>,
}

/// A validated scenario ready to simulate.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub system: ClosedLoop,
    pub initial: RobotState,
    pub config: SimConfig,
}

fn to_vec(p: &Point) -> VecD {
    vec2(p[0], p[1])
}

fn invalid(field: &str, e: Error) -> Error {
    let msg = match e {
        Error::Domain(m) | Error::Construction(m) | Error::Numeric(m) | Error::Setup(m) | Error::Validation(m) => m,
        other => other.to_string(),
    };
    Error::Validation(format!("{field}: {msg}"))
}

impl Scenario {
    /// Parses a scenario and fills in defaults. Does not validate.
    pub fn from_json(text: &str) -> Result<Self> {
        let mut sc: Scenario = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        if sc.roots.is_empty() {
            sc.roots = vec![DEFAULT_ROOT; sc.order];
        }
        Ok(sc)
    }

    /// Canonical pretty-printed JSON.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    /// Reads, parses and validates a scenario file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(path.as_ref())?;
        let sc = Self::from_json(&text)?;
        sc.prepare()?;
        Ok(sc)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }

    pub fn build_environment(&self) -> Result<Environment> {
        let e = &self.environment;
        let workspace = ConvexPolygon::new(e.workspace.iter().map(to_vec).collect())
            .map_err(|err| invalid("environment.workspace", err))?;
        let obstacles = e
            .obstacles
            .iter()
            .enumerate()
            .map(|(i, o)| {
                let field = format!("environment.obstacles[{i}]");
                match o {
                    ObstacleSpec::Polygon { vertices } => {
                        ConvexPolygon::new(vertices.iter().map(to_vec).collect())
                            .map(|p| p.to_body())
                            .map_err(|err| invalid(&field, err))
                    }
                    ObstacleSpec::Disc { center, radius } => {
                        ConvexBody::disc(to_vec(center), *radius).map_err(|err| invalid(&field, err))
                    }
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Environment::new(workspace, obstacles, e.robot_radius, e.clearance)
            .map_err(|err| invalid("environment", err))
    }

    pub fn build_path(&self) -> Result<ReferencePath> {
        ReferencePath::new(self.path.iter().map(to_vec).collect()).map_err(|e| invalid("path", e))
    }

    /// Validates every invariant and assembles the closed loop.
    ///
    /// The reference path must keep the clearance `ε` from the free-space
    /// boundary (checked on a grid of spacing `min(ρ, ε)/4`), and the initial
    /// motion prediction must lie strictly inside the free space.
    pub fn prepare(&self) -> Result<Prepared> {
        if self.schema != SCHEMA {
            return Err(Error::Validation(format!(
                "schema: expected \"{SCHEMA}\", got \"{}\"",
                self.schema
            )));
        }
        if self.order == 0 {
            return Err(Error::Validation("order: must be at least 1".into()));
        }
        if self.roots.len() != self.order {
            return Err(Error::Validation(format!(
                "roots: order {} needs {} roots, got {}",
                self.order,
                self.order,
                self.roots.len()
            )));
        }
        let gains = gains_from_roots(&self.roots).map_err(|e| invalid("roots", e))?;
        let predictor =
            MotionPredictor::new(self.predictor, &gains).map_err(|e| invalid("predictor", e))?;
        let env = self.build_environment()?;
        let path = self.build_path()?;

        let step = env.robot_radius().min(env.clearance()) / 4.0;
        let violations = path.validate_clearance(&env, env.clearance(), step)?;
        if !violations.is_empty() {
            const SHOWN: usize = 8;
            let listed: Vec<String> = violations
                .iter()
                .take(SHOWN)
                .map(|v| format!("{:.3}", v.s))
                .collect();
            let more = if violations.len() > SHOWN {
                format!(" and {} more", violations.len() - SHOWN)
            } else {
                String::new()
            };
            return Err(Error::Validation(format!(
                "path: reference path is closer than the clearance {} to obstacles or the workspace boundary at s = {}{more}",
                env.clearance(),
                listed.join(", ")
            )));
        }

        let s_max = path.end();
        let governor = match self.governor {
            GovernorSpec::Safe {
                kappa_sigma,
                kappa_s,
            } => Governor::Safe(
                GovernorParams::new(kappa_sigma, kappa_s, s_max).map_err(|e| invalid("governor", e))?,
            ),
            GovernorSpec::Heuristic {
                sdot_desired,
                eta,
                kappa_s,
            } => Governor::Heuristic(
                HeuristicParams::new(sdot_desired, eta, kappa_s, s_max)
                    .map_err(|e| invalid("governor", e))?,
            ),
        };
        let config = SimConfig::from(self.sim);
        config.validate().map_err(|e| invalid("sim", e))?;

        let initial = match &self.initial_state {
            None => RobotState::at_rest(&path.eval(path.start()), self.order),
            Some(blocks) => {
                if blocks.len() != self.order {
                    return Err(Error::Validation(format!(
                        "initial_state: order {} needs {} blocks, got {}",
                        self.order,
                        self.order,
                        blocks.len()
                    )));
                }
                RobotState::new(blocks.iter().map(to_vec).collect())
                    .map_err(|e| invalid("initial_state", e))?
            }
        };
        let system = ClosedLoop {
            env,
            path,
            gains,
            predictor,
            governor,
            velocity_feedback: self.velocity_feedback,
        };
        let sigma0 = system.safety_level(&initial, system.path.start())?;
        if !(sigma0 > 0.0) {
            return Err(Error::Validation(
                "initial_state: the initial motion prediction is not strictly inside the free space"
                    .into(),
            ));
        }
        Ok(Prepared {
            system,
            initial,
            config,
        })
    }

    /// The same scenario with another predictor, feedback mode and order.
    ///
    /// A different order repeats the first root and drops a custom initial
    /// state (the robot then starts at rest at the path start).
    pub fn variant(&self, order: usize, predictor: PredictorKind, velocity_feedback: bool) -> Scenario {
        let mut sc = self.clone();
        sc.predictor = predictor;
        sc.velocity_feedback = velocity_feedback;
        if order != self.order {
            let root = self.roots.first().copied().unwrap_or(DEFAULT_ROOT);
            sc.order = order;
            sc.roots = vec![root; order];
            sc.initial_state = None;
        }
        sc
    }
}
