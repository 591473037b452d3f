//! Fixed-step integration of the coupled robot and path-parameter dynamics.
//!
//! The state is `(x, s)` with
//!
//! ```text
//! ṡ = g(x, s)                      (safe time governor or heuristic)
//! ẋ = blocks shifted, p⁽ⁿ⁾ = û(x, s, ṡ)
//! ```
//!
//! integrated with classical RK4. The governor rate is re-evaluated at every
//! stage. With velocity feedback disabled the controller is `û(x, s, 0)`.

use nalgebra::DVector;
use serde::Serialize;

use crate::environment::Environment;
use crate::error::{Error, Result};
use crate::geometry::VecD;
use crate::governor::{heuristic_rate, safe_rate, GovernorParams, HeuristicParams};
use crate::phd::{closed_loop_derivative, PhdGains, RobotState};
use crate::prediction::MotionPredictor;
use crate::refpath::ReferencePath;

/// States whose norm grows past this are treated as divergent.
const DIVERGENCE_LIMIT: f64 = 1e9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Governor {
    Safe(GovernorParams),
    Heuristic(HeuristicParams),
}

/// Integration and completion settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub dt: f64,
    pub t_max: f64,
    pub s_tol: f64,
    pub pos_tol: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            dt: 1e-3,
            t_max: 120.0,
            s_tol: 1e-3,
            pos_tol: 1e-2,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::domain(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_max >= self.dt && self.t_max.is_finite()) {
            return Err(Error::domain(format!(
                "t_max must be at least dt, got t_max = {} and dt = {}",
                self.t_max, self.dt
            )));
        }
        if !(self.s_tol > 0.0 && self.pos_tol > 0.0) {
            return Err(Error::domain("completion tolerances must be positive"));
        }
        Ok(())
    }
}

/// The closed loop: environment, path, controller, predictor and governor.
#[derive(Debug, Clone)]
pub struct ClosedLoop {
    pub env: Environment,
    pub path: ReferencePath,
    pub gains: PhdGains,
    pub predictor: MotionPredictor,
    pub governor: Governor,
    pub velocity_feedback: bool,
}

/// Right-hand side plus the quantities logged for a state.
#[derive(Debug, Clone)]
struct Evaluation {
    derivative: DVector<f64>,
    sdot: f64,
    sigma: f64,
}

impl ClosedLoop {
    /// Time derivatives `(ẋ, ṡ)` of the coupled dynamics.
    pub fn coupled_derivative(&self, x: &RobotState, s: f64) -> Result<(DVector<f64>, f64)> {
        if x.order() != self.gains.order() || x.dim() != self.path.dim() {
            return Err(Error::domain(format!(
                "state of order {} and dimension {} does not match the closed loop",
                x.order(),
                x.dim()
            )));
        }
        if !(self.path.start()..=self.path.end()).contains(&s) {
            return Err(Error::domain(format!(
                "path parameter {s} outside [{}, {}]",
                self.path.start(),
                self.path.end()
            )));
        }
        let ev = self.evaluate(x, s, false)?;
        Ok((ev.derivative, ev.sdot))
    }

    /// Safety level of the prediction towards `r(s)`.
    pub fn safety_level(&self, x: &RobotState, s: f64) -> Result<f64> {
        let r = self.path.eval(s);
        self.env
            .set_free_distance(&self.predictor.predict_at(x, &r)?)
    }

    fn evaluate(&self, x: &RobotState, s: f64, with_sigma: bool) -> Result<Evaluation> {
        let s = s.clamp(self.path.start(), self.path.end());
        let r = self.path.eval(s);
        let (sdot, sigma) = match &self.governor {
            Governor::Safe(params) => {
                let sigma = self
                    .env
                    .set_free_distance(&self.predictor.predict_at(x, &r)?)?;
                (safe_rate(params, sigma, s)?, sigma)
            }
            Governor::Heuristic(params) => {
                let err = (x.block(0) - &r).norm();
                let sigma = if with_sigma {
                    self.env
                        .set_free_distance(&self.predictor.predict_at(x, &r)?)?
                } else {
                    f64::NAN
                };
                (heuristic_rate(params, err, s), sigma)
            }
        };
        let feedforward = if self.velocity_feedback { sdot } else { 0.0 };
        let derivative =
            closed_loop_derivative(&self.gains, x, &r, self.path.tangent(s), feedforward);
        Ok(Evaluation {
            derivative,
            sdot,
            sigma,
        })
    }
}

/// One logged time step.
#[derive(Debug, Clone, PartialEq)]
pub struct LogRow {
    pub t: f64,
    pub s: f64,
    pub sdot: f64,
    pub state: RobotState,
    pub sigma: f64,
    /// Free-space distance of the robot position.
    pub d_free: f64,
    /// Radius of the motion prediction about `r(s)`.
    pub radius: f64,
    /// `‖p − r(s)‖`.
    pub path_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimLog {
    pub order: usize,
    pub dim: usize,
    pub rows: Vec<LogRow>,
}

/// When a run counts as having reached the end of the path.
#[derive(Debug, Clone, PartialEq)]
pub struct Completion {
    pub s_end: f64,
    pub goal: VecD,
    pub s_tol: f64,
    pub pos_tol: f64,
}

impl Completion {
    pub fn new(path: &ReferencePath, config: &SimConfig) -> Self {
        Completion {
            s_end: path.end(),
            goal: path.eval(path.end()),
            s_tol: config.s_tol,
            pos_tol: config.pos_tol,
        }
    }

    pub fn is_complete(&self, row: &LogRow) -> bool {
        let x = &row.state;
        self.s_end - row.s <= self.s_tol
            && (x.block(0) - &self.goal).norm() <= self.pos_tol
            && (1..x.order()).all(|k| x.block(k).norm() <= self.pos_tol)
    }
}

/// Summary of a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metrics {
    pub completed: bool,
    /// First logged time at which the completion criterion holds.
    pub travel_time: Option<f64>,
    /// Smallest free-space distance of the robot position.
    pub min_clearance: f64,
    pub mean_path_error: f64,
    pub max_path_error: f64,
    /// Smallest logged safety level.
    pub min_sigma: f64,
    pub final_time: f64,
    pub final_s: f64,
    pub final_goal_error: f64,
}

pub fn compute_metrics(log: &SimLog, completion: &Completion) -> Result<Metrics> {
    let last = log
        .rows
        .last()
        .ok_or_else(|| Error::domain("cannot compute metrics of an empty log"))?;
    let travel_time = log
        .rows
        .iter()
        .find(|r| completion.is_complete(r))
        .map(|r| r.t);
    let n = log.rows.len() as f64;
    let fold_min = |f: fn(&LogRow) -> f64| log.rows.iter().map(f).fold(f64::INFINITY, f64::min);
    Ok(Metrics {
        completed: travel_time.is_some(),
        travel_time,
        min_clearance: fold_min(|r| r.d_free),
        mean_path_error: log.rows.iter().map(|r| r.path_error).sum::<f64>() / n,
        max_path_error: log
            .rows
            .iter()
            .map(|r| r.path_error)
            .fold(0.0, f64::max),
        min_sigma: fold_min(|r| r.sigma),
        final_time: last.t,
        final_s: last.s,
        final_goal_error: (last.state.block(0) - &completion.goal).norm(),
    })
}

fn axpy(x: &DVector<f64>, h: f64, k: &DVector<f64>) -> DVector<f64> {
    x + k * h
}

/// Integrates the closed loop from `initial` at `s = a` until completion or
/// `t_max`, logging every step.
pub fn run(
    system: &ClosedLoop,
    initial: &RobotState,
    config: &SimConfig,
) -> Result<(SimLog, Metrics)> {
    config.validate()?;
    if initial.order() != system.gains.order() || initial.dim() != system.path.dim() {
        return Err(Error::Setup(format!(
            "initial state has order {} and dimension {}, expected {} and {}",
            initial.order(),
            initial.dim(),
            system.gains.order(),
            system.path.dim()
        )));
    }
    let (a, b) = (system.path.start(), system.path.end());
    let sigma0 = system.safety_level(initial, a)?;
    if !(sigma0 > 0.0) {
        return Err(Error::Setup(
            "initial motion prediction is not inside the free space (safety level 0)".into(),
        ));
    }

    let completion = Completion::new(&system.path, config);
    let (order, dim) = (initial.order(), initial.dim());
    let dt = config.dt;
    let max_steps = (config.t_max / dt).round() as usize;

    let mut rows = Vec::with_capacity(max_steps.min(1 << 20) + 1);
    let mut x = initial.clone();
    let mut s = a;
    let mut step = 0usize;
    loop {
        let t = step as f64 * dt;
        let k1 = system.evaluate(&x, s, true)?;
        let r = system.path.eval(s);
        let p = x.position();
        let row = LogRow {
            t,
            s,
            sdot: k1.sdot,
            sigma: k1.sigma,
            d_free: system.env.point_free_distance(&p)?,
            radius: system.predictor.radius(&x, &r)?,
            path_error: (&p - &r).norm(),
            state: x.clone(),
        };
        let done = completion.is_complete(&row);
        rows.push(row);
        if done || step >= max_steps {
            break;
        }

        let xf = x.as_flat();
        let stage = |h: f64, k: &Evaluation| -> Result<Evaluation> {
            let xs = RobotState::from_flat(order, dim, axpy(xf, h, &k.derivative));
            system.evaluate(&xs, (s + h * k.sdot).min(b), false)
        };
        let k2 = stage(0.5 * dt, &k1)?;
        let k3 = stage(0.5 * dt, &k2)?;
        let k4 = stage(dt, &k3)?;

        let incr = (&k1.derivative + &k2.derivative * 2.0 + &k3.derivative * 2.0 + &k4.derivative)
            * (dt / 6.0);
        let s_incr = (k1.sdot + 2.0 * k2.sdot + 2.0 * k3.sdot + k4.sdot) * (dt / 6.0);
        let next = xf + incr;
        if next.iter().any(|v| !v.is_finite()) || next.amax() > DIVERGENCE_LIMIT {
            return Err(Error::numeric(format!(
                "state diverged at t = {:.6}",
                (step + 1) as f64 * dt
            )));
        }
        x = RobotState::from_flat(order, dim, next);
        s = (s + s_incr).clamp(a, b);
        step += 1;
    }

    let log = SimLog { order, dim, rows };
    let metrics = compute_metrics(&log, &completion)?;
    Ok((log, metrics))
}
