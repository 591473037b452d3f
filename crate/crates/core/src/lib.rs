//! Time governors for safe path-following control.
//!
//! A reference path is time-parametrized online: the path parameter advances
//! at a rate throttled by how far the predicted closed-loop robot motion is
//! from collision. The library covers the pieces needed to simulate this for
//! fully actuated `n`th-order robots under PhD control:
//!
//! - [`geometry`]: convex bodies, support functions, GJK distances
//! - [`environment`]: workspace, obstacles and free-space distance
//! - [`refpath`]: arc-length parametrized polyline paths
//! - [`phd`]: PhD path-following control and its gains
//! - [`prediction`]: Lyapunov ellipsoid and Vandermonde simplex motion prediction
//! - [`governor`]: the safe time governor and a heuristic baseline
//! - [`simulator`]: RK4 integration of the coupled robot/governor dynamics
//! - [`verify`]: independent oracles used by the test suite
//! - [`scenario`], [`output`], [`svg`], [`cli`]: file formats and commands

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod environment;
pub mod error;
pub mod geometry;
pub mod governor;
pub mod output;
pub mod phd;
pub mod prediction;
pub mod refpath;
pub mod scenario;
pub mod simulator;
pub mod svg;
pub mod verify;

pub use error::{Error, Result};
