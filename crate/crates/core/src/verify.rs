//! Independent oracles: trajectory containment, Lyapunov residuals,
//! brute-force distances and root recovery.
//!
//! The checks re-derive quantities by simulation, dense boundary sampling or
//! direct linear algebra, without going through GJK or the Lyapunov solver.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{sym_sqrt, vec2, ConvexBody, SymMatrix, VecD};
use crate::phd::{closed_loop_derivative, companion, gains_from_roots, CompanionMatrix, PhdGains, RobotState};
use crate::prediction::{solve_lyapunov, MotionPredictor, PredictorKind};

/// Number of support directions used for containment margins in 2D and 3D.
pub const CONTAINMENT_DIRECTIONS: usize = 256;

/// Time step of the frozen-parameter trial simulations.
pub const TRIAL_DT: f64 = 1e-3;

/// Frozen-parameter horizon factor: trials run for `HORIZON_FACTOR / |max root|`.
pub const HORIZON_FACTOR: f64 = 20.0;

/// Spectral norm of `AᵀP + PA + I`.
pub fn lyapunov_residual(a: &CompanionMatrix, p: &SymMatrix) -> Result<f64> {
    let (a, p) = (a.as_matrix(), p.as_matrix());
    if a.nrows() != p.nrows() {
        return Err(Error::domain(format!(
            "companion matrix is {}x{}, Lyapunov matrix is {}x{}",
            a.nrows(),
            a.ncols(),
            p.nrows(),
            p.ncols()
        )));
    }
    let n = a.nrows();
    let m = a.transpose() * p + p * a + DMatrix::identity(n, n);
    Ok(m.singular_values().max())
}

/// Unit directions for support sampling: `±1` in 1D, a uniform circle in 2D
/// and a Fibonacci sphere in 3D and above (first three coordinates).
pub fn sample_directions(dim: usize) -> Vec<VecD> {
    match dim {
        0 => Vec::new(),
        1 => vec![DVector::from_element(1, 1.0), DVector::from_element(1, -1.0)],
        2 => (0..CONTAINMENT_DIRECTIONS)
            .map(|i| {
                let th = 2.0 * PI * i as f64 / CONTAINMENT_DIRECTIONS as f64;
                vec2(th.cos(), th.sin())
            })
            .collect(),
        _ => {
            let golden = PI * (3.0 - 5f64.sqrt());
            let m = CONTAINMENT_DIRECTIONS as f64;
            (0..CONTAINMENT_DIRECTIONS)
                .map(|i| {
                    let z = 1.0 - (2.0 * i as f64 + 1.0) / m;
                    let rho = (1.0 - z * z).sqrt();
                    let th = golden * i as f64;
                    let mut v = DVector::zeros(dim);
                    v[0] = rho * th.cos();
                    v[1] = rho * th.sin();
                    v[2] = z;
                    v
                })
                .collect()
        }
    }
}

/// Integrates the frozen-parameter loop `û(x, s, 0)` with RK4 and returns
/// every state from `t = 0` to `t = horizon`.
pub fn simulate_frozen(
    gains: &PhdGains,
    x0: &RobotState,
    r: &VecD,
    horizon: f64,
    dt: f64,
) -> Result<Vec<RobotState>> {
    if !(horizon > 0.0 && dt > 0.0 && horizon.is_finite()) {
        return Err(Error::domain("horizon and dt must be positive"));
    }
    if x0.order() != gains.order() || r.len() != x0.dim() {
        return Err(Error::domain("state, gains and reference do not match"));
    }
    let (n, d) = (x0.order(), x0.dim());
    let tangent = DVector::zeros(d);
    let f = |x: &DVector<f64>| {
        closed_loop_derivative(gains, &RobotState::from_flat(n, d, x.clone()), r, &tangent, 0.0)
    };
    let steps = (horizon / dt).round() as usize;
    let mut states = Vec::with_capacity(steps + 1);
    let mut x = x0.as_flat().clone();
    states.push(x0.clone());
    for step in 0..steps {
        let k1 = f(&x);
        let k2 = f(&(&x + &k1 * (0.5 * dt)));
        let k3 = f(&(&x + &k2 * (0.5 * dt)));
        let k4 = f(&(&x + &k3 * dt));
        x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::numeric(format!(
                "frozen trajectory diverged at t = {}",
                (step + 1) as f64 * dt
            )));
        }
        states.push(RobotState::from_flat(n, d, x.clone()));
    }
    Ok(states)
}

/// Worst signed margin of the positions in `states` inside `set`, measured
/// along sampled support directions, together with the step index attaining
/// it. Negative values mean the trajectory left the set.
pub fn containment_margin(set: &ConvexBody, states: &[RobotState]) -> Result<(usize, f64)> {
    let dirs = sample_directions(set.dim());
    let support = dirs
        .iter()
        .map(|u| set.support_value(u))
        .collect::<Result<Vec<_>>>()?;
    let mut worst = (0, f64::INFINITY);
    for (i, x) in states.iter().enumerate() {
        let p = x.block(0);
        for (u, h) in dirs.iter().zip(&support) {
            let m = h - u.dot(&p);
            if m < worst.1 {
                worst = (i, m);
            }
        }
    }
    Ok(worst)
}

/// Frozen-parameter containment trial: worst `(t, margin)` of the simulated
/// positions inside the prediction set computed at `t = 0`.
pub fn containment_trial(
    predictor: &MotionPredictor,
    gains: &PhdGains,
    x0: &RobotState,
    r: &VecD,
    horizon: f64,
    dt: f64,
) -> Result<(f64, f64)> {
    let set = predictor.predict_at(x0, r)?;
    let states = simulate_frozen(gains, x0, r, horizon, dt)?;
    let (i, m) = containment_margin(&set, &states)?;
    Ok((i as f64 * dt, m))
}

/// Decay check on a frozen-parameter trajectory.
///
/// Lyapunov: the largest per-step increase of the Lyapunov norm (expected
/// nonpositive up to rounding). Vandermonde: the prediction radius at the
/// final state.
pub fn radius_decay_check(states: &[RobotState], predictor: &MotionPredictor, r: &VecD) -> Result<f64> {
    let last = states
        .last()
        .ok_or_else(|| Error::domain("empty trajectory"))?;
    match predictor {
        MotionPredictor::Lyapunov(cert) => {
            if last.order() != cert.order() {
                return Err(Error::domain("state order does not match the certificate"));
            }
            let norms: Vec<f64> = states.iter().map(|x| cert.norm(x, r)).collect();
            Ok(norms
                .windows(2)
                .map(|w| w[1] - w[0])
                .fold(f64::NEG_INFINITY, f64::max))
        }
        MotionPredictor::Vandermonde(_) => predictor.radius(last, r),
    }
}

/// Per-trial result of [`random_trials`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialResult {
    /// Time of the worst containment margin.
    pub t: f64,
    pub margin: f64,
    /// Output of [`radius_decay_check`] for the trial.
    pub decay: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContainmentReport {
    pub predictor: PredictorKind,
    pub order: usize,
    pub dim: usize,
    pub trials: usize,
    pub worst_margin: f64,
    /// Largest decay value over the trials.
    pub worst_decay: f64,
    pub per_trial: Vec<TrialResult>,
}

fn random_roots(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-6.0..-1.0)).collect()
}

fn random_vec(rng: &mut ChaCha8Rng, d: usize, half_width: f64) -> VecD {
    DVector::from_fn(d, |_, _| rng.gen_range(-half_width..half_width))
}

/// Random frozen-parameter trials for one predictor, order and dimension.
///
/// Roots are drawn from `[-6, -1]`, state blocks and references from
/// `[-2, 2]^d`, and each trial runs for `20 / |max root|` seconds.
pub fn random_trials(
    kind: PredictorKind,
    order: usize,
    dim: usize,
    trials: usize,
    seed: u64,
) -> Result<ContainmentReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cases: Vec<(Vec<f64>, RobotState, VecD)> = (0..trials)
        .map(|_| {
            let roots = random_roots(&mut rng, order);
            let blocks = (0..order).map(|_| random_vec(&mut rng, dim, 2.0)).collect();
            let r = random_vec(&mut rng, dim, 2.0);
            (roots, RobotState::new(blocks).expect("consistent blocks"), r)
        })
        .collect();
    let per_trial = cases
        .par_iter()
        .map(|(roots, x0, r)| {
            let gains = gains_from_roots(roots)?;
            let predictor = MotionPredictor::new(kind, &gains)?;
            let horizon = HORIZON_FACTOR / gains.max_root().abs();
            let set = predictor.predict_at(x0, r)?;
            let states = simulate_frozen(&gains, x0, r, horizon, TRIAL_DT)?;
            let (i, margin) = containment_margin(&set, &states)?;
            let decay = radius_decay_check(&states, &predictor, r)?;
            Ok(TrialResult {
                t: i as f64 * TRIAL_DT,
                margin,
                decay,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ContainmentReport {
        predictor: kind,
        order,
        dim,
        trials,
        worst_margin: per_trial.iter().map(|t| t.margin).fold(f64::INFINITY, f64::min),
        worst_decay: per_trial.iter().map(|t| t.decay).fold(f64::NEG_INFINITY, f64::max),
        per_trial,
    })
}

/// Residuals of the Lyapunov solver for roots `(-3, ..., -3)` with
/// `n = 1..=max_order` followed by `random` randomized negative root sets.
pub fn lyapunov_residual_cases(max_order: usize, random: usize, seed: u64) -> Result<Vec<(Vec<f64>, f64)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sets: Vec<Vec<f64>> = (1..=max_order).map(|n| vec![-3.0; n]).collect();
    for _ in 0..random {
        let n = rng.gen_range(1..=max_order);
        sets.push((0..n).map(|_| rng.gen_range(-8.0..-0.5)).collect());
    }
    sets.into_iter()
        .map(|roots| {
            let a = companion(&gains_from_roots(&roots)?);
            let cert = solve_lyapunov(&a)?;
            let res = lyapunov_residual(&a, cert.p_small())?;
            Ok((roots, res))
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Root recovery

fn horner(coeffs: &[f64], z: f64) -> (f64, f64) {
    // coeffs[k] multiplies z^k
    let mut p = 0.0;
    let mut dp = 0.0;
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// Recovers the characteristic roots from the controller coefficients:
/// eigenvalues of the companion matrix, polished by Newton steps on the
/// polynomial and sorted ascending.
pub fn recover_roots(gains: &PhdGains) -> Result<Vec<f64>> {
    let eig = companion(gains).as_matrix().complex_eigenvalues();
    let mut roots = Vec::with_capacity(eig.len());
    for z in eig.iter() {
        if z.im.abs() > 1e-6 * (1.0 + z.re.abs()) {
            return Err(Error::numeric(format!(
                "recovered a complex root {} + {}i",
                z.re, z.im
            )));
        }
        let mut x = z.re;
        for _ in 0..50 {
            let (p, dp) = horner(gains.coeffs(), x);
            if dp == 0.0 {
                break;
            }
            let step = p / dp;
            x -= step;
            if step.abs() <= 1e-15 * (1.0 + x.abs()) {
                break;
            }
        }
        roots.push(x);
    }
    roots.sort_by(f64::total_cmp);
    Ok(roots)
}

/// Random negative root sets of order up to `max_order` with pairwise gaps
/// of at least `min_gap`, drawn from `[-6, -0.5]`.
pub fn separated_root_sets(count: usize, max_order: usize, min_gap: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.gen_range(1..=max_order);
            loop {
                let mut roots: Vec<f64> = (0..n).map(|_| rng.gen_range(-6.0..-0.5)).collect();
                roots.sort_by(f64::total_cmp);
                if roots.windows(2).all(|w| w[1] - w[0] >= min_gap) {
                    break roots;
                }
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Brute-force distance

/// Convex hull (counter-clockwise, no collinear points) by monotone chain.
fn hull(points: &[VecD]) -> Vec<VecD> {
    let mut pts: Vec<(f64, f64)> = points.iter().map(|p| (p[0], p[1])).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts.dedup();
    if pts.len() < 3 {
        return pts.into_iter().map(|(x, y)| vec2(x, y)).collect();
    }
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let mut lower: Vec<(f64, f64)> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<(f64, f64)> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower.into_iter().map(|(x, y)| vec2(x, y)).collect()
}

/// Boundary samples of a 2D body with consecutive spacing at most `delta`,
/// plus a point-membership test.
struct Sampled {
    points: Vec<(f64, f64)>,
    inside: Box<dyn Fn(f64, f64) -> bool + Sync>,
}

fn sample_segment(a: &VecD, b: &VecD, delta: f64, out: &mut Vec<(f64, f64)>) {
    let n = ((b - a).norm() / delta).ceil().max(1.0) as usize;
    for j in 0..n {
        let t = j as f64 / n as f64;
        out.push((a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])));
    }
}

fn sample_body(body: &ConvexBody, delta: f64) -> Result<Sampled> {
    match body {
        ConvexBody::Disc { center, radius } => {
            let (cx, cy, r) = (center[0], center[1], *radius);
            let n = ((2.0 * PI * r) / delta).ceil().max(1.0) as usize;
            let points = (0..n)
                .map(|i| {
                    let th = 2.0 * PI * i as f64 / n as f64;
                    (cx + r * th.cos(), cy + r * th.sin())
                })
                .collect();
            Ok(Sampled {
                points,
                inside: Box::new(move |x, y| (x - cx).hypot(y - cy) <= r),
            })
        }
        ConvexBody::Polytope { vertices } => {
            let h = hull(vertices);
            let mut points = Vec::new();
            for i in 0..h.len() {
                sample_segment(&h[i], &h[(i + 1) % h.len()], delta, &mut points);
            }
            let edges: Vec<(f64, f64, f64, f64)> = (0..h.len())
                .map(|i| {
                    let (a, b) = (&h[i], &h[(i + 1) % h.len()]);
                    (a[0], a[1], b[0] - a[0], b[1] - a[1])
                })
                .collect();
            let area = h.len() >= 3;
            Ok(Sampled {
                points,
                inside: Box::new(move |x, y| {
                    area && edges
                        .iter()
                        .all(|&(ax, ay, ex, ey)| ex * (y - ay) - ey * (x - ax) >= 0.0)
                }),
            })
        }
        ConvexBody::Ellipsoid { center, shape, scale } => {
            let root = sym_sqrt(shape.as_matrix())?.into_matrix() * *scale;
            let reach = root.norm();
            let n = ((2.0 * PI * reach) / delta).ceil().max(1.0) as usize;
            let (cx, cy) = (center[0], center[1]);
            let points = (0..n)
                .map(|i| {
                    let th = 2.0 * PI * i as f64 / n as f64;
                    let v = &root * vec2(th.cos(), th.sin());
                    (cx + v[0], cy + v[1])
                })
                .collect();
            let inv = root.clone().try_inverse();
            Ok(Sampled {
                points,
                inside: Box::new(move |x, y| match &inv {
                    Some(inv) => (inv * vec2(x - cx, y - cy)).norm() <= 1.0,
                    None => false,
                }),
            })
        }
    }
}

/// Distance between two 2D bodies by dense boundary sampling with spacing
/// `delta`. Overlapping bodies give 0. The result exceeds the true distance
/// by at most `delta` and is never below it except on overlap detection.
pub fn brute_force_distance(a: &ConvexBody, b: &ConvexBody, delta: f64) -> Result<f64> {
    if a.dim() != 2 || b.dim() != 2 {
        return Err(Error::domain("brute-force distance is implemented for 2D bodies"));
    }
    if !(delta > 0.0) {
        return Err(Error::domain("sampling step must be positive"));
    }
    let sa = sample_body(a, delta)?;
    let sb = sample_body(b, delta)?;
    if sa.points.iter().any(|&(x, y)| (sb.inside)(x, y))
        || sb.points.iter().any(|&(x, y)| (sa.inside)(x, y))
    {
        return Ok(0.0);
    }
    // bounding circle of b's samples for pruning
    let n = sb.points.len() as f64;
    let (cx, cy) = sb
        .points
        .iter()
        .fold((0.0, 0.0), |acc, p| (acc.0 + p.0 / n, acc.1 + p.1 / n));
    let rb = sb
        .points
        .iter()
        .map(|p| (p.0 - cx).hypot(p.1 - cy))
        .fold(0.0, f64::max);
    let mut order: Vec<(f64, (f64, f64))> = sa
        .points
        .iter()
        .map(|&p| ((p.0 - cx).hypot(p.1 - cy), p))
        .collect();
    order.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut best = f64::INFINITY;
    for (dc, (x, y)) in order {
        if dc - rb >= best {
            break;
        }
        let mut best_sq = best * best;
        for &(u, v) in &sb.points {
            let d = (x - u) * (x - u) + (y - v) * (y - v);
            if d < best_sq {
                best_sq = d;
            }
        }
        best = best_sq.sqrt();
    }
    Ok(best)
}

/// A random 2D convex body with extent at most about 1.5: a disc, an
/// ellipse or a polygon inscribed in a circle.
pub fn random_body(rng: &mut impl Rng, center_half_width: f64) -> ConvexBody {
    let c = vec2(
        rng.gen_range(-center_half_width..center_half_width),
        rng.gen_range(-center_half_width..center_half_width),
    );
    match rng.gen_range(0..3) {
        0 => ConvexBody::disc(c, rng.gen_range(0.05..1.2)).expect("valid disc"),
        1 => {
            let (a, b) = (rng.gen_range(0.05..1.2), rng.gen_range(0.05..1.2));
            let th: f64 = rng.gen_range(0.0..PI);
            let rot = DMatrix::from_row_slice(2, 2, &[th.cos(), -th.sin(), th.sin(), th.cos()]);
            let q = &rot * DMatrix::from_diagonal(&DVector::from_vec(vec![a * a, b * b])) * rot.transpose();
            ConvexBody::ellipsoid(c, SymMatrix::new(q).expect("symmetric"), rng.gen_range(0.5..1.2))
                .expect("valid ellipse")
        }
        _ => {
            let k = rng.gen_range(3..9);
            let rad = rng.gen_range(0.1..1.2);
            let mut angles: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..2.0 * PI)).collect();
            angles.sort_by(f64::total_cmp);
            let verts = angles
                .iter()
                .map(|t| &c + vec2(rad * t.cos(), rad * t.sin()))
                .collect();
            ConvexBody::polytope(verts).expect("valid polygon")
        }
    }
}

/// GJK against brute force on `pairs` random body pairs. Returns
/// `(gjk, brute)` distances per pair.
pub fn gjk_oracle_pairs(pairs: usize, delta: f64, seed: u64) -> Result<Vec<(f64, f64)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bodies: Vec<(ConvexBody, ConvexBody)> = (0..pairs)
        .map(|_| (random_body(&mut rng, 2.0), random_body(&mut rng, 2.0)))
        .collect();
    bodies
        .par_iter()
        .map(|(a, b)| Ok((crate::geometry::gjk_distance(a, b)?, brute_force_distance(a, b, delta)?)))
        .collect()
}

// ---------------------------------------------------------------------------
// Aggregate report

/// One named check of [`verify_all`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// Observed worst value.
    pub value: f64,
    pub bound: f64,
}

/// Runs every oracle with `trials` random trials per containment cell.
pub fn verify_all(trials: usize, seed: u64) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    let mut push = |name: String, value: f64, bound: f64, ok: bool| {
        out.push(CheckResult {
            name,
            passed: ok,
            value,
            bound,
        })
    };

    let residuals = lyapunov_residual_cases(5, 20, seed)?;
    let worst = residuals.iter().map(|r| r.1).fold(0.0, f64::max);
    push("lyapunov residual".into(), worst, 1e-10, worst <= 1e-10);

    for n in 1..=3 {
        for d in 1..=3 {
            for kind in [PredictorKind::Lyapunov, PredictorKind::Vandermonde] {
                if kind == PredictorKind::Vandermonde && n < 2 {
                    continue;
                }
                let cell_seed = seed ^ ((n * 16 + d) as u64) ^ ((kind as u64) << 8);
                let rep = random_trials(kind, n, d, trials, cell_seed)?;
                let label = format!("{} n={n} d={d}", kind.name());
                push(
                    format!("containment {label}"),
                    rep.worst_margin,
                    -1e-6,
                    rep.worst_margin >= -1e-6,
                );
                let (what, bound) = match kind {
                    PredictorKind::Lyapunov => ("norm increase", 1e-9),
                    PredictorKind::Vandermonde => ("final radius", 1e-3),
                };
                push(format!("{what} {label}"), rep.worst_decay, bound, rep.worst_decay <= bound);
            }
        }
    }

    let delta = 1e-3;
    let pairs = gjk_oracle_pairs(100, delta, seed)?;
    let worst = pairs
        .iter()
        .map(|(g, b)| (g - b).abs())
        .fold(0.0, f64::max);
    push("gjk vs brute force".into(), worst, delta, worst <= delta);

    let mut worst = 0.0f64;
    for roots in separated_root_sets(50, 5, 0.25, seed) {
        let rec = recover_roots(&gains_from_roots(&roots)?)?;
        for (a, b) in roots.iter().zip(&rec) {
            worst = worst.max((a - b).abs());
        }
    }
    push("root recovery".into(), worst, 1e-9, worst <= 1e-9);

    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    #[test]
    fn residual_examples() {
        let a = companion(&gains_from_roots(&[-3.0]).unwrap());
        let p = SymMatrix::new(dmatrix![1.0 / 6.0]).unwrap();
        assert!(lyapunov_residual(&a, &p).unwrap() < 1e-15);

        let a = companion(&gains_from_roots(&[-3.0, -3.0]).unwrap());
        let exact = dmatrix![7.0 / 6.0, 1.0 / 18.0; 1.0 / 18.0, 5.0 / 54.0];
        let off = SymMatrix::new(exact.add_scalar(1e-3)).unwrap();
        assert!(lyapunov_residual(&a, &off).unwrap() > 1e-4);
        assert!(lyapunov_residual(&a, &SymMatrix::identity(3)).is_err());
    }

    #[test]
    fn start_at_reference_has_zero_margin() {
        let g = gains_from_roots(&[-3.0, -2.0]).unwrap();
        let x0 = RobotState::at_rest(&vec2(1.0, 1.0), 2);
        for kind in [PredictorKind::Lyapunov, PredictorKind::Vandermonde] {
            let pred = MotionPredictor::new(kind, &g).unwrap();
            let (_, m) = containment_trial(&pred, &g, &x0, &vec2(1.0, 1.0), 1.0, 1e-2).unwrap();
            assert!(m.abs() < 1e-12);
            let states = simulate_frozen(&g, &x0, &vec2(1.0, 1.0), 1.0, 1e-2).unwrap();
            assert!(radius_decay_check(&states, &pred, &vec2(1.0, 1.0)).unwrap().abs() < 1e-15);
        }
    }

    #[test]
    fn scalar_first_order_interval() {
        let g = gains_from_roots(&[-2.0]).unwrap();
        let pred = MotionPredictor::new(PredictorKind::Lyapunov, &g).unwrap();
        let x0 = RobotState::new(vec![DVector::from_element(1, 3.0)]).unwrap();
        let r = DVector::from_element(1, -1.0);
        let (_, m) = containment_trial(&pred, &g, &x0, &r, 5.0, 1e-3).unwrap();
        assert!(m >= -1e-9);
    }

    #[test]
    fn small_trial_matrix() {
        for kind in [PredictorKind::Lyapunov, PredictorKind::Vandermonde] {
            let rep = random_trials(kind, 2, 2, 10, 7).unwrap();
            assert_eq!(rep.per_trial.len(), 10);
            assert!(rep.worst_margin >= -1e-6, "{kind:?}: {}", rep.worst_margin);
            match kind {
                PredictorKind::Lyapunov => assert!(rep.worst_decay <= 1e-9),
                PredictorKind::Vandermonde => assert!(rep.worst_decay <= 1e-3),
            }
        }
    }

    #[test]
    fn brute_force_matches_known_distances() {
        let a = ConvexBody::disc(vec2(0.0, 0.0), 1.0).unwrap();
        let b = ConvexBody::disc(vec2(3.0, 0.0), 1.0).unwrap();
        let d = brute_force_distance(&a, &b, 1e-3).unwrap();
        assert!((1.0 - 1e-12..=1.0 + 1e-3).contains(&d));

        let sq = ConvexBody::polytope(vec![
            vec2(0.0, 0.0),
            vec2(1.0, 0.0),
            vec2(1.0, 1.0),
            vec2(0.0, 1.0),
            vec2(0.5, 0.5),
        ])
        .unwrap();
        let far = ConvexBody::point(vec2(3.0, 0.5));
        let d = brute_force_distance(&sq, &far, 1e-3).unwrap();
        assert!((d - 2.0).abs() <= 1e-3);

        let inner = ConvexBody::disc(vec2(0.5, 0.5), 0.1).unwrap();
        assert_eq!(brute_force_distance(&sq, &inner, 1e-3).unwrap(), 0.0);
    }

    #[test]
    fn roots_round_trip() {
        let g = gains_from_roots(&[-1.0, -2.0, -4.5]).unwrap();
        let rec = recover_roots(&g).unwrap();
        for (a, b) in rec.iter().zip([-4.5, -2.0, -1.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        for set in separated_root_sets(5, 5, 0.25, 1) {
            assert!(set.iter().all(|r| *r < 0.0));
            assert!(set.windows(2).all(|w| w[1] - w[0] >= 0.25));
        }
    }

    #[test]
    fn directions_are_unit() {
        for d in 1..=3 {
            for u in sample_directions(d) {
                assert!((u.norm() - 1.0).abs() < 1e-12);
            }
        }
        assert_eq!(sample_directions(2).len(), CONTAINMENT_DIRECTIONS);
    }
}
