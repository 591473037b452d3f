//! Static SVG rendering of a run: workspace, obstacles, reference path,
//! robot trajectory and velocity bars.

use std::fmt::Write;

use crate::environment::Environment;
use crate::geometry::ConvexBody;
use crate::refpath::ReferencePath;
use crate::simulator::SimLog;

/// Output width in pixels; the height follows the workspace aspect ratio.
const WIDTH: f64 = 800.0;
/// Most trajectory vertices drawn.
const MAX_POINTS: usize = 2000;
/// Spacing of velocity bars along the trajectory, in seconds.
const BAR_INTERVAL: f64 = 0.25;
/// Bar length per unit speed, in meters.
const BAR_SCALE: f64 = 0.25;

struct Frame {
    min_x: f64,
    max_y: f64,
    scale: f64,
}

impl Frame {
    fn x(&self, x: f64) -> f64 {
        (x - self.min_x) * self.scale
    }

    fn y(&self, y: f64) -> f64 {
        (self.max_y - y) * self.scale
    }

    fn point(&self, x: f64, y: f64) -> String {
        format!("{:.2},{:.2}", self.x(x), self.y(y))
    }
}

fn points_attr(frame: &Frame, pts: impl Iterator<Item = (f64, f64)>) -> String {
    pts.map(|(x, y)| frame.point(x, y)).collect::<Vec<_>>().join(" ")
}

/// Renders the scene. Output depends only on the inputs.
pub fn render(env: &Environment, path: &ReferencePath, log: &SimLog) -> String {
    let ws = env.workspace().vertices();
    let xs = ws.iter().map(|v| v[0]);
    let ys = ws.iter().map(|v| v[1]);
    let (min_x, max_x) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |a, v| (a.0.min(v), a.1.max(v)));
    let (min_y, max_y) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |a, v| (a.0.min(v), a.1.max(v)));
    let pad = 0.02 * (max_x - min_x).max(max_y - min_y);
    let frame = Frame {
        min_x: min_x - pad,
        max_y: max_y + pad,
        scale: WIDTH / (max_x - min_x + 2.0 * pad),
    };
    let height = (max_y - min_y + 2.0 * pad) * frame.scale;
    let px = |m: f64| m * frame.scale;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH:.0}" height="{height:.0}" viewBox="0 0 {WIDTH:.2} {height:.2}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r##"<polygon points="{}" fill="#f4f4f4" stroke="black" stroke-width="2"/>"##,
        points_attr(&frame, ws.iter().map(|v| (v[0], v[1])))
    );
    for obs in env.obstacles() {
        match obs {
            ConvexBody::Disc { center, radius } => {
                let _ = writeln!(
                    s,
                    r##"<circle cx="{:.2}" cy="{:.2}" r="{:.2}" fill="#555555"/>"##,
                    frame.x(center[0]),
                    frame.y(center[1]),
                    px(*radius)
                );
            }
            ConvexBody::Polytope { vertices } => {
                let _ = writeln!(
                    s,
                    r##"<polygon points="{}" fill="#555555"/>"##,
                    points_attr(&frame, vertices.iter().map(|v| (v[0], v[1])))
                );
            }
            ConvexBody::Ellipsoid { .. } => {
                let (c, r) = obs.bounding_ball();
                let _ = writeln!(
                    s,
                    r##"<circle cx="{:.2}" cy="{:.2}" r="{:.2}" fill="#555555"/>"##,
                    frame.x(c[0]),
                    frame.y(c[1]),
                    px(r)
                );
            }
        }
    }
    let _ = writeln!(
        s,
        r#"<polyline points="{}" fill="none" stroke="red" stroke-width="2" stroke-dasharray="6,4"/>"#,
        points_attr(&frame, path.waypoints().iter().map(|v| (v[0], v[1])))
    );

    let rows = &log.rows;
    if !rows.is_empty() {
        let stride = rows.len().div_ceil(MAX_POINTS).max(1);
        let mut traj: Vec<(f64, f64)> = rows
            .iter()
            .step_by(stride)
            .map(|r| (r.state.block(0)[0], r.state.block(0)[1]))
            .collect();
        let last = rows.last().expect("nonempty").state.block(0);
        traj.push((last[0], last[1]));
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="blue" stroke-width="1.5"/>"#,
            points_attr(&frame, traj.into_iter())
        );

        // bars normal to the direction of travel, length proportional to speed
        let mut next_t = 0.0;
        for w in rows.windows(2) {
            if w[0].t + 1e-12 < next_t {
                continue;
            }
            next_t = w[0].t + BAR_INTERVAL;
            let (p, q) = (w[0].state.block(0), w[1].state.block(0));
            let dt = w[1].t - w[0].t;
            let (vx, vy) = ((q[0] - p[0]) / dt, (q[1] - p[1]) / dt);
            let speed = vx.hypot(vy);
            if speed < 1e-9 {
                continue;
            }
            let (nx, ny) = (-vy / speed, vx / speed);
            let len = BAR_SCALE * speed;
            let _ = writeln!(
                s,
                r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="blue" stroke-opacity="0.5" stroke-width="1"/>"#,
                frame.x(p[0]),
                frame.y(p[1]),
                frame.x(p[0] + nx * len),
                frame.y(p[1] + ny * len)
            );
        }
    }

    let start = path.eval(path.start());
    let goal = path.eval(path.end());
    let _ = writeln!(
        s,
        r#"<circle cx="{:.2}" cy="{:.2}" r="{:.2}" fill="none" stroke="green" stroke-width="2"/>"#,
        frame.x(start[0]),
        frame.y(start[1]),
        px(env.robot_radius())
    );
    let _ = writeln!(
        s,
        r#"<circle cx="{:.2}" cy="{:.2}" r="{:.2}" fill="none" stroke="black" stroke-width="2"/>"#,
        frame.x(goal[0]),
        frame.y(goal[1]),
        px(env.robot_radius())
    );
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{vec2, ConvexPolygon};
    use crate::phd::RobotState;
    use crate::simulator::LogRow;

    #[test]
    fn renders_all_layers() {
        let env = Environment::new(
            ConvexPolygon::new(vec![vec2(0.0, 0.0), vec2(4.0, 0.0), vec2(4.0, 2.0), vec2(0.0, 2.0)]).unwrap(),
            vec![ConvexBody::disc(vec2(2.0, 1.5), 0.2).unwrap()],
            0.1,
            0.2,
        )
        .unwrap();
        let path = ReferencePath::new(vec![vec2(0.5, 0.5), vec2(3.5, 0.5)]).unwrap();
        let rows = (0..100)
            .map(|i| {
                let t = i as f64 * 0.01;
                LogRow {
                    t,
                    s: t,
                    sdot: 1.0,
                    state: RobotState::at_rest(&vec2(0.5 + t, 0.5), 1),
                    sigma: 0.1,
                    d_free: 0.2,
                    radius: 0.0,
                    path_error: 0.0,
                }
            })
            .collect();
        let log = SimLog { order: 1, dim: 2, rows };
        let svg = render(&env, &path, &log);
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("stroke=\"red\""));
        assert!(svg.contains("<polyline") && svg.contains("stroke=\"blue\""));
        assert!(svg.matches("<line").count() >= 3);
        assert_eq!(svg, render(&env, &path, &log));
    }
}
