//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use timegov::cli::{matrix_cells, run_cell, Cell, CellOutcome};
use timegov::phd::gains_from_roots;
use timegov::prediction::PredictorKind;
use timegov::scenario::Scenario;
use timegov::verify::{
    gjk_oracle_pairs, lyapunov_residual_cases, random_trials, recover_roots, separated_root_sets,
    ContainmentReport,
};

const SEED: u64 = 20_240_601;
const CELL_BUDGET_SECS: f64 = 120.0;

fn scenario(name: &str) -> Scenario {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(format!("{name}.json"));
    Scenario::load(&path).unwrap_or_else(|e| panic!("loading {}: {e}", path.display()))
}

struct Matrix {
    name: &'static str,
    cells: Vec<(CellOutcome, f64)>,
}

impl Matrix {
    fn run(name: &'static str, sc: &Scenario) -> Matrix {
        let cells = matrix_cells(&[2, 3])
            .into_iter()
            .map(|cell| {
                let start = Instant::now();
                let out = run_cell(sc, cell).unwrap_or_else(|e| panic!("{name}: {e}"));
                (out, start.elapsed().as_secs_f64())
            })
            .collect();
        Matrix { name, cells }
    }

    fn get(&self, order: usize, predictor: PredictorKind, velocity_feedback: bool) -> &CellOutcome {
        let want = Cell {
            order,
            predictor,
            velocity_feedback,
        };
        &self.cells.iter().find(|(c, _)| c.cell == want).expect("cell present").0
    }

    fn travel(&self, order: usize, predictor: PredictorKind, vel: bool) -> f64 {
        self.get(order, predictor, vel)
            .metrics
            .travel_time
            .unwrap_or(f64::INFINITY)
    }
}

struct Report {
    failures: usize,
}

impl Report {
    fn line(&mut self, id: usize, name: &str, ok: bool, detail: String) {
        if !ok {
            self.failures += 1;
        }
        println!(
            "{} criterion {id:>2} {name}: {detail}",
            if ok { "PASS" } else { "FAIL" }
        );
    }
}

const PREDICTORS: [PredictorKind; 2] = [PredictorKind::Lyapunov, PredictorKind::Vandermonde];

fn main() -> ExitCode {
    let mut report = Report { failures: 0 };

    let corridor_sc = scenario("corridor");
    let office_sc = scenario("office");
    let corridor = Matrix::run("corridor", &corridor_sc);
    let office = Matrix::run("office", &office_sc);
    let both = [&corridor, &office];

    // 1. safety
    let mut min_clear = f64::INFINITY;
    let mut min_sigma = f64::INFINITY;
    let mut slowest = 0.0f64;
    for m in both {
        for (o, secs) in &m.cells {
            for row in &o.log.rows {
                min_clear = min_clear.min(row.d_free);
                min_sigma = min_sigma.min(row.sigma);
            }
            slowest = slowest.max(*secs);
        }
    }
    report.line(
        1,
        "safety",
        min_clear > 0.0 && min_sigma >= 0.0 && slowest < CELL_BUDGET_SECS,
        format!(
            "16 cells, min d_F(p) = {min_clear:.4}, min sigma = {min_sigma:.4}, slowest cell {slowest:.1} s"
        ),
    );

    // 2. convergence
    let mut failed = Vec::new();
    let mut worst_s = 0.0f64;
    let mut worst_p = 0.0f64;
    for m in both {
        let sc = if m.name == "corridor" { &corridor_sc } else { &office_sc };
        let path = sc.build_path().expect("path");
        let goal = path.eval(path.end());
        for (o, _) in &m.cells {
            let last = o.log.rows.last().expect("nonempty log");
            let ds = path.end() - last.s;
            let dp = (last.state.position() - &goal).norm();
            worst_s = worst_s.max(ds);
            worst_p = worst_p.max(dp);
            if !(o.metrics.completed && ds <= 1e-3 && dp <= 1e-2 && last.t < 120.0) {
                failed.push(format!("{}/{}", m.name, o.cell.id()));
            }
        }
    }
    report.line(
        2,
        "convergence",
        failed.is_empty(),
        format!("max b-s(T) = {worst_s:.2e}, max |p(T)-r(b)| = {worst_p:.2e}, not completed: {failed:?}"),
    );

    // 3. predictor ordering
    let mut pairs = Vec::new();
    let mut ok = true;
    for n in [2, 3] {
        for vel in [false, true] {
            let (v, l) = (
                corridor.travel(n, PredictorKind::Vandermonde, vel),
                corridor.travel(n, PredictorKind::Lyapunov, vel),
            );
            ok &= v < l;
            pairs.push(format!("n{n}/{}: {v:.2} < {l:.2}", if vel { "vel" } else { "pos" }));
        }
    }
    report.line(3, "vandermonde faster than lyapunov (corridor)", ok, pairs.join(", "));

    // 4. feedback ordering
    let mut pairs = Vec::new();
    let mut ok = true;
    for m in both {
        for p in PREDICTORS {
            let with = m.get(2, p, true).metrics.mean_path_error;
            let without = m.get(2, p, false).metrics.mean_path_error;
            ok &= with < without;
            pairs.push(format!("{}/{}: {with:.3} < {without:.3}", m.name, p.name()));
        }
    }
    report.line(4, "velocity feedback lowers mean path error (n=2)", ok, pairs.join(", "));

    // 5. order effect
    let mut pairs = Vec::new();
    let mut ok = true;
    for p in PREDICTORS {
        for vel in [false, true] {
            let (t3, t2) = (corridor.travel(3, p, vel), corridor.travel(2, p, vel));
            ok &= t3 > t2;
            pairs.push(format!(
                "{}/{}: {t3:.2} > {t2:.2}",
                p.name(),
                if vel { "vel" } else { "pos" }
            ));
        }
    }
    report.line(5, "third order slower than second (corridor)", ok, pairs.join(", "));

    // 6. Lyapunov residuals
    let cases = lyapunov_residual_cases(5, 20, SEED).expect("lyapunov solves");
    let worst = cases.iter().map(|c| c.1).fold(0.0, f64::max);
    report.line(
        6,
        "lyapunov residual",
        cases.len() == 25 && worst <= 1e-10,
        format!("{} cases, worst residual {worst:.2e}", cases.len()),
    );

    // 7 and 8. containment and decay on the same frozen-parameter trials
    let reports: Vec<ContainmentReport> = PREDICTORS
        .iter()
        .flat_map(|&p| [2, 3].map(move |n| (p, n)))
        .map(|(p, n)| {
            random_trials(p, n, 2, 200, SEED + n as u64 + 10 * p as u64).expect("trials run")
        })
        .collect();
    let worst_margin = reports.iter().map(|r| r.worst_margin).fold(f64::INFINITY, f64::min);
    report.line(
        7,
        "containment oracle",
        worst_margin >= -1e-6 && reports.iter().all(|r| r.trials >= 200),
        format!(
            "{} trials per predictor (n=2,3, d=2), worst margin {worst_margin:.2e}",
            reports.iter().filter(|r| r.predictor == PredictorKind::Lyapunov).map(|r| r.trials).sum::<usize>()
        ),
    );
    let decay = |kind: PredictorKind| {
        reports
            .iter()
            .filter(|r| r.predictor == kind)
            .map(|r| r.worst_decay)
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let (lyap, vand) = (decay(PredictorKind::Lyapunov), decay(PredictorKind::Vandermonde));
    report.line(
        8,
        "radius decay",
        lyap <= 1e-9 && vand <= 1e-3,
        format!("max lyapunov norm increase {lyap:.2e}, max vandermonde final radius {vand:.2e}"),
    );

    // 9. GJK against brute force
    let delta = 1e-3;
    let pairs = gjk_oracle_pairs(100, delta, SEED).expect("distances");
    let worst = pairs.iter().map(|(g, b)| (g - b).abs()).fold(0.0, f64::max);
    let overlaps = pairs.iter().filter(|(g, _)| *g == 0.0).count();
    report.line(
        9,
        "gjk vs brute force",
        pairs.len() == 100 && worst <= delta,
        format!("100 pairs ({overlaps} overlapping), worst discrepancy {worst:.2e} (bound {delta:.0e})"),
    );

    // 10. gains round trip
    let mut worst = 0.0f64;
    let sets = separated_root_sets(50, 5, 0.25, SEED);
    for roots in &sets {
        let rec = recover_roots(&gains_from_roots(roots).expect("gains")).expect("roots");
        for (a, b) in roots.iter().zip(&rec) {
            worst = worst.max((a - b).abs());
        }
    }
    report.line(
        10,
        "gains round trip",
        sets.len() == 50 && worst <= 1e-9,
        format!("50 root sets, n <= 5, worst root error {worst:.2e}"),
    );

    // 11. step halving
    let mut worst = 0.0f64;
    let mut halved_sc = corridor_sc.clone();
    halved_sc.sim.dt /= 2.0;
    for (o, _) in &corridor.cells {
        let half = run_cell(&halved_sc, o.cell).expect("halved run");
        let (t1, t2) = (
            o.metrics.travel_time.unwrap_or(f64::NAN),
            half.metrics.travel_time.unwrap_or(f64::NAN),
        );
        let rel = ((t2 - t1) / t1).abs();
        worst = if rel.is_nan() { f64::INFINITY } else { worst.max(rel) };
    }
    report.line(
        11,
        "integration convergence",
        worst < 0.01,
        format!("8 corridor cells, worst relative travel-time change {:.4}%", 100.0 * worst),
    );

    println!(
        "acceptance: {} of 11 criteria passed",
        11 - report.failures
    );
    if report.failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
