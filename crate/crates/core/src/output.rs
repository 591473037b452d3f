//! CSV and JSON emission for simulation logs and metrics.

use std::io::Write;

use crate::error::Result;
use crate::simulator::{Metrics, SimLog};

fn axis(i: usize) -> String {
    match i {
        0 => "x".into(),
        1 => "y".into(),
        2 => "z".into(),
        _ => format!("c{i}"),
    }
}

/// `t,s,sdot,p0_x,p0_y,…,sigma,dF,radius,path_error`.
pub fn csv_header(order: usize, dim: usize) -> String {
    let mut cols: Vec<String> = vec!["t".into(), "s".into(), "sdot".into()];
    for k in 0..order {
        for i in 0..dim {
            cols.push(format!("p{k}_{}", axis(i)));
        }
    }
    cols.extend(["sigma", "dF", "radius", "path_error"].map(String::from));
    cols.join(",")
}

/// Writes the log as CSV with 17 significant digits per value.
pub fn write_csv(log: &SimLog, out: &mut impl Write) -> Result<()> {
    writeln!(out, "{}", csv_header(log.order, log.dim))?;
    let mut line = String::new();
    for row in &log.rows {
        line.clear();
        let values = [row.t, row.s, row.sdot]
            .into_iter()
            .chain(row.state.as_flat().iter().copied())
            .chain([row.sigma, row.d_free, row.radius, row.path_error]);
        for (i, v) in values.enumerate() {
            if i > 0 {
                line.push(',');
            }
            line.push_str(&format!("{v:.16e}"));
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn metrics_json(metrics: &Metrics) -> String {
    serde_json::to_string_pretty(metrics).expect("metrics serialize")
}
