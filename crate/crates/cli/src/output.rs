//! trace.csv, report.txt and sweep.csv writers.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use tracbf_core::certify::EffortMetrics;
use tracbf_core::scenario::PlantKind;
use tracbf_core::sim::Summary;
use tracbf_core::types::{Certificate, TraceRecord};

use crate::error::{CliError, Result};

/// 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn trace_header(plant: PlantKind, trace: &[TraceRecord]) -> Vec<String> {
    let (m, p) = trace.first().map_or((0, 0), |r| (r.u.len(), r.nu.len()));
    let mut cols = vec!["t".to_string()];
    match plant {
        PlantKind::DoubleIntegrator => {
            let n = trace.first().map_or(0, |r| r.x.len());
            cols.extend((1..=n).map(|i| format!("x_{i}")));
        }
        PlantKind::TwoLink => {
            cols.extend(["q_1", "q_2", "qd_1", "qd_2"].map(String::from));
        }
    }
    cols.extend((1..=m).map(|i| format!("u_{i}")));
    cols.extend((1..=p).map(|i| format!("nu_{i}")));
    cols.extend((1..=p).map(|i| format!("theta_hat_{i}")));
    cols.push("h".into());
    match plant {
        PlantKind::DoubleIntegrator => cols.push("h_a".into()),
        PlantKind::TwoLink => cols.extend(["V", "B", "s_1", "s_2"].map(String::from)),
    }
    cols.push("constraint_margin".into());
    cols
}

fn record_row(r: &TraceRecord) -> Vec<f64> {
    let mut row = vec![r.t];
    row.extend_from_slice(&r.x);
    row.extend_from_slice(&r.u);
    row.extend_from_slice(&r.nu);
    row.extend_from_slice(&r.theta_hat);
    row.push(r.h);
    match &r.certificate {
        Certificate::Affine { h_a } => row.push(*h_a),
        Certificate::Robot { v, b, s } => {
            row.push(*v);
            row.push(*b);
            row.extend_from_slice(s);
        }
    }
    row.push(r.constraint_margin);
    row
}

pub fn write_trace(path: &Path, plant: PlantKind, trace: &[TraceRecord]) -> Result<()> {
    let io = |e| CliError::io(path, e);
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    writeln!(w, "{}", trace_header(plant, trace).join(",")).map_err(io)?;
    for r in trace {
        let row: Vec<String> = record_row(r).into_iter().map(fmt_f64).collect();
        writeln!(w, "{}", row.join(",")).map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| CliError::io(path, e))
}

pub fn metrics_lines(m: &EffortMetrics) -> String {
    format!(
        "l2_effort {}\nmax_abs_u {}\nsmoothness {}\n",
        fmt_f64(m.l2_effort),
        fmt_f64(m.max_abs_u),
        fmt_f64(m.smoothness)
    )
}

pub fn summary_line(name: &str, status: &str, s: &Summary, m: &EffortMetrics) -> String {
    format!(
        "{name}: {status} records={} t_end={} min_h={:.6e} min_certificate={:.6e} max_abs_position={:.6} \
         max_u_norm={:.6e} l2_effort={:.6e} smoothness={:.6e}",
        s.records, s.final_time, s.min_h, s.min_certificate, s.max_abs_position, s.max_u_norm, m.l2_effort, m.smoothness
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, std::f64::consts::PI, 1e22] {
            let s = fmt_f64(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
            let mantissa = s.split('e').next().unwrap().trim_start_matches('-');
            assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17);
        }
    }

    #[test]
    fn header_matches_row_width() {
        let r = TraceRecord {
            t: 0.0,
            x: vec![0.0; 4],
            u: vec![0.0; 2],
            nu: vec![0.0; 3],
            theta_hat: vec![0.0; 3],
            h: 0.0,
            certificate: Certificate::Robot { v: 0.0, b: 0.0, s: vec![0.0; 2] },
            constraint_margin: 0.0,
        };
        let h = trace_header(PlantKind::TwoLink, std::slice::from_ref(&r));
        assert_eq!(h.len(), record_row(&r).len());
        assert_eq!(h[1..5], ["q_1", "q_2", "qd_1", "qd_2"]);
        assert_eq!(h.last().unwrap(), "constraint_margin");
    }
}
