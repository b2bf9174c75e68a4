//! Subcommands. Each returns the process exit status.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use rayon::prelude::*;
use tracbf_core::certify::{self, ConditionReport, EffortMetrics};
use tracbf_core::controllers::ControllerKind;
use tracbf_core::scenario::{PlantKind, ScenarioConfig};
use tracbf_core::sim::RunOutput;

use crate::config;
use crate::error::{CliError, Result};
use crate::output::{self, fmt_f64};
use crate::presets;

pub const EXIT_OK: u8 = 0;
/// A monitor failed, or a comparison did not show the expected ordering.
pub const EXIT_MONITOR: u8 = 1;
pub const EXIT_GATE: u8 = 2;
pub const EXIT_DIVERGED: u8 = 3;

/// Reads a scenario from a file, or from a preset when no such file exists.
pub fn load(arg: &str) -> Result<ScenarioConfig> {
    let path = Path::new(arg);
    let sc = if path.exists() {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        config::parse(&text, arg)?
    } else if let Some(text) = presets::preset(arg) {
        config::parse(text, arg)?
    } else {
        let known: Vec<_> = presets::names().collect();
        return Err(CliError::Usage(format!("`{arg}` is neither a file nor a preset ({})", known.join(", "))));
    };
    sc.validate()?;
    Ok(sc)
}

fn section(out: &mut String, title: &str, body: &str) {
    let _ = writeln!(out, "# {title}");
    out.push_str(body);
}

fn status_word(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

/// Result of running one scenario through gate, integration and monitors.
pub struct Evaluation {
    pub gate: ConditionReport,
    /// `None` when the gate failed and the run was not forced.
    pub run: Option<RunOutput>,
    pub monitors: Option<ConditionReport>,
    pub metrics: Option<EffortMetrics>,
}

impl Evaluation {
    pub fn exit_code(&self, forced: bool) -> u8 {
        if !self.gate.passed() && !forced {
            return EXIT_GATE;
        }
        match (&self.run, &self.monitors) {
            (Some(r), _) if r.error.is_some() => EXIT_DIVERGED,
            (Some(_), Some(m)) if m.passed() && (self.gate.passed() || forced) => EXIT_OK,
            _ => EXIT_MONITOR,
        }
    }

    pub fn report(&self) -> String {
        let mut out = String::new();
        section(&mut out, "conditions", &self.gate.to_string());
        if let Some(e) = self.run.as_ref().and_then(|r| r.error.as_ref()) {
            section(&mut out, "run", &format!("error {e}\n"));
        }
        if let Some(m) = &self.monitors {
            section(&mut out, "monitors", &m.to_string());
        }
        if let Some(m) = &self.metrics {
            section(&mut out, "metrics", &output::metrics_lines(m));
        }
        out
    }
}

pub fn evaluate(sc: &ScenarioConfig, force: bool) -> Result<Evaluation> {
    let gate = sc.check_conditions()?;
    if !gate.passed() && !force {
        return Ok(Evaluation { gate, run: None, monitors: None, metrics: None });
    }
    let run = sc.run()?;
    let (monitors, metrics) = if run.error.is_none() {
        (Some(sc.monitor(&run)?), Some(certify::effort_metrics(&run.trace)))
    } else {
        (None, None)
    };
    Ok(Evaluation { gate, run: Some(run), monitors, metrics })
}

pub fn cmd_check(sc: &ScenarioConfig, stdout: &mut impl Write) -> Result<u8> {
    let gate = sc.check_conditions()?;
    write!(stdout, "{gate}").map_err(stdout_err)?;
    Ok(if gate.passed() { EXIT_OK } else { EXIT_GATE })
}

pub fn cmd_run(sc: &ScenarioConfig, out_dir: &Path, force: bool, stdout: &mut impl Write) -> Result<u8> {
    let ev = evaluate(sc, force)?;
    output::create_dir(out_dir)?;
    let report = ev.report();
    output::write_text(&out_dir.join("report.txt"), &report)?;
    let code = ev.exit_code(force);
    match &ev.run {
        None => {
            write!(stdout, "{report}").map_err(stdout_err)?;
            writeln!(stdout, "{}: condition gate failed, not run", sc.name).map_err(stdout_err)?;
        }
        Some(run) => {
            output::write_trace(&out_dir.join("trace.csv"), sc.plant, &run.trace)?;
            let line = match (&run.error, &ev.metrics) {
                (Some(e), _) => format!("{}: stopped at t = {}: {e}", sc.name, run.summary.final_time),
                (None, Some(m)) => output::summary_line(&sc.name, status_word(code == EXIT_OK), &run.summary, m),
                (None, None) => unreachable!("metrics are computed for every completed run"),
            };
            writeln!(stdout, "{line}").map_err(stdout_err)?;
        }
    }
    Ok(code)
}

/// Runs the scenario under RaCBF and T-RaCBF with identical hyperparameters.
pub fn cmd_compare(sc: &ScenarioConfig, out_dir: &Path, stdout: &mut impl Write) -> Result<u8> {
    if sc.plant != PlantKind::DoubleIntegrator {
        return Err(CliError::Usage(format!("compare needs a double_integrator scenario, got {}", sc.plant.name())));
    }
    let variants: Vec<ScenarioConfig> = [ControllerKind::Racbf, ControllerKind::Tracbf]
        .into_iter()
        .map(|k| ScenarioConfig { controller: k, ..sc.clone() })
        .collect();
    let gates = variants.iter().map(|v| v.check_conditions()).collect::<tracbf_core::Result<Vec<_>>>()?;
    output::create_dir(out_dir)?;
    if gates.iter().any(|g| !g.passed()) {
        let mut text = String::new();
        for (v, g) in variants.iter().zip(&gates) {
            section(&mut text, &format!("conditions {}", v.controller.name()), &g.to_string());
        }
        output::write_text(&out_dir.join("compare.txt"), &text)?;
        write!(stdout, "{text}").map_err(stdout_err)?;
        return Ok(EXIT_GATE);
    }
    let evals = variants.par_iter().map(|v| evaluate(v, false)).collect::<Result<Vec<_>>>()?;

    let mut text = String::new();
    let mut code = EXIT_OK;
    for (v, ev) in variants.iter().zip(&evals) {
        let run = ev.run.as_ref().expect("gate passed");
        output::write_trace(&out_dir.join(format!("trace_{}.csv", v.controller.name())), sc.plant, &run.trace)?;
        section(&mut text, &format!("report {}", v.controller.name()), &ev.report());
        code = code.max(ev.exit_code(false));
    }
    if code == EXIT_OK {
        let (ra, tr) = (evals[0].metrics.unwrap(), evals[1].metrics.unwrap());
        let mut table = format!("metric {} {}\n", variants[0].controller.name(), variants[1].controller.name());
        for (name, a, b) in [
            ("l2_effort", ra.l2_effort, tr.l2_effort),
            ("max_abs_u", ra.max_abs_u, tr.max_abs_u),
            ("smoothness", ra.smoothness, tr.smoothness),
        ] {
            let _ = writeln!(table, "{name} {} {}", fmt_f64(a), fmt_f64(b));
        }
        let ordered = tr.l2_effort < ra.l2_effort;
        let _ = writeln!(
            table,
            "effort_ordering {:.10} < {:.10} {}",
            tr.l2_effort,
            ra.l2_effort,
            status_word(ordered)
        );
        section(&mut text, "comparison", &table);
        if !ordered {
            code = EXIT_MONITOR;
        }
        write!(stdout, "{table}").map_err(stdout_err)?;
    }
    output::write_text(&out_dir.join("compare.txt"), &text)?;
    writeln!(stdout, "{}: compare {}", sc.name, status_word(code == EXIT_OK)).map_err(stdout_err)?;
    Ok(code)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    Beta,
    Gamma,
    K,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            Self::Beta => "beta",
            Self::Gamma => "gamma",
            Self::K => "K",
        }
    }

    pub fn apply(self, sc: &mut ScenarioConfig, v: f64) {
        match self {
            Self::Beta => sc.gains.beta = v,
            Self::Gamma => sc.gains.gamma.iter_mut().for_each(|g| *g = v),
            Self::K => sc.gains.k.iter_mut().for_each(|k| *k = v),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub metrics: Option<(f64, EffortMetrics)>,
    /// `pass`, `fail`, `gate_failed`, `diverged` or `invalid`.
    pub status: &'static str,
}

fn sweep_row(sc: &ScenarioConfig, out_dir: &Path, index: usize, value: f64) -> Result<SweepRow> {
    let row = |metrics, status| SweepRow { value, metrics, status };
    if sc.validate().is_err() {
        return Ok(row(None, "invalid"));
    }
    let ev = evaluate(sc, false)?;
    let Some(run) = &ev.run else {
        return Ok(row(None, "gate_failed"));
    };
    output::write_trace(&out_dir.join(format!("trace_{index:03}.csv")), sc.plant, &run.trace)?;
    let status = match ev.exit_code(false) {
        EXIT_OK => "pass",
        EXIT_DIVERGED => "diverged",
        _ => "fail",
    };
    Ok(row(ev.metrics.map(|m| (run.summary.min_h, m)), status))
}

pub fn run_sweep(sc: &ScenarioConfig, param: SweepParam, values: &[f64], out_dir: &Path) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(CliError::Usage("--values must list at least one value".into()));
    }
    if param == SweepParam::K && sc.plant != PlantKind::TwoLink {
        return Err(CliError::Usage("K applies to two_link scenarios only".into()));
    }
    output::create_dir(out_dir)?;
    values
        .par_iter()
        .enumerate()
        .map(|(i, &v)| {
            let mut s = sc.clone();
            param.apply(&mut s, v);
            sweep_row(&s, out_dir, i, v)
        })
        .collect()
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("value,min_h,l2_effort,smoothness,pass\n");
    for r in rows {
        let nums = match &r.metrics {
            Some((min_h, m)) => format!("{},{},{}", fmt_f64(*min_h), fmt_f64(m.l2_effort), fmt_f64(m.smoothness)),
            None => ",,".to_string(),
        };
        let _ = writeln!(out, "{},{nums},{}", fmt_f64(r.value), r.status);
    }
    out
}

pub fn cmd_sweep(
    sc: &ScenarioConfig,
    param: SweepParam,
    values: &[f64],
    out_dir: &Path,
    stdout: &mut impl Write,
) -> Result<u8> {
    let rows = run_sweep(sc, param, values, out_dir)?;
    let csv = sweep_csv(&rows);
    output::write_text(&out_dir.join("sweep.csv"), &csv)?;
    write!(stdout, "{csv}").map_err(stdout_err)?;
    Ok(if rows.iter().all(|r| r.status == "pass") { EXIT_OK } else { EXIT_MONITOR })
}

fn stdout_err(e: io::Error) -> CliError {
    CliError::io("<stdout>", e)
}
