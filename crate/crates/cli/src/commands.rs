//! Subcommand implementations. Each returns a [`Report`] and the process exit code.

use std::collections::BTreeMap;
use std::time::Instant;

use qaction_core::oracles::{analytic_for, numerov_eigenvalue, wkb_eigenvalue, NumerovOptions, TableFixture};
use qaction_core::quantize::{solve_eigenvalue, solve_spectrum, Eigensolution, Engine, Problem};
use qaction_core::Error;
use rayon::prelude::*;

use crate::config::{OracleChoice, Overrides, RunConfig};
use crate::report::{ActionRow, Body, CompareRow, LevelRow, Report, WaveRow};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_PARTIAL: i32 = 2;

pub struct Outcome {
    pub report: Report,
    pub exit: i32,
}

fn diagnostics(s: &Eigensolution) -> String {
    let d = &s.diagnostics;
    let layers = d.layer_counts.iter().map(|n| n.to_string()).collect::<Vec<_>>().join("/");
    let mut out = format!(
        "residual={:.2e};layers={};h_corr={:.2e};eps_corr={:.2e}",
        d.action_residual,
        if layers.is_empty() { "-".into() } else { layers },
        d.h_correction,
        d.epsilon_correction
    );
    for note in &d.notes {
        out.push(';');
        out.push_str(note);
    }
    out
}

fn error_row(n: usize, engine: Engine, e: &Error) -> LevelRow {
    let mut row = LevelRow::new(n, engine.name(), None, None);
    row.status = "error".into();
    row.diagnostics = e.to_string();
    row
}

/// Levels `n_min..=n_max` from every configured engine, unsorted oracle-free rows.
fn present_rows(cfg: &RunConfig, timings: &mut BTreeMap<String, f64>) -> Vec<LevelRow> {
    let mut rows = Vec::new();
    for engine in cfg.engine.engines() {
        let t = Instant::now();
        match solve_spectrum(&cfg.potential, cfg.n_max, &cfg.solver_for(engine)) {
            Ok(spectrum) => {
                for s in spectrum.levels.iter().filter(|s| s.n >= cfg.n_min) {
                    let mut row = LevelRow::new(s.n, engine.name(), Some(s.energy), None);
                    row.delta = Some(s.delta);
                    row.node_count = Some(s.node_count);
                    row.status = "ok".into();
                    row.diagnostics = diagnostics(s);
                    rows.push(row);
                }
                for (n, e) in spectrum.failures.iter().filter(|(n, _)| *n >= cfg.n_min) {
                    rows.push(error_row(*n, engine, e));
                }
            }
            Err(e) => rows.extend((cfg.n_min..=cfg.n_max).map(|n| error_row(n, engine, &e))),
        }
        timings.insert(engine.name().into(), t.elapsed().as_secs_f64());
    }
    rows.sort_by(|a, b| (a.n, &a.engine).cmp(&(b.n, &b.engine)));
    rows
}

fn oracle_value(cfg: &RunConfig, n: usize) -> (Option<f64>, &'static str) {
    let analytic = || analytic_for(&cfg.potential, n).ok();
    let numerov = || numerov_eigenvalue(&cfg.potential, n, &NumerovOptions::default()).ok();
    match cfg.oracle {
        OracleChoice::None => (None, "none"),
        OracleChoice::Analytic => (analytic(), "analytic"),
        OracleChoice::Numerov => (numerov(), "numerov"),
        OracleChoice::Auto => match analytic() {
            Some(e) => (Some(e), "analytic"),
            None => (numerov(), "numerov"),
        },
    }
}

fn attach_oracle(rows: &mut [LevelRow], oracle: &BTreeMap<usize, Option<f64>>) {
    for row in rows {
        let present = row.e_present;
        let fresh = LevelRow::new(row.n, &row.engine, present, oracle.get(&row.n).copied().flatten());
        row.e_oracle = fresh.e_oracle;
        row.abs_diff = fresh.abs_diff;
    }
}

fn engine_spread(rows: &[LevelRow]) -> Option<f64> {
    let mut by_n: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for r in rows {
        if let Some(e) = r.e_present {
            by_n.entry(r.n).or_default().push(e);
        }
    }
    by_n.values()
        .filter(|v| v.len() > 1)
        .map(|v| v.iter().cloned().fold(f64::MIN, f64::max) - v.iter().cloned().fold(f64::MAX, f64::min))
        .reduce(f64::max)
}

pub fn cmd_solve(cfg: &RunConfig) -> Outcome {
    let start = Instant::now();
    let mut timings = BTreeMap::new();
    let mut rows = present_rows(cfg, &mut timings);

    let t = Instant::now();
    let oracle: Vec<(usize, (Option<f64>, &str))> =
        (cfg.n_min..=cfg.n_max).into_par_iter().map(|n| (n, oracle_value(cfg, n))).collect();
    timings.insert("oracle".into(), t.elapsed().as_secs_f64());
    let mut sources: Vec<&str> = oracle.iter().filter(|(_, (v, _))| v.is_some()).map(|(_, (_, s))| *s).collect();
    sources.dedup();
    let values: BTreeMap<usize, Option<f64>> = oracle.iter().map(|(n, (v, _))| (*n, *v)).collect();
    attach_oracle(&mut rows, &values);

    let ok = rows.iter().filter(|r| r.status == "ok").count();
    let mut report = Report::new("solve", cfg.echo(), Body::Levels(Vec::new()));
    let summary = &mut report.metadata.summary;
    summary.insert("levels_ok".into(), format!("{ok}/{}", rows.len()));
    summary.insert("oracle_source".into(), if sources.is_empty() { "none".into() } else { sources.join("+") });
    if let Some(max) = rows.iter().filter_map(|r| r.abs_diff).reduce(f64::max) {
        summary.insert("max_abs_diff".into(), format!("{max:.3e}"));
    }
    if let Some(spread) = engine_spread(&rows) {
        summary.insert("max_engine_spread".into(), format!("{spread:.3e}"));
    }
    timings.insert("total".into(), start.elapsed().as_secs_f64());
    report.metadata.timings = timings;
    let exit = if ok == rows.len() { EXIT_OK } else { EXIT_PARTIAL };
    report.body = Body::Levels(rows);
    Outcome { report, exit }
}

fn strictly_increasing(points: &[(f64, f64)]) -> bool {
    points.windows(2).all(|w| w[1].1 > w[0].1)
}

pub fn cmd_scan(cfg: &RunConfig, grid: &[f64]) -> Outcome {
    let start = Instant::now();
    let mut energies = grid.to_vec();
    energies.sort_by(|a, b| a.total_cmp(b));
    let mut rows = Vec::new();
    let mut report = Report::new("scan", cfg.echo(), Body::Actions(Vec::new()));
    let mut all_good = true;
    for engine in cfg.engine.engines() {
        let problem = Problem::new(&cfg.potential, cfg.solver_for(engine));
        let values: Vec<Result<f64, Error>> = energies.par_iter().map(|&e| problem.action(e)).collect();
        let mut good = Vec::new();
        for (&e, v) in energies.iter().zip(values) {
            let (action, status) = match v {
                Ok(j) => {
                    good.push((e, j));
                    (Some(j), "ok".to_string())
                }
                Err(err) => (None, format!("error: {err}")),
            };
            rows.push(ActionRow { energy: e, engine: engine.name().into(), action, status });
        }
        let monotone = strictly_increasing(&good);
        let failed = energies.len() - good.len();
        all_good &= monotone && failed == 0;
        let summary = &mut report.metadata.summary;
        summary.insert(format!("monotone.{}", engine.name()), monotone.to_string());
        summary.insert(format!("failed_points.{}", engine.name()), failed.to_string());
    }
    report.metadata.timings.insert("total".into(), start.elapsed().as_secs_f64());
    report.body = Body::Actions(rows);
    Outcome { report, exit: if all_good { EXIT_OK } else { EXIT_PARTIAL } }
}

pub fn cmd_wavefunction(cfg: &RunConfig) -> Outcome {
    let start = Instant::now();
    let n = cfg.wavefunction_n.unwrap_or(cfg.n_min);
    let engine = cfg.engine.engines()[0];
    let mut opts = cfg.solver_for(engine);
    opts.wavefunction_samples = cfg.wavefunction_samples;
    let mut report = Report::new("wavefunction", cfg.echo(), Body::Wavefunction(Vec::new()));
    let summary = &mut report.metadata.summary;
    summary.insert("n".into(), n.to_string());
    let exit = match solve_eigenvalue(&cfg.potential, n, &opts) {
        Ok(s) => {
            let table = s.wavefunction.expect("samples requested");
            summary.insert("energy".into(), crate::report::real(s.energy));
            summary.insert("node_count".into(), table.node_count.to_string());
            let norm: f64 = table
                .x
                .windows(2)
                .zip(table.psi.windows(2))
                .map(|(x, p)| 0.5 * (x[1] - x[0]) * (p[0] * p[0] + p[1] * p[1]))
                .sum();
            summary.insert("norm_trapezoid".into(), format!("{norm:.6}"));
            report.body =
                Body::Wavefunction(table.x.iter().zip(&table.psi).map(|(&x, &psi)| WaveRow { x, psi }).collect());
            EXIT_OK
        }
        Err(e) => {
            summary.insert("error".into(), e.to_string());
            EXIT_PARTIAL
        }
    };
    report.metadata.timings.insert("total".into(), start.elapsed().as_secs_f64());
    Outcome { report, exit }
}

pub fn cmd_compare(cfg: &RunConfig) -> Outcome {
    let start = Instant::now();
    let engine = cfg.engine.engines()[0];
    let present: BTreeMap<usize, Result<f64, String>> = match solve_spectrum(&cfg.potential, cfg.n_max, &cfg.solver_for(engine)) {
        Ok(s) => s
            .levels
            .iter()
            .map(|l| (l.n, Ok(l.energy)))
            .chain(s.failures.iter().map(|(n, e)| (*n, Err(e.to_string()))))
            .collect(),
        Err(e) => (0..=cfg.n_max).map(|n| (n, Err(e.to_string()))).collect(),
    };
    let radial = cfg.potential.angular_momentum().is_some();
    let rows: Vec<CompareRow> = (cfg.n_min..=cfg.n_max)
        .into_par_iter()
        .map(|n| {
            let e_present = present.get(&n).and_then(|r| r.as_ref().ok().copied());
            let e_exact = analytic_for(&cfg.potential, n).ok();
            let e_wkb = wkb_eigenvalue(&cfg.potential, n, false).ok();
            let e_langer = if radial { wkb_eigenvalue(&cfg.potential, n, true).ok() } else { None };
            let reference = e_exact.or(e_present);
            let err = |v: Option<f64>| match (v, reference) {
                (Some(a), Some(b)) => Some((a - b).abs()),
                _ => None,
            };
            let status = match present.get(&n) {
                Some(Err(msg)) => format!("error: {msg}"),
                _ => "ok".into(),
            };
            CompareRow {
                n,
                e_present,
                e_exact,
                e_wkb,
                e_langer,
                err_present: if e_exact.is_some() { err(e_present) } else { None },
                err_wkb: err(e_wkb),
                err_langer: err(e_langer),
                status,
            }
        })
        .collect();
    let exit = if rows.iter().all(|r| r.status == "ok") { EXIT_OK } else { EXIT_PARTIAL };
    let mut report = Report::new("compare", cfg.echo(), Body::Comparison(rows));
    report.metadata.summary.insert("engine".into(), engine.name().into());
    report.metadata.timings.insert("total".into(), start.elapsed().as_secs_f64());
    Outcome { report, exit }
}

/// `5e-8` for a value printed with eight decimals, `5e-6` for six.
fn printed_tolerance(value: &str) -> f64 {
    let decimals = value.split_once('.').map(|(_, f)| f.trim().len()).unwrap_or(0) as i32;
    format!("5e-{decimals}").parse().unwrap()
}

/// Recomputes a fixture table. `Err` carries a message for exit code 1.
pub fn cmd_bench(table: &str, overrides: &Overrides) -> Result<Outcome, String> {
    let start = Instant::now();
    let fixture = TableFixture::load(table, None).map_err(|e| e.to_string())?;
    let (name, params) = fixture.potential_spec().map_err(|e| e.to_string())?;
    let n_min = fixture.rows.iter().map(|r| r.n).min().unwrap_or(0);
    let n_max = fixture.rows.iter().map(|r| r.n).max().unwrap_or(0);
    let mut cfg = RunConfig::for_builtin(&name, &params, n_min, n_max).map_err(|e| e.to_string())?;
    cfg.apply_overrides(overrides).map_err(|e| e.to_string())?;

    let mut timings = BTreeMap::new();
    let mut rows = present_rows(&cfg, &mut timings);
    let reference: BTreeMap<usize, &qaction_core::oracles::FixtureRow> = fixture.rows.iter().map(|r| (r.n, r)).collect();
    let mut passed = 0;
    let mut tolerance = 0.0f64;
    for row in &mut rows {
        let Some(fx) = reference.get(&row.n) else { continue };
        let tol = printed_tolerance(&fx.e_present);
        tolerance = tolerance.max(tol);
        let fresh = LevelRow::new(row.n, &row.engine, row.e_present, Some(fx.present()));
        row.e_oracle = fresh.e_oracle;
        row.abs_diff = fresh.abs_diff;
        let pass = row.abs_diff.is_some_and(|d| d <= tol);
        if pass {
            passed += 1;
        }
        let note = if fx.anomaly { format!(";{} column anomaly in source table", fx.third_label) } else { String::new() };
        row.diagnostics = format!("{}{}", row.diagnostics, note);
        row.status = if pass { "pass".into() } else if row.status == "ok" { "fail".into() } else { row.status.clone() };
    }
    let total = rows.len();
    let mut echo = cfg.echo();
    echo.insert("table".into(), table.into());
    let mut report = Report::new("bench", echo, Body::Levels(rows));
    let s = &mut report.metadata.summary;
    s.insert("passed".into(), format!("{passed}/{total}"));
    s.insert("tolerance".into(), format!("{tolerance:e}"));
    s.insert("reference".into(), "E_present".into());
    timings.insert("total".into(), start.elapsed().as_secs_f64());
    report.metadata.timings = timings;
    Ok(Outcome { report, exit: if passed == total && total > 0 { EXIT_OK } else { EXIT_PARTIAL } })
}
