//! Report model and its CSV / JSON / table renderings.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

/// Tag written as the first CSV row; bump when columns change.
pub const SCHEMA: &str = "qaction-report/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelRow {
    pub n: usize,
    pub engine: String,
    pub e_present: Option<f64>,
    pub e_oracle: Option<f64>,
    /// `|e_present - e_oracle|`
    pub abs_diff: Option<f64>,
    pub delta: Option<f64>,
    pub node_count: Option<usize>,
    pub status: String,
    pub diagnostics: String,
}

impl LevelRow {
    pub fn new(n: usize, engine: &str, e_present: Option<f64>, e_oracle: Option<f64>) -> Self {
        let abs_diff = match (e_present, e_oracle) {
            (Some(a), Some(b)) => Some((a - b).abs()),
            _ => None,
        };
        Self {
            n,
            engine: engine.to_string(),
            e_present,
            e_oracle,
            abs_diff,
            delta: None,
            node_count: None,
            status: String::new(),
            diagnostics: String::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionRow {
    pub energy: f64,
    pub engine: String,
    pub action: Option<f64>,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveRow {
    pub x: f64,
    pub psi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub n: usize,
    pub e_present: Option<f64>,
    pub e_exact: Option<f64>,
    pub e_wkb: Option<f64>,
    pub e_langer: Option<f64>,
    /// Errors against `e_exact`, or against `e_present` when there is no closed form.
    pub err_present: Option<f64>,
    pub err_wkb: Option<f64>,
    pub err_langer: Option<f64>,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "rows", rename_all = "snake_case")]
pub enum Body {
    Levels(Vec<LevelRow>),
    Actions(Vec<ActionRow>),
    Wavefunction(Vec<WaveRow>),
    Comparison(Vec<CompareRow>),
}

impl Body {
    fn kind(&self) -> &'static str {
        match self {
            Body::Levels(_) => "levels",
            Body::Actions(_) => "actions",
            Body::Wavefunction(_) => "wavefunction",
            Body::Comparison(_) => "comparison",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub schema: String,
    pub command: String,
    pub version: String,
    pub config: BTreeMap<String, String>,
    pub summary: BTreeMap<String, String>,
    /// Wall-clock seconds; left out of the CSV so that it stays reproducible.
    pub timings: BTreeMap<String, f64>,
}

impl Metadata {
    pub fn new(command: &str, config: BTreeMap<String, String>) -> Self {
        Self {
            schema: SCHEMA.into(),
            command: command.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config,
            summary: BTreeMap::new(),
            timings: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub metadata: Metadata,
    pub body: Body,
}

/// 17 significant digits.
pub fn real(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt_real(v: Option<f64>) -> String {
    v.map(real).unwrap_or_default()
}

fn opt_int(v: Option<usize>) -> String {
    v.map(|n| n.to_string()).unwrap_or_default()
}

impl Report {
    pub fn new(command: &str, config: BTreeMap<String, String>, body: Body) -> Self {
        Self { metadata: Metadata::new(command, config), body }
    }

    fn columns(&self) -> (Vec<&'static str>, Vec<Vec<String>>) {
        match &self.body {
            Body::Levels(rows) => (
                vec!["n", "engine", "E_present", "E_oracle", "abs_diff", "delta", "node_count", "status", "diagnostics"],
                rows.iter()
                    .map(|r| {
                        vec![
                            r.n.to_string(),
                            r.engine.clone(),
                            opt_real(r.e_present),
                            opt_real(r.e_oracle),
                            opt_real(r.abs_diff),
                            opt_real(r.delta),
                            opt_int(r.node_count),
                            r.status.clone(),
                            r.diagnostics.clone(),
                        ]
                    })
                    .collect(),
            ),
            Body::Actions(rows) => (
                vec!["E", "engine", "J", "status"],
                rows.iter()
                    .map(|r| vec![real(r.energy), r.engine.clone(), opt_real(r.action), r.status.clone()])
                    .collect(),
            ),
            Body::Wavefunction(rows) => {
                (vec!["x", "psi"], rows.iter().map(|r| vec![real(r.x), real(r.psi)]).collect())
            }
            Body::Comparison(rows) => (
                vec!["n", "E_present", "E_exact", "E_wkb", "E_langer", "err_present", "err_wkb", "err_langer", "status"],
                rows.iter()
                    .map(|r| {
                        vec![
                            r.n.to_string(),
                            opt_real(r.e_present),
                            opt_real(r.e_exact),
                            opt_real(r.e_wkb),
                            opt_real(r.e_langer),
                            opt_real(r.err_present),
                            opt_real(r.err_wkb),
                            opt_real(r.err_langer),
                            r.status.clone(),
                        ]
                    })
                    .collect(),
            ),
        }
    }

    /// Schema tag row, `#`-prefixed config and summary lines, then the table.
    /// Timings are not written.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let m = &self.metadata;
        let _ = writeln!(out, "# {} kind={} command={} version={}", m.schema, self.body.kind(), m.command, m.version);
        for (k, v) in &m.config {
            let _ = writeln!(out, "# config {k}={v}");
        }
        for (k, v) in &m.summary {
            let _ = writeln!(out, "# summary {k}={v}");
        }
        let (header, rows) = self.columns();
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&header).expect("in-memory write");
        for r in rows {
            w.write_record(&r).expect("in-memory write");
        }
        out.push_str(&String::from_utf8(w.into_inner().expect("flush")).expect("utf-8"));
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    /// Aligned, human-oriented text.
    pub fn to_table(&self) -> String {
        let (header, rows) = self.columns();
        let short = |s: &str| -> String {
            match s.parse::<f64>() {
                Ok(v) if s.contains('e') => {
                    let t = format!("{v:.10}");
                    let t = t.trim_end_matches('0').trim_end_matches('.');
                    if t == "-0" { "0".into() } else { t.to_string() }
                }
                _ => s.to_string(),
            }
        };
        let cells: Vec<Vec<String>> = rows.iter().map(|r| r.iter().map(|c| short(c)).collect()).collect();
        let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
        for r in &cells {
            for (w, c) in widths.iter_mut().zip(r) {
                *w = (*w).max(c.len());
            }
        }
        let mut out = String::new();
        let m = &self.metadata;
        let _ = writeln!(out, "{} {} (qaction {})", m.command, self.body.kind(), m.version);
        for (k, v) in &m.summary {
            let _ = writeln!(out, "  {k}: {v}");
        }
        let line = |cols: &[String]| -> String {
            cols.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect::<Vec<_>>().join("  ")
        };
        let _ = writeln!(out, "{}", line(&header.iter().map(|h| h.to_string()).collect::<Vec<_>>()));
        for r in &cells {
            let _ = writeln!(out, "{}", line(r));
        }
        for (k, v) in &m.timings {
            let _ = writeln!(out, "  time {k}: {v:.3} s");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let mut row = LevelRow::new(0, "riccati", Some(0.1 + 0.2), Some(0.3));
        row.delta = Some(std::f64::consts::FRAC_PI_2);
        row.node_count = Some(0);
        row.status = "ok".into();
        let mut r = Report::new("solve", BTreeMap::from([("potential".into(), "builtin:harmonic_1d".into())]), Body::Levels(vec![row]));
        r.metadata.timings.insert("total".into(), 0.123456789);
        r
    }

    #[test]
    fn json_round_trip() {
        let r = sample();
        assert_eq!(Report::from_json(&r.to_json()).unwrap(), r);
    }

    #[test]
    fn csv_layout() {
        let csv = sample().to_csv();
        let mut lines = csv.lines();
        assert!(lines.next().unwrap().starts_with("# qaction-report/1 kind=levels command=solve"));
        assert!(csv.contains("n,engine,E_present,E_oracle,abs_diff,delta,node_count,status,diagnostics\n"));
        assert!(csv.contains("0,riccati,3.0000000000000004e-1,2.9999999999999999e-1,5.5511151231257827e-17,"));
        assert!(!csv.contains("0.123"));
    }

    #[test]
    fn abs_diff_matches_columns() {
        let r = LevelRow::new(3, "tmatrix", Some(-1.5), Some(-1.25));
        assert_eq!(r.abs_diff, Some(0.25));
        assert_eq!(LevelRow::new(3, "tmatrix", None, Some(1.0)).abs_diff, None);
    }
}
