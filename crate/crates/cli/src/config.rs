//! Run configuration: a flat TOML document with dotted keys.
//!
//! ```toml
//! potential = "builtin:woods_saxon"   # or "expr:10*(abs(x)-3)^2"
//! params.V0 = 1.0
//! l = 1
//! mass = 0.5
//! engine = "riccati"                  # tmatrix | riccati | both
//! n_min = 0
//! n_max = 8
//! ```
//!
//! Every key is checked; anything not listed in [`KEYS`] (or under `params.`) is
//! rejected with the offending key in the message.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use qaction_core::discretize::TruncationOptions;
use qaction_core::quantize::{Engine, SolverOptions};
use qaction_core::{DomainKind, Potential};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("malformed config: {0}")]
    Parse(String),
    #[error("unknown config key `{key}`{hint}")]
    UnknownKey { key: String, hint: String },
    #[error("missing required key `{0}`")]
    Missing(String),
    #[error("`{key}`: {message}")]
    Invalid { key: String, message: String },
}

impl ConfigError {
    fn invalid(key: &str, message: impl Into<String>) -> Self {
        ConfigError::Invalid { key: key.to_string(), message: message.into() }
    }
}

pub type Result<T> = std::result::Result<T, ConfigError>;

/// Recognized keys besides the open `params.<name>` family.
pub const KEYS: &[&str] = &[
    "potential",
    "l",
    "mass",
    "hbar",
    "domain",
    "wall.left",
    "wall.right",
    "search.lo",
    "search.hi",
    "engine",
    "oracle",
    "n_min",
    "n_max",
    "format",
    "out",
    "decay_budget",
    "layer_count",
    "target_h",
    "scan_points",
    "tol_root",
    "tol_j",
    "tol_phase",
    "energy_scan_points",
    "e_max",
    "epsilon",
    "extrapolate_h",
    "extrapolate_epsilon",
    "scan.energies",
    "scan.e_min",
    "scan.e_max",
    "scan.points",
    "wavefunction.n",
    "wavefunction.samples",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineChoice {
    Tmatrix,
    Riccati,
    Both,
}

impl EngineChoice {
    pub fn engines(&self) -> Vec<Engine> {
        match self {
            EngineChoice::Tmatrix => vec![Engine::Tmatrix],
            EngineChoice::Riccati => vec![Engine::Riccati],
            EngineChoice::Both => vec![Engine::Tmatrix, Engine::Riccati],
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            EngineChoice::Tmatrix => "tmatrix",
            EngineChoice::Riccati => "riccati",
            EngineChoice::Both => "both",
        }
    }
}

impl FromStr for EngineChoice {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "tmatrix" => Ok(EngineChoice::Tmatrix),
            "riccati" => Ok(EngineChoice::Riccati),
            "both" => Ok(EngineChoice::Both),
            _ => Err(format!("expected tmatrix, riccati or both, got `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Table,
}

impl Format {
    pub fn name(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Table => "table",
        }
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "table" => Ok(Format::Table),
            _ => Err(format!("expected csv, json or table, got `{s}`")),
        }
    }
}

/// Where the reference column of a solve comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleChoice {
    /// Closed form when the catalog has one, Numerov otherwise.
    Auto,
    Analytic,
    Numerov,
    None,
}

impl OracleChoice {
    pub fn name(&self) -> &'static str {
        match self {
            OracleChoice::Auto => "auto",
            OracleChoice::Analytic => "analytic",
            OracleChoice::Numerov => "numerov",
            OracleChoice::None => "none",
        }
    }
}

impl FromStr for OracleChoice {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "auto" => Ok(OracleChoice::Auto),
            "analytic" => Ok(OracleChoice::Analytic),
            "numerov" => Ok(OracleChoice::Numerov),
            "none" => Ok(OracleChoice::None),
            _ => Err(format!("expected auto, analytic, numerov or none, got `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScanGrid {
    pub energies: Option<Vec<f64>>,
    pub e_min: Option<f64>,
    pub e_max: Option<f64>,
    pub points: usize,
}

impl ScanGrid {
    pub fn energies(&self) -> Result<Vec<f64>> {
        if let Some(e) = &self.energies {
            return Ok(e.clone());
        }
        let lo = self.e_min.ok_or_else(|| ConfigError::Missing("scan.e_min".into()))?;
        let hi = self.e_max.ok_or_else(|| ConfigError::Missing("scan.e_max".into()))?;
        if !(hi > lo) {
            return Err(ConfigError::invalid("scan.e_max", "must exceed scan.e_min"));
        }
        let k = self.points;
        Ok((0..k).map(|i| lo + (hi - lo) * i as f64 / (k - 1) as f64).collect())
    }
}

/// A fully validated run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub potential_spec: String,
    pub params: BTreeMap<String, f64>,
    pub l: Option<u32>,
    pub mass: f64,
    pub hbar: f64,
    pub domain: Option<String>,
    pub potential: Potential,
    pub engine: EngineChoice,
    pub oracle: OracleChoice,
    pub n_min: usize,
    pub n_max: usize,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub solver: SolverOptions,
    pub scan: ScanGrid,
    pub wavefunction_n: Option<usize>,
    pub wavefunction_samples: usize,
}

/// Flattened key/value view of the document; keys are removed as they are read.
struct Keys(BTreeMap<String, toml::Value>);

fn flatten(prefix: &str, table: toml::Table, out: &mut BTreeMap<String, toml::Value>) {
    for (k, v) in table {
        let key = if prefix.is_empty() { k } else { format!("{prefix}.{k}") };
        match v {
            toml::Value::Table(t) => flatten(&key, t, out),
            other => {
                out.insert(key, other);
            }
        }
    }
}

fn as_float(key: &str, v: &toml::Value) -> Result<f64> {
    match v {
        toml::Value::Float(f) => Ok(*f),
        toml::Value::Integer(i) => Ok(*i as f64),
        _ => Err(ConfigError::invalid(key, format!("expected a number, got {}", v.type_str()))),
    }
}

impl Keys {
    fn float(&mut self, key: &str) -> Result<Option<f64>> {
        match self.0.remove(key) {
            None => Ok(None),
            Some(v) => {
                let f = as_float(key, &v)?;
                if !f.is_finite() {
                    return Err(ConfigError::invalid(key, "must be finite"));
                }
                Ok(Some(f))
            }
        }
    }

    fn positive(&mut self, key: &str) -> Result<Option<f64>> {
        match self.float(key)? {
            Some(f) if f <= 0.0 => Err(ConfigError::invalid(key, format!("must be positive, got {f}"))),
            other => Ok(other),
        }
    }

    fn uint(&mut self, key: &str) -> Result<Option<usize>> {
        match self.0.remove(key) {
            None => Ok(None),
            Some(toml::Value::Integer(i)) if i >= 0 => Ok(Some(i as usize)),
            Some(v) => Err(ConfigError::invalid(key, format!("expected a nonnegative integer, got {v}"))),
        }
    }

    fn boolean(&mut self, key: &str) -> Result<Option<bool>> {
        match self.0.remove(key) {
            None => Ok(None),
            Some(toml::Value::Boolean(b)) => Ok(Some(b)),
            Some(v) => Err(ConfigError::invalid(key, format!("expected true or false, got {v}"))),
        }
    }

    fn string(&mut self, key: &str) -> Result<Option<String>> {
        match self.0.remove(key) {
            None => Ok(None),
            Some(toml::Value::String(s)) => Ok(Some(s)),
            Some(v) => Err(ConfigError::invalid(key, format!("expected a string, got {}", v.type_str()))),
        }
    }

    fn parsed<T: FromStr<Err = String>>(&mut self, key: &str) -> Result<Option<T>> {
        match self.string(key)? {
            None => Ok(None),
            Some(s) => s.parse().map(Some).map_err(|m| ConfigError::invalid(key, m)),
        }
    }

    fn floats(&mut self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.0.remove(key) {
            None => Ok(None),
            Some(toml::Value::Array(a)) => a.iter().map(|v| as_float(key, v)).collect::<Result<Vec<_>>>().map(Some),
            Some(v) => Err(ConfigError::invalid(key, format!("expected an array of numbers, got {}", v.type_str()))),
        }
    }

    fn with_prefix(&mut self, prefix: &str) -> Result<BTreeMap<String, f64>> {
        let keys: Vec<String> = self.0.keys().filter(|k| k.starts_with(prefix)).cloned().collect();
        let mut out = BTreeMap::new();
        for k in keys {
            let v = self.0.remove(&k).unwrap();
            let name = &k[prefix.len()..];
            if name.contains('.') {
                return Err(ConfigError::UnknownKey { key: k.clone(), hint: String::new() });
            }
            out.insert(name.to_string(), as_float(&k, &v)?);
        }
        Ok(out)
    }

    fn finish(self) -> Result<()> {
        match self.0.into_keys().next() {
            None => Ok(()),
            Some(key) => {
                let hint = suggestion(&key).map(|s| format!(" (did you mean `{s}`?)")).unwrap_or_default();
                Err(ConfigError::UnknownKey { key, hint })
            }
        }
    }
}

fn suggestion(key: &str) -> Option<&'static str> {
    let squash = |s: &str| s.chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>().to_ascii_lowercase();
    let k = squash(key);
    KEYS.iter().copied().find(|cand| squash(cand) == k)
}

fn core_error_key(e: &qaction_core::Error) -> String {
    match e {
        qaction_core::Error::InvalidParam { name, .. } if ["l", "mass", "hbar"].contains(&name.as_str()) => name.clone(),
        qaction_core::Error::InvalidParam { name, .. } => format!("params.{name}"),
        _ => "potential".into(),
    }
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Io { path: path.display().to_string(), message: e.to_string() })?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| ConfigError::Parse(e.message().to_string()))?;
        let mut flat = BTreeMap::new();
        flatten("", table, &mut flat);
        let mut keys = Keys(flat);

        let potential_spec = keys.string("potential")?.ok_or_else(|| ConfigError::Missing("potential".into()))?;
        let params = keys.with_prefix("params.")?;
        let l = match keys.uint("l")? {
            Some(l) => Some(u32::try_from(l).map_err(|_| ConfigError::invalid("l", "too large"))?),
            None => None,
        };
        let mass = keys.positive("mass")?.unwrap_or(1.0);
        let hbar = keys.positive("hbar")?.unwrap_or(1.0);
        let domain = keys.string("domain")?;
        let wall_left = keys.float("wall.left")?;
        let wall_right = keys.float("wall.right")?;
        let search_lo = keys.float("search.lo")?;
        let search_hi = keys.float("search.hi")?;

        let engine = keys.parsed("engine")?.unwrap_or(EngineChoice::Riccati);
        let oracle = keys.parsed("oracle")?.unwrap_or(OracleChoice::Auto);
        let n_min = keys.uint("n_min")?.unwrap_or(0);
        let n_max = keys.uint("n_max")?.unwrap_or(n_min.max(4));
        if n_max < n_min {
            return Err(ConfigError::invalid("n_max", format!("must be at least n_min = {n_min}")));
        }
        let format = keys.parsed("format")?.unwrap_or(Format::Csv);
        let out = keys.string("out")?.map(PathBuf::from);

        let mut solver = SolverOptions::default();
        let mut trunc = TruncationOptions { decay_budget: solver.truncation.decay_budget, ..TruncationOptions::default() };
        if let Some(v) = keys.positive("decay_budget")? {
            trunc.decay_budget = v;
        }
        if let Some(v) = keys.uint("scan_points")? {
            if v < 2 {
                return Err(ConfigError::invalid("scan_points", "needs at least 2 points"));
            }
            trunc.scan_points = v;
        }
        if let Some(v) = keys.positive("tol_root")? {
            trunc.tol_root = v;
        }
        if let Some(v) = keys.positive("epsilon")? {
            trunc.epsilon = v;
        }
        solver.truncation = trunc;
        solver.layer_count = match keys.uint("layer_count")? {
            Some(0) => return Err(ConfigError::invalid("layer_count", "must be positive")),
            other => other,
        };
        solver.target_h = keys.positive("target_h")?;
        if solver.layer_count.is_some() && solver.target_h.is_some() {
            return Err(ConfigError::invalid("target_h", "give either layer_count or target_h"));
        }
        if let Some(v) = keys.positive("tol_j")? {
            solver.tol_j = v;
        }
        if let Some(v) = keys.positive("tol_phase")? {
            solver.tol_phase = v;
        }
        if let Some(v) = keys.uint("energy_scan_points")? {
            if v < 2 {
                return Err(ConfigError::invalid("energy_scan_points", "needs at least 2 points"));
            }
            solver.energy_scan_points = v;
        }
        solver.e_max = keys.float("e_max")?;
        if let Some(b) = keys.boolean("extrapolate_h")? {
            solver.extrapolate_h = b;
        }
        if let Some(b) = keys.boolean("extrapolate_epsilon")? {
            solver.extrapolate_epsilon = b;
        }

        let scan = ScanGrid {
            energies: keys.floats("scan.energies")?,
            e_min: keys.float("scan.e_min")?,
            e_max: keys.float("scan.e_max")?,
            points: match keys.uint("scan.points")? {
                Some(k) if k < 2 => return Err(ConfigError::invalid("scan.points", "needs at least 2 points")),
                Some(k) => k,
                None => 50,
            },
        };
        let wavefunction_n = keys.uint("wavefunction.n")?;
        let wavefunction_samples = match keys.uint("wavefunction.samples")? {
            Some(k) if k < 2 => return Err(ConfigError::invalid("wavefunction.samples", "needs at least 2 samples")),
            Some(k) => k,
            None => 201,
        };
        keys.finish()?;

        let potential = build_potential(
            &potential_spec,
            &params,
            l,
            mass,
            hbar,
            domain.as_deref(),
            (wall_left, wall_right),
            (search_lo, search_hi),
        )?;
        Ok(Self {
            potential_spec,
            params,
            l,
            mass,
            hbar,
            domain,
            potential,
            engine,
            oracle,
            n_min,
            n_max,
            format,
            out,
            solver,
            scan,
            wavefunction_n,
            wavefunction_samples,
        })
    }

    /// A builtin run with default settings, as used by `bench`.
    pub fn for_builtin(name: &str, params: &BTreeMap<String, f64>, n_min: usize, n_max: usize) -> Result<Self> {
        let mut text = format!("potential = \"builtin:{name}\"\nn_min = {n_min}\nn_max = {n_max}\noracle = \"none\"\n");
        for (k, v) in params {
            let key = if ["l"].contains(&k.as_str()) {
                format!("{k} = {}", *v as i64)
            } else if ["mass", "hbar"].contains(&k.as_str()) {
                format!("{k} = {v:?}")
            } else {
                format!("params.{k} = {v:?}")
            };
            text.push_str(&key);
            text.push('\n');
        }
        Self::from_toml(&text)
    }

    /// Command-line flags take precedence over the file.
    pub fn apply_overrides(&mut self, o: &Overrides) -> Result<()> {
        if let Some(e) = &o.engine {
            self.engine = e.parse().map_err(|m| ConfigError::invalid("--engine", m))?;
        }
        if let Some(f) = &o.format {
            self.format = f.parse().map_err(|m| ConfigError::invalid("--format", m))?;
        }
        if let Some(p) = &o.out {
            self.out = Some(p.clone());
        }
        if let Some(t) = o.tol_j {
            if !(t > 0.0 && t.is_finite()) {
                return Err(ConfigError::invalid("--tol-j", format!("must be positive, got {t}")));
            }
            self.solver.tol_j = t;
        }
        if let Some(n) = o.layers {
            if n == 0 {
                return Err(ConfigError::invalid("--layers", "must be positive"));
            }
            self.solver.layer_count = Some(n);
            self.solver.target_h = None;
        }
        Ok(())
    }

    pub fn solver_for(&self, engine: Engine) -> SolverOptions {
        self.solver.with_engine(engine)
    }

    /// Canonical key/value echo of the validated settings (output path excluded).
    pub fn echo(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            m.insert(k.to_string(), v);
        };
        put("potential", self.potential_spec.clone());
        for (k, v) in &self.params {
            put(&format!("params.{k}"), format!("{v:?}"));
        }
        if let Some(l) = self.l {
            put("l", l.to_string());
        }
        put("mass", format!("{:?}", self.mass));
        put("hbar", format!("{:?}", self.hbar));
        if let Some(d) = &self.domain {
            put("domain", d.clone());
        }
        put("engine", self.engine.name().into());
        put("oracle", self.oracle.name().into());
        put("n_min", self.n_min.to_string());
        put("n_max", self.n_max.to_string());
        let s = &self.solver;
        put("decay_budget", format!("{:?}", s.truncation.decay_budget));
        put("scan_points", s.truncation.scan_points.to_string());
        put("tol_root", format!("{:?}", s.truncation.tol_root));
        put("epsilon", format!("{:?}", s.truncation.epsilon));
        if let Some(n) = s.layer_count {
            put("layer_count", n.to_string());
        }
        if let Some(h) = s.target_h {
            put("target_h", format!("{h:?}"));
        }
        put("tol_j", format!("{:?}", s.tol_j));
        put("tol_phase", format!("{:?}", s.tol_phase));
        put("energy_scan_points", s.energy_scan_points.to_string());
        if let Some(e) = s.e_max {
            put("e_max", format!("{e:?}"));
        }
        put("extrapolate_h", s.extrapolate_h.to_string());
        put("extrapolate_epsilon", s.extrapolate_epsilon.to_string());
        m
    }
}

/// Flags that override config values.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub engine: Option<String>,
    pub format: Option<String>,
    pub out: Option<PathBuf>,
    pub tol_j: Option<f64>,
    pub layers: Option<usize>,
}

#[allow(clippy::too_many_arguments)]
fn build_potential(
    spec: &str,
    params: &BTreeMap<String, f64>,
    l: Option<u32>,
    mass: f64,
    hbar: f64,
    domain: Option<&str>,
    wall: (Option<f64>, Option<f64>),
    search: (Option<f64>, Option<f64>),
) -> Result<Potential> {
    let core = |e: qaction_core::Error| ConfigError::invalid(&core_error_key(&e), e.to_string());
    let mut p = if let Some(name) = spec.strip_prefix("builtin:") {
        if domain.is_some() {
            return Err(ConfigError::invalid("domain", "only expression potentials take a domain"));
        }
        if wall.0.is_some() || wall.1.is_some() {
            return Err(ConfigError::invalid("wall.left", "only expression potentials take walls"));
        }
        let mut all = params.clone();
        if let Some(l) = l {
            all.insert("l".into(), l as f64);
        }
        all.insert("mass".into(), mass);
        all.insert("hbar".into(), hbar);
        Potential::builtin(name.trim(), &all).map_err(core)?
    } else if let Some(source) = spec.strip_prefix("expr:") {
        let kind = match domain.unwrap_or("full_line") {
            "full_line" => DomainKind::FullLine,
            "radial" => DomainKind::HalfLineRadial,
            "wall" => {
                let left = wall.0.ok_or_else(|| ConfigError::Missing("wall.left".into()))?;
                if let Some(r) = wall.1 {
                    if r <= left {
                        return Err(ConfigError::invalid("wall.right", "must exceed wall.left"));
                    }
                }
                DomainKind::HalfLineWithWall { left, right: wall.1 }
            }
            other => {
                return Err(ConfigError::invalid("domain", format!("expected full_line, radial or wall, got `{other}`")))
            }
        };
        let mut p = Potential::expression(source, params, kind).map_err(core)?;
        if let Some(l) = l {
            p = p.with_angular_momentum(l).map_err(core)?;
        }
        p.with_mass(mass).map_err(core)?.with_hbar(hbar).map_err(core)?
    } else {
        return Err(ConfigError::invalid("potential", format!("expected `builtin:<name>` or `expr:<source>`, got `{spec}`")));
    };
    match search {
        (None, None) => {}
        (lo, hi) => {
            let (dlo, dhi) = p.search_interval();
            p = p
                .with_search_interval(lo.unwrap_or(dlo), hi.unwrap_or(dhi))
                .map_err(|e| ConfigError::invalid("search.lo", e.to_string()))?;
        }
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_builtin() {
        let c = RunConfig::from_toml("potential = \"builtin:harmonic_1d\"\nn_max = 3\n").unwrap();
        assert_eq!(c.n_max, 3);
        assert_eq!(c.engine, EngineChoice::Riccati);
        assert_eq!(c.potential.builtin_tag(), Some("harmonic_1d"));
    }

    #[test]
    fn dotted_params() {
        let c = RunConfig::from_toml(
            "potential = \"builtin:woods_saxon\"\nparams.V0 = 1\nparams.r0 = 30.0\nl = 1\nmass = 0.5\n",
        )
        .unwrap();
        assert_eq!(c.params["r0"], 30.0);
        assert_eq!(c.potential.angular_momentum(), Some(1));
        assert_eq!(c.potential.mass(), 0.5);
    }

    #[test]
    fn unknown_key_is_named() {
        let e = RunConfig::from_toml("potential = \"builtin:harmonic_1d\"\nlayercount = 10\n").unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("layercount") && msg.contains("layer_count"), "{msg}");
    }

    #[test]
    fn expression_domain() {
        let c = RunConfig::from_toml("potential = \"expr:x^2/2\"\ndomain = \"radial\"\nl = 2\n").unwrap();
        assert_eq!(c.potential.domain(), DomainKind::HalfLineRadial);
        let e = RunConfig::from_toml("potential = \"expr:x\"\ndomain = \"wall\"\n").unwrap_err();
        assert!(e.to_string().contains("wall.left"));
    }

    #[test]
    fn bad_values() {
        for (doc, key) in [
            ("potential = \"builtin:nope\"", "potential"),
            ("potential = \"builtin:infinite_well\"\nparams.L = -1", "params.L"),
            ("potential = \"builtin:harmonic_1d\"\nengine = \"fast\"", "engine"),
            ("potential = \"builtin:harmonic_1d\"\nn_min = 3\nn_max = 1", "n_max"),
            ("potential = \"builtin:harmonic_1d\"\nmass = 0", "mass"),
            ("potential = \"builtin:harmonic_1d\"\nl = 1", "l"),
        ] {
            let msg = RunConfig::from_toml(doc).unwrap_err().to_string();
            assert!(msg.contains(key), "{doc}: {msg}");
        }
    }

    #[test]
    fn overrides() {
        let mut c = RunConfig::from_toml("potential = \"builtin:harmonic_1d\"").unwrap();
        let o = Overrides { engine: Some("both".into()), layers: Some(4096), tol_j: Some(1e-8), ..Default::default() };
        c.apply_overrides(&o).unwrap();
        assert_eq!(c.engine, EngineChoice::Both);
        assert_eq!(c.solver.layer_count, Some(4096));
        assert!(c.apply_overrides(&Overrides { layers: Some(0), ..Default::default() }).is_err());
    }
}
