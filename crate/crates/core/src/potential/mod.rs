//! Evaluatable potentials: the builtin catalog, parsed expressions and radial
//! effective potentials with a centrifugal term.

pub mod dual;
pub mod expr;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use dual::{Dual, Scalar};
pub use expr::{parse_potential, ExpressionAst};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DomainKind {
    FullLine,
    HalfLineRadial,
    /// Hard wall at `left` (and at `right` when present); `psi` vanishes there.
    HalfLineWithWall { left: f64, right: Option<f64> },
}

/// How the centrifugal barrier of a radial problem is written.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Centrifugal {
    /// `l(l+1) hbar^2 / (2 m r^2)`
    #[default]
    Exact,
    /// `(l+1/2)^2 hbar^2 / (2 m r^2)`
    Langer,
}

/// Boundary behaviour at one end of the domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Edge {
    /// The potential rises above any bound energy; the solution decays.
    Open,
    /// Hard wall at the given position.
    Wall(f64),
    /// Hard wall at a point where `V` cannot be evaluated (the radial origin or a
    /// Coulomb singularity); solvers place it a small distance inside the domain.
    RegularizedWall(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Builtin {
    InfiniteWell { width: f64 },
    Harmonic1d { k: f64 },
    HarmonicRadial { k: f64 },
    Coulomb1d { z: f64 },
    CoulombRadial { z: f64 },
    WoodsSaxon { depth: f64, radius: f64, diffuseness: f64 },
    DoubleOscillator { strength: f64, separation: f64 },
}

pub const BUILTIN_NAMES: [&str; 7] = [
    "infinite_well",
    "harmonic_1d",
    "harmonic_radial",
    "coulomb_1d",
    "coulomb_radial",
    "woods_saxon",
    "double_oscillator",
];

impl Builtin {
    pub fn name(&self) -> &'static str {
        match self {
            Builtin::InfiniteWell { .. } => "infinite_well",
            Builtin::Harmonic1d { .. } => "harmonic_1d",
            Builtin::HarmonicRadial { .. } => "harmonic_radial",
            Builtin::Coulomb1d { .. } => "coulomb_1d",
            Builtin::CoulombRadial { .. } => "coulomb_radial",
            Builtin::WoodsSaxon { .. } => "woods_saxon",
            Builtin::DoubleOscillator { .. } => "double_oscillator",
        }
    }

    fn is_radial(&self) -> bool {
        matches!(self, Builtin::HarmonicRadial { .. } | Builtin::CoulombRadial { .. } | Builtin::WoodsSaxon { .. })
    }

    fn eval<S: Scalar>(&self, x: S) -> S {
        let c = S::constant;
        match *self {
            Builtin::InfiniteWell { .. } => c(0.0),
            Builtin::Harmonic1d { k } | Builtin::HarmonicRadial { k } => c(0.5 * k) * x * x,
            Builtin::Coulomb1d { z } => -c(z) / x.abs(),
            Builtin::CoulombRadial { z } => -c(z) / x,
            Builtin::WoodsSaxon { depth, radius, diffuseness } => {
                let u = (x - c(radius)) / c(diffuseness);
                if u.value() > 0.0 {
                    // exp(u) overflows far out; the slope would come out as inf/inf
                    let e = (-u).exp();
                    -c(depth) * e / (c(1.0) + e)
                } else {
                    -c(depth) / (c(1.0) + u.exp())
                }
            }
            Builtin::DoubleOscillator { strength, separation } => {
                let d = x.abs() - c(separation);
                c(strength) * d * d
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialKind {
    Builtin(Builtin),
    Expression(ExpressionAst),
}

/// An immutable, evaluatable potential `V(x)` plus the physical constants of the problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    kind: PotentialKind,
    params: BTreeMap<String, f64>,
    angular_momentum: Option<u32>,
    centrifugal: Centrifugal,
    mass: f64,
    hbar: f64,
    domain: DomainKind,
    search: (f64, f64),
}

fn param(params: &BTreeMap<String, f64>, name: &str, default: f64) -> f64 {
    params.get(name).copied().unwrap_or(default)
}

fn positive(name: &str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParam { name: name.into(), reason: format!("must be positive, got {value}") })
    }
}

const RESERVED: [&str; 3] = ["l", "mass", "hbar"];

impl Potential {
    /// Builds a catalog potential. `params` may also carry `l`, `mass` and `hbar`.
    pub fn builtin(name: &str, params: &BTreeMap<String, f64>) -> Result<Self> {
        let allowed: &[&str] = match name {
            "infinite_well" => &["L"],
            "harmonic_1d" | "harmonic_radial" => &["k"],
            "coulomb_1d" | "coulomb_radial" => &["Z"],
            "woods_saxon" => &["V0", "r0", "a"],
            "double_oscillator" => &["c", "a"],
            _ => return Err(Error::UnknownBuiltin(name.to_string())),
        };
        for key in params.keys() {
            if !allowed.contains(&key.as_str()) && !RESERVED.contains(&key.as_str()) {
                return Err(Error::InvalidParam { name: key.clone(), reason: format!("not a parameter of {name}") });
            }
        }
        let builtin = match name {
            "infinite_well" => Builtin::InfiniteWell { width: positive("L", param(params, "L", 1.0))? },
            "harmonic_1d" => Builtin::Harmonic1d { k: positive("k", param(params, "k", 1.0))? },
            "harmonic_radial" => Builtin::HarmonicRadial { k: positive("k", param(params, "k", 1.0))? },
            "coulomb_1d" => Builtin::Coulomb1d { z: positive("Z", param(params, "Z", 1.0))? },
            "coulomb_radial" => Builtin::CoulombRadial { z: positive("Z", param(params, "Z", 1.0))? },
            "woods_saxon" => Builtin::WoodsSaxon {
                depth: positive("V0", param(params, "V0", 1.0))?,
                radius: positive("r0", param(params, "r0", 30.0))?,
                diffuseness: positive("a", param(params, "a", 0.5))?,
            },
            _ => Builtin::DoubleOscillator {
                strength: positive("c", param(params, "c", 10.0))?,
                separation: positive("a", param(params, "a", 3.0))?,
            },
        };
        let domain = match builtin {
            Builtin::InfiniteWell { width } => DomainKind::HalfLineWithWall { left: 0.0, right: Some(width) },
            Builtin::Coulomb1d { .. } => DomainKind::HalfLineWithWall { left: 0.0, right: None },
            b if b.is_radial() => DomainKind::HalfLineRadial,
            _ => DomainKind::FullLine,
        };
        let search = match builtin {
            Builtin::InfiniteWell { width } => (0.0, width),
            Builtin::Harmonic1d { k } => (-2.0 / k.sqrt(), 2.0 / k.sqrt()),
            Builtin::HarmonicRadial { k } => (0.0, 4.0 / k.sqrt()),
            Builtin::Coulomb1d { z } | Builtin::CoulombRadial { z } => (0.0, 4.0 / z),
            Builtin::WoodsSaxon { radius, diffuseness, .. } => (0.0, radius + 10.0 * diffuseness),
            Builtin::DoubleOscillator { separation, .. } => (-2.0 * separation, 2.0 * separation),
        };
        let mut potential = Self {
            kind: PotentialKind::Builtin(builtin),
            params: params.iter().filter(|(k, _)| !RESERVED.contains(&k.as_str())).map(|(k, v)| (k.clone(), *v)).collect(),
            angular_momentum: None,
            centrifugal: Centrifugal::Exact,
            mass: 1.0,
            hbar: 1.0,
            domain,
            search,
        };
        if let Some(&l) = params.get("l") {
            if l < 0.0 || l.fract() != 0.0 {
                return Err(Error::InvalidParam { name: "l".into(), reason: format!("must be a nonnegative integer, got {l}") });
            }
            potential = potential.with_angular_momentum(l as u32)?;
        }
        if let Some(&m) = params.get("mass") {
            potential = potential.with_mass(m)?;
        }
        if let Some(&h) = params.get("hbar") {
            potential = potential.with_hbar(h)?;
        }
        Ok(potential)
    }

    /// A potential given by an expression in `x`.
    pub fn expression(source: &str, params: &BTreeMap<String, f64>, domain: DomainKind) -> Result<Self> {
        if params.contains_key("x") {
            return Err(Error::InvalidParam { name: "x".into(), reason: "reserved for the coordinate".into() });
        }
        let ast = parse_potential(source, params)?;
        let search = match domain {
            DomainKind::FullLine => (-10.0, 10.0),
            DomainKind::HalfLineRadial => (0.0, 20.0),
            DomainKind::HalfLineWithWall { left, right } => (left, right.unwrap_or(left + 20.0)),
        };
        Ok(Self {
            kind: PotentialKind::Expression(ast),
            params: params.clone(),
            angular_momentum: None,
            centrifugal: Centrifugal::Exact,
            mass: 1.0,
            hbar: 1.0,
            domain,
            search,
        })
    }

    pub fn with_angular_momentum(mut self, l: u32) -> Result<Self> {
        if self.domain != DomainKind::HalfLineRadial {
            return Err(Error::InvalidParam { name: "l".into(), reason: "angular momentum needs a radial potential".into() });
        }
        self.angular_momentum = Some(l);
        Ok(self)
    }

    pub fn with_mass(mut self, mass: f64) -> Result<Self> {
        self.mass = positive("mass", mass)?;
        Ok(self)
    }

    pub fn with_hbar(mut self, hbar: f64) -> Result<Self> {
        self.hbar = positive("hbar", hbar)?;
        Ok(self)
    }

    pub fn with_centrifugal(mut self, form: Centrifugal) -> Self {
        self.centrifugal = form;
        self
    }

    /// Interval scanned for the potential minimum and used to seed turning-point brackets.
    pub fn with_search_interval(mut self, lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) {
            return Err(Error::InvalidParam { name: "search".into(), reason: format!("empty interval [{lo}, {hi}]") });
        }
        self.search = (lo, hi);
        Ok(self)
    }

    pub fn kind(&self) -> &PotentialKind {
        &self.kind
    }

    pub fn builtin_tag(&self) -> Option<&'static str> {
        match &self.kind {
            PotentialKind::Builtin(b) => Some(b.name()),
            PotentialKind::Expression(_) => None,
        }
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    pub fn angular_momentum(&self) -> Option<u32> {
        self.angular_momentum
    }

    pub fn centrifugal(&self) -> Centrifugal {
        self.centrifugal
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn domain(&self) -> DomainKind {
        self.domain
    }

    pub fn search_interval(&self) -> (f64, f64) {
        self.search
    }

    /// Coefficient `C` of the centrifugal term `C / x^2`.
    pub fn centrifugal_coefficient(&self) -> f64 {
        let scale = self.hbar * self.hbar / (2.0 * self.mass);
        match (self.domain, self.centrifugal) {
            (DomainKind::HalfLineRadial, Centrifugal::Exact) => {
                let l = self.angular_momentum.unwrap_or(0) as f64;
                l * (l + 1.0) * scale
            }
            (DomainKind::HalfLineRadial, Centrifugal::Langer) => {
                let l = self.angular_momentum.unwrap_or(0) as f64 + 0.5;
                l * l * scale
            }
            _ => 0.0,
        }
    }

    /// `2m/hbar^2`, the factor turning `E - V` into `kappa^2`.
    pub fn kinetic_factor(&self) -> f64 {
        2.0 * self.mass / (self.hbar * self.hbar)
    }

    fn eval_generic<S: Scalar>(&self, x: S) -> S {
        let base = match &self.kind {
            PotentialKind::Builtin(b) => b.eval(x),
            PotentialKind::Expression(ast) => ast.eval(x),
        };
        let c = self.centrifugal_coefficient();
        if c != 0.0 {
            base + S::constant(c) / (x * x)
        } else {
            base
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        match self.domain {
            DomainKind::FullLine => x.is_finite(),
            DomainKind::HalfLineRadial => x > 0.0 && x.is_finite(),
            DomainKind::HalfLineWithWall { left, right } => x >= left && right.map_or(x.is_finite(), |r| x <= r),
        }
    }

    /// Effective potential at `x`, including the centrifugal term for radial problems.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !self.contains(x) {
            return Err(Error::Domain { x });
        }
        let v = self.eval_generic(x);
        if v.is_nan() || v.is_infinite() {
            return Err(Error::Domain { x });
        }
        Ok(v)
    }

    /// Unchecked evaluation for inner loops that already respect the domain.
    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        self.eval_generic(x)
    }

    /// `(V(x), V'(x))` through forward-mode differentiation of the same formula.
    #[inline]
    pub fn value_and_slope(&self, x: f64) -> (f64, f64) {
        let d = self.eval_generic(Dual::variable(x));
        (d.re, d.eps)
    }

    /// `2m(E - V(x))/hbar^2`, negative in classically forbidden regions.
    #[inline]
    pub fn kappa_sq(&self, x: f64, energy: f64) -> f64 {
        self.kinetic_factor() * (energy - self.value(x))
    }

    /// Limit of `V` at the open end of the domain, when the potential has one.
    pub fn threshold(&self) -> Option<f64> {
        match &self.kind {
            PotentialKind::Builtin(Builtin::WoodsSaxon { .. })
            | PotentialKind::Builtin(Builtin::Coulomb1d { .. })
            | PotentialKind::Builtin(Builtin::CoulombRadial { .. }) => Some(0.0),
            _ => None,
        }
    }

    /// Boundary behaviour at the left end of the domain.
    pub fn left_edge(&self) -> Edge {
        match self.domain {
            DomainKind::FullLine => Edge::Open,
            DomainKind::HalfLineRadial if self.centrifugal_coefficient() > 0.0 => Edge::Open,
            DomainKind::HalfLineRadial => {
                if self.value(0.0).is_finite() {
                    Edge::Wall(0.0)
                } else {
                    Edge::RegularizedWall(0.0)
                }
            }
            DomainKind::HalfLineWithWall { left, .. } => {
                if self.value(left).is_finite() {
                    Edge::Wall(left)
                } else {
                    Edge::RegularizedWall(left)
                }
            }
        }
    }

    /// Boundary behaviour at the right end of the domain.
    pub fn right_edge(&self) -> Edge {
        match self.domain {
            DomainKind::HalfLineWithWall { right: Some(r), .. } => Edge::Wall(r),
            _ => Edge::Open,
        }
    }

    fn is_singular_origin(&self) -> bool {
        matches!(self.kind, PotentialKind::Builtin(Builtin::Coulomb1d { .. }))
    }

    /// Offset between the internal node-count label and the conventional label of
    /// the level. The 1D Coulomb problem counts its levels from 1; its singular
    /// origin adds a phase of pi to the action.
    pub fn quantum_number_offset(&self) -> usize {
        usize::from(self.is_singular_origin())
    }

    /// Whether `V(x) = V(-x)` holds by construction.
    pub fn is_symmetric(&self) -> bool {
        matches!(self.kind, PotentialKind::Builtin(Builtin::Harmonic1d { .. } | Builtin::DoubleOscillator { .. }))
    }
}

impl fmt::Display for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            PotentialKind::Builtin(b) => write!(f, "builtin:{}", b.name())?,
            PotentialKind::Expression(ast) => write!(f, "expr:{ast}")?,
        }
        for (k, v) in &self.params {
            write!(f, " {k}={v}")?;
        }
        if let Some(l) = self.angular_momentum {
            write!(f, " l={l}")?;
        }
        if self.mass != 1.0 {
            write!(f, " mass={}", self.mass)?;
        }
        if self.hbar != 1.0 {
            write!(f, " hbar={}", self.hbar)?;
        }
        Ok(())
    }
}
