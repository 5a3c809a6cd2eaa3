//! Eigenvalues from the quantization condition `J(E) = n + 1`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discretize::{self, build_layers, domain_at, domain_between, potential_minimum, Domain, TruncationOptions};
use crate::error::{Error, Result};
use crate::numeric::roots::{brent, BrentOptions};
use crate::phaseflow::{self, FlowOptions, WavefunctionTable};
use crate::potential::{Edge, Potential};
use crate::tmatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Tmatrix,
    Riccati,
}

impl Engine {
    pub fn name(&self) -> &'static str {
        match self {
            Engine::Tmatrix => "tmatrix",
            Engine::Riccati => "riccati",
        }
    }
}

impl std::str::FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tmatrix" => Ok(Engine::Tmatrix),
            "riccati" => Ok(Engine::Riccati),
            other => Err(Error::InvalidParam { name: "engine".into(), reason: format!("unknown engine `{other}`") }),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub engine: Engine,
    pub truncation: TruncationOptions,
    /// Local error tolerance of the continuum engine.
    pub tol_phase: f64,
    /// Largest accepted `|J(E) - (n+1)|`.
    pub tol_j: f64,
    /// Uniform energy samples used to bracket the levels.
    pub energy_scan_points: usize,
    /// Fixed layer count for the discrete engine; chosen automatically if unset.
    pub layer_count: Option<usize>,
    /// Target layer width, used when `layer_count` is unset.
    pub target_h: Option<f64>,
    /// Richardson extrapolation of the discrete engine in `h`.
    pub extrapolate_h: bool,
    /// Extrapolation in the distance of a regularized wall.
    pub extrapolate_epsilon: bool,
    /// Upper end of the energy search.
    pub e_max: Option<f64>,
    /// Samples of the eigenfunction to return (0 for none).
    pub wavefunction_samples: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            engine: Engine::Riccati,
            truncation: TruncationOptions { decay_budget: 25.0, ..Default::default() },
            tol_phase: 1e-11,
            tol_j: 1e-9,
            energy_scan_points: 64,
            layer_count: None,
            target_h: None,
            extrapolate_h: true,
            extrapolate_epsilon: true,
            e_max: None,
            wavefunction_samples: 0,
        }
    }
}

impl SolverOptions {
    pub fn with_engine(mut self, engine: Engine) -> Self {
        self.engine = engine;
        self
    }

    fn flow(&self) -> FlowOptions {
        FlowOptions { tol: self.tol_phase, scan_points: self.truncation.scan_points, tol_root: 1e-13 }
    }
}

/// Samples of `J(E)` from one engine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionCurve {
    pub engine: Engine,
    pub energies: Vec<f64>,
    pub actions: Vec<f64>,
}

impl ActionCurve {
    /// First adjacent pair where `J` fails to increase.
    pub fn monotonicity_violation(&self) -> Option<(f64, f64)> {
        self.energies
            .windows(2)
            .zip(self.actions.windows(2))
            .find(|(_, j)| !(j[1] > j[0]))
            .map(|(e, _)| (e[0], e[1]))
    }

    pub fn is_monotone(&self) -> bool {
        self.monotonicity_violation().is_none()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// `|J(E) - (n+1)|` at the returned energy, before extrapolation.
    pub action_residual: f64,
    /// Layer counts used by the discrete engine.
    pub layer_counts: Vec<usize>,
    /// Change made by extrapolation in `h`.
    pub h_correction: f64,
    /// Change made by extrapolation in the regularized wall position.
    pub epsilon_correction: f64,
    /// Level within `1e-6` of the continuum threshold.
    pub shallow: bool,
    pub domain: Option<Domain>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Eigensolution {
    pub n: usize,
    pub energy: f64,
    pub delta: f64,
    pub node_count: usize,
    pub engine: Engine,
    pub diagnostics: Diagnostics,
    pub wavefunction: Option<WavefunctionTable>,
}

/// Levels of one potential, with per-level failures kept rather than aborting.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub levels: Vec<Eigensolution>,
    pub failures: Vec<(usize, Error)>,
    pub curve: Option<ActionCurve>,
}

/// Distance below a threshold at which a level is flagged as shallow.
pub const SHALLOW: f64 = 1e-6;

/// Solver state shared between the levels of one potential.
pub struct Problem<'a> {
    p: &'a Potential,
    opts: SolverOptions,
    /// Where the two half-solutions meet: the potential minimum, or the left end
    /// when the left edge is a wall.
    x_m: f64,
    v_min: f64,
    offset: f64,
}

impl<'a> Problem<'a> {
    pub fn new(p: &'a Potential, opts: SolverOptions) -> Self {
        let (x_min, v_min) = potential_minimum(p);
        let x_m = if p.left_edge() == Edge::Open { x_min } else { f64::NEG_INFINITY };
        Self { p, opts, x_m, v_min, offset: p.quantum_number_offset() as f64 }
    }

    pub fn potential(&self) -> &Potential {
        self.p
    }

    pub fn options(&self) -> &SolverOptions {
        &self.opts
    }

    /// Domain at energy `E`. Just above the minimum, where the scan can miss the
    /// turning points, the tails are measured from the minimum itself.
    pub fn domain(&self, energy: f64, trunc: &TruncationOptions) -> Result<Domain> {
        match domain_at(self.p, energy, trunc) {
            Err(Error::NoTurningPoints { .. }) if energy > self.v_min && self.x_m.is_finite() => {
                domain_between(self.p, energy, Ok(self.x_m), Ok(self.x_m), trunc)
            }
            other => other,
        }
    }

    fn layer_count(&self, domain: &Domain, energy: f64) -> usize {
        if let Some(n) = self.opts.layer_count {
            return n.max(3);
        }
        let width = domain.width();
        if let Some(h) = self.opts.target_h {
            return ((width / h).ceil() as usize).max(3);
        }
        // largest kappa h over the allowed layers, kept at or below 0.03; forbidden
        // layers are propagated exactly whatever their width, and the layers next
        // to a singular wall are left to the extrapolation
        let skip = if self.singular_wall() { 0.02 * width } else { 0.0 };
        let mut n = if self.singular_wall() { 1usize << 15 } else { 1 << 14 };
        loop {
            let d = build_layers(self.p, energy, domain.x_c, domain.x_d, n);
            let k_max = (0..n)
                .filter(|&j| d.midpoint(j) - domain.x_c >= skip)
                .fold(0f64, |m, j| m.max(d.kappa_sq[j]))
                .sqrt();
            if k_max * d.h() <= 0.03 || n >= 1 << 20 {
                return n;
            }
            n *= 2;
        }
    }

    fn singular_wall(&self) -> bool {
        matches!(self.p.left_edge(), Edge::RegularizedWall(_))
    }

    fn matching_boundary(&self, d: &discretize::Discretization) -> usize {
        if !self.x_m.is_finite() {
            return 0;
        }
        let j = ((self.x_m - d.x_c) / d.h()).round();
        j.clamp(0.0, d.layer_count as f64) as usize
    }

    /// `J(E)` including the quantum-number offset, on the domain at `E`.
    pub fn action(&self, energy: f64) -> Result<f64> {
        let domain = self.domain(energy, &self.opts.truncation)?;
        self.action_on(energy, &domain, None)
    }

    fn action_on(&self, energy: f64, domain: &Domain, layers: Option<&discretize::Discretization>) -> Result<f64> {
        let j = match self.opts.engine {
            Engine::Riccati => phaseflow::action(self.p, energy, domain, self.x_m, &self.opts.flow())?,
            Engine::Tmatrix => {
                let owned;
                let d = match layers {
                    Some(d) => d,
                    None => {
                        let n = self.layer_count(domain, energy);
                        owned = build_layers(self.p, energy, domain.x_c, domain.x_d, n);
                        &owned
                    }
                };
                let m = self.matching_boundary(d);
                tmatrix::action(&d.kappa_sq_at(energy), d.h(), domain.left, domain.right, m)?
            }
        };
        Ok(j + self.offset)
    }

    /// Samples `J` on the given energies (in parallel).
    pub fn scan(&self, energies: &[f64]) -> Result<ActionCurve> {
        let actions: Vec<f64> = energies.par_iter().map(|&e| self.action(e)).collect::<Result<_>>()?;
        Ok(ActionCurve { engine: self.opts.engine, energies: energies.to_vec(), actions })
    }

    fn lowest_energy(&self, top: f64) -> f64 {
        self.v_min + 1e-6 * (top - self.v_min)
    }

    /// Energy window `[E_lo, E_hi]` holding the levels up to `n_max`, and the energies
    /// visited while finding `E_hi`.
    fn window(&self, n_max: usize) -> Result<(f64, f64, Vec<f64>)> {
        let target = n_max as f64 + 1.0 + self.offset;
        let mut visited = Vec::new();
        if let Some(e) = self.opts.e_max {
            visited.push(e);
            return Ok((self.lowest_energy(e), e, visited));
        }
        let ok = |e: f64| -> Result<bool> { Ok(self.action(e)? >= target) };
        match self.p.threshold() {
            Some(thr) => {
                let top = thr - SHALLOW;
                let mut k = 1;
                loop {
                    let e = (thr - (thr - self.v_min) * 0.25f64.powi(k)).min(top);
                    visited.push(e);
                    if e >= top || ok(e)? {
                        return Ok((self.lowest_energy(e), e, visited));
                    }
                    k += 1;
                }
            }
            None => {
                let (lo, hi) = self.p.search_interval();
                let edge = [lo, hi]
                    .iter()
                    .filter(|&&x| self.p.contains(x))
                    .map(|&x| self.p.value(x))
                    .filter(|v| v.is_finite())
                    .fold(f64::NEG_INFINITY, f64::max);
                let mut width = edge - self.v_min;
                if !(width > 0.0) {
                    width = 1.0;
                }
                for _ in 0..80 {
                    let e = self.v_min + width;
                    visited.push(e);
                    if ok(e)? {
                        return Ok((self.lowest_energy(e), e, visited));
                    }
                    width *= 2.0;
                }
                Err(Error::NonConvergence(format!("no energy reaches J = {target}")))
            }
        }
    }

    /// Brackets `[E_a, E_b]` of the levels `0..=n_max`, with the sampled curve. Levels
    /// beyond the bound-state count are reported as `NoSuchBoundState`.
    pub fn brackets(&self, n_max: usize) -> Result<(Vec<Result<(f64, f64)>>, ActionCurve)> {
        let (e_lo, e_hi, visited) = self.window(n_max)?;
        let m = self.opts.energy_scan_points.max(2);
        let mut energies: Vec<f64> = (1..=m).map(|i| e_lo + (e_hi - e_lo) * i as f64 / m as f64).collect();
        energies.extend(visited.into_iter().filter(|&e| e > e_lo && e <= e_hi));
        energies.sort_by(|a, b| a.total_cmp(b));
        let min_gap = 1e-9 * (e_hi - e_lo);
        energies.dedup_by(|b, a| *b - *a < min_gap);
        let mut curve = self.scan(&energies)?;
        // J just above the minimum; below the ground state whatever its exact value
        let j_lo = self.action(e_lo).unwrap_or(self.offset);
        curve.energies.insert(0, e_lo);
        curve.actions.insert(0, j_lo.min(curve.actions[0]));
        if let Some((a, b)) = curve.monotonicity_violation() {
            return Err(Error::MonotonicityViolation { e_lo: a, e_hi: b });
        }
        let j_max = *curve.actions.last().unwrap();
        let out = (0..=n_max)
            .map(|n| {
                let target = n as f64 + 1.0 + self.offset;
                if j_max < target {
                    return Err(Error::NoSuchBoundState { n, j_max });
                }
                let i = curve.actions.iter().position(|&j| j >= target).unwrap();
                if i == 0 {
                    return Err(Error::NoSuchBoundState { n, j_max });
                }
                Ok((curve.energies[i - 1], curve.energies[i]))
            })
            .collect();
        Ok((out, curve))
    }

    /// Root of `J = target` on a fixed domain, widening the bracket if the engine's
    /// `J` has moved relative to the scan.
    fn root<F>(&self, mut f: F, bracket: (f64, f64), limits: (f64, f64)) -> Result<(f64, f64)>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        let (mut a, mut b) = bracket;
        let mut fa = f(a)?;
        let mut fb = f(b)?;
        let mut k = 0;
        while fa > 0.0 || fb < 0.0 {
            k += 1;
            if k > 60 {
                return Err(Error::NonConvergence("could not bracket the level".into()));
            }
            let w = b - a;
            if fa > 0.0 {
                b = a;
                fb = fa;
                a = (a - w).max(limits.0);
                fa = f(a)?;
            } else {
                a = b;
                fa = fb;
                b = (b + w).min(limits.1);
                fb = f(b)?;
            }
        }
        if fa == 0.0 {
            return Ok((a, 0.0));
        }
        if fb == 0.0 {
            return Ok((b, 0.0));
        }
        let opts = BrentOptions { x_tol: 4.0 * f64::EPSILON * a.abs().max(b.abs()).max(1e-300), ..Default::default() };
        let e = brent(&mut f, a, b, fa, fb, opts)?;
        let r = f(e)?.abs();
        Ok((e, r))
    }

    fn solve_once(&self, n: usize, bracket: (f64, f64), trunc: &TruncationOptions) -> Result<(f64, Diagnostics, Domain)> {
        let target = n as f64 + 1.0 + self.offset;
        let domain = self.domain(bracket.1, trunc)?;
        let limits = (self.v_min, self.p.threshold().map(|t| t - 1e-300).unwrap_or(f64::INFINITY));
        let mut diag = Diagnostics { domain: Some(domain), ..Default::default() };
        match self.opts.engine {
            Engine::Riccati => {
                let (e, r) = self.root(|e| Ok(self.action_on(e, &domain, None)? - target), bracket, limits)?;
                diag.action_residual = r;
                Ok((e, diag, domain))
            }
            Engine::Tmatrix => {
                let n0 = self.layer_count(&domain, bracket.1);
                let counts: Vec<usize> = if self.opts.extrapolate_h { vec![n0, 2 * n0, 4 * n0] } else { vec![n0] };
                let mut values = Vec::new();
                let mut b = bracket;
                for &count in &counts {
                    let d = build_layers(self.p, bracket.1, domain.x_c, domain.x_d, count);
                    let (e, r) = self.root(|e| Ok(self.action_on(e, &domain, Some(&d))? - target), b, limits)?;
                    diag.action_residual = diag.action_residual.max(r);
                    // later levels of refinement start from a tight bracket
                    let w = (b.1 - b.0).min(1e-3 * (1.0 + e.abs()));
                    b = (e - w, e + w);
                    values.push(e);
                }
                diag.layer_counts = counts;
                let hs: Vec<f64> = diag.layer_counts.iter().map(|&c| domain.width() / c as f64).collect();
                let e = extrapolate(&hs, &values, self.singular_wall());
                diag.h_correction = e - values.last().unwrap();
                Ok((e, diag, domain))
            }
        }
    }

    /// Level `n` inside a bracket from [`Problem::brackets`].
    pub fn solve_in(&self, n: usize, bracket: (f64, f64)) -> Result<Eigensolution> {
        let trunc = self.opts.truncation;
        let regularized = matches!(self.p.left_edge(), Edge::RegularizedWall(_));
        let (mut energy, mut diag, domain) = self.solve_once(n, bracket, &trunc)?;
        // root of the finest layer grid itself; near-degenerate levels are only
        // separated there, not at the extrapolated energy
        let grid_energy = energy - diag.h_correction;
        if regularized && self.opts.extrapolate_epsilon {
            let fine = TruncationOptions { epsilon: trunc.epsilon / 10.0, ..trunc };
            let (e_fine, d_fine, _) = self.solve_once(n, bracket, &fine)?;
            let e = e_fine + (e_fine - energy) / 9.0;
            diag.epsilon_correction = e - e_fine;
            diag.action_residual = diag.action_residual.max(d_fine.action_residual);
            energy = e;
        }
        if diag.action_residual > self.opts.tol_j {
            diag.notes.push(format!("action residual {:.3e} above tolerance", diag.action_residual));
        }
        if let Some(thr) = self.p.threshold() {
            if thr - energy < SHALLOW {
                diag.shallow = true;
                diag.notes.push("shallow state".into());
            }
        }

        let (delta, node_count) = match self.opts.engine {
            Engine::Riccati => {
                let m = phaseflow::match_at(self.p, energy, &domain, self.x_m, &self.opts.flow())?;
                (phaseflow::delta_integral(&m, self.p) + self.offset * PI, m.node_count())
            }
            Engine::Tmatrix => {
                let count = *diag.layer_counts.last().unwrap();
                let d = build_layers(self.p, grid_energy, domain.x_c, domain.x_d, count);
                let m = tmatrix::match_at(&d.kappa_sq, d.h(), domain.left, domain.right, self.matching_boundary(&d))?;
                let d = d.at_energy(self.p, energy);
                let trace = tmatrix::propagate_logderivative(&d, right_log_derivative(&d, &domain))?;
                // the layer sum of kappa converges slowly next to a singular wall, so the
                // pinned discrete phase is paired with the quadrature of kappa
                let pinned = tmatrix::discrete_delta(&trace, &d) + trace.kappa_sum;
                let tps = match discretize::locate_turning_points(
                    self.p,
                    energy,
                    (domain.x_c, domain.x_d),
                    trunc.scan_points,
                    trunc.tol_root,
                ) {
                    Ok(t) => t,
                    Err(_) => Vec::new(),
                };
                let kappa = phaseflow::kappa_integral(self.p, energy, domain.x_c, domain.x_d, &tps);
                (pinned - kappa + self.offset * PI, m.node_count())
            }
        };
        // a regularized wall leaves out the sliver between the singular point and x_C
        let delta = match self.p.left_edge() {
            Edge::RegularizedWall(a) if domain.x_c > a => {
                delta - phaseflow::kappa_integral(self.p, energy, a, domain.x_c, &[])
            }
            _ => delta,
        };
        let wavefunction = if self.opts.wavefunction_samples > 0 {
            let k = self.opts.wavefunction_samples.max(2);
            let xs: Vec<f64> = (0..k).map(|i| domain.x_c + domain.width() * i as f64 / (k - 1) as f64).collect();
            Some(phaseflow::reconstruct_wavefunction(self.p, energy, &domain, self.x_m, &xs, &self.opts.flow())?)
        } else {
            None
        };
        Ok(Eigensolution { n, energy, delta, node_count, engine: self.opts.engine, diagnostics: diag, wavefunction })
    }

    /// Levels `0..=n_max`, solved in parallel.
    pub fn spectrum(&self, n_max: usize) -> Result<Spectrum> {
        let (brackets, curve) = self.brackets(n_max)?;
        let results: Vec<(usize, Result<Eigensolution>)> = brackets
            .into_par_iter()
            .enumerate()
            .map(|(n, b)| (n, b.and_then(|b| self.solve_in(n, b))))
            .collect();
        let mut levels = Vec::new();
        let mut failures = Vec::new();
        for (n, r) in results {
            match r {
                Ok(s) => levels.push(s),
                Err(e) => failures.push((n, e)),
            }
        }
        Ok(Spectrum { levels, failures, curve: Some(curve) })
    }
}

/// Limit `h -> 0` of values on three grids. Smooth potentials have an error series
/// in `h^2, h^4`; a `1/x` wall adds `h^2 ln h`, which takes the place of `h^4`.
fn extrapolate(hs: &[f64], values: &[f64], singular: bool) -> f64 {
    if values.len() < 3 {
        return *values.last().unwrap();
    }
    let basis = |h: f64| if singular { [1.0, h * h * h.ln(), h * h] } else { [1.0, h * h, h.powi(4)] };
    let m: Vec<[f64; 3]> = hs.iter().map(|&h| basis(h)).collect();
    let det3 = |a: [[f64; 3]; 3]| {
        a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
    };
    // the values are nearly equal: solve for the offsets from the finest one
    let base = values[2];
    let a = [m[0], m[1], m[2]];
    let mut a0 = a;
    for i in 0..3 {
        a0[i][0] = values[i] - base;
    }
    base + det3(a0) / det3(a)
}

/// Boundary log-derivative at `x_D` for the layered problem: `alpha` of the last layer,
/// or a large value standing in for a wall.
fn right_log_derivative(d: &discretize::Discretization, domain: &Domain) -> f64 {
    match domain.right {
        discretize::Side::Decaying => {
            let k = *d.kappa_sq.last().unwrap();
            (-k).max(f64::MIN_POSITIVE).sqrt()
        }
        discretize::Side::Wall => 1e300,
    }
}

/// `J(E)` with the domain taken at `E`.
pub fn action(p: &Potential, energy: f64, opts: &SolverOptions) -> Result<f64> {
    Problem::new(p, *opts).action(energy)
}

/// Level `n` (counted from 0).
pub fn solve_eigenvalue(p: &Potential, n: usize, opts: &SolverOptions) -> Result<Eigensolution> {
    let problem = Problem::new(p, *opts);
    let (brackets, _) = problem.brackets(n)?;
    let b = brackets.into_iter().nth(n).unwrap()?;
    problem.solve_in(n, b)
}

/// Levels `0..=n_max`; per-level failures are collected in [`Spectrum::failures`].
pub fn solve_spectrum(p: &Potential, n_max: usize, opts: &SolverOptions) -> Result<Spectrum> {
    Problem::new(p, *opts).spectrum(n_max)
}
