//! Continuum engine: the Riccati equation for `P = -psi'/psi` integrated in a
//! pole-free angle form.
//!
//! With a positive scale `s(x)` the substitution `P = s tan(theta)`,
//! `psi = R cos(theta)/sqrt(s)`, `psi' = -R sqrt(s) sin(theta)` turns
//! `P' = kappa^2 + P^2` into
//!
//! ```text
//! theta' = (kappa^2/s) cos^2 + s sin^2 - (s'/s) sin cos
//! (ln R)' = (s'/2s) cos 2theta + (kappa^2/s - s) sin cos
//! ```
//!
//! `s = (kappa^4 + s0^4)^(1/4)` equals `|kappa|` away from turning points, so inside
//! the allowed region `theta' = kappa - (kappa'/kappa) sin cos`, the integrand
//! `K = kappa - kappa' P / P'` of the action, and `s0` only regularizes the
//! turning points themselves.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::discretize::{locate_turning_points, Domain, Side};
use crate::error::{Error, Result};
use crate::numeric::{self, ode};
use crate::potential::Potential;
use crate::tmatrix::{count_nodes, pin};

/// Right-hand side of the Riccati equation `P' = kappa^2 + P^2`.
#[inline]
pub fn riccati_rhs(p: f64, kappa_sq: f64) -> f64 {
    kappa_sq + p * p
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowOptions {
    /// Local relative (and absolute, for the angle) error tolerance.
    pub tol: f64,
    pub scan_points: usize,
    pub tol_root: f64,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self { tol: 1e-10, scan_points: 10_000, tol_root: 1e-13 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Representation {
    LogDerivative,
    Phase,
}

/// One accepted integration point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiccatiState {
    pub x: f64,
    /// `Phase` where `kappa^2 > 0`, `LogDerivative` elsewhere.
    pub representation: Representation,
    /// `theta` or `P` according to `representation`.
    pub value: f64,
    /// Unwrapped `theta`.
    pub accumulated_phase: f64,
}

struct Flow<'a> {
    p: &'a Potential,
    energy: f64,
    kinetic: f64,
    s0_4: f64,
}

impl<'a> Flow<'a> {
    fn new(p: &'a Potential, energy: f64, tps: &[f64], domain: &Domain, x_m: f64) -> Self {
        let kinetic = p.kinetic_factor();
        let mut s0 = f64::INFINITY;
        for &t in tps {
            let (_, dv) = p.value_and_slope(t);
            let g = (kinetic * dv).abs();
            if g > 0.0 && g.is_finite() {
                s0 = s0.min(1e-2 * g.cbrt());
            }
        }
        if !s0.is_finite() {
            let k = p.kappa_sq(x_m.max(domain.x_c).min(domain.x_d), energy).abs().sqrt();
            s0 = 1e-6 * k.max(1.0 / domain.width());
        }
        Self { p, energy, kinetic, s0_4: s0.powi(4) }
    }

    /// `(kappa^2, s, s'/s)` at `x`.
    #[inline]
    fn local(&self, x: f64) -> (f64, f64, f64) {
        let (v, dv) = self.p.value_and_slope(x);
        let k2 = self.kinetic * (self.energy - v);
        let dk2 = -self.kinetic * dv;
        let s4 = k2 * k2 + self.s0_4;
        let s = s4.sqrt().sqrt();
        (k2, s, 0.5 * k2 * dk2 / s4)
    }

    #[inline]
    fn rhs(&self, x: f64, y: &[f64; 3]) -> [f64; 3] {
        let (k2, s, ds) = self.local(x);
        let (sn, cs) = y[0].sin_cos();
        let sc = sn * cs;
        let dtheta = k2 / s * cs * cs + s * sn * sn - ds * sc;
        let dlnr = 0.5 * ds * (cs * cs - sn * sn) + (k2 / s - s) * sc;
        let dn = (2.0 * y[1]).exp() * cs * cs / s;
        [dtheta, dlnr, dn]
    }

    #[inline]
    fn rhs1(&self, x: f64, y: &[f64; 1]) -> [f64; 1] {
        let (k2, s, ds) = self.local(x);
        let (sn, cs) = y[0].sin_cos();
        [k2 / s * cs * cs + s * sn * sn - ds * sn * cs]
    }

    /// Angle of a boundary condition.
    fn start_angle(&self, x: f64, side: Side, left: bool) -> f64 {
        let a = match side {
            Side::Wall => FRAC_PI_2,
            Side::Decaying => {
                let (k2, s, _) = self.local(x);
                ((-k2).max(0.0).sqrt() / s).atan()
            }
        };
        if left {
            -a
        } else {
            a
        }
    }
}

/// Turning points inside the domain (empty when there are none).
fn turning_points_in(p: &Potential, energy: f64, domain: &Domain, opts: &FlowOptions) -> Result<Vec<f64>> {
    match locate_turning_points(p, energy, (domain.x_c, domain.x_d), opts.scan_points, opts.tol_root) {
        Ok(t) => Ok(t),
        Err(Error::NoTurningPoints { .. }) => Ok(Vec::new()),
        Err(e) => Err(e),
    }
}

/// Allowed span `[x_a, x_b]`: outermost turning points, or walls where the
/// domain edge is classically allowed.
fn allowed_span(p: &Potential, energy: f64, domain: &Domain, tps: &[f64]) -> (f64, f64) {
    let left_allowed = domain.left == Side::Wall && p.kappa_sq(domain.x_c, energy) > 0.0;
    let right_allowed = domain.right == Side::Wall && p.kappa_sq(domain.x_d, energy) > 0.0;
    let a = if left_allowed || tps.is_empty() { domain.x_c } else { tps[0] };
    let b = if right_allowed || tps.is_empty() { domain.x_d } else { *tps.last().unwrap() };
    (a, b)
}

/// Ordered stop points strictly between `from` and `to`.
fn stops(from: f64, to: f64, extra: &[f64]) -> Vec<f64> {
    let (lo, hi) = (from.min(to), from.max(to));
    let mut v: Vec<f64> = extra.iter().copied().filter(|&x| x > lo && x < hi).collect();
    v.sort_by(|a, b| a.total_cmp(b));
    v.dedup();
    if to < from {
        v.reverse();
    }
    v.push(to);
    v
}

struct Sweep<'f, 'p> {
    flow: &'f Flow<'p>,
    tol: f64,
    span: (f64, f64),
    width: f64,
}

impl Sweep<'_, '_> {
    fn solver<const N: usize>(&self, a: f64, b: f64) -> ode::Dopri<N> {
        let mid = 0.5 * (a + b);
        let inside = mid >= self.span.0 && mid <= self.span.1;
        let h_max = if inside { ((self.span.1 - self.span.0) / 200.0).max(1e-300) } else { (b - a).abs() };
        let mut abs = [self.tol; N];
        let rel = [self.tol; N];
        if N == 3 {
            abs[2] = f64::INFINITY;
        }
        ode::Dopri { tol: ode::Tolerance { abs, rel }, h_max, h_min: 1e-15 * self.width, max_steps: 2_000_000 }
    }

    /// Integrates the scalar angle equation through the given stop points,
    /// returning the angle at each of them.
    fn angle(&self, from: f64, to: f64, theta0: f64, knots: &[f64], stats: &mut ode::StepStats) -> Result<Vec<(f64, f64)>> {
        let mut out = Vec::new();
        let mut x = from;
        let mut y = [theta0];
        for stop in stops(from, to, knots) {
            let solver = self.solver::<1>(x, stop);
            let h0 = (stop - x).abs() / 50.0;
            y = solver.integrate(|t, y| self.flow.rhs1(t, y), x, y, stop, h0, |_, _| {}, stats)?;
            out.push((stop, y[0]));
            x = stop;
        }
        Ok(out)
    }

    /// Angle, log-amplitude and norm integral at each stop point.
    fn full(&self, from: f64, to: f64, knots: &[f64], y0: [f64; 3], stats: &mut ode::StepStats) -> Result<Vec<(f64, [f64; 3])>> {
        let mut out = Vec::new();
        let mut x = from;
        let mut y = y0;
        for stop in stops(from, to, knots) {
            let solver = self.solver::<3>(x, stop);
            let h0 = (stop - x).abs() / 50.0;
            y = solver.integrate(|t, y| self.flow.rhs(t, y), x, y, stop, h0, |_, _| {}, stats)?;
            out.push((stop, y));
            x = stop;
        }
        Ok(out)
    }
}

/// Result of integrating both half-solutions to the matching point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matching {
    pub energy: f64,
    pub x_m: f64,
    pub theta_left: f64,
    pub theta_right: f64,
    /// Start angles at `x_C` and `x_D`.
    pub theta_c: f64,
    pub theta_d: f64,
    pub turning_points: Vec<f64>,
    /// Allowed span used for the phase decomposition.
    pub span: (f64, f64),
    /// Angle of the joined solution at the span ends (left solution left of `x_m`,
    /// right solution shifted by the mismatch to its right).
    pub theta_span: (f64, f64),
    pub steps: usize,
}

impl Matching {
    /// `J = 1 + (theta_L - theta_R)/pi`, equal to `n + 1` at the `n`-th level.
    pub fn action(&self) -> f64 {
        1.0 + (self.theta_left - self.theta_right) / PI
    }

    /// Phase accumulated across the allowed span with the end angles taken at
    /// their turning-point values.
    pub fn accumulated_phase(&self) -> f64 {
        pin(self.theta_span.1) - pin(self.theta_span.0)
    }

    /// Zeros of the joined solution strictly inside the domain.
    pub fn node_count(&self) -> usize {
        count_nodes(self.theta_c, self.theta_d, self.theta_left, self.theta_right)
    }
}

fn setup<'a>(p: &'a Potential, energy: f64, domain: &Domain, x_m: f64, opts: &FlowOptions) -> Result<(Flow<'a>, Vec<f64>, (f64, f64))> {
    let tps = turning_points_in(p, energy, domain, opts)?;
    let flow = Flow::new(p, energy, &tps, domain, x_m);
    let span = allowed_span(p, energy, domain, &tps);
    Ok((flow, tps, span))
}

/// Two-sided integration: left solution `x_C -> x_m`, right solution `x_D -> x_m`.
pub fn match_at(p: &Potential, energy: f64, domain: &Domain, x_m: f64, opts: &FlowOptions) -> Result<Matching> {
    let (flow, tps, span) = setup(p, energy, domain, x_m, opts)?;
    let sweep = Sweep { flow: &flow, tol: opts.tol, span, width: domain.width() };
    let mut stats = ode::StepStats::default();
    let theta_c = flow.start_angle(domain.x_c, domain.left, true);
    let theta_d = flow.start_angle(domain.x_d, domain.right, false);
    let x_m = x_m.clamp(domain.x_c, domain.x_d);
    let knots_left: Vec<f64> = [span.0].into_iter().chain(tps.iter().copied()).collect();
    let left = if x_m > domain.x_c { sweep.angle(domain.x_c, x_m, theta_c, &knots_left, &mut stats)? } else { vec![(x_m, theta_c)] };
    let knots_right: Vec<f64> = [span.1].into_iter().chain(tps.iter().copied()).collect();
    let right = if x_m < domain.x_d { sweep.angle(domain.x_d, x_m, theta_d, &knots_right, &mut stats)? } else { vec![(x_m, theta_d)] };
    let theta_left = left.last().unwrap().1;
    let theta_right = right.last().unwrap().1;
    let shift = theta_left - theta_right;
    let at = |x: f64| -> f64 {
        if x <= x_m {
            if x <= domain.x_c {
                return theta_c;
            }
            left.iter().find(|(k, _)| *k == x).map(|v| v.1).unwrap_or(theta_left)
        } else {
            if x >= domain.x_d {
                return theta_d + shift;
            }
            right.iter().find(|(k, _)| *k == x).map(|v| v.1 + shift).unwrap_or(theta_left)
        }
    };
    let theta_span = (at(span.0), at(span.1));
    Ok(Matching {
        energy,
        x_m,
        theta_left,
        theta_right,
        theta_c,
        theta_d,
        turning_points: tps,
        span,
        theta_span,
        steps: stats.accepted + stats.rejected,
    })
}

/// `J(E)` from the continuum engine.
pub fn action(p: &Potential, energy: f64, domain: &Domain, x_m: f64, opts: &FlowOptions) -> Result<f64> {
    Ok(match_at(p, energy, domain, x_m, opts)?.action())
}

/// Single sweep from `x_D` to `x_C` starting from the decaying (or wall) right
/// boundary condition, recording every accepted step.
pub fn integrate_phase(p: &Potential, energy: f64, domain: &Domain, opts: &FlowOptions) -> Result<Vec<RiccatiState>> {
    if !(opts.tol > 0.0 && opts.tol <= 1e-4) {
        return Err(Error::NonConvergence(format!("tolerance {} outside (0, 1e-4]", opts.tol)));
    }
    let (flow, tps, span) = setup(p, energy, domain, domain.x_d, opts)?;
    let sweep = Sweep { flow: &flow, tol: opts.tol, span, width: domain.width() };
    let theta_d = flow.start_angle(domain.x_d, domain.right, false);
    let mut states = Vec::new();
    let mut record = |x: f64, theta: f64| {
        let (k2, s, _) = flow.local(x);
        let (representation, value) =
            if k2 > 0.0 { (Representation::Phase, theta) } else { (Representation::LogDerivative, s * theta.tan()) };
        states.push(RiccatiState { x, representation, value, accumulated_phase: theta });
    };
    record(domain.x_d, theta_d);
    let mut stats = ode::StepStats::default();
    let mut x = domain.x_d;
    let mut y = [theta_d];
    let knots: Vec<f64> = [span.0, span.1].into_iter().chain(tps.iter().copied()).collect();
    for stop in stops(domain.x_d, domain.x_c, &knots) {
        let solver = sweep.solver::<1>(x, stop);
        y = solver.integrate(|t, y| flow.rhs1(t, y), x, y, stop, (stop - x).abs() / 50.0, |t, y| record(t, y[0]), &mut stats)?;
        x = stop;
    }
    Ok(states)
}

/// `∫ kappa dx` over the classically allowed parts of `[a, b]`.
pub fn kappa_integral(p: &Potential, energy: f64, a: f64, b: f64, tps: &[f64]) -> f64 {
    let mut pts: Vec<f64> = vec![a];
    pts.extend(tps.iter().copied().filter(|&t| t > a && t < b));
    pts.push(b);
    let mut total = 0.0;
    for w in pts.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        if p.kappa_sq(mid, energy) > 0.0 {
            total += numeric::integrate(|x| p.kappa_sq(x, energy).max(0.0).sqrt(), w[0], w[1], 1e-13);
        }
    }
    total
}

/// Phase shift `δ = accumulated phase - ∫ kappa dx` over the allowed span.
pub fn delta_integral(m: &Matching, p: &Potential) -> f64 {
    m.accumulated_phase() - kappa_integral(p, m.energy, m.span.0, m.span.1, &m.turning_points)
}

/// Sampled, normalized eigenfunction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WavefunctionTable {
    pub x: Vec<f64>,
    pub psi: Vec<f64>,
    /// Factor applied to the left half-solution (unit amplitude at `x_C`).
    pub normalization: f64,
    pub node_count: usize,
}

/// Largest tolerated `|J - round(J)|` for a trace to count as an eigenstate.
pub const EIGEN_MISMATCH: f64 = 1e-6;

/// Eigenfunction at an eigenvalue, `psi = R cos(theta)/sqrt(s)`: the exponential of
/// `-∫P` with the node sign changes carried by `cos(theta)`.
pub fn reconstruct_wavefunction(
    p: &Potential,
    energy: f64,
    domain: &Domain,
    x_m: f64,
    samples: &[f64],
    opts: &FlowOptions,
) -> Result<WavefunctionTable> {
    let (flow, tps, span) = setup(p, energy, domain, x_m, opts)?;
    let sweep = Sweep { flow: &flow, tol: opts.tol, span, width: domain.width() };
    let x_m = x_m.clamp(domain.x_c, domain.x_d);
    let mut stats = ode::StepStats::default();
    let theta_c = flow.start_angle(domain.x_c, domain.left, true);
    let theta_d = flow.start_angle(domain.x_d, domain.right, false);
    let mut knots: Vec<f64> = tps.clone();
    knots.extend(samples.iter().copied());
    let left = if x_m > domain.x_c {
        sweep.full(domain.x_c, x_m, &knots, [theta_c, 0.0, 0.0], &mut stats)?
    } else {
        vec![(x_m, [theta_c, 0.0, 0.0])]
    };
    let right = if x_m < domain.x_d {
        sweep.full(domain.x_d, x_m, &knots, [theta_d, 0.0, 0.0], &mut stats)?
    } else {
        vec![(x_m, [theta_d, 0.0, 0.0])]
    };
    let yl = left.last().unwrap().1;
    let yr = right.last().unwrap().1;
    let mismatch = (yl[0] - yr[0]) / PI;
    if (mismatch - mismatch.round()).abs() > EIGEN_MISMATCH {
        return Err(Error::NotAnEigenvalue { energy, mismatch: mismatch - mismatch.round() });
    }
    let sign = if (mismatch.round() as i64) % 2 == 0 { 1.0 } else { -1.0 };
    // right solution scaled by sign * exp(ln_c) matches the left one at x_m
    let ln_c = yl[1] - yr[1];
    let reference = yl[1].max(0.0).max(ln_c);
    let norm = (2.0 * -reference).exp() * yl[2] + (2.0 * (ln_c - reference)).exp() * (-yr[2]);
    let ln_norm = 0.5 * norm.ln() + reference;

    let value = |x: f64, y: &[f64; 3], shift: f64, sgn: f64| -> f64 {
        let (_, s, _) = flow.local(x);
        sgn * (y[1] + shift - ln_norm).exp() * y[0].cos() / s.sqrt()
    };
    let mut psi = Vec::with_capacity(samples.len());
    for &x in samples {
        let v = if x < domain.x_c || x > domain.x_d {
            0.0
        } else if x <= x_m {
            if x == domain.x_c {
                value(x, &[theta_c, 0.0, 0.0], 0.0, 1.0)
            } else {
                left.iter().find(|(k, _)| *k == x).map(|(_, y)| value(x, y, 0.0, 1.0)).unwrap_or(0.0)
            }
        } else if x == domain.x_d {
            value(x, &[theta_d, 0.0, 0.0], ln_c, sign)
        } else {
            right.iter().find(|(k, _)| *k == x).map(|(_, y)| value(x, y, ln_c, sign)).unwrap_or(0.0)
        };
        psi.push(v);
    }
    let mut node_count = 0;
    let mut last = 0.0f64;
    for &v in &psi {
        if v != 0.0 {
            if last != 0.0 && (v > 0.0) != (last > 0.0) {
                node_count += 1;
            }
            last = v;
        }
    }
    Ok(WavefunctionTable { x: samples.to_vec(), psi, normalization: (-ln_norm).exp(), node_count })
}
