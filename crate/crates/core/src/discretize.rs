//! Turning points, truncation of the infinite domain and the uniform layer grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{self, roots};
use crate::potential::{DomainKind, Edge, Potential};

/// Boundary condition at one end of a truncated domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    /// Decaying tail matched to the local `alpha`.
    Decaying,
    /// `psi = 0`.
    Wall,
}

/// A finite interval standing in for the physical domain, with its boundary conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub x_c: f64,
    pub x_d: f64,
    pub left: Side,
    pub right: Side,
}

impl Domain {
    pub fn width(&self) -> f64 {
        self.x_d - self.x_c
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TruncationOptions {
    pub decay_budget: f64,
    pub scan_points: usize,
    pub tol_root: f64,
    /// Distance of a regularized wall from the singular point.
    pub epsilon: f64,
}

impl Default for TruncationOptions {
    fn default() -> Self {
        Self { decay_budget: 20.0, scan_points: 10_000, tol_root: 1e-12, epsilon: 1e-8 }
    }
}

fn alpha(p: &Potential, x: f64, energy: f64) -> f64 {
    (-p.kappa_sq(x, energy)).max(0.0).sqrt()
}

/// Position and value of the minimum of `V` (grid scan over the search interval,
/// widened while the minimum sits on an open end, then golden-section refinement).
/// Singular points are skipped and never refined towards.
pub fn potential_minimum(p: &Potential) -> (f64, f64) {
    let (mut lo, mut hi) = p.search_interval();
    let width = hi - lo;
    let left_open = p.left_edge() == Edge::Open && !matches!(p.domain(), DomainKind::HalfLineRadial);
    let right_open = p.right_edge() == Edge::Open;
    for _ in 0..40 {
        let (i, n, step, best) = scan_minimum(p, lo, hi);
        if i == n && right_open {
            hi += width.max(hi - lo);
            continue;
        }
        if i == 0 && left_open {
            lo -= width.max(hi - lo);
            continue;
        }
        let finite = |x: f64| p.contains(x) && p.value(x).is_finite();
        if i == 0 || i == n || !finite(best.0 - step) || !finite(best.0 + step) {
            return best;
        }
        return golden(p, best, step);
    }
    scan_minimum(p, lo, hi).3
}

fn scan_minimum(p: &Potential, lo: f64, hi: f64) -> (usize, usize, f64, (f64, f64)) {
    let n = 4000;
    let step = (hi - lo) / n as f64;
    let mut best = (f64::NAN, f64::INFINITY);
    let mut best_i = 0;
    for i in 0..=n {
        let x = lo + step * i as f64;
        if !p.contains(x) {
            continue;
        }
        let v = p.value(x);
        if v.is_finite() && v < best.1 {
            best = (x, v);
            best_i = i;
        }
    }
    (best_i, n, step, best)
}

fn golden(p: &Potential, best: (f64, f64), step: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (best.0 - step, best.0 + step);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (p.value(c), p.value(d));
    for _ in 0..100 {
        if (b - a).abs() <= 1e-15 * (1.0 + best.0.abs()) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = p.value(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = p.value(d);
        }
    }
    let x = 0.5 * (a + b);
    let v = p.value(x);
    if v < best.1 {
        (x, v)
    } else {
        best
    }
}

/// Sorted roots of `V(x) = E` inside `bracket`, found by a sign-change scan and
/// bisection.
pub fn locate_turning_points(
    p: &Potential,
    energy: f64,
    bracket: (f64, f64),
    scan_points: usize,
    tol_root: f64,
) -> Result<Vec<f64>> {
    let (lo, hi) = bracket;
    if !(hi > lo) || p.value(lo).is_nan() || p.value(hi).is_nan() {
        return Err(Error::BracketTooNarrow { lo, hi });
    }
    let n = scan_points.max(2);
    let step = (hi - lo) / n as f64;
    let sign = |x: f64| p.value(x) - energy >= 0.0;
    let mut roots_found = Vec::new();
    let mut x_prev = lo;
    let mut s_prev = sign(lo);
    for i in 1..=n {
        let x = if i == n { hi } else { lo + step * i as f64 };
        let s = sign(x);
        if s != s_prev {
            let r = roots::bisect(|y| p.value(y) - energy, x_prev, x, tol_root);
            roots_found.push(r);
        }
        x_prev = x;
        s_prev = s;
    }
    if roots_found.is_empty() {
        return Err(Error::NoTurningPoints { energy });
    }
    Ok(roots_found)
}

/// Position of a (possibly regularized) wall.
fn wall_position(edge: Edge, epsilon: f64, left: bool) -> Option<f64> {
    match edge {
        Edge::Open => None,
        Edge::Wall(a) => Some(a),
        Edge::RegularizedWall(a) => Some(if left { a + epsilon } else { a - epsilon }),
    }
}

/// Interval enclosing every classically allowed point at energy `E`: walls where
/// present, otherwise the search interval widened until `V > E` at its ends.
pub fn enclosing_bracket(p: &Potential, energy: f64, epsilon: f64) -> Result<(f64, f64)> {
    let (s_lo, s_hi) = p.search_interval();
    let width = s_hi - s_lo;
    let lo = match wall_position(p.left_edge(), epsilon, true) {
        Some(a) => a,
        None => {
            let radial = matches!(p.domain(), DomainKind::HalfLineRadial);
            let mut x = if radial { s_lo + 1e-3 * width } else { s_lo };
            let mut k = 0;
            while !(p.value(x) > energy && p.value_and_slope(x).1 <= 0.0) {
                k += 1;
                if k > 200 {
                    return Err(Error::UnboundedDirection { energy, direction: "left" });
                }
                x = if radial { 0.5 * x } else { x - width * (1u64 << k.min(40)) as f64 };
            }
            x
        }
    };
    let hi = match wall_position(p.right_edge(), epsilon, false) {
        Some(b) => b,
        None => {
            let mut x = s_hi;
            let mut k = 0;
            // beyond x the potential must stay above E: rising, or falling onto a
            // threshold from above
            let beyond = |x: f64| {
                let (v, dv) = p.value_and_slope(x);
                v > energy && (dv >= 0.0 || p.threshold().is_some_and(|t| v >= t && t >= energy))
            };
            while !beyond(x) {
                k += 1;
                if k > 60 {
                    return Err(Error::UnboundedDirection { energy, direction: "right" });
                }
                x += width * (1u64 << k.min(40)) as f64;
            }
            x
        }
    };
    Ok((lo, hi))
}

/// Turning points of `V(x) = E` over the whole domain. An empty list is returned
/// only when both ends are walls and no soft turning point exists.
pub fn turning_points(p: &Potential, energy: f64, opts: &TruncationOptions) -> Result<Vec<f64>> {
    let bracket = enclosing_bracket(p, energy, opts.epsilon)?;
    match locate_turning_points(p, energy, bracket, opts.scan_points, opts.tol_root) {
        Err(Error::NoTurningPoints { .. })
            if p.left_edge() != Edge::Open && p.right_edge() != Edge::Open && p.value(bracket.0) < energy =>
        {
            Ok(Vec::new())
        }
        other => other,
    }
}

/// Walks away from `start` (a turning point, where `alpha` vanishes) until the
/// accumulated `∫ alpha dx` equals `budget`. `toward_origin` marches geometrically
/// towards `x = 0` for radial problems.
fn march(p: &Potential, energy: f64, start: f64, dir: f64, budget: f64, scale: f64, toward_origin: bool) -> Result<f64> {
    let direction = if dir > 0.0 { "right" } else { "left" };
    let mut acc = 0.0;
    let mut x = start;
    let mut step = scale;
    for _ in 0..400 {
        let next = if toward_origin { 0.5 * x } else { x + dir * step };
        let piece = numeric::integrate(|y| alpha(p, y, energy), x.min(next), x.max(next), 1e-12);
        if !piece.is_finite() {
            return Err(Error::UnboundedDirection { energy, direction });
        }
        if acc + piece >= budget {
            let remaining = budget - acc;
            let g = |y: f64| Ok(numeric::integrate(|t| alpha(p, t, energy), x.min(y), x.max(y), 1e-13) - remaining);
            let opts = roots::BrentOptions { x_tol: 1e-14, ..Default::default() };
            return roots::brent(g, x, next, -remaining, acc + piece - budget, opts);
        }
        acc += piece;
        x = next;
        step *= 2.0;
        if !x.is_finite() || x.abs() > 1e12 {
            break;
        }
    }
    Err(Error::UnboundedDirection { energy, direction })
}

/// Truncation points `(x_C, x_D)` where the WKB decay integral from the outermost
/// turning points reaches `decay_budget`; walls truncate exactly.
pub fn truncate_domain(p: &Potential, energy: f64, decay_budget: f64) -> Result<(f64, f64)> {
    let opts = TruncationOptions { decay_budget, ..Default::default() };
    let d = domain_at(p, energy, &opts)?;
    Ok((d.x_c, d.x_d))
}

/// Full truncated domain with boundary conditions at energy `E`.
pub fn domain_at(p: &Potential, energy: f64, opts: &TruncationOptions) -> Result<Domain> {
    let tps = turning_points(p, energy, opts)?;
    let first = tps.first().copied().ok_or(Error::NoTurningPoints { energy });
    let last = tps.last().copied().ok_or(Error::NoTurningPoints { energy });
    domain_between(p, energy, first, last, opts)
}

/// Domain whose decaying ends are measured from the given innermost-forbidden
/// points (normally the outermost turning points).
pub fn domain_between(p: &Potential, energy: f64, first: Result<f64>, last: Result<f64>, opts: &TruncationOptions) -> Result<Domain> {
    let (s_lo, s_hi) = p.search_interval();
    let scale = 1e-2 * (s_hi - s_lo);
    let (x_c, left) = match wall_position(p.left_edge(), opts.epsilon, true) {
        Some(a) => (a, Side::Wall),
        None => {
            let radial = matches!(p.domain(), DomainKind::HalfLineRadial);
            (march(p, energy, first?, -1.0, opts.decay_budget, scale, radial)?, Side::Decaying)
        }
    };
    let (x_d, right) = match wall_position(p.right_edge(), opts.epsilon, false) {
        Some(b) => (b, Side::Wall),
        None => (march(p, energy, last?, 1.0, opts.decay_budget, scale, false)?, Side::Decaying),
    };
    Ok(Domain { x_c, x_d, left, right })
}

/// The layered potential at one trial energy.
#[derive(Debug, Clone, PartialEq)]
pub struct Discretization {
    pub energy: f64,
    pub x_c: f64,
    pub x_d: f64,
    pub layer_count: usize,
    /// `V` at the layer midpoints.
    pub v_mid: Vec<f64>,
    /// `2m(E - V_j)/hbar^2` per layer.
    pub kappa_sq: Vec<f64>,
    /// Positions where `V = E`, refined from the layer sign pattern.
    pub turning_points: Vec<f64>,
    kinetic: f64,
}

impl Discretization {
    pub fn h(&self) -> f64 {
        (self.x_d - self.x_c) / self.layer_count as f64
    }

    /// Left edge of layer `j` (`j = layer_count` gives `x_D`).
    pub fn boundary(&self, j: usize) -> f64 {
        if j == self.layer_count {
            self.x_d
        } else {
            self.x_c + self.h() * j as f64
        }
    }

    pub fn midpoint(&self, j: usize) -> f64 {
        self.x_c + self.h() * (j as f64 + 0.5)
    }

    /// Same layers at another trial energy.
    pub fn at_energy(&self, p: &Potential, energy: f64) -> Self {
        let mut d = Self {
            energy,
            x_c: self.x_c,
            x_d: self.x_d,
            layer_count: self.layer_count,
            kappa_sq: self.v_mid.iter().map(|v| self.kinetic * (energy - v)).collect(),
            v_mid: self.v_mid.clone(),
            turning_points: Vec::new(),
            kinetic: self.kinetic,
        };
        d.turning_points = d.refine_turning_points(p);
        d
    }

    /// Only the per-layer `kappa^2` for another energy; turning points are left empty.
    pub fn kappa_sq_at(&self, energy: f64) -> Vec<f64> {
        self.v_mid.iter().map(|v| self.kinetic * (energy - v)).collect()
    }

    fn refine_turning_points(&self, p: &Potential) -> Vec<f64> {
        let mut out = Vec::new();
        for j in 1..self.layer_count {
            let (a, b) = (self.kappa_sq[j - 1], self.kappa_sq[j]);
            if (a > 0.0) != (b > 0.0) {
                let r = roots::bisect(|y| p.value(y) - self.energy, self.midpoint(j - 1), self.midpoint(j), 1e-14);
                out.push(r);
            }
        }
        out
    }
}

/// Uniform layers over `[x_C, x_D]` with `V` sampled at the midpoints.
pub fn build_layers(p: &Potential, energy: f64, x_c: f64, x_d: f64, layer_count: usize) -> Discretization {
    assert!(layer_count >= 3 && x_c < x_d, "need at least 3 layers over a nonempty interval");
    let h = (x_d - x_c) / layer_count as f64;
    let v_mid: Vec<f64> = (0..layer_count).map(|j| p.value(x_c + h * (j as f64 + 0.5))).collect();
    let proto = Discretization {
        energy,
        x_c,
        x_d,
        layer_count,
        v_mid,
        kappa_sq: Vec::new(),
        turning_points: Vec::new(),
        kinetic: p.kinetic_factor(),
    };
    proto.at_energy(p, energy)
}
