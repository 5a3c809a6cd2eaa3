//! Piecewise-constant layers: transfer matrices, the backward log-derivative
//! recursion and the discrete phase shift.
//!
//! Angles are `theta = atan(P / s_j)` with `P = -psi'/psi` and `s_j = |kappa_j|` the
//! scale of the layer the angle lives in. Within an allowed layer the recursion
//! `P_j = kappa_j tan(atan(P_{j+1}/kappa_j) - kappa_j h)` is the rotation
//! `theta -> theta - kappa_j h`; at a layer boundary `P` is continuous and the angle
//! is re-expressed in the scale of the neighbouring layer.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};

use crate::discretize::{Discretization, Side};
use crate::error::{Error, Result};

/// Transfer matrix of one layer: maps `(psi, psi')` at the right edge to the left edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayerMatrix {
    pub m11: f64,
    pub m12: f64,
    pub m21: f64,
    pub m22: f64,
}

/// `a*b - c*d` with a compensated error term.
fn diff_of_products(a: f64, b: f64, c: f64, d: f64) -> f64 {
    let cd = c * d;
    let err = (-c).mul_add(d, cd);
    let dop = a.mul_add(b, -cd);
    dop + err
}

impl LayerMatrix {
    pub fn determinant(&self) -> f64 {
        diff_of_products(self.m11, self.m22, self.m12, self.m21)
    }

    pub fn apply(&self, psi: f64, dpsi: f64) -> (f64, f64) {
        (self.m11 * psi + self.m12 * dpsi, self.m21 * psi + self.m22 * dpsi)
    }

    pub fn product(&self, rhs: &LayerMatrix) -> LayerMatrix {
        LayerMatrix {
            m11: self.m11 * rhs.m11 + self.m12 * rhs.m21,
            m12: self.m11 * rhs.m12 + self.m12 * rhs.m22,
            m21: self.m21 * rhs.m11 + self.m22 * rhs.m21,
            m22: self.m21 * rhs.m12 + self.m22 * rhs.m22,
        }
    }
}

pub fn layer_matrix(kappa_sq: f64, h: f64) -> LayerMatrix {
    assert!(h >= 0.0, "layer width must be nonnegative");
    if kappa_sq > 0.0 {
        let k = kappa_sq.sqrt();
        let (s, c) = (k * h).sin_cos();
        LayerMatrix { m11: c, m12: -s / k, m21: k * s, m22: c }
    } else if kappa_sq < 0.0 {
        let a = (-kappa_sq).sqrt();
        let x = a * h;
        let sh = x.sinh();
        // cosh - 1 without cancellation
        let half = (0.5 * x).sinh();
        let cm1 = 2.0 * half * half;
        let ch = 1.0 + cm1;
        let m12 = -sh / a;
        // choose m21 so that the stored entries have determinant 1 as closely as possible
        let m21 = if m12 != 0.0 { (cm1 * (ch + 1.0)) / m12 } else { -a * sh };
        LayerMatrix { m11: ch, m12, m21, m22: ch }
    } else {
        LayerMatrix { m11: 1.0, m12: -h, m21: 0.0, m22: 1.0 }
    }
}

/// One boundary record of a propagated trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseSample {
    pub x: f64,
    /// `P = -psi'/psi`; infinite at a node.
    pub p: f64,
    /// Unwrapped angle in the scale of the layer to the left of `x`.
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseTrace {
    /// Ordered from `x_D` down to `x_C`.
    pub samples: Vec<PhaseSample>,
    /// Phase accumulated over the allowed span (right edge minus left edge).
    pub total_phase: f64,
    /// Discrete phase shift of the allowed span, with the edge angles taken at
    /// their turning-point values (odd multiples of `pi/2`).
    pub delta: f64,
    /// Pinned minus raw edge angles; vanishes as `h -> 0`.
    pub edge_residual: f64,
    /// Allowed-layer sum `Σ kappa_j h`.
    pub kappa_sum: f64,
}

/// Scale used for angles in a layer.
#[inline]
pub(crate) fn layer_scale(kappa_sq: f64, h: f64) -> f64 {
    let s = kappa_sq.abs().sqrt();
    if s * h < 1e-12 {
        1.0 / h
    } else {
        s
    }
}

/// Re-expresses an angle from scale `from` to scale `to` keeping `P` and the branch.
#[inline]
pub(crate) fn rescale(theta: f64, from: f64, to: f64) -> f64 {
    if from == to {
        return theta;
    }
    let k = (theta / PI).round();
    let mut r = theta - k * PI;
    let mut base = k * PI;
    if r <= -FRAC_PI_2 {
        r += PI;
        base -= PI;
    }
    let (sr, cr) = r.sin_cos();
    base + (sr * from).atan2(cr * to)
}

/// Advances an angle across one layer. `dir = +1` moves left to right, `-1` right to left.
#[inline]
pub(crate) fn advance(theta: f64, kappa_sq: f64, h: f64, dir: f64, layer: usize) -> Result<f64> {
    if kappa_sq > 0.0 {
        let inc = kappa_sq.sqrt() * h;
        if inc >= FRAC_PI_2 {
            return Err(Error::StepTooCoarse { layer, increment: inc });
        }
        return Ok(theta + dir * inc);
    }
    let s = layer_scale(kappa_sq, h);
    let (sn, cs) = theta.sin_cos();
    let (y, x) = if kappa_sq < 0.0 {
        // (psi, psi') ∝ (cos, -a sin); hyperbolic propagation divided by cosh
        let t = (s * h).tanh();
        (sn - dir * t * cs, cs - dir * t * sn)
    } else {
        let (psi, dpsi) = (cs, -s * sn);
        (-dpsi / s, psi + dir * h * dpsi)
    };
    let raw = y.atan2(x);
    let mut inc = raw - theta;
    inc -= 2.0 * PI * (inc / (2.0 * PI)).round();
    if inc.abs() >= FRAC_PI_2 {
        return Err(Error::StepTooCoarse { layer, increment: inc });
    }
    Ok(theta + inc)
}

fn start_angle(side: Side, left: bool) -> f64 {
    let a = match side {
        Side::Wall => FRAC_PI_2,
        Side::Decaying => FRAC_PI_4,
    };
    if left {
        -a
    } else {
        a
    }
}

/// Backward recursion from `x_D` with `P(x_D) = p_d`, through every layer.
pub fn propagate_logderivative(d: &Discretization, p_d: f64) -> Result<PhaseTrace> {
    let n = d.layer_count;
    let h = d.h();
    let ks = &d.kappa_sq;
    if !(p_d > 0.0) {
        return Err(Error::NonConvergence(format!("right boundary log-derivative must be positive, got {p_d}")));
    }
    let mut samples = Vec::with_capacity(n + 1);
    let mut s = layer_scale(ks[n - 1], h);
    let mut theta = (p_d / s).atan();
    samples.push(PhaseSample { x: d.x_d, p: p_d, theta });
    let mut jumps = vec![0.0; n + 1];
    let mut at_left_edge = vec![0.0; n];
    for j in (0..n).rev() {
        theta = advance(theta, ks[j], h, -1.0, j)?;
        at_left_edge[j] = theta;
        let x = d.boundary(j);
        let p = s * theta.tan();
        if j > 0 {
            let s_next = layer_scale(ks[j - 1], h);
            if theta.cos() == 0.0 && s_next != s {
                return Err(Error::PoleAtBoundary { boundary: j });
            }
            let moved = rescale(theta, s, s_next);
            jumps[j] = theta - moved;
            theta = moved;
            s = s_next;
        }
        samples.push(PhaseSample { x, p, theta });
    }
    let (first, last) = allowed_span(ks);
    let mut kappa_sum = 0.0;
    let mut delta = 0.0;
    let mut total = 0.0;
    let mut residual = 0.0;
    if let (Some(a), Some(b)) = (first, last) {
        for j in a..=b {
            if ks[j] > 0.0 {
                kappa_sum += ks[j].sqrt() * h;
            }
        }
        // angle at the right edge of layer b, in its own scale, minus angle at the left edge of layer a
        let right = if b + 1 < n { at_left_edge[b + 1] + jumps[b + 1] } else { samples[0].theta };
        let left = at_left_edge[a];
        total = right - left;
        let pinned = pin(right) - pin(left);
        residual = pinned - total;
        delta = pinned - kappa_sum;
    }
    Ok(PhaseTrace { samples, total_phase: total, delta, edge_residual: residual, kappa_sum })
}

/// Nearest odd multiple of `pi/2`.
pub(crate) fn pin(theta: f64) -> f64 {
    ((theta - FRAC_PI_2) / PI).round() * PI + FRAC_PI_2
}

fn allowed_span(ks: &[f64]) -> (Option<usize>, Option<usize>) {
    (ks.iter().position(|&k| k > 0.0), ks.iter().rposition(|&k| k > 0.0))
}

/// `δ(n)`: sum over the interior boundaries of the allowed span of the angle jumps
/// `atan(P/kappa_{i+1}) - atan(P/kappa_i)`, plus any phase picked up in forbidden
/// layers enclosed by the span, with the outer edge angles at their turning-point
/// values.
pub fn discrete_delta(trace: &PhaseTrace, _d: &Discretization) -> f64 {
    trace.delta
}

/// Both half-solutions propagated to a common boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Matching {
    pub theta_left: f64,
    pub theta_right: f64,
    pub theta_c: f64,
    pub theta_d: f64,
    pub boundary: usize,
}

impl Matching {
    pub fn action(&self) -> f64 {
        1.0 + (self.theta_left - self.theta_right) / PI
    }

    pub fn node_count(&self) -> usize {
        count_nodes(self.theta_c, self.theta_d, self.theta_left, self.theta_right)
    }
}

/// Zeros strictly inside the domain of the solution joined from a left part
/// (`theta_c -> theta_left`) and a right part (`theta_right <- theta_d`).
pub fn count_nodes(theta_c: f64, theta_d: f64, theta_left: f64, theta_right: f64) -> usize {
    let end = theta_d + theta_left - theta_right;
    let lo = theta_c + 1e-7;
    let hi = end - 1e-7;
    if hi <= lo {
        return 0;
    }
    let first = ((lo / PI) - 0.5).floor() as i64 + 1;
    let last = ((hi / PI) - 0.5).ceil() as i64 - 1;
    (last - first + 1).max(0) as usize
}

/// Two-sided propagation: the left solution from `x_C` to boundary `m`, the right
/// solution from `x_D` to the same boundary, both expressed in the scale of layer `m`
/// (or of layer `m-1` when `m` is the right end).
pub fn match_at(kappa_sq: &[f64], h: f64, left: Side, right: Side, m: usize) -> Result<Matching> {
    let n = kappa_sq.len();
    let m = m.min(n);
    let common = if m < n { layer_scale(kappa_sq[m], h) } else { layer_scale(kappa_sq[n - 1], h) };

    let theta_c = start_angle(left, true);
    let theta_d = start_angle(right, false);
    let mut theta_l = theta_c;
    let mut s = layer_scale(kappa_sq[0], h);
    for j in 0..m {
        theta_l = advance(theta_l, kappa_sq[j], h, 1.0, j)?;
        let s_next = if j + 1 < n { layer_scale(kappa_sq[j + 1], h) } else { s };
        theta_l = rescale(theta_l, s, s_next);
        s = s_next;
    }
    theta_l = rescale(theta_l, s, common);

    let mut theta_r = theta_d;
    let mut s = layer_scale(kappa_sq[n - 1], h);
    for j in (m..n).rev() {
        theta_r = advance(theta_r, kappa_sq[j], h, -1.0, j)?;
        if j > m {
            let s_next = layer_scale(kappa_sq[j - 1], h);
            theta_r = rescale(theta_r, s, s_next);
            s = s_next;
        }
    }
    theta_r = rescale(theta_r, s, common);
    Ok(Matching { theta_left: theta_l, theta_right: theta_r, theta_c, theta_d, boundary: m })
}

/// Action variable `J` of the layered problem at the energy of `kappa_sq`.
pub fn action(kappa_sq: &[f64], h: f64, left: Side, right: Side, m: usize) -> Result<f64> {
    Ok(match_at(kappa_sq, h, left, right, m)?.action())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::build_layers;
    use crate::potential::Potential;
    use proptest::prelude::*;
    use std::collections::BTreeMap;

    fn builtin(name: &str) -> Potential {
        Potential::builtin(name, &BTreeMap::new()).unwrap()
    }

    fn close(a: LayerMatrix, b: [f64; 4], tol: f64) {
        let got = [a.m11, a.m12, a.m21, a.m22];
        for (x, y) in got.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{got:?} vs {b:?}");
        }
    }

    #[test]
    fn quarter_period_layer() {
        close(layer_matrix(1.0, FRAC_PI_2), [0.0, -1.0, 1.0, 0.0], 1e-15);
        close(layer_matrix(1.0, 0.0), [1.0, 0.0, 0.0, 1.0], 0.0);
        close(layer_matrix(0.0, 0.3), [1.0, -0.3, 0.0, 1.0], 0.0);
    }

    #[test]
    fn hyperbolic_layer() {
        let m = layer_matrix(-1.0, 1.0);
        close(m, [1f64.cosh(), -1f64.sinh(), -1f64.sinh(), 1f64.cosh()], 1e-15);
        assert!((m.determinant() - 1.0).abs() <= 4.0 * f64::EPSILON);
        close(m, [1.54308, -1.17520, -1.17520, 1.54308], 1e-5);
    }

    proptest! {
        #[test]
        fn unimodular(kappa_sq in -1e6f64..1e6, frac in 0.0f64..1.0) {
            // widths within the step contract |kappa| h <= 1
            let h = frac / kappa_sq.abs().sqrt().max(1.0);
            let det = layer_matrix(kappa_sq, h).determinant();
            prop_assert!((det - 1.0).abs() <= 4.0 * f64::EPSILON, "det - 1 = {:e}", det - 1.0);
        }

        #[test]
        fn arctan_difference_identity(kappa in 0.1f64..10.0, p in -10.0f64..10.0, dp in -1e-4f64..1e-4) {
            let lhs = ((p + dp) / kappa).atan() - (p / kappa).atan();
            let rhs = kappa * dp / (kappa * kappa + p * p);
            prop_assert!((lhs - rhs).abs() <= 2.0 * dp * dp / (kappa * kappa) + 1e-15);
        }
    }

    #[test]
    fn forbidden_fixed_point() {
        let p = Potential::expression("4", &BTreeMap::new(), crate::potential::DomainKind::FullLine).unwrap();
        let d = build_layers(&p, 0.0, 0.0, 5.0, 50);
        let a = 8f64.sqrt();
        let trace = propagate_logderivative(&d, a).unwrap();
        for s in &trace.samples {
            assert!((s.p - a).abs() < 1e-12 * a, "{s:?}");
        }
    }

    #[test]
    fn matrix_products_match_recursion() {
        let p = builtin("harmonic_1d");
        let d = build_layers(&p, 2.5, -7.0, 7.0, 700);
        let a = (-d.kappa_sq[d.layer_count - 1]).sqrt();
        let trace = propagate_logderivative(&d, a).unwrap();
        let (mut psi, mut dpsi) = (1.0, -a);
        for (k, j) in (0..d.layer_count).rev().enumerate() {
            let m = layer_matrix(d.kappa_sq[j], d.h());
            (psi, dpsi) = m.apply(psi, dpsi);
            let norm = psi.abs().max(dpsi.abs());
            psi /= norm;
            dpsi /= norm;
            let p_matrix = -dpsi / psi;
            let p_rec = trace.samples[k + 1].p;
            if p_rec.abs() < 1e6 {
                assert!((p_matrix - p_rec).abs() <= 1e-10 * p_rec.abs().max(1.0), "layer {j}: {p_matrix} vs {p_rec}");
            }
        }
    }

    #[test]
    fn infinite_well_phase() {
        let p = builtin("infinite_well");
        let e = PI * PI / 2.0;
        let d = build_layers(&p, e, 0.0, 1.0, 100);
        let j = action(&d.kappa_sq, d.h(), Side::Wall, Side::Wall, 0).unwrap();
        assert!((j - 1.0).abs() < 1e-13);
        let trace = propagate_logderivative(&d, 1e300).unwrap();
        assert!((trace.total_phase - PI).abs() < 1e-12);
        assert!(discrete_delta(&trace, &d).abs() < 1e-12);
    }

    #[test]
    fn step_contract_violation() {
        let p = builtin("infinite_well");
        let d = build_layers(&p, 200.0, 0.0, 1.0, 10);
        assert!(matches!(action(&d.kappa_sq, d.h(), Side::Wall, Side::Wall, 0), Err(Error::StepTooCoarse { .. })));
    }

    fn harmonic_trace(n: usize) -> PhaseTrace {
        let p = builtin("harmonic_1d");
        let d = build_layers(&p, 0.5, -6.6, 6.6, n);
        let a = (-d.kappa_sq[n - 1]).sqrt();
        propagate_logderivative(&d, a).unwrap()
    }

    #[test]
    fn harmonic_phase_converges() {
        let traces: Vec<_> = [1320, 2640, 5280, 10560].into_iter().map(harmonic_trace).collect();
        for t in &traces {
            assert!((t.total_phase + t.edge_residual - PI).abs() < 1e-12);
        }
        let errs: Vec<f64> = traces.iter().map(|t| (t.delta - FRAC_PI_2).abs()).collect();
        assert!(errs[3] < 1e-4, "{errs:?}");
        assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
        let raw: Vec<f64> = traces.iter().map(|t| (t.total_phase - PI).abs()).collect();
        assert!(raw.windows(2).all(|w| w[1] < w[0]), "{raw:?}");
    }

    #[test]
    fn monotone_action() {
        let p = builtin("double_oscillator");
        let d = build_layers(&p, 0.0, -7.0, 7.0, 4000);
        let mut prev = f64::NEG_INFINITY;
        for k in 0..50 {
            let e = 1.0 + 2.5 * k as f64;
            let ks = d.kappa_sq_at(e);
            let j = action(&ks, d.h(), Side::Decaying, Side::Decaying, 1000).unwrap();
            assert!(j > prev);
            prev = j;
        }
    }
}
