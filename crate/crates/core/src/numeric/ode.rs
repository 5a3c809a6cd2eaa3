//! Adaptive Dormand–Prince 5(4) integrator for small fixed-size systems.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth-order minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Debug, Clone, Copy)]
pub struct Tolerance<const N: usize> {
    pub abs: [f64; N],
    pub rel: [f64; N],
}

#[derive(Debug, Clone, Copy)]
pub struct Dopri<const N: usize> {
    pub tol: Tolerance<N>,
    pub h_max: f64,
    pub h_min: f64,
    pub max_steps: usize,
}

#[derive(Debug, Default, Clone, Copy)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        *o += h * acc;
    }
    out
}

impl<const N: usize> Dopri<N> {
    /// Integrates `y' = f(x, y)` from `x0` to `x1` (either direction), landing exactly
    /// on `x1`. `h0` is a trial step magnitude. `observe` sees every accepted point.
    pub fn integrate<F, O>(
        &self,
        mut f: F,
        x0: f64,
        y0: [f64; N],
        x1: f64,
        h0: f64,
        mut observe: O,
        stats: &mut StepStats,
    ) -> Result<[f64; N]>
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
        O: FnMut(f64, &[f64; N]),
    {
        let span = x1 - x0;
        if span == 0.0 {
            return Ok(y0);
        }
        let dir = span.signum();
        let mut x = x0;
        let mut y = y0;
        let mut h = h0.abs().min(self.h_max).min(span.abs()).max(self.h_min);
        let mut k1 = f(x, &y);
        for _ in 0..self.max_steps {
            let remaining = (x1 - x) * dir;
            if remaining <= 0.0 {
                return Ok(y);
            }
            let last = h >= remaining;
            let step = if last { remaining } else { h } * dir;

            let k2 = f(x + C2 * step, &axpy(&y, step, &[(A21, &k1)]));
            let k3 = f(x + C3 * step, &axpy(&y, step, &[(A31, &k1), (A32, &k2)]));
            let k4 = f(x + C4 * step, &axpy(&y, step, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
            let k5 = f(x + C5 * step, &axpy(&y, step, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
            let k6 = f(x + step, &axpy(&y, step, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
            let y_new = axpy(&y, step, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
            let x_new = if last { x1 } else { x + step };
            let k7 = f(x_new, &y_new);

            let mut err: f64 = 0.0;
            for i in 0..N {
                let e = step * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let scale = self.tol.abs[i] + self.tol.rel[i] * y[i].abs().max(y_new[i].abs());
                err = err.max((e / scale).abs());
            }
            if !err.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
                err = 1e10;
            }

            if err <= 1.0 {
                stats.accepted += 1;
                x = x_new;
                y = y_new;
                k1 = k7;
                observe(x, &y);
                if last {
                    return Ok(y);
                }
                let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                h = (h * factor).min(self.h_max);
            } else {
                stats.rejected += 1;
                h *= (0.9 * err.powf(-0.25)).clamp(0.1, 0.9);
                if h < self.h_min {
                    return Err(Error::ToleranceNotMet { x });
                }
            }
        }
        Err(Error::ToleranceNotMet { x })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solver(tol: f64) -> Dopri<2> {
        Dopri {
            tol: Tolerance { abs: [tol; 2], rel: [tol; 2] },
            h_max: 1.0,
            h_min: 1e-14,
            max_steps: 100_000,
        }
    }

    #[test]
    fn harmonic_rotation_forward_and_backward() {
        let f = |_x: f64, y: &[f64; 2]| [y[1], -y[0]];
        let mut stats = StepStats::default();
        let end = solver(1e-12).integrate(f, 0.0, [0.0, 1.0], 10.0, 0.1, |_, _| {}, &mut stats).unwrap();
        assert!((end[0] - 10f64.sin()).abs() < 1e-10);
        assert!((end[1] - 10f64.cos()).abs() < 1e-10);
        let back = solver(1e-12).integrate(f, 10.0, end, 0.0, 0.1, |_, _| {}, &mut stats).unwrap();
        assert!(back[0].abs() < 1e-10 && (back[1] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn step_underflow_is_reported() {
        // finite-time blow-up of y' = y^2 at x = 1
        let f = |_x: f64, y: &[f64; 2]| [y[0] * y[0], 0.0];
        let mut s = solver(1e-10);
        s.h_min = 1e-6;
        let mut stats = StepStats::default();
        let res = s.integrate(f, 0.0, [1.0, 0.0], 2.0, 0.1, |_, _| {}, &mut stats);
        assert!(matches!(res, Err(Error::ToleranceNotMet { .. })), "{res:?}");
    }
}
