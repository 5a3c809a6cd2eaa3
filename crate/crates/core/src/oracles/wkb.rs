//! Semiclassical comparators: `∫ kappa dx = (n + 1/2) pi` over the allowed region,
//! with the barrier `l(l+1)` or, for Langer's form, `(l+1/2)^2`.

use std::f64::consts::PI;

use crate::discretize::{enclosing_bracket, turning_points, TruncationOptions};
use crate::error::{Error, Result};
use crate::numeric::roots::{brent, BrentOptions};
use crate::phaseflow::kappa_integral;
use crate::potential::{Centrifugal, Potential};

fn phase_integral(p: &Potential, energy: f64, trunc: &TruncationOptions) -> Result<f64> {
    let (a, b) = enclosing_bracket(p, energy, trunc.epsilon)?;
    let tps = match turning_points(p, energy, trunc) {
        Ok(t) => t,
        Err(Error::NoTurningPoints { .. }) => return Ok(0.0),
        Err(e) => return Err(e),
    };
    Ok(kappa_integral(p, energy, a, b, &tps))
}

/// Level `n` of the WKB condition.
pub fn wkb_eigenvalue(p: &Potential, n: usize, langer: bool) -> Result<f64> {
    let form = if langer { Centrifugal::Langer } else { Centrifugal::Exact };
    let q = p.clone().with_centrifugal(form);
    let trunc = TruncationOptions { epsilon: 0.0, ..Default::default() };
    let target = (n as f64 + 0.5) * PI;
    let f = |e: f64| -> Result<f64> { Ok(phase_integral(&q, e, &trunc)? - target) };
    let (e_hi, _) = super::upper_energy(&q, n, &trunc, |e, _| {
        let v = f(e)?;
        Ok(if v >= 0.0 { None } else { Some(v + target) })
    })?;
    let (_, v_min) = crate::discretize::potential_minimum(&q);
    let lo = v_min + 1e-9 * (e_hi - v_min);
    let f_lo = f(lo)?;
    if f_lo >= 0.0 {
        return Ok(lo);
    }
    let opts = BrentOptions { x_tol: 4.0 * f64::EPSILON * e_hi.abs().max(v_min.abs()), ..Default::default() };
    brent(f, lo, e_hi, f_lo, f(e_hi)?, opts)
}
