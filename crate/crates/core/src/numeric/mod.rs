//! Numerical plumbing shared by the engines and the oracles.

pub mod ode;
pub mod roots;

/// Tanh-sinh quadrature after the substitution `x = a + (b-a) u^2 (3-2u)`, which
/// turns square-root (and inverse square-root) endpoint behaviour, as met by
/// momentum integrands at turning points, into smooth integrands.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let w = b - a;
    let g = |u: f64| {
        let x = a + w * u * u * (3.0 - 2.0 * u);
        let dx = 6.0 * w * u * (1.0 - u);
        if dx == 0.0 {
            0.0
        } else {
            f(x) * dx
        }
    };
    quadrature::double_exponential::integrate(g, 0.0, 1.0, tol).integral
}

/// Reduces an angle to the representative in `(-pi/2, pi/2]` modulo `pi`.
#[inline]
pub fn wrap_half_turn(a: f64) -> f64 {
    use std::f64::consts::PI;
    let r = a - PI * (a / PI).round();
    if r <= -0.5 * PI {
        r + PI
    } else {
        r
    }
}
