//! Three-point Numerov shooting with node counting. Radial problems and singular
//! walls use the grid `t = ln(x - origin)` with `psi = e^(t/2) u`, for which
//! `u'' = [e^(2t) k (V - E) + 1/4] u` is free of the `1/r^2` and `1/r` singularities.

use crate::discretize::{Domain, Side, TruncationOptions};
use crate::error::{Error, Result};
use crate::potential::{DomainKind, Edge, Potential};

#[derive(Debug, Clone, Copy)]
pub struct NumerovOptions {
    pub decay_budget: f64,
    /// Grid intervals of the first, coarsest pass.
    pub initial_points: usize,
    /// Stop doubling once successive grids agree to this (absolute, or relative for |E| > 1).
    pub tol: f64,
    pub max_points: usize,
}

impl Default for NumerovOptions {
    fn default() -> Self {
        Self { decay_budget: 25.0, initial_points: 4000, tol: 1e-9, max_points: 1 << 22 }
    }
}

enum Mapping {
    Uniform,
    /// Log grid in `x - origin`.
    Log { origin: f64 },
}

struct Grid {
    /// `u'' = (a_i - b_i E) u` at each node.
    a: Vec<f64>,
    b: Vec<f64>,
    h: f64,
}

impl Grid {
    fn new(p: &Potential, mapping: &Mapping, lo: f64, hi: f64, n: usize) -> Self {
        let k = p.kinetic_factor();
        let (s0, s1) = match mapping {
            Mapping::Uniform => (lo, hi),
            Mapping::Log { origin } => ((lo - origin).ln(), (hi - origin).ln()),
        };
        let h = (s1 - s0) / n as f64;
        let mut a = Vec::with_capacity(n + 1);
        let mut b = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let s = s0 + h * i as f64;
            match mapping {
                Mapping::Uniform => {
                    let v = p.value(s);
                    a.push(k * v);
                    b.push(k);
                }
                Mapping::Log { origin } => {
                    let r = s.exp();
                    let w = k * r * r;
                    let v = p.value(origin + r);
                    a.push(w * v + 0.25);
                    b.push(w);
                }
            }
        }
        Self { a, b, h }
    }

    /// Lowest energy at which `h^2 f / 12 <= 1/2` on every node; below it the
    /// recursion develops spurious sign alternation.
    fn floor(&self) -> f64 {
        let lim = 6.0 / (self.h * self.h);
        self.a.iter().zip(&self.b).map(|(a, b)| (a - lim) / b).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Sign changes of the solution that vanishes at the left end, counted through
    /// the right end node, and its value there (rescaled).
    fn shoot(&self, energy: f64) -> (usize, f64) {
        // increment form: w = (1 - q) u with q = h^2 f / 12, and the second
        // difference of w, 12 q u, summed into the running first difference
        let n = self.a.len() - 1;
        let h2 = self.h * self.h / 12.0;
        let q = |i: usize| h2 * (self.a[i] - self.b[i] * energy);
        let mut u = 1.0;
        let mut w = 1.0 - q(1);
        let mut dw = w;
        let mut nodes = 0;
        let mut last_sign = 1.0;
        for i in 1..n {
            dw += 12.0 * q(i) * u;
            w += dw;
            u = w / (1.0 - q(i + 1));
            if u.abs() > 1e100 {
                u *= 1e-100;
                w *= 1e-100;
                dw *= 1e-100;
            }
            if u != 0.0 {
                let s = u.signum();
                if s != last_sign {
                    nodes += 1;
                    last_sign = s;
                }
            }
        }
        (nodes, u)
    }
}

fn mapping(p: &Potential) -> Mapping {
    match (p.domain(), p.left_edge()) {
        (DomainKind::HalfLineRadial, _) => Mapping::Log { origin: 0.0 },
        (_, Edge::RegularizedWall(a)) => Mapping::Log { origin: a },
        _ => Mapping::Uniform,
    }
}

fn interval(p: &Potential, m: &Mapping, d: &Domain) -> (f64, f64) {
    match m {
        Mapping::Uniform => (d.x_c, d.x_d),
        Mapping::Log { origin } => {
            let scale = d.x_d - origin;
            let lo = if d.left == Side::Decaying { (d.x_c - origin).min(1e-12 * scale) } else { 1e-12 * scale };
            let _ = p;
            (origin + lo, d.x_d)
        }
    }
}

/// Level `n` of the grid problem on `[lo, hi]`, by bisection on the node count.
fn grid_level(grid: &Grid, n: usize, mut e_lo: f64, mut e_hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (e_lo + e_hi);
        if mid <= e_lo || mid >= e_hi {
            break;
        }
        if grid.shoot(mid).0 > n {
            e_hi = mid;
        } else {
            e_lo = mid;
        }
    }
    0.5 * (e_lo + e_hi)
}

/// Level `n` (from 0, counted by nodes) of `p`.
pub fn numerov_eigenvalue(p: &Potential, n: usize, opts: &NumerovOptions) -> Result<f64> {
    let trunc = TruncationOptions { decay_budget: opts.decay_budget, epsilon: 0.0, ..Default::default() };
    let map = mapping(p);
    let coarse = opts.initial_points;
    let (e_hi, domain) = super::upper_energy(p, n, &trunc, |e, d| {
        let (lo, hi) = interval(p, &map, d);
        let (nodes, _) = Grid::new(p, &map, lo, hi, coarse).shoot(e);
        Ok(if nodes > n { None } else { Some(nodes as f64) })
    })?;
    let (_, v_min) = crate::discretize::potential_minimum(p);
    let (lo, hi) = interval(p, &map, &domain);

    let level = |points: usize| -> Option<f64> {
        let grid = Grid::new(p, &map, lo, hi, points);
        let bottom = v_min.max(grid.floor());
        if grid.shoot(bottom).0 > n {
            return None;
        }
        // the level may sit above the bracket found on the coarse grid
        let mut top = e_hi;
        while grid.shoot(top).0 <= n {
            top += (top - bottom).abs().max(1.0);
        }
        Some(grid_level(&grid, n, bottom, top))
    };
    let mut points = coarse;
    let mut prev: Option<f64> = None;
    while points <= opts.max_points {
        let e = level(points);
        if let (Some(e), Some(before)) = (e, prev) {
            if (e - before).abs() < opts.tol * e.abs().max(1.0) {
                return Ok((16.0 * e - before) / 15.0);
            }
        }
        prev = e;
        points *= 2;
    }
    Err(Error::NonConvergence(format!("Numerov level {n} did not settle by {points} points")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn builtin(name: &str, pairs: &[(&str, f64)]) -> Potential {
        let params: BTreeMap<String, f64> = pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        Potential::builtin(name, &params).unwrap()
    }

    #[test]
    fn harmonic_ground_state() {
        let e = numerov_eigenvalue(&builtin("harmonic_1d", &[]), 0, &NumerovOptions::default()).unwrap();
        assert!((e - 0.5).abs() < 1e-9, "{e}");
    }

    #[test]
    fn coulomb_on_log_grid() {
        let p = builtin("coulomb_radial", &[("l", 1.0)]);
        let e = numerov_eigenvalue(&p, 1, &NumerovOptions::default()).unwrap();
        assert!((e + 1.0 / 18.0).abs() < 1e-9, "{e}");
        let p = builtin("coulomb_1d", &[]);
        let e = numerov_eigenvalue(&p, 0, &NumerovOptions::default()).unwrap();
        assert!((e + 0.5).abs() < 1e-9, "{e}");
    }

    #[test]
    fn well_levels() {
        let p = builtin("infinite_well", &[]);
        let e = numerov_eigenvalue(&p, 2, &NumerovOptions::default()).unwrap();
        let exact = 9.0 * std::f64::consts::PI.powi(2) / 2.0;
        assert!((e - exact).abs() < 1e-9 * exact, "{e}");
    }
}
