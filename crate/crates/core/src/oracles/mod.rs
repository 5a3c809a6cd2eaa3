//! Reference values the engines are checked against: a Numerov shooting solver,
//! closed-form spectra, WKB comparators and tabulated energies.

pub mod analytic;
pub mod fixtures;
pub mod numerov;
pub mod wkb;

pub use analytic::{analytic_delta, analytic_eigenvalue, analytic_for, AnalyticSpectrum};
pub use fixtures::{FixtureRow, TableFixture};
pub use numerov::{numerov_eigenvalue, NumerovOptions};
pub use wkb::wkb_eigenvalue;

use crate::discretize::{domain_at, potential_minimum, Domain, TruncationOptions};
use crate::error::{Error, Result};
use crate::potential::Potential;

/// Walks the energy upwards from the bottom of the well until `reached(E)` holds:
/// geometric approach to the threshold when there is one, doubling otherwise.
/// Returns the energy and the domain there.
pub(crate) fn upper_energy<F>(p: &Potential, n: usize, trunc: &TruncationOptions, mut reached: F) -> Result<(f64, Domain)>
where
    F: FnMut(f64, &Domain) -> Result<Option<f64>>,
{
    let (_, v_min) = potential_minimum(p);
    let mut best = f64::NEG_INFINITY;
    match p.threshold() {
        Some(thr) => {
            let top = thr - 1e-6;
            for k in 1..200 {
                let e = (thr - (thr - v_min) * 0.25f64.powi(k)).min(top);
                let d = domain_at(p, e, trunc)?;
                match reached(e, &d)? {
                    None => return Ok((e, d)),
                    Some(j) => best = best.max(j),
                }
                if e >= top {
                    break;
                }
            }
            Err(Error::NoSuchBoundState { n, j_max: best })
        }
        None => {
            let (lo, hi) = p.search_interval();
            let edge = [lo, hi]
                .iter()
                .filter(|&&x| p.contains(x))
                .map(|&x| p.value(x))
                .filter(|v| v.is_finite())
                .fold(f64::NEG_INFINITY, f64::max);
            let mut width = if edge > v_min { edge - v_min } else { 1.0 };
            for _ in 0..80 {
                let e = v_min + width;
                let d = domain_at(p, e, trunc)?;
                match reached(e, &d)? {
                    None => return Ok((e, d)),
                    Some(j) => best = best.max(j),
                }
                width *= 2.0;
            }
            Err(Error::NonConvergence(format!("no energy holds level {n}")))
        }
    }
}
