//! Closed-form spectra and phase shifts of the solvable builtins.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::potential::Potential;

/// Closed-form `E(n, l)` of one builtin, in units `m = hbar = 1` and unit parameters.
#[derive(Debug, Clone, Copy)]
pub struct AnalyticSpectrum {
    pub tag: &'static str,
    pub energy: fn(usize, u32) -> f64,
    /// Whether `l` enters (radial problems).
    pub uses_l: bool,
}

const CATALOG: [AnalyticSpectrum; 5] = [
    AnalyticSpectrum { tag: "infinite_well", energy: |n, _| ((n + 1) as f64).powi(2) * PI * PI / 2.0, uses_l: false },
    AnalyticSpectrum { tag: "harmonic_1d", energy: |n, _| n as f64 + 0.5, uses_l: false },
    AnalyticSpectrum { tag: "harmonic_radial", energy: |n, l| 2.0 * n as f64 + l as f64 + 1.5, uses_l: true },
    AnalyticSpectrum { tag: "coulomb_1d", energy: |n, _| -0.5 / ((n + 1) as f64).powi(2), uses_l: false },
    AnalyticSpectrum { tag: "coulomb_radial", energy: |n, l| -0.5 / ((n as u64 + l as u64 + 1) as f64).powi(2), uses_l: true },
];

impl AnalyticSpectrum {
    pub fn lookup(tag: &str) -> Result<&'static AnalyticSpectrum> {
        CATALOG.iter().find(|s| s.tag == tag).ok_or_else(|| Error::NoCatalogEntry(tag.to_string()))
    }

    pub fn all() -> &'static [AnalyticSpectrum] {
        &CATALOG
    }
}

/// Level `n` (from 0) of a catalogued builtin with unit parameters and `m = hbar = 1`.
pub fn analytic_eigenvalue(tag: &str, n: usize, l: u32) -> Result<f64> {
    Ok((AnalyticSpectrum::lookup(tag)?.energy)(n, l))
}

/// Level `n` of a builtin with its actual parameters, mass and `hbar`.
pub fn analytic_for(p: &Potential, n: usize) -> Result<f64> {
    let tag = p.builtin_tag().ok_or_else(|| Error::NoCatalogEntry("expression".into()))?;
    let l = p.angular_momentum().unwrap_or(0);
    let (m, hbar) = (p.mass(), p.hbar());
    let param = |k: &str| p.params().get(k).copied().unwrap_or(1.0);
    let unit = analytic_eigenvalue(tag, n, l)?;
    Ok(match tag {
        "infinite_well" => unit * hbar * hbar / (m * param("L").powi(2)),
        "harmonic_1d" | "harmonic_radial" => unit * hbar * (param("k") / m).sqrt(),
        "coulomb_1d" | "coulomb_radial" => unit * m * param("Z").powi(2) / (hbar * hbar),
        _ => unreachable!(),
    })
}

/// Phase shift of a catalogued builtin; it does not depend on `n`.
pub fn analytic_delta(tag: &str, l: u32) -> Result<f64> {
    AnalyticSpectrum::lookup(tag)?;
    let l = l as f64;
    let c = (l * (l + 1.0)).sqrt();
    Ok(match tag {
        "infinite_well" => 0.0,
        "harmonic_1d" => PI / 2.0,
        "harmonic_radial" => (2.0 * c - (2.0 * l - 1.0)) * PI / 4.0,
        "coulomb_1d" => PI,
        "coulomb_radial" => (c - l) * PI,
        _ => unreachable!(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_examples() {
        assert!((analytic_eigenvalue("infinite_well", 2, 0).unwrap() - 9.0 * PI * PI / 2.0).abs() < 1e-12);
        assert_eq!(analytic_eigenvalue("harmonic_radial", 1, 3).unwrap(), 6.5);
        assert_eq!(analytic_eigenvalue("coulomb_radial", 0, 0).unwrap(), -0.5);
        assert!(matches!(analytic_eigenvalue("woods_saxon", 0, 0), Err(Error::NoCatalogEntry(_))));
    }

    #[test]
    fn increasing_in_n() {
        for s in AnalyticSpectrum::all() {
            for l in 0..3 {
                for n in 0..10 {
                    assert!((s.energy)(n + 1, l) > (s.energy)(n, l), "{}", s.tag);
                }
            }
        }
    }
}
