//! Majorization between sorted spectra and the spectrum operations used on
//! extended density matrices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spdm::SortedSpectrum;

pub const DEFAULT_SLACK: f64 = 1e-9;
pub const DEFAULT_TRACE_TOL: f64 = 1e-8;

/// Outcome of testing `x ≺ y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MajorizationVerdict {
    pub holds: bool,
    /// `min_m (Σ_{ν≤m} y_ν - Σ_{ν≤m} x_ν)` over `m < len`.
    pub worst_margin: f64,
    /// `|Σ x - Σ y|`
    pub trace_gap: f64,
    /// Per-`m` margins `Σ_{ν≤m} y_ν - Σ_{ν≤m} x_ν`, `m = 1..=len`.
    pub margins: Vec<f64>,
}

fn check_sorted(s: &SortedSpectrum) -> Result<()> {
    if s.values().windows(2).any(|w| w[1] > w[0] + 1e-12) {
        Err(Error::Unsorted)
    } else {
        Ok(())
    }
}

/// Tests `x ≺ y`, i.e. `y` majorizes `x`. The shorter vector is padded with
/// zeros.
pub fn majorizes(
    y: &SortedSpectrum,
    x: &SortedSpectrum,
    slack: f64,
    trace_tol: f64,
) -> Result<MajorizationVerdict> {
    check_sorted(x)?;
    check_sorted(y)?;
    let len = x.len().max(y.len());
    let at = |s: &SortedSpectrum, i: usize| s.values().get(i).copied().unwrap_or(0.0);
    let mut margins = Vec::with_capacity(len);
    let (mut sx, mut sy) = (0.0, 0.0);
    for i in 0..len {
        sx += at(x, i);
        sy += at(y, i);
        margins.push(sy - sx);
    }
    let worst_margin = margins[..len.saturating_sub(1)]
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let worst_margin = if worst_margin.is_finite() { worst_margin } else { 0.0 };
    let trace_gap = (sx - sy).abs();
    Ok(MajorizationVerdict {
        holds: worst_margin >= -slack && trace_gap <= trace_tol,
        worst_margin,
        trace_gap,
        margins,
    })
}

/// `majorizes` with the default tolerances.
pub fn is_majorized_by(x: &SortedSpectrum, y: &SortedSpectrum) -> Result<bool> {
    Ok(majorizes(y, x, DEFAULT_SLACK, DEFAULT_TRACE_TOL)?.holds)
}

/// `Σ_j p_j λ_j` for descending vectors (zero-padded to a common length).
pub fn average_spectrum(outcomes: &[(f64, SortedSpectrum)]) -> Result<SortedSpectrum> {
    let total: f64 = outcomes.iter().map(|(p, _)| p).sum();
    if (total - 1.0).abs() > 1e-10 || outcomes.iter().any(|(p, _)| *p < 0.0) {
        return Err(Error::ProbabilitySum(total));
    }
    let len = outcomes.iter().map(|(_, s)| s.len()).max().unwrap_or(0);
    let mut acc = vec![0.0; len];
    for (p, s) in outcomes {
        check_sorted(s)?;
        for (a, v) in acc.iter_mut().zip(s.values()) {
            *a += p * v;
        }
    }
    SortedSpectrum::new(acc)
}

/// Sorted union of two spectra.
pub fn union_spectra(a: &SortedSpectrum, b: &SortedSpectrum) -> SortedSpectrum {
    let mut v = a.values().to_vec();
    v.extend_from_slice(b.values());
    SortedSpectrum::from_unsorted(v)
}

/// `1 - x`, re-sorted descending.
pub fn complement_spectrum(x: &SortedSpectrum) -> Result<SortedSpectrum> {
    const TOL: f64 = 1e-10;
    if let Some(&bad) = x.values().iter().find(|&&v| !(-TOL..=1.0 + TOL).contains(&v)) {
        return Err(Error::OutOfUnitInterval(bad));
    }
    Ok(SortedSpectrum::from_unsorted(
        x.values().iter().rev().map(|v| 1.0 - v).collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[f64]) -> SortedSpectrum {
        SortedSpectrum::new(v.to_vec()).unwrap()
    }

    #[test]
    fn basic_verdicts() {
        let v = majorizes(&s(&[1.0, 0.0]), &s(&[0.5, 0.5]), DEFAULT_SLACK, DEFAULT_TRACE_TOL).unwrap();
        assert!(v.holds);
        assert!((v.worst_margin - 0.5).abs() < 1e-15);
        assert!(!majorizes(&s(&[0.5, 0.5]), &s(&[1.0, 0.0]), DEFAULT_SLACK, DEFAULT_TRACE_TOL).unwrap().holds);
        assert!(is_majorized_by(&s(&[0.8, 0.8, 0.2, 0.2]), &s(&[1.0, 1.0, 0.0, 0.0])).unwrap());
    }

    #[test]
    fn trace_mismatch_fails() {
        let v = majorizes(&s(&[1.0, 0.5]), &s(&[0.5, 0.5]), DEFAULT_SLACK, DEFAULT_TRACE_TOL).unwrap();
        assert!(!v.holds);
        assert!((v.trace_gap - 0.5).abs() < 1e-15);
    }

    #[test]
    fn padding() {
        assert!(is_majorized_by(&s(&[0.5, 0.5]), &s(&[1.0])).unwrap());
    }

    #[test]
    fn unsorted_rejected() {
        assert_eq!(SortedSpectrum::from_unsorted(vec![0.2, 0.8]).values(), &[0.8, 0.2]);
        assert!(SortedSpectrum::new(vec![0.2, 0.8]).is_err());
    }

    #[test]
    fn averages() {
        assert_eq!(average_spectrum(&[(1.0, s(&[0.7, 0.3]))]).unwrap(), s(&[0.7, 0.3]));
        assert_eq!(
            average_spectrum(&[(0.5, s(&[1.0, 1.0, 0.0, 0.0])), (0.5, s(&[1.0, 1.0, 0.0, 0.0]))]).unwrap(),
            s(&[1.0, 1.0, 0.0, 0.0])
        );
        let a = average_spectrum(&[(0.3, s(&[1.0, 0.0])), (0.7, s(&[0.6, 0.4]))]).unwrap();
        assert!((a.values()[0] - 0.72).abs() < 1e-15 && (a.values()[1] - 0.28).abs() < 1e-15);
        assert!(matches!(
            average_spectrum(&[(0.3, s(&[1.0]))]),
            Err(Error::ProbabilitySum(_))
        ));
    }

    #[test]
    fn unions_and_complements() {
        assert_eq!(union_spectra(&s(&[1.0, 0.0]), &s(&[0.5, 0.5])), s(&[1.0, 0.5, 0.5, 0.0]));
        assert_eq!(union_spectra(&s(&[]), &s(&[0.3])), s(&[0.3]));
        assert_eq!(complement_spectrum(&s(&[1.0, 0.0])).unwrap(), s(&[1.0, 0.0]));
        assert_eq!(complement_spectrum(&s(&[0.8, 0.2])).unwrap().values().len(), 2);
        let c = complement_spectrum(&s(&[0.9, 0.7, 0.1])).unwrap();
        assert!(c.max_abs_diff(&s(&[0.9, 0.3, 0.1])) < 1e-15);
        assert!(complement_spectrum(&s(&[1.5])).is_err());
    }

    #[test]
    fn reflexive() {
        let x = s(&[0.9, 0.4, 0.4, 0.1]);
        assert!(is_majorized_by(&x, &x).unwrap());
    }
}
