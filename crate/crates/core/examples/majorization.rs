//! Majorization verdicts and partial-sum margins for a few spectra.

use onebody::majorization::{complement_spectrum, majorizes, union_spectra, DEFAULT_SLACK, DEFAULT_TRACE_TOL};
use onebody::spdm::SortedSpectrum;

fn main() -> onebody::Result<()> {
    let pure = SortedSpectrum::new(vec![1.0, 1.0, 0.0, 0.0])?;
    let mixed = SortedSpectrum::new(vec![0.7, 0.5, 0.5, 0.3])?;
    let flat = SortedSpectrum::new(vec![0.5; 4])?;
    for (name, y, x) in [("flat < mixed", &mixed, &flat), ("mixed < pure", &pure, &mixed), ("pure < flat", &flat, &pure)] {
        let v = majorizes(y, x, DEFAULT_SLACK, DEFAULT_TRACE_TOL)?;
        println!("{name}: {} margins {:?}", v.holds, v.margins);
    }
    let ext = |s: &SortedSpectrum| complement_spectrum(s).map(|c| union_spectra(s, &c));
    let v = majorizes(&ext(&pure)?, &ext(&mixed)?, DEFAULT_SLACK, DEFAULT_TRACE_TOL)?;
    println!("extended spectra keep the order: {}", v.holds);
    Ok(())
}
