//! Occupation measurement on a random state: branch probabilities, the
//! averaged post-measurement spectrum and its majorization check.

use onebody::flo::measure_occupation;
use onebody::fock::random_pure_state;
use onebody::majorization::DEFAULT_SLACK;
use onebody::verify;

fn main() -> onebody::Result<()> {
    let state = random_pure_state(6, 3, 3)?;
    for o in measure_occupation(&state, 2)? {
        let spec = o.post_spdm.as_ref().map(|r| r.spectrum()).transpose()?;
        println!("{:>8}: p = {:.6}, spectrum {:?}", o.label, o.probability, spec.map(|s| s.values().to_vec()));
    }
    let report = verify::verify_theorem1(&state, 2, DEFAULT_SLACK)?;
    println!("before: {:?}", report.diagnostics.spectrum_before);
    println!("after:  {:?}", report.diagnostics.spectrum_after);
    println!("majorized: {}", report.passed);
    Ok(())
}
