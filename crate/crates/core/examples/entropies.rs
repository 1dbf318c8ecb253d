//! Trace-form entropies, the one-body entropy and a convex-roof bound.

use onebody::entropy::{self, EntropyFunction};
use onebody::fock::{ghz_like_state, random_pure_state};
use onebody::spdm::compute_spdm;
use onebody::MixedState;

fn tsallis2(x: f64) -> f64 {
    x * (1.0 - x) * 2.0
}

fn main() -> onebody::Result<()> {
    let custom = EntropyFunction::new("tsallis2", tsallis2)?;
    let ghz = ghz_like_state(6, 3)?;
    for f in [EntropyFunction::von_neumann(), EntropyFunction::linear(), custom] {
        println!("{}: {:.6}", f.name(), entropy::one_body_entanglement(&ghz, &f)?);
    }
    println!("s1: {:.6}", entropy::one_body_entropy_s1(&compute_spdm(&ghz)?)?);
    let rho = MixedState::new(vec![(0.5, random_pure_state(4, 2, 4)?), (0.5, random_pure_state(4, 2, 9)?)])?;
    let f = EntropyFunction::von_neumann();
    for trials in [1, 10, 100] {
        println!("convex roof <= {:.6} ({trials} trials)", entropy::convex_roof_upper_bound(&rho, &f, trials, 0)?);
    }
    Ok(())
}
