//! Ladder measurement: particle number changes by one, so the comparison
//! is made on the extended density matrix.

use onebody::flo::measure_ladder;
use onebody::fock::random_pure_state;
use onebody::majorization::DEFAULT_SLACK;
use onebody::verify;

fn main() -> onebody::Result<()> {
    let state = random_pure_state(6, 2, 21)?;
    for o in measure_ladder(&state, 4)? {
        let n = o.pure().and_then(|s| s.particle_number());
        println!("{:>8}: p = {:.6}, N = {n:?}", o.label, o.probability);
    }
    let r = verify::verify_corollary2(&state, 4, DEFAULT_SLACK)?;
    println!("extended spectrum majorized: {}", r.passed);
    println!("ladder after ladder residual: {:e}", verify::ladder_composition_residual(&state, 4)?);
    Ok(())
}
