//! Purifies a two-member ensemble with ancilla modes and checks
//! majorization on the mixed state.

use onebody::fock::random_pure_state;
use onebody::majorization::DEFAULT_SLACK;
use onebody::verify;
use onebody::MixedState;

fn main() -> onebody::Result<()> {
    let rho = MixedState::new(vec![(0.6, random_pure_state(4, 2, 1)?), (0.4, random_pure_state(4, 2, 2)?)])?;
    let p = verify::purify(&rho, 2)?;
    println!(
        "system modes {:?}, ancilla modes {:?}, reduction error {:e}",
        p.system(),
        p.ancilla_modes,
        p.reduction_error(&rho)?
    );
    let r = verify::verify_mixed_theorem1(&rho, 1, DEFAULT_SLACK)?;
    println!("mixed-state majorization: {}", r.passed);
    Ok(())
}
