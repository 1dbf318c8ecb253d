//! Schmidt-like decomposition of a random three-fermion state and its
//! reconstruction from natural orbitals.

use onebody::fock::random_pure_state;
use onebody::schmidt;

fn main() -> onebody::Result<()> {
    let state = random_pure_state(6, 3, 11)?;
    let sd = schmidt::schmidt_decompose(&schmidt::build_lambda(&state)?)?;
    println!("lambda_nu: {:?}", sd.lambdas.values());
    let back = schmidt::reconstruct_state(&sd)?;
    println!("reconstruction fidelity: {:.15}", back.fidelity(&state)?);
    let check = schmidt::natural_mode_check(&state, &sd)?;
    println!("natural-mode residual: {:e} (passed: {})", check.max_residual(), check.passed());
    Ok(())
}
