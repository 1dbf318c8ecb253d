//! A joint two-mode measurement that is not fermionic linear optics: it
//! creates one-body entanglement from a Slater determinant.

use onebody::entropy::{one_body_entanglement, EntropyFunction};
use onebody::flo::measure_two_mode_joint;
use onebody::majorization::DEFAULT_SLACK;
use onebody::schmidt::slater_rank_two_fermion;
use onebody::verify;

fn main() -> onebody::Result<()> {
    let input = verify::nonfree_witness_input()?;
    for o in measure_two_mode_joint(&input, 0, 2)? {
        if let Some(s) = o.pure() {
            let rank = slater_rank_two_fermion(s)?;
            let e = one_body_entanglement(s, &EntropyFunction::von_neumann())?;
            println!("{}: p = {:.4}, Slater rank {rank}, E_vn = {e:.6}", o.label, o.probability);
        }
    }
    let r = verify::verify_nonfree_witness(DEFAULT_SLACK)?;
    println!("majorization violated: {}", !r.verdict.map(|v| v.holds).unwrap_or(true));
    Ok(())
}
