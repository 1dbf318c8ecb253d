//! Maps distinguishable qudits into one fermion per mode block and compares
//! local data on both sides.

use onebody::entropy::{one_body_entanglement, EntropyFunction};
use onebody::fock::seeded_rng;
use onebody::modemap::{self, theta_map, TensorState};

fn main() -> onebody::Result<()> {
    let ghz = TensorState::ghz_qubits(3)?;
    let mut rng = seeded_rng(5);
    let random = TensorState::random(&[2, 3], &mut rng)?;
    let f = EntropyFunction::von_neumann();
    for (name, ts) in [("ghz", &ghz), ("random 2x3", &random)] {
        let fermions = theta_map(ts)?;
        println!(
            "{name}: {} modes, N = {:?}, local sum {:.6}, one-body {:.6}",
            fermions.n_modes(),
            fermions.particle_number(),
            modemap::multipartite_monotone(ts, &f)?,
            one_body_entanglement(&fermions, &f)?
        );
    }
    let pair = theta_map(&TensorState::ghz_qubits(2)?)?;
    let rel = modemap::two_fermion_mode_relation(&pair, &f)?;
    println!("mode entanglement {:.6} vs half one-body {:.6}", rel.e_ab, rel.e_psi / 2.0);
    Ok(())
}
