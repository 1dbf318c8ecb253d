//! Two-outcome generalized occupation measurement, including the balanced
//! case |alpha| = |beta|.

use num_complex::Complex64;
use onebody::flo::{measure_generalized, GeneralizedMkParams};
use onebody::fock::random_pure_state;
use onebody::majorization::DEFAULT_SLACK;
use onebody::verify;

fn main() -> onebody::Result<()> {
    let state = random_pure_state(5, 2, 8)?;
    for t in [0.3, std::f64::consts::FRAC_PI_4] {
        let params = GeneralizedMkParams::new(
            Complex64::new(t.cos(), 0.0),
            Complex64::new(t.sin(), 0.0),
            Complex64::new(0.0, t.sin()),
            Complex64::new(0.0, -t.cos()),
        )?;
        let probs: Vec<f64> = measure_generalized(&state, 1, params)?.iter().map(|o| o.probability).collect();
        let r = verify::verify_corollary1(&state, 1, params, DEFAULT_SLACK)?;
        println!("theta = {t:.4}: probabilities {probs:?}, majorized: {}", r.passed);
    }
    Ok(())
}
