//! Trace-form entanglement entropies of occupation spectra.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fock::{MixedState, PureState};
use crate::linalg::{c, haar_unitary, ZERO};
use crate::spdm::{self, OneBodyDM, SortedSpectrum};

/// A concave `f: [0,1] -> R` with `f(0) = f(1) = 0`.
#[derive(Clone, Copy)]
pub struct EntropyFunction {
    name: &'static str,
    f: fn(f64) -> f64,
}

impl fmt::Debug for EntropyFunction {
    fn fmt(&self, fmt: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt.debug_struct("EntropyFunction").field("name", &self.name).finish()
    }
}

fn xlog2x(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.log2()
    }
}

fn von_neumann_term(x: f64) -> f64 {
    if x >= 1.0 {
        0.0
    } else {
        -xlog2x(x)
    }
}

fn linear_term(x: f64) -> f64 {
    x * (1.0 - x)
}

impl EntropyFunction {
    /// Validates endpoint values and midpoint concavity on a 101-point grid.
    pub fn new(name: &'static str, f: fn(f64) -> f64) -> Result<Self> {
        let bad = |why: &str| Err(Error::InvalidEntropy(name.into(), why.into()));
        if f(0.0).abs() > 1e-12 || f(1.0).abs() > 1e-12 {
            return bad("f(0) and f(1) must vanish");
        }
        let grid: Vec<f64> = (0..=100).map(|i| f64::from(i) / 100.0).collect();
        for i in 0..grid.len() {
            for j in (i + 2..grid.len()).step_by(2) {
                let mid = (grid[i] + grid[j]) / 2.0;
                if f(mid) < (f(grid[i]) + f(grid[j])) / 2.0 - 1e-12 {
                    return bad("not concave on [0, 1]");
                }
            }
        }
        Ok(Self { name, f })
    }

    /// `-x log₂ x`
    pub fn von_neumann() -> Self {
        Self {
            name: "vn",
            f: von_neumann_term,
        }
    }

    /// `x (1 - x)`
    pub fn linear() -> Self {
        Self {
            name: "linear",
            f: linear_term,
        }
    }

    /// Looks up a built-in by its CLI name (`vn`, `linear`).
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "vn" => Ok(Self::von_neumann()),
            "linear" => Ok(Self::linear()),
            other => Err(Error::InvalidEntropy(other.into(), "unknown entropy".into())),
        }
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.f)(x.clamp(0.0, 1.0))
    }
}

/// `Σ_ν f(λ_ν)` with eigenvalues clamped to `[0, 1]`.
pub fn trace_form_entropy(spec: &SortedSpectrum, f: &EntropyFunction) -> f64 {
    spec.values().iter().map(|&x| f.eval(x)).sum()
}

fn binary_entropy(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    -xlog2x(x) - xlog2x(1.0 - x)
}

/// `S₁ = -Σ_ν [λ_ν log₂ λ_ν + (1-λ_ν) log₂(1-λ_ν)]`.
pub fn one_body_entropy_s1(rho: &OneBodyDM) -> Result<f64> {
    Ok(rho.spectrum()?.values().iter().map(|&x| binary_entropy(x)).sum())
}

/// `E(|Ψ⟩) = S(ρ⁽¹⁾_Ψ)` for a trace-form `S`.
pub fn one_body_entanglement(state: &PureState, f: &EntropyFunction) -> Result<f64> {
    let spec = spdm::compute_spdm(state)?.spectrum()?;
    Ok(trace_form_entropy(&spec, f))
}

/// `Tr f(D⁽¹⁾) = Tr f(ρ⁽¹⁾) + Tr f(1 - ρ⁽¹⁾)`; the comparison entropy for
/// states of different fermion number.
pub fn extended_entanglement(state: &PureState, f: &EntropyFunction) -> Result<f64> {
    let spec = spdm::extended_dm(&spdm::compute_spdm(state)?).spectrum()?;
    Ok(trace_form_entropy(&spec, f))
}

/// Upper bound on the convex-roof extension `min Σ_α p_α E(|Ψ_α⟩)`.
///
/// Trial 0 is the given ensemble; every further trial remixes the
/// subnormalized members `√p_α |Ψ_α⟩` with a Haar-random unitary on the
/// ensemble labels. The running minimum is returned, so the bound is
/// nonincreasing in `trials` for a fixed seed.
pub fn convex_roof_upper_bound(
    rho: &MixedState,
    f: &EntropyFunction,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    let members = rho.members();
    let given: f64 = members
        .iter()
        .map(|(p, s)| Ok(p * one_body_entanglement(s, f)?))
        .sum::<Result<f64>>()?;
    if members.len() == 1 {
        return Ok(given);
    }
    let weighted: Vec<PureState> = members
        .iter()
        .map(|(p, s)| s.scaled(c(p.sqrt(), 0.0)))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = given;
    for _ in 1..trials.max(1) {
        let w = haar_unitary(members.len(), &mut rng);
        let mut total = 0.0;
        for row in 0..members.len() {
            let mut phi = PureState::zero(rho.n_modes())?;
            for (col, s) in weighted.iter().enumerate() {
                if w[(row, col)] != ZERO {
                    phi = phi.add_scaled(s, w[(row, col)])?;
                }
            }
            let q = phi.norm_sqr();
            if q > 1e-14 {
                total += q * one_body_entanglement(&phi.normalized()?, f)?;
            }
        }
        best = best.min(total);
    }
    Ok(best.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{ghz_like_state, random_pure_state, random_slater_determinant};

    fn spec(v: &[f64]) -> SortedSpectrum {
        SortedSpectrum::new(v.to_vec()).unwrap()
    }

    #[test]
    fn builtins_validate() {
        assert!(EntropyFunction::new("vn", von_neumann_term).is_ok());
        assert!(EntropyFunction::new("linear", linear_term).is_ok());
        assert!(EntropyFunction::new("convex", |x| x * (x - 1.0)).is_err());
        assert!(EntropyFunction::new("offset", |x| 1.0 + x * (1.0 - x)).is_err());
        assert!(EntropyFunction::by_name("s1").is_err());
    }

    #[test]
    fn trace_form_values() {
        let vn = EntropyFunction::von_neumann();
        assert_eq!(trace_form_entropy(&spec(&[1.0, 1.0, 0.0, 0.0]), &vn), 0.0);
        assert_eq!(trace_form_entropy(&spec(&[1.0, 0.0]), &EntropyFunction::linear()), 0.0);
        assert!((trace_form_entropy(&spec(&[0.5; 4]), &vn) - 2.0).abs() < 1e-15);
        // 2 (0.8 log₂(1/0.8) + 0.2 log₂(1/0.2)) = 1.4438561897747248
        let v = trace_form_entropy(&spec(&[0.8, 0.8, 0.2, 0.2]), &vn);
        assert!((v - 1.4438561897747248).abs() < 1e-12, "{v}");
        // clamped noise must not produce NaN
        assert!(trace_form_entropy(&spec(&[1.0 + 1e-12, -1e-12]), &vn).is_finite());
    }

    #[test]
    fn s1_values() {
        let sd = random_slater_determinant(5, 2, 7).unwrap();
        assert!(one_body_entropy_s1(&spdm::compute_spdm(&sd).unwrap()).unwrap() < 1e-8);
        let g = spdm::compute_spdm(&ghz_like_state(4, 2).unwrap()).unwrap();
        assert!((one_body_entropy_s1(&g).unwrap() - 4.0).abs() < 1e-12);
        for seed in 0..5 {
            let rho = spdm::compute_spdm(&random_pure_state(6, 3, seed).unwrap()).unwrap();
            let d = spdm::extended_dm(&rho).spectrum().unwrap();
            let via_d = trace_form_entropy(&d, &EntropyFunction::von_neumann());
            assert!((one_body_entropy_s1(&rho).unwrap() - via_d).abs() < 1e-10);
        }
    }

    #[test]
    fn entanglement_of_states() {
        let vn = EntropyFunction::von_neumann();
        assert!(one_body_entanglement(&random_slater_determinant(6, 3, 1).unwrap(), &vn).unwrap() < 1e-8);
        assert!((one_body_entanglement(&ghz_like_state(4, 2).unwrap(), &vn).unwrap() - 2.0).abs() < 1e-12);
        let s = random_pure_state(7, 3, 4).unwrap();
        let via_nm1 = trace_form_entropy(&spdm::rho_n_minus_1_spectrum(&s).unwrap(), &vn);
        assert!((one_body_entanglement(&s, &vn).unwrap() - via_nm1).abs() < 1e-9);
    }

    #[test]
    fn convex_roof_examples() {
        let vn = EntropyFunction::von_neumann();
        let a = PureState::basis(4, 0b0011).unwrap();
        let b = PureState::basis(4, 0b1100).unwrap();
        let mix = MixedState::new(vec![(0.5, a.clone()), (0.5, b)]).unwrap();
        assert!(convex_roof_upper_bound(&mix, &vn, 20, 0).unwrap() < 1e-9);

        let g = ghz_like_state(4, 2).unwrap();
        let single = MixedState::pure(g.clone()).unwrap();
        assert_eq!(
            convex_roof_upper_bound(&single, &vn, 10, 3).unwrap(),
            one_body_entanglement(&g, &vn).unwrap()
        );

        let sd = PureState::basis(4, 0b0101).unwrap();
        let mix = MixedState::new(vec![(0.5, g), (0.5, sd)]).unwrap();
        let mut last = f64::INFINITY;
        for trials in [1, 2, 5, 20, 50] {
            let b = convex_roof_upper_bound(&mix, &vn, trials, 11).unwrap();
            assert!((0.0..=1.0 + 1e-12).contains(&b));
            assert!(b <= last);
            last = b;
        }
    }
}
