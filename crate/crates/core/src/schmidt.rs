//! Coefficient matrix `Λ` of the expansion `|Ψ⟩ = (1/N) Σ Λ_{kl} c†_k C†_l |0⟩`,
//! the 1-(N-1) Schmidt-like decomposition obtained from its SVD, and the
//! two-fermion Slater decomposition.

use std::collections::HashMap;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{combinations, modes_of, Mask, PureState};
use crate::linalg::{self, c, svd_full, CMat, ZERO};
use crate::spdm::{self, SortedSpectrum, RANK_THRESHOLD};

/// Bidirectional map between `(N-1)`-mode subsets and column labels `l`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetIndexer {
    n: usize,
    r: usize,
    subsets: Vec<Mask>,
    index: HashMap<Mask, usize>,
}

impl SubsetIndexer {
    pub fn new(n: usize, r: usize) -> Self {
        let subsets = combinations(n, r);
        let index = subsets.iter().enumerate().map(|(i, &m)| (m, i)).collect();
        Self { n, r, subsets, index }
    }

    pub fn n_modes(&self) -> usize {
        self.n
    }

    pub fn subset_size(&self) -> usize {
        self.r
    }

    pub fn len(&self) -> usize {
        self.subsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsets.is_empty()
    }

    pub fn mask(&self, l: usize) -> Mask {
        self.subsets[l]
    }

    /// Modes of subset `l`, ascending.
    pub fn subset(&self, l: usize) -> Vec<usize> {
        modes_of(self.subsets[l])
    }

    pub fn label(&self, mask: Mask) -> Option<usize> {
        self.index.get(&mask).copied()
    }

    /// `Σ_l coeffs[l] C†_l |0⟩`.
    pub fn state_from_coefficients(&self, coeffs: impl Iterator<Item = Complex64>) -> Result<PureState> {
        PureState::from_amplitudes(self.n, self.subsets.iter().copied().zip(coeffs))
    }
}

/// `n x C(n, N-1)` matrix with `Λ_{kl} = ⟨0|C_l c_k|Ψ⟩`.
#[derive(Debug, Clone)]
pub struct LambdaMatrix {
    matrix: CMat,
    indexer: SubsetIndexer,
    particles: usize,
}

impl LambdaMatrix {
    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn indexer(&self) -> &SubsetIndexer {
        &self.indexer
    }

    pub fn particle_number(&self) -> usize {
        self.particles
    }

    /// `Tr ΛΛ†`, which equals `N` for a normalized state.
    pub fn trace_norm_sqr(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn entry(&self, k: usize, subset: &[usize]) -> Complex64 {
        let mask = subset.iter().fold(0, |m, &i| m | (1 << i));
        self.indexer
            .label(mask)
            .map_or(ZERO, |l| self.matrix[(k, l)])
    }
}

pub fn particle_number_of(state: &PureState) -> Result<usize> {
    state
        .particle_number()
        .ok_or(Error::IndefiniteParticleNumber)
}

pub fn build_lambda(state: &PureState) -> Result<LambdaMatrix> {
    let big_n = particle_number_of(state)?;
    let n = state.n_modes();
    if big_n == 0 || big_n > n {
        return Err(Error::InvalidParticleNumber { big_n, n });
    }
    let indexer = SubsetIndexer::new(n, big_n - 1);
    let mut matrix = CMat::zeros(n, indexer.len());
    for k in 0..n {
        for (&mask, &a) in state.annihilate(k)?.amplitudes() {
            let l = indexer
                .label(mask)
                .expect("c_k of an N-fermion state has N-1 fermions");
            matrix[(k, l)] = a;
        }
    }
    Ok(LambdaMatrix {
        matrix,
        indexer,
        particles: big_n,
    })
}

/// Natural occupations with the natural one- and `(N-1)`-fermion orbitals.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SchmidtData {
    /// `λ_ν`, the squared singular values of `Λ`, padded with zeros to `n`.
    pub lambdas: SortedSpectrum,
    /// `n x n`; column `ν` is the natural orbital `c†_ν = Σ_k U_{kν} c†_k`.
    #[serde(with = "linalg::serde_matrix")]
    pub u: CMat,
    /// `C(n,N-1) x C(n,N-1)`; `C†_ν = Σ_l V*_{lν} C†_l`.
    #[serde(with = "linalg::serde_matrix")]
    pub v: CMat,
    #[serde(skip_serializing)]
    #[serde(default)]
    particles: usize,
}

impl SchmidtData {
    pub fn particle_number(&self) -> usize {
        self.particles
    }

    fn indexer(&self) -> SubsetIndexer {
        SubsetIndexer::new(self.u.nrows(), self.particles - 1)
    }

    /// `c†_ν |0⟩`.
    pub fn natural_orbital_state(&self, nu: usize) -> Result<PureState> {
        let n = self.u.nrows();
        PureState::from_amplitudes(n, (0..n).map(|k| (1 << k, self.u[(k, nu)])))
    }

    /// `C†_ν |0⟩`; zero for `ν` beyond the number of `(N-1)` states.
    pub fn natural_complement_state(&self, nu: usize) -> Result<PureState> {
        let idx = self.indexer();
        if nu >= self.v.ncols() {
            return PureState::zero(self.u.nrows());
        }
        idx.state_from_coefficients((0..idx.len()).map(|l| self.v[(l, nu)].conj()))
    }
}

pub fn schmidt_decompose(lambda: &LambdaMatrix) -> Result<SchmidtData> {
    let svd = svd_full(&lambda.matrix)?;
    let n = lambda.matrix.nrows();
    let mut u = svd.u;
    let mut v = svd.v;
    // gauge: largest-modulus entry of each U column real positive
    for nu in 0..n {
        let (imax, _) = (0..n)
            .map(|k| (k, u[(k, nu)].norm()))
            .fold((0, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        let entry = u[(imax, nu)];
        if entry.norm() == 0.0 {
            continue;
        }
        let phase = entry.conj() / entry.norm();
        for k in 0..n {
            u[(k, nu)] *= phase;
        }
        if nu < v.ncols() && nu < svd.singular_values.len() {
            for l in 0..v.nrows() {
                v[(l, nu)] *= phase;
            }
        }
    }
    let mut lambdas: Vec<f64> = svd.singular_values.iter().map(|s| s * s).collect();
    lambdas.resize(n, 0.0);
    Ok(SchmidtData {
        lambdas: SortedSpectrum::new(lambdas)?,
        u,
        v,
        particles: lambda.particles,
    })
}

/// `|Ψ⟩ = (1/N) Σ_ν √λ_ν c†_ν C†_ν |0⟩`, renormalized.
pub fn reconstruct_state(sd: &SchmidtData) -> Result<PureState> {
    let n = sd.u.nrows();
    let mut acc = PureState::zero(n)?;
    for (nu, &lam) in sd.lambdas.values().iter().enumerate() {
        if lam <= 0.0 || nu >= sd.v.ncols() {
            continue;
        }
        let complement = sd.natural_complement_state(nu)?;
        for k in 0..n {
            let coeff = sd.u[(k, nu)] * lam.sqrt();
            if coeff.norm() == 0.0 {
                continue;
            }
            acc = acc.add_scaled(&complement.create(k)?, coeff)?;
        }
    }
    acc.scaled(c(1.0 / sd.particles as f64, 0.0)).normalized()
}

/// Residuals of the natural-mode identities for one orbital.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModeCheck {
    pub nu: usize,
    pub lambda: f64,
    /// `‖c_ν|Ψ⟩ - √λ_ν C†_ν|0⟩‖`
    pub annihilation_residual: f64,
    /// `‖C_ν|Ψ⟩ - (-1)^{N-1} √λ_ν c†_ν|0⟩‖`
    pub complement_residual: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NaturalModeReport {
    pub checks: Vec<ModeCheck>,
    /// `max |⟨c†_ν c_ν'⟩ - λ_ν δ_{νν'}|`
    pub occupation_residual: f64,
    pub failures: Vec<String>,
}

impl NaturalModeReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn max_residual(&self) -> f64 {
        self.checks
            .iter()
            .flat_map(|c| [c.annihilation_residual, c.complement_residual])
            .fold(self.occupation_residual, f64::max)
    }
}

/// `C_l = c_{l_{N-1}} ... c_{l_1}` applied to a state.
fn apply_subset_annihilator(state: &PureState, subset: &[usize]) -> Result<PureState> {
    subset.iter().try_fold(state.clone(), |s, &k| s.annihilate(k))
}

pub fn natural_mode_check(state: &PureState, sd: &SchmidtData) -> Result<NaturalModeReport> {
    const TOL: f64 = 1e-9;
    let n = state.n_modes();
    let big_n = sd.particles;
    let idx = sd.indexer();
    let removed: Vec<PureState> = (0..n).map(|k| state.annihilate(k)).collect::<Result<_>>()?;
    let removed_sets: Vec<PureState> = (0..idx.len())
        .map(|l| apply_subset_annihilator(state, &idx.subset(l)))
        .collect::<Result<_>>()?;
    let sign = if (big_n - 1).is_multiple_of(2) { 1.0 } else { -1.0 };

    // c_ν |Ψ⟩ = Σ_k U*_{kν} c_k |Ψ⟩
    let natural_removed: Vec<PureState> = (0..n)
        .map(|nu| {
            removed.iter().enumerate().try_fold(PureState::zero(n)?, |acc, (k, s)| {
                acc.add_scaled(s, sd.u[(k, nu)].conj())
            })
        })
        .collect::<Result<_>>()?;

    let mut checks = Vec::new();
    let mut failures = Vec::new();
    for (nu, &lam) in sd.lambdas.values().iter().enumerate() {
        if lam <= RANK_THRESHOLD {
            continue;
        }
        let expected = sd
            .natural_complement_state(nu)?
            .scaled(c(lam.sqrt(), 0.0));
        let annihilation_residual = natural_removed[nu]
            .add_scaled(&expected, c(-1.0, 0.0))?
            .norm();
        // C_ν |Ψ⟩ = Σ_l V_{lν} C_l |Ψ⟩
        let lhs = removed_sets
            .iter()
            .enumerate()
            .try_fold(PureState::zero(n)?, |acc, (l, s)| acc.add_scaled(s, sd.v[(l, nu)]))?;
        let rhs = sd
            .natural_orbital_state(nu)?
            .scaled(c(sign * lam.sqrt(), 0.0));
        let complement_residual = lhs.add_scaled(&rhs, c(-1.0, 0.0))?.norm();
        if annihilation_residual > TOL {
            failures.push(format!("c_{nu} residual {annihilation_residual:e}"));
        }
        if complement_residual > TOL {
            failures.push(format!("C_{nu} residual {complement_residual:e}"));
        }
        checks.push(ModeCheck {
            nu,
            lambda: lam,
            annihilation_residual,
            complement_residual,
        });
    }
    let mut occupation_residual: f64 = 0.0;
    for nu in 0..n {
        for nup in 0..n {
            let val = natural_removed[nu].inner(&natural_removed[nup])?;
            let target = if nu == nup { sd.lambdas.values()[nu] } else { 0.0 };
            occupation_residual = occupation_residual.max((val - c(target, 0.0)).norm());
        }
    }
    if occupation_residual > TOL {
        failures.push(format!("occupation residual {occupation_residual:e}"));
    }
    Ok(NaturalModeReport {
        checks,
        occupation_residual,
        failures,
    })
}

/// Slater rank of a two-fermion state: half the number of nonzero natural
/// occupations.
pub fn slater_rank_two_fermion(state: &PureState) -> Result<usize> {
    let big_n = particle_number_of(state)?;
    if big_n != 2 {
        return Err(Error::WrongParticleNumber {
            expected: 2,
            found: big_n,
        });
    }
    let sd = schmidt_decompose(&build_lambda(state)?)?;
    let count = sd
        .lambdas
        .values()
        .iter()
        .filter(|&&x| x > RANK_THRESHOLD)
        .count();
    Ok(count.div_ceil(2))
}

/// One term `√λ c†_ν c†_ν̄` of a two-fermion Slater decomposition.
#[derive(Debug, Clone)]
pub struct SlaterPair {
    pub lambda: f64,
    /// Orbital `ν` as a mode-space vector.
    pub orbital: DVector<Complex64>,
    /// Partner orbital `ν̄`.
    pub partner: DVector<Complex64>,
}

/// `|Ψ⟩ = Σ_i √λ_i c†_{ν_i} c†_{ν̄_i} |0⟩` with orthonormal orbitals.
#[derive(Debug, Clone)]
pub struct SlaterDecomposition {
    pub pairs: Vec<SlaterPair>,
}

impl SlaterDecomposition {
    /// Unitary whose columns are `ν_1, ν̄_1, ν_2, ν̄_2, ...` completed to a
    /// basis of the mode space.
    pub fn pair_basis(&self, n: usize) -> CMat {
        if self.pairs.is_empty() {
            return CMat::identity(n, n);
        }
        let cols: Vec<DVector<Complex64>> = self
            .pairs
            .iter()
            .flat_map(|p| [p.orbital.clone(), p.partner.clone()])
            .collect();
        linalg::complete_orthonormal_columns(&CMat::from_columns(&cols))
    }
}

/// Greedy deflation on the largest natural occupation: for the top natural
/// orbital `ν`, `c_ν|Ψ⟩/√λ` is a one-fermion state `ν̄` and the pair term
/// `√λ c†_ν c†_ν̄` separates from a remainder supported off `{ν, ν̄}`.
pub fn slater_decomposition(state: &PureState) -> Result<SlaterDecomposition> {
    let big_n = particle_number_of(state)?;
    if big_n != 2 {
        return Err(Error::WrongParticleNumber {
            expected: 2,
            found: big_n,
        });
    }
    let n = state.n_modes();
    let mut rest = state.clone();
    let mut pairs = Vec::new();
    while rest.norm_sqr() > RANK_THRESHOLD && pairs.len() < n / 2 {
        let m = spdm::spdm_matrix(&rest);
        let eig = linalg::eigh(&m)?;
        let lam = eig.values[0];
        if lam <= RANK_THRESHOLD {
            break;
        }
        let orbital = eig.vectors.column(0).into_owned();
        // c_ν |rest⟩ = Σ_k conj(u_k) c_k |rest⟩, a one-fermion state
        let mut removed = PureState::zero(n)?;
        for k in 0..n {
            removed = removed.add_scaled(&rest.annihilate(k)?, orbital[k].conj())?;
        }
        let partner = DVector::from_fn(n, |k, _| removed.amplitude(1 << k) / lam.sqrt());
        // subtract √λ c†_ν c†_ν̄ |0⟩
        let mut pair_state = PureState::zero(n)?;
        for i in 0..n {
            for j in 0..n {
                let coeff = orbital[i] * partner[j] * lam.sqrt();
                if coeff.norm() == 0.0 {
                    continue;
                }
                let term = PureState::vacuum(n)?.create(j)?.create(i)?;
                pair_state = pair_state.add_scaled(&term, coeff)?;
            }
        }
        rest = rest.add_scaled(&pair_state, c(-1.0, 0.0))?;
        pairs.push(SlaterPair {
            lambda: lam,
            orbital,
            partner,
        });
    }
    Ok(SlaterDecomposition { pairs })
}
