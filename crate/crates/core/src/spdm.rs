//! Single-particle density matrices, their extension to `2n x 2n`, and sorted
//! spectra.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{MixedState, PureState};
use crate::linalg::{self, c, eigh, hermiticity_error, max_abs, CMat, HermitianEigen};

/// Accepted deviation of `⟨Ψ|Ψ⟩` from 1 for density-matrix inputs.
pub const INPUT_NORM_TOL: f64 = 1e-9;
/// Hermiticity tolerance for spectra.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Eigenvalues at or below this are treated as zero when counting rank.
pub const RANK_THRESHOLD: f64 = 1e-10;

/// Real values in descending order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SortedSpectrum(Vec<f64>);

impl SortedSpectrum {
    /// Wraps values that are already descending (ties within 1e-12).
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.windows(2).any(|w| w[1] > w[0] + 1e-12) {
            return Err(Error::Unsorted);
        }
        Ok(Self(values))
    }

    pub fn from_unsorted(mut values: Vec<f64>) -> Self {
        values.sort_by(|a, b| b.total_cmp(a));
        Self(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    /// Entries above [`RANK_THRESHOLD`].
    pub fn nonzero(&self) -> Self {
        Self(self.0.iter().copied().filter(|&x| x > RANK_THRESHOLD).collect())
    }

    pub fn to_csv_row(&self) -> String {
        self.0
            .iter()
            .map(|x| format!("{x:.17e}"))
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let len = self.len().max(other.len());
        (0..len)
            .map(|i| {
                let a = self.0.get(i).copied().unwrap_or(0.0);
                let b = other.0.get(i).copied().unwrap_or(0.0);
                (a - b).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// A Hermitian matrix whose spectrum can be taken.
pub trait HermitianMatrix {
    fn matrix(&self) -> &CMat;
}

impl HermitianMatrix for CMat {
    fn matrix(&self) -> &CMat {
        self
    }
}

/// `ρ⁽¹⁾` with entries `ρ_{kk'} = ⟨c†_{k'} c_k⟩`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OneBodyDM(#[serde(with = "linalg::serde_matrix")] CMat);

impl OneBodyDM {
    /// Validates a Hermitian matrix with eigenvalues in `[0, 1]`.
    pub fn from_matrix(m: CMat) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotSquare(m.nrows(), m.ncols()));
        }
        let herm = hermiticity_error(&m);
        if herm > HERMITIAN_TOL {
            return Err(Error::NotHermitian(herm));
        }
        let m = (&m + m.adjoint()).scale(0.5);
        let eig = eigh(&m)?;
        if let Some(&bad) = eig
            .values
            .iter()
            .find(|&&x| !(-1e-10..=1.0 + 1e-10).contains(&x))
        {
            return Err(Error::OutOfUnitInterval(bad));
        }
        Ok(Self(m))
    }

    pub fn n_modes(&self) -> usize {
        self.0.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    pub fn natural_orbitals(&self) -> Result<HermitianEigen> {
        eigh(&self.0)
    }

    pub fn spectrum(&self) -> Result<SortedSpectrum> {
        spectrum(self)
    }

    /// Restriction to a set of computational modes, in the given order.
    pub fn restrict_modes(&self, modes: &[usize]) -> CMat {
        CMat::from_fn(modes.len(), modes.len(), |i, j| self.0[(modes[i], modes[j])])
    }

    /// Restriction `B† ρ B` to the span of orthonormal columns of `basis`.
    pub fn restrict(&self, basis: &CMat) -> CMat {
        linalg::restrict(&self.0, basis)
    }

    pub fn into_matrix(self) -> CMat {
        self.0
    }
}

impl HermitianMatrix for OneBodyDM {
    fn matrix(&self) -> &CMat {
        &self.0
    }
}

/// `D⁽¹⁾ = ρ⁽¹⁾ ⊕ (1 - ρ⁽¹⁾ᵀ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ExtendedDM(#[serde(with = "linalg::serde_matrix")] CMat);

impl ExtendedDM {
    pub fn n_modes(&self) -> usize {
        self.0.nrows() / 2
    }

    pub fn spectrum(&self) -> Result<SortedSpectrum> {
        spectrum(self)
    }
}

impl HermitianMatrix for ExtendedDM {
    fn matrix(&self) -> &CMat {
        &self.0
    }
}

/// Raw `⟨Ψ|c†_{k'} c_k|Ψ⟩` matrix, computed as `⟨c_{k'}Ψ|c_kΨ⟩`.
pub(crate) fn spdm_matrix(state: &PureState) -> CMat {
    let n = state.n_modes();
    let removed: Vec<PureState> = (0..n)
        .map(|k| state.annihilate(k).expect("mode in range"))
        .collect();
    let mut m = CMat::zeros(n, n);
    for k in 0..n {
        for kp in k..n {
            let v = removed[kp].inner(&removed[k]).expect("same mode count");
            m[(k, kp)] = v;
            m[(kp, k)] = v.conj();
        }
    }
    m
}

fn symmetrize(m: CMat) -> CMat {
    (&m + m.adjoint()).scale(0.5)
}

/// SPDM of a normalized pure state.
pub fn compute_spdm(state: &PureState) -> Result<OneBodyDM> {
    let dev = (state.norm_sqr() - 1.0).abs();
    if dev > INPUT_NORM_TOL {
        return Err(Error::NotNormalized(dev));
    }
    Ok(OneBodyDM(symmetrize(spdm_matrix(state))))
}

/// Ensemble-averaged SPDM of a mixed state.
pub fn compute_spdm_mixed(state: &MixedState) -> Result<OneBodyDM> {
    let n = state.n_modes();
    let mut acc = CMat::zeros(n, n);
    for (p, member) in state.members() {
        acc += compute_spdm(member)?.0.scale(*p);
    }
    Ok(OneBodyDM(symmetrize(acc)))
}

/// Descending eigenvalues of a Hermitian matrix.
pub fn spectrum<M: HermitianMatrix + ?Sized>(m: &M) -> Result<SortedSpectrum> {
    let m = m.matrix();
    if !m.is_square() {
        return Err(Error::NotSquare(m.nrows(), m.ncols()));
    }
    let herm = hermiticity_error(m);
    if herm > HERMITIAN_TOL * max_abs(m).max(1.0) {
        return Err(Error::NotHermitian(herm));
    }
    Ok(SortedSpectrum(eigh(m)?.values))
}

pub fn extended_dm(rho: &OneBodyDM) -> ExtendedDM {
    let n = rho.n_modes();
    let mut d = CMat::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            d[(i, j)] = rho.0[(i, j)];
            let delta = if i == j { 1.0 } else { 0.0 };
            d[(n + i, n + j)] = c(delta, 0.0) - rho.0[(j, i)];
        }
    }
    ExtendedDM(d)
}

/// Nonzero spectrum of `ρ⁽ᴺ⁻¹⁾ = Λᵀ Λ*`, i.e. the squared singular values of
/// the coefficient matrix.
pub fn rho_n_minus_1_spectrum(state: &PureState) -> Result<SortedSpectrum> {
    let lambda = crate::schmidt::build_lambda(state)?;
    let svd = linalg::svd_full(lambda.matrix())?;
    Ok(SortedSpectrum(svd.singular_values.iter().map(|s| s * s).collect()).nonzero())
}

pub fn is_idempotent(rho: &OneBodyDM, tol: f64) -> bool {
    max_abs(&(&rho.0 * &rho.0 - &rho.0)) <= tol
}
