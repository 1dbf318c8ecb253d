//! Mode entanglement: partitions of the single-particle space, fermionic
//! partial traces, and the embedding `Θ` of multipartite tensor states as one
//! fermion per mode block.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::entropy::{self, EntropyFunction};
use crate::error::{Error, Result};
use crate::flo::{apply_one_body_unitary, OneBodyUnitary};
use crate::fock::{bit, popcount, Mask, MixedState, PureState, MAX_RANDOM_MODES};
use crate::linalg::{c, eigh, CMat, ZERO};
use crate::schmidt;
use crate::spdm::{self, SortedSpectrum};

/// Disjoint mode subsets covering `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubspacePartition {
    n: usize,
    blocks: Vec<Vec<usize>>,
}

impl SubspacePartition {
    pub fn new(n: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; n];
        for &k in blocks.iter().flatten() {
            if k >= n {
                return Err(Error::ModeOutOfRange { k, n });
            }
            if seen[k] {
                return Err(Error::InvalidPartition(format!("mode {k} appears twice")));
            }
            seen[k] = true;
        }
        if let Some(k) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidPartition(format!("mode {k} is not covered")));
        }
        let blocks = blocks
            .into_iter()
            .map(|mut b| {
                b.sort_unstable();
                b
            })
            .collect();
        Ok(Self { n, blocks })
    }

    /// Contiguous blocks of the given sizes.
    pub fn contiguous(dims: &[usize]) -> Self {
        let mut off = 0;
        let blocks = dims
            .iter()
            .map(|&d| {
                let b = (off..off + d).collect();
                off += d;
                b
            })
            .collect();
        Self { n: off, blocks }
    }

    pub fn n_modes(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_mask(&self, i: usize) -> Mask {
        mask_of(&self.blocks[i])
    }
}

fn mask_of(modes: &[usize]) -> Mask {
    modes.iter().fold(0, |m, &k| m | bit(k))
}

#[derive(Debug, Clone, Serialize)]
pub struct BlockDiagonalReport {
    /// `false` when some block lacks definite number parity.
    pub applicable: bool,
    pub reason: Option<String>,
    /// Largest `|ρ_{kk'}|` with `k`, `k'` in different blocks.
    pub max_cross: f64,
    pub block_diagonal: bool,
    #[serde(skip)]
    pub blocks: Vec<CMat>,
}

/// Checks that the SPDM of a state with definite local parities is the direct
/// sum of its blocks.
pub fn check_block_diagonal(state: &PureState, partition: &SubspacePartition) -> Result<BlockDiagonalReport> {
    if partition.n_modes() != state.n_modes() {
        return Err(Error::DimensionMismatch(partition.n_modes(), state.n_modes()));
    }
    if let Some(i) = (0..partition.blocks().len()).find(|&i| state.parity_on(partition.block_mask(i)).is_none()) {
        return Ok(BlockDiagonalReport {
            applicable: false,
            reason: Some(format!("block {i} has no definite number parity")),
            max_cross: f64::NAN,
            block_diagonal: false,
            blocks: Vec::new(),
        });
    }
    let rho = spdm::compute_spdm(state)?;
    let m = spdm::HermitianMatrix::matrix(&rho);
    let mut owner = vec![0; state.n_modes()];
    for (i, b) in partition.blocks().iter().enumerate() {
        for &k in b {
            owner[k] = i;
        }
    }
    let mut max_cross: f64 = 0.0;
    for a in 0..m.nrows() {
        for b in 0..m.ncols() {
            if owner[a] != owner[b] {
                max_cross = max_cross.max(m[(a, b)].norm());
            }
        }
    }
    let blocks = partition.blocks().iter().map(|b| rho.restrict_modes(b)).collect();
    Ok(BlockDiagonalReport {
        applicable: true,
        reason: None,
        max_cross,
        block_diagonal: max_cross <= 1e-10,
        blocks,
    })
}

/// `ρ_S = Tr_{S⊥} |Ψ⟩⟨Ψ|` on the Fock space of the modes `S` (relabelled
/// `0..|S|` in ascending order).
#[derive(Debug, Clone)]
pub struct ReducedState {
    pub modes: Vec<usize>,
    /// Local masks with nonzero weight, indexing `matrix`.
    pub support: Vec<Mask>,
    /// `(C C†)` restricted to `support`.
    pub matrix: CMat,
    /// Eigendecomposition as an ensemble of local pure states.
    pub ensemble: MixedState,
}

impl ReducedState {
    /// `⟨μ|ρ_S|μ'⟩` for local masks.
    pub fn entry(&self, mu: Mask, mu2: Mask) -> Complex64 {
        match (self.support.binary_search(&mu), self.support.binary_search(&mu2)) {
            (Ok(i), Ok(j)) => self.matrix[(i, j)],
            _ => ZERO,
        }
    }

    pub fn spectrum(&self) -> SortedSpectrum {
        SortedSpectrum::from_unsorted(self.ensemble.members().iter().map(|(p, _)| *p).collect())
    }

    /// `Σ_ν f(p_ν)` over the eigenvalues of `ρ_S`.
    pub fn entropy(&self, f: &EntropyFunction) -> f64 {
        entropy::trace_form_entropy(&self.spectrum(), f)
    }
}

fn compress(mask: Mask, modes: &[usize]) -> Mask {
    modes
        .iter()
        .enumerate()
        .filter(|(_, &k)| mask & bit(k) != 0)
        .fold(0, |m, (i, _)| m | bit(i))
}

/// Fermionic partial trace onto `modes`. The state must have definite number
/// parity on `modes`.
pub fn reduced_state(state: &PureState, modes: &[usize]) -> Result<ReducedState> {
    let n = state.n_modes();
    let mut modes = modes.to_vec();
    modes.sort_unstable();
    modes.dedup();
    if let Some(&k) = modes.iter().find(|&&k| k >= n) {
        return Err(Error::ModeOutOfRange { k, n });
    }
    let s_mask = mask_of(&modes);
    if state.parity_on(s_mask).is_none() {
        return Err(Error::IndefiniteParity);
    }
    // C_{μν} with the sign of moving every S creator before the S⊥ ones
    let mut columns: BTreeMap<Mask, Vec<(Mask, Complex64)>> = BTreeMap::new();
    for (&m, &a) in state.amplitudes() {
        let inside = m & s_mask;
        let outside = m & !s_mask;
        let crossings: usize = (0..n)
            .filter(|&b| inside & bit(b) != 0)
            .map(|b| popcount(outside & (bit(b) - 1)))
            .sum();
        let sign = if crossings.is_multiple_of(2) { 1.0 } else { -1.0 };
        columns
            .entry(outside)
            .or_default()
            .push((compress(inside, &modes), a * sign));
    }
    let mut support: Vec<Mask> = columns.values().flatten().map(|(mu, _)| *mu).collect();
    support.sort_unstable();
    support.dedup();
    let dim = support.len();
    let mut matrix = CMat::zeros(dim, dim);
    for col in columns.values() {
        for &(mu, a) in col {
            let i = support.binary_search(&mu).expect("in support");
            for &(mu2, b) in col {
                let j = support.binary_search(&mu2).expect("in support");
                matrix[(i, j)] += a * b.conj();
            }
        }
    }
    let ensemble = diagonalize_by_sector(&matrix, &support, modes.len())?;
    Ok(ReducedState { modes, support, matrix, ensemble })
}

/// Eigen-ensemble of `ρ_S`, diagonalized within fermion-number sectors when
/// they do not cohere and within the (single) parity sector otherwise.
fn diagonalize_by_sector(matrix: &CMat, support: &[Mask], n_local: usize) -> Result<MixedState> {
    let dim = support.len();
    let coherent = (0..dim).any(|i| {
        (0..dim).any(|j| popcount(support[i]) != popcount(support[j]) && matrix[(i, j)].norm() > 1e-12)
    });
    let mut sectors: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &mu) in support.iter().enumerate() {
        let key = if coherent { popcount(mu) % 2 } else { popcount(mu) };
        sectors.entry(key).or_default().push(i);
    }
    let mut members = Vec::new();
    for idx in sectors.values() {
        let sub = CMat::from_fn(idx.len(), idx.len(), |a, b| matrix[(idx[a], idx[b])]);
        let eig = eigh(&sub)?;
        for (col, &p) in eig.values.iter().enumerate() {
            if p <= 1e-14 {
                continue;
            }
            let s = PureState::from_amplitudes(
                n_local,
                idx.iter().enumerate().map(|(a, &i)| (support[i], eig.vectors[(a, col)])),
            )?
            .normalized()?;
            members.push((p, s));
        }
    }
    let total: f64 = members.iter().map(|(p, _)| p).sum();
    for m in &mut members {
        m.0 /= total;
    }
    members.sort_by(|a, b| b.0.total_cmp(&a.0));
    MixedState::new(members)
}

#[derive(Debug, Clone, Serialize)]
pub struct ModeRelationReport {
    /// Modes `ν_i` of the Slater pairs after rotating to the pair basis.
    pub a_modes: Vec<usize>,
    pub e_ab: f64,
    pub e_psi: f64,
    pub residual: f64,
    pub holds: bool,
}

/// For `N = 2`, rotates to the Slater pair basis and compares the mode
/// entanglement between the `ν` and `ν̄` modes with half the one-body
/// entanglement.
pub fn two_fermion_mode_relation(state: &PureState, f: &EntropyFunction) -> Result<ModeRelationReport> {
    let n = state.n_modes();
    let dec = schmidt::slater_decomposition(state)?;
    let w = OneBodyUnitary::new(dec.pair_basis(n))?;
    let rotated = apply_one_body_unitary(state, &w)?;
    let a_modes: Vec<usize> = (0..dec.pairs.len()).map(|i| 2 * i).collect();
    let e_ab = reduced_state(&rotated, &a_modes)?.entropy(f);
    let e_psi = entropy::one_body_entanglement(state, f)?;
    let residual = (e_ab - e_psi / 2.0).abs();
    Ok(ModeRelationReport { a_modes, e_ab, e_psi, residual, holds: residual <= 1e-9 })
}

/// Normalized pure state of distinguishable subsystems with local dimensions
/// `dims`.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorState {
    dims: Vec<usize>,
    amps: BTreeMap<Vec<usize>, Complex64>,
}

#[derive(Serialize, Deserialize)]
struct TensorJson {
    dims: Vec<usize>,
    amplitudes: Vec<TensorAmpJson>,
}

#[derive(Serialize, Deserialize)]
struct TensorAmpJson {
    index: Vec<usize>,
    re: f64,
    im: f64,
}

impl Serialize for TensorState {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TensorJson {
            dims: self.dims.clone(),
            amplitudes: self
                .amps
                .iter()
                .map(|(i, a)| TensorAmpJson { index: i.clone(), re: a.re, im: a.im })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for TensorState {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = TensorJson::deserialize(d)?;
        TensorState::new(j.dims, j.amplitudes.into_iter().map(|a| (a.index, c(a.re, a.im))))
            .map_err(serde::de::Error::custom)
    }
}

impl TensorState {
    pub fn new<I>(dims: Vec<usize>, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<usize>, Complex64)>,
    {
        let total: usize = dims.iter().sum();
        if total > MAX_RANDOM_MODES {
            return Err(Error::TooManyModes(total));
        }
        if dims.contains(&0) {
            return Err(Error::InvalidParameters("local dimension 0".into()));
        }
        let mut amps: BTreeMap<Vec<usize>, Complex64> = BTreeMap::new();
        for (idx, a) in terms {
            if idx.len() != dims.len() || idx.iter().zip(&dims).any(|(i, d)| i >= d) {
                return Err(Error::InvalidParameters(format!("index {idx:?} outside dims {dims:?}")));
            }
            *amps.entry(idx).or_insert(ZERO) += a;
        }
        amps.retain(|_, a| a.norm() > 1e-14);
        let nrm: f64 = amps.values().map(|a| a.norm_sqr()).sum();
        if (nrm - 1.0).abs() > 1e-12 {
            return Err(Error::NotNormalized((nrm - 1.0).abs()));
        }
        Ok(Self { dims, amps })
    }

    /// `⊗_i |φ_i⟩`, normalizing each factor.
    pub fn product(factors: &[Vec<Complex64>]) -> Result<Self> {
        let dims: Vec<usize> = factors.iter().map(Vec::len).collect();
        let normed: Vec<Vec<Complex64>> = factors
            .iter()
            .map(|v| {
                let nrm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
                v.iter().map(|a| a / nrm).collect()
            })
            .collect();
        let terms = product_indices(&dims).into_iter().map(|idx| {
            let a = idx.iter().enumerate().map(|(i, &x)| normed[i][x]).product();
            (idx, a)
        });
        Self::new(dims, terms.collect::<Vec<_>>())
    }

    /// `(|0...0⟩ + |1...1⟩)/√2` on `parties` qubits.
    pub fn ghz_qubits(parties: usize) -> Result<Self> {
        let h = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self::new(vec![2; parties], [(vec![0; parties], h), (vec![1; parties], h)])
    }

    /// Gaussian random amplitudes, normalized.
    pub fn random<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> Result<Self> {
        let idx = product_indices(dims);
        let raw: Vec<Complex64> = idx
            .iter()
            .map(|_| c(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let nrm = raw.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        Self::new(dims.to_vec(), idx.into_iter().zip(raw.into_iter().map(|a| a / nrm)))
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn amplitudes(&self) -> &BTreeMap<Vec<usize>, Complex64> {
        &self.amps
    }

    pub fn offsets(&self) -> Vec<usize> {
        self.dims
            .iter()
            .scan(0, |acc, &d| {
                let o = *acc;
                *acc += d;
                Some(o)
            })
            .collect()
    }

    pub fn partition(&self) -> SubspacePartition {
        SubspacePartition::contiguous(&self.dims)
    }

    /// Reduced density matrix of party `i`, `(ρ_i)_{aa'} = Σ ψ(..a..) ψ*(..a'..)`.
    pub fn local_density(&self, i: usize) -> CMat {
        let d = self.dims[i];
        let mut groups: BTreeMap<Vec<usize>, Vec<(usize, Complex64)>> = BTreeMap::new();
        for (idx, &a) in &self.amps {
            let mut rest = idx.clone();
            let local = rest.remove(i);
            groups.entry(rest).or_default().push((local, a));
        }
        let mut rho = CMat::zeros(d, d);
        for g in groups.values() {
            for &(x, a) in g {
                for &(y, b) in g {
                    rho[(x, y)] += a * b.conj();
                }
            }
        }
        rho
    }

    /// `(u_i ⊗ 𝟙) |ψ⟩` on party `i`.
    pub fn apply_local(&self, i: usize, u: &CMat) -> Result<Self> {
        let d = self.dims[i];
        if u.nrows() != d || u.ncols() != d {
            return Err(Error::DimensionMismatch(d, u.nrows()));
        }
        let mut out: Vec<(Vec<usize>, Complex64)> = Vec::new();
        for (idx, &a) in &self.amps {
            for x in 0..d {
                let mut j = idx.clone();
                j[i] = x;
                out.push((j, u[(x, idx[i])] * a));
            }
        }
        Self::new(self.dims.clone(), out)
    }

    /// Projective measurement of party `i` in its computational basis:
    /// `(probability, post-measurement state)` per outcome `a`.
    pub fn measure_local(&self, i: usize) -> Result<Vec<(f64, Option<Self>)>> {
        (0..self.dims[i])
            .map(|a| {
                let kept: Vec<_> = self
                    .amps
                    .iter()
                    .filter(|(idx, _)| idx[i] == a)
                    .map(|(idx, &x)| (idx.clone(), x))
                    .collect();
                let p: f64 = kept.iter().map(|(_, x)| x.norm_sqr()).sum();
                if p < crate::flo::P_FLOOR {
                    return Ok((p, None));
                }
                let s = p.sqrt();
                let post = Self::new(self.dims.clone(), kept.into_iter().map(|(j, x)| (j, x / s)))?;
                Ok((p, Some(post)))
            })
            .collect()
    }
}

fn product_indices(dims: &[usize]) -> Vec<Vec<usize>> {
    dims.iter().fold(vec![Vec::new()], |acc, &d| {
        acc.into_iter()
            .flat_map(|prefix| {
                (0..d).map(move |x| {
                    let mut v = prefix.clone();
                    v.push(x);
                    v
                })
            })
            .collect()
    })
}

/// `Θ`: party `i` in local state `a` becomes a fermion in mode
/// `offset_i + a`, creators applied in ascending block order.
pub fn theta_map(ts: &TensorState) -> Result<PureState> {
    let offsets = ts.offsets();
    let n: usize = ts.dims().iter().sum();
    PureState::from_amplitudes(
        n,
        ts.amplitudes().iter().map(|(idx, &a)| {
            let mask = idx.iter().zip(&offsets).fold(0, |m, (&x, &o)| m | bit(o + x));
            (mask, a)
        }),
    )
}

/// Mode-space unitary acting as `u` on block `i` of a contiguous layout, in
/// the convention of [`apply_one_body_unitary`].
pub fn block_unitary(dims: &[usize], i: usize, u: &CMat) -> Result<OneBodyUnitary> {
    let blocks: Vec<CMat> = dims
        .iter()
        .enumerate()
        .map(|(j, &d)| if j == i { u.adjoint() } else { CMat::identity(d, d) })
        .collect();
    OneBodyUnitary::block_diagonal(&blocks)
}

/// `Σ_i Tr f(ρ_i)` over the local reduced states.
pub fn multipartite_monotone(ts: &TensorState, f: &EntropyFunction) -> Result<f64> {
    (0..ts.dims().len())
        .map(|i| {
            let spec = spdm::spectrum(&ts.local_density(i))?;
            Ok(entropy::trace_form_entropy(&spec, f))
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flo::measure_occupation;
    use crate::linalg;
    use crate::fock::{random_pure_state, random_slater_determinant, seeded_rng};
    use crate::linalg::haar_unitary;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn h() -> Complex64 {
        c(FRAC_1_SQRT_2, 0.0)
    }

    fn pair_state() -> PureState {
        // (c†0 c†2 + c†1 c†3)/√2
        PureState::from_amplitudes(4, [(0b0101, h()), (0b1010, h())]).unwrap()
    }

    #[test]
    fn partition_validation() {
        assert!(SubspacePartition::new(4, vec![vec![0, 1], vec![2, 3]]).is_ok());
        assert!(SubspacePartition::new(4, vec![vec![0, 1], vec![1, 2, 3]]).is_err());
        assert!(SubspacePartition::new(4, vec![vec![0, 1], vec![2]]).is_err());
        assert_eq!(SubspacePartition::contiguous(&[2, 3]).blocks()[1], vec![2, 3, 4]);
    }

    #[test]
    fn block_diagonal_examples() {
        let part = SubspacePartition::new(4, vec![vec![0, 1], vec![2, 3]]).unwrap();
        let r = check_block_diagonal(&pair_state(), &part).unwrap();
        assert!(r.applicable && r.block_diagonal);
        for b in &r.blocks {
            assert!(linalg::max_abs(&(b - CMat::identity(2, 2).scale(0.5))) < 1e-15);
        }
        let spread = PureState::from_amplitudes(4, [(0b0001, h()), (0b0100, h())]).unwrap();
        assert!(!check_block_diagonal(&spread, &part).unwrap().applicable);
        let sd = PureState::from_creation_string(4, &[0, 2]).unwrap();
        let r = check_block_diagonal(&sd, &part).unwrap();
        assert!(r.block_diagonal);
        for b in &r.blocks {
            assert!(linalg::max_abs(&(b * b - b)) < 1e-15);
        }
    }

    #[test]
    fn reduced_state_examples() {
        let sd = PureState::from_creation_string(4, &[0, 2]).unwrap();
        let r = reduced_state(&sd, &[0, 1]).unwrap();
        assert_eq!(r.ensemble.members().len(), 1);
        assert!(r.entropy(&EntropyFunction::von_neumann()).abs() < 1e-15);

        let r = reduced_state(&pair_state(), &[0, 1]).unwrap();
        assert!((r.entropy(&EntropyFunction::von_neumann()) - 1.0).abs() < 1e-14);
        assert!((r.entry(0b01, 0b01).re - 0.5).abs() < 1e-15);
        assert!(r.entry(0b01, 0b10).norm() < 1e-15);

        let bad = PureState::from_amplitudes(4, [(0b0001, h()), (0b0100, h())]).unwrap();
        assert!(reduced_state(&bad, &[0, 1]).is_err());
    }

    #[test]
    fn reduced_state_reproduces_local_one_body_expectations() {
        let mut rng = seeded_rng(6);
        for trial in 0..100u64 {
            let n = 4 + (trial % 3) as usize;
            let big_n = 1 + (trial % 3) as usize;
            let mut modes: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.5)).collect();
            if modes.is_empty() {
                modes.push(0);
            }
            // project onto even local parity so the reduction is physical
            let s_mask = mask_of(&modes);
            let s = random_pure_state(n, big_n, trial)
                .unwrap()
                .filter_masks(|m| popcount(m & s_mask).is_multiple_of(2));
            if s.is_empty() {
                continue;
            }
            let s = s.normalized().unwrap();
            let r = reduced_state(&s, &modes).unwrap();
            let local = spdm::compute_spdm_mixed(&r.ensemble).unwrap();
            let global = spdm::compute_spdm(&s).unwrap().restrict_modes(&modes);
            let diff = linalg::max_abs(&(spdm::HermitianMatrix::matrix(&local) - global));
            assert!(diff < 1e-10, "trial {trial}: {diff}");
        }
    }

    #[test]
    fn two_fermion_relation_examples() {
        let vn = EntropyFunction::von_neumann();
        let sd = PureState::from_creation_string(4, &[0, 3]).unwrap();
        let r = two_fermion_mode_relation(&sd, &vn).unwrap();
        assert!(r.e_ab.abs() < 1e-12 && r.holds);

        let s = PureState::from_amplitudes(4, [(0b0011, c(0.8f64.sqrt(), 0.0)), (0b1100, c(0.2f64.sqrt(), 0.0))]).unwrap();
        let r = two_fermion_mode_relation(&s, &vn).unwrap();
        assert!((r.e_ab - 0.7219280948873623).abs() < 1e-9);
        assert!((r.e_psi - 1.4438561897747248).abs() < 1e-9);

        for seed in 0..20 {
            let s = random_pure_state(4 + (seed % 4) as usize, 2, seed).unwrap();
            assert!(two_fermion_mode_relation(&s, &EntropyFunction::linear()).unwrap().holds);
        }
        assert!(two_fermion_mode_relation(&random_pure_state(5, 3, 0).unwrap(), &vn).is_err());
    }

    #[test]
    fn theta_examples() {
        let prod = TensorState::product(&[vec![c(1.0, 0.0), c(2.0, 1.0)], vec![c(0.5, 0.0), c(0.0, 0.5)]]).unwrap();
        let f = theta_map(&prod).unwrap();
        assert!(spdm::is_idempotent(&spdm::compute_spdm(&f).unwrap(), 1e-12));

        let bell = TensorState::new(vec![2, 2], [(vec![0, 0], h()), (vec![1, 1], h())]).unwrap();
        let f = theta_map(&bell).unwrap();
        assert_eq!(f, pair_state());
        let lin = EntropyFunction::linear();
        assert!((multipartite_monotone(&bell, &lin).unwrap() - 1.0).abs() < 1e-14);
        let ghz3 = TensorState::ghz_qubits(3).unwrap();
        assert!((multipartite_monotone(&ghz3, &lin).unwrap() - 1.5).abs() < 1e-14);
        assert!(multipartite_monotone(&prod, &lin).unwrap().abs() < 1e-12);
        assert!(TensorState::new(vec![10, 11], [(vec![0, 0], c(1.0, 0.0))]).is_err());
    }

    #[test]
    fn theta_block_identity_and_naturality() {
        let mut rng = seeded_rng(8);
        for trial in 0..30 {
            let dims = if trial % 2 == 0 { vec![2, 2] } else { vec![2, 3, 2] };
            let ts = TensorState::random(&dims, &mut rng).unwrap();
            let f = theta_map(&ts).unwrap();
            let rho = spdm::compute_spdm(&f).unwrap();
            let part = ts.partition();
            for (i, b) in part.blocks().iter().enumerate() {
                assert!(linalg::max_abs(&(rho.restrict_modes(b) - ts.local_density(i))) < 1e-10);
            }
            assert!(check_block_diagonal(&f, &part).unwrap().block_diagonal);

            let i = trial % dims.len();
            let u = haar_unitary(dims[i], &mut rng);
            let lhs = theta_map(&ts.apply_local(i, &u).unwrap()).unwrap();
            let rhs = apply_one_body_unitary(&f, &block_unitary(&dims, i, &u).unwrap()).unwrap();
            assert!(lhs.fidelity(&rhs).unwrap() >= 1.0 - 1e-10);

            let offs = ts.offsets();
            for (a, (p, post)) in ts.measure_local(i).unwrap().into_iter().enumerate() {
                let occ = &measure_occupation(&f, offs[i] + a).unwrap()[0];
                assert!((occ.probability - p).abs() < 1e-10);
                if let Some(post) = post {
                    let mapped = theta_map(&post).unwrap();
                    assert!(mapped.max_diff(occ.pure().unwrap()).unwrap() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn sd_blocks_are_idempotent() {
        // orbitals confined to single blocks give SDs with definite local parity
        let mut rng = seeded_rng(12);
        for trial in 0..40u64 {
            let dims = [3, 3];
            let u = OneBodyUnitary::block_diagonal(&[haar_unitary(3, &mut rng), haar_unitary(3, &mut rng)]).unwrap();
            let occupied = [0b000011, 0b001001, 0b011010, 0b000100][(trial % 4) as usize];
            let sd = apply_one_body_unitary(&PureState::basis(6, occupied).unwrap(), &u).unwrap();
            let part = SubspacePartition::contiguous(&dims);
            let r = check_block_diagonal(&sd, &part).unwrap();
            assert!(r.applicable && r.block_diagonal);
            assert!(r.blocks.iter().all(|b| linalg::max_abs(&(b * b - b)) < 1e-10));
        }
        // a generic SD has no definite parity on half the modes
        let sd = random_slater_determinant(6, 3, 1).unwrap();
        assert!(!check_block_diagonal(&sd, &SubspacePartition::contiguous(&[3, 3])).unwrap().applicable);
    }

    #[test]
    fn tensor_json_layout() {
        let bell = TensorState::new(vec![2, 2], [(vec![0, 0], h()), (vec![1, 1], h())]).unwrap();
        let j = serde_json::to_value(&bell).unwrap();
        assert_eq!(j["dims"], serde_json::json!([2, 2]));
        assert_eq!(j["amplitudes"][1]["index"], serde_json::json!([1, 1]));
        let back: TensorState = serde_json::from_value(j).unwrap();
        assert_eq!(back, bell);
        assert!(serde_json::from_str::<TensorState>(r#"{"dims":[2],"amplitudes":[{"index":[0],"re":0.5,"im":0}]}"#).is_err());
    }
}
