//! Occupation-number representation of fermionic states.
//!
//! A basis state is an occupation bitmask; bit `k` set means mode `k` is
//! occupied. The basis state with mask `{k1 < k2 < ... < km}` is
//! `c†_{k1} c†_{k2} ... c†_{km} |0⟩` with phase +1, and every sign in the crate
//! follows from that ordering.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, ZERO};

/// Occupation bitmask.
pub type Mask = u64;

/// Largest mode count the bitmask layout can hold.
pub const MAX_MODES: usize = 63;
/// Mode count up to which the random constructors are supported.
pub const MAX_RANDOM_MODES: usize = 20;
/// Amplitudes with smaller modulus are dropped.
pub const PRUNE_THRESHOLD: f64 = 1e-14;
/// Tolerance on `⟨Ψ|Ψ⟩ = 1` for a normalized state.
pub const NORM_TOL: f64 = 1e-12;

#[inline]
pub fn bit(k: usize) -> Mask {
    1 << k
}

#[inline]
pub fn popcount(mask: Mask) -> usize {
    mask.count_ones() as usize
}

/// `(-1)^(number of occupied modes below k)`.
#[inline]
pub fn sign_below(mask: Mask, k: usize) -> f64 {
    if popcount(mask & (bit(k) - 1)).is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// All `r`-element subsets of `0..n` as masks, in lexicographic order of their
/// ascending index tuples.
pub fn combinations(n: usize, r: usize) -> Vec<Mask> {
    fn rec(start: usize, n: usize, r: usize, acc: Mask, out: &mut Vec<Mask>) {
        if r == 0 {
            out.push(acc);
            return;
        }
        for k in start..=(n - r) {
            rec(k + 1, n, r - 1, acc | bit(k), out);
        }
    }
    let mut out = Vec::new();
    if r <= n {
        rec(0, n, r, 0, &mut out);
    }
    out
}

/// Occupied modes of a mask in ascending order.
pub fn modes_of(mask: Mask) -> Vec<usize> {
    (0..64).filter(|&k| mask & bit(k) != 0).collect()
}

pub fn binomial(n: usize, r: usize) -> usize {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    (0..r).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Pure state as a sparse amplitude map over occupation masks.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    n: usize,
    amps: BTreeMap<Mask, Complex64>,
}

impl PureState {
    /// The zero vector on `n` modes.
    pub fn zero(n: usize) -> Result<Self> {
        if n > MAX_MODES {
            return Err(Error::TooManyModes(n));
        }
        Ok(Self {
            n,
            amps: BTreeMap::new(),
        })
    }

    pub fn vacuum(n: usize) -> Result<Self> {
        Self::basis(n, 0)
    }

    /// Basis Slater determinant for `mask`.
    pub fn basis(n: usize, mask: Mask) -> Result<Self> {
        let mut s = Self::zero(n)?;
        if n < 64 && mask >> n != 0 {
            return Err(Error::ModeOutOfRange {
                k: 63 - mask.leading_zeros() as usize,
                n,
            });
        }
        s.amps.insert(mask, c(1.0, 0.0));
        Ok(s)
    }

    /// `c†_{a1} c†_{a2} ... c†_{am} |0⟩` for the given creation string.
    pub fn from_creation_string(n: usize, modes: &[usize]) -> Result<Self> {
        let mut s = Self::vacuum(n)?;
        for &k in modes.iter().rev() {
            s = s.create(k)?;
        }
        Ok(s)
    }

    /// Builds a state from `(mask, amplitude)` pairs, summing duplicates.
    pub fn from_amplitudes<I>(n: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Mask, Complex64)>,
    {
        let mut s = Self::zero(n)?;
        for (mask, a) in terms {
            if mask >> n != 0 {
                return Err(Error::ModeOutOfRange {
                    k: 63 - mask.leading_zeros() as usize,
                    n,
                });
            }
            *s.amps.entry(mask).or_insert(ZERO) += a;
        }
        s.prune();
        Ok(s)
    }

    pub fn n_modes(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &BTreeMap<Mask, Complex64> {
        &self.amps
    }

    pub fn amplitude(&self, mask: Mask) -> Complex64 {
        self.amps.get(&mask).copied().unwrap_or(ZERO)
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    /// Fermion number shared by every nonzero amplitude, if any.
    pub fn particle_number(&self) -> Option<usize> {
        let mut it = self.amps.keys();
        let first = popcount(*it.next()?);
        it.all(|&m| popcount(m) == first).then_some(first)
    }

    /// Number parity (0 even, 1 odd) shared by every nonzero amplitude.
    pub fn parity(&self) -> Option<usize> {
        self.parity_on(Mask::MAX)
    }

    /// Number parity restricted to the modes in `subset`, if definite.
    pub fn parity_on(&self, subset: Mask) -> Option<usize> {
        let mut it = self.amps.keys();
        let first = popcount(*it.next()? & subset) % 2;
        it.all(|&m| popcount(m & subset) % 2 == first).then_some(first)
    }

    fn check_mode(&self, k: usize) -> Result<()> {
        if k >= self.n {
            Err(Error::ModeOutOfRange { k, n: self.n })
        } else {
            Ok(())
        }
    }

    fn prune(&mut self) {
        self.amps.retain(|_, a| a.norm() >= PRUNE_THRESHOLD);
    }

    /// `c†_k |Ψ⟩`, unnormalized.
    pub fn create(&self, k: usize) -> Result<Self> {
        self.check_mode(k)?;
        let amps = self
            .amps
            .iter()
            .filter(|(&m, _)| m & bit(k) == 0)
            .map(|(&m, &a)| (m | bit(k), a * sign_below(m, k)))
            .collect();
        Ok(Self { n: self.n, amps })
    }

    /// `c_k |Ψ⟩`, unnormalized.
    pub fn annihilate(&self, k: usize) -> Result<Self> {
        self.check_mode(k)?;
        let amps = self
            .amps
            .iter()
            .filter(|(&m, _)| m & bit(k) != 0)
            .map(|(&m, &a)| (m & !bit(k), a * sign_below(m, k)))
            .collect();
        Ok(Self { n: self.n, amps })
    }

    /// `⟨self|other⟩`, conjugate-linear in `self`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(self.n, other.n));
        }
        let (small, large, flip) = if self.amps.len() <= other.amps.len() {
            (self, other, false)
        } else {
            (other, self, true)
        };
        let mut acc = ZERO;
        for (m, a) in &small.amps {
            if let Some(b) = large.amps.get(m) {
                acc += if flip { b.conj() * a } else { a.conj() * b };
            }
        }
        Ok(acc)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Rescales to unit norm; the zero state cannot be normalized.
    pub fn normalized(&self) -> Result<Self> {
        let nrm = self.norm();
        if nrm < PRUNE_THRESHOLD {
            return Err(Error::NotNormalized(1.0));
        }
        Ok(self.scaled(c(1.0 / nrm, 0.0)))
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm_sqr() - 1.0).abs() <= tol
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        let mut s = Self {
            n: self.n,
            amps: self.amps.iter().map(|(&m, &a)| (m, a * factor)).collect(),
        };
        s.prune();
        s
    }

    /// `self + factor * other`.
    pub fn add_scaled(&self, other: &Self, factor: Complex64) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(self.n, other.n));
        }
        let mut s = self.clone();
        for (&m, &a) in &other.amps {
            *s.amps.entry(m).or_insert(ZERO) += a * factor;
        }
        s.prune();
        Ok(s)
    }

    /// Keeps only the basis terms accepted by `keep`.
    pub fn filter_masks(&self, keep: impl Fn(Mask) -> bool) -> Self {
        Self {
            n: self.n,
            amps: self
                .amps
                .iter()
                .filter(|(&m, _)| keep(m))
                .map(|(&m, &a)| (m, a))
                .collect(),
        }
    }

    /// Applies `f` to every amplitude, mask by mask.
    pub fn map_amplitudes(&self, f: impl Fn(Mask, Complex64) -> Complex64) -> Self {
        let mut s = Self {
            n: self.n,
            amps: self.amps.iter().map(|(&m, &a)| (m, f(m, a))).collect(),
        };
        s.prune();
        s
    }

    /// Dense amplitude vector over all `2^n` masks (small `n` only).
    pub fn to_dense(&self) -> Vec<Complex64> {
        let mut v = vec![ZERO; 1usize << self.n];
        for (&m, &a) in &self.amps {
            v[m as usize] = a;
        }
        v
    }

    /// `|⟨self|other⟩|` for normalized states.
    pub fn fidelity(&self, other: &Self) -> Result<f64> {
        Ok(self.inner(other)?.norm())
    }

    /// Maximum amplitude difference to another state.
    pub fn max_diff(&self, other: &Self) -> Result<f64> {
        Ok(self
            .add_scaled(other, c(-1.0, 0.0))?
            .amps
            .values()
            .map(|a| a.norm())
            .fold(0.0, f64::max))
    }

    pub fn to_json(&self) -> StateJson {
        StateJson {
            n: self.n,
            fixed_n: self.particle_number(),
            amplitudes: self
                .amps
                .iter()
                .map(|(&mask, a)| AmplitudeJson {
                    mask,
                    re: a.re,
                    im: a.im,
                })
                .collect(),
        }
    }

    pub fn from_json(j: &StateJson) -> Result<Self> {
        let s = Self::from_amplitudes(
            j.n,
            j.amplitudes.iter().map(|a| (a.mask, c(a.re, a.im))),
        )?;
        if let Some(big_n) = j.fixed_n {
            if s.amps.keys().any(|&m| popcount(m) != big_n) {
                return Err(Error::Parse(format!(
                    "amplitudes do not all carry fixed_N = {big_n}"
                )));
            }
        }
        Ok(s)
    }
}

/// Serialized form of a [`PureState`]; masks ascending.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct StateJson {
    pub n: usize,
    #[serde(rename = "fixed_N")]
    pub fixed_n: Option<usize>,
    pub amplitudes: Vec<AmplitudeJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct AmplitudeJson {
    pub mask: Mask,
    pub re: f64,
    pub im: f64,
}

impl Serialize for PureState {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(ser)
    }
}

impl<'de> Deserialize<'de> for PureState {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let j = StateJson::deserialize(de)?;
        PureState::from_json(&j).map_err(serde::de::Error::custom)
    }
}

/// Ensemble `ρ = Σ p_α |Ψ_α⟩⟨Ψ_α|`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MixedState {
    members: Vec<(f64, PureState)>,
}

impl MixedState {
    pub fn new(members: Vec<(f64, PureState)>) -> Result<Self> {
        let first = members
            .first()
            .ok_or_else(|| Error::InvalidEnsemble("empty ensemble".into()))?;
        let n = first.1.n_modes();
        let parity = first.1.parity();
        let mut total = 0.0;
        for (p, s) in &members {
            if *p < 0.0 || !p.is_finite() {
                return Err(Error::InvalidEnsemble(format!("negative weight {p}")));
            }
            if s.n_modes() != n {
                return Err(Error::DimensionMismatch(n, s.n_modes()));
            }
            if !s.is_normalized(NORM_TOL) {
                return Err(Error::NotNormalized((s.norm_sqr() - 1.0).abs()));
            }
            if s.parity().is_none() || s.parity() != parity {
                return Err(Error::IndefiniteParity);
            }
            total += p;
        }
        if (total - 1.0).abs() > NORM_TOL {
            return Err(Error::ProbabilitySum(total));
        }
        Ok(Self { members })
    }

    pub fn pure(state: PureState) -> Result<Self> {
        Self::new(vec![(1.0, state)])
    }

    pub fn members(&self) -> &[(f64, PureState)] {
        &self.members
    }

    pub fn n_modes(&self) -> usize {
        self.members[0].1.n_modes()
    }

    /// Fermion number shared by all members, if any.
    pub fn particle_number(&self) -> Option<usize> {
        let first = self.members[0].1.particle_number()?;
        self.members
            .iter()
            .all(|(_, s)| s.particle_number() == Some(first))
            .then_some(first)
    }
}

fn check_sizes(n: usize, big_n: usize) -> Result<()> {
    if big_n > n {
        return Err(Error::InvalidParticleNumber { big_n, n });
    }
    if n > MAX_RANDOM_MODES {
        return Err(Error::TooManyModes(n));
    }
    Ok(())
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random normalized state with i.i.d. complex Gaussian amplitudes on every
/// `N`-fermion basis state.
pub fn random_pure_state(n: usize, big_n: usize, seed: u64) -> Result<PureState> {
    check_sizes(n, big_n)?;
    if big_n == 0 && n == 0 {
        return PureState::vacuum(0);
    }
    let mut rng = seeded_rng(seed);
    random_pure_state_with(n, big_n, &mut rng)
}

pub fn random_pure_state_with<R: Rng + ?Sized>(
    n: usize,
    big_n: usize,
    rng: &mut R,
) -> Result<PureState> {
    check_sizes(n, big_n)?;
    let terms: Vec<_> = combinations(n, big_n)
        .into_iter()
        .map(|m| (m, c(rng.sample(StandardNormal), rng.sample(StandardNormal))))
        .collect();
    PureState::from_amplitudes(n, terms)?.normalized()
}

/// Haar-random one-body rotation of the reference determinant
/// `c†_0 ... c†_{N-1} |0⟩`.
pub fn random_slater_determinant(n: usize, big_n: usize, seed: u64) -> Result<PureState> {
    let mut rng = seeded_rng(seed);
    random_slater_determinant_with(n, big_n, &mut rng)
}

pub fn random_slater_determinant_with<R: Rng + ?Sized>(
    n: usize,
    big_n: usize,
    rng: &mut R,
) -> Result<PureState> {
    check_sizes(n, big_n)?;
    let reference = PureState::basis(n, (bit(big_n)) - 1)?;
    let u = crate::flo::OneBodyUnitary::haar(n, rng);
    crate::flo::apply_one_body_unitary(&reference, &u)
}

/// Equal superposition of `m = n / N` determinants on consecutive mode blocks.
pub fn ghz_like_state(n: usize, big_n: usize) -> Result<PureState> {
    if big_n == 0 || !n.is_multiple_of(big_n) || n / big_n < 2 {
        return Err(Error::NotMultiple { n, big_n });
    }
    if n > MAX_MODES {
        return Err(Error::TooManyModes(n));
    }
    let m = n / big_n;
    let amp = c(1.0 / (m as f64).sqrt(), 0.0);
    let block = bit(big_n) - 1;
    PureState::from_amplitudes(n, (0..m).map(|l| (block << (big_n * l), amp)))
}
