//! Free operations of fermion linear optics: one-body unitaries and the
//! single-mode measurements built from occupation projectors, plus the
//! two-mode joint occupation measurement, which is not free.

use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{bit, popcount, Mask, MixedState, PureState};
use crate::linalg::{self, c, haar_unitary, unitarity_error, CMat, MatrixRows, ONE, ZERO};
use crate::spdm::{self, ExtendedDM, OneBodyDM, INPUT_NORM_TOL};

/// Unitarity tolerance for mode-space matrices.
pub const UNITARY_TOL: f64 = 1e-10;
/// Branches with smaller probability carry no post-measurement state.
pub const P_FLOOR: f64 = 1e-12;

/// `n x n` unitary on mode space.
///
/// [`apply_one_body_unitary`] transforms the SPDM as `ρ → U† ρ U`, so the
/// columns of `U` become the new computational modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixRows", into = "MatrixRows")]
pub struct OneBodyUnitary(CMat);

impl TryFrom<MatrixRows> for OneBodyUnitary {
    type Error = Error;
    fn try_from(rows: MatrixRows) -> Result<Self> {
        Self::new(linalg::matrix_from_rows(&rows)?)
    }
}

impl From<OneBodyUnitary> for MatrixRows {
    fn from(u: OneBodyUnitary) -> Self {
        linalg::matrix_to_rows(&u.0)
    }
}

impl OneBodyUnitary {
    pub fn new(m: CMat) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotSquare(m.nrows(), m.ncols()));
        }
        let err = unitarity_error(&m);
        if err > UNITARY_TOL {
            return Err(Error::NotUnitary(err));
        }
        Ok(Self(m))
    }

    pub fn identity(n: usize) -> Self {
        Self(CMat::identity(n, n))
    }

    pub fn haar<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        Self(haar_unitary(n, rng))
    }

    /// Unitary whose application carries mode `i` to mode `perm[i]`.
    pub fn permutation(perm: &[usize]) -> Result<Self> {
        let n = perm.len();
        let mut seen = vec![false; n];
        let mut m = CMat::zeros(n, n);
        for (i, &p) in perm.iter().enumerate() {
            if p >= n || seen[p] {
                return Err(Error::InvalidParameters(format!("{perm:?} is not a permutation")));
            }
            seen[p] = true;
            m[(i, p)] = ONE;
        }
        Ok(Self(m))
    }

    /// Direct sum of square blocks along the diagonal.
    pub fn block_diagonal(blocks: &[CMat]) -> Result<Self> {
        let n: usize = blocks.iter().map(|b| b.nrows()).sum();
        let mut m = CMat::zeros(n, n);
        let mut off = 0;
        for b in blocks {
            if !b.is_square() {
                return Err(Error::NotSquare(b.nrows(), b.ncols()));
            }
            m.view_mut((off, off), (b.nrows(), b.ncols())).copy_from(b);
            off += b.nrows();
        }
        Self::new(m)
    }

    /// Product of a gate list in application order.
    pub fn from_gates(n: usize, gates: &[GateSpec]) -> Result<Self> {
        let mut m = CMat::identity(n, n);
        for g in gates {
            m *= g.unitary(n)?.0;
        }
        Self::new(m)
    }

    pub fn n_modes(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    /// `self` followed by `other`.
    pub fn then(&self, other: &Self) -> Self {
        Self(&self.0 * &other.0)
    }
}

/// `e^{-iφ c†_k c_k}` as a mode-space matrix.
pub fn phase_shifter(n: usize, k: usize, phi: f64) -> Result<OneBodyUnitary> {
    check_mode(k, n)?;
    let mut m = CMat::identity(n, n);
    m[(k, k)] = Complex64::from_polar(1.0, -phi);
    Ok(OneBodyUnitary(m))
}

/// `e^{-iθ(c†_k c_k' + c†_k' c_k)}` as a mode-space matrix.
pub fn beam_splitter(n: usize, k: usize, k2: usize, theta: f64) -> Result<OneBodyUnitary> {
    check_mode(k, n)?;
    check_mode(k2, n)?;
    if k == k2 {
        return Err(Error::InvalidParameters("beam splitter needs two distinct modes".into()));
    }
    let mut m = CMat::identity(n, n);
    let (co, si) = (theta.cos(), theta.sin());
    m[(k, k)] = c(co, 0.0);
    m[(k2, k2)] = c(co, 0.0);
    m[(k, k2)] = c(0.0, -si);
    m[(k2, k)] = c(0.0, -si);
    Ok(OneBodyUnitary(m))
}

fn check_mode(k: usize, n: usize) -> Result<()> {
    if k >= n {
        Err(Error::ModeOutOfRange { k, n })
    } else {
        Ok(())
    }
}

/// Serializable gate in a gate list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "gate", rename_all = "snake_case")]
pub enum GateSpec {
    PhaseShifter { k: usize, phi: f64 },
    BeamSplitter { k: usize, k2: usize, theta: f64 },
}

impl GateSpec {
    pub fn unitary(&self, n: usize) -> Result<OneBodyUnitary> {
        match *self {
            GateSpec::PhaseShifter { k, phi } => phase_shifter(n, k, phi),
            GateSpec::BeamSplitter { k, k2, theta } => beam_splitter(n, k, k2, theta),
        }
    }
}

/// Elementary factor of a mode-space unitary.
#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    /// 2x2 unitary `[[g00, g01], [g10, g11]]` on modes `j < k`.
    TwoMode { j: usize, k: usize, g: [[Complex64; 2]; 2] },
    Phase { k: usize, phase: Complex64 },
}

impl Gate {
    fn embed(&self, n: usize) -> CMat {
        let mut m = CMat::identity(n, n);
        match *self {
            Gate::TwoMode { j, k, g } => {
                m[(j, j)] = g[0][0];
                m[(j, k)] = g[0][1];
                m[(k, j)] = g[1][0];
                m[(k, k)] = g[1][1];
            }
            Gate::Phase { k, phase } => m[(k, k)] = phase,
        }
        m
    }
}

/// Factorization `W = G_1 G_2 ... G_m D` into adjacent-mode two-mode gates and
/// a diagonal of phases, by Givens elimination below the diagonal.
#[derive(Debug, Clone)]
pub struct GateSequence {
    n: usize,
    /// `G_1 ... G_m` in product order.
    pub rotations: Vec<Gate>,
    pub phases: Vec<Gate>,
}

impl GateSequence {
    pub fn matrix(&self) -> CMat {
        let mut m = CMat::identity(self.n, self.n);
        for g in self.rotations.iter().chain(&self.phases) {
            m *= g.embed(self.n);
        }
        m
    }

    pub fn len(&self) -> usize {
        self.rotations.len() + self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn decompose_unitary(w: &CMat) -> Result<GateSequence> {
    let n = w.nrows();
    let mut a = w.clone();
    let mut eliminations = Vec::new();
    for col in 0..n {
        for i in (col + 1..n).rev() {
            let (x, y) = (a[(i - 1, col)], a[(i, col)]);
            if y.norm() < 1e-300 {
                continue;
            }
            let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
            // r (x, y)^T = (|.|, 0)^T
            let g = [[x.conj() / r, y.conj() / r], [-y / r, x / r]];
            for jc in 0..n {
                let (p, q) = (a[(i - 1, jc)], a[(i, jc)]);
                a[(i - 1, jc)] = g[0][0] * p + g[0][1] * q;
                a[(i, jc)] = g[1][0] * p + g[1][1] * q;
            }
            eliminations.push((i - 1, i, g));
        }
    }
    // W = R_1† ... R_m† D
    let rotations = eliminations
        .into_iter()
        .map(|(j, k, g)| Gate::TwoMode {
            j,
            k,
            g: [[g[0][0].conj(), g[1][0].conj()], [g[0][1].conj(), g[1][1].conj()]],
        })
        .collect();
    let phases = (0..n)
        .filter(|&k| (a[(k, k)] - ONE).norm() > 0.0)
        .map(|k| Gate::Phase { k, phase: a[(k, k)] })
        .collect();
    let seq = GateSequence { n, rotations, phases };
    let err = linalg::max_abs(&(seq.matrix() - w));
    if err > 1e-10 {
        return Err(Error::Decomposition(format!("gate reconstruction error {err:e}")));
    }
    Ok(seq)
}

/// Acts with the Fock-space image of a mode-space gate, under which
/// `c†_j → Σ_k g_{kj} c†_k`.
fn apply_gate(amps: HashMap<Mask, Complex64>, gate: &Gate) -> HashMap<Mask, Complex64> {
    match *gate {
        Gate::Phase { k, phase } => amps
            .into_iter()
            .map(|(m, a)| (m, if m & bit(k) != 0 { a * phase } else { a }))
            .collect(),
        Gate::TwoMode { j, k, g } => {
            let (bj, bk) = (bit(j), bit(k));
            let between = (bit(k) - 1) & !(bit(j + 1) - 1);
            let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
            let mut out = HashMap::with_capacity(amps.len() * 2);
            for (m, a) in amps {
                let mut add = |mask: Mask, v: Complex64| *out.entry(mask).or_insert(ZERO) += v;
                match (m & bj != 0, m & bk != 0) {
                    (false, false) => add(m, a),
                    (true, true) => add(m, a * det),
                    (true, false) => {
                        let s = if popcount(m & between).is_multiple_of(2) { 1.0 } else { -1.0 };
                        add(m, a * g[0][0]);
                        add(m ^ bj ^ bk, a * g[1][0] * s);
                    }
                    (false, true) => {
                        let s = if popcount(m & between).is_multiple_of(2) { 1.0 } else { -1.0 };
                        add(m, a * g[1][1]);
                        add(m ^ bj ^ bk, a * g[0][1] * s);
                    }
                }
            }
            out
        }
    }
}

/// Applies the number-conserving Fock unitary associated with `u`, so that
/// the SPDM maps as `ρ → U† ρ U`.
pub fn apply_one_body_unitary(state: &PureState, u: &OneBodyUnitary) -> Result<PureState> {
    let n = state.n_modes();
    if u.n_modes() != n {
        return Err(Error::DimensionMismatch(n, u.n_modes()));
    }
    let err = unitarity_error(&u.0);
    if err > UNITARY_TOL {
        return Err(Error::NotUnitary(err));
    }
    let seq = decompose_unitary(&u.0.adjoint())?;
    let mut amps: HashMap<Mask, Complex64> =
        state.amplitudes().iter().map(|(&m, &a)| (m, a)).collect();
    for g in seq.phases.iter().chain(seq.rotations.iter().rev()) {
        amps = apply_gate(amps, g);
    }
    PureState::from_amplitudes(n, amps)
}

/// Kraus coefficients `M_k = αP_k + βP_k̄`, `M_k̄ = γP_k + δP_k̄`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMkParams")]
pub struct GeneralizedMkParams {
    pub alpha: Complex64,
    pub beta: Complex64,
    pub gamma: Complex64,
    pub delta: Complex64,
}

#[derive(Deserialize)]
struct RawMkParams {
    alpha: Complex64,
    beta: Complex64,
    gamma: Complex64,
    delta: Complex64,
}

impl TryFrom<RawMkParams> for GeneralizedMkParams {
    type Error = Error;
    fn try_from(r: RawMkParams) -> Result<Self> {
        Self::new(r.alpha, r.beta, r.gamma, r.delta)
    }
}

impl GeneralizedMkParams {
    /// Requires `|α|²+|γ|² = 1` and `|β|²+|δ|² = 1` within 1e-12.
    pub fn new(alpha: Complex64, beta: Complex64, gamma: Complex64, delta: Complex64) -> Result<Self> {
        let occ = alpha.norm_sqr() + gamma.norm_sqr();
        let emp = beta.norm_sqr() + delta.norm_sqr();
        if (occ - 1.0).abs() > 1e-12 || (emp - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameters(format!(
                "|α|²+|γ|² = {occ}, |β|²+|δ|² = {emp}"
            )));
        }
        Ok(Self { alpha, beta, gamma, delta })
    }

    /// The projective occupation measurement.
    pub fn occupation() -> Self {
        Self { alpha: ONE, beta: ZERO, gamma: ZERO, delta: ONE }
    }
}

/// Post-measurement state of one branch.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PostState {
    Pure { state: PureState },
    Mixed { state: MixedState },
}

impl PostState {
    pub fn spdm(&self) -> Result<OneBodyDM> {
        match self {
            PostState::Pure { state } => spdm::compute_spdm(state),
            PostState::Mixed { state } => spdm::compute_spdm_mixed(state),
        }
    }

    pub fn as_pure(&self) -> Option<&PureState> {
        match self {
            PostState::Pure { state } => Some(state),
            PostState::Mixed { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeasurementOutcome {
    pub label: String,
    pub probability: f64,
    /// `None` when `probability < P_FLOOR`.
    pub post_state: Option<PostState>,
    pub post_spdm: Option<OneBodyDM>,
    pub post_extended: Option<ExtendedDM>,
}

impl MeasurementOutcome {
    fn new(label: String, probability: f64, post: Option<PostState>) -> Result<Self> {
        let post_spdm = post.as_ref().map(PostState::spdm).transpose()?;
        let post_extended = post_spdm.as_ref().map(spdm::extended_dm);
        Ok(Self { label, probability, post_state: post, post_spdm, post_extended })
    }

    fn from_branch(label: String, branch: PureState) -> Result<Self> {
        let p = branch.norm_sqr();
        let post = if p >= P_FLOOR {
            Some(PostState::Pure { state: branch.normalized()? })
        } else {
            None
        };
        Self::new(label, p, post)
    }

    /// Post-measurement pure state, if this branch has one.
    pub fn pure(&self) -> Option<&PureState> {
        self.post_state.as_ref().and_then(PostState::as_pure)
    }

    pub fn is_populated(&self) -> bool {
        self.post_state.is_some()
    }
}

/// Serializable description of a channel.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum FreeOp {
    MeasureOccupation { k: usize },
    MeasureGeneralized {
        k: usize,
        #[serde(flatten)]
        params: GeneralizedMkParams,
    },
    MeasureLadder { k: usize },
    MeasureSdBasis { unitary: OneBodyUnitary },
    /// Not free: can create one-body entanglement from a Slater determinant.
    MeasureTwoModeJoint { k: usize, k2: usize },
    OneBodyUnitary { unitary: OneBodyUnitary },
    Gates { gates: Vec<GateSpec> },
}

impl FreeOp {
    /// `false` only for the two-mode joint measurement.
    pub fn is_free(&self) -> bool {
        !matches!(self, FreeOp::MeasureTwoModeJoint { .. })
    }

    /// Unnormalized branches `K_j |Ψ⟩`, labeled. Linear in `state`; no
    /// normalization is assumed.
    pub fn kraus_images(&self, state: &PureState) -> Result<Vec<(String, PureState)>> {
        let n = state.n_modes();
        let occ = |k: usize| state.filter_masks(|m| m & bit(k) != 0);
        let emp = |k: usize| state.filter_masks(|m| m & bit(k) == 0);
        Ok(match self {
            FreeOp::MeasureOccupation { k } => {
                check_mode(*k, n)?;
                vec![("occupied".into(), occ(*k)), ("empty".into(), emp(*k))]
            }
            FreeOp::MeasureGeneralized { k, params } => {
                check_mode(*k, n)?;
                let (pk, pkb) = (occ(*k), emp(*k));
                vec![
                    ("m_k".into(), pk.scaled(params.alpha).add_scaled(&pkb, params.beta)?),
                    ("m_k_bar".into(), pk.scaled(params.gamma).add_scaled(&pkb, params.delta)?),
                ]
            }
            FreeOp::MeasureLadder { k } => vec![
                ("removed".into(), state.annihilate(*k)?),
                ("added".into(), state.create(*k)?),
            ],
            FreeOp::MeasureSdBasis { unitary } => {
                let rotated = apply_one_body_unitary(state, unitary)?;
                let back = unitary.adjoint();
                rotated
                    .amplitudes()
                    .iter()
                    .map(|(&m, &a)| {
                        let proj = PureState::from_amplitudes(n, [(m, a)])?;
                        Ok((format!("occ:{m:0n$b}"), apply_one_body_unitary(&proj, &back)?))
                    })
                    .collect::<Result<_>>()?
            }
            FreeOp::MeasureTwoModeJoint { k, k2 } => {
                check_mode(*k, n)?;
                check_mode(*k2, n)?;
                if k == k2 {
                    return Err(Error::InvalidParameters("joint measurement needs two modes".into()));
                }
                let both = bit(*k) | bit(*k2);
                let count = |want: usize| state.filter_masks(move |m| popcount(m & both) == want);
                vec![("m0".into(), count(0)), ("m1".into(), count(1)), ("m2".into(), count(2))]
            }
            FreeOp::OneBodyUnitary { unitary } => {
                vec![("unitary".into(), apply_one_body_unitary(state, unitary)?)]
            }
            FreeOp::Gates { gates } => {
                let u = OneBodyUnitary::from_gates(n, gates)?;
                vec![("unitary".into(), apply_one_body_unitary(state, &u)?)]
            }
        })
    }

    /// Measures a normalized pure state.
    pub fn apply(&self, state: &PureState) -> Result<Vec<MeasurementOutcome>> {
        check_normalized(state)?;
        self.kraus_images(state)?
            .into_iter()
            .map(|(label, b)| MeasurementOutcome::from_branch(label, b))
            .collect()
    }

    /// Measures an ensemble; branch `j` has weight `Σ_α p_α ‖K_j Ψ_α‖²`.
    pub fn apply_mixed(&self, rho: &MixedState) -> Result<Vec<MeasurementOutcome>> {
        let mut branches: BTreeMap<String, Vec<(f64, PureState)>> = BTreeMap::new();
        let mut order = Vec::new();
        for (p, member) in rho.members() {
            for (label, b) in self.kraus_images(member)? {
                if !branches.contains_key(&label) {
                    order.push(label.clone());
                }
                branches.entry(label).or_default().push((*p, b));
            }
        }
        order
            .into_iter()
            .map(|label| {
                let parts = &branches[&label];
                let prob: f64 = parts.iter().map(|(p, b)| p * b.norm_sqr()).sum();
                if prob < P_FLOOR {
                    return MeasurementOutcome::new(label, prob, None);
                }
                let mut members = Vec::new();
                for (p, b) in parts {
                    let w = p * b.norm_sqr();
                    if w >= P_FLOOR * prob {
                        members.push((w, b.normalized()?));
                    }
                }
                let total: f64 = members.iter().map(|(w, _)| w).sum();
                for m in &mut members {
                    m.0 /= total;
                }
                let post = if members.len() == 1 {
                    PostState::Pure { state: members.pop().expect("one member").1 }
                } else {
                    PostState::Mixed { state: MixedState::new(members)? }
                };
                MeasurementOutcome::new(label, prob, Some(post))
            })
            .collect()
    }
}

fn check_normalized(state: &PureState) -> Result<()> {
    let dev = (state.norm_sqr() - 1.0).abs();
    if dev > INPUT_NORM_TOL {
        return Err(Error::NotNormalized(dev));
    }
    Ok(())
}

pub fn measure_occupation(state: &PureState, k: usize) -> Result<Vec<MeasurementOutcome>> {
    FreeOp::MeasureOccupation { k }.apply(state)
}

pub fn measure_generalized(
    state: &PureState,
    k: usize,
    params: GeneralizedMkParams,
) -> Result<Vec<MeasurementOutcome>> {
    FreeOp::MeasureGeneralized { k, params }.apply(state)
}

/// Branches `c_k|Ψ⟩` ("removed") and `c†_k|Ψ⟩` ("added").
pub fn measure_ladder(state: &PureState, k: usize) -> Result<Vec<MeasurementOutcome>> {
    if state.particle_number().is_none() {
        return Err(Error::IndefiniteParticleNumber);
    }
    FreeOp::MeasureLadder { k }.apply(state)
}

/// Occupation measurement of every orbital in the columns of `u`, one outcome
/// per occupation pattern with nonzero weight.
pub fn measure_sd_basis(state: &PureState, u: &OneBodyUnitary) -> Result<Vec<MeasurementOutcome>> {
    FreeOp::MeasureSdBasis { unitary: u.clone() }.apply(state)
}

pub fn measure_two_mode_joint(state: &PureState, k: usize, k2: usize) -> Result<Vec<MeasurementOutcome>> {
    FreeOp::MeasureTwoModeJoint { k, k2 }.apply(state)
}

/// Spectra and weights of the populated branches.
pub fn branch_spectra(outcomes: &[MeasurementOutcome]) -> Result<Vec<(f64, spdm::SortedSpectrum)>> {
    outcomes
        .iter()
        .filter_map(|o| o.post_spdm.as_ref().map(|r| (o.probability, r)))
        .map(|(p, r)| Ok((p, r.spectrum()?)))
        .collect()
}
