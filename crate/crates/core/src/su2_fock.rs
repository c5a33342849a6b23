//! Schwinger two-boson realization of su(2).
//!
//! Two bases are supported:
//!
//! * the truncated two-mode Fock basis `|n1, n2>` with `0 <= n1, n2 <= n_max`,
//!   ordered lexicographically in `(n1, n2)`;
//! * a single irrep `|j, m>` ordered by descending `m` from `+j` to `-j`.
//!
//! `Jx = (a1+ a2 + a2+ a1)/2`, `Jy = -i (a1+ a2 - a2+ a1)/2`,
//! `Jz = (a1+ a1 - a2+ a2)/2`, `N = a1+ a1 + a2+ a2`. An `N = 2j` shell of the
//! Fock space maps onto the irrep `j` through `|n1, n2> <-> |j, (n1 - n2)/2>`.
//!
//! Dense matrices are built for both bases. Moments are evaluated matrix-free
//! through the ladder action so that large coherent/squeezed truncations stay
//! cheap; the dense operators serve as the cross-check.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde_json::json;

use crate::error::{Error, Result};

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Tolerance on the squared norm accepted by [`TwoModeState::new`].
pub const NORM_TOL: f64 = 1e-12;
/// Entrywise tolerance for Hermiticity of constructed J operators.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Largest imaginary part tolerated in a Hermitian expectation value.
pub const IMAG_RESIDUE_TOL: f64 = 1e-10;

/// Spin label `j`, stored as the integer `2j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IrrepLabel {
    twice_j: u32,
}

impl IrrepLabel {
    pub fn from_twice_j(twice_j: u32) -> Self {
        Self { twice_j }
    }

    /// Rejects negative and non-half-integer values.
    pub fn from_j(j: f64) -> Result<Self> {
        let twice = 2.0 * j;
        if !twice.is_finite() || twice < 0.0 || (twice - twice.round()).abs() > 1e-9 {
            return Err(Error::InvalidIrrep(twice));
        }
        Ok(Self {
            twice_j: twice.round() as u32,
        })
    }

    pub fn twice_j(&self) -> u32 {
        self.twice_j
    }

    pub fn j(&self) -> f64 {
        self.twice_j as f64 / 2.0
    }

    pub fn dim(&self) -> usize {
        self.twice_j as usize + 1
    }

    /// Magnetic quantum number of basis index `k` (`k = 0` is `m = +j`).
    pub fn m_at(&self, k: usize) -> f64 {
        self.j() - k as f64
    }

    /// Basis index of `m`, or `None` when `m` is not in the irrep.
    pub fn index_of(&self, m: f64) -> Option<usize> {
        let k = self.j() - m;
        if k < -1e-9 || (k - k.round()).abs() > 1e-9 || k.round() as usize >= self.dim() {
            return None;
        }
        Some(k.round() as usize)
    }

    pub fn casimir(&self) -> f64 {
        let j = self.j();
        j * (j + 1.0)
    }
}

/// Dense complex operator on one of the two bases.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    entries: DMatrix<C64>,
}

impl OperatorMatrix {
    pub fn from_matrix(entries: DMatrix<C64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() || entries.nrows() == 0 {
            return Err(Error::InvalidParameter(format!(
                "operator must be square and non-empty, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        Ok(Self { entries })
    }

    /// Builds a Hermitian operator; fails when `entries` is not Hermitian to [`HERMITIAN_TOL`].
    pub fn hermitian(entries: DMatrix<C64>) -> Result<Self> {
        let op = Self::from_matrix(entries)?;
        let dev = op.hermiticity_defect();
        if dev > HERMITIAN_TOL {
            return Err(Error::InvalidParameter(format!(
                "operator is not Hermitian (max |A - A^H| = {dev:e})"
            )));
        }
        Ok(op)
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<C64> {
        self.entries
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            entries: DMatrix::identity(dim, dim),
        }
    }

    pub fn hermiticity_defect(&self) -> f64 {
        max_abs(&(&self.entries - self.entries.adjoint()))
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self {
            entries: &self.entries * &other.entries,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            entries: &self.entries + &other.entries,
        }
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            entries: &self.entries * factor,
        }
    }

    /// `[self, other]`.
    pub fn commutator(&self, other: &Self) -> Self {
        Self {
            entries: &self.entries * &other.entries - &other.entries * &self.entries,
        }
    }

    /// Max-norm distance to `other`.
    pub fn max_diff(&self, other: &Self) -> f64 {
        max_abs(&(&self.entries - &other.entries))
    }

    /// Debug dump: `{"dim": d, "entries": [[[re, im], ...], ...]}` in row-major order.
    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<Vec<[f64; 2]>> = (0..self.dim())
            .map(|r| {
                (0..self.dim())
                    .map(|c| {
                        let z = self.entries[(r, c)];
                        [z.re, z.im]
                    })
                    .collect()
            })
            .collect();
        json!({ "dim": self.dim(), "entries": rows })
    }
}

pub(crate) fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// The three generators on a common basis.
#[derive(Debug, Clone)]
pub struct SpinMatrices {
    pub jx: OperatorMatrix,
    pub jy: OperatorMatrix,
    pub jz: OperatorMatrix,
}

impl SpinMatrices {
    /// `Jx^2 + Jy^2 + Jz^2`.
    pub fn casimir(&self) -> OperatorMatrix {
        self.jx
            .mul(&self.jx)
            .add(&self.jy.mul(&self.jy))
            .add(&self.jz.mul(&self.jz))
    }

    /// Largest max-norm violation of `[Jk, Jl] = i eps_klm Jm` over the three cyclic pairs.
    pub fn commutator_defect(&self) -> f64 {
        let i = I;
        let xy = self.jx.commutator(&self.jy).max_diff(&self.jz.scale(i));
        let yz = self.jy.commutator(&self.jz).max_diff(&self.jx.scale(i));
        let zx = self.jz.commutator(&self.jx).max_diff(&self.jy.scale(i));
        xy.max(yz).max(zx)
    }
}

/// `J+` coefficient: `J+ |j,m> = sqrt(j(j+1) - m(m+1)) |j,m+1>`.
pub(crate) fn raise_coeff(j: f64, m: f64) -> f64 {
    (j * (j + 1.0) - m * (m + 1.0)).max(0.0).sqrt()
}

/// Standard `|j,m>` matrices of `Jx`, `Jy`, `Jz` in descending-`m` order.
pub fn build_irrep_matrices(label: IrrepLabel) -> SpinMatrices {
    let dim = label.dim();
    let j = label.j();
    let mut jplus = DMatrix::<C64>::zeros(dim, dim);
    let mut jz = DMatrix::<C64>::zeros(dim, dim);
    for k in 0..dim {
        let m = label.m_at(k);
        jz[(k, k)] = C64::new(m, 0.0);
        // |j,m> at index k is raised to index k-1.
        if k > 0 {
            jplus[(k - 1, k)] = C64::new(raise_coeff(j, m), 0.0);
        }
    }
    let jminus = jplus.adjoint();
    let jx = (&jplus + &jminus) * C64::new(0.5, 0.0);
    let jy = (&jplus - &jminus) * C64::new(0.0, -0.5);
    SpinMatrices {
        jx: OperatorMatrix { entries: jx },
        jy: OperatorMatrix { entries: jy },
        jz: OperatorMatrix { entries: jz },
    }
}

/// Validates `label` as coming from a possibly negative or fractional `j`.
pub fn build_irrep_matrices_for_j(j: f64) -> Result<SpinMatrices> {
    Ok(build_irrep_matrices(IrrepLabel::from_j(j)?))
}

/// Truncated two-mode operators.
///
/// The ladder matrices are `P a P` with `P` the projector onto
/// `n1, n2 <= n_max`; commutators are exact except on the top photon-number
/// shell of each mode, where the truncation removes the `|n_max + 1>` states.
#[derive(Debug, Clone)]
pub struct FockOperators {
    pub n_max: usize,
    pub a1: OperatorMatrix,
    pub a2: OperatorMatrix,
    pub spin: SpinMatrices,
    pub n: OperatorMatrix,
}

impl FockOperators {
    pub fn dim(&self) -> usize {
        fock_dim(self.n_max)
    }
}

pub fn fock_dim(n_max: usize) -> usize {
    (n_max + 1) * (n_max + 1)
}

/// Lexicographic index of `|n1, n2>`.
pub fn fock_index(n_max: usize, n1: usize, n2: usize) -> usize {
    n1 * (n_max + 1) + n2
}

pub fn build_fock_operators(n_max: usize) -> Result<FockOperators> {
    if n_max < 1 {
        return Err(Error::InvalidTruncation(n_max));
    }
    let dim = fock_dim(n_max);
    let mut a1 = DMatrix::<C64>::zeros(dim, dim);
    let mut a2 = DMatrix::<C64>::zeros(dim, dim);
    for n1 in 0..=n_max {
        for n2 in 0..=n_max {
            let col = fock_index(n_max, n1, n2);
            if n1 > 0 {
                a1[(fock_index(n_max, n1 - 1, n2), col)] = C64::new((n1 as f64).sqrt(), 0.0);
            }
            if n2 > 0 {
                a2[(fock_index(n_max, n1, n2 - 1), col)] = C64::new((n2 as f64).sqrt(), 0.0);
            }
        }
    }
    let a1d = a1.adjoint();
    let a2d = a2.adjoint();
    let half = C64::new(0.5, 0.0);
    let jx = (&a1d * &a2 + &a2d * &a1) * half;
    let jy = (&a1d * &a2 - &a2d * &a1) * C64::new(0.0, -0.5);
    let n1_op = &a1d * &a1;
    let n2_op = &a2d * &a2;
    let jz = (&n1_op - &n2_op) * half;
    let n = &n1_op + &n2_op;
    Ok(FockOperators {
        n_max,
        a1: OperatorMatrix { entries: a1 },
        a2: OperatorMatrix { entries: a2 },
        spin: SpinMatrices {
            jx: OperatorMatrix::hermitian(jx)?,
            jy: OperatorMatrix::hermitian(jy)?,
            jz: OperatorMatrix::hermitian(jz)?,
        },
        n: OperatorMatrix::hermitian(n)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    Fock { n_max: usize },
    Irrep(IrrepLabel),
}

impl Basis {
    pub fn dim(&self) -> usize {
        match *self {
            Basis::Fock { n_max } => fock_dim(n_max),
            Basis::Irrep(label) => label.dim(),
        }
    }
}

/// Normalized pure state on a two-mode basis.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoModeState {
    basis: Basis,
    amplitudes: DVector<C64>,
}

impl TwoModeState {
    /// Requires `|amplitudes|^2 = 1` to within [`NORM_TOL`].
    pub fn new(basis: Basis, amplitudes: DVector<C64>) -> Result<Self> {
        if amplitudes.len() != basis.dim() {
            return Err(Error::DimensionMismatch {
                op: basis.dim(),
                state: amplitudes.len(),
            });
        }
        let norm_sq = amplitudes.norm_squared();
        if (norm_sq - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm_sq));
        }
        Ok(Self { basis, amplitudes })
    }

    /// Rescales `amplitudes` to unit norm.
    pub fn normalized(basis: Basis, mut amplitudes: DVector<C64>) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized(norm * norm));
        }
        amplitudes /= C64::new(norm, 0.0);
        Self::new(basis, amplitudes)
    }

    pub fn irrep_basis_state(label: IrrepLabel, m: f64) -> Result<Self> {
        let k = label.index_of(m).ok_or_else(|| {
            Error::InvalidParameter(format!("m = {m} is not in the irrep j = {}", label.j()))
        })?;
        let mut amps = DVector::zeros(label.dim());
        amps[k] = C64::new(1.0, 0.0);
        Self::new(Basis::Irrep(label), amps)
    }

    pub fn fock_basis_state(n_max: usize, n1: usize, n2: usize) -> Result<Self> {
        if n1 > n_max || n2 > n_max {
            return Err(Error::InvalidParameter(format!(
                "|{n1},{n2}> outside truncation n_max = {n_max}"
            )));
        }
        let mut amps = DVector::zeros(fock_dim(n_max));
        amps[fock_index(n_max, n1, n2)] = C64::new(1.0, 0.0);
        Self::new(Basis::Fock { n_max }, amps)
    }

    /// `|psi1> (x) |psi2>` from single-mode amplitude vectors (each of length `n_max + 1`).
    pub fn fock_product(mode1: &[C64], mode2: &[C64]) -> Result<Self> {
        if mode1.len() != mode2.len() || mode1.len() < 2 {
            return Err(Error::InvalidParameter(
                "single-mode factors must share a length >= 2".into(),
            ));
        }
        let n_max = mode1.len() - 1;
        let amps = DVector::from_iterator(
            fock_dim(n_max),
            mode1.iter().flat_map(|&c1| mode2.iter().map(move |&c2| c1 * c2)),
        );
        Self::normalized(Basis::Fock { n_max }, amps)
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    /// `|<self|other>|`; fails on basis mismatch.
    pub fn overlap(&self, other: &Self) -> Result<C64> {
        if self.basis != other.basis {
            return Err(Error::DimensionMismatch {
                op: self.dim(),
                state: other.dim(),
            });
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// `Jz` eigenvalue `m` of each basis vector.
    pub fn jz_diagonal(&self) -> Vec<f64> {
        match self.basis {
            Basis::Irrep(label) => (0..label.dim()).map(|k| label.m_at(k)).collect(),
            Basis::Fock { n_max } => (0..=n_max)
                .flat_map(|n1| (0..=n_max).map(move |n2| (n1 as f64 - n2 as f64) / 2.0))
                .collect(),
        }
    }

    /// Total photon number of each basis vector.
    pub fn n_diagonal(&self) -> Vec<f64> {
        match self.basis {
            Basis::Irrep(label) => vec![label.twice_j() as f64; label.dim()],
            Basis::Fock { n_max } => (0..=n_max)
                .flat_map(|n1| (0..=n_max).map(move |n2| (n1 + n2) as f64))
                .collect(),
        }
    }
}

/// `<psi|op|psi>` as a complex number.
pub fn expectation_complex(op: &OperatorMatrix, state: &TwoModeState) -> Result<C64> {
    if op.dim() != state.dim() {
        return Err(Error::DimensionMismatch {
            op: op.dim(),
            state: state.dim(),
        });
    }
    let psi = state.amplitudes();
    Ok(psi.dotc(&(op.entries() * psi)))
}

/// `<psi|op|psi>` for a Hermitian operator; the imaginary residue must stay below
/// [`IMAG_RESIDUE_TOL`].
pub fn expectation(op: &OperatorMatrix, state: &TwoModeState) -> Result<f64> {
    let z = expectation_complex(op, state)?;
    if z.im.abs() > IMAG_RESIDUE_TOL * (1.0 + z.re.abs()) {
        return Err(Error::ImaginaryResidue(z.im));
    }
    Ok(z.re)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    X,
    Y,
    Z,
}

/// Matrix-free `J_k |psi>` using the ladder action on the state's basis.
pub fn apply_j(state: &TwoModeState, component: Component) -> DVector<C64> {
    apply_j_raw(state.basis(), state.amplitudes(), component)
}

pub(crate) fn apply_j_raw(basis: Basis, psi: &DVector<C64>, component: Component) -> DVector<C64> {
    match component {
        Component::Z => {
            let diag: Vec<f64> = match basis {
                Basis::Irrep(label) => (0..label.dim()).map(|k| label.m_at(k)).collect(),
                Basis::Fock { n_max } => (0..=n_max)
                    .flat_map(|n1| (0..=n_max).map(move |n2| (n1 as f64 - n2 as f64) / 2.0))
                    .collect(),
            };
            DVector::from_iterator(psi.len(), psi.iter().zip(diag).map(|(c, m)| c * m))
        }
        Component::X | Component::Y => {
            let (up, down) = ladder_pair(basis, psi);
            // Jx = (J+ + J-)/2, Jy = (J+ - J-)/(2i)
            match component {
                Component::X => (up + down) * C64::new(0.5, 0.0),
                _ => (up - down) * C64::new(0.0, -0.5),
            }
        }
    }
}

/// `(J+ psi, J- psi)` where `J+ = a1+ a2`, `J- = a2+ a1` on the Fock basis.
fn ladder_pair(basis: Basis, psi: &DVector<C64>) -> (DVector<C64>, DVector<C64>) {
    let mut up = DVector::<C64>::zeros(psi.len());
    let mut down = DVector::<C64>::zeros(psi.len());
    match basis {
        Basis::Irrep(label) => {
            let j = label.j();
            for k in 0..label.dim() {
                let m = label.m_at(k);
                let c = psi[k];
                if c == ZERO {
                    continue;
                }
                if k > 0 {
                    up[k - 1] += c * raise_coeff(j, m);
                }
                if k + 1 < label.dim() {
                    down[k + 1] += c * raise_coeff(j, m - 1.0);
                }
            }
        }
        Basis::Fock { n_max } => {
            for n1 in 0..=n_max {
                for n2 in 0..=n_max {
                    let c = psi[fock_index(n_max, n1, n2)];
                    if c == ZERO {
                        continue;
                    }
                    // a1+ a2 |n1,n2> = sqrt((n1+1) n2) |n1+1, n2-1>
                    if n2 > 0 && n1 < n_max {
                        let f = ((n1 + 1) as f64 * n2 as f64).sqrt();
                        up[fock_index(n_max, n1 + 1, n2 - 1)] += c * f;
                    }
                    if n1 > 0 && n2 < n_max {
                        let f = (n1 as f64 * (n2 + 1) as f64).sqrt();
                        down[fock_index(n_max, n1 - 1, n2 + 1)] += c * f;
                    }
                }
            }
        }
    }
    (up, down)
}

/// First and second moments of the generators, plus photon numbers.
///
/// `cov_yz` is the symmetrized covariance `<{Jy, Jz}>/2 - <Jy><Jz>`; it is
/// zero for every analytic family at matched phase.
#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize, serde::Deserialize)]
pub struct MomentSet {
    pub mean_jx: f64,
    pub mean_jy: f64,
    pub mean_jz: f64,
    pub var_jx: f64,
    pub var_jy: f64,
    pub var_jz: f64,
    #[serde(default)]
    pub cov_yz: f64,
    pub nbar: f64,
    pub nbar1: f64,
    pub nbar2: f64,
}

impl MomentSet {
    /// `var_jx * var_jy - mean_jz^2 / 4`, non-negative for physical states.
    pub fn uncertainty_slack(&self) -> f64 {
        self.var_jx * self.var_jy - 0.25 * self.mean_jz * self.mean_jz
    }

    /// Largest relative difference over all fields, with `abs_floor` as the
    /// absolute tolerance scale near zero.
    pub fn max_rel_diff(&self, other: &Self, abs_floor: f64) -> f64 {
        self.fields()
            .iter()
            .zip(other.fields().iter())
            .map(|(a, b)| (a - b).abs() / a.abs().max(b.abs()).max(abs_floor))
            .fold(0.0, f64::max)
    }

    pub fn fields(&self) -> [f64; 10] {
        [
            self.mean_jx,
            self.mean_jy,
            self.mean_jz,
            self.var_jx,
            self.var_jy,
            self.var_jz,
            self.cov_yz,
            self.nbar,
            self.nbar1,
            self.nbar2,
        ]
    }

    pub const FIELD_NAMES: [&'static str; 10] = [
        "mean_jx", "mean_jy", "mean_jz", "var_jx", "var_jy", "var_jz", "cov_yz", "nbar", "nbar1",
        "nbar2",
    ];
}

/// Moments of a normalized state by exact ladder action.
pub fn moments_of(state: &TwoModeState) -> Result<MomentSet> {
    let norm_sq = state.amplitudes().norm_squared();
    if (norm_sq - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized(norm_sq));
    }
    let psi = state.amplitudes();
    let jx = apply_j(state, Component::X);
    let jy = apply_j(state, Component::Y);
    let jz = apply_j(state, Component::Z);
    let mean_jx = psi.dotc(&jx).re;
    let mean_jy = psi.dotc(&jy).re;
    let mean_jz = psi.dotc(&jz).re;
    // For Hermitian J, <J^2> = |J psi|^2.
    let var_jx = (jx.norm_squared() - mean_jx * mean_jx).max(0.0);
    let var_jy = (jy.norm_squared() - mean_jy * mean_jy).max(0.0);
    let var_jz = (jz.norm_squared() - mean_jz * mean_jz).max(0.0);
    let cov_yz = jy.dotc(&jz).re - mean_jy * mean_jz;
    let nbar: f64 = psi
        .iter()
        .zip(state.n_diagonal())
        .map(|(c, n)| c.norm_sqr() * n)
        .sum();
    Ok(MomentSet {
        mean_jx,
        mean_jy,
        mean_jz,
        var_jx,
        var_jy,
        var_jz,
        cov_yz,
        nbar,
        nbar1: nbar / 2.0 + mean_jz,
        nbar2: nbar / 2.0 - mean_jz,
    })
}

/// Haar-random pure state in the irrep `label`.
pub fn random_irrep_state<R: Rng + ?Sized>(label: IrrepLabel, rng: &mut R) -> TwoModeState {
    let amps = random_gaussian_vector(label.dim(), rng);
    TwoModeState::normalized(Basis::Irrep(label), amps).expect("gaussian vector is nonzero")
}

/// Random pure state on the truncated Fock space supported on `n1 + n2 <= max_total`.
pub fn random_fock_state<R: Rng + ?Sized>(
    n_max: usize,
    max_total: usize,
    rng: &mut R,
) -> TwoModeState {
    let mut amps = DVector::<C64>::zeros(fock_dim(n_max));
    for n1 in 0..=n_max {
        for n2 in 0..=n_max {
            if n1 + n2 <= max_total {
                amps[fock_index(n_max, n1, n2)] = gaussian_c64(rng);
            }
        }
    }
    TwoModeState::normalized(Basis::Fock { n_max }, amps).expect("gaussian vector is nonzero")
}

/// Random single-mode pure state on `|0>..|n_max>` (length `n_max + 1`).
pub fn random_single_mode<R: Rng + ?Sized>(n_max: usize, rng: &mut R) -> Vec<C64> {
    let v = random_gaussian_vector(n_max + 1, rng);
    let norm = v.norm();
    v.iter().map(|c| c / norm).collect()
}

fn random_gaussian_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DVector<C64> {
    DVector::from_iterator(dim, (0..dim).map(|_| gaussian_c64(rng)))
}

fn gaussian_c64<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}
