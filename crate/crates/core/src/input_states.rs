//! Input-state families and their moment engines.
//!
//! Analytic moments are provided for coherent⊗vacuum, coherent⊗squeezed
//! vacuum (real amplitude, zero squeeze angle), twin Fock and Jx-Jy
//! intelligent states. Every family can also be turned into an explicit
//! state vector, whose moments from [`moments_of`] are the reference.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::su2_fock::{
    moments_of, raise_coeff, Basis, IrrepLabel, MomentSet, TwoModeState, C64,
};

/// Largest discarded tail probability accepted for a truncated state.
pub const TAIL_TOL: f64 = 1e-12;
/// Smallest `|eta|` handed to the numerical eigen-solver.
pub const MIN_SOLVER_ETA: f64 = 1e-3;
/// Residual bound `|(eta Jx - i Jy) psi - lambda psi|` for an accepted solution.
pub const RESIDUAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum InputStateSpec {
    /// `|alpha>_1 |0>_2`.
    CoherentVacuum { alpha: C64 },
    /// `|alpha>_1 |xi>_2` with `xi = r e^{i theta}`.
    CoherentSqueezed { alpha: C64, r: f64, theta: f64 },
    /// `|n>_1 |n>_2 = |j = n, m = 0>`.
    TwinFock { n: u32 },
    /// Eigenstate of `eta Jx - i Jy` with eigenvalue `i m0 sqrt(1 - eta^2)`.
    /// `eta == 0` marks the limiting family, which only has closed-form results.
    Intelligent {
        label: IrrepLabel,
        eta: f64,
        twice_m0: i32,
    },
    Custom(TwoModeState),
}

impl InputStateSpec {
    pub fn family(&self) -> &'static str {
        match self {
            Self::CoherentVacuum { .. } => "coherent-vacuum",
            Self::CoherentSqueezed { .. } => "coherent-squeezed",
            Self::TwinFock { .. } => "twin-fock",
            Self::Intelligent { .. } => "intelligent",
            Self::Custom(_) => "custom",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::CoherentVacuum { alpha } => finite_c(alpha, "alpha"),
            Self::CoherentSqueezed { alpha, r, theta } => {
                finite_c(alpha, "alpha")?;
                if !(r.is_finite() && r >= 0.0) {
                    return Err(Error::InvalidParameter(format!("squeeze r = {r} must be >= 0")));
                }
                if !theta.is_finite() {
                    return Err(Error::InvalidParameter("theta must be finite".into()));
                }
                Ok(())
            }
            Self::TwinFock { .. } => Ok(()),
            Self::Intelligent {
                label,
                eta,
                twice_m0,
            } => validate_intelligent(label, eta, twice_m0),
            Self::Custom(_) => Ok(()),
        }
    }

    /// Squeeze parameter `xi = r e^{i theta}`, when the family has one.
    pub fn xi(&self) -> Option<C64> {
        match *self {
            Self::CoherentSqueezed { r, theta, .. } => Some(C64::from_polar(r, theta)),
            _ => None,
        }
    }

    /// Closed-form moments, where the family has them.
    ///
    /// Squeezed inputs only get the fast path at matched phase (`theta = 0`,
    /// real `alpha`); other phases return `None`.
    pub fn analytic_moments(&self) -> Result<Option<MomentSet>> {
        self.validate()?;
        Ok(match *self {
            Self::CoherentVacuum { alpha } => Some(coherent_vacuum_moments(alpha.norm_sqr())?),
            Self::CoherentSqueezed { alpha, r, theta } => {
                if theta == 0.0 && alpha.im == 0.0 {
                    Some(coherent_squeezed_moments(alpha.re, r)?)
                } else {
                    None
                }
            }
            Self::TwinFock { n } => Some(twin_fock_moments(n)),
            Self::Intelligent {
                label,
                eta,
                twice_m0,
            } => Some(intelligent_moments(label, eta, twice_m0)?),
            Self::Custom(_) => None,
        })
    }

    /// Analytic moments when available, otherwise moments of the explicit state.
    pub fn moments(&self) -> Result<MomentSet> {
        match self.analytic_moments()? {
            Some(m) => Ok(m),
            None => moments_of(&spec_to_state(self, None)?),
        }
    }
}

fn finite_c(z: C64, name: &str) -> Result<()> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be finite")))
    }
}

fn validate_intelligent(label: IrrepLabel, eta: f64, twice_m0: i32) -> Result<()> {
    let twice_j = label.twice_j() as i32;
    if twice_m0.abs() > twice_j || (twice_j - twice_m0) % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "m0 = {}/2 is not a magnetic quantum number of j = {}",
            twice_m0,
            label.j()
        )));
    }
    if !(eta.is_finite() && eta.abs() <= 1.0) {
        return Err(Error::InvalidParameter(format!("eta = {eta} must satisfy |eta| <= 1")));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Analytic moments

pub fn coherent_vacuum_moments(nbar: f64) -> Result<MomentSet> {
    if !(nbar.is_finite() && nbar >= 0.0) {
        return Err(Error::InvalidParameter(format!("nbar = {nbar} must be >= 0")));
    }
    Ok(MomentSet {
        mean_jz: nbar / 2.0,
        var_jx: nbar / 4.0,
        var_jy: nbar / 4.0,
        var_jz: nbar / 4.0,
        nbar,
        nbar1: nbar,
        ..MomentSet::default()
    })
}

/// Matched-phase moments of `|alpha>|xi = r>` with real `alpha`.
pub fn coherent_squeezed_moments(alpha: f64, r: f64) -> Result<MomentSet> {
    if !(r.is_finite() && r >= 0.0) {
        return Err(Error::InvalidParameter(format!("squeeze r = {r} must be >= 0")));
    }
    if !alpha.is_finite() {
        return Err(Error::InvalidParameter("alpha must be finite".into()));
    }
    let a2 = alpha * alpha;
    let s2 = r.sinh().powi(2);
    let sc = r.sinh() * r.cosh();
    Ok(MomentSet {
        mean_jz: (a2 - s2) / 2.0,
        var_jx: (a2 * (2.0 * r).exp() + s2) / 4.0,
        var_jy: (a2 * (-2.0 * r).exp() + s2) / 4.0,
        // Independent modes: Var(N1) = alpha^2, Var(N2) = 2 sinh^2 r cosh^2 r.
        var_jz: (a2 + 2.0 * sc * sc) / 4.0,
        nbar: a2 + s2,
        nbar1: a2,
        nbar2: s2,
        ..MomentSet::default()
    })
}

pub fn twin_fock_moments(n: u32) -> MomentSet {
    let j = n as f64;
    let half_casimir = 0.5 * j * (j + 1.0);
    MomentSet {
        var_jx: half_casimir,
        var_jy: half_casimir,
        nbar: 2.0 * j,
        nbar1: j,
        nbar2: j,
        ..MomentSet::default()
    }
}

pub fn twin_fock_state(n: u32) -> TwoModeState {
    TwoModeState::irrep_basis_state(IrrepLabel::from_twice_j(2 * n), 0.0)
        .expect("m = 0 lies in every integer irrep")
}

/// Closed-form moments of the Jx-Jy intelligent state.
///
/// The operator `eta Jx - i Jy` is the diagonal similarity
/// `D (-i sqrt(1 - eta^2) Jy) D^-1` with `D = diag(rho^m)`,
/// `rho^2 = (1 - eta)/(1 + eta)`, so the weights on `|j,m>` are
/// `rho^{2m} d^j_{m,-m0}(pi/2)^2`. The remaining moments follow from the
/// eigenvalue relation: `<Jx> = 0`, `<Jy> = -m0 sqrt(1 - eta^2)`,
/// `var_jx = |<Jz>| / (2|eta|)`, `var_jy = eta^2 var_jx`,
/// `cov_yz = -eta m0 sqrt(1 - eta^2) / 2`.
pub fn intelligent_moments(label: IrrepLabel, eta: f64, twice_m0: i32) -> Result<MomentSet> {
    validate_intelligent(label, eta, twice_m0)?;
    if eta == 0.0 {
        return Err(Error::InvalidParameter(
            "eta = 0 is the limiting family; use the closed-form limit variance".into(),
        ));
    }
    if eta.abs() == 1.0 && twice_m0 != 0 {
        return Err(Error::DegenerateSpectrum(
            "|eta| = 1 collapses the spectrum to 0; only m0 = 0 exists".into(),
        ));
    }
    let j = label.j();
    let m0 = twice_m0 as f64 / 2.0;
    let s = (1.0 - eta * eta).max(0.0).sqrt();
    let weights: Vec<f64> = if eta.abs() == 1.0 {
        // Spin-coherent limit: |j, -j> for eta = 1, |j, j> for eta = -1.
        (0..label.dim())
            .map(|k| {
                let m = label.m_at(k);
                if m == -j * eta.signum() {
                    1.0
                } else {
                    0.0
                }
            })
            .collect()
    } else {
        let ln_rho2 = ((1.0 - eta) / (1.0 + eta)).ln();
        let twice_mu = -twice_m0;
        let raw: Vec<f64> = (0..label.dim())
            .map(|k| {
                let twice_m = label.twice_j() as i32 - 2 * k as i32;
                let m = twice_m as f64 / 2.0;
                wigner_d_half_pi_sq(label.twice_j(), twice_m, twice_mu) * (m * ln_rho2).exp()
            })
            .collect();
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|w| w / total).collect()
    };
    let mut mean_jz = 0.0;
    let mut mean_jz2 = 0.0;
    for (k, w) in weights.iter().enumerate() {
        let m = label.m_at(k);
        mean_jz += w * m;
        mean_jz2 += w * m * m;
    }
    let var_jx = mean_jz.abs() / (2.0 * eta.abs());
    Ok(MomentSet {
        mean_jx: 0.0,
        mean_jy: -m0 * s,
        mean_jz,
        var_jx,
        var_jy: eta * eta * var_jx,
        var_jz: (mean_jz2 - mean_jz * mean_jz).max(0.0),
        cov_yz: -0.5 * eta * m0 * s,
        nbar: 2.0 * j,
        nbar1: j + mean_jz,
        nbar2: j - mean_jz,
    })
}

/// `d^j_{m',m}(pi/2)^2` from the exact integer form of Wigner's sum,
/// arguments given as `2j`, `2m'`, `2m`.
pub fn wigner_d_half_pi_sq(twice_j: u32, twice_mp: i32, twice_m: i32) -> f64 {
    let tj = twice_j as i64;
    let (jpm, jmm) = ((tj + twice_m as i64) / 2, (tj - twice_m as i64) / 2);
    let (jpmp, jmmp) = ((tj + twice_mp as i64) / 2, (tj - twice_mp as i64) / 2);
    // sum_k (-1)^k C(j+m, k) C(j-m, j-m'-k)
    let mut sum: i128 = 0;
    for k in 0..=jpm {
        let other = jmmp - k;
        if other < 0 || other > jmm {
            continue;
        }
        let term = binomial(jpm, k) * binomial(jmm, other);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    let ratio = ln_factorial(jpmp) + ln_factorial(jmmp) - ln_factorial(jpm) - ln_factorial(jmm);
    let s = sum as f64;
    s * s * (ratio - tj as f64 * std::f64::consts::LN_2).exp()
}

fn binomial(n: i64, k: i64) -> i128 {
    if k < 0 || k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: i128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as i128 / (i + 1) as i128;
    }
    acc
}

fn ln_factorial(n: i64) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}

/// Closed-form `(2 dJx)^2` of the `eta -> 0` intelligent family: `2 (j^2 - m0^2 + j)`.
pub fn intelligent_limit_variance(label: IrrepLabel, twice_m0: i32) -> f64 {
    let j = label.j();
    let m0 = twice_m0 as f64 / 2.0;
    2.0 * (j * j - m0 * m0 + j)
}

// ---------------------------------------------------------------------------
// Intelligent-state eigen-solver

#[derive(Debug, Clone, PartialEq)]
pub struct IntelligentStateSolution {
    pub eigenvalue: C64,
    pub state: TwoModeState,
    pub eta: f64,
    pub twice_m0: i32,
    /// `|(eta Jx - i Jy) psi - lambda psi|` of the returned vector.
    pub residual: f64,
}

impl IntelligentStateSolution {
    pub fn label(&self) -> IrrepLabel {
        match self.state.basis() {
            Basis::Irrep(label) => label,
            Basis::Fock { .. } => unreachable!("intelligent states live in an irrep"),
        }
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        self.state.amplitudes()
    }

    pub fn m0(&self) -> f64 {
        self.twice_m0 as f64 / 2.0
    }
}

/// `eta Jx - i Jy = (eta - 1)/2 J+ + (eta + 1)/2 J-` in the descending-`m` basis.
pub fn intelligent_operator(label: IrrepLabel, eta: f64) -> DMatrix<C64> {
    let dim = label.dim();
    let j = label.j();
    let up = C64::new((eta - 1.0) / 2.0, 0.0);
    let down = C64::new((eta + 1.0) / 2.0, 0.0);
    let mut a = DMatrix::zeros(dim, dim);
    for k in 1..dim {
        // J+ takes index k (m) to k-1 (m+1), J- takes k-1 to k.
        let c = raise_coeff(j, label.m_at(k));
        a[(k - 1, k)] = up * c;
        a[(k, k - 1)] = down * c;
    }
    a
}

/// Diagonal similarity `D^-1 A D` equalizing the magnitudes of the sub- and
/// super-diagonal of a tridiagonal `A`; returns the balanced matrix and `diag(D)`.
/// Requires every off-diagonal pair to be nonzero.
pub fn balance_tridiagonal(a: &DMatrix<C64>) -> Result<(DMatrix<C64>, Vec<f64>)> {
    let n = a.nrows();
    let mut d = vec![1.0; n];
    for k in 0..n.saturating_sub(1) {
        let lower = a[(k + 1, k)].norm();
        let upper = a[(k, k + 1)].norm();
        if lower == 0.0 || upper == 0.0 {
            return Err(Error::EigenSolver(
                "tridiagonal matrix decouples; cannot balance".into(),
            ));
        }
        d[k + 1] = d[k] * (lower / upper).sqrt();
    }
    let mut b = a.clone();
    for r in 0..n {
        for c in 0..n {
            b[(r, c)] *= d[c] / d[r];
        }
    }
    Ok((b, d))
}

/// Eigen-decomposition of an (up to rounding) anti-Hermitian `b` through the
/// Hermitian matrix `i b`; returns eigenvalues of `b` and the eigenvectors as columns.
fn anti_hermitian_eigen(b: &DMatrix<C64>) -> (Vec<C64>, DMatrix<C64>) {
    let h = b * C64::new(0.0, 1.0);
    let h = (&h + h.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(h);
    let values = eig.eigenvalues.iter().map(|mu| C64::new(0.0, -mu)).collect();
    (values, eig.eigenvectors)
}

/// All eigenvalues of `eta Jx - i Jy`, sorted by descending imaginary part.
pub fn intelligent_spectrum(label: IrrepLabel, eta: f64) -> Result<Vec<C64>> {
    if !(eta.is_finite() && eta.abs() < 1.0 && eta != 0.0) {
        return Err(Error::InvalidParameter(format!(
            "spectrum requires 0 < |eta| < 1, got {eta}"
        )));
    }
    let a = intelligent_operator(label, eta);
    let mut values = if label.dim() == 1 {
        vec![a[(0, 0)]]
    } else {
        anti_hermitian_eigen(&balance_tridiagonal(&a)?.0).0
    };
    values.sort_by(|x, y| y.im.total_cmp(&x.im));
    Ok(values)
}

/// Solves `(eta Jx - i Jy) psi = lambda psi` for the member of the spectrum
/// nearest `i m0 sqrt(1 - eta^2)`.
///
/// The tridiagonal operator is balanced by a diagonal similarity before the
/// Hermitian eigen-solve of `i B`; the eigenvector is mapped back and phase-fixed so that
/// its highest-`m` amplitude is real and positive.
pub fn solve_intelligent_state(
    label: IrrepLabel,
    eta: f64,
    twice_m0: i32,
) -> Result<IntelligentStateSolution> {
    validate_intelligent(label, eta, twice_m0)?;
    if eta == 0.0 {
        return Err(Error::DegenerateSpectrum(
            "eta = 0: eigenproblem degenerates; use the closed-form limit".into(),
        ));
    }
    if eta.abs() < MIN_SOLVER_ETA {
        return Err(Error::InvalidParameter(format!(
            "|eta| = {} is below the solver floor {MIN_SOLVER_ETA}; use the closed-form limit",
            eta.abs()
        )));
    }
    let a = intelligent_operator(label, eta);
    if eta.abs() == 1.0 {
        if twice_m0 != 0 {
            return Err(Error::DegenerateSpectrum(
                "|eta| = 1 collapses the spectrum to 0; only m0 = 0 exists".into(),
            ));
        }
        let state = TwoModeState::irrep_basis_state(label, -label.j() * eta.signum())?;
        return finish_solution(&a, state, C64::new(0.0, 0.0), eta, twice_m0);
    }

    let s = (1.0 - eta * eta).sqrt();
    let target = C64::new(0.0, twice_m0 as f64 / 2.0 * s);
    if label.dim() == 1 {
        let state = TwoModeState::irrep_basis_state(label, 0.0)?;
        return finish_solution(&a, state, a[(0, 0)], eta, twice_m0);
    }
    let (balanced, d) = balance_tridiagonal(&a)?;
    let (values, vectors) = anti_hermitian_eigen(&balanced);
    let (k, lambda) = values
        .into_iter()
        .enumerate()
        .min_by(|x, y| (x.1 - target).norm().total_cmp(&(y.1 - target).norm()))
        .expect("non-empty spectrum");
    let null = vectors.column(k);
    let mut amps = DVector::from_iterator(
        label.dim(),
        null.iter().zip(&d).map(|(c, dk)| c * *dk),
    );
    amps /= C64::new(amps.norm(), 0.0);
    if let Some(lead) = amps.iter().find(|c| c.norm() > 0.0).copied() {
        let phase = lead.conj() / lead.norm();
        amps *= phase;
    }
    let state = TwoModeState::normalized(Basis::Irrep(label), amps)?;
    finish_solution(&a, state, lambda, eta, twice_m0)
}

fn finish_solution(
    a: &DMatrix<C64>,
    state: TwoModeState,
    eigenvalue: C64,
    eta: f64,
    twice_m0: i32,
) -> Result<IntelligentStateSolution> {
    let psi = state.amplitudes();
    let residual = (a * psi - psi * eigenvalue).norm();
    if residual >= RESIDUAL_TOL {
        return Err(Error::EigenSolver(format!(
            "eigenvector residual {residual:e} exceeds {RESIDUAL_TOL:e}"
        )));
    }
    Ok(IntelligentStateSolution {
        eigenvalue,
        state,
        eta,
        twice_m0,
        residual,
    })
}

// ---------------------------------------------------------------------------
// Truncated single-mode amplitudes

/// `ceil(|alpha|^2 + 10|alpha| + 20)`.
pub fn coherent_truncation(alpha: C64) -> usize {
    let a = alpha.norm();
    (a * a + 10.0 * a + 20.0).ceil() as usize
}

/// `ceil(sinh^2 r + 10 sinh r cosh r + 20)`.
pub fn squeezed_truncation(r: f64) -> usize {
    let (s, c) = (r.sinh(), r.cosh());
    (s * s + 10.0 * s * c + 20.0).ceil() as usize
}

/// Coherent amplitudes on `|0>..|n_max>` and the probability beyond `n_max`.
pub fn coherent_amplitudes(alpha: C64, n_max: usize) -> (Vec<C64>, f64) {
    let a = alpha.norm();
    if a == 0.0 {
        let mut v = vec![C64::new(0.0, 0.0); n_max + 1];
        v[0] = C64::new(1.0, 0.0);
        return (v, 0.0);
    }
    let arg = alpha.arg();
    let half_nbar = a * a / 2.0;
    let ln_a = a.ln();
    // ln |c_n| = -|alpha|^2/2 + n ln|alpha| - ln(n!)/2
    let mut ln_fact = 0.0;
    let mut ln_mag = |n: usize| {
        if n > 0 {
            ln_fact += (n as f64).ln();
        }
        -half_nbar + n as f64 * ln_a - 0.5 * ln_fact
    };
    let amps: Vec<C64> = (0..=n_max)
        .map(|n| C64::from_polar(ln_mag(n).exp(), n as f64 * arg))
        .collect();
    let mut tail = 0.0;
    let mut n = n_max + 1;
    loop {
        let p = (2.0 * ln_mag(n)).exp();
        tail += p;
        if n as f64 > a * a && p < tail * 1e-17 + 1e-300 {
            break;
        }
        n += 1;
    }
    (amps, tail)
}

/// Squeezed-vacuum amplitudes of `exp(xi a+^2/2 - xi* a^2/2)|0>` on
/// `|0>..|n_max>`, and the probability beyond `n_max`.
///
/// `c_{2k} = (cosh r)^{-1/2} (e^{i theta} tanh r)^k sqrt((2k)!) / (2^k k!)`.
pub fn squeezed_vacuum_amplitudes(r: f64, theta: f64, n_max: usize) -> (Vec<C64>, f64) {
    let mut amps = vec![C64::new(0.0, 0.0); n_max + 1];
    let t = r.tanh();
    let step = C64::from_polar(t, theta);
    let mut c = C64::new(r.cosh().powf(-0.5), 0.0);
    let mut k = 0usize;
    while 2 * k <= n_max {
        amps[2 * k] = c;
        k += 1;
        c *= step * ((2 * k - 1) as f64 / (2 * k) as f64).sqrt();
    }
    let mut tail = 0.0;
    if t > 0.0 {
        loop {
            let p = c.norm_sqr();
            tail += p;
            if p < tail * 1e-17 + 1e-300 {
                break;
            }
            k += 1;
            c *= step * ((2 * k - 1) as f64 / (2 * k) as f64).sqrt();
        }
    }
    (amps, tail)
}

/// Explicit normalized state vector for `spec`.
///
/// Coherent and squeezed families use the Fock basis with the truncation
/// rule, raised further when the rule leaves a tail above [`TAIL_TOL`]. An
/// explicit `n_max_override` is used as given and rejected when its tail is
/// too large. Twin-Fock and intelligent inputs use the irrep basis.
pub fn spec_to_state(spec: &InputStateSpec, n_max_override: Option<usize>) -> Result<TwoModeState> {
    spec.validate()?;
    match spec {
        InputStateSpec::CoherentVacuum { alpha } => {
            let alpha = *alpha;
            let build = |n_max: usize| {
                let (m1, tail) = coherent_amplitudes(alpha, n_max);
                let mut m2 = vec![C64::new(0.0, 0.0); n_max + 1];
                m2[0] = C64::new(1.0, 0.0);
                (m1, m2, tail)
            };
            fock_product_with_truncation(coherent_truncation(alpha), n_max_override, build)
        }
        InputStateSpec::CoherentSqueezed { alpha, r, theta } => {
            let (alpha, r, theta) = (*alpha, *r, *theta);
            let build = |n_max: usize| {
                let (m1, t1) = coherent_amplitudes(alpha, n_max);
                let (m2, t2) = squeezed_vacuum_amplitudes(r, theta, n_max);
                (m1, m2, t1 + t2)
            };
            let rule = coherent_truncation(alpha).max(squeezed_truncation(r));
            fock_product_with_truncation(rule, n_max_override, build)
        }
        InputStateSpec::TwinFock { n } => Ok(twin_fock_state(*n)),
        InputStateSpec::Intelligent {
            label,
            eta,
            twice_m0,
        } => Ok(solve_intelligent_state(*label, *eta, *twice_m0)?.state),
        InputStateSpec::Custom(state) => Ok(state.clone()),
    }
}

fn fock_product_with_truncation<F>(
    rule: usize,
    n_max_override: Option<usize>,
    build: F,
) -> Result<TwoModeState>
where
    F: Fn(usize) -> (Vec<C64>, Vec<C64>, f64),
{
    let mut n_max = n_max_override.unwrap_or(rule).max(1);
    loop {
        let (m1, m2, tail) = build(n_max);
        if tail < TAIL_TOL {
            return TwoModeState::fock_product(&m1, &m2);
        }
        if n_max_override.is_some() {
            return Err(Error::TruncationInsufficient { n_max, tail });
        }
        n_max += n_max / 4 + 8;
    }
}

// ---------------------------------------------------------------------------
// JSON form

/// Flat JSON record with a `family` discriminator.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
struct SpecRecord {
    family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alpha_re: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alpha_im: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    n: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    j2: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    m0x2: Option<i32>,
    /// Custom states only: `n_max` of a Fock-basis vector.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    n_max: Option<usize>,
    /// Custom states only: `[re, im]` pairs in basis order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    amplitudes: Option<Vec<[f64; 2]>>,
}

impl From<&InputStateSpec> for SpecRecord {
    fn from(spec: &InputStateSpec) -> Self {
        let mut rec = SpecRecord {
            family: spec.family().to_string(),
            ..Default::default()
        };
        match spec {
            InputStateSpec::CoherentVacuum { alpha } => {
                rec.alpha_re = Some(alpha.re);
                rec.alpha_im = Some(alpha.im);
            }
            InputStateSpec::CoherentSqueezed { alpha, r, theta } => {
                rec.alpha_re = Some(alpha.re);
                rec.alpha_im = Some(alpha.im);
                rec.r = Some(*r);
                rec.theta = Some(*theta);
            }
            InputStateSpec::TwinFock { n } => rec.n = Some(*n),
            InputStateSpec::Intelligent {
                label,
                eta,
                twice_m0,
            } => {
                rec.j2 = Some(label.twice_j());
                rec.eta = Some(*eta);
                rec.m0x2 = Some(*twice_m0);
            }
            InputStateSpec::Custom(state) => {
                match state.basis() {
                    Basis::Fock { n_max } => rec.n_max = Some(n_max),
                    Basis::Irrep(label) => rec.j2 = Some(label.twice_j()),
                }
                rec.amplitudes = Some(state.amplitudes().iter().map(|c| [c.re, c.im]).collect());
            }
        }
        rec
    }
}

impl TryFrom<SpecRecord> for InputStateSpec {
    type Error = Error;

    fn try_from(rec: SpecRecord) -> Result<Self> {
        let missing = |field: &str| Error::InvalidParameter(format!("{}: missing {field}", rec.family));
        let alpha = C64::new(rec.alpha_re.unwrap_or(0.0), rec.alpha_im.unwrap_or(0.0));
        let spec = match rec.family.as_str() {
            "coherent-vacuum" => InputStateSpec::CoherentVacuum { alpha },
            "coherent-squeezed" => InputStateSpec::CoherentSqueezed {
                alpha,
                r: rec.r.ok_or_else(|| missing("r"))?,
                theta: rec.theta.unwrap_or(0.0),
            },
            "twin-fock" => InputStateSpec::TwinFock {
                n: rec.n.ok_or_else(|| missing("n"))?,
            },
            "intelligent" => InputStateSpec::Intelligent {
                label: IrrepLabel::from_twice_j(rec.j2.ok_or_else(|| missing("j2"))?),
                eta: rec.eta.ok_or_else(|| missing("eta"))?,
                twice_m0: rec.m0x2.ok_or_else(|| missing("m0x2"))?,
            },
            "custom" => {
                let amps = rec.amplitudes.as_ref().ok_or_else(|| missing("amplitudes"))?;
                let basis = match (rec.n_max, rec.j2) {
                    (Some(n_max), None) => Basis::Fock { n_max },
                    (None, Some(j2)) => Basis::Irrep(IrrepLabel::from_twice_j(j2)),
                    _ => return Err(missing("exactly one of n_max / j2")),
                };
                let v = DVector::from_iterator(amps.len(), amps.iter().map(|p| C64::new(p[0], p[1])));
                InputStateSpec::Custom(TwoModeState::new(basis, v)?)
            }
            other => {
                return Err(Error::InvalidParameter(format!("unknown family '{other}'")))
            }
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl Serialize for InputStateSpec {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        SpecRecord::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for InputStateSpec {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rec = SpecRecord::deserialize(deserializer)?;
        InputStateSpec::try_from(rec).map_err(serde::de::Error::custom)
    }
}
