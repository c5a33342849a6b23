//! The lossless interferometer as an SU(2) rotation.
//!
//! Beam splitter, arm phase and recombination act on `J = (Jx, Jy, Jz)` as
//! `R_y(pi/2) R_z(phi) R_y(-pi/2) = R_x(phi)`; on states this is the unitary
//! `exp(-i phi Jx)`. The output photon difference is
//! `q_out = 2 Jz_out = 2 (sin phi Jy + cos phi Jz)`.

use nalgebra::{DMatrix, DVector, Matrix3, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::noise_model::DetectorConfig;
use crate::su2_fock::{
    build_irrep_matrices, fock_index, moments_of, Basis, IrrepLabel, MomentSet, TwoModeState, C64,
};

/// Sign of `phi` relative to the arms: `phi > 0` when arm 2 accumulates more
/// phase than arm 1, i.e. for `z = z2 - z1 > 0`.
pub const PHASE_SIGN: f64 = 1.0;

/// Dark fringe of the photon-difference measurement.
pub const QDIFF_DARK_FRINGE: f64 = std::f64::consts::FRAC_PI_2;
/// Dark fringe of the squared-difference measurement.
pub const SQDIFF_DARK_FRINGE: f64 = 0.0;

/// Finite-difference step for `d<S>/dphi`.
pub const FD_STEP: f64 = 1e-5;
/// Step for the second derivatives used at stationary points.
pub const FD_STEP_SECOND: f64 = 1e-3;
/// Relative size below which a fringe derivative counts as zero.
pub const DERIVATIVE_FLOOR: f64 = 1e-12;
/// Relative floor below which finite-difference derivatives of `<S>` are
/// indistinguishable from round-off at steps [`FD_STEP`] and [`FD_STEP_SECOND`].
pub const FD_DERIVATIVE_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationSpec {
    pub phi: f64,
}

impl RotationSpec {
    pub fn new(phi: f64) -> Result<Self> {
        if !phi.is_finite() {
            return Err(Error::InvalidParameter("phi must be finite".into()));
        }
        Ok(Self { phi })
    }

    /// Overall transformation `R_y(pi/2) R_z(phi) R_y(-pi/2)` of the generator vector.
    pub fn composed(&self) -> Matrix3<f64> {
        let half_pi = std::f64::consts::FRAC_PI_2;
        rot_y(half_pi) * rot_z(PHASE_SIGN * self.phi) * rot_y(-half_pi)
    }

    pub fn rx(&self) -> Matrix3<f64> {
        rot_x(PHASE_SIGN * self.phi)
    }
}

pub fn rot_x(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c)
}

pub fn rot_y(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
}

pub fn rot_z(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Observable {
    /// `q_out`, photon-number difference of the output ports.
    PhotonDifference,
    /// `S = q_out^2`.
    SquaredDifference,
}

impl Observable {
    pub fn dark_fringe(&self) -> f64 {
        match self {
            Observable::PhotonDifference => QDIFF_DARK_FRINGE,
            Observable::SquaredDifference => SQDIFF_DARK_FRINGE,
        }
    }

    /// Dense realization on an irrep at output angle `phi`: `2 Jz_out` or `4 Jz_out^2`,
    /// expressed through the input generators.
    pub fn operator(&self, label: IrrepLabel, phi: f64) -> DMatrix<C64> {
        let s = build_irrep_matrices(label);
        let (sn, cs) = phi.sin_cos();
        let q = (s.jy.entries() * C64::new(sn, 0.0) + s.jz.entries() * C64::new(cs, 0.0))
            * C64::new(2.0, 0.0);
        match self {
            Observable::PhotonDifference => q,
            Observable::SquaredDifference => &q * &q,
        }
    }
}

/// Statistics of `q_out` at a given phase, from input moments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QoutStatistics {
    pub phi: f64,
    pub mean: f64,
    pub variance: f64,
    /// `d<q_out>/dphi`.
    pub derivative: f64,
}

/// Output-side moments: `Jx` is untouched, `(Jy, Jz)` are rotated by `phi`.
pub fn transform_moments(m: &MomentSet, phi: f64) -> MomentSet {
    let (s, c) = phi.sin_cos();
    let mean_jz = s * m.mean_jy + c * m.mean_jz;
    MomentSet {
        mean_jx: m.mean_jx,
        mean_jy: c * m.mean_jy - s * m.mean_jz,
        mean_jz,
        var_jx: m.var_jx,
        var_jy: c * c * m.var_jy + s * s * m.var_jz - 2.0 * s * c * m.cov_yz,
        var_jz: s * s * m.var_jy + c * c * m.var_jz + 2.0 * s * c * m.cov_yz,
        cov_yz: s * c * (m.var_jy - m.var_jz) + (c * c - s * s) * m.cov_yz,
        nbar: m.nbar,
        nbar1: 0.5 * m.nbar + mean_jz,
        nbar2: 0.5 * m.nbar - mean_jz,
    }
}

/// Mean, variance and phase derivative of `q_out` in the Heisenberg picture.
pub fn heisenberg_transform(m: &MomentSet, phi: f64) -> QoutStatistics {
    let out = transform_moments(m, phi);
    QoutStatistics {
        phi,
        mean: 2.0 * out.mean_jz,
        variance: 4.0 * out.var_jz,
        // d/dphi (sin Jy + cos Jz) = cos Jy - sin Jz = Jy_out
        derivative: 2.0 * out.mean_jy,
    }
}

/// `exp(-i phi Jx)` on the irrep `label`.
pub fn rotation_unitary(label: IrrepLabel, phi: f64) -> DMatrix<C64> {
    let jx = build_irrep_matrices(label).jx.entries().map(|z| z.re);
    let eig = SymmetricEigen::new(jx);
    let v = eig.eigenvectors.map(|x| C64::new(x, 0.0));
    let phases = DMatrix::from_diagonal(&DVector::from_iterator(
        label.dim(),
        eig.eigenvalues.iter().map(|&l| C64::from_polar(1.0, -phi * l)),
    ));
    &v * phases * v.transpose()
}

/// Applies `exp(-i phi Jx)` to `state`.
///
/// Fock-basis states are evolved shell by shell (`n1 + n2 = N`); shells with
/// `N > n_max` are incomplete in the truncated space, so any weight on them
/// is rejected.
pub fn schroedinger_evolve(state: &TwoModeState, phi: f64) -> Result<TwoModeState> {
    RotationSpec::new(phi)?;
    match state.basis() {
        Basis::Irrep(label) => {
            let u = rotation_unitary(label, phi);
            TwoModeState::normalized(state.basis(), &u * state.amplitudes())
        }
        Basis::Fock { n_max } => {
            let psi = state.amplitudes();
            let mut out = DVector::<C64>::zeros(psi.len());
            let mut outside = 0.0;
            for n1 in 0..=n_max {
                for n2 in 0..=n_max {
                    if n1 + n2 > n_max {
                        outside += psi[fock_index(n_max, n1, n2)].norm_sqr();
                    }
                }
            }
            if outside > 1e-24 {
                return Err(Error::Unsupported(format!(
                    "state has weight {outside:e} on incomplete photon-number shells (N > {n_max})"
                )));
            }
            for total in 0..=n_max {
                let label = IrrepLabel::from_twice_j(total as u32);
                // |n1, total - n1> is irrep index k = total - n1.
                let shell = DVector::from_iterator(
                    total + 1,
                    (0..=total).map(|k| psi[fock_index(n_max, total - k, k)]),
                );
                if shell.iter().all(|c| c.norm_sqr() == 0.0) {
                    continue;
                }
                let evolved = rotation_unitary(label, phi) * shell;
                for k in 0..=total {
                    out[fock_index(n_max, total - k, k)] = evolved[k];
                }
            }
            TwoModeState::normalized(state.basis(), out)
        }
    }
}

/// `(<S>, Var S)` of the evolved state, from the exact `Jz` distribution.
fn squared_difference_stats(state: &TwoModeState, phi: f64) -> Result<(f64, f64)> {
    let out = schroedinger_evolve(state, phi)?;
    let mut m2 = 0.0;
    let mut m4 = 0.0;
    for (c, m) in out.amplitudes().iter().zip(out.jz_diagonal()) {
        let p = c.norm_sqr();
        let q2 = 4.0 * m * m;
        m2 += p * q2;
        m4 += p * q2 * q2;
    }
    Ok((m2, (m4 - m2 * m2).max(0.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum UncertaintyMethod {
    /// `(Delta O)^2 / (d<O>/dphi)^2` evaluated directly.
    ErrorPropagation,
    /// Both numerator and denominator vanish at `phi`; the ratio of their second
    /// derivatives is used.
    StationaryLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseUncertainty {
    /// `Delta phi` in radians.
    pub value: f64,
    pub observable: Observable,
    pub phi: f64,
    pub method: UncertaintyMethod,
}

impl PhaseUncertainty {
    pub fn variance(&self) -> f64 {
        self.value * self.value
    }
}

/// Photon-difference phase uncertainty from input moments.
pub fn phase_uncertainty_from_moments(m: &MomentSet, phi: f64) -> Result<PhaseUncertainty> {
    let st = heisenberg_transform(m, phi);
    let scale = 1.0 + (st.variance + st.mean * st.mean).sqrt();
    let (var_phi, method) = if st.derivative.abs() >= DERIVATIVE_FLOOR * scale {
        (st.variance / (st.derivative * st.derivative), UncertaintyMethod::ErrorPropagation)
    } else if st.variance <= DERIVATIVE_FLOOR * scale * scale {
        // mean'' = -mean; var'' = 8 cos 2phi (var_y - var_z) - 16 sin 2phi cov_yz
        let mean2 = -st.mean;
        let (s2, c2) = (2.0 * phi).sin_cos();
        let var2 = 8.0 * c2 * (m.var_jy - m.var_jz) - 16.0 * s2 * m.cov_yz;
        if mean2.abs() < DERIVATIVE_FLOOR * scale {
            return Err(Error::DerivativeVanishes {
                phi,
                derivative: st.derivative,
            });
        }
        (var2 / (2.0 * mean2 * mean2), UncertaintyMethod::StationaryLimit)
    } else {
        return Err(Error::DerivativeVanishes {
            phi,
            derivative: st.derivative,
        });
    };
    Ok(PhaseUncertainty {
        value: var_phi.max(0.0).sqrt(),
        observable: Observable::PhotonDifference,
        phi,
        method,
    })
}

/// Phase uncertainty of `observable` measured at `phi` on `state`.
///
/// `q_out` uses the analytic derivative of the moment map. For `S` the mean and
/// variance come from the evolved state vector and `d<S>/dphi` from a
/// Richardson-extrapolated central difference with step [`FD_STEP`].
pub fn phase_uncertainty(
    state: &TwoModeState,
    observable: Observable,
    phi: f64,
) -> Result<PhaseUncertainty> {
    RotationSpec::new(phi)?;
    match observable {
        Observable::PhotonDifference => phase_uncertainty_from_moments(&moments_of(state)?, phi),
        Observable::SquaredDifference => {
            let mean = |x: f64| squared_difference_stats(state, x).map(|s| s.0);
            let var = |x: f64| squared_difference_stats(state, x).map(|s| s.1);
            let (m0, v0) = squared_difference_stats(state, phi)?;
            let derivative = richardson_first(&mean, phi, FD_STEP)?;
            let scale = 1.0 + (v0 + m0 * m0).sqrt();
            let (var_phi, method) = if derivative.abs() >= FD_DERIVATIVE_FLOOR * scale {
                (v0 / (derivative * derivative), UncertaintyMethod::ErrorPropagation)
            } else if v0 <= FD_DERIVATIVE_FLOOR * scale * scale {
                let mean2 = richardson_second(&mean, phi, FD_STEP_SECOND)?;
                let var2 = richardson_second(&var, phi, FD_STEP_SECOND)?;
                if mean2.abs() < FD_DERIVATIVE_FLOOR * scale {
                    return Err(Error::DerivativeVanishes { phi, derivative });
                }
                (var2 / (2.0 * mean2 * mean2), UncertaintyMethod::StationaryLimit)
            } else {
                return Err(Error::DerivativeVanishes { phi, derivative });
            };
            Ok(PhaseUncertainty {
                value: var_phi.max(0.0).sqrt(),
                observable,
                phi,
                method,
            })
        }
    }
}

fn richardson_first<F: Fn(f64) -> Result<f64>>(f: &F, x: f64, h: f64) -> Result<f64> {
    let d = |h: f64| -> Result<f64> { Ok((f(x + h)? - f(x - h)?) / (2.0 * h)) };
    Ok((4.0 * d(h / 2.0)? - d(h)?) / 3.0)
}

fn richardson_second<F: Fn(f64) -> Result<f64>>(f: &F, x: f64, h: f64) -> Result<f64> {
    let f0 = f(x)?;
    let d = |h: f64| -> Result<f64> { Ok((f(x + h)? - 2.0 * f0 + f(x - h)?) / (h * h)) };
    Ok((4.0 * d(h / 2.0)? - d(h)?) / 3.0)
}

/// `[2j(j+1)]^{-1/2}`, the phase-uncertainty floor on the irrep `j`.
pub fn heisenberg_limit(label: IrrepLabel) -> f64 {
    (2.0 * label.casimir()).powf(-0.5)
}

/// `(Delta phi)^2` of the squared-difference readout for a twin-Fock input:
/// `tan^2 phi / 8 + (2 - tan^2 phi) / (4 j (j+1))`.
pub fn twin_fock_sqdiff_variance(label: IrrepLabel, phi: f64) -> f64 {
    let t2 = phi.tan().powi(2);
    t2 / 8.0 + (2.0 - t2) / (4.0 * label.casimir())
}

/// `phi = omega tau z / L`.
pub fn phase_from_displacement(z: f64, config: &DetectorConfig) -> f64 {
    config.omega() * config.tau() * z / config.arm_length_m
}

/// `z = L phi / (omega tau)`.
pub fn displacement_from_phase(phi: f64, config: &DetectorConfig) -> f64 {
    phi * config.arm_length_m / (config.omega() * config.tau())
}
