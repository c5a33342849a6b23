//! Oracle suites run by `qnoise verify`.
//!
//! Each check compares a closed-form or fast path against the brute-force
//! operator oracle and reports the worst error seen.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::input_states::{
    coherent_squeezed_moments, coherent_vacuum_moments, intelligent_moments, intelligent_spectrum,
    solve_intelligent_state, spec_to_state, twin_fock_moments, twin_fock_state, InputStateSpec,
};
use crate::interferometer::{
    heisenberg_limit, heisenberg_transform, phase_uncertainty, schroedinger_evolve,
    transform_moments, twin_fock_sqdiff_variance, Observable,
};
use crate::noise_model::{budget_coherent, budget_coherent_via_moments, DetectorConfig};
use crate::su2_fock::{
    build_fock_operators, build_irrep_matrices, expectation, moments_of, random_fock_state,
    random_irrep_state, IrrepLabel, OperatorMatrix, C64,
};

/// Name of the PRNG used for random-state checks.
pub const PRNG_NAME: &str = "ChaCha8Rng";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Level {
    Quick,
    Full,
}

impl Level {
    fn max_twice_j(self) -> u32 {
        match self {
            Level::Quick => 12,
            Level::Full => 40,
        }
    }

    fn fock_n_max(self) -> usize {
        match self {
            Level::Quick => 8,
            Level::Full => 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub max_error: f64,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl CheckResult {
    fn from_errors(name: &str, tolerance: f64, errors: Result<Vec<f64>>) -> Self {
        match errors {
            Ok(v) => {
                let max_error = v.iter().copied().fold(0.0, f64::max);
                let finite = v.iter().all(|e| e.is_finite());
                Self {
                    name: name.to_string(),
                    passed: finite && max_error <= tolerance,
                    max_error,
                    tolerance,
                    error: None,
                }
            }
            Err(e) => Self {
                name: name.to_string(),
                passed: false,
                max_error: f64::NAN,
                tolerance,
                error: Some(e.to_string()),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub level: Level,
    pub prng: &'static str,
    pub seed: u64,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn rel(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / b.abs().max(floor)
}

pub fn run(level: Level, seed: u64) -> VerifyReport {
    let max2j = level.max_twice_j();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();

    checks.push(CheckResult::from_errors(
        "irrep-commutators",
        1e-12,
        Ok((0..=max2j)
            .map(|t| build_irrep_matrices(IrrepLabel::from_twice_j(t)).commutator_defect())
            .collect()),
    ));

    checks.push(CheckResult::from_errors(
        "irrep-casimir",
        1e-12,
        Ok((0..=max2j)
            .map(|t| {
                let l = IrrepLabel::from_twice_j(t);
                let c = build_irrep_matrices(l).casimir();
                c.max_diff(&OperatorMatrix::identity(l.dim()).scale(C64::new(l.casimir(), 0.0)))
            })
            .collect()),
    ));

    let n_max = level.fock_n_max();
    checks.push(CheckResult::from_errors(
        "fock-matrix-free-moments",
        1e-10,
        (|| {
            let ops = build_fock_operators(n_max)?;
            let mut out = Vec::new();
            for _ in 0..5 {
                let s = random_fock_state(n_max, n_max, &mut rng);
                let m = moments_of(&s)?;
                let dense = [
                    expectation(&ops.spin.jx, &s)?,
                    expectation(&ops.spin.jy, &s)?,
                    expectation(&ops.spin.jz, &s)?,
                    expectation(&ops.n, &s)?,
                ];
                let fast = [m.mean_jx, m.mean_jy, m.mean_jz, m.nbar];
                out.extend(dense.iter().zip(fast).map(|(d, f)| (d - f).abs()));
            }
            Ok(out)
        })(),
    ));

    let alphas: &[f64] = match level {
        Level::Quick => &[0.0, 0.5, 1.5],
        Level::Full => &[0.0, 0.5, 1.5, 2.2, 3.0],
    };
    checks.push(CheckResult::from_errors(
        "coherent-moments",
        1e-7,
        alphas
            .iter()
            .map(|&a| {
                let spec = InputStateSpec::CoherentVacuum {
                    alpha: C64::new(a, 0.0),
                };
                let oracle = moments_of(&spec_to_state(&spec, None)?)?;
                Ok(coherent_vacuum_moments(a * a)?.max_rel_diff(&oracle, 1e-2))
            })
            .collect(),
    ));

    let squeezes: &[(f64, f64)] = match level {
        Level::Quick => &[(1.0, 0.2), (2.0, 0.4)],
        Level::Full => &[(1.0, 0.2), (2.0, 0.4), (3.0, 0.8), (1.5, 1.2)],
    };
    checks.push(CheckResult::from_errors(
        "squeezed-moments",
        1e-7,
        squeezes
            .iter()
            .map(|&(a, r)| {
                let spec = InputStateSpec::CoherentSqueezed {
                    alpha: C64::new(a, 0.0),
                    r,
                    theta: 0.0,
                };
                let oracle = moments_of(&spec_to_state(&spec, None)?)?;
                Ok(coherent_squeezed_moments(a, r)?.max_rel_diff(&oracle, 1e-2))
            })
            .collect(),
    ));

    checks.push(CheckResult::from_errors(
        "twin-fock-moments",
        1e-12,
        (0..=max2j / 2)
            .map(|n| Ok(twin_fock_moments(n).max_rel_diff(&moments_of(&twin_fock_state(n))?, 1e-2)))
            .collect(),
    ));

    let intelligent_j2 = match level {
        Level::Quick => 12,
        Level::Full => 20,
    };
    checks.push(CheckResult::from_errors(
        "intelligent-moments",
        1e-7,
        (|| {
            let mut out = Vec::new();
            for t in 1..=intelligent_j2 {
                let l = IrrepLabel::from_twice_j(t);
                for eta in [0.1, 0.5, 0.9] {
                    for m0x2 in (-(t as i32)..=t as i32).step_by(2) {
                        let sol = solve_intelligent_state(l, eta, m0x2)?;
                        let oracle = moments_of(&sol.state)?;
                        out.push(intelligent_moments(l, eta, m0x2)?.max_rel_diff(&oracle, 1e-2));
                    }
                }
            }
            Ok(out)
        })(),
    ));

    checks.push(CheckResult::from_errors(
        "intelligent-spectrum",
        1e-9,
        (|| {
            let mut out = Vec::new();
            for t in 1..=intelligent_j2 {
                let l = IrrepLabel::from_twice_j(t);
                for eta in [0.1f64, 0.5, 0.9] {
                    let s = (1.0 - eta * eta).sqrt();
                    let values = intelligent_spectrum(l, eta)?;
                    for (k, v) in values.iter().enumerate() {
                        let expect = C64::new(0.0, l.m_at(k) * s);
                        out.push((v - expect).norm());
                    }
                }
            }
            Ok(out)
        })(),
    ));

    checks.push(CheckResult::from_errors(
        "picture-equivalence",
        1e-9,
        (|| {
            let mut out = Vec::new();
            for t in 1..=max2j {
                let l = IrrepLabel::from_twice_j(t);
                let s = random_irrep_state(l, &mut rng);
                let m = moments_of(&s)?;
                for phi in [0.3, 1.1, std::f64::consts::FRAC_PI_2] {
                    let evolved = moments_of(&schroedinger_evolve(&s, phi)?)?;
                    out.push(transform_moments(&m, phi).max_rel_diff(&evolved, 1.0));
                    let st = heisenberg_transform(&m, phi);
                    out.push(rel(st.mean, 2.0 * evolved.mean_jz, 1.0));
                }
            }
            Ok(out)
        })(),
    ));

    checks.push(CheckResult::from_errors(
        "twin-fock-squared-difference",
        1e-6,
        (|| {
            let mut out = Vec::new();
            for n in [1u32, 2, 5] {
                let l = IrrepLabel::from_twice_j(2 * n);
                for phi in [0.0, 0.1, 0.3] {
                    let u = phase_uncertainty(&twin_fock_state(n), Observable::SquaredDifference, phi)?;
                    out.push(rel(u.variance(), twin_fock_sqdiff_variance(l, phi), 0.0));
                }
            }
            Ok(out)
        })(),
    ));

    checks.push(CheckResult::from_errors(
        "heisenberg-bound",
        1e-9,
        (|| {
            let mut out = Vec::new();
            let trials = match level {
                Level::Quick => 40,
                Level::Full => 200,
            };
            for k in 0..trials {
                let l = IrrepLabel::from_twice_j(1 + k % 16);
                let s = random_irrep_state(l, &mut rng);
                match phase_uncertainty(&s, Observable::PhotonDifference, std::f64::consts::FRAC_PI_2)
                {
                    Ok(u) => out.push((heisenberg_limit(l) - u.value).max(0.0)),
                    Err(crate::Error::DerivativeVanishes { .. }) => {}
                    Err(e) => return Err(e),
                }
            }
            Ok(out)
        })(),
    ));

    let config = DetectorConfig::initial_ligo();
    checks.push(CheckResult::from_errors(
        "coherent-budget-paths",
        1e-12,
        [1.0, 1e6, 9.2e20, 1e24]
            .iter()
            .map(|&n| {
                let a = budget_coherent(n, &config)?;
                let b = budget_coherent_via_moments(n, &config)?;
                Ok(rel(a.dz_total, b.dz_total, 0.0))
            })
            .collect(),
    ));

    VerifyReport {
        level,
        prng: PRNG_NAME,
        seed,
        checks,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_suite_passes() {
        let r = run(Level::Quick, 7);
        for c in &r.checks {
            assert!(c.passed, "{c:?}");
        }
    }
}
