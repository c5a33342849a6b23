//! Acceptance suite: twelve criteria at pinned tolerances, one PASS/FAIL line each.
//!
//! Runs with its own `main` so the report is printed even when everything passes.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qnoise::input_states::{
    coherent_squeezed_moments, coherent_vacuum_moments, intelligent_moments, intelligent_spectrum,
    solve_intelligent_state, spec_to_state, twin_fock_moments, twin_fock_state, InputStateSpec,
};
use qnoise::interferometer::{
    heisenberg_limit, phase_uncertainty, twin_fock_sqdiff_variance, Observable,
};
use qnoise::noise_model::{
    budget_coherent, budget_from_moments, budget_mismatch_quadrature,
    budget_phase_insensitive_port, loss_threshold_check, optimize_family, sql, BudgetFamily,
    DetectorConfig, SqueezeMode, DEFAULT_NBAR_BOUNDS,
};
use qnoise::su2_fock::{moments_of, random_irrep_state, random_single_mode, IrrepLabel, TwoModeState, C64};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn within(what: &str, got: f64, want: f64, tol: f64) -> Outcome {
    let e = rel(got, want);
    if e <= tol {
        Ok(format!("{what} = {got:.4e} (target {want:.4e}, rel err {e:.2e} <= {tol})"))
    } else {
        Err(format!("{what} = {got:.4e}, target {want:.4e}, rel err {e:.2e} > {tol}"))
    }
}

fn all(parts: Vec<Outcome>) -> Outcome {
    let mut ok = Vec::new();
    for p in parts {
        ok.push(p?);
    }
    Ok(ok.join("; "))
}

fn worst(label: &str, errors: &[f64], tol: f64) -> Outcome {
    let w = errors.iter().copied().fold(0.0, f64::max);
    if errors.iter().all(|e| e.is_finite()) && w <= tol {
        Ok(format!("{label}: max err {w:.2e} over {} cases", errors.len()))
    } else {
        Err(format!("{label}: max err {w:.2e} > {tol:.0e}"))
    }
}

fn ligo() -> DetectorConfig {
    DetectorConfig::initial_ligo()
}

fn c1_derived_quantities() -> Outcome {
    let c = ligo();
    all(vec![
        within("tau", c.tau(), 8.5e-4, 0.02),
        within("bounces", c.bounces(), 32.0, 0.05),
    ])
}

fn c2_sql() -> Outcome {
    within("SQL", sql(&ligo()), 1.24e-19, 0.05)
}

fn c3_coherent_optimum() -> Outcome {
    let opt = optimize_family(BudgetFamily::Coherent, &ligo(), DEFAULT_NBAR_BOUNDS).map_err(|e| e.to_string())?;
    all(vec![
        within("nbar_opt", opt.nbar_opt, 9.2e20, 0.10),
        within("P_opt", opt.power_opt, 191e3, 0.05),
    ])
}

fn c4_heisenberg_optimum() -> Outcome {
    let c = ligo();
    let h = optimize_family(BudgetFamily::Heisenberg, &c, DEFAULT_NBAR_BOUNDS).map_err(|e| e.to_string())?;
    let coh = optimize_family(BudgetFamily::Coherent, &c, DEFAULT_NBAR_BOUNDS).map_err(|e| e.to_string())?;
    all(vec![
        within("nbar_opt", h.nbar_opt, 4.3e10, 0.10),
        within("P_opt", h.power_opt, 9e-6, 0.10),
        within("power reduction", coh.power_opt / h.power_opt, 2e10, 0.15),
    ])
}

fn c5_squeezed_scaling() -> Outcome {
    let c = ligo();
    let opt = |r: f64| {
        optimize_family(
            BudgetFamily::Squeezed {
                r,
                mode: SqueezeMode::Asymptotic,
            },
            &c,
            DEFAULT_NBAR_BOUNDS,
        )
        .map(|o| o.power_opt)
        .map_err(|e| e.to_string())
    };
    let p0 = opt(0.0)?;
    let mut parts = Vec::new();
    for r in [0.25, 0.5, 1.0] {
        parts.push(within(&format!("P(r={r})/P(0)"), opt(r)? / p0, (-2.0 * r).exp(), 1e-4));
    }
    all(parts)
}

fn c6_moment_oracles() -> Outcome {
    let go = || -> qnoise::Result<Vec<Outcome>> {
        let mut coherent = Vec::new();
        for alpha in [
            C64::new(0.0, 0.0),
            C64::new(0.7, 0.0),
            C64::new(1.5, 0.0),
            C64::from_polar(2.2, 0.9),
            C64::new(3.0, 0.0),
            C64::from_polar(3.0, -2.0),
        ] {
            let oracle = moments_of(&spec_to_state(&InputStateSpec::CoherentVacuum { alpha }, None)?)?;
            let analytic = coherent_vacuum_moments(alpha.norm_sqr())?;
            // With vacuum in port 2 the moments depend on |alpha| only.
            coherent.push(analytic.max_rel_diff(&oracle, 1e-2));
        }
        let mut squeezed = Vec::new();
        for alpha in [0.5, 1.5, 3.0] {
            for r in [0.3, 0.8, 1.2] {
                let spec = InputStateSpec::CoherentSqueezed {
                    alpha: C64::new(alpha, 0.0),
                    r,
                    theta: 0.0,
                };
                let oracle = moments_of(&spec_to_state(&spec, None)?)?;
                squeezed.push(coherent_squeezed_moments(alpha, r)?.max_rel_diff(&oracle, 1e-2));
            }
        }
        let mut twin = Vec::new();
        for n in 0..=10 {
            twin.push(twin_fock_moments(n).max_rel_diff(&moments_of(&twin_fock_state(n))?, 1e-2));
        }
        let mut intelligent = Vec::new();
        for t in 1..=20u32 {
            let l = IrrepLabel::from_twice_j(t);
            for eta in [0.1, 0.5, 0.9] {
                for m0x2 in (-(t as i32)..=t as i32).step_by(2) {
                    let sol = solve_intelligent_state(l, eta, m0x2)?;
                    let oracle = moments_of(&sol.state)?;
                    intelligent.push(intelligent_moments(l, eta, m0x2)?.max_rel_diff(&oracle, 1e-2));
                }
            }
        }
        Ok(vec![
            worst("coherent", &coherent, 1e-7),
            worst("squeezed", &squeezed, 1e-7),
            worst("twin-fock", &twin, 1e-7),
            worst("intelligent", &intelligent, 1e-7),
        ])
    };
    all(go().map_err(|e| e.to_string())?)
}

fn c7_intelligent_spectrum() -> Outcome {
    let go = || -> qnoise::Result<(Vec<f64>, Vec<f64>)> {
        let mut spectrum = Vec::new();
        let mut equality = Vec::new();
        for t in 1..=20u32 {
            let l = IrrepLabel::from_twice_j(t);
            for eta in [0.1f64, 0.5, 0.9] {
                let s = (1.0 - eta * eta).sqrt();
                let values = intelligent_spectrum(l, eta)?;
                if values.len() != l.dim() {
                    spectrum.push(f64::INFINITY);
                }
                for (k, v) in values.iter().enumerate() {
                    spectrum.push((v - C64::new(0.0, l.m_at(k) * s)).norm());
                }
                for m0x2 in (-(t as i32)..=t as i32).step_by(2) {
                    let m = moments_of(&solve_intelligent_state(l, eta, m0x2)?.state)?;
                    let lhs = (m.var_jx * m.var_jy).sqrt();
                    let rhs = 0.5 * m.mean_jz.abs();
                    equality.push((lhs - rhs).abs() / rhs.max(1.0));
                }
            }
        }
        Ok((spectrum, equality))
    };
    let (spectrum, equality) = go().map_err(|e| e.to_string())?;
    all(vec![
        worst("spectrum", &spectrum, 1e-9),
        worst("dJx dJy = |<Jz>|/2", &equality, 1e-8),
    ])
}

fn c8_twin_fock_phase() -> Outcome {
    let mut formula = Vec::new();
    let mut limit = Vec::new();
    for n in [1u32, 2, 5] {
        let l = IrrepLabel::from_twice_j(2 * n);
        for phi in [0.0, 0.1, 0.3] {
            let u = phase_uncertainty(&twin_fock_state(n), Observable::SquaredDifference, phi)
                .map_err(|e| e.to_string())?;
            formula.push(rel(u.variance(), twin_fock_sqdiff_variance(l, phi)));
            if phi == 0.0 {
                limit.push(rel(u.value, heisenberg_limit(l)));
            }
        }
    }
    all(vec![
        worst("formula", &formula, 1e-6),
        worst("Heisenberg limit at phi = 0", &limit, 1e-8),
    ])
}

fn c9_mismatch() -> Outcome {
    let c = ligo();
    let go = || -> qnoise::Result<(Vec<f64>, Vec<f64>)> {
        let mut cosh_law = Vec::new();
        for r in [0.1, 0.2, 0.3, 0.4] {
            let spec = InputStateSpec::CoherentSqueezed {
                alpha: C64::from_polar(30.0, FRAC_PI_4),
                r,
                theta: 0.0,
            };
            let m = moments_of(&spec_to_state(&spec, None)?)?;
            let oracle = budget_from_moments(&m, &c)?;
            let closed = budget_mismatch_quadrature(900.0, r, &c)?;
            cosh_law.push(rel(oracle.dz_pc, closed.dz_pc));
            cosh_law.push(rel(oracle.dz_rp, closed.dz_rp));
        }
        let mut port = Vec::new();
        for n1 in 0..=8usize {
            for n2 in 0..=8usize {
                if n1 == n2 {
                    continue;
                }
                // Shells up to n1 + n2 must be complete for the ladder action.
                let s = TwoModeState::fock_basis_state(16, n1, n2)?;
                let oracle = budget_from_moments(&moments_of(&s)?, &c)?;
                let closed = budget_phase_insensitive_port(n1 as f64, n2 as f64, &c)?;
                port.push(rel(oracle.dz_pc, closed.dz_pc));
                port.push(rel(oracle.dz_rp, closed.dz_rp));
            }
        }
        Ok((cosh_law, port))
    };
    let (cosh_law, port) = go().map_err(|e| e.to_string())?;
    all(vec![
        worst("cosh 2r law", &cosh_law, 0.03),
        worst("phase-insensitive port", &port, 1e-8),
    ])
}

fn c10_universality() -> Outcome {
    let c = ligo();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut errors = Vec::new();
    for _ in 0..20 {
        let n_max = rng.random_range(2..=24usize);
        let mode1 = random_single_mode(n_max, &mut rng);
        let mut vacuum = vec![C64::new(0.0, 0.0); n_max + 1];
        vacuum[0] = C64::new(1.0, 0.0);
        let go = || -> qnoise::Result<f64> {
            let m = moments_of(&TwoModeState::fock_product(&mode1, &vacuum)?)?;
            let b = budget_from_moments(&m, &c)?;
            Ok(rel(b.total_variance(), budget_coherent(m.nbar, &c)?.total_variance()))
        };
        errors.push(go().map_err(|e| e.to_string())?);
    }
    worst("random port-1 states", &errors, 1e-7)
}

fn c11_heisenberg_bound() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst_margin = f64::INFINITY;
    let mut evaluated = 0;
    for _ in 0..200 {
        let l = IrrepLabel::from_twice_j(rng.random_range(1..=16));
        let state = random_irrep_state(l, &mut rng);
        let phi = if rng.random_bool(0.5) {
            FRAC_PI_2
        } else {
            rng.random_range(0.05..PI - 0.05)
        };
        let observable = if rng.random_bool(0.5) {
            Observable::PhotonDifference
        } else {
            Observable::SquaredDifference
        };
        match phase_uncertainty(&state, observable, phi) {
            Ok(u) => {
                evaluated += 1;
                worst_margin = worst_margin.min(u.value - heisenberg_limit(l));
            }
            Err(qnoise::Error::DerivativeVanishes { .. }) => {}
            Err(e) => return Err(e.to_string()),
        }
    }
    if worst_margin >= -1e-9 && evaluated > 150 {
        Ok(format!("{evaluated} evaluations, smallest margin above the limit {worst_margin:.3e}"))
    } else {
        Err(format!("{evaluated} evaluations, smallest margin {worst_margin:.3e}"))
    }
}

fn c12_loss_threshold() -> Outcome {
    let check = |n: f64, g: f64| loss_threshold_check(n, g).map(|c| c.ok).map_err(|e| e.to_string());
    let below = 0.5f64.next_down();
    let cases = [
        ("N*G = 1/2 exactly", check(1.0, 0.5)?, false),
        ("N*G = 4 * 0.125", check(4.0, 0.125)?, false),
        ("N*G just below 1/2", check(1.0, below)?, true),
        ("nbar 4.3e10, Gamma 1e-11", check(4.3e10, 1e-11)?, true),
        ("nbar 4.3e10, Gamma 2e-11", check(4.3e10, 2e-11)?, false),
        ("lossless", check(1e30, 0.0)?, true),
    ];
    for (what, got, want) in cases {
        if got != want {
            return Err(format!("{what}: ok = {got}, expected {want}"));
        }
    }
    Ok(format!("{} boundary cases classified", cases.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("derived detector quantities", c1_derived_quantities),
        ("standard quantum limit", c2_sql),
        ("coherent optimum", c3_coherent_optimum),
        ("Heisenberg-limited optimum", c4_heisenberg_optimum),
        ("squeezed power scaling", c5_squeezed_scaling),
        ("moment oracle equivalence", c6_moment_oracles),
        ("intelligent-state spectrum", c7_intelligent_spectrum),
        ("twin-Fock phase uncertainty", c8_twin_fock_phase),
        ("mismatch formulas", c9_mismatch),
        ("budget universality", c10_universality),
        ("Heisenberg bound", c11_heisenberg_bound),
        ("loss threshold", c12_loss_threshold),
    ];
    let mut failures = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name} [{secs:.2}s]: {detail}", k + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL {:>2} {name} [{secs:.2}s]: {detail}", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
