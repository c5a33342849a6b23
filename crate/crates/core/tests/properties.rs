use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qnoise::input_states::{coherent_squeezed_moments, solve_intelligent_state};
use qnoise::interferometer::{
    heisenberg_transform, phase_uncertainty_from_moments, rotation_unitary, schroedinger_evolve,
    transform_moments, RotationSpec,
};
use qnoise::noise_model::{
    budget_coherent, budget_from_moments, budget_heisenberg_limited, budget_phase_insensitive_port,
    budget_squeezed, optimize_family, sql, BudgetFamily, DetectorConfig, SqueezeMode, HBAR,
    DEFAULT_NBAR_BOUNDS,
};
use qnoise::su2_fock::{
    build_fock_operators, build_irrep_matrices, fock_index, moments_of, random_fock_state,
    random_irrep_state, IrrepLabel, OperatorMatrix, C64,
};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn cfg() -> DetectorConfig {
    DetectorConfig::initial_ligo()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn commutators_hold_up_to_j20(twice_j in 0u32..=40) {
        let s = build_irrep_matrices(IrrepLabel::from_twice_j(twice_j));
        prop_assert!(s.commutator_defect() < 1e-10);
    }

    #[test]
    fn casimir_is_scalar(twice_j in 0u32..=40) {
        let l = IrrepLabel::from_twice_j(twice_j);
        let c = build_irrep_matrices(l).casimir();
        let expect = OperatorMatrix::identity(l.dim()).scale(C64::new(l.casimir(), 0.0));
        prop_assert!(c.max_diff(&expect) < 1e-10);
    }

    #[test]
    fn fock_shells_match_irreps(n_max in 1usize..=8) {
        let ops = build_fock_operators(n_max).unwrap();
        for total in 0..=n_max {
            let irrep = build_irrep_matrices(IrrepLabel::from_twice_j(total as u32));
            for (fock, rep) in [(&ops.spin.jx, &irrep.jx), (&ops.spin.jy, &irrep.jy), (&ops.spin.jz, &irrep.jz)] {
                for k in 0..=total {
                    for l in 0..=total {
                        let a = fock.entries()[(
                            fock_index(n_max, total - k, k),
                            fock_index(n_max, total - l, l),
                        )];
                        prop_assert!((a - rep.entries()[(k, l)]).norm() < 1e-14);
                    }
                }
            }
        }
    }

    #[test]
    fn photon_number_is_invariant(seed in any::<u64>(), phi in -PI..PI, n_max in 3usize..=10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_fock_state(n_max, n_max - 2, &mut rng);
        let before = moments_of(&s).unwrap().nbar;
        let after = moments_of(&schroedinger_evolve(&s, phi).unwrap()).unwrap().nbar;
        prop_assert!(rel(after, before) < 1e-10);
    }

    #[test]
    fn uncertainty_relation(seed in any::<u64>(), twice_j in 1u32..=16) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = moments_of(&random_irrep_state(IrrepLabel::from_twice_j(twice_j), &mut rng)).unwrap();
        prop_assert!(m.uncertainty_slack() >= -1e-12);
    }

    #[test]
    fn pictures_agree(seed in any::<u64>(), twice_j in 1u32..=16, phi in -PI..PI) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_irrep_state(IrrepLabel::from_twice_j(twice_j), &mut rng);
        let heis = transform_moments(&moments_of(&s).unwrap(), phi);
        let schr = moments_of(&schroedinger_evolve(&s, phi).unwrap()).unwrap();
        for (a, b) in heis.fields().iter().zip(schr.fields()) {
            prop_assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn rotations_compose(twice_j in 0u32..=16, p1 in -PI..PI, p2 in -PI..PI) {
        let l = IrrepLabel::from_twice_j(twice_j);
        let lhs = rotation_unitary(l, p1) * rotation_unitary(l, p2);
        let rhs = rotation_unitary(l, p1 + p2);
        prop_assert!((lhs - &rhs).camax() < 1e-12);
        let id = DMatrix::<C64>::identity(l.dim(), l.dim());
        prop_assert!((rhs.adjoint() * &rhs - id).camax() < 1e-10);

        let a = RotationSpec::new(p1).unwrap().composed() * RotationSpec::new(p2).unwrap().composed();
        let b = RotationSpec::new(p1 + p2).unwrap().composed();
        prop_assert!((a - b).amax() < 1e-12);
    }

    #[test]
    fn shot_noise_bounded_by_jx_spread(seed in any::<u64>(), twice_j in 1u32..=16) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = moments_of(&random_irrep_state(IrrepLabel::from_twice_j(twice_j), &mut rng)).unwrap();
        if let Ok(u) = phase_uncertainty_from_moments(&m, FRAC_PI_2) {
            prop_assert!(u.value >= 1.0 / (2.0 * m.var_jx.sqrt()) * (1.0 - 1e-9));
        }
    }

    #[test]
    fn intelligent_squeezing_direction(twice_j in 1u32..=20, eta in 0.05f64..0.95, pick in 0usize..41) {
        let l = IrrepLabel::from_twice_j(twice_j);
        let m0x2 = -(twice_j as i32) + 2 * (pick % (twice_j as usize + 1)) as i32;
        let m = moments_of(&solve_intelligent_state(l, eta, m0x2).unwrap().state).unwrap();
        prop_assert!(m.var_jy < m.var_jx);
        prop_assert!(rel((m.var_jy / m.var_jx).sqrt(), eta) < 1e-7);
    }

    #[test]
    fn phase_insensitive_port_never_helps(n1 in 1.0f64..1e24, n2 in 0.01f64..1e3) {
        prop_assume!((n1 - n2).abs() > 1e-6 * n1);
        let worse = budget_phase_insensitive_port(n1, n2, &cfg()).unwrap();
        let base = budget_coherent(n1, &cfg()).unwrap();
        prop_assert!(worse.total_variance() >= base.total_variance() * (1.0 - 1e-12));
    }

    #[test]
    fn squeezed_exact_matches_generic_path(alpha in 1.0f64..1e4, r in 0.0f64..1.5) {
        let exact = budget_squeezed(alpha, r, &cfg(), SqueezeMode::Exact).unwrap();
        let generic = budget_from_moments(&coherent_squeezed_moments(alpha, r).unwrap(), &cfg()).unwrap();
        prop_assert!(rel(exact.total_variance(), generic.total_variance()) < 1e-8);
    }
}

#[test]
fn heisenberg_transform_derivative_matches_finite_difference() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let m = moments_of(&random_irrep_state(IrrepLabel::from_twice_j(7), &mut rng)).unwrap();
    let h = 1e-6;
    for phi in [0.2, 1.0, FRAC_PI_2, 2.5] {
        let fd = (heisenberg_transform(&m, phi + h).mean - heisenberg_transform(&m, phi - h).mean) / (2.0 * h);
        assert!((fd - heisenberg_transform(&m, phi).derivative).abs() < 1e-8);
    }
}

#[test]
fn balance_and_sql_at_every_optimum() {
    let c = cfg();
    let families = [
        BudgetFamily::Coherent,
        BudgetFamily::Heisenberg,
        BudgetFamily::Squeezed { r: 0.3, mode: SqueezeMode::Asymptotic },
        BudgetFamily::Squeezed { r: 1.1, mode: SqueezeMode::Asymptotic },
        BudgetFamily::TwinFock,
        BudgetFamily::IntelligentLimit { twice_m0: 0 },
        BudgetFamily::MismatchQuadrature { r: 0.4 },
        BudgetFamily::PhaseInsensitive { nbar2: 3.0 },
    ];
    for f in families {
        let opt = optimize_family(f, &c, DEFAULT_NBAR_BOUNDS).unwrap();
        let b = &opt.budget;
        assert!(rel(b.dz_pc, b.dz_rp) < 1e-6, "{f:?}: {} vs {}", b.dz_pc, b.dz_rp);
        // The stationarity of dz^2 at the optimum.
        let h = 1e-4;
        let up = f.budget(opt.nbar_opt * (1.0 + h), &c).unwrap().total_variance();
        let down = f.budget(opt.nbar_opt * (1.0 - h), &c).unwrap().total_variance();
        let slope = (up - down) / (2.0 * h * b.total_variance());
        assert!(slope.abs() < 1e-6, "{f:?}: slope {slope}");
    }
    for f in [
        BudgetFamily::Coherent,
        BudgetFamily::Heisenberg,
        BudgetFamily::Squeezed { r: 0.7, mode: SqueezeMode::Asymptotic },
    ] {
        let opt = optimize_family(f, &c, DEFAULT_NBAR_BOUNDS).unwrap();
        assert!(rel(opt.dz_opt, sql(&c)) < 1e-4, "{f:?}");
    }
}

#[test]
fn squeezing_lowers_optimum_power_monotonically() {
    let c = cfg();
    let p = |r: f64| {
        optimize_family(BudgetFamily::Squeezed { r, mode: SqueezeMode::Asymptotic }, &c, DEFAULT_NBAR_BOUNDS)
            .unwrap()
            .power_opt
    };
    let p0 = p(0.0);
    let mut last = p0;
    for k in 1..=12 {
        let r = 0.1 * k as f64;
        let pr = p(r);
        assert!(pr < last);
        assert!(rel(pr / p0, (-2.0 * r).exp()) < 1e-6, "r = {r}");
        last = pr;
    }
}

#[test]
fn doubling_hbar_doubles_radiation_pressure_scale() {
    let c = cfg();
    let d = DetectorConfig { hbar: 2.0 * HBAR, ..c };
    assert!(rel(d.a_rp().sqrt(), 2.0 * c.a_rp().sqrt()) < 1e-14);
    assert_eq!(d.a_pc(), c.a_pc());
    let b1 = budget_heisenberg_limited(1e6, &c).unwrap();
    let b2 = budget_heisenberg_limited(1e6, &d).unwrap();
    assert!(rel(b2.dz_rp, 2.0 * b1.dz_rp) < 1e-14);
    assert_eq!(b1.dz_pc, b2.dz_pc);
}
