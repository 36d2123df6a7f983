use std::sync::OnceLock;

use num_complex::Complex64;
use proptest::prelude::*;

use qbm_core::cli::{emit_ellipse, parse_config_str};
use qbm_core::coefficients::{compute_coefficients, CoefficientTable};
use qbm_core::grid::TimeGrid;
use qbm_core::homogeneous::{build_rotation, solve_fundamental};
use qbm_core::kernels::{kappa, mu, tabulate_kernels, ReservoirSpec};
use qbm_core::mat2::Mat2;
use qbm_core::oracle::{build_superops, interior_test_operator, max_abs, FockOperators};
use qbm_core::propagator::{propagator_from_coefficients, Mode, PropagatorBundle};
use qbm_core::qcf::{evolve_chi, gaussian_evolve, InitialState};

fn coeffs(alpha: f64, wc: f64, t_max: f64) -> CoefficientTable {
    let spec = ReservoirSpec::ohmic_exp(alpha, wc, 0.0).unwrap();
    let grid = TimeGrid::uniform(0.01, t_max).unwrap();
    compute_coefficients(&tabulate_kernels(&spec, &grid).unwrap(), 1.0).unwrap()
}

fn bundles() -> &'static Vec<PropagatorBundle> {
    static B: OnceLock<Vec<PropagatorBundle>> = OnceLock::new();
    B.get_or_init(|| {
        let c = coeffs(0.1, 5.0, 8.0);
        Mode::ALL
            .iter()
            .map(|&m| propagator_from_coefficients(&c, m).unwrap())
            .collect()
    })
}

fn state_strategy() -> impl Strategy<Value = InitialState> {
    prop_oneof![
        (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(x, p)| InitialState::coherent(x, p).unwrap()),
        (0.0..3.0f64).prop_map(|n| InitialState::thermal(n).unwrap()),
        (0.0..0.8f64, -3.0..3.0f64).prop_map(|(r, phi)| InitialState::squeezed(r, phi).unwrap()),
        (0u32..6).prop_map(InitialState::fock),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn susceptibility_vanishes_at_zero_lag(alpha in 0.0..0.5f64, wc in 0.5..10.0f64, t in 0.0..3.0f64) {
        for spec in [ReservoirSpec::ohmic_exp(alpha, wc, t).unwrap(), ReservoirSpec::lorentz_drude(alpha, wc, t).unwrap()] {
            prop_assert_eq!(mu(&spec, 0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn kernels_scale_as_alpha_squared(alpha in 0.01..0.3f64, wc in 0.5..10.0f64, tau in 0.0..20.0f64, warm in any::<bool>()) {
        let t = if warm { 1.3 } else { 0.0 };
        let a = ReservoirSpec::ohmic_exp(alpha, wc, t).unwrap();
        let b = ReservoirSpec::ohmic_exp(2.0 * alpha, wc, t).unwrap();
        let (ka, kb) = (kappa(&a, tau).unwrap(), kappa(&b, tau).unwrap());
        let (ma, mb) = (mu(&a, tau).unwrap(), mu(&b, tau).unwrap());
        prop_assert!((kb - 4.0 * ka).abs() <= 1e-12 * kb.abs().max(1e-300));
        prop_assert!((mb - 4.0 * ma).abs() <= 1e-12 * mb.abs().max(1e-300));
    }

    #[test]
    fn coefficient_table_scales_as_alpha_squared(alpha in 0.01..0.2f64, wc in 1.0..8.0f64) {
        let (a, b) = (coeffs(alpha, wc, 3.0), coeffs(2.0 * alpha, wc, 3.0));
        for (x, y) in [(&a.delta_bar, &b.delta_bar), (&a.pi, &b.pi), (&a.r, &b.r), (&a.gamma, &b.gamma), (&a.big_gamma, &b.big_gamma)] {
            for (u, v) in x.iter().zip(y.iter()) {
                prop_assert!((v - 4.0 * u).abs() <= 1e-12 * v.abs().max(1e-300));
            }
        }
    }

    #[test]
    fn rotation_is_unimodular_and_continuous(alpha in 0.0..0.2f64, wc in 1.0..8.0f64) {
        let c = coeffs(alpha, wc, 10.0);
        let fund = solve_fundamental(&c).unwrap();
        prop_assert!(fund.max_wronskian_defect() < 1e-8);
        let rot = build_rotation(&fund, &c).unwrap();
        let w_max = qbm_core::homogeneous::effective_frequency_sq(&c).iter().fold(0.0f64, |a, &b| a.max(b)).sqrt();
        for (k, r) in rot.iter().enumerate() {
            prop_assert!((r.det() - 1.0).abs() < 1e-8);
            if k > 0 {
                let step = (*r - rot[k - 1]).max_abs();
                prop_assert!(step <= w_max * 0.01 * (1.0 + r.max_abs()), "k={} step={}", k, step);
            }
        }
    }

    #[test]
    fn chi_is_normalized_and_hermitian(state in state_strategy(), k in 0usize..800, x in -3.0..3.0f64, p in -3.0..3.0f64) {
        for b in bundles() {
            prop_assert_eq!(evolve_chi(b, &state, [0.0, 0.0], k).unwrap(), Complex64::new(1.0, 0.0));
            let a = evolve_chi(b, &state, [x, p], k).unwrap();
            let m = evolve_chi(b, &state, [-x, -p], k).unwrap();
            prop_assert!((a - m.conj()).norm() <= 1e-12);
        }
    }

    #[test]
    fn gaussian_closure_is_pointwise(state in state_strategy(), k in 0usize..800, x in -3.0..3.0f64, p in -3.0..3.0f64) {
        if let Some(g) = state.gaussian() {
            for b in bundles() {
                let direct = evolve_chi(b, &state, [x, p], k).unwrap();
                let closed = gaussian_evolve(b, g, k).chi([x, p]);
                prop_assert!((direct - closed).norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn w_bar_is_symmetric_and_rwa_isotropic(k in 0usize..800) {
        for b in bundles() {
            let w = b.w_bar[k];
            prop_assert_eq!(w.get(0, 1), w.get(1, 0));
            if b.mode == Mode::Rwa {
                prop_assert_eq!(w, Mat2::scaled_identity(0.5 * b.delta_gamma[k]));
            }
        }
    }

    #[test]
    fn commutation_identities_hold_for_random_operators(seed in any::<u64>()) {
        let d = 20;
        let ops = FockOperators::new(d).unwrap();
        let so = build_superops(&ops);
        let rho = interior_test_operator(d, d - 5, seed);
        let a = so.xs.apply(&so.psig.apply(&rho).unwrap()).unwrap();
        let b = so.psig.apply(&so.xs.apply(&rho).unwrap()).unwrap();
        prop_assert!(max_abs(&(a - b - &rho * Complex64::new(0.0, 2.0))) < 1e-10);
        let a = so.xs.apply(&so.ps.apply(&rho).unwrap()).unwrap();
        let b = so.ps.apply(&so.xs.apply(&rho).unwrap()).unwrap();
        prop_assert!(max_abs(&(a - b)) < 1e-10);
    }

    #[test]
    fn ellipse_points_satisfy_the_form(r in -0.9..0.9f64, g in -0.9..0.9f64) {
        match emit_ellipse(r, g) {
            Ok(e) => {
                prop_assert!(1.0 - r > 0.0 && (1.0 - r) - g * g > 0.0);
                for v in &e.points {
                    prop_assert!((e.q.quad_form(*v) - 1.0).abs() < 1e-12);
                }
                prop_assert_eq!(e.tilt() == 0.0, g == 0.0);
            }
            Err(_) => prop_assert!((1.0 - r) - g * g <= 0.0),
        }
    }

    #[test]
    fn config_numbers_round_trip(alpha in 0.0..1.0f64, dt in 1e-4..0.1f64, span in 1.0..100.0f64) {
        let t_max = dt * span;
        let text = format!("reservoir.alpha = {alpha}\ngrid.dt = {dt}\ngrid.t_max = {t_max}\nrun.modes = rwa\n");
        let c = parse_config_str(&text, std::path::Path::new(".")).unwrap();
        prop_assert_eq!((c.alpha, c.dt, c.t_max), (alpha, dt, t_max));
    }

    #[test]
    fn congruence_round_trips(a in -2.0..2.0f64, b in -2.0..2.0f64, c in -2.0..2.0f64, angle in -3.0..3.0f64) {
        let s = Mat2::symmetric(a, b, c);
        let r = Mat2::rotation(angle);
        let turned = r.congruence(&s);
        prop_assert!((turned.trace() - s.trace()).abs() < 1e-12);
        prop_assert!((turned.det() - s.det()).abs() < 1e-12);
        let back = r.inverse().unwrap().congruence(&turned);
        prop_assert!((back - s).max_abs() < 1e-12);
    }
}
