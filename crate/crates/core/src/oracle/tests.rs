use super::*;
use crate::coefficients::{compute_coefficients, CoefficientSample, CoefficientTable};
use crate::grid::TimeGrid;
use crate::homogeneous::{build_rotation, solve_fundamental};
use crate::kernels::{tabulate_kernels, ReservoirSpec};
use crate::propagator::propagator_from_coefficients;
use crate::qcf::{moments, InitialState};

fn ohmic(alpha: f64, t_max: f64) -> CoefficientTable {
    let spec = ReservoirSpec::ohmic_exp(alpha, 5.0, 0.0).unwrap();
    let grid = TimeGrid::uniform(0.01, t_max).unwrap();
    compute_coefficients(&tabulate_kernels(&spec, &grid).unwrap(), 1.0).unwrap()
}

fn sample(delta_bar: f64, pi: f64, r: f64, gamma: f64) -> CoefficientSample {
    CoefficientSample {
        delta_bar,
        pi,
        r,
        gamma,
    }
}

const VARIANTS: [Variant; 4] = [Variant::Full, Variant::NoRenorm, Variant::Rwa, Variant::UnitaryOnly];

#[test]
fn fock_operators_are_canonical() {
    let ops = FockOperators::new(12).unwrap();
    let xt = ops.x.t().mapv(|v| v.conj());
    assert!(max_abs(&(&ops.x - &xt)) < 1e-15);
    let c = ops.x.dot(&ops.p) - ops.p.dot(&ops.x);
    for i in 0..11 {
        for j in 0..11 {
            let want = if i == j { Complex64::new(0.0, 1.0) } else { Complex64::new(0.0, 0.0) };
            assert!((c[[i, j]] - want).norm() < 1e-14);
        }
    }
    assert!(FockOperators::new(4).is_err());
}

#[test]
fn s_maps_annihilate_identity() {
    let ops = FockOperators::new(10).unwrap();
    let so = build_superops(&ops);
    let id = Array2::<Complex64>::eye(10);
    assert!(max_abs(&so.xs.apply(&id).unwrap()) < 1e-15);
    assert!(max_abs(&so.ps.apply(&id).unwrap()) < 1e-15);
    let twice = &ops.p * Complex64::new(2.0, 0.0);
    assert!(max_abs(&(so.psig.apply(&id).unwrap() - twice)) < 1e-14);
}

#[test]
fn fast_path_matches_dense_generator() {
    let ops = FockOperators::new(12).unwrap();
    let rho = interior_test_operator(12, 12, 7);
    let s = sample(0.3, 0.1, 0.08, 0.05);
    for v in VARIANTS {
        let dense = generator(&s, &ops, v, 1.0).apply(&rho).unwrap();
        let fast = rhs(&ops, v, &s, 1.0, &rho);
        assert!(max_abs(&(dense - fast)) < 1e-12, "{v}");
    }
}

#[test]
fn rwa_generator_assembly() {
    let ops = FockOperators::new(10).unwrap();
    let so = build_superops(&ops);
    let rho = interior_test_operator(10, 10, 3);
    let s = sample(0.4, 0.0, 0.0, 0.0);
    let got = generator(&s, &ops, Variant::Rwa, 1.0).apply(&rho).unwrap();
    let h = SuperMap::commutator(&ops.h0(1.0)).apply(&rho).unwrap();
    let xx = so.xs.apply(&so.xs.apply(&rho).unwrap()).unwrap();
    let pp = so.ps.apply(&so.ps.apply(&rho).unwrap()).unwrap();
    let want = h * Complex64::new(0.0, -1.0) - (xx + pp) * Complex64::new(0.2, 0.0);
    assert!(max_abs(&(got - want)) < 1e-13);
}

#[test]
fn damping_term_matches_n_plus_two_on_interior() {
    let d = 16;
    let ops = FockOperators::new(d).unwrap();
    let so = build_superops(&ops);
    let rho = interior_test_operator(d, d - 4, 5);
    let s = sample(0.0, 0.0, 0.0, 0.7);
    let free = SuperMap::commutator(&ops.h0(1.0)).apply(&rho).unwrap() * Complex64::new(0.0, -1.0);
    let damping = generator(&s, &ops, Variant::NoRenorm, 1.0).apply(&rho).unwrap() - free;
    let want = (so.n.apply(&rho).unwrap() + &rho * Complex64::new(2.0, 0.0)) * Complex64::new(0.7, 0.0);
    assert!(max_abs(&(damping - want)) < 1e-12);
}

#[test]
fn generator_preserves_trace() {
    let d = 20;
    let ops = FockOperators::new(d).unwrap();
    let s = sample(0.3, -0.1, 0.08, 0.05);
    for v in VARIANTS {
        let l = generator(&s, &ops, v, 1.0);
        assert!(l.trace_defect(d) < 1e-10, "{v}");
        let out = l.apply(&interior_test_operator(d, d - 4, 11)).unwrap();
        assert!(out.diag().sum().norm() < 1e-10);
    }
}

#[test]
fn free_evolution_rotates_moments() {
    let coeffs = ohmic(0.0, 10.0);
    let rho0 = TruncatedState::from_initial(&InitialState::coherent(2.0, 0.0).unwrap(), 30).unwrap();
    for v in VARIANTS {
        let tr = integrate(&rho0, &coeffs, v, &OracleOptions::default()).unwrap();
        for (t, row) in tr.times.iter().zip(&tr.rows) {
            assert!((row.mean_x - 2.0 * t.cos()).abs() < 1e-7, "{v} t={t}");
            assert!((row.mean_p + 2.0 * t.sin()).abs() < 1e-7, "{v} t={t}");
        }
    }
}

#[test]
fn unitary_first_moments_follow_rotation() {
    let coeffs = ohmic(0.1, 30.0);
    let rot = build_rotation(&solve_fundamental(&coeffs).unwrap(), &coeffs).unwrap();
    let (x0, p0) = (1.5, -0.8);
    let rho0 = TruncatedState::from_initial(&InitialState::coherent(x0, p0).unwrap(), 30).unwrap();
    let tr = integrate(&rho0, &coeffs, Variant::UnitaryOnly, &OracleOptions::default()).unwrap();
    let worst = tr
        .rows
        .iter()
        .zip(&rot)
        .map(|(row, r)| {
            let [x, p] = r.apply([x0, p0]);
            (row.mean_x - x).abs().max((row.mean_p - p).abs())
        })
        .fold(0.0, f64::max);
    assert!(worst < 1e-6, "{worst:e}");
}

#[test]
fn agrees_with_analytic_pipeline() {
    let coeffs = ohmic(0.1, 10.0);
    for (mode, variant) in [(Mode::Full, Variant::Full), (Mode::NoRenorm, Variant::NoRenorm), (Mode::Rwa, Variant::Rwa)] {
        let bundle = propagator_from_coefficients(&coeffs, mode).unwrap();
        for state in [InitialState::coherent(2.0, 0.0).unwrap(), InitialState::squeezed(0.3, 0.7).unwrap()] {
            let rho0 = TruncatedState::from_initial(&state, 30).unwrap();
            let tr = integrate(&rho0, &coeffs, variant, &OracleOptions::default()).unwrap();
            let (mut first, mut second) = (0.0f64, 0.0f64);
            for k in (0..coeffs.len()).step_by(50) {
                let a = moments(&bundle, &state, k).unwrap();
                let o = &tr.rows[k];
                first = first.max((a.mean_x - o.mean_x).abs()).max((a.mean_p - o.mean_p).abs());
                second = second
                    .max((a.xx - o.xx).abs())
                    .max((a.pp - o.pp).abs())
                    .max((a.xp_sym - o.xp_sym).abs());
            }
            assert!(first < 1e-5 && second < 1e-4, "{mode}: {first:e} {second:e}");
        }
    }
}

#[test]
fn trace_and_hermiticity_hold() {
    let coeffs = ohmic(0.1, 20.0);
    let rho0 = TruncatedState::from_initial(&InitialState::thermal(1.0).unwrap(), 30).unwrap();
    let tr = integrate(&rho0, &coeffs, Variant::Full, &OracleOptions::default()).unwrap();
    assert!(tr.max_trace_error() < 1e-8);
    assert!(tr.max_hermiticity_drift < 1e-10, "{:e}", tr.max_hermiticity_drift);
}

#[test]
fn leakage_aborts_with_suggestion() {
    let coeffs = ohmic(0.0, 1.0);
    let rho0 = TruncatedState::from_initial(&InitialState::coherent(4.0, 0.0).unwrap(), 12).unwrap();
    let opts = OracleOptions {
        d: 12,
        ..OracleOptions::default()
    };
    match integrate(&rho0, &coeffs, Variant::Full, &opts) {
        Err(OracleError::Leakage { suggested_d, .. }) => assert_eq!(suggested_d, 22),
        other => panic!("{other:?}"),
    }
}

#[test]
fn initial_states_match_analytic_moments() {
    let ops = FockOperators::new(40).unwrap();
    let states = [
        InitialState::coherent(1.2, -0.7).unwrap(),
        InitialState::thermal(0.8).unwrap(),
        InitialState::squeezed(0.4, 0.9).unwrap(),
        InitialState::fock(3),
    ];
    for s in states {
        let a = crate::qcf::initial_moments(&s).unwrap();
        let o = TruncatedState::from_initial(&s, 40).unwrap().moments(&ops);
        for (x, y) in [(a.mean_x, o.mean_x), (a.mean_p, o.mean_p), (a.xx, o.xx), (a.pp, o.pp), (a.xp_sym, o.xp_sym)] {
            assert!((x - y).abs() < 1e-7, "{:?}: {x} vs {y}", s.kind());
        }
    }
}

#[test]
fn weyl_expectation_values() {
    let vac = TruncatedState::from_initial(&InitialState::vacuum(), 40).unwrap();
    assert_eq!(chi_from_rho(&vac, [0.0, 0.0]).unwrap(), Complex64::new(1.0, 0.0));
    let v = chi_from_rho(&vac, [1.0, 1.0]).unwrap();
    assert!((v - Complex64::new((-0.5f64).exp(), 0.0)).norm() < 1e-8);
    let coh = TruncatedState::from_initial(&InitialState::coherent(0.6, 0.3).unwrap(), 30).unwrap();
    let z = [0.4, -0.7];
    let a = chi_from_rho(&coh, z).unwrap();
    let b = chi_from_rho(&coh, [-z[0], -z[1]]).unwrap();
    assert!((a - b.conj()).norm() < 1e-12);
    let want = InitialState::coherent(0.6, 0.3).unwrap().chi(z).unwrap();
    assert!((a - want).norm() < 1e-8);
}

#[test]
fn weyl_outside_truncation_is_refused() {
    let vac = TruncatedState::from_initial(&InitialState::vacuum(), 10).unwrap();
    for z in [[12.0, 12.0], [30.0, 30.0]] {
        assert!(matches!(chi_from_rho(&vac, z), Err(OracleError::Truncation { .. })), "{z:?}");
    }
}

#[test]
fn algebra_suite_passes_and_weyl_residuals_shrink() {
    let report = algebra_suite(30).unwrap();
    assert!(report.all_passed(), "{report}");
    let r = [20, 30, 40].map(|d| weyl_residuals(d, WEYL_POINT).unwrap());
    assert!(r[1].0 < r[0].0 && r[2].0 < r[1].0, "{r:?}");
    assert!(r[1].1 < r[0].1 && r[2].1 < r[1].1, "{r:?}");
    assert!(algebra_suite(12).is_err());
}


