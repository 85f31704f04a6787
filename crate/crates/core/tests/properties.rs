use std::f64::consts::FRAC_PI_2;

use dualism::bell::{bell_expectation, correlator, PseudoSpinSetting};
use dualism::dual::{attempt_relabel_by_b_nip, relabel_by_a, relabel_by_b, round_trip};
use dualism::fock::{apply_pair_normal_ordered, build_epr_state, inner_product, to_first_quantized};
use dualism::{BellSettings, DualismError, Mode, Statistics, TwoParticleState, TwoSpeciesState, Variable, VariableSpec};
use num_complex::Complex64;
use proptest::prelude::*;

fn complex() -> impl Strategy<Value = Complex64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| Complex64::new(re, im))
}

fn nonzero_complex() -> impl Strategy<Value = Complex64> {
    complex().prop_filter("away from zero", |z| z.norm() > 1e-3)
}

fn statistics() -> impl Strategy<Value = Statistics> {
    prop_oneof![Just(Statistics::Boson), Just(Statistics::Fermion)]
}

fn mode() -> impl Strategy<Value = Mode> {
    (1u8..=2, 1u8..=2).prop_map(|(a, b)| Mode::new(a, b))
}

fn in_plane_setting() -> impl Strategy<Value = PseudoSpinSetting> {
    (-3.2f64..3.2).prop_map(PseudoSpinSetting::in_plane)
}

fn any_setting() -> impl Strategy<Value = PseudoSpinSetting> {
    (0.0f64..std::f64::consts::PI, -3.2f64..3.2).prop_map(|(t, p)| PseudoSpinSetting::new(t, p))
}

fn epr(alpha: Complex64, beta: Complex64, stats: Statistics) -> TwoParticleState {
    build_epr_state(VariableSpec::default(), alpha, beta, stats).unwrap()
}

proptest! {
    #[test]
    fn fermion_states_never_occupy_a_mode_twice(
        terms in prop::collection::vec((mode(), mode(), complex()), 1..6)
    ) {
        let result = TwoParticleState::from_terms(VariableSpec::default(), Statistics::Fermion, &terms);
        match result {
            Ok(s) => {
                prop_assert_eq!(s.amplitudes().len(), 6);
                prop_assert!(s.iter().all(|(cfg, _)| !cfg.is_doubly_occupied()));
                prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
            }
            Err(DualismError::ExclusionViolation(m)) => {
                prop_assert!(terms.iter().any(|(a, b, _)| a == b && *a == m));
            }
            Err(DualismError::ZeroState) => {}
            Err(e) => prop_assert!(false, "unexpected error {e:?}"),
        }
    }

    #[test]
    fn reordering_twice_is_sign_free(m1 in mode(), m2 in mode(), stats in statistics()) {
        prop_assume!(!(stats == Statistics::Fermion && m1 == m2));
        let (cfg, s1) = apply_pair_normal_ordered(m1, m2, stats).unwrap();
        let (a, b) = cfg.modes();
        let (cfg2, s2) = apply_pair_normal_ordered(b, a, stats).unwrap();
        let (cfg3, s3) = apply_pair_normal_ordered(cfg2.modes().0, cfg2.modes().1, stats).unwrap();
        prop_assert_eq!(cfg, cfg2);
        prop_assert_eq!(cfg2, cfg3);
        prop_assert_eq!(s3, 1.0);
        // (m1,m2) -> canonical -> swapped back: the two swaps cancel
        let back = if a == b { 1.0 } else { s2 * stats.exchange_sign() };
        prop_assert_eq!(back, 1.0);
        prop_assert!(s1 == 1.0 || s1 == -1.0);
    }

    #[test]
    fn dual_readings_exist_and_agree_on_entanglement(
        alpha in nonzero_complex(), beta in nonzero_complex(), stats in statistics()
    ) {
        let s = epr(alpha, beta, stats);
        let a = relabel_by_a(&s).unwrap();
        let b = relabel_by_b(&s).unwrap();
        prop_assert!((a.c1().norm_sqr() + a.c2().norm_sqr() - 1.0).abs() < 1e-12);
        prop_assert!((b.c1().norm_sqr() + b.c2().norm_sqr() - 1.0).abs() < 1e-12);
        prop_assert!((a.concurrence() - b.concurrence()).abs() < 1e-12);
        prop_assert_ne!(a.label_variable(), b.label_variable());
        prop_assert_eq!(a.entangled_variable(), Variable::B);
        prop_assert_eq!(b.entangled_variable(), Variable::A);
        // sign law
        let ratio = b.c2() / a.c2();
        prop_assert!((ratio - Complex64::from(stats.exchange_sign())).norm() < 1e-12);
        prop_assert!((b.c1() - a.c1()).norm() < 1e-12);
    }

    #[test]
    fn round_trip_fidelity_is_one(
        alpha in complex(), beta in complex(), stats in statistics(), via_b in any::<bool>()
    ) {
        prop_assume!(alpha.norm() + beta.norm() > 1e-3);
        let s = epr(alpha, beta, stats);
        let via = if via_b { Variable::B } else { Variable::A };
        let back = round_trip(&s, via).unwrap();
        prop_assert!((inner_product(&back, &s).unwrap().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn nip_pairs_never_have_a_b_labelling(alpha in nonzero_complex(), beta in nonzero_complex()) {
        let s = TwoSpeciesState::epr_analogue(alpha, beta).unwrap();
        let is_forbidden = matches!(attempt_relabel_by_b_nip(&s), Err(DualismError::SpeciesSuperpositionForbidden(_)));
        prop_assert!(is_forbidden);
    }

    #[test]
    fn fermion_in_plane_correlators_flip(
        alpha in nonzero_complex(), beta in nonzero_complex(),
        sa in in_plane_setting(), sb in in_plane_setting()
    ) {
        let s = epr(alpha, beta, Statistics::Fermion);
        let a = relabel_by_a(&s).unwrap();
        let b = relabel_by_b(&s).unwrap();
        prop_assert!((correlator(&a, sa, sb) + correlator(&b, sa, sb)).abs() < 1e-12);
    }

    #[test]
    fn boson_dual_forms_give_identical_results(
        alpha in nonzero_complex(), beta in nonzero_complex(),
        a in any_setting(), ap in any_setting(), b in any_setting(), bp in any_setting()
    ) {
        let s = epr(alpha, beta, Statistics::Boson);
        let settings = BellSettings { a, a_prime: ap, b, b_prime: bp };
        let ra = bell_expectation(&relabel_by_a(&s).unwrap(), &settings);
        let rb = bell_expectation(&relabel_by_b(&s).unwrap(), &settings);
        prop_assert!((ra.bell_expectation - rb.bell_expectation).abs() < 1e-12);
        for (x, y) in ra.correlators.as_array().iter().zip(rb.correlators.as_array()) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn correlators_and_s_are_bounded(
        c1 in complex(), c2 in complex(),
        a in any_setting(), ap in any_setting(), b in any_setting(), bp in any_setting()
    ) {
        prop_assume!(c1.norm() + c2.norm() > 1e-3);
        let s = dualism::LabeledBipartiteState::normalized(Variable::A, c1, c2).unwrap();
        let r = bell_expectation(&s, &BellSettings { a, a_prime: ap, b, b_prime: bp });
        prop_assert!(r.correlators.as_array().iter().all(|e| e.abs() <= 1.0));
        prop_assert!(r.bell_expectation.abs() <= 2.0 * std::f64::consts::SQRT_2 + 1e-9);
    }

    #[test]
    fn first_quantized_image_is_exchange_eigenvector(
        amps in prop::collection::vec(complex(), 10), stats in statistics()
    ) {
        let dim = if stats == Statistics::Boson { 10 } else { 6 };
        let amps: Vec<_> = amps.into_iter().take(dim).collect();
        prop_assume!(amps.iter().any(|a| a.norm() > 1e-3));
        let s = TwoParticleState::from_amplitudes(VariableSpec::default(), stats, amps).unwrap();
        let fq = to_first_quantized(&s);
        prop_assert!(fq.exchange_defect() < 1e-12);
        prop_assert!((fq.inner(&fq).re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn state_json_round_trip(alpha in complex(), beta in complex(), stats in statistics()) {
        prop_assume!(alpha.norm() + beta.norm() > 1e-3);
        let s = epr(alpha, beta, stats);
        let text = serde_json::to_string(&s).unwrap();
        let back: TwoParticleState = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, s);
    }
}

#[test]
fn settings_plane_guard() {
    let mut settings = BellSettings::canonical();
    assert!(settings.all_in_plane().is_ok());
    settings.b_prime = PseudoSpinSetting::new(FRAC_PI_2 + 1e-6, 0.0);
    assert_eq!(settings.all_in_plane(), Err(DualismError::SettingsNotInPlane("b_prime")));
}
