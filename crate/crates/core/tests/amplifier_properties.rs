use approx::assert_abs_diff_eq;
use mu2amp::channels::{
    default_output_cutoff, immaculate_apply, linear_amp_channel, mu2_amplify, AmplifierSpec,
    PipelineCutoffs,
};
use mu2amp::fock::{coherent_state, normal_moment, trace_distance, DensityOperator};
use mu2amp::metrics;
use mu2amp::oracle::{two_mode_amplify, two_mode_amplify_auto, OracleCutoffs};
use mu2amp::quasiprob::{q_function, q_rescale, QFunction, StateQ};
use mu2amp::Complex64;
use proptest::prelude::*;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn pipeline_agrees_with_closed_forms(mu2 in 0.0f64..0.99, gain in 1.5f64..6.0, n in 1usize..4, a in 0.0f64..1.2) {
        let spec = AmplifierSpec::new(mu2, gain, n);
        let run = mu2_amplify(c(a), &spec, &PipelineCutoffs::default()).unwrap();
        let g1 = run.design.g1;
        let p = metrics::p_success_exact(a, g1, n);
        prop_assert!((run.p_success - p).abs() <= 1e-13 * p);
        let f = metrics::fidelity_exact(a, g1, gain, n).unwrap();
        prop_assert!((run.fidelity - f).abs() <= 1e-8);
        prop_assert!(run.pfp <= metrics::pfp_bound(a, g1) + 1e-8);
        prop_assert!(run.rho_out.is_valid_state());
    }

    #[test]
    fn channel_output_is_a_state(a in 0.0f64..1.0, g in 1.0f64..3.0, nbar in 0.0f64..1.0) {
        let rho = coherent_state(c(a), 25).normalized().unwrap().to_density();
        let d = default_output_cutoff(&rho, g, nbar, 1e-12);
        let out = linear_amp_channel(&rho, g, nbar, d).unwrap();
        prop_assert!(out.is_valid_state());
        let mean = normal_moment(&out, 0, 1).unwrap();
        prop_assert!((mean - c(a * g)).norm() < 1e-9);
    }
}

#[test]
fn oracle_is_converged_in_the_ancilla_cutoff() {
    let rho = immaculate_apply(c(0.6), 1.4, 2, 4).unwrap().0.to_density();
    for (g, nbar) in [(1.5, 0.5), (2.5, 0.0)] {
        let (base, cut) = two_mode_amplify_auto(&rho, nbar, g).unwrap();
        let wide = OracleCutoffs { ancilla: 2 * cut.ancilla, ..cut };
        let doubled = two_mode_amplify(&rho, nbar, g, &wide).unwrap();
        for (k, m) in [(0, 1), (1, 1), (0, 2), (2, 2)] {
            let x = normal_moment(&base, k, m).unwrap();
            let y = normal_moment(&doubled, k, m).unwrap();
            assert!((x - y).norm() < 1e-9, "g={g} moment ({k},{m}): {x} vs {y}");
        }
    }
}

#[test]
fn variance_law_for_coherent_inputs() {
    for (g, nbar) in [(1.5, 0.0), (1.5, 0.5), (3.0, 0.5)] {
        let rho = coherent_state(c(0.3), 20).normalized().unwrap().to_density();
        let d = default_output_cutoff(&rho, g, nbar, 1e-14);
        let out = linear_amp_channel(&rho, g, nbar, d).unwrap();
        let mean = normal_moment(&out, 0, 1).unwrap();
        let var = normal_moment(&out, 1, 1).unwrap().re - mean.norm_sqr();
        assert_abs_diff_eq!(var, (nbar + 1.0) * (g * g - 1.0), epsilon = 1e-7);
        let (oracle, _) = two_mode_amplify_auto(&rho, nbar, g).unwrap();
        assert!(trace_distance(&oracle, &out.with_cutoff(oracle.cutoff())) < 1e-8);
    }
}

#[test]
fn quantum_limited_q_rescaling_matches_oracle() {
    let rho = immaculate_apply(c(0.4), 1.6, 1, 3).unwrap().0.to_density();
    let g = 2.0;
    let (out, _) = two_mode_amplify_auto(&rho, 0.0, g).unwrap();
    let rescaled = q_rescale(StateQ::new(&rho).unwrap(), g).unwrap();
    for (re, im) in [(0.0, 0.0), (0.8, 0.0), (1.5, -1.0), (-2.0, 0.5)] {
        let beta = Complex64::new(re, im);
        assert_abs_diff_eq!(q_function(&out, beta).unwrap(), rescaled.q(beta), epsilon = 1e-10);
    }
}

#[test]
fn deterministic_amplifier_has_unit_pfp() {
    for mu2 in [1.0, 1.5] {
        let spec = AmplifierSpec::new(mu2, 2.0, 1);
        for a in [0.0, 0.5, 1.5] {
            let run = mu2_amplify(c(a), &spec, &PipelineCutoffs::default()).unwrap();
            assert_eq!(run.p_success, 1.0);
            assert_abs_diff_eq!(run.fidelity, metrics::fidelity_mu(mu2, 2.0), epsilon = 1e-9);
        }
    }
    let run = mu2_amplify(c(0.5), &AmplifierSpec::new(1.0, 3.0, 1), &PipelineCutoffs::default())
        .unwrap();
    assert_abs_diff_eq!(run.pfp, 1.0, epsilon = 1e-8);
}

#[test]
fn vacuum_through_every_stage() {
    let vac = DensityOperator::vacuum(3);
    let q = q_function(&vac, c(0.0)).unwrap();
    assert_abs_diff_eq!(q, std::f64::consts::FRAC_1_PI, epsilon = 1e-16);
    let spec = AmplifierSpec::new(0.0, 9.0, 1);
    let run = mu2_amplify(c(0.0), &spec, &PipelineCutoffs::default()).unwrap();
    assert_abs_diff_eq!(run.p_success, 1.0 / 81.0, epsilon = 1e-16);
    assert_abs_diff_eq!(run.fidelity, 1.0, epsilon = 1e-12);
}
