//! Oracle and identity checks for exact sequences and sums of forms.

use hermitia::acceptance::{instance_point, sum_instance};
use hermitia::chart_calc::{curvature_tensor, Domain, KernelPerturbation};
use hermitia::linalg::{c, cr, eye, hstack, zeros};
use hermitia::sampling::{polydisc_point, sample_rng};
use hermitia::sequences::*;
use proptest::prelude::*;
use proptest::test_runner::RngSeed;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        rng_seed: RngSeed::Fixed(0x5e9),
        ..ProptestConfig::default()
    }
}

/// Sequence whose ambient form is degenerate of constant rank, with `j`
/// mapping onto a generic `k`-plane.
fn degenerate_ambient_sequence(seed: u64) -> (ExactSeqChart, Vec<hermitia::linalg::C64>) {
    let mut rng = sample_rng(seed, 7);
    let (m, r, k) = (1, 4, 1);
    let d = Domain::origin(m, INSTANCE_RADIUS);
    let amb = random_degenerate_field(&mut rng, m, r, r - 1, d.clone()).unwrap();
    let j = random_inclusion(&mut rng, m, r, k, d.center.clone());
    let seq = ExactSeqChart::new(amb, j).unwrap();
    let z = polydisc_point(&mut rng, &d.center, INSTANCE_REGION);
    (seq, z)
}

proptest! {
    #![proptest_config(config(25))]

    #[test]
    fn codazzi_formulas_match_intrinsic_curvature(seed in any::<u64>(), i in 0u64..12) {
        let seq = random_sequence(seed, i).unwrap();
        let z = instance_point(&seq, seed, i);
        let rep = seq.codazzi_check(&z).unwrap();
        prop_assert!(rep.sub_residual <= 1e-4 && rep.quot_residual <= 1e-4, "{:?}", rep);
    }

    #[test]
    fn subbundles_decrease_and_quotients_increase_curvature(seed in any::<u64>(), i in 0u64..12) {
        let seq = random_sequence(seed, i).unwrap();
        let z = instance_point(&seq, seed, i);
        let rep = seq.codazzi_check(&z).unwrap();
        prop_assert!(rep.sub_monotone_gap <= 1e-6 && rep.quot_monotone_gap <= 1e-6, "{:?}", rep);
    }

    #[test]
    fn demailly_identities_hold(seed in any::<u64>(), i in 0u64..12) {
        let seq = random_sequence(seed, i).unwrap();
        let z = instance_point(&seq, seed, i);
        let rep = seq.demailly_residuals(&z).unwrap();
        prop_assert!(rep.max() <= 1e-5, "{:?}", rep.lines);
    }

    #[test]
    fn splitting_blocks_reassemble_ambient_curvature(seed in any::<u64>(), i in 0u64..12) {
        let seq = random_sequence(seed, i).unwrap();
        let z = instance_point(&seq, seed, i);
        let blocks = seq.splitting_curvature_blocks(&z).unwrap();
        prop_assert!(blocks.reassembly_residual <= 1e-5, "{}", blocks.reassembly_residual);
    }

    #[test]
    fn sigma_is_linear_and_respects_kernels(seed in any::<u64>(), i in 0u64..12) {
        let seq = random_sequence(seed, i).unwrap();
        let z = instance_point(&seq, seed, i);
        let sff = seq.second_fundamental_form(&z).unwrap();
        prop_assert!(sff.kernel_residual <= 1e-8);
        prop_assert!(sff.dbar_residual <= 1e-6);
        let mut rng = sample_rng(seed, 99);
        // Central differences with step 1e-4 limit this residual.
        prop_assert!(seq.sigma_linearity_residual(&mut rng, &z).unwrap() <= 1e-6);
    }

    #[test]
    fn degenerate_ambient_sequences(seed in any::<u64>()) {
        let (seq, z) = degenerate_ambient_sequence(seed);
        let rep = seq.codazzi_check(&z).unwrap();
        prop_assert!(rep.sub_residual <= 1e-4 && rep.quot_residual <= 1e-4, "{:?}", rep);
        prop_assert!(seq.second_fundamental_form(&z).unwrap().kernel_residual <= 1e-8);
    }

    #[test]
    fn sum_formula_matches_direct_curvature(seed in any::<u64>(), i in 0u64..9) {
        let (b1, b2, z, kind) = sum_instance(seed, i).unwrap();
        let r = sum_check(&b1, &b2, &z).unwrap();
        prop_assert!(r <= 1e-4, "{kind}: {r}");
    }

    #[test]
    fn sum_sigma_term_is_gauge_invariant(seed in any::<u64>()) {
        // Instance 0 of each seed has two degenerate summands.
        let (b1, b2, z, _) = sum_instance(seed, 0).unwrap();
        let mut rng = sample_rng(seed, 5);
        let k1 = KernelPerturbation::random(&mut rng, b1.chart_dim(), b1.frame_rank(), &b1.domain().center);
        let k2 = KernelPerturbation::random(&mut rng, b2.chart_dim(), b2.frame_rank(), &b2.domain().center);
        prop_assert!(sum_term_gauge_residual(&b1, &b2, &z, &k1, &k2).unwrap() <= 1e-6);
    }
}

#[test]
fn tautological_line_closed_forms_along_a_ray() {
    // R_S = -1/(1+|z|²)² · (1+|z|²) = -1/(1+|z|²) on the frame (1, z), and the
    // quotient curvature is +1/(1+|z|²)² on the orthonormal complement frame.
    let seq = tautological_line().unwrap();
    for t in [0.0, 0.1, 0.2, 0.3] {
        let z = [c(t, -0.5 * t)];
        let rho = 1.0 + z[0].norm_sqr();
        let rs = curvature_tensor(seq.sub_field(), &z).unwrap().blocks[0][0][(0, 0)];
        assert!((rs - cr(-1.0 / rho)).norm() < 1e-6, "{t}: {rs}");
        let formula = seq.codazzi_sub_tensor(&z).unwrap().blocks[0][0][(0, 0)];
        assert!((formula - rs).norm() < 1e-6);
    }
}

#[test]
fn split_sequence_has_no_second_fundamental_form() {
    let amb = hermitia::chart_calc::ChartField::from_source(
        hermitia::chart_calc::fields::ConstantSource::new(hermitia::linalg::from_real_diag(&[1.0, 2.0, 3.0]), 1),
        Domain::origin(1, 1.0),
    )
    .analytic()
    .unwrap();
    let j = hstack(&eye(2), &zeros(2, 1)).transpose();
    let seq = ExactSeqChart::with_constant_inclusion(amb, j).unwrap();
    let z = [c(0.1, 0.1)];
    for s in seq.sigma(&z).unwrap() {
        assert!(hermitia::linalg::fro(&s) < 1e-12);
    }
    assert!(seq.demailly_residuals(&z).unwrap().max() < 1e-12);
}
