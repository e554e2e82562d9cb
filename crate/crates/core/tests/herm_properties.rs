//! Property tests for the pointwise Hermitian linear algebra.

use hermitia::acceptance::{random_adjointable, random_semidefinite};
use hermitia::herm_core::*;
use hermitia::linalg::{fro, herm_eig, rank, CMat};
use hermitia::sampling::{random_cmat, sample_rng};
use proptest::prelude::*;
use proptest::test_runner::RngSeed;
use rand::Rng;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        rng_seed: RngSeed::Fixed(0x4e47),
        ..ProptestConfig::default()
    }
}

/// Random `(b_V, b_W, f)` with `f` adjointable, dims in 1..=6.
fn instance(seed: u64) -> (HermitianForm, HermitianForm, CMat, rand_chacha::ChaCha8Rng) {
    let mut rng = sample_rng(seed, 0);
    let (dv, dw) = (rng.random_range(1..=6usize), rng.random_range(1..=6usize));
    let (rv, rw) = (rng.random_range(0..=dv), rng.random_range(0..=dw));
    let bv = random_semidefinite(&mut rng, dv, rv);
    let bw = random_semidefinite(&mut rng, dw, rw);
    let f = random_adjointable(&mut rng, &bv, &bw);
    (bv, bw, f, rng)
}

proptest! {
    #![proptest_config(config(100))]

    #[test]
    fn adjoint_defining_identity(seed in any::<u64>()) {
        let (bv, bw, f, _) = instance(seed);
        let d = adjoint_matrix(&f, &bv, &bw).unwrap();
        let scale = 1.0 + fro(&f) * (fro(bv.gram()) + fro(bw.gram()));
        prop_assert!(adjoint_identity_residual(&f, &d, &bv, &bw) <= 1e-9 * scale);
    }

    #[test]
    fn adjoints_form_a_torsor_over_kernel_maps(seed in any::<u64>()) {
        let (bv, bw, f, mut rng) = instance(seed);
        let d1 = adjoint_matrix(&f, &bv, &bw).unwrap();
        let kv = kernel(&bv);
        let y = random_cmat(&mut rng, kv.dim(), bw.dim(), 1.0);
        let d2 = &d1 + kv.basis() * y;
        let scale = 1.0 + fro(&f) * (fro(bv.gram()) + fro(bw.gram()));
        prop_assert!(adjoint_identity_residual(&f, &d2, &bv, &bw) <= 1e-9 * scale);
        let diff = &d2 - &d1;
        prop_assert!(kv.dim() == 0 && fro(&diff) <= 1e-12 || kv.contains(&diff, 1e-10 * (1.0 + fro(&diff))));
        let dims = adjoint_freedom_dims(&LinearMap::new(f.clone()), &bv, &bw);
        prop_assert_eq!(dims.torsor_dim, Some(bw.dim() * kv.dim()));
        prop_assert_eq!(dims.adjointable_codim, dims.codim_by_rank);
    }

    #[test]
    fn double_adjoint_differs_by_kernel_map(seed in any::<u64>()) {
        let (bv, bw, f, _) = instance(seed);
        let d = adjoint_matrix(&f, &bv, &bw).unwrap();
        prop_assert!(admits_adjoint(&LinearMap::new(d.clone()), &bw, &bv));
        let dd = adjoint_matrix(&d, &bw, &bv).unwrap();
        // f†† - f lands in the kernel of the codomain form.
        let diff = &dd - &f;
        prop_assert!(fro(&(bw.gram() * &diff)) <= 1e-8 * (1.0 + fro(&f)) * (1.0 + fro(bw.gram())));
    }

    #[test]
    fn orthogonal_decomposition_dimensions(seed in any::<u64>()) {
        let mut rng = sample_rng(seed, 1);
        let n = rng.random_range(1..=6usize);
        let rk = rng.random_range(0..=n);
        let b = random_semidefinite(&mut rng, n, rk);
        let k = rng.random_range(0..=n);
        // Half the time, put part of S inside the kernel.
        let s = if k > 0 && rng.random_bool(0.5) && kernel(&b).dim() > 0 {
            let kb = kernel(&b).basis().clone();
            let mix = random_cmat(&mut rng, kb.ncols(), 1, 1.0);
            let rest = random_cmat(&mut rng, n, k - 1, 1.0);
            Subspace::span(&hermitia::linalg::hstack(&(kb * mix), &rest))
        } else {
            Subspace::span(&random_cmat(&mut rng, n, k, 1.0))
        };
        let dims = decomposition_dims(&s, &b).unwrap();
        prop_assert!(dims.holds(), "{:?}", dims);
    }

    #[test]
    fn quotient_form_does_not_depend_on_lift(seed in any::<u64>()) {
        let mut rng = sample_rng(seed, 2);
        let n = rng.random_range(1..=6usize);
        let p = rng.random_range(1..=n);
        let rk = rng.random_range(0..=n);
        let b = random_semidefinite(&mut rng, n, rk);
        let q = random_cmat(&mut rng, p, n, 1.0);
        let qf = quotient_form_checked(&q, &b).unwrap();
        prop_assert!(qf.lift_discrepancy <= 1e-10 * (1.0 + fro(b.gram())));
        let id = &q * &qf.lift;
        prop_assert!(fro(&(id - hermitia::linalg::eye(p))) <= 1e-10 * (1.0 + fro(&q)));
    }

    #[test]
    fn sum_quotient_is_semidefinite_and_kills_kernels(seed in any::<u64>()) {
        let mut rng = sample_rng(seed, 3);
        let n = rng.random_range(1..=6usize);
        let r1 = rng.random_range(0..=n);
        let b1 = random_semidefinite(&mut rng, n, r1);
        // Ranks chosen so b1 + b2 stays definite.
        let r2 = n - r1 + rng.random_range(0..=r1);
        let b2 = random_semidefinite(&mut rng, n, r2);
        let q = sum_quotient_form(&b1, &b2).unwrap();
        let eig = herm_eig(q.gram()).0;
        prop_assert!(eig[0] >= -1e-10 * (1.0 + eig[eig.len() - 1].abs()));
        for b in [&b1, &b2] {
            let k = kernel(b);
            if k.dim() > 0 {
                prop_assert!(fro(&(q.gram() * k.basis())) <= 1e-9 * (1.0 + fro(q.gram())));
            }
        }
    }

    #[test]
    fn purge_reproduces_the_form(seed in any::<u64>()) {
        let mut rng = sample_rng(seed, 4);
        let n = rng.random_range(1..=6usize);
        let rk = rng.random_range(0..=n);
        let b = random_semidefinite(&mut rng, n, rk);
        let p = purge(&b);
        let q = &p.quotient_map.matrix;
        let rebuilt = q.adjoint() * p.purged_form.gram() * q;
        prop_assert!(fro(&(rebuilt - b.gram())) <= 1e-10 * (1.0 + fro(b.gram())));
        prop_assert_eq!(p.purged_form.dim(), b.rank());
        if p.purged_form.dim() > 0 {
            prop_assert!(p.purged_form.is_nondegenerate());
        }
    }

    #[test]
    fn non_adjointable_maps_are_rejected(seed in any::<u64>()) {
        let mut rng = sample_rng(seed, 5);
        let n = rng.random_range(2..=6usize);
        let bv = random_semidefinite(&mut rng, n, n - 1);
        let m = rng.random_range(1..=6usize);
        let bw = HermitianForm::identity(m);
        let f = random_cmat(&mut rng, m, n, 1.0);
        prop_assert!(rank(&(&f * kernel(&bv).basis()), 1e-10) > 0);
        let rejected = matches!(adjoint_matrix(&f, &bv, &bw), Err(hermitia::Error::NoAdjoint { .. }));
        prop_assert!(rejected);
    }
}

proptest! {
    #![proptest_config(config(40))]

    #[test]
    fn limit_form_converges_at_rate_e_to_minus_lambda(seed in any::<u64>()) {
        let mut rng = sample_rng(seed, 6);
        let n = rng.random_range(2..=5usize);
        let r2 = rng.random_range(1..n);
        let b2 = random_semidefinite(&mut rng, n, r2);
        let b1 = random_semidefinite(&mut rng, n, n);
        let lf = limit_form(&b1, &b2, &[2.0, 4.0, 6.0, 8.0]).unwrap();
        prop_assert!(lf.projection_residual() <= 1e-8 * (1.0 + fro(b1.gram())));
        // Per direction the error is x²/(x + y e^λ), so ratios lie in
        // [e^-2, 1) and approach e^-2 once y e^λ dominates x.
        let expected = (-2.0f64).exp();
        let ratios = lf.error_ratios();
        for r in &ratios {
            prop_assert!(*r >= expected * (1.0 - 1e-3) && *r < 1.0, "ratio {r}");
        }
        let y_min = lf.coefficients.iter().map(|c| c.1).filter(|&y| y > 1e-8).fold(1.0, f64::min);
        if y_min >= 0.05 {
            if let Some(last) = ratios.last() {
                prop_assert!((last / expected - 1.0).abs() <= 0.2, "ratio {last}");
            }
        }
    }
}
