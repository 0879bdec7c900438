//! Randomized properties checked against independent oracles.

mod common;

use inno_deepc::behavioral::{block_hankel, is_persistently_exciting, RankTol};
use inno_deepc::control::{kkt_residual, solve_box_qp};
use inno_deepc::descriptor::{
    determinant_degree, sample_noise, simulate, weierstrass_decompose, PlantStepper, DEFAULT_DECOMPOSITION_TOL,
};
use inno_deepc::innovation::{build_augmented, simulate_augmented};
use inno_deepc::linalg::{Mat, Vector};
use inno_deepc::rng::{gaussian_matrix, stream_rng, Stream};
use proptest::prelude::*;

fn vector(rng: &mut impl rand::Rng, n: usize) -> Vector {
    Vector::from_column_slice(gaussian_matrix(rng, n, 1).as_slice())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn box_qp_matches_enumeration(seed in any::<u64>(), n in 1usize..=4) {
        let mut rng = stream_rng(seed, Stream::Probe);
        let (h, f, lo, hi) = common::random_box_qp(&mut rng, n);
        let z = solve_box_qp(&h, &f, Some(&lo), Some(&hi)).unwrap().z;
        let oracle = common::enumerate_box_qp(&h, &f, &lo, &hi);
        prop_assert!((&z - &oracle).amax() <= 1e-8 * (1.0 + oracle.amax()));
        prop_assert!(kkt_residual(&h, &f, Some(&lo), Some(&hi), &z) <= 1e-9);
    }

    #[test]
    fn decomposition_recovers_constructed_structure(seed in any::<u64>(), n in 1usize..=8) {
        let mut rng = stream_rng(seed, Stream::Probe);
        let (sys, pen) = common::random_system(&mut rng, n, 1, 1);
        let wf = weierstrass_decompose(&sys, DEFAULT_DECOMPOSITION_TOL).unwrap();
        prop_assert_eq!((wf.n_s, wf.n_f, wf.s), (pen.n_s, pen.n_f, pen.s));
        prop_assert!(wf.reassembly_error(&sys.e, &sys.a) <= 1e-8);
        prop_assert_eq!(determinant_degree(&sys.e, &sys.a, 1.0, DEFAULT_DECOMPOSITION_TOL), pen.n_s);
    }

    #[test]
    fn noise_free_simulation_is_linear(seed in any::<u64>(), n in 2usize..=6) {
        let mut rng = stream_rng(seed, Stream::Probe);
        let (sys, _) = common::random_system(&mut rng, n, 2, 2);
        let wf = weierstrass_decompose(&sys, DEFAULT_DECOMPOSITION_TOL).unwrap();
        let len = 30 + wf.s - 1;
        let (u1, u2) = (gaussian_matrix(&mut rng, 2, len), gaussian_matrix(&mut rng, 2, len));
        let (x1, x2) = (vector(&mut rng, wf.n_s), vector(&mut rng, wf.n_s));
        let y1 = simulate(&sys, &wf, &u1, None, &x1).unwrap().y;
        let y2 = simulate(&sys, &wf, &u2, None, &x2).unwrap().y;
        let y12 = simulate(&sys, &wf, &(&u1 * 2.0 - &u2), None, &(&x1 * 2.0 - &x2)).unwrap().y;
        let expected = &y1 * 2.0 - y2;
        prop_assert!((y12 - &expected).amax() <= 1e-9 * (1.0 + expected.amax()));
    }

    #[test]
    fn augmented_model_reproduces_descriptor_output(seed in any::<u64>(), n in 2usize..=6) {
        let mut rng = stream_rng(seed, Stream::Probe);
        let (sys, _) = common::random_system(&mut rng, n, 1, 2);
        let wf = weierstrass_decompose(&sys, DEFAULT_DECOMPOSITION_TOL).unwrap();
        let model = build_augmented(&wf, &sys.r_noise).unwrap();
        let len = 80;
        let u = gaussian_matrix(&mut rng, 1, len + wf.s - 1);
        let noise = sample_noise(&sys, &wf, len, seed);
        let x0 = vector(&mut rng, wf.n_s);
        let desc = simulate(&sys, &wf, &u, Some(&noise), &x0).unwrap().y;
        let aug = simulate_augmented(&model, &wf, &sys.d, &u, &noise, &x0).unwrap().y;
        prop_assert!((aug - &desc).amax() <= 1e-8 * (1.0 + desc.amax()));
    }

    #[test]
    fn hankel_has_expected_shape_and_entries(seed in any::<u64>(), d in 1usize..=3, depth in 1usize..=6) {
        let mut rng = stream_rng(seed, Stream::Probe);
        let w = gaussian_matrix(&mut rng, d, 25);
        let h = block_hankel(&w, depth).unwrap().data;
        prop_assert_eq!(h.shape(), (d * depth, 26 - depth));
        for j in [0, 25 - depth] {
            for i in 0..depth {
                prop_assert_eq!(h.view((i * d, j), (d, 1)).into_owned(), w.column(i + j).into_owned());
            }
        }
    }
}

#[test]
fn white_noise_is_persistently_exciting() {
    let mut rng = stream_rng(9, Stream::Probe);
    let u = gaussian_matrix(&mut rng, 1, 200);
    assert!(is_persistently_exciting(&u, 10, RankTol::Default).exciting);
    assert!(!is_persistently_exciting(&Mat::from_element(1, 200, 1.0), 2, RankTol::Default).exciting);
}

#[test]
fn stepper_matches_batch_simulation() {
    let mut rng = stream_rng(17, Stream::Probe);
    let (sys, _) = common::random_system(&mut rng, 5, 2, 2);
    let wf = weierstrass_decompose(&sys, DEFAULT_DECOMPOSITION_TOL).unwrap();
    let len = 40;
    let u = gaussian_matrix(&mut rng, 2, len + wf.s - 1);
    let noise = sample_noise(&sys, &wf, len, 3);
    let x0 = vector(&mut rng, wf.n_s);
    let batch = simulate(&sys, &wf, &u, Some(&noise), &x0).unwrap().y;
    let mut stepper = PlantStepper::new(&sys, &wf, Some(noise), &x0).unwrap();
    for k in 0..len {
        let y = stepper.emit(&u.columns(k, wf.s).into_owned()).unwrap();
        assert!((y - batch.column(k)).amax() < 1e-12);
    }
}
