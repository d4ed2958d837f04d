use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use prnn::bench::{mso, sample_function, FunctionKind};
use prnn::learning::{learn_full_transition, learn_output_weights};
use prnn::model::{nrmse, step, trajectory, PrnnModel, TimeSeries};
use prnn::reservoir::{init_reservoir, normalize_spectral_radius, spectral_radius};
use prnn::spectral::eigendecompose;

fn gaussian(seed: u64, rows: usize, cols: usize) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(&mut rng))
}

fn random_model(seed: u64, n: usize, d: usize) -> PrnnModel {
    let w = normalize_spectral_radius(&gaussian(seed, n, n)).unwrap();
    let x0 = gaussian(seed ^ 0xabc, n, 1).column(0).into_owned();
    PrnnModel::new(w, x0, d, 1.0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn trajectory_matches_repeated_steps(seed in 0u64..10_000, n in 2usize..12) {
        let model = random_model(seed, n, 1);
        let ts = trajectory(&model, 51).unwrap();
        let mut x = model.x0.clone();
        for k in 0..=50 {
            let scale = x.amax().max(1e-300);
            let diff = (0..model.d).map(|r| (ts.data()[(r, k)] - x[r]).abs()).fold(0.0, f64::max);
            prop_assert!(diff <= 1e-9 * scale.max(1.0), "k = {k}: {diff:e}");
            x = step(&model, &x).unwrap();
        }
    }

    #[test]
    fn output_bounded_by_spectral_envelope(seed in 0u64..10_000, n in 2usize..10) {
        // For a diagonalizable W, |f(t)| <= Σ|x_i|·|v_i| · ρᵗ.
        let model = random_model(seed, n, 1);
        let decomp = eigendecompose(&model.w, &model.x0).unwrap();
        prop_assume!(!decomp.near_defective);
        let c: f64 = (0..decomp.len()).map(|i| decomp.x[i].norm() * decomp.v[(0, i)].norm()).sum();
        let rho = decomp.spectral_radius();
        let ts = trajectory(&model, 101).unwrap();
        for t in 0..=100 {
            let bound = c * rho.powi(t as i32) * (1.0 + 1e-8) + 1e-12;
            prop_assert!(ts.data()[(0, t)].abs() <= bound, "t = {t}");
        }
    }

    #[test]
    fn nrmse_is_symmetric_and_zero_only_on_equality(seed in 0u64..10_000, len in 1usize..30) {
        let a = TimeSeries::new(gaussian(seed, 2, len), 1.0).unwrap();
        let b = TimeSeries::new(gaussian(seed + 1, 2, len), 1.0).unwrap();
        prop_assert_eq!(nrmse(&a, &b).unwrap(), nrmse(&b, &a).unwrap());
        prop_assert_eq!(nrmse(&a, &a).unwrap(), 0.0);
        prop_assert!(nrmse(&a, &b).unwrap() > 0.0);
    }

    #[test]
    fn normalization_is_idempotent(seed in 0u64..10_000, n in 1usize..25) {
        let once = normalize_spectral_radius(&gaussian(seed, n, n)).unwrap();
        let twice = normalize_spectral_radius(&once).unwrap();
        prop_assert!((&once - &twice).amax() <= 1e-12);
        prop_assert!((spectral_radius(&once).unwrap() - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn readout_learning_keeps_reservoir(seed in 0u64..10_000, n_res in 1usize..40) {
        let series = mso(2, 60).unwrap();
        let init = init_reservoir(1, n_res, seed).unwrap();
        let model = learn_output_weights(&series, &init).unwrap();
        prop_assert_eq!(model.w_in(), init.w_in.clone());
        prop_assert_eq!(model.w_res(), init.w_res.clone());
        prop_assert_eq!(model.x0.rows(1, n_res).into_owned(), init.r0.clone());
    }
}

#[test]
fn full_transition_replays_random_series() {
    // Ten-point series with n_res = n - d; the exact-replay rate drops for
    // longer series because roundoff is amplified by the learned spectrum.
    let n = 10;
    let mut exact = 0;
    for seed in 0..1000u64 {
        let values = gaussian(1_000_000 + seed, 1, n);
        let series = TimeSeries::new(values, 1.0).unwrap();
        let model = learn_full_transition(&series, n - 1, seed).unwrap();
        if nrmse(&series, &trajectory(&model, n).unwrap()).unwrap() <= 1e-8 {
            exact += 1;
        }
    }
    assert!(exact >= 990, "{exact}/1000 exact replays");
}

#[test]
fn replay_stays_bounded_on_mso8() {
    let series = mso(8, 300).unwrap();
    let max_train = series.data().amax();
    let mut peaks = Vec::new();
    for seed in 0..9u64 {
        let init = init_reservoir(1, 150, seed).unwrap();
        let model = learn_output_weights(&series, &init).unwrap();
        peaks.push(trajectory(&model, 300).unwrap().data().amax());
    }
    peaks.sort_by(f64::total_cmp);
    assert!(peaks[4] <= 10.0 * max_train, "median peak {}", peaks[4]);
}

#[test]
fn learned_sinusoid_generalizes_a_little() {
    let series = sample_function(&FunctionKind::SinusoidPi, 0.01, 101).unwrap();
    let init = init_reservoir(1, 30, 5).unwrap();
    let model = learn_output_weights(&series, &init).unwrap();
    let replay = trajectory(&model, 101).unwrap();
    assert!(nrmse(&series, &replay).unwrap() < 1e-3);
    let x: DVector<f64> = model.x0.clone();
    assert_eq!(x[0], 0.0);
}
