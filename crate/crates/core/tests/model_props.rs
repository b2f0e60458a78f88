mod common;

use common::slow_predict;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use redispatch_core::frame::{Column, FeatureMatrix, Unit};
use redispatch_core::model::{fit, Ensemble, Hyperparameters};

fn linear_data(seed: u64, n: usize) -> (FeatureMatrix, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 0.1).unwrap();
    let x1: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..10.0)).collect();
    let x2: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let y = x1.iter().map(|v| 2.0 * v + noise.sample(&mut rng)).collect();
    let m = FeatureMatrix::from_unindexed(vec![
        Column::new("x1", Unit::Mw, x1),
        Column::new("x2", Unit::Mw, x2),
    ])
    .unwrap();
    (m, y)
}

fn r2(y: &[f64], p: &[f64]) -> f64 {
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let ss_res: f64 = y.iter().zip(p).map(|(a, b)| (a - b).powi(2)).sum();
    1.0 - ss_res / ss_tot
}

fn mse(m: &Ensemble, x: &FeatureMatrix, y: &[f64]) -> f64 {
    let p = m.predict(x).unwrap();
    y.iter().zip(&p).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / y.len() as f64
}

#[test]
fn linear_target_recovered_on_holdout() {
    let (x, y) = linear_data(1, 5000);
    let train: Vec<usize> = (0..4000).collect();
    let test: Vec<usize> = (4000..5000).collect();
    let ytr: Vec<f64> = train.iter().map(|&i| y[i]).collect();
    let yte: Vec<f64> = test.iter().map(|&i| y[i]).collect();
    let m = fit(&x.take_rows(&train), &ytr, &Hyperparameters::default()).unwrap();
    let score = r2(&yte, &m.predict(&x.take_rows(&test)).unwrap());
    assert!(score >= 0.95, "held-out R² {score}");
}

#[test]
fn training_loss_never_increases() {
    let (x, y) = linear_data(2, 800);
    let hp = Hyperparameters { n_trees: 60, max_depth: 4, learning_rate: 0.3, ..Default::default() };
    let full = fit(&x, &y, &hp).unwrap();
    let mut prev = f64::INFINITY;
    for k in 0..=full.trees.len() {
        let partial = Ensemble { trees: full.trees[..k].to_vec(), ..full.clone() };
        let loss = mse(&partial, &x, &y);
        assert!(loss <= prev * (1.0 + 1e-12), "tree {k}: {loss} > {prev}");
        prev = loss;
    }
}

#[test]
fn identical_inputs_give_identical_json() {
    let (x, y) = linear_data(3, 600);
    let hp = Hyperparameters {
        n_trees: 20,
        subsample_rows: 0.7,
        subsample_features: 0.5,
        seed: 99,
        ..Default::default()
    };
    let a = fit(&x, &y, &hp).unwrap().to_json().unwrap();
    let b = fit(&x, &y, &hp).unwrap().to_json().unwrap();
    assert_eq!(a, b);
    let c = fit(&x, &y, &Hyperparameters { seed: 100, ..hp }).unwrap().to_json().unwrap();
    assert_ne!(a, c);
}

#[test]
fn json_round_trip_is_value_exact_for_trained_model() {
    let (x, y) = linear_data(4, 500);
    let m = fit(&x, &y, &Hyperparameters { n_trees: 25, ..Default::default() }).unwrap();
    let back = Ensemble::from_json(&m.to_json().unwrap()).unwrap();
    assert_eq!(back, m);
    assert_eq!(back.predict(&x).unwrap(), m.predict(&x).unwrap());
}

#[test]
fn predict_resolves_columns_by_name() {
    let (x, y) = linear_data(5, 300);
    let m = fit(&x, &y, &Hyperparameters { n_trees: 10, ..Default::default() }).unwrap();
    let swapped = x.select(&["x2".to_string(), "x1".to_string()]).unwrap();
    assert_eq!(m.predict(&swapped).unwrap(), m.predict(&x).unwrap());
    let missing = x.select(&["x2".to_string()]).unwrap();
    assert!(matches!(m.predict(&missing), Err(redispatch_core::Error::SchemaMismatch(_))));
}

fn random_training_set(seed: u64, n: usize, p: usize) -> (FeatureMatrix, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cols: Vec<Vec<f64>> = (0..p)
        .map(|_| {
            (0..n)
                .map(|_| if rng.random_bool(0.05) { f64::NAN } else { rng.random_range(-3.0..3.0) })
                .collect()
        })
        .collect();
    let y = (0..n)
        .map(|i| {
            let a = if cols[0][i].is_nan() { 1.0 } else { cols[0][i] };
            a * a + rng.random_range(-0.5..0.5)
        })
        .collect();
    let m = FeatureMatrix::from_unindexed(
        cols.into_iter()
            .enumerate()
            .map(|(j, v)| Column::new(format!("f{j}"), Unit::Mw, v))
            .collect(),
    )
    .unwrap();
    (m, y)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn fast_prediction_matches_naive_traversal(seed in any::<u64>(), p in 1usize..5, depth in 1usize..6) {
        let (x, y) = random_training_set(seed, 200, p);
        let hp = Hyperparameters {
            n_trees: 15,
            max_depth: depth,
            min_child_cover: 2.0,
            subsample_rows: 0.8,
            seed,
            ..Default::default()
        };
        let m = fit(&x, &y, &hp).unwrap();
        m.validate().unwrap();
        let fast = m.predict(&x).unwrap();
        for (i, f) in fast.iter().enumerate() {
            let slow = slow_predict(&m, &x.row(i));
            prop_assert!((f - slow).abs() <= 1e-9 * slow.abs().max(1.0));
        }
    }

    #[test]
    fn covers_add_up_exactly(seed in any::<u64>(), frac in 0.3f64..=1.0) {
        let (x, y) = random_training_set(seed, 150, 3);
        let hp = Hyperparameters { n_trees: 8, subsample_rows: frac, min_child_cover: 1.0, seed, ..Default::default() };
        let m = fit(&x, &y, &hp).unwrap();
        prop_assert!(m.trees.len() <= hp.n_trees);
        for t in &m.trees {
            for n in &t.nodes {
                if let Some(s) = &n.split {
                    prop_assert_eq!(n.cover, t.nodes[s.left].cover + t.nodes[s.right].cover);
                    prop_assert!(t.nodes[s.left].cover >= 1.0 && t.nodes[s.right].cover >= 1.0);
                }
            }
            prop_assert!(t.depth() <= hp.max_depth);
        }
    }
}
