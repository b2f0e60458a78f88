mod common;

use common::{coalition_value, oracle_interaction, random_ensemble, random_rows};
use proptest::prelude::*;
use redispatch_core::explain::{
    base_value, brute_force_shap, dependence_data, feature_importance, interaction_values,
    tree_shap, tree_shap_row, ColorBy, ShapResult,
};
use redispatch_core::frame::{Column, FeatureMatrix, Unit};
use redispatch_core::model::{Branch, Ensemble, RegressionTree, Split, TreeNode};

fn matrix_from_rows(rows: &[Vec<f64>], n: usize) -> FeatureMatrix {
    named_matrix(rows, &(0..n).map(|j| format!("f{j}")).collect::<Vec<_>>())
}

fn named_matrix(rows: &[Vec<f64>], names: &[String]) -> FeatureMatrix {
    FeatureMatrix::from_unindexed(
        names
            .iter()
            .enumerate()
            .map(|(j, name)| Column::new(name.clone(), Unit::Mw, rows.iter().map(|r| r[j]).collect()))
            .collect(),
    )
    .unwrap()
}

fn stump(feature: usize, threshold: f64, lo: f64, hi: f64, c_lo: f64, c_hi: f64) -> RegressionTree {
    RegressionTree::new(vec![
        TreeNode {
            split: Some(Split { feature, threshold, left: 1, right: 2, default: Branch::Left }),
            leaf_value: 0.0,
            cover: c_lo + c_hi,
        },
        TreeNode::leaf(lo, c_lo),
        TreeNode::leaf(hi, c_hi),
    ])
}

#[test]
fn stump_example_matches_subset_enumeration() {
    let mut m = Ensemble::constant(vec!["x0".into(), "x1".into()], 0.0);
    m.trees.push(stump(0, 0.5, 0.0, 10.0, 50.0, 50.0));
    let x = [1.0, 0.0];
    // Oracle: two features, v(∅) = 5, v({x0}) = 10, v({x1}) = 5, v(both) = 10.
    let v = |mask| coalition_value(&m, &x, mask);
    assert_eq!((v(0), v(1), v(2), v(3)), (5.0, 10.0, 5.0, 10.0));
    let oracle = [0.5 * (v(1) - v(0)) + 0.5 * (v(3) - v(2)), 0.5 * (v(2) - v(0)) + 0.5 * (v(3) - v(1))];
    assert_eq!(oracle, [5.0, 0.0]);
    assert_eq!(base_value(&m).unwrap(), 5.0);
    assert_eq!(tree_shap_row(&m, &x).unwrap(), oracle.to_vec());
    assert_eq!(brute_force_shap(&m, &x).unwrap(), oracle.to_vec());
}

#[test]
fn depth3_random_trees_six_features() {
    for seed in 0..10 {
        let m = random_ensemble(seed, 6, 3, 5);
        for x in random_rows(seed, 20, 6) {
            let fast = tree_shap_row(&m, &x).unwrap();
            let slow = brute_force_shap(&m, &x).unwrap();
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).abs() <= 1e-9, "seed {seed}: {fast:?} vs {slow:?}");
            }
        }
    }
}

#[test]
fn brute_force_axioms_on_random_models() {
    for seed in 100..120 {
        let m = random_ensemble(seed, 5, 4, 4);
        let used = m.used_features();
        for x in random_rows(seed, 5, 5) {
            let phi = brute_force_shap(&m, &x).unwrap();
            let total: f64 = phi.iter().sum();
            assert!((total - (common::slow_predict(&m, &x) - base_value(&m).unwrap())).abs() < 1e-9);
            for (j, p) in phi.iter().enumerate() {
                if !used.contains(&j) {
                    assert_eq!(*p, 0.0);
                }
            }
        }
    }
}

#[test]
fn symmetric_features_get_equal_credit() {
    // f = 6·[x0 > .5] + 6·[x1 > .5] with identical covers.
    let mut m = Ensemble::constant(vec!["a".into(), "b".into(), "c".into()], 0.0);
    m.trees.push(stump(0, 0.5, 0.0, 6.0, 10.0, 30.0));
    m.trees.push(stump(1, 0.5, 0.0, 6.0, 10.0, 30.0));
    let phi = brute_force_shap(&m, &[0.9, 0.9, 0.1]).unwrap();
    assert_eq!(phi[0], phi[1]);
    assert_eq!(phi[2], 0.0);
}

#[test]
fn additive_model_has_no_interactions() {
    let mut m = Ensemble::constant(vec!["x1".into(), "x2".into(), "x3".into()], 1.0);
    m.trees.push(stump(0, 0.3, -2.0, 4.0, 7.0, 13.0));
    m.trees.push(stump(1, 0.6, 1.0, -3.0, 11.0, 9.0));
    m.trees.push(stump(0, 0.8, 0.5, 2.5, 15.0, 5.0));
    let rows = random_rows(7, 30, 3);
    let ir = interaction_values(&m, &named_matrix(&rows, &m.feature_names)).unwrap();
    for s in 0..ir.n_samples() {
        for j in 0..3 {
            for k in 0..3 {
                if j != k {
                    assert!(ir.get(s, j, k).abs() <= 1e-9);
                }
            }
        }
    }
}

#[test]
fn xor_pair_interaction_matches_oracle() {
    // f = 10 if exactly one of x1, x2 exceeds 0.5.
    let node = |f, l, r, c| TreeNode {
        split: Some(Split { feature: f, threshold: 0.5, left: l, right: r, default: Branch::Left }),
        leaf_value: 0.0,
        cover: c,
    };
    let tree = RegressionTree::new(vec![
        node(0, 1, 4, 40.0),
        node(1, 2, 3, 20.0),
        TreeNode::leaf(0.0, 10.0),
        TreeNode::leaf(10.0, 10.0),
        node(1, 5, 6, 20.0),
        TreeNode::leaf(10.0, 10.0),
        TreeNode::leaf(0.0, 10.0),
    ]);
    let mut m = Ensemble::constant(vec!["x1".into(), "x2".into()], 0.0);
    m.trees.push(tree);
    let rows = vec![vec![0.9, 0.9], vec![0.1, 0.9], vec![0.1, 0.1]];
    let ir = interaction_values(&m, &named_matrix(&rows, &m.feature_names)).unwrap();
    for (s, x) in rows.iter().enumerate() {
        let expected = oracle_interaction(&m, x, 0, 1);
        assert!(expected.abs() > 1.0);
        assert!((ir.get(s, 0, 1) - expected).abs() < 1e-12);
        assert_eq!(ir.get(s, 0, 1), ir.get(s, 1, 0));
    }
}

#[test]
fn feature_importance_on_fitted_models() {
    let mut m = Ensemble::constant(vec!["only".into()], 0.0);
    m.trees.push(stump(0, 0.5, -1.0, 1.0, 5.0, 5.0));
    let rows = random_rows(3, 40, 1);
    let shap = tree_shap(&m, &named_matrix(&rows, &m.feature_names)).unwrap();
    assert_eq!(feature_importance(&shap).unwrap().values, vec![1.0]);
}

#[test]
fn monotone_model_gives_monotone_dependence() {
    let mut m = Ensemble::constant(vec!["f0".into()], 0.0);
    for (i, t) in [0.2, 0.4, 0.6, 0.8].iter().enumerate() {
        m.trees.push(stump(0, *t, 0.0, 1.0 + i as f64, 10.0, 10.0));
    }
    let rows: Vec<Vec<f64>> = (0..50).map(|i| vec![i as f64 / 49.0]).collect();
    let x = matrix_from_rows(&rows, 1);
    let shap = tree_shap(&m, &x).unwrap();
    let table = dependence_data(&shap, &x, "f0", ColorBy::None).unwrap();
    assert_eq!(table.rows.len(), 50);
    let mut pairs: Vec<(f64, f64)> = table.rows.iter().map(|r| (r.value, r.shap)).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    assert!(pairs.windows(2).all(|w| w[0].1 <= w[1].1));
    assert!(dependence_data(&shap, &x, "nope", ColorBy::None).is_err());
}

#[test]
fn auto_colour_picks_strongest_partner() {
    // f0 interacts with f2 (XOR-like), f1 is additive.
    let node = |f, l, r, c| TreeNode {
        split: Some(Split { feature: f, threshold: 0.5, left: l, right: r, default: Branch::Left }),
        leaf_value: 0.0,
        cover: c,
    };
    let mut m = Ensemble::constant(vec!["f0".into(), "f1".into(), "f2".into()], 0.0);
    m.trees.push(RegressionTree::new(vec![
        node(0, 1, 4, 40.0),
        node(2, 2, 3, 20.0),
        TreeNode::leaf(0.0, 10.0),
        TreeNode::leaf(10.0, 10.0),
        node(2, 5, 6, 20.0),
        TreeNode::leaf(10.0, 10.0),
        TreeNode::leaf(0.0, 10.0),
    ]));
    m.trees.push(stump(1, 0.5, 0.0, 3.0, 10.0, 10.0));
    let rows = random_rows(11, 60, 3).into_iter().map(|r| r.into_iter().map(|v| if v.is_nan() { 0.3 } else { v }).collect()).collect::<Vec<Vec<f64>>>();
    let x = matrix_from_rows(&rows, 3);
    let shap = tree_shap(&m, &x).unwrap();
    let ir = interaction_values(&m, &x).unwrap();
    let t = dependence_data(&shap, &x, "f0", ColorBy::Auto(&ir)).unwrap();
    assert_eq!(t.color_feature.as_deref(), Some("f2"));
    assert_eq!(t.rows[0].color, Some(rows[0][2]));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tree_shap_equals_brute_force(seed in any::<u64>(), n_features in 1usize..=15, depth in 1usize..=6) {
        let m = random_ensemble(seed, n_features, depth, 3);
        prop_assume!(m.trees.iter().all(|t| t.n_leaves() <= 64));
        for x in random_rows(seed, 3, n_features) {
            let fast = tree_shap_row(&m, &x).unwrap();
            let slow = brute_force_shap(&m, &x).unwrap();
            for (a, b) in fast.iter().zip(&slow) {
                prop_assert!((a - b).abs() <= 1e-9, "{} vs {}", a, b);
            }
        }
    }

    #[test]
    fn interactions_match_oracle_and_rows_sum_to_shap(seed in any::<u64>(), n_features in 2usize..=5) {
        let m = random_ensemble(seed, n_features, 3, 4);
        let rows = random_rows(seed, 4, n_features);
        let x = matrix_from_rows(&rows, n_features);
        let ir = interaction_values(&m, &x).unwrap();
        let shap = tree_shap(&m, &x).unwrap();
        for (s, row) in rows.iter().enumerate() {
            let sums = ir.row_sums(s);
            for j in 0..n_features {
                prop_assert!((sums[j] - shap.attributions[s][j]).abs() <= 1e-8);
                for k in 0..n_features {
                    prop_assert_eq!(ir.get(s, j, k), ir.get(s, k, j));
                    if j < k {
                        let expected = oracle_interaction(&m, row, j, k);
                        prop_assert!((ir.get(s, j, k) - expected).abs() <= 1e-9, "{} vs {}", ir.get(s, j, k), expected);
                    }
                }
            }
        }
    }

    #[test]
    fn importance_is_scale_free(seed in any::<u64>(), scale in 1e-3f64..1e3) {
        let m = random_ensemble(seed, 4, 3, 4);
        let x = matrix_from_rows(&random_rows(seed, 10, 4), 4);
        let shap = tree_shap(&m, &x).unwrap();
        let scaled = ShapResult {
            attributions: shap.attributions.iter().map(|r| r.iter().map(|v| v * scale).collect()).collect(),
            ..shap.clone()
        };
        let a = feature_importance(&shap).unwrap();
        let b = feature_importance(&scaled).unwrap();
        prop_assert_eq!(a.ranking(), b.ranking());
        for (u, v) in a.values.iter().zip(&b.values) {
            prop_assert!((u - v).abs() <= 1e-12);
        }
        if !a.degenerate {
            prop_assert_eq!(a.values.iter().copied().fold(0.0, f64::max), 1.0);
        }
    }
}
