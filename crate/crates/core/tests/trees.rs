use proptest::prelude::*;
use treeuq::ensemble::{train_ensemble, EnsembleConfig};
use treeuq::tree::{grow_randomized, Node};
use treeuq::{Dataset, DecisionTree, EnsembleMode};

fn random_data() -> impl Strategy<Value = Dataset> {
    (1usize..4, 2usize..4).prop_flat_map(|(m, c)| {
        prop::collection::vec((prop::collection::vec(-5i32..5, m), 0..c), 1..80).prop_map(move |pts| {
            let rows = pts.iter().map(|(x, _)| x.iter().map(|&v| v as f64 / 2.0).collect()).collect();
            let labels = pts.iter().map(|(_, y)| *y).collect();
            Dataset::new(rows, labels, c, (0..m).map(|i| format!("x{i}")).collect()).unwrap()
        })
    })
}

fn check_counts(tree: &DecisionTree, id: usize) -> Vec<usize> {
    match tree.node(id) {
        Node::Leaf { counts } => counts.clone(),
        Node::Split { left, right, .. } => {
            let l = check_counts(tree, *left);
            let r = check_counts(tree, *right);
            l.iter().zip(&r).map(|(a, b)| a + b).collect()
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn grown_trees_respect_min_leaf(data in random_data(), min_leaf in 1usize..6, seed: u64) {
        let tree = grow_randomized(&data, min_leaf, 20, seed);
        let total = check_counts(&tree, 0);
        prop_assert_eq!(total.iter().sum::<usize>(), data.len());
        prop_assert_eq!(total, data.class_counts(&(0..data.len()).collect::<Vec<_>>()));
        if tree.tree_size() > 1 {
            for leaf in tree.leaves() {
                prop_assert!(tree.leaf_counts(leaf).iter().sum::<usize>() >= min_leaf);
            }
        }
        // Stored counts agree with routing the training rows.
        let mut fresh = tree.clone();
        fresh.refresh_counts(&data);
        prop_assert_eq!(fresh, tree);
    }

    #[test]
    fn greedy_growth_ignores_seed(data in random_data(), a: u64, b: u64) {
        prop_assert_eq!(grow_randomized(&data, 2, 1, a), grow_randomized(&data, 2, 1, b));
    }

    #[test]
    fn text_format_round_trips(data in random_data(), seed: u64) {
        let tree = grow_randomized(&data, 1, 20, seed);
        let back: DecisionTree = tree.to_string().parse().unwrap();
        prop_assert_eq!(back, tree);
    }

    #[test]
    fn ensemble_posteriors_are_distributions(data in random_data(), seed: u64) {
        let ens = train_ensemble(&data, &EnsembleConfig { n_trees: 7, min_leaf: Some(2), top_k: 20, seed });
        for x in data.rows().take(10) {
            for mode in [EnsembleMode::Vote, EnsembleMode::Average] {
                let p = ens.posterior(x, mode);
                prop_assert!((p.probs().iter().sum::<f64>() - 1.0).abs() < 1e-9);
            }
        }
    }
}
