use rand::Rng;

use super::split::{enumerate_splits, top_k_splits};
use super::{DecisionTree, Node};
use crate::data::Dataset;
use crate::seed::rng_from_seed;

/// Number of top-ranked candidates a randomised split is drawn from.
pub const DEFAULT_TOP_K: usize = 20;

/// Grows a tree top-down, choosing each split uniformly among the `k`
/// highest-gain candidates at the node.
///
/// A node becomes a leaf when it is pure, holds fewer than `2·min_leaf` rows,
/// or admits no split that keeps `min_leaf` rows on each side. With `k = 1`
/// this is greedy CART and the seed is irrelevant.
pub fn grow_randomized(data: &Dataset, min_leaf: usize, k: usize, seed: u64) -> DecisionTree {
    let min_leaf = min_leaf.max(1);
    let mut rng = rng_from_seed(seed);
    let mut tree = DecisionTree {
        nodes: Vec::new(),
        num_classes: data.num_classes(),
        min_leaf,
    };
    let all: Vec<usize> = (0..data.len()).collect();
    grow_node(&mut tree, data, all, min_leaf, k, &mut rng);
    tree
}

fn grow_node<R: Rng>(
    tree: &mut DecisionTree,
    data: &Dataset,
    indices: Vec<usize>,
    min_leaf: usize,
    k: usize,
    rng: &mut R,
) -> usize {
    let id = tree.nodes.len();
    let counts = data.class_counts(&indices);
    let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
    if pure || indices.len() < 2 * min_leaf {
        tree.nodes.push(Node::Leaf { counts });
        return id;
    }
    let top = top_k_splits(enumerate_splits(data, &indices, min_leaf), k);
    if top.is_empty() {
        tree.nodes.push(Node::Leaf { counts });
        return id;
    }
    let rule = top[rng.random_range(0..top.len())].rule;
    let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = indices
        .into_iter()
        .partition(|&i| rule.goes_left(data.row(i)));

    // Reserve the slot so the tree stays in preorder.
    tree.nodes.push(Node::Leaf { counts: Vec::new() });
    let left = grow_node(tree, data, left_idx, min_leaf, k, rng);
    let right = grow_node(tree, data, right_idx, min_leaf, k, rng);
    tree.nodes[id] = Node::Split { rule, left, right };
    id
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{make_paper_mixture, sample_mixture};

    fn line(n: usize) -> Dataset {
        let rows = (0..n).map(|i| vec![i as f64]).collect();
        let labels = (0..n).map(|i| usize::from(i % 3 == 0)).collect();
        Dataset::new(rows, labels, 2, vec!["x".into()]).unwrap()
    }

    #[test]
    fn too_small_to_split() {
        let t = grow_randomized(&line(8), 5, 20, 1);
        assert_eq!(t.tree_size(), 1);
        assert_eq!(t.leaf_counts(0).iter().sum::<usize>(), 8);
    }

    #[test]
    fn pure_data_is_one_leaf() {
        let rows = (0..30).map(|i| vec![i as f64]).collect();
        let d = Dataset::new(rows, vec![1; 30], 2, vec!["x".into()]).unwrap();
        assert_eq!(grow_randomized(&d, 1, 20, 3).tree_size(), 1);
    }

    #[test]
    fn deterministic_per_seed() {
        let d = sample_mixture(&make_paper_mixture(), 200, 5).unwrap();
        assert_eq!(grow_randomized(&d, 5, 20, 9), grow_randomized(&d, 5, 20, 9));
        assert_ne!(grow_randomized(&d, 5, 20, 9), grow_randomized(&d, 5, 20, 10));
    }

    #[test]
    fn greedy_ignores_seed() {
        let d = sample_mixture(&make_paper_mixture(), 200, 5).unwrap();
        assert_eq!(grow_randomized(&d, 5, 1, 1), grow_randomized(&d, 5, 1, 2));
    }

    #[test]
    fn leaves_respect_min_leaf_and_counts_add_up() {
        let d = sample_mixture(&make_paper_mixture(), 250, 2).unwrap();
        for seed in 0..10 {
            let t = grow_randomized(&d, 5, 20, seed);
            assert!(t.tree_size() > 1);
            for leaf in t.leaves() {
                assert!(t.leaf_counts(leaf).iter().sum::<usize>() >= 5);
            }
            assert_eq!(t.subtree_counts(0), d.class_counts(&(0..d.len()).collect::<Vec<_>>()));
            let mut refreshed = t.clone();
            refreshed.refresh_counts(&d);
            assert_eq!(refreshed, t);
        }
    }
}
