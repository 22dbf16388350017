//! Ensembles of independently randomised trees.
//!
//! Each tree is grown on the full training set with [`grow_randomized`]; the
//! only source of diversity is the uniform choice among the top-k splits at
//! every node. Tree `i` uses the seed `derive_seed(config.seed, Tree, i)`, so
//! the ensemble does not depend on how the work is scheduled.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::posterior::ClassPosterior;
use crate::seed::{derive_seed, Stream};
use crate::tree::{grow_randomized, DecisionTree, DEFAULT_TOP_K};
use crate::EnsembleMode;

/// Training sets larger than this get the coarse pruning factor.
pub const LARGE_TRAIN_THRESHOLD: usize = 300;
pub const SMALL_MIN_LEAF: usize = 5;
pub const LARGE_MIN_LEAF: usize = 30;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnsembleConfig {
    pub n_trees: usize,
    /// Fewest training rows per leaf. `None` picks by training-set size.
    pub min_leaf: Option<usize>,
    pub top_k: usize,
    pub seed: u64,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            n_trees: 200,
            min_leaf: None,
            top_k: DEFAULT_TOP_K,
            seed: 0,
        }
    }
}

/// 30 when the training set has more than 300 rows, otherwise 5.
pub fn default_min_leaf(train_size: usize) -> usize {
    if train_size > LARGE_TRAIN_THRESHOLD {
        LARGE_MIN_LEAF
    } else {
        SMALL_MIN_LEAF
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomizedEnsemble {
    trees: Vec<DecisionTree>,
    min_leaf: usize,
    config: EnsembleConfig,
}

impl RandomizedEnsemble {
    /// Wraps pre-built trees, e.g. for tests of the combination rules.
    pub fn from_trees(trees: Vec<DecisionTree>) -> Self {
        assert!(!trees.is_empty(), "an ensemble needs at least one tree");
        let min_leaf = trees[0].min_leaf();
        Self {
            config: EnsembleConfig {
                n_trees: trees.len(),
                min_leaf: Some(min_leaf),
                ..EnsembleConfig::default()
            },
            trees,
            min_leaf,
        }
    }

    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }

    pub fn len(&self) -> usize {
        self.trees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trees.is_empty()
    }

    pub fn min_leaf(&self) -> usize {
        self.min_leaf
    }

    pub fn config(&self) -> &EnsembleConfig {
        &self.config
    }

    pub fn num_classes(&self) -> usize {
        self.trees[0].num_classes()
    }

    /// Ensemble keeping only the first `n` trees.
    pub fn truncated(&self, n: usize) -> Self {
        let mut e = self.clone();
        e.trees.truncate(n.max(1));
        e
    }

    pub fn posterior(&self, x: &[f64], mode: EnsembleMode) -> ClassPosterior {
        ensemble_posterior(self, x, mode)
    }

    /// Leaf counts (mean, sample std) over the member trees.
    pub fn size_stats(&self) -> (f64, f64) {
        mean_std(self.trees.iter().map(|t| t.tree_size() as f64))
    }
}

pub fn train_ensemble(train: &Dataset, config: &EnsembleConfig) -> RandomizedEnsemble {
    let min_leaf = config
        .min_leaf
        .unwrap_or_else(|| default_min_leaf(train.len()));
    let trees: Vec<DecisionTree> = (0..config.n_trees.max(1))
        .into_par_iter()
        .map(|i| {
            grow_randomized(
                train,
                min_leaf,
                config.top_k,
                derive_seed(config.seed, Stream::Tree, i as u64),
            )
        })
        .collect();
    RandomizedEnsemble {
        trees,
        min_leaf,
        config: config.clone(),
    }
}

/// Combines member outputs for `x`: vote shares of each tree's argmax class,
/// or the mean of the members' leaf posteriors.
pub fn ensemble_posterior(ens: &RandomizedEnsemble, x: &[f64], mode: EnsembleMode) -> ClassPosterior {
    let c = ens.num_classes();
    let n = ens.trees.len() as f64;
    match mode {
        EnsembleMode::Vote => {
            let mut votes = vec![0usize; c];
            for t in &ens.trees {
                votes[t.predict_class(x)] += 1;
            }
            ClassPosterior::from_normalised(votes.into_iter().map(|v| v as f64 / n).collect())
        }
        EnsembleMode::Average => {
            let mut acc = vec![0.0; c];
            for t in &ens.trees {
                for (a, p) in acc.iter_mut().zip(t.predict(x).probs()) {
                    *a += p;
                }
            }
            ClassPosterior::from_normalised(acc.into_iter().map(|a| a / n).collect())
        }
    }
}

/// Fraction of rows whose argmax prediction matches the label.
pub fn tree_accuracy(tree: &DecisionTree, data: &Dataset) -> f64 {
    let hits = data
        .rows()
        .zip(data.labels())
        .filter(|(x, &y)| tree.predict_class(x) == y)
        .count();
    hits as f64 / data.len() as f64
}

/// Member with the highest accuracy on `validation` (lowest index on ties).
pub fn best_single_tree(ens: &RandomizedEnsemble, validation: &Dataset) -> (usize, f64) {
    let accs: Vec<f64> = ens
        .trees
        .par_iter()
        .map(|t| tree_accuracy(t, validation))
        .collect();
    let best = crate::posterior::argmax(&accs);
    (best, accs[best])
}

/// Sample mean and (n−1) standard deviation; std is 0 for fewer than 2 values.
pub(crate) fn mean_std(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let v: Vec<f64> = values.collect();
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    if v.iter().all(|&x| x == v[0]) {
        return (v[0], 0.0);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
