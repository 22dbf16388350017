use statrs::function::gamma::ln_gamma;

use crate::data::Dataset;
use crate::tree::{DecisionTree, Node};

/// Log-likelihood of the training data given a tree whose leaf counts are
/// current.
pub trait TreeLikelihood: Sync {
    fn log_likelihood(&self, tree: &DecisionTree) -> f64;
}

/// Class labels in each leaf are multinomial with a symmetric Dirichlet(α)
/// prior on the leaf's class probabilities, integrated out.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirichletMultinomial {
    pub alpha: f64,
}

impl TreeLikelihood for DirichletMultinomial {
    fn log_likelihood(&self, tree: &DecisionTree) -> f64 {
        tree.nodes()
            .iter()
            .map(|n| match n {
                Node::Leaf { counts } => leaf_log_marginal(counts, self.alpha),
                Node::Split { .. } => 0.0,
            })
            .sum()
    }
}

/// Flat likelihood; the sampler then targets the tree prior alone.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ConstantLikelihood;

impl TreeLikelihood for ConstantLikelihood {
    fn log_likelihood(&self, _tree: &DecisionTree) -> f64 {
        0.0
    }
}

/// `log Γ(Cα) − log Γ(n + Cα) + Σ_c [log Γ(n_c + α) − log Γ(α)]`; zero for
/// an empty leaf.
pub fn leaf_log_marginal(counts: &[usize], alpha: f64) -> f64 {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let c_alpha = counts.len() as f64 * alpha;
    let lg_alpha = ln_gamma(alpha);
    ln_gamma(c_alpha) - ln_gamma(n as f64 + c_alpha)
        + counts
            .iter()
            .map(|&c| ln_gamma(c as f64 + alpha) - lg_alpha)
            .sum::<f64>()
}

/// Dirichlet-multinomial marginal likelihood of `data` under the partition
/// induced by `tree` (leaf counts are recomputed from `data`).
pub fn log_marginal_likelihood(tree: &DecisionTree, data: &Dataset, alpha: f64) -> f64 {
    let mut t = tree.clone();
    t.refresh_counts(data);
    DirichletMultinomial { alpha }.log_likelihood(&t)
}
