//! Bayesian CART sampled by reversible-jump MCMC with restarts.
//!
//! The target is `p(T | D) ∝ p(D | T) p(T)` with the Dirichlet-multinomial
//! leaf likelihood of [`likelihood`] and the tree prior of [`prior`]. Many
//! short chains are started from random trees and all their post-burn-in
//! states are pooled with equal weight; predictions average over the pool.

mod chain;
pub mod likelihood;
pub mod moves;
pub mod prior;

use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::posterior::ClassPosterior;
use crate::tree::{dirichlet_mean, DecisionTree};
use crate::EnsembleMode;

pub use chain::{restart_seed, ChainRun, ChainSample, MoveStats, Sampler};
pub use likelihood::{
    leaf_log_marginal, log_marginal_likelihood, ConstantLikelihood, DirichletMultinomial,
    TreeLikelihood,
};
pub use moves::{apply_move, propose_move, MoveKind, MoveProbs, Proposal};
pub use prior::log_prior;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McmcConfig {
    pub restarts: usize,
    pub burn_in: usize,
    pub post_burn_in: usize,
    pub move_probs: MoveProbs,
    pub max_leaves: usize,
    pub thinning: usize,
    pub alpha: f64,
    pub seed: u64,
}

impl Default for McmcConfig {
    fn default() -> Self {
        Self {
            restarts: 50,
            burn_in: 2000,
            post_burn_in: 2000,
            move_probs: MoveProbs::default(),
            max_leaves: 50,
            thinning: 1,
            alpha: 1.0,
            seed: 0,
        }
    }
}

impl McmcConfig {
    pub fn validate(&self) -> Result<()> {
        self.move_probs.validate()?;
        if self.restarts == 0 || self.burn_in == 0 || self.post_burn_in == 0 {
            return Err(Error::Config(
                "restarts, burn_in and post_burn_in must be at least 1".into(),
            ));
        }
        if self.max_leaves == 0 || self.thinning == 0 {
            return Err(Error::Config("max_leaves and thinning must be at least 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::Config(format!("alpha must be positive, got {}", self.alpha)));
        }
        Ok(())
    }

    /// Retained samples per chain, `⌈S / thinning⌉`.
    pub fn samples_per_chain(&self) -> usize {
        self.post_burn_in.div_ceil(self.thinning)
    }
}

/// Pooled post-burn-in samples of all restarts.
#[derive(Debug, Clone)]
pub struct PosteriorEnsemble {
    samples: Vec<ChainSample>,
    /// Runs of consecutive samples sharing one tree: (tree, multiplicity).
    distinct: Vec<(Arc<DecisionTree>, usize)>,
    stats: MoveStats,
    num_classes: usize,
    alpha: f64,
}

impl PosteriorEnsemble {
    pub fn from_runs(runs: Vec<ChainRun>, num_classes: usize, alpha: f64) -> Self {
        let mut stats = MoveStats::default();
        let mut samples = Vec::new();
        for run in runs {
            stats.merge(&run.stats);
            samples.extend(run.samples);
        }
        Self::new(samples, stats, num_classes, alpha)
    }

    pub fn from_samples(samples: Vec<ChainSample>, num_classes: usize, alpha: f64) -> Self {
        Self::new(samples, MoveStats::default(), num_classes, alpha)
    }

    fn new(samples: Vec<ChainSample>, stats: MoveStats, num_classes: usize, alpha: f64) -> Self {
        let mut distinct: Vec<(Arc<DecisionTree>, usize)> = Vec::new();
        for s in &samples {
            match distinct.last_mut() {
                Some((t, n)) if Arc::ptr_eq(t, &s.tree) => *n += 1,
                _ => distinct.push((Arc::clone(&s.tree), 1)),
            }
        }
        Self {
            samples,
            distinct,
            stats,
            num_classes,
            alpha,
        }
    }

    pub fn samples(&self) -> &[ChainSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn stats(&self) -> &MoveStats {
        &self.stats
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    /// Writes one tab-separated line per retained sample: restart, step,
    /// leaf count, log posterior.
    pub fn write_trace<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "restart\tstep\tleaves\tlog_posterior")?;
        for s in &self.samples {
            writeln!(
                out,
                "{}\t{}\t{}\t{:.6}",
                s.restart_index,
                s.step_index,
                s.tree.tree_size(),
                s.log_posterior()
            )?;
        }
        Ok(())
    }
}

/// Runs one chain with the Dirichlet-multinomial likelihood.
pub fn run_chain(data: &Dataset, config: &McmcConfig, restart_index: usize, seed: u64) -> Vec<ChainSample> {
    Sampler::new(data, config, DirichletMultinomial { alpha: config.alpha })
        .run_chain(restart_index, seed)
        .samples
}

/// Runs `config.restarts` chains with the Dirichlet-multinomial likelihood
/// and pools their samples.
pub fn run_with_restarts(data: &Dataset, config: &McmcConfig) -> Result<PosteriorEnsemble> {
    config.validate()?;
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(Sampler::new(data, config, DirichletMultinomial { alpha: config.alpha }).run_with_restarts())
}

/// Equal-weight predictive over the pooled samples: mean leaf Dirichlet
/// posterior (`Average`) or share of samples voting for each class (`Vote`).
pub fn bayes_predictive(ens: &PosteriorEnsemble, x: &[f64], mode: EnsembleMode, alpha: f64) -> ClassPosterior {
    let c = ens.num_classes;
    let n = ens.samples.len() as f64;
    let mut acc = vec![0.0; c];
    match mode {
        EnsembleMode::Vote => {
            let mut votes = vec![0usize; c];
            for (tree, w) in &ens.distinct {
                votes[tree.predict_class(x)] += w;
            }
            for (a, v) in acc.iter_mut().zip(votes) {
                *a = v as f64 / n;
            }
        }
        EnsembleMode::Average => {
            for (tree, w) in &ens.distinct {
                let p = dirichlet_mean(tree.leaf_counts(tree.leaf_index(x)), alpha);
                for (a, q) in acc.iter_mut().zip(p.probs()) {
                    *a += *w as f64 * q;
                }
            }
            for a in &mut acc {
                *a /= n;
            }
        }
    }
    ClassPosterior::from_normalised(acc)
}

/// Predictive posteriors for every row of `data`.
pub fn predict_dataset(ens: &PosteriorEnsemble, data: &Dataset, mode: EnsembleMode) -> Vec<ClassPosterior> {
    (0..data.len())
        .into_par_iter()
        .map(|i| bayes_predictive(ens, data.row(i), mode, ens.alpha))
        .collect()
}

/// Mean and sample standard deviation of the leaf counts of the samples.
pub fn ensemble_mean_size(ens: &PosteriorEnsemble) -> (f64, f64) {
    crate::ensemble::mean_std(ens.samples.iter().map(|s| s.tree.tree_size() as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{make_paper_mixture, sample_mixture};
    use crate::tree::{Node, SplitRule};

    fn sample_of(tree: DecisionTree) -> ChainSample {
        ChainSample {
            tree: Arc::new(tree),
            restart_index: 0,
            step_index: 0,
            log_likelihood: 0.0,
            log_prior: 0.0,
        }
    }

    fn desk() -> McmcConfig {
        McmcConfig {
            restarts: 3,
            burn_in: 100,
            post_burn_in: 100,
            seed: 17,
            ..Default::default()
        }
    }

    #[test]
    fn config_validation() {
        assert!(McmcConfig::default().validate().is_ok());
        assert!(McmcConfig { thinning: 0, ..Default::default() }.validate().is_err());
        assert!(McmcConfig { alpha: 0.0, ..Default::default() }.validate().is_err());
        assert!(McmcConfig { restarts: 0, ..Default::default() }.validate().is_err());
        assert_eq!(McmcConfig { thinning: 10, ..Default::default() }.samples_per_chain(), 200);
        assert_eq!(McmcConfig { thinning: 3, post_burn_in: 10, ..Default::default() }.samples_per_chain(), 4);
    }

    #[test]
    fn single_sample_predictive_is_leaf_posterior() {
        let t = DecisionTree::single_leaf(vec![3, 1]);
        let ens = PosteriorEnsemble::from_samples(vec![sample_of(t.clone())], 2, 1.0);
        let p = bayes_predictive(&ens, &[0.0], EnsembleMode::Average, 1.0);
        assert_eq!(p, t.predict(&[0.0]));
    }

    #[test]
    fn opposite_samples_average_to_half() {
        let ens = PosteriorEnsemble::from_samples(
            vec![
                sample_of(DecisionTree::single_leaf(vec![6, 0])),
                sample_of(DecisionTree::single_leaf(vec![0, 6])),
            ],
            2,
            1.0,
        );
        let p = bayes_predictive(&ens, &[0.0], EnsembleMode::Average, 1.0);
        assert_eq!(p.probs(), &[0.5, 0.5]);
        let v = bayes_predictive(&ens, &[0.0], EnsembleMode::Vote, 1.0);
        assert_eq!(v.probs(), &[0.5, 0.5]);
    }

    #[test]
    fn identical_samples_vote_one_hot() {
        let t = DecisionTree::from_nodes(
            vec![
                Node::Split { rule: SplitRule::new(0, 0.0), left: 1, right: 2 },
                Node::Leaf { counts: vec![2, 5] },
                Node::Leaf { counts: vec![5, 2] },
            ],
            2,
            1,
        )
        .unwrap();
        let shared = sample_of(t);
        let ens = PosteriorEnsemble::from_samples(vec![shared.clone(); 7], 2, 1.0);
        assert_eq!(bayes_predictive(&ens, &[-1.0], EnsembleMode::Vote, 1.0).probs(), &[0.0, 1.0]);
        assert_eq!(bayes_predictive(&ens, &[1.0], EnsembleMode::Vote, 1.0).probs(), &[1.0, 0.0]);
    }

    #[test]
    fn mean_size_examples() {
        let leaves = |k: usize| {
            let mut t = DecisionTree::single_leaf(vec![0, 0]);
            while t.tree_size() < k {
                t.split_leaf(t.leaves()[0], SplitRule::new(0, 0.0));
            }
            sample_of(t)
        };
        let ens = PosteriorEnsemble::from_samples(vec![leaves(5); 3], 2, 1.0);
        assert_eq!(ensemble_mean_size(&ens), (5.0, 0.0));
        let ens = PosteriorEnsemble::from_samples(vec![leaves(4), leaves(6)], 2, 1.0);
        let (m, s) = ensemble_mean_size(&ens);
        assert_eq!(m, 5.0);
        assert!((s - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn chain_lengths_and_determinism() {
        let d = sample_mixture(&make_paper_mixture(), 80, 3).unwrap();
        let cfg = McmcConfig { thinning: 10, ..desk() };
        let a = run_chain(&d, &cfg, 0, 99);
        assert_eq!(a.len(), 10);
        assert_eq!(a[0].step_index, 101);
        let b = run_chain(&d, &cfg, 0, 99);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(*x.tree, *y.tree);
            assert_eq!(x.log_posterior(), y.log_posterior());
        }
        assert!(a.iter().all(|s| s.log_prior.is_finite()));
    }

    #[test]
    fn restarts_pool_in_order() {
        let d = sample_mixture(&make_paper_mixture(), 60, 4).unwrap();
        let cfg = desk();
        let ens = run_with_restarts(&d, &cfg).unwrap();
        assert_eq!(ens.len(), 300);
        let order: Vec<usize> = ens.samples().iter().map(|s| s.restart_index).collect();
        assert!(order.windows(2).all(|w| w[0] <= w[1]));

        let one = McmcConfig { restarts: 1, ..cfg.clone() };
        let pooled = run_with_restarts(&d, &one).unwrap();
        let direct = run_chain(&d, &one, 0, restart_seed(one.seed, 0));
        assert_eq!(pooled.len(), direct.len());
        for (a, b) in pooled.samples().iter().zip(&direct) {
            assert_eq!(*a.tree, *b.tree);
        }
    }

    #[test]
    fn trace_has_one_line_per_sample() {
        let d = sample_mixture(&make_paper_mixture(), 40, 4).unwrap();
        let ens = run_with_restarts(&d, &McmcConfig { restarts: 2, burn_in: 5, post_burn_in: 7, ..desk() }).unwrap();
        let mut buf = Vec::new();
        ens.write_trace(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + 14);
        assert!(text.lines().nth(1).unwrap().starts_with("0\t6\t"));
    }
}
