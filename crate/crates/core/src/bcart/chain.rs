use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::likelihood::TreeLikelihood;
use super::moves::{draw_rule, propose_move, MoveKind};
use super::prior::log_prior;
use super::{McmcConfig, PosteriorEnsemble};
use crate::data::Dataset;
use crate::seed::{derive_seed, rng_from_seed, Rng as ChainRng, Stream};
use crate::tree::DecisionTree;

/// One state of a chain. Consecutive samples of a chain that rejected its
/// proposals share the same tree allocation.
#[derive(Debug, Clone)]
pub struct ChainSample {
    pub tree: Arc<DecisionTree>,
    pub restart_index: usize,
    pub step_index: usize,
    pub log_likelihood: f64,
    pub log_prior: f64,
}

impl ChainSample {
    pub fn log_posterior(&self) -> f64 {
        self.log_likelihood + self.log_prior
    }
}

/// Proposed / accepted counts per move kind, indexed by [`MoveKind::index`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveStats {
    pub proposed: [u64; 4],
    pub accepted: [u64; 4],
}

impl MoveStats {
    pub fn record(&mut self, kind: MoveKind, accepted: bool) {
        self.proposed[kind.index()] += 1;
        if accepted {
            self.accepted[kind.index()] += 1;
        }
    }

    pub fn merge(&mut self, other: &MoveStats) {
        for i in 0..4 {
            self.proposed[i] += other.proposed[i];
            self.accepted[i] += other.accepted[i];
        }
    }

    pub fn acceptance_rate(&self, kind: MoveKind) -> f64 {
        let p = self.proposed[kind.index()];
        if p == 0 {
            0.0
        } else {
            self.accepted[kind.index()] as f64 / p as f64
        }
    }

    pub fn total_acceptance_rate(&self) -> f64 {
        let p: u64 = self.proposed.iter().sum();
        if p == 0 {
            0.0
        } else {
            self.accepted.iter().sum::<u64>() as f64 / p as f64
        }
    }
}

/// Samples retained by one chain plus its move statistics.
#[derive(Debug, Clone)]
pub struct ChainRun {
    pub samples: Vec<ChainSample>,
    pub stats: MoveStats,
}

/// Metropolis–Hastings sampler over trees for one training set.
pub struct Sampler<'a, L> {
    data: &'a Dataset,
    config: &'a McmcConfig,
    likelihood: L,
}

impl<'a, L: TreeLikelihood> Sampler<'a, L> {
    pub fn new(data: &'a Dataset, config: &'a McmcConfig, likelihood: L) -> Self {
        Self {
            data,
            config,
            likelihood,
        }
    }

    /// Wraps `tree` (counts refreshed) as a chain state.
    pub fn state(&self, mut tree: DecisionTree, restart_index: usize, step_index: usize) -> ChainSample {
        tree.refresh_counts(self.data);
        self.state_from_fresh(tree, restart_index, step_index)
    }

    fn state_from_fresh(&self, tree: DecisionTree, restart_index: usize, step_index: usize) -> ChainSample {
        let log_prior = log_prior(&tree, self.config.max_leaves, self.data);
        let log_likelihood = if log_prior.is_finite() {
            self.likelihood.log_likelihood(&tree)
        } else {
            f64::NEG_INFINITY
        };
        ChainSample {
            tree: Arc::new(tree),
            restart_index,
            step_index,
            log_likelihood,
            log_prior,
        }
    }

    /// Random starting tree: a birth at the root, then further random splits
    /// of uniformly chosen leaves until a leaf count drawn uniformly from
    /// `2..=K_max` is reached (or no leaf can be split).
    pub fn initial_tree<R: Rng + ?Sized>(&self, rng: &mut R) -> DecisionTree {
        let mut tree = DecisionTree::single_leaf(vec![0; self.data.num_classes()]);
        let target = if self.config.max_leaves >= 2 {
            rng.random_range(2..=self.config.max_leaves)
        } else {
            1
        };
        while tree.tree_size() < target {
            let routes = tree.route(self.data);
            let mut leaves = tree.leaves();
            let mut grown = false;
            while !leaves.is_empty() {
                let leaf = leaves.swap_remove(rng.random_range(0..leaves.len()));
                if let Some((rule, _)) = draw_rule(self.data, &routes[leaf], rng) {
                    tree.split_leaf(leaf, rule);
                    grown = true;
                    break;
                }
            }
            if !grown {
                break;
            }
        }
        tree.refresh_counts(self.data);
        tree
    }

    /// One Metropolis–Hastings transition. Infeasible proposals count as
    /// rejections.
    pub fn step<R: Rng + ?Sized>(
        &self,
        current: &ChainSample,
        step_index: usize,
        rng: &mut R,
    ) -> (ChainSample, MoveKind, bool) {
        let proposal = propose_move(&current.tree, self.data, &self.config.move_probs, rng);
        let kind = proposal.kind;
        let u: f64 = rng.random();
        let mut next = ChainSample {
            step_index,
            ..current.clone()
        };
        let Some(tree) = proposal.tree else {
            return (next, kind, false);
        };
        let candidate = self.state_from_fresh(tree, current.restart_index, step_index);
        let log_alpha = (candidate.log_likelihood - current.log_likelihood)
            + (candidate.log_prior - current.log_prior)
            + proposal.log_proposal_ratio;
        let accept = candidate.log_prior.is_finite() && u.ln() < log_alpha;
        if accept {
            next = candidate;
        }
        (next, kind, accept)
    }

    /// Burn-in of `B` steps (discarded), then `S` steps keeping every
    /// `thinning`-th state starting with the first.
    pub fn run_chain(&self, restart_index: usize, seed: u64) -> ChainRun {
        let mut rng: ChainRng = rng_from_seed(seed);
        let init = self.initial_tree(&mut rng);
        let mut state = self.state(init, restart_index, 0);
        let mut stats = MoveStats::default();
        let cfg = self.config;
        let mut samples = Vec::with_capacity(cfg.post_burn_in.div_ceil(cfg.thinning.max(1)));
        for step in 1..=cfg.burn_in + cfg.post_burn_in {
            let (next, kind, accepted) = self.step(&state, step, &mut rng);
            stats.record(kind, accepted);
            state = next;
            if step > cfg.burn_in && (step - cfg.burn_in - 1) % cfg.thinning.max(1) == 0 {
                samples.push(state.clone());
            }
        }
        ChainRun { samples, stats }
    }

    /// `R` independent chains seeded from the master seed, pooled in restart
    /// order.
    pub fn run_with_restarts(&self) -> PosteriorEnsemble {
        let runs: Vec<ChainRun> = (0..self.config.restarts)
            .into_par_iter()
            .map(|r| self.run_chain(r, restart_seed(self.config.seed, r)))
            .collect();
        PosteriorEnsemble::from_runs(runs, self.data.num_classes(), self.config.alpha)
    }
}

pub fn restart_seed(master: u64, restart_index: usize) -> u64 {
    derive_seed(master, Stream::Restart, restart_index as u64)
}
