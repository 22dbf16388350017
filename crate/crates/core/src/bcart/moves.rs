//! Reversible-jump proposals over tree space.
//!
//! Birth and death form the dimension-changing pair; the two change moves
//! keep the structure and redraw a rule. Rules are always drawn from the
//! same feature-then-threshold distribution the prior uses, which keeps the
//! proposal ratios short.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::prior::{candidate_thresholds, ln_rule_probability, splittable_features};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::tree::{DecisionTree, SplitRule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MoveKind {
    Birth,
    Death,
    ChangeVariable,
    ChangeRule,
}

impl MoveKind {
    pub const ALL: [MoveKind; 4] = [
        MoveKind::Birth,
        MoveKind::Death,
        MoveKind::ChangeVariable,
        MoveKind::ChangeRule,
    ];

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Probabilities of proposing birth, death, change-variable and change-rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct MoveProbs {
    pub birth: f64,
    pub death: f64,
    pub change_variable: f64,
    pub change_rule: f64,
}

impl Default for MoveProbs {
    fn default() -> Self {
        Self {
            birth: 0.1,
            death: 0.1,
            change_variable: 0.1,
            change_rule: 0.7,
        }
    }
}

impl From<[f64; 4]> for MoveProbs {
    fn from(p: [f64; 4]) -> Self {
        Self {
            birth: p[0],
            death: p[1],
            change_variable: p[2],
            change_rule: p[3],
        }
    }
}

impl From<MoveProbs> for [f64; 4] {
    fn from(p: MoveProbs) -> Self {
        [p.birth, p.death, p.change_variable, p.change_rule]
    }
}

impl MoveProbs {
    pub fn get(&self, kind: MoveKind) -> f64 {
        <[f64; 4]>::from(*self)[kind.index()]
    }

    pub fn validate(&self) -> Result<()> {
        let p: [f64; 4] = (*self).into();
        if p.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::Config(format!("move probabilities {p:?} must be >= 0")));
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!("move probabilities sum to {total}")));
        }
        Ok(())
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> MoveKind {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for kind in MoveKind::ALL {
            acc += self.get(kind);
            if u < acc {
                return kind;
            }
        }
        // Rounding left u above the cumulative total; pick the last move
        // with positive probability.
        *MoveKind::ALL
            .iter()
            .rev()
            .find(|k| self.get(**k) > 0.0)
            .unwrap_or(&MoveKind::ChangeRule)
    }
}

/// A proposed tree with the log of `q(current | proposed) / q(proposed | current)`.
/// `tree` is `None` when the drawn move cannot be applied.
#[derive(Debug, Clone)]
pub struct Proposal {
    pub kind: MoveKind,
    pub tree: Option<DecisionTree>,
    pub log_proposal_ratio: f64,
}

impl Proposal {
    fn infeasible(kind: MoveKind) -> Self {
        Self {
            kind,
            tree: None,
            log_proposal_ratio: f64::NEG_INFINITY,
        }
    }

    pub fn is_feasible(&self) -> bool {
        self.tree.is_some()
    }
}

fn pick<T: Copy, R: Rng + ?Sized>(items: &[T], rng: &mut R) -> T {
    items[rng.random_range(0..items.len())]
}

/// Draws a move kind from `probs` and applies it to `tree`.
pub fn propose_move<R: Rng + ?Sized>(
    tree: &DecisionTree,
    data: &Dataset,
    probs: &MoveProbs,
    rng: &mut R,
) -> Proposal {
    let kind = probs.draw(rng);
    apply_move(kind, tree, data, probs, rng)
}

/// Applies a move of the given kind.
pub fn apply_move<R: Rng + ?Sized>(
    kind: MoveKind,
    tree: &DecisionTree,
    data: &Dataset,
    probs: &MoveProbs,
    rng: &mut R,
) -> Proposal {
    match kind {
        MoveKind::Birth => birth(tree, data, probs, rng),
        MoveKind::Death => death(tree, data, probs, rng),
        MoveKind::ChangeVariable => change_variable(tree, data, rng),
        MoveKind::ChangeRule => change_rule(tree, data, rng),
    }
}

/// Draws a rule for `rows` from the prior's rule distribution.
pub(crate) fn draw_rule<R: Rng + ?Sized>(
    data: &Dataset,
    rows: &[usize],
    rng: &mut R,
) -> Option<(SplitRule, f64)> {
    let features = splittable_features(data, rows);
    if features.is_empty() {
        return None;
    }
    let feature = pick(&features, rng);
    let thresholds = candidate_thresholds(data, rows, feature);
    let threshold = pick(&thresholds, rng);
    let ln_q = -(features.len() as f64).ln() - (thresholds.len() as f64).ln();
    Some((SplitRule::new(feature, threshold), ln_q))
}

fn birth<R: Rng + ?Sized>(
    tree: &DecisionTree,
    data: &Dataset,
    probs: &MoveProbs,
    rng: &mut R,
) -> Proposal {
    let leaves = tree.leaves();
    let leaf = pick(&leaves, rng);
    let routes = tree.route(data);
    let Some((rule, ln_rule)) = draw_rule(data, &routes[leaf], rng) else {
        return Proposal::infeasible(MoveKind::Birth);
    };
    let mut proposed = tree.clone();
    proposed.split_leaf(leaf, rule);
    proposed.refresh_counts(data);
    let prunable = proposed.prunable_nodes().len() as f64;
    let ln_forward = probs.birth.ln() - (leaves.len() as f64).ln() + ln_rule;
    let ln_reverse = probs.death.ln() - prunable.ln();
    Proposal {
        kind: MoveKind::Birth,
        tree: Some(proposed),
        log_proposal_ratio: ln_reverse - ln_forward,
    }
}

fn death<R: Rng + ?Sized>(
    tree: &DecisionTree,
    data: &Dataset,
    probs: &MoveProbs,
    rng: &mut R,
) -> Proposal {
    let prunable = tree.prunable_nodes();
    if prunable.is_empty() {
        return Proposal::infeasible(MoveKind::Death);
    }
    let node = pick(&prunable, rng);
    let rule = tree.rule(node).expect("prunable nodes are splits");
    let routes = tree.route(data);
    let Some(ln_rule) = ln_rule_probability(data, &routes[node], rule.feature, rule.threshold)
    else {
        return Proposal::infeasible(MoveKind::Death);
    };
    let mut proposed = tree.clone();
    proposed.collapse(node);
    proposed.refresh_counts(data);
    let ln_forward = probs.death.ln() - (prunable.len() as f64).ln();
    let ln_reverse = probs.birth.ln() - (proposed.tree_size() as f64).ln() + ln_rule;
    Proposal {
        kind: MoveKind::Death,
        tree: Some(proposed),
        log_proposal_ratio: ln_reverse - ln_forward,
    }
}

fn change_variable<R: Rng + ?Sized>(tree: &DecisionTree, data: &Dataset, rng: &mut R) -> Proposal {
    let internal = tree.internal_nodes();
    if internal.is_empty() {
        return Proposal::infeasible(MoveKind::ChangeVariable);
    }
    let node = pick(&internal, rng);
    let old = tree.rule(node).expect("internal node");
    let routes = tree.route(data);
    let rows = &routes[node];
    let n_old = candidate_thresholds(data, rows, old.feature).len();
    let Some((rule, _)) = draw_rule(data, rows, rng) else {
        return Proposal::infeasible(MoveKind::ChangeVariable);
    };
    if n_old == 0 {
        return Proposal::infeasible(MoveKind::ChangeVariable);
    }
    let n_new = candidate_thresholds(data, rows, rule.feature).len();
    let mut proposed = tree.clone();
    proposed.set_rule(node, rule);
    proposed.refresh_counts(data);
    Proposal {
        kind: MoveKind::ChangeVariable,
        tree: Some(proposed),
        log_proposal_ratio: (n_new as f64).ln() - (n_old as f64).ln(),
    }
}

fn change_rule<R: Rng + ?Sized>(tree: &DecisionTree, data: &Dataset, rng: &mut R) -> Proposal {
    let internal = tree.internal_nodes();
    if internal.is_empty() {
        return Proposal::infeasible(MoveKind::ChangeRule);
    }
    let node = pick(&internal, rng);
    let old = tree.rule(node).expect("internal node");
    let routes = tree.route(data);
    let thresholds = candidate_thresholds(data, &routes[node], old.feature);
    if thresholds.is_empty() {
        return Proposal::infeasible(MoveKind::ChangeRule);
    }
    let mut proposed = tree.clone();
    proposed.set_rule(node, SplitRule::new(old.feature, pick(&thresholds, rng)));
    proposed.refresh_counts(data);
    Proposal {
        kind: MoveKind::ChangeRule,
        tree: Some(proposed),
        log_proposal_ratio: 0.0,
    }
}
