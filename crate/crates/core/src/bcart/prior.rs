//! Tree prior.
//!
//! `p(T) = p(k) · p(shape | k) · Π_internal p(rule | node)` where
//!
//! * `k`, the leaf count, is uniform on `1..=K_max`;
//! * the shape is uniform over the `Catalan(k−1)` ordered binary trees with
//!   `k` leaves;
//! * each rule picks a feature uniformly among those that can split the rows
//!   reaching the node, then a threshold uniformly among the node's distinct
//!   observed values of that feature except the largest (so both children
//!   are non-empty when the rule is drawn).
//!
//! Trees with more than `K_max` leaves, an empty leaf, or a rule outside its
//! node's candidate set have zero prior mass.

use statrs::function::gamma::ln_gamma;

use crate::data::Dataset;
use crate::tree::{DecisionTree, Node};

/// `ln Catalan(n) = ln (2n)! − ln (n+1)! − ln n!`.
pub fn ln_catalan(n: usize) -> f64 {
    let n = n as f64;
    ln_gamma(2.0 * n + 1.0) - ln_gamma(n + 2.0) - ln_gamma(n + 1.0)
}

/// Whether `feature` takes at least two distinct values over `rows`.
fn varies(data: &Dataset, rows: &[usize], feature: usize) -> bool {
    match rows.split_first() {
        Some((&first, rest)) => {
            let v = data.value(first, feature);
            rest.iter().any(|&i| data.value(i, feature) != v)
        }
        None => false,
    }
}

/// Features able to split `rows`.
pub(crate) fn splittable_features(data: &Dataset, rows: &[usize]) -> Vec<usize> {
    (0..data.n_features())
        .filter(|&f| varies(data, rows, f))
        .collect()
}

pub(crate) fn count_splittable_features(data: &Dataset, rows: &[usize]) -> usize {
    (0..data.n_features())
        .filter(|&f| varies(data, rows, f))
        .count()
}

/// Distinct observed values of `feature` over `rows`, ascending, without the
/// largest one.
pub(crate) fn candidate_thresholds(data: &Dataset, rows: &[usize], feature: usize) -> Vec<f64> {
    let mut v: Vec<f64> = rows.iter().map(|&i| data.value(i, feature)).collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v.pop();
    v
}

/// `ln p(rule | rows)` under the uniform feature-then-threshold choice, or
/// `None` when the rule is not a candidate.
pub(crate) fn ln_rule_probability(
    data: &Dataset,
    rows: &[usize],
    feature: usize,
    threshold: f64,
) -> Option<f64> {
    let thresholds = candidate_thresholds(data, rows, feature);
    thresholds
        .binary_search_by(|v| v.total_cmp(&threshold))
        .ok()?;
    let m_eff = count_splittable_features(data, rows);
    Some(-(m_eff as f64).ln() - (thresholds.len() as f64).ln())
}

/// Log prior density of `tree` on `data`; `-∞` outside the support.
pub fn log_prior(tree: &DecisionTree, max_leaves: usize, data: &Dataset) -> f64 {
    let k = tree.tree_size();
    if k > max_leaves || max_leaves == 0 {
        return f64::NEG_INFINITY;
    }
    let routes = tree.route(data);
    let mut lp = -(max_leaves as f64).ln() - ln_catalan(k - 1);
    for (id, node) in tree.nodes().iter().enumerate() {
        let rows = &routes[id];
        match node {
            Node::Leaf { .. } if rows.is_empty() => return f64::NEG_INFINITY,
            Node::Leaf { .. } => {}
            Node::Split { rule, .. } => {
                match ln_rule_probability(data, rows, rule.feature, rule.threshold) {
                    Some(l) => lp += l,
                    None => return f64::NEG_INFINITY,
                }
            }
        }
    }
    lp
}
