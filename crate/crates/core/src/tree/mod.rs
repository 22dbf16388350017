//! Binary axis-aligned classification trees shared by both ensemble
//! techniques.
//!
//! Nodes live in a flat arena in preorder with the root at index 0. Internal
//! nodes carry a [`SplitRule`]; a row goes left when `x[feature] <= threshold`.
//! Terminal nodes carry the per-class counts of the training rows that reach
//! them.

mod grow;
mod split;
mod text;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::posterior::ClassPosterior;

pub use grow::{grow_randomized, DEFAULT_TOP_K};
pub use split::{
    entropy, enumerate_splits, information_gain, split_order, top_k_splits, ScoredSplit,
};

pub type NodeId = usize;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitRule {
    pub feature: usize,
    pub threshold: f64,
}

impl SplitRule {
    pub fn new(feature: usize, threshold: f64) -> Self {
        Self { feature, threshold }
    }

    #[inline]
    pub fn goes_left(&self, x: &[f64]) -> bool {
        x[self.feature] <= self.threshold
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Split {
        rule: SplitRule,
        left: NodeId,
        right: NodeId,
    },
    Leaf {
        counts: Vec<usize>,
    },
}

impl Node {
    pub fn is_leaf(&self) -> bool {
        matches!(self, Node::Leaf { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    nodes: Vec<Node>,
    num_classes: usize,
    min_leaf: usize,
}

/// Laplace-smoothed class posterior `(n_c + 1) / (n + C)`.
pub fn leaf_posterior(counts: &[usize]) -> ClassPosterior {
    dirichlet_mean(counts, 1.0)
}

/// Posterior mean `(n_c + α) / (n + Cα)` of a symmetric Dirichlet.
pub fn dirichlet_mean(counts: &[usize], alpha: f64) -> ClassPosterior {
    let n: usize = counts.iter().sum();
    let denom = n as f64 + counts.len() as f64 * alpha;
    ClassPosterior::from_normalised(
        counts
            .iter()
            .map(|&c| (c as f64 + alpha) / denom)
            .collect(),
    )
}

impl DecisionTree {
    /// A tree with a single terminal node.
    pub fn single_leaf(counts: Vec<usize>) -> Self {
        let num_classes = counts.len();
        Self {
            nodes: vec![Node::Leaf { counts }],
            num_classes,
            min_leaf: 1,
        }
    }

    /// Builds a tree from an explicit node list (root at index 0). Every
    /// non-root node must be referenced exactly once.
    pub fn from_nodes(nodes: Vec<Node>, num_classes: usize, min_leaf: usize) -> Result<Self> {
        let bad = |reason: String| Error::TreeFormat { line: 0, reason };
        if nodes.is_empty() {
            return Err(bad("no nodes".into()));
        }
        let mut referenced = vec![0usize; nodes.len()];
        for node in &nodes {
            match node {
                Node::Split { left, right, .. } => {
                    for &c in [left, right] {
                        if c == 0 || c >= nodes.len() {
                            return Err(bad(format!("child index {c} out of range")));
                        }
                        referenced[c] += 1;
                    }
                }
                Node::Leaf { counts } if counts.len() != num_classes => {
                    return Err(bad(format!(
                        "leaf has {} counts, expected {num_classes}",
                        counts.len()
                    )));
                }
                Node::Leaf { .. } => {}
            }
        }
        if referenced[1..].iter().any(|&r| r != 1) {
            return Err(bad("nodes must form a single binary tree".into()));
        }
        let mut tree = Self {
            nodes,
            num_classes,
            min_leaf,
        };
        tree.canonicalize();
        Ok(tree)
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn min_leaf(&self) -> usize {
        self.min_leaf
    }

    /// Terminal node reached by `x`.
    pub fn leaf_index(&self, x: &[f64]) -> NodeId {
        let mut id = 0;
        while let Node::Split { rule, left, right } = &self.nodes[id] {
            id = if rule.goes_left(x) { *left } else { *right };
        }
        id
    }

    pub fn leaf_counts(&self, id: NodeId) -> &[usize] {
        match &self.nodes[id] {
            Node::Leaf { counts } => counts,
            Node::Split { .. } => panic!("node {id} is not a leaf"),
        }
    }

    /// Class counts of all training rows below `id`.
    pub fn subtree_counts(&self, id: NodeId) -> Vec<usize> {
        match &self.nodes[id] {
            Node::Leaf { counts } => counts.clone(),
            Node::Split { left, right, .. } => {
                let mut c = self.subtree_counts(*left);
                for (a, b) in c.iter_mut().zip(self.subtree_counts(*right)) {
                    *a += b;
                }
                c
            }
        }
    }

    /// Laplace-smoothed posterior of the leaf reached by `x`.
    pub fn predict(&self, x: &[f64]) -> ClassPosterior {
        leaf_posterior(self.leaf_counts(self.leaf_index(x)))
    }

    pub fn predict_with_alpha(&self, x: &[f64], alpha: f64) -> ClassPosterior {
        dirichlet_mean(self.leaf_counts(self.leaf_index(x)), alpha)
    }

    /// Majority class of the reached leaf (ties to the lower index). Agrees
    /// with the argmax of any symmetric-Dirichlet smoothed posterior.
    pub fn predict_class(&self, x: &[f64]) -> usize {
        crate::posterior::argmax(self.leaf_counts(self.leaf_index(x)))
    }

    /// Number of terminal nodes.
    pub fn tree_size(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_leaf()).count()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn leaves(&self) -> Vec<NodeId> {
        (0..self.nodes.len())
            .filter(|&i| self.nodes[i].is_leaf())
            .collect()
    }

    pub fn internal_nodes(&self) -> Vec<NodeId> {
        (0..self.nodes.len())
            .filter(|&i| !self.nodes[i].is_leaf())
            .collect()
    }

    /// Internal nodes whose children are both leaves.
    pub fn prunable_nodes(&self) -> Vec<NodeId> {
        (0..self.nodes.len())
            .filter(|&i| match &self.nodes[i] {
                Node::Split { left, right, .. } => {
                    self.nodes[*left].is_leaf() && self.nodes[*right].is_leaf()
                }
                Node::Leaf { .. } => false,
            })
            .collect()
    }

    pub fn rule(&self, id: NodeId) -> Option<SplitRule> {
        match &self.nodes[id] {
            Node::Split { rule, .. } => Some(*rule),
            Node::Leaf { .. } => None,
        }
    }

    /// Row indices of `data` reaching each node.
    pub fn route(&self, data: &Dataset) -> Vec<Vec<usize>> {
        let mut at = vec![Vec::new(); self.nodes.len()];
        at[0] = (0..data.len()).collect();
        // Preorder guarantees parents precede children.
        for id in 0..self.nodes.len() {
            if let Node::Split { rule, left, right } = &self.nodes[id] {
                let rows = std::mem::take(&mut at[id]);
                let (l, r): (Vec<usize>, Vec<usize>) =
                    rows.iter().partition(|&&i| rule.goes_left(data.row(i)));
                at[*left] = l;
                at[*right] = r;
                at[id] = rows;
            }
        }
        at
    }

    /// Recomputes every leaf's class counts from `data`.
    pub fn refresh_counts(&mut self, data: &Dataset) {
        let c = self.num_classes;
        for node in &mut self.nodes {
            if let Node::Leaf { counts } = node {
                counts.clear();
                counts.resize(c, 0);
            }
        }
        for (x, &y) in data.rows().zip(data.labels()) {
            let leaf = self.leaf_index(x);
            if let Node::Leaf { counts } = &mut self.nodes[leaf] {
                counts[y] += 1;
            }
        }
    }

    /// Turns leaf `id` into a split with two fresh leaves. Counts are left
    /// stale; call [`refresh_counts`](Self::refresh_counts) afterwards.
    pub(crate) fn split_leaf(&mut self, id: NodeId, rule: SplitRule) {
        assert!(self.nodes[id].is_leaf());
        let left = self.nodes.len();
        self.nodes.push(Node::Leaf {
            counts: vec![0; self.num_classes],
        });
        self.nodes.push(Node::Leaf {
            counts: vec![0; self.num_classes],
        });
        self.nodes[id] = Node::Split {
            rule,
            left,
            right: left + 1,
        };
        self.canonicalize();
    }

    /// Replaces the subtree at `id` with a single leaf holding its counts.
    pub(crate) fn collapse(&mut self, id: NodeId) {
        let counts = self.subtree_counts(id);
        self.nodes[id] = Node::Leaf { counts };
        self.canonicalize();
    }

    pub(crate) fn set_rule(&mut self, id: NodeId, new_rule: SplitRule) {
        match &mut self.nodes[id] {
            Node::Split { rule, .. } => *rule = new_rule,
            Node::Leaf { .. } => panic!("node {id} is not a split"),
        }
    }

    /// Renumbers reachable nodes in preorder and drops unreachable ones, so
    /// structurally equal trees compare equal.
    fn canonicalize(&mut self) {
        let mut out = Vec::with_capacity(self.nodes.len());
        fn visit(src: &[Node], id: NodeId, out: &mut Vec<Node>) -> NodeId {
            let new_id = out.len();
            match &src[id] {
                Node::Leaf { counts } => out.push(Node::Leaf {
                    counts: counts.clone(),
                }),
                Node::Split { rule, left, right } => {
                    out.push(Node::Leaf { counts: Vec::new() });
                    let l = visit(src, *left, out);
                    let r = visit(src, *right, out);
                    out[new_id] = Node::Split {
                        rule: *rule,
                        left: l,
                        right: r,
                    };
                }
            }
            new_id
        }
        visit(&self.nodes, 0, &mut out);
        self.nodes = out;
    }
}
