//! Exact checks of the sampler on a state space small enough to enumerate.

use std::collections::HashMap;

use treeuq::bcart::{
    log_marginal_likelihood, log_prior, ConstantLikelihood, DirichletMultinomial, McmcConfig,
    MoveKind, Sampler, TreeLikelihood,
};
use treeuq::tree::Node;
use treeuq::{Dataset, DecisionTree, SplitRule};

#[derive(Clone, Debug)]
enum Shape {
    Leaf,
    Split(usize, f64, Box<Shape>, Box<Shape>),
}

impl Shape {
    fn leaves(&self) -> usize {
        match self {
            Shape::Leaf => 1,
            Shape::Split(_, _, l, r) => l.leaves() + r.leaves(),
        }
    }

    fn push_nodes(&self, nodes: &mut Vec<Node>, c: usize) -> usize {
        let id = nodes.len();
        match self {
            Shape::Leaf => nodes.push(Node::Leaf { counts: vec![0; c] }),
            Shape::Split(f, t, l, r) => {
                nodes.push(Node::Leaf { counts: vec![] });
                let left = l.push_nodes(nodes, c);
                let right = r.push_nodes(nodes, c);
                nodes[id] = Node::Split { rule: SplitRule::new(*f, *t), left, right };
            }
        }
        id
    }
}

fn distinct(data: &Dataset, rows: &[usize], f: usize) -> Vec<f64> {
    let mut v: Vec<f64> = rows.iter().map(|&i| data.value(i, f)).collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// Every tree with at most `budget` leaves whose rules are drawn from the
/// node's observed values (largest excluded), with its log rule probability.
fn enumerate(data: &Dataset, rows: &[usize], budget: usize) -> Vec<(Shape, f64)> {
    let mut out = vec![(Shape::Leaf, 0.0)];
    if budget < 2 {
        return out;
    }
    let feats: Vec<usize> = (0..data.n_features())
        .filter(|&f| distinct(data, rows, f).len() > 1)
        .collect();
    for &f in &feats {
        let values = distinct(data, rows, f);
        let thresholds = &values[..values.len() - 1];
        let ln_rule = -(feats.len() as f64).ln() - (thresholds.len() as f64).ln();
        for &t in thresholds {
            let left: Vec<usize> = rows.iter().copied().filter(|&i| data.value(i, f) <= t).collect();
            let right: Vec<usize> = rows.iter().copied().filter(|&i| data.value(i, f) > t).collect();
            for (l, lp) in enumerate(data, &left, budget - 1) {
                for (r, rp) in enumerate(data, &right, budget - l.leaves()) {
                    out.push((Shape::Split(f, t, Box::new(l.clone()), Box::new(r)), ln_rule + lp + rp));
                }
            }
        }
    }
    out
}

fn ln_fact(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

/// Dirichlet-multinomial evidence with α = 1: Π_leaves (C−1)! Π n_c! / (n+C−1)!.
fn ln_evidence(tree: &DecisionTree) -> f64 {
    tree.leaves()
        .iter()
        .map(|&id| {
            let counts = tree.leaf_counts(id);
            let c = counts.len();
            let n: usize = counts.iter().sum();
            ln_fact(c - 1) + counts.iter().map(|&k| ln_fact(k)).sum::<f64>() - ln_fact(n + c - 1)
        })
        .sum()
}

fn tiny() -> Dataset {
    let rows = vec![
        vec![0.0, 0.0],
        vec![1.0, 0.0],
        vec![1.0, 1.0],
        vec![2.0, 1.0],
        vec![2.0, 2.0],
        vec![3.0, 0.0],
    ];
    Dataset::new(rows, vec![0, 0, 1, 1, 0, 1], 2, vec!["a".into(), "b".into()]).unwrap()
}

const CATALAN: [f64; 4] = [1.0, 1.0, 2.0, 5.0];

/// Exact target over all trees keyed by their text form.
fn exact_target(data: &Dataset, k_max: usize, with_likelihood: bool) -> HashMap<String, f64> {
    let all: Vec<usize> = (0..data.len()).collect();
    let mut weights = HashMap::new();
    for (shape, ln_rules) in enumerate(data, &all, k_max) {
        let mut nodes = Vec::new();
        shape.push_nodes(&mut nodes, data.num_classes());
        let mut tree = DecisionTree::from_nodes(nodes, data.num_classes(), 1).unwrap();
        tree.refresh_counts(data);
        let k = tree.tree_size();
        let mut lw = -(k_max as f64).ln() - CATALAN[k - 1].ln() + ln_rules;
        // The library's prior must agree with the enumeration.
        assert!((log_prior(&tree, k_max, data) - lw).abs() < 1e-12);
        if with_likelihood {
            let ll = ln_evidence(&tree);
            assert!((log_marginal_likelihood(&tree, data, 1.0) - ll).abs() < 1e-10);
            lw += ll;
        }
        weights.insert(tree.to_string(), lw.exp());
    }
    let z: f64 = weights.values().sum();
    weights.values_mut().for_each(|w| *w /= z);
    weights
}

fn empirical<L: TreeLikelihood>(data: &Dataset, cfg: &McmcConfig, lik: L) -> HashMap<String, f64> {
    let run = Sampler::new(data, cfg, lik).run_chain(0, 2024);
    let n = run.samples.len() as f64;
    let mut freq = HashMap::new();
    for s in &run.samples {
        *freq.entry(s.tree.to_string()).or_insert(0.0) += 1.0 / n;
    }
    freq
}

fn compare(exact: &HashMap<String, f64>, freq: &HashMap<String, f64>) {
    for key in freq.keys() {
        assert!(exact.contains_key(key), "chain visited a tree outside the support:\n{key}");
    }
    let mut tv = 0.0;
    for (key, &p) in exact {
        let q = freq.get(key).copied().unwrap_or(0.0);
        assert!((p - q).abs() < 0.005, "p={p:.4} q={q:.4} for\n{key}");
        tv += (p - q).abs() / 2.0;
    }
    assert!(tv < 0.02, "total variation {tv}");
}

fn config(k_max: usize) -> McmcConfig {
    McmcConfig {
        restarts: 1,
        burn_in: 1_000,
        post_burn_in: 1_000_000,
        thinning: 10,
        max_leaves: k_max,
        ..Default::default()
    }
}

#[test]
fn constant_likelihood_chain_samples_the_prior() {
    let data = tiny();
    let exact = exact_target(&data, 4, false);
    assert_eq!(exact.len(), 85);
    compare(&exact, &empirical(&data, &config(4), ConstantLikelihood));
}

#[test]
fn chain_samples_the_exact_posterior() {
    let data = tiny();
    let exact = exact_target(&data, 4, true);
    compare(&exact, &empirical(&data, &config(4), DirichletMultinomial { alpha: 1.0 }));
}

#[test]
fn move_mix_matches_probabilities() {
    let data = tiny();
    let cfg = McmcConfig { post_burn_in: 100_000, burn_in: 1, ..config(3) };
    let run = Sampler::new(&data, &cfg, DirichletMultinomial { alpha: 1.0 }).run_chain(0, 5);
    let total: u64 = run.stats.proposed.iter().sum();
    assert_eq!(total, 100_001);
    for kind in MoveKind::ALL {
        let share = run.stats.proposed[kind.index()] as f64 / total as f64;
        assert!((share - cfg.move_probs.get(kind)).abs() < 0.01, "{kind:?}: {share}");
    }
}
