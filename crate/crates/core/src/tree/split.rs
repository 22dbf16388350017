use std::cmp::Ordering;

use super::SplitRule;
use crate::data::Dataset;
use crate::error::{Error, Result};

/// Shannon entropy in bits of a class-count vector. Terms are summed in
/// sorted order so permuting the classes gives a bit-identical result.
pub fn entropy(counts: &[usize]) -> f64 {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let n = total as f64;
    let mut terms: Vec<f64> = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .collect();
    terms.sort_by(f64::total_cmp);
    terms.iter().sum()
}

/// Entropy reduction (bits) achieved by splitting `parent` into `left` and
/// `right`.
pub fn information_gain(parent: &[usize], left: &[usize], right: &[usize]) -> Result<f64> {
    if parent.len() != left.len() || parent.len() != right.len() {
        return Err(Error::CountMismatch(format!(
            "{} / {} / {} classes",
            parent.len(),
            left.len(),
            right.len()
        )));
    }
    if parent
        .iter()
        .zip(left.iter().zip(right))
        .any(|(p, (l, r))| l + r != *p)
    {
        return Err(Error::CountMismatch(format!(
            "{left:?} + {right:?} != {parent:?}"
        )));
    }
    Ok(gain_unchecked(parent, left, right))
}

pub(crate) fn gain_unchecked(parent: &[usize], left: &[usize], right: &[usize]) -> f64 {
    let n: usize = parent.iter().sum();
    if n == 0 {
        return 0.0;
    }
    // Weighted child entropy is (Σ n_j log n_j − Σ c log c) / n, summed in
    // sorted order so equal count multisets score bit-identically.
    let mut sizes = [left.iter().sum::<usize>(), right.iter().sum::<usize>()];
    sizes.sort_unstable();
    let mut cells: Vec<usize> = left.iter().chain(right).copied().filter(|&c| c > 1).collect();
    cells.sort_unstable();
    let pos: f64 = sizes.iter().map(|&c| xlogx(c)).sum();
    let neg: f64 = cells.iter().map(|&c| xlogx(c)).sum();
    (entropy(parent) - (pos - neg) / n as f64).max(0.0)
}

fn xlogx(c: usize) -> f64 {
    if c < 2 {
        0.0
    } else {
        let x = c as f64;
        x * x.log2()
    }
}

/// A candidate partition and its information gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredSplit {
    pub rule: SplitRule,
    pub gain: f64,
}

/// All axis-aligned partitions of the rows `indices`, one per feature and
/// midpoint between consecutive distinct values, excluding those that leave
/// fewer than `min_leaf` rows on either side. Ordered by feature, then
/// threshold.
pub fn enumerate_splits(data: &Dataset, indices: &[usize], min_leaf: usize) -> Vec<ScoredSplit> {
    let n = indices.len();
    let mut out = Vec::new();
    if n < 2 {
        return out;
    }
    let parent = data.class_counts(indices);
    let min_leaf = min_leaf.max(1);
    let mut sorted = indices.to_vec();
    let mut lefts = Vec::new();
    for feature in 0..data.n_features() {
        sorted.sort_by(|&a, &b| data.value(a, feature).total_cmp(&data.value(b, feature)));
        let mut left = vec![0usize; data.num_classes()];
        for j in 0..n - 1 {
            left[data.label(sorted[j])] += 1;
            let (lo, hi) = (data.value(sorted[j], feature), data.value(sorted[j + 1], feature));
            if lo == hi {
                continue;
            }
            let n_left = j + 1;
            if n_left < min_leaf || n - n_left < min_leaf {
                continue;
            }
            let right: Vec<usize> = parent.iter().zip(&left).map(|(p, l)| p - l).collect();
            out.push(ScoredSplit {
                rule: SplitRule::new(feature, midpoint(lo, hi)),
                gain: gain_unchecked(&parent, &left, &right),
            });
            lefts.push(left.clone());
        }
    }
    snap_exact_ties(&mut out, &lefts, &parent);
    out
}

/// Gains that agree to within rounding are compared exactly; candidates
/// with mathematically equal gain get bit-identical values so ranking falls
/// through to feature and threshold.
fn snap_exact_ties(out: &mut [ScoredSplit], lefts: &[Vec<usize>], parent: &[usize]) {
    const NEAR: f64 = 1e-9;
    let mut order: Vec<usize> = (0..out.len()).collect();
    order.sort_by(|&a, &b| out[a].gain.total_cmp(&out[b].gain));
    let mut keys: Vec<Option<Vec<(usize, i64)>>> = vec![None; out.len()];
    let key = |i: usize, keys: &mut Vec<Option<Vec<(usize, i64)>>>| {
        keys[i]
            .get_or_insert_with(|| {
                let right: Vec<usize> = parent.iter().zip(&lefts[i]).map(|(p, l)| p - l).collect();
                log_signature(&lefts[i], &right)
            })
            .clone()
    };
    let raw: Vec<f64> = out.iter().map(|s| s.gain).collect();
    for pos in 1..order.len() {
        let i = order[pos];
        for &j in order[..pos].iter().rev() {
            if raw[i] - raw[j] > NEAR {
                break;
            }
            if key(i, &mut keys) == key(j, &mut keys) {
                out[i].gain = out[j].gain;
                break;
            }
        }
    }
}

/// Prime exponents of Π n_side^n_side / Π c^c. Two splits of the same parent
/// have equal gain exactly when these agree, since logarithms of distinct
/// primes are linearly independent over the rationals.
fn log_signature(left: &[usize], right: &[usize]) -> Vec<(usize, i64)> {
    let mut exps = std::collections::BTreeMap::<usize, i64>::new();
    let mut add = |x: usize, sign: i64| {
        let mut m = x;
        let mut p = 2;
        while p * p <= m {
            while m % p == 0 {
                *exps.entry(p).or_insert(0) += sign * x as i64;
                m /= p;
            }
            p += 1;
        }
        if m > 1 {
            *exps.entry(m).or_insert(0) += sign * x as i64;
        }
    };
    add(left.iter().sum(), 1);
    add(right.iter().sum(), 1);
    for &c in left.iter().chain(right) {
        add(c, -1);
    }
    exps.into_iter().filter(|&(_, e)| e != 0).collect()
}

/// Midpoint of `lo < hi` that still sends `lo` left and `hi` right.
fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = lo + (hi - lo) / 2.0;
    if mid >= hi || mid < lo {
        lo
    } else {
        mid
    }
}

/// Ranking used by [`top_k_splits`]: higher gain first, then lower feature
/// index, then lower threshold.
pub fn split_order(a: &ScoredSplit, b: &ScoredSplit) -> Ordering {
    b.gain
        .total_cmp(&a.gain)
        .then(a.rule.feature.cmp(&b.rule.feature))
        .then(a.rule.threshold.total_cmp(&b.rule.threshold))
}

/// The `k` best candidates (all of them when fewer exist).
pub fn top_k_splits(mut candidates: Vec<ScoredSplit>, k: usize) -> Vec<ScoredSplit> {
    let k = k.max(1);
    if candidates.len() > k {
        candidates.select_nth_unstable_by(k - 1, split_order);
        candidates.truncate(k);
    }
    candidates.sort_by(split_order);
    candidates
}
