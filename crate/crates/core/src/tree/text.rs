//! Line-oriented tree dump.
//!
//! ```text
//! tree classes=2 min_leaf=5 nodes=3
//! 0 split 1 0.35 4,6
//! 1 leaf - - 4,1
//! 2 leaf - - 0,5
//! ```
//!
//! One line per node in preorder: id, kind, feature, threshold, class counts
//! (for splits, the counts of the whole subtree). Thresholds use Rust's
//! shortest round-trip float formatting so parsing restores them exactly.

use std::fmt;
use std::str::FromStr;

use super::{DecisionTree, Node, SplitRule};
use crate::error::Error;

impl fmt::Display for DecisionTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "tree classes={} min_leaf={} nodes={}",
            self.num_classes,
            self.min_leaf,
            self.nodes.len()
        )?;
        for (id, node) in self.nodes.iter().enumerate() {
            let counts = self
                .subtree_counts(id)
                .iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(",");
            match node {
                Node::Leaf { .. } => writeln!(f, "{id} leaf - - {counts}")?,
                Node::Split { rule, .. } => {
                    writeln!(f, "{id} split {} {:?} {counts}", rule.feature, rule.threshold)?
                }
            }
        }
        Ok(())
    }
}

impl DecisionTree {
    pub fn to_text(&self) -> String {
        self.to_string()
    }

    pub fn from_text(text: &str) -> Result<Self, Error> {
        text.parse()
    }
}

fn header_field(token: Option<&str>, key: &str) -> Result<usize, Error> {
    token
        .and_then(|t| t.strip_prefix(key))
        .and_then(|t| t.strip_prefix('='))
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| Error::TreeFormat {
            line: 1,
            reason: format!("expected {key}=<n>"),
        })
}

impl FromStr for DecisionTree {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self, Error> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(Error::TreeFormat {
            line: 1,
            reason: "empty input".into(),
        })?;
        let mut h = header.split_whitespace();
        if h.next() != Some("tree") {
            return Err(Error::TreeFormat {
                line: 1,
                reason: "missing `tree` header".into(),
            });
        }
        let num_classes = header_field(h.next(), "classes")?;
        let min_leaf = header_field(h.next(), "min_leaf")?;
        let n_nodes = header_field(h.next(), "nodes")?;

        // Parse flat preorder records, then rebuild child links.
        let mut records = Vec::with_capacity(n_nodes);
        for (lineno, line) in lines {
            let bad = |reason: &str| Error::TreeFormat {
                line: lineno + 1,
                reason: reason.to_string(),
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 5 {
                return Err(bad("expected 5 fields"));
            }
            if fields[0].parse::<usize>().ok() != Some(records.len()) {
                return Err(bad("node ids must be consecutive from 0"));
            }
            let counts = fields[4]
                .split(',')
                .map(|c| c.parse::<usize>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| bad("bad counts"))?;
            if counts.len() != num_classes {
                return Err(bad("wrong number of class counts"));
            }
            let rule = match fields[1] {
                "leaf" => None,
                "split" => Some(SplitRule::new(
                    fields[2].parse().map_err(|_| bad("bad feature"))?,
                    fields[3].parse().map_err(|_| bad("bad threshold"))?,
                )),
                _ => return Err(bad("kind must be `leaf` or `split`")),
            };
            records.push((rule, counts));
        }
        if records.len() != n_nodes {
            return Err(Error::TreeFormat {
                line: 1,
                reason: format!("header says {n_nodes} nodes, found {}", records.len()),
            });
        }

        let mut nodes: Vec<Node> = Vec::with_capacity(n_nodes);
        let mut pos = 0;
        fn build(
            records: &[(Option<SplitRule>, Vec<usize>)],
            pos: &mut usize,
            nodes: &mut Vec<Node>,
        ) -> Result<usize, Error> {
            let id = *pos;
            let (rule, counts) = records.get(id).ok_or(Error::TreeFormat {
                line: id + 2,
                reason: "truncated tree".into(),
            })?;
            *pos += 1;
            nodes.push(Node::Leaf {
                counts: counts.clone(),
            });
            if let Some(rule) = rule {
                let left = build(records, pos, nodes)?;
                let right = build(records, pos, nodes)?;
                nodes[id] = Node::Split {
                    rule: *rule,
                    left,
                    right,
                };
            }
            Ok(id)
        }
        build(&records, &mut pos, &mut nodes)?;
        if pos != records.len() {
            return Err(Error::TreeFormat {
                line: pos + 2,
                reason: "trailing nodes after a complete tree".into(),
            });
        }
        DecisionTree::from_nodes(nodes, num_classes, min_leaf)
    }
}
