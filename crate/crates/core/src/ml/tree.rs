//! CART-style classification trees with Gini splits.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{argmax, FeatureRow, LabeledDataset, FEATURE_NAMES, NUM_CLASSES, NUM_FEATURES};
use crate::transport::Solver;

/// Scores closer than this are treated as equal when ranking splits.
const SCORE_EPS: f64 = 1e-12;

/// Gini impurity `1 − Σ p_k²` of a class-count vector.
pub fn gini(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
}

/// `n · Gini` for a count vector, the quantity minimized by split search.
fn weighted_gini(counts: &[usize; NUM_CLASSES]) -> f64 {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    n - counts.iter().map(|&c| (c * c) as f64).sum::<f64>() / n
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Split {
    pub feature: usize,
    /// Samples with `x[feature] <= threshold` go left.
    pub threshold: f64,
    pub left: usize,
    pub right: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    /// Training samples reaching this node, per class.
    pub counts: [usize; NUM_CLASSES],
    pub split: Option<Split>,
}

impl TreeNode {
    pub fn samples(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn class(&self) -> usize {
        argmax(&self.counts.map(|c| c as f64))
    }
}

/// Nodes in depth-first preorder; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<TreeNode>,
}

impl DecisionTree {
    pub fn leaf_for(&self, x: &FeatureRow) -> &TreeNode {
        let mut node = &self.nodes[0];
        while let Some(s) = node.split {
            node = &self.nodes[if x[s.feature] <= s.threshold { s.left } else { s.right }];
        }
        node
    }

    /// Majority class of the leaf reached by `x`; ties to the lowest index.
    pub fn predict(&self, x: &FeatureRow) -> usize {
        self.leaf_for(x).class()
    }

    pub fn depth(&self) -> usize {
        fn go(t: &DecisionTree, id: usize) -> usize {
            match t.nodes[id].split {
                Some(s) => 1 + go(t, s.left).max(go(t, s.right)),
                None => 0,
            }
        }
        go(self, 0)
    }

    pub fn leaves(&self) -> impl Iterator<Item = &TreeNode> {
        self.nodes.iter().filter(|n| n.split.is_none())
    }

    /// Total decrease of `n · Gini` credited to each split feature.
    pub fn gini_decrease(&self) -> [f64; NUM_FEATURES] {
        let mut out = [0.0; NUM_FEATURES];
        for node in &self.nodes {
            if let Some(s) = node.split {
                let children = weighted_gini(&self.nodes[s.left].counts) + weighted_gini(&self.nodes[s.right].counts);
                out[s.feature] += weighted_gini(&node.counts) - children;
            }
        }
        out
    }

    /// Indented text rendering down to `max_depth` levels of splits. Each
    /// line shows the majority class, class proportions, share of the root's
    /// samples and the node's split rule; children are marked `yes`/`no`
    /// for the rule holding or not.
    pub fn export_text(&self, max_depth: usize) -> String {
        let total = self.nodes[0].samples().max(1) as f64;
        let mut out = String::new();
        self.render(0, 0, max_depth, "", total, &mut out);
        out
    }

    fn render(&self, id: usize, depth: usize, max_depth: usize, edge: &str, total: f64, out: &mut String) {
        let node = &self.nodes[id];
        let n = node.samples().max(1) as f64;
        let props: Vec<String> = Solver::ALL
            .iter()
            .map(|s| format!("{}={:.3}", s, node.counts[s.index()] as f64 / n))
            .collect();
        let _ = write!(
            out,
            "{}{}{} [{}] {:.1}%",
            "  ".repeat(depth),
            edge,
            Solver::from_index(node.class()).expect("class index"),
            props.join(" "),
            100.0 * node.samples() as f64 / total
        );
        let Some(s) = node.split else {
            out.push('\n');
            return;
        };
        let _ = writeln!(out, " split: {} <= {}", FEATURE_NAMES[s.feature], s.threshold);
        if depth >= max_depth {
            let _ = writeln!(out, "{}...", "  ".repeat(depth + 1));
            return;
        }
        self.render(s.left, depth + 1, max_depth, "yes: ", total, out);
        self.render(s.right, depth + 1, max_depth, "no: ", total, out);
    }
}

/// Grows a tree on the full dataset (no resampling).
pub fn train_tree<R: Rng + ?Sized>(dataset: &LabeledDataset, feature_subset: usize, min_leaf: usize, rng: &mut R) -> DecisionTree {
    let sample: Vec<usize> = (0..dataset.len()).collect();
    grow(&dataset.features, &dataset.class_indices(), &sample, feature_subset, min_leaf, rng)
}

struct Builder<'a, R: ?Sized> {
    x: Vec<FeatureRow>,
    y: Vec<usize>,
    /// Per feature, sample positions sorted by that feature; every node owns
    /// the same `[start, end)` range in all three lists.
    order: [Vec<u32>; NUM_FEATURES],
    goes_left: Vec<bool>,
    scratch: Vec<u32>,
    nodes: Vec<TreeNode>,
    feature_subset: usize,
    min_leaf: usize,
    rng: &'a mut R,
}

/// Grows a tree on `sample` (indices into `rows`, repeats allowed).
///
/// At each node the features are visited in a random order and the first
/// `feature_subset` of them that are not constant on the node are searched.
/// The split minimizing the children's summed `n · Gini` wins; near-equal
/// scores go to the lower feature index, then the lower threshold.
pub(crate) fn grow<R: Rng + ?Sized>(
    rows: &[FeatureRow],
    labels: &[usize],
    sample: &[usize],
    feature_subset: usize,
    min_leaf: usize,
    rng: &mut R,
) -> DecisionTree {
    let x: Vec<FeatureRow> = sample.iter().map(|&i| rows[i]).collect();
    let y: Vec<usize> = sample.iter().map(|&i| labels[i]).collect();
    let m = x.len();
    let order = std::array::from_fn(|f| {
        let mut o: Vec<u32> = (0..m as u32).collect();
        o.sort_by(|&a, &b| x[a as usize][f].total_cmp(&x[b as usize][f]).then(a.cmp(&b)));
        o
    });
    let mut b = Builder {
        x,
        y,
        order,
        goes_left: vec![false; m],
        scratch: vec![0; m],
        nodes: Vec::new(),
        feature_subset: feature_subset.clamp(1, NUM_FEATURES),
        min_leaf: min_leaf.max(1),
        rng,
    };
    if m == 0 {
        b.nodes.push(TreeNode {
            counts: [0; NUM_CLASSES],
            split: None,
        });
    } else {
        b.build(0, m);
    }
    DecisionTree { nodes: b.nodes }
}

struct Candidate {
    score: f64,
    feature: usize,
    threshold: f64,
    left_size: usize,
}

impl<R: Rng + ?Sized> Builder<'_, R> {
    fn build(&mut self, start: usize, end: usize) -> usize {
        let mut counts = [0usize; NUM_CLASSES];
        for &p in &self.order[0][start..end] {
            counts[self.y[p as usize]] += 1;
        }
        let id = self.nodes.len();
        self.nodes.push(TreeNode { counts, split: None });

        let n = end - start;
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if pure || n < 2 * self.min_leaf {
            return id;
        }
        let Some(best) = self.best_split(start, end) else {
            return id;
        };
        if weighted_gini(&counts) - best.score <= SCORE_EPS {
            return id;
        }

        let (f, thr) = (best.feature, best.threshold);
        for &p in &self.order[0][start..end] {
            self.goes_left[p as usize] = self.x[p as usize][f] <= thr;
        }
        for g in 0..NUM_FEATURES {
            let mut l = start;
            let mut right_buf = Vec::with_capacity(n - best.left_size);
            for k in start..end {
                let p = self.order[g][k];
                if self.goes_left[p as usize] {
                    self.scratch[l] = p;
                    l += 1;
                } else {
                    right_buf.push(p);
                }
            }
            debug_assert_eq!(l, start + best.left_size);
            for p in right_buf {
                self.scratch[l] = p;
                l += 1;
            }
            debug_assert_eq!(l, end);
            self.order[g][start..end].copy_from_slice(&self.scratch[start..end]);
        }
        let mid = start + best.left_size;
        let left = self.build(start, mid);
        let right = self.build(mid, end);
        self.nodes[id].split = Some(Split {
            feature: f,
            threshold: thr,
            left,
            right,
        });
        id
    }

    fn best_split(&mut self, start: usize, end: usize) -> Option<Candidate> {
        let n = end - start;
        let mut features: [usize; NUM_FEATURES] = std::array::from_fn(|f| f);
        features.shuffle(self.rng);
        let mut searched = 0;
        let mut best: Option<Candidate> = None;
        for f in features {
            if searched == self.feature_subset {
                break;
            }
            let ord = &self.order[f][start..end];
            let first = self.x[ord[0] as usize][f];
            let last = self.x[ord[n - 1] as usize][f];
            if first == last {
                continue;
            }
            searched += 1;

            let mut total = [0usize; NUM_CLASSES];
            for &p in ord {
                total[self.y[p as usize]] += 1;
            }
            let mut left = [0usize; NUM_CLASSES];
            for k in 0..n - 1 {
                left[self.y[ord[k] as usize]] += 1;
                let v = self.x[ord[k] as usize][f];
                let next = self.x[ord[k + 1] as usize][f];
                if v == next {
                    continue;
                }
                let nl = k + 1;
                if nl < self.min_leaf || n - nl < self.min_leaf {
                    continue;
                }
                let right: [usize; NUM_CLASSES] = std::array::from_fn(|c| total[c] - left[c]);
                let score = weighted_gini(&left) + weighted_gini(&right);
                let mut threshold = 0.5 * (v + next);
                if threshold >= next {
                    threshold = v;
                }
                let better = match &best {
                    None => true,
                    Some(b) => {
                        score < b.score - SCORE_EPS
                            || ((score - b.score).abs() <= SCORE_EPS
                                && (f < b.feature || (f == b.feature && threshold < b.threshold)))
                    }
                };
                if better {
                    best = Some(Candidate {
                        score,
                        feature: f,
                        threshold,
                        left_size: nl,
                    });
                }
            }
        }
        best
    }
}
