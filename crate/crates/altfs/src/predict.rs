//! Minimal decision-tree classifier and the Matthews correlation coefficient.
//!
//! The tree uses greedy top-down induction with information gain (entropy)
//! and midpoint thresholds. It backs the wrapper's holdout oracle, generates
//! model-gain importance scores, and evaluates feature sets on test folds.
//! Induction is deterministic: gain ties pick the lower feature index, then
//! the lower threshold, and a node keeps splitting while it is impure and a
//! strict partition exists, so interaction effects without marginal gain
//! (an XOR pattern, say) still get separated.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quality::{FeatureQualities, Normalization};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeParams {
    pub max_depth: Option<usize>,
    /// Minimum rows each side of a split must keep.
    pub min_leaf: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            max_depth: None,
            min_leaf: 1,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum Node {
    Split {
        feature: usize,
        threshold: f64,
        /// Fraction of training rows reaching this node times its gain;
        /// summed per feature for importances.
        weighted_gain: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
    Leaf {
        class: u8,
        counts: [usize; 2],
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct TreeModel {
    root: Node,
    num_features: usize,
    params_max_depth: Option<usize>,
    params_min_leaf: usize,
}

fn entropy(counts: [usize; 2]) -> f64 {
    let total = (counts[0] + counts[1]) as f64;
    if total == 0.0 {
        return 0.0;
    }
    let mut h = 0.0;
    for c in counts {
        if c > 0 {
            let p = c as f64 / total;
            h -= p * p.ln();
        }
    }
    h
}

fn class_counts(y: &[u8], rows: &[usize]) -> [usize; 2] {
    let mut counts = [0usize; 2];
    for &r in rows {
        counts[y[r] as usize] += 1;
    }
    counts
}

fn majority(counts: [usize; 2]) -> u8 {
    // tie goes to class 0
    if counts[1] > counts[0] {
        1
    } else {
        0
    }
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    gain: f64,
}

/// Best (feature, midpoint) by information gain; `None` if no candidate
/// yields a strict partition honoring `min_leaf`. Ties resolve to the lower
/// feature index, then the lower threshold, because candidates are scanned
/// in that order and only strict improvements replace the current best.
fn best_split(x: &[Vec<f64>], y: &[u8], rows: &[usize], min_leaf: usize) -> Option<BestSplit> {
    let parent_counts = class_counts(y, rows);
    let parent_entropy = entropy(parent_counts);
    let total = rows.len() as f64;
    let num_features = x[rows[0]].len();
    let mut best: Option<BestSplit> = None;
    for feature in 0..num_features {
        let mut values: Vec<f64> = rows.iter().map(|&r| x[r][feature]).collect();
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        values.dedup();
        for pair in values.windows(2) {
            let threshold = (pair[0] + pair[1]) / 2.0;
            let mut left = [0usize; 2];
            for &r in rows {
                if x[r][feature] <= threshold {
                    left[y[r] as usize] += 1;
                }
            }
            let left_total = left[0] + left[1];
            let right_total = rows.len() - left_total;
            if left_total < min_leaf || right_total < min_leaf {
                continue;
            }
            let right = [
                parent_counts[0] - left[0],
                parent_counts[1] - left[1],
            ];
            let gain = parent_entropy
                - (left_total as f64 / total) * entropy(left)
                - (right_total as f64 / total) * entropy(right);
            if best.as_ref().is_none_or(|b| gain > b.gain + 1e-12) {
                best = Some(BestSplit {
                    feature,
                    threshold,
                    gain,
                });
            }
        }
    }
    best
}

fn grow(
    x: &[Vec<f64>],
    y: &[u8],
    rows: &[usize],
    depth: usize,
    params: &TreeParams,
    total_rows: f64,
) -> Node {
    let counts = class_counts(y, rows);
    let leaf = Node::Leaf {
        class: majority(counts),
        counts,
    };
    if counts[0] == 0 || counts[1] == 0 {
        return leaf;
    }
    if params.max_depth.is_some_and(|d| depth >= d) {
        return leaf;
    }
    let Some(split) = best_split(x, y, rows, params.min_leaf) else {
        return leaf;
    };
    let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
        .iter()
        .partition(|&&r| x[r][split.feature] <= split.threshold);
    Node::Split {
        feature: split.feature,
        threshold: split.threshold,
        weighted_gain: rows.len() as f64 / total_rows * split.gain.max(0.0),
        left: Box::new(grow(x, y, &left_rows, depth + 1, params, total_rows)),
        right: Box::new(grow(x, y, &right_rows, depth + 1, params, total_rows)),
    }
}

/// Trains a tree on a row-major matrix (already restricted to the selected
/// features) and binary labels.
pub fn train_tree(x: &[Vec<f64>], y: &[u8], params: &TreeParams) -> TreeModel {
    assert!(!x.is_empty() && x.len() == y.len(), "need aligned rows");
    assert!(!x[0].is_empty(), "need at least one feature");
    let rows: Vec<usize> = (0..x.len()).collect();
    let root = grow(x, y, &rows, 0, params, x.len() as f64);
    TreeModel {
        root,
        num_features: x[0].len(),
        params_max_depth: params.max_depth,
        params_min_leaf: params.min_leaf,
    }
}

impl TreeModel {
    pub fn predict_row(&self, row: &[f64]) -> u8 {
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf { class, .. } => return *class,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    node = if row[*feature] <= *threshold { left } else { right };
                }
            }
        }
    }

    pub fn predict(&self, x: &[Vec<f64>]) -> Vec<u8> {
        x.iter().map(|row| self.predict_row(row)).collect()
    }

    pub fn num_features(&self) -> usize {
        self.num_features
    }

    /// Debugging dump of the node structure; not a stability contract.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("tree serializes")
    }
}

/// Per-feature sum of row-weighted information gain over the nodes that
/// split on it, normalized to sum 1 (all-zero importances stay zero).
pub fn feature_importance(model: &TreeModel) -> FeatureQualities {
    let mut values = vec![0.0; model.num_features];
    fn walk(node: &Node, values: &mut [f64]) {
        if let Node::Split {
            feature,
            weighted_gain,
            left,
            right,
            ..
        } = node
        {
            values[*feature] += weighted_gain;
            walk(left, values);
            walk(right, values);
        }
    }
    walk(&model.root, &mut values);
    let total: f64 = values.iter().sum();
    if total > 0.0 {
        for v in &mut values {
            *v /= total;
        }
    }
    FeatureQualities::new(values, "model_gain", Normalization::SumToOne)
}

/// Matthews correlation coefficient of binary predictions. Any zero factor
/// in the denominator yields 0, so constant predictions score 0.
pub fn mcc(predicted: &[u8], actual: &[u8]) -> Result<f64> {
    if predicted.len() != actual.len() {
        return Err(Error::LengthMismatch(predicted.len(), actual.len()));
    }
    if predicted.is_empty() {
        return Err(Error::invalid("mcc needs at least one prediction"));
    }
    let (mut tp, mut tn, mut fp, mut fne) = (0f64, 0f64, 0f64, 0f64);
    for (&p, &a) in predicted.iter().zip(actual) {
        match (p, a) {
            (1, 1) => tp += 1.0,
            (0, 0) => tn += 1.0,
            (1, 0) => fp += 1.0,
            _ => fne += 1.0,
        }
    }
    let denom = (tp + fp) * (tp + fne) * (tn + fp) * (tn + fne);
    if denom == 0.0 {
        return Ok(0.0);
    }
    Ok((tp * tn - fp * fne) / denom.sqrt())
}

pub fn accuracy(predicted: &[u8], actual: &[u8]) -> f64 {
    let hits = predicted
        .iter()
        .zip(actual)
        .filter(|(p, a)| p == a)
        .count();
    hits as f64 / actual.len() as f64
}
