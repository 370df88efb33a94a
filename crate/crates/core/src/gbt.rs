//! Gradient-boosted regression trees with a second-order regularized
//! objective: squared-error loss (gradient = residual, hessian = 1), exact
//! greedy split search over midpoint thresholds, leaf weights -G/(H+λ),
//! minimum split gain γ, per-round row subsampling, and shrinkage.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{FeatureVector, Sample, FEATURE_NAMES};
use crate::error::{Error, Result};

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Hyperparams {
    pub n_estimators: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    /// Row fraction drawn (without replacement) per boosting round.
    pub subsample: f64,
    /// Minimum hessian sum per child; with unit hessians, a row count.
    pub min_child_weight: f64,
    /// λ in the regularizer.
    pub reg_lambda: f64,
    /// γ in the regularizer: minimum gain for a split to be kept.
    pub gamma_split: f64,
    pub seed: u64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            n_estimators: 600,
            max_depth: 6,
            learning_rate: 0.1,
            subsample: 1.0,
            min_child_weight: 1.0,
            reg_lambda: 1.0,
            gamma_split: 0.0,
            seed: 0,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        if self.n_estimators < 1 {
            return Err(Error::InvalidInput("n_estimators must be >= 1".into()));
        }
        if self.max_depth < 1 {
            return Err(Error::InvalidInput("max_depth must be >= 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "learning_rate = {} outside (0, 1]",
                self.learning_rate
            )));
        }
        if !(self.subsample > 0.0 && self.subsample <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "subsample = {} outside (0, 1]",
                self.subsample
            )));
        }
        if !(self.min_child_weight >= 0.0) {
            return Err(Error::InvalidInput("min_child_weight must be >= 0".into()));
        }
        if !(self.reg_lambda >= 0.0) {
            return Err(Error::InvalidInput("reg_lambda must be >= 0".into()));
        }
        if !(self.gamma_split >= 0.0) {
            return Err(Error::InvalidInput("gamma_split must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TreeNode {
    Split {
        feature_index: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf {
        weight: f64,
    },
}

impl TreeNode {
    /// Routes x through the tree: left iff feature < threshold.
    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { weight } => return *weight,
                TreeNode::Split {
                    feature_index,
                    threshold,
                    left,
                    right,
                } => {
                    node = if x[*feature_index] < *threshold {
                        left
                    } else {
                        right
                    };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeEnsemble {
    pub base_score: f64,
    pub shrinkage: f64,
    pub n_features: usize,
    pub feature_names: Vec<String>,
    pub trees: Vec<TreeNode>,
}

impl TreeEnsemble {
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n_features {
            return Err(Error::InvalidInput(format!(
                "feature vector has {} entries, model expects {}",
                x.len(),
                self.n_features
            )));
        }
        Ok(self.eval(x))
    }

    /// Hot-path prediction; the caller guarantees the dimension.
    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.n_features);
        self.base_score + self.shrinkage * self.trees.iter().map(|t| t.eval(x)).sum::<f64>()
    }

    pub fn predict_features(&self, x: &FeatureVector) -> Result<f64> {
        self.predict(x.as_slice())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitCandidate {
    pub feature_index: usize,
    pub threshold: f64,
    pub gain: f64,
}

/// Scans one presorted feature for the best midpoint threshold. `gain` is
/// the regularized gain net of γ; only strictly positive gains qualify.
fn scan_feature(
    sorted_rows: &[u32],
    column: &[f64],
    grad: &[f64],
    total_g: f64,
    total_h: f64,
    lambda: f64,
    gamma_split: f64,
    min_child_weight: f64,
) -> Option<(f64, f64)> {
    let parent_score = total_g * total_g / (total_h + lambda);
    let mut best: Option<(f64, f64)> = None;
    let mut g_left = 0.0;
    let mut h_left = 0.0;
    for k in 0..sorted_rows.len() - 1 {
        let row = sorted_rows[k] as usize;
        g_left += grad[row];
        h_left += 1.0;
        let cur = column[row];
        let next = column[sorted_rows[k + 1] as usize];
        if !(next > cur) {
            continue;
        }
        let mid = 0.5 * (cur + next);
        // A midpoint that rounds onto `cur` cannot separate the groups.
        if !(mid > cur) {
            continue;
        }
        let g_right = total_g - g_left;
        let h_right = total_h - h_left;
        if h_left < min_child_weight || h_right < min_child_weight {
            continue;
        }
        let gain = 0.5
            * (g_left * g_left / (h_left + lambda) + g_right * g_right / (h_right + lambda)
                - parent_score)
            - gamma_split;
        if gain > 0.0 && best.is_none_or(|(_, g)| gain > g) {
            best = Some((mid, gain));
        }
    }
    best
}

/// Best split over all features of a node, deterministically tie-broken to
/// the lowest feature index, then the smallest threshold. Returns None when
/// no candidate clears the gain floor and child-weight constraints.
pub fn best_split(
    columns: &[Vec<f64>],
    grad: &[f64],
    lambda: f64,
    gamma_split: f64,
    min_child_weight: f64,
) -> Option<SplitCandidate> {
    let n = grad.len();
    if n < 2 {
        return None;
    }
    let total_g: f64 = grad.iter().sum();
    let total_h = n as f64;
    let mut best: Option<SplitCandidate> = None;
    for (f, column) in columns.iter().enumerate() {
        let mut rows: Vec<u32> = (0..n as u32).collect();
        rows.sort_by(|&a, &b| column[a as usize].total_cmp(&column[b as usize]));
        if let Some((threshold, gain)) = scan_feature(
            &rows,
            column,
            grad,
            total_g,
            total_h,
            lambda,
            gamma_split,
            min_child_weight,
        ) {
            // Ascending feature order plus strict comparison keeps the
            // lowest index on ties; within a feature the scan already
            // keeps the smallest threshold on equal gain.
            if best.is_none_or(|b| gain > b.gain) {
                best = Some(SplitCandidate {
                    feature_index: f,
                    threshold,
                    gain,
                });
            }
        }
    }
    best
}

struct Grower<'a> {
    columns: &'a [Vec<f64>],
    grad: &'a [f64],
    hp: &'a Hyperparams,
}

impl Grower<'_> {
    /// `lists` holds, per feature, the node's row indices sorted by that
    /// feature; partitioning preserves the order so no re-sort is needed.
    fn grow(&self, lists: Vec<Vec<u32>>, depth: usize) -> TreeNode {
        let rows = &lists[0];
        let total_h = rows.len() as f64;
        let total_g: f64 = rows.iter().map(|&i| self.grad[i as usize]).sum();
        let leaf = || TreeNode::Leaf {
            weight: -total_g / (total_h + self.hp.reg_lambda),
        };
        if depth >= self.hp.max_depth || rows.len() < 2 {
            return leaf();
        }
        let mut best: Option<SplitCandidate> = None;
        for (f, list) in lists.iter().enumerate() {
            if let Some((threshold, gain)) = scan_feature(
                list,
                &self.columns[f],
                self.grad,
                total_g,
                total_h,
                self.hp.reg_lambda,
                self.hp.gamma_split,
                self.hp.min_child_weight,
            ) {
                if best.is_none_or(|b| gain > b.gain) {
                    best = Some(SplitCandidate {
                        feature_index: f,
                        threshold,
                        gain,
                    });
                }
            }
        }
        let Some(split) = best else {
            return leaf();
        };
        let split_col = &self.columns[split.feature_index];
        let mut left_lists = Vec::with_capacity(lists.len());
        let mut right_lists = Vec::with_capacity(lists.len());
        for list in &lists {
            let (l, r): (Vec<u32>, Vec<u32>) = list
                .iter()
                .partition(|&&i| split_col[i as usize] < split.threshold);
            left_lists.push(l);
            right_lists.push(r);
        }
        drop(lists);
        TreeNode::Split {
            feature_index: split.feature_index,
            threshold: split.threshold,
            left: Box::new(self.grow(left_lists, depth + 1)),
            right: Box::new(self.grow(right_lists, depth + 1)),
        }
    }
}

/// Trains on explicit feature columns; returns the ensemble and the
/// full-training-set MSE after each boosting round.
pub fn train_matrix_traced(
    columns: &[Vec<f64>],
    targets: &[f64],
    feature_names: Vec<String>,
    hp: &Hyperparams,
) -> Result<(TreeEnsemble, Vec<f64>)> {
    hp.validate()?;
    let n = targets.len();
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "training needs at least 2 samples, got {n}"
        )));
    }
    if columns.is_empty() {
        return Err(Error::InvalidInput("training needs at least 1 feature".into()));
    }
    for (f, col) in columns.iter().enumerate() {
        if col.len() != n {
            return Err(Error::InvalidInput(format!(
                "feature column {f} has {} rows, expected {n}",
                col.len()
            )));
        }
        if col.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "feature column {f} contains non-finite values"
            )));
        }
    }
    if targets.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("targets contain non-finite values".into()));
    }

    let base_score = targets.iter().sum::<f64>() / n as f64;
    let mut pred = vec![base_score; n];
    let mut grad = vec![0.0; n];
    let mut row_buf: Vec<f64> = vec![0.0; columns.len()];

    // One global presort per feature; per-round lists filter it by the
    // subsampled row set, preserving order.
    let global_sorted: Vec<Vec<u32>> = columns
        .iter()
        .map(|col| {
            let mut rows: Vec<u32> = (0..n as u32).collect();
            rows.sort_by(|&a, &b| col[a as usize].total_cmp(&col[b as usize]));
            rows
        })
        .collect();

    let mut trees = Vec::with_capacity(hp.n_estimators);
    let mut mse_trace = Vec::with_capacity(hp.n_estimators);
    let mut in_sample = vec![true; n];
    for round in 0..hp.n_estimators {
        for i in 0..n {
            grad[i] = pred[i] - targets[i];
        }
        let lists: Vec<Vec<u32>> = if hp.subsample < 1.0 {
            let k = ((hp.subsample * n as f64).round() as usize).clamp(1, n);
            let mut rng = ChaCha8Rng::seed_from_u64(
                hp.seed
                    .wrapping_add((round as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)),
            );
            in_sample.fill(false);
            for i in rand::seq::index::sample(&mut rng, n, k) {
                in_sample[i] = true;
            }
            global_sorted
                .iter()
                .map(|rows| {
                    rows.iter()
                        .copied()
                        .filter(|&i| in_sample[i as usize])
                        .collect()
                })
                .collect()
        } else {
            global_sorted.clone()
        };

        let grower = Grower {
            columns,
            grad: &grad,
            hp,
        };
        let tree = grower.grow(lists, 0);
        for i in 0..n {
            for (f, col) in columns.iter().enumerate() {
                row_buf[f] = col[i];
            }
            pred[i] += hp.learning_rate * tree.eval(&row_buf);
        }
        trees.push(tree);
        let mse = pred
            .iter()
            .zip(targets)
            .map(|(p, y)| (p - y) * (p - y))
            .sum::<f64>()
            / n as f64;
        mse_trace.push(mse);
    }

    Ok((
        TreeEnsemble {
            base_score,
            shrinkage: hp.learning_rate,
            n_features: columns.len(),
            feature_names,
            trees,
        },
        mse_trace,
    ))
}

pub fn train_matrix(
    columns: &[Vec<f64>],
    targets: &[f64],
    feature_names: Vec<String>,
    hp: &Hyperparams,
) -> Result<TreeEnsemble> {
    train_matrix_traced(columns, targets, feature_names, hp).map(|(m, _)| m)
}

/// Trains on dataset samples with the canonical feature layout.
pub fn train(samples: &[Sample], hp: &Hyperparams) -> Result<TreeEnsemble> {
    let columns = sample_columns(samples);
    let targets: Vec<f64> = samples.iter().map(|s| s.target).collect();
    train_matrix(
        &columns,
        &targets,
        FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
        hp,
    )
}

pub fn sample_columns(samples: &[Sample]) -> Vec<Vec<f64>> {
    (0..crate::dataset::N_FEATURES)
        .map(|f| samples.iter().map(|s| s.features.0[f]).collect())
        .collect()
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    base_score: f64,
    shrinkage: f64,
    n_features: usize,
    feature_names: Vec<String>,
    trees: Vec<TreeNode>,
}

pub fn save_model(model: &TreeEnsemble, path: &Path) -> Result<()> {
    let file = ModelFile {
        format_version: MODEL_FORMAT_VERSION,
        base_score: model.base_score,
        shrinkage: model.shrinkage,
        n_features: model.n_features,
        feature_names: model.feature_names.clone(),
        trees: model.trees.clone(),
    };
    let json = serde_json::to_string_pretty(&file)
        .map_err(|e| Error::ModelFormat(format!("serialize: {e}")))?;
    std::fs::write(path, json).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<TreeEnsemble> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: ModelFile = serde_json::from_str(&text)
        .map_err(|e| Error::ModelFormat(format!("{}: {e}", path.display())))?;
    if file.format_version != MODEL_FORMAT_VERSION {
        return Err(Error::ModelFormat(format!(
            "{}: format_version {} unsupported (expected {MODEL_FORMAT_VERSION})",
            path.display(),
            file.format_version
        )));
    }
    Ok(TreeEnsemble {
        base_score: file.base_score,
        shrinkage: file.shrinkage,
        n_features: file.n_features,
        feature_names: file.feature_names,
        trees: file.trees,
    })
}
