//! Random forest: bootstrap-sampled, feature-subsampled CART-style trees
//! with majority voting.
//!
//! Splits maximize Gini impurity decrease over candidate thresholds at
//! midpoints between consecutive distinct sorted feature values. All ties
//! (equal-gain splits, equal votes) break toward the lowest index so runs
//! are reproducible. Trees are stored as flat, index-linked node lists.

use serde::{Deserialize, Serialize};

use crate::data::FeatureMatrix;
use crate::error::{Error, Result};
use crate::random::RandomSource;

/// Forest hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    /// Features drawn per split; defaults to floor(sqrt(n_features)),
    /// minimum 1.
    pub feature_subset_size: Option<usize>,
    /// When false every tree trains on the full sample in order; meant
    /// for deterministic single-tree verification.
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_depth: None,
            min_samples_split: 2,
            feature_subset_size: None,
            bootstrap: true,
            seed: 0,
        }
    }
}

impl ForestConfig {
    fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::InvalidConfig {
                detail: "forest needs at least one tree".into(),
            });
        }
        if self.min_samples_split < 2 {
            return Err(Error::InvalidConfig {
                detail: "min_samples_split must be at least 2".into(),
            });
        }
        Ok(())
    }
}

/// One node of a flat tree. Children are indices into the node list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    /// Values `<= threshold` route left, `> threshold` route right.
    Split {
        feature_index: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        class_counts: Vec<u32>,
    },
}

/// A single decision tree as an index-linked node list; the root is
/// node 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    nodes: Vec<TreeNode>,
}

impl Tree {
    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    /// Class vote for one sample: the majority class of the leaf it
    /// reaches, tie toward the lowest class code.
    pub fn predict_row(&self, row: &[f64]) -> u32 {
        let mut idx = 0usize;
        loop {
            match &self.nodes[idx] {
                TreeNode::Split {
                    feature_index,
                    threshold,
                    left,
                    right,
                } => {
                    idx = if row[*feature_index] <= *threshold {
                        *left
                    } else {
                        *right
                    };
                }
                TreeNode::Leaf { class_counts } => return majority_class(class_counts),
            }
        }
    }
}

/// Index of the largest count; ties toward the lowest index.
fn majority_class(counts: &[u32]) -> u32 {
    let mut best = 0usize;
    for (i, &c) in counts.iter().enumerate().skip(1) {
        if c > counts[best] {
            best = i;
        }
    }
    best as u32
}

/// Gini impurity 1 − Σ p² of a class-count vector.
pub fn gini(class_counts: &[u32]) -> Result<f64> {
    let total: u64 = class_counts.iter().map(|&c| u64::from(c)).sum();
    if total == 0 {
        return Err(Error::EmptyInput {
            context: "gini of zero counts".into(),
        });
    }
    Ok(gini_unchecked(class_counts, total))
}

#[inline]
fn gini_unchecked(class_counts: &[u32], total: u64) -> f64 {
    let t = total as f64;
    let mut sum_sq = 0.0;
    for &c in class_counts {
        let p = f64::from(c) / t;
        sum_sq += p * p;
    }
    1.0 - sum_sq
}

/// Trained ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    trees: Vec<Tree>,
    n_classes: usize,
    n_features: usize,
    feature_subset_size: usize,
    config: ForestConfig,
}

impl ForestModel {
    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn feature_subset_size(&self) -> usize {
        self.feature_subset_size
    }

    pub fn config(&self) -> &ForestConfig {
        &self.config
    }

    fn check_input(&self, x: &FeatureMatrix) -> Result<()> {
        if x.cols() != self.n_features {
            return Err(Error::DimensionMismatch {
                context: "forest input features".into(),
                expected: self.n_features,
                found: x.cols(),
            });
        }
        Ok(())
    }

    /// Per-row tree votes as class counts.
    pub fn vote_counts(&self, x: &FeatureMatrix) -> Result<Vec<Vec<u32>>> {
        self.check_input(x)?;
        Ok((0..x.rows())
            .map(|r| {
                let row = x.row(r);
                let mut votes = vec![0u32; self.n_classes];
                for tree in &self.trees {
                    votes[tree.predict_row(row) as usize] += 1;
                }
                votes
            })
            .collect())
    }

    /// Fraction of trees voting for each class, per row.
    pub fn vote_fractions(&self, x: &FeatureMatrix) -> Result<Vec<Vec<f64>>> {
        let n = self.trees.len() as f64;
        Ok(self
            .vote_counts(x)?
            .into_iter()
            .map(|votes| votes.into_iter().map(|v| f64::from(v) / n).collect())
            .collect())
    }

    /// Plurality vote per row; ties toward the lowest class code.
    pub fn predict(&self, x: &FeatureMatrix) -> Result<Vec<u32>> {
        Ok(self
            .vote_counts(x)?
            .into_iter()
            .map(|votes| majority_class(&votes))
            .collect())
    }
}

struct TreeBuilder<'a> {
    x: &'a FeatureMatrix,
    labels: &'a [u32],
    n_classes: usize,
    subset_size: usize,
    cfg: &'a ForestConfig,
    nodes: Vec<TreeNode>,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    gain: f64,
}

// Gains below this are float noise, not real impurity decreases.
const MIN_GAIN: f64 = 1e-12;

impl<'a> TreeBuilder<'a> {
    fn class_counts(&self, indices: &[usize]) -> Vec<u32> {
        let mut counts = vec![0u32; self.n_classes];
        for &i in indices {
            counts[self.labels[i] as usize] += 1;
        }
        counts
    }

    /// Best (feature, threshold) over the drawn feature subset, or None
    /// when no split strictly decreases the weighted impurity. Scanning
    /// features in ascending order and thresholds in ascending value
    /// order with strict improvement makes ties resolve toward the
    /// lowest indices.
    fn best_split(&self, indices: &[usize], features: &[usize]) -> Option<BestSplit> {
        let total = indices.len() as u64;
        let parent_counts = self.class_counts(indices);
        let parent_gini = gini_unchecked(&parent_counts, total);
        let mut best: Option<BestSplit> = None;

        let mut sorted: Vec<(f64, u32)> = Vec::with_capacity(indices.len());
        for &f in features {
            sorted.clear();
            sorted.extend(
                indices
                    .iter()
                    .map(|&i| (self.x.get(i, f), self.labels[i])),
            );
            sorted.sort_by(|a, b| f64::total_cmp(&a.0, &b.0));

            let mut left_counts = vec![0u32; self.n_classes];
            let mut left_total = 0u64;
            for w in 0..sorted.len() - 1 {
                left_counts[sorted[w].1 as usize] += 1;
                left_total += 1;
                let (v, next) = (sorted[w].0, sorted[w + 1].0);
                if v == next {
                    continue;
                }
                let right_total = total - left_total;
                let mut right_counts = parent_counts.clone();
                for (rc, &lc) in right_counts.iter_mut().zip(&left_counts) {
                    *rc -= lc;
                }
                let weighted = (left_total as f64 * gini_unchecked(&left_counts, left_total)
                    + right_total as f64 * gini_unchecked(&right_counts, right_total))
                    / total as f64;
                let gain = parent_gini - weighted;
                if gain > MIN_GAIN && best.as_ref().is_none_or(|b| gain > b.gain + MIN_GAIN) {
                    best = Some(BestSplit {
                        feature: f,
                        threshold: v + (next - v) / 2.0,
                        gain,
                    });
                }
            }
        }
        best
    }

    fn build(&mut self, indices: &[usize], depth: usize, rng: &mut RandomSource) -> usize {
        let counts = self.class_counts(indices);
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        let depth_capped = self.cfg.max_depth.is_some_and(|d| depth >= d);
        if pure || depth_capped || indices.len() < self.cfg.min_samples_split {
            self.nodes.push(TreeNode::Leaf {
                class_counts: counts,
            });
            return self.nodes.len() - 1;
        }

        let n_features = self.x.cols();
        let features = if self.subset_size >= n_features {
            (0..n_features).collect::<Vec<_>>()
        } else {
            rng.sample_indices(n_features, self.subset_size)
        };

        let Some(split) = self.best_split(indices, &features) else {
            self.nodes.push(TreeNode::Leaf {
                class_counts: counts,
            });
            return self.nodes.len() - 1;
        };

        let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = indices
            .iter()
            .partition(|&&i| self.x.get(i, split.feature) <= split.threshold);
        debug_assert!(!left_idx.is_empty() && !right_idx.is_empty());

        let node = self.nodes.len();
        self.nodes.push(TreeNode::Leaf {
            class_counts: Vec::new(), // placeholder, patched below
        });
        let left = self.build(&left_idx, depth + 1, rng);
        let right = self.build(&right_idx, depth + 1, rng);
        self.nodes[node] = TreeNode::Split {
            feature_index: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        node
    }
}

/// Build one tree on the given sample indices (the bootstrap draw).
/// Exposed for verification against reference tree builders.
pub fn build_tree(
    x: &FeatureMatrix,
    labels: &[u32],
    sample_indices: &[usize],
    n_classes: usize,
    subset_size: usize,
    cfg: &ForestConfig,
    rng: &mut RandomSource,
) -> Result<Tree> {
    if sample_indices.is_empty() {
        return Err(Error::EmptyInput {
            context: "tree training sample".into(),
        });
    }
    let mut builder = TreeBuilder {
        x,
        labels,
        n_classes,
        subset_size,
        cfg,
        nodes: Vec::new(),
    };
    let root = builder.build(sample_indices, 0, rng);
    debug_assert_eq!(root, 0);
    Ok(Tree {
        nodes: builder.nodes,
    })
}

/// Train a forest. Each tree gets an independent bootstrap sample of size
/// n (with replacement) and its own child random stream derived from the
/// config seed and the tree index, so serial and parallel schedules would
/// produce identical models.
pub fn train_forest(x: &FeatureMatrix, labels: &[u32], cfg: &ForestConfig) -> Result<ForestModel> {
    cfg.validate()?;
    if x.rows() == 0 {
        return Err(Error::EmptyInput {
            context: "forest training data".into(),
        });
    }
    if labels.len() != x.rows() {
        return Err(Error::DimensionMismatch {
            context: "forest labels".into(),
            expected: x.rows(),
            found: labels.len(),
        });
    }
    let n_classes = labels.iter().copied().max().unwrap_or(0) as usize + 1;
    let n_features = x.cols();
    let default_subset = (n_features as f64).sqrt().floor() as usize;
    let subset_size = cfg
        .feature_subset_size
        .unwrap_or(default_subset)
        .clamp(1, n_features.max(1));

    let root = RandomSource::new(cfg.seed);
    let n = x.rows();
    let mut trees = Vec::with_capacity(cfg.n_trees);
    for t in 0..cfg.n_trees {
        let mut rng = root.child(t as u64);
        let sample: Vec<usize> = if cfg.bootstrap {
            (0..n).map(|_| rng.index(n)).collect()
        } else {
            (0..n).collect()
        };
        trees.push(build_tree(
            x,
            labels,
            &sample,
            n_classes,
            subset_size,
            cfg,
            &mut rng,
        )?);
    }
    Ok(ForestModel {
        trees,
        n_classes,
        n_features,
        feature_subset_size: subset_size,
        config: cfg.clone(),
    })
}
