//! A CART-style binary decision tree over one-hot features.
//!
//! All features are binary after encoding, so splits are equality tests
//! and there is no threshold search. Growth is greedy best-Gini with ties
//! broken toward the lowest feature index, which makes training fully
//! deterministic; an impure node keeps splitting while any feature still
//! separates its rows (zero-gain splits included), mirroring the common
//! library default.

use crate::analytic::LeafSizeHistogram;
use crate::error::{Error, Result};
use crate::pipeline::EncodedDataset;

/// Training limits. Defaults mirror the usual library defaults: unlimited
/// depth, split nodes of 2+, leaves of 1+.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct TreeParams {
    pub max_depth: Option<u32>,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    /// Carried along for protocols that shuffle data before training; the
    /// tree itself is deterministic and never draws from it.
    pub seed: u64,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            max_depth: None,
            min_samples_split: 2,
            min_samples_leaf: 1,
            seed: 0,
        }
    }
}

impl TreeParams {
    fn validate(&self) -> Result<()> {
        if self.min_samples_leaf < 1 {
            return Err(Error::InvalidArgument(
                "min samples per leaf must be >= 1".into(),
            ));
        }
        if self.min_samples_split < 2 {
            return Err(Error::InvalidArgument(
                "min samples per split must be >= 2".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    Internal {
        feature: usize,
        /// Rows with feature value 0.
        left: Box<TreeNode>,
        /// Rows with feature value 1.
        right: Box<TreeNode>,
    },
    Leaf(LeafInfo),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LeafInfo {
    pub leaf_index: usize,
    pub size: u64,
    pub target_count: u64,
    /// Target co-occurrence rate S.
    pub rate: f64,
    /// 1 iff S > 0.5; an exact half does not predict.
    pub predicted: u8,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub class: u8,
    pub leaf_rate: f64,
    pub leaf_index: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    root: TreeNode,
    n_features: usize,
    leaf_count: usize,
}

impl DecisionTree {
    pub fn fit(data: &EncodedDataset, params: &TreeParams) -> Result<Self> {
        let rows: Vec<usize> = (0..data.n_rows()).collect();
        Self::fit_rows(data, &rows, params)
    }

    pub fn fit_rows(data: &EncodedDataset, rows: &[usize], params: &TreeParams) -> Result<Self> {
        Self::fit_rows_excluding(data, rows, &[], params)
    }

    /// Train while ignoring the listed feature indices in split search.
    pub fn fit_rows_excluding(
        data: &EncodedDataset,
        rows: &[usize],
        excluded: &[usize],
        params: &TreeParams,
    ) -> Result<Self> {
        params.validate()?;
        if rows.is_empty() {
            return Err(Error::Data("cannot train a tree on an empty dataset".into()));
        }
        let mut excluded_mask = vec![false; data.n_features()];
        for &f in excluded {
            excluded_mask[f] = true;
        }
        let mut builder = Builder {
            data,
            params,
            excluded: excluded_mask,
            leaf_count: 0,
        };
        let root = builder.grow(rows.to_vec(), 0);
        Ok(DecisionTree {
            root,
            n_features: data.n_features(),
            leaf_count: builder.leaf_count,
        })
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn leaf_count(&self) -> usize {
        self.leaf_count
    }

    pub fn root(&self) -> &TreeNode {
        &self.root
    }

    /// Route a row to its leaf; class 1 iff the leaf rate exceeds 0.5.
    pub fn predict_row(&self, row: &[u8]) -> Prediction {
        let mut node = &self.root;
        loop {
            match node {
                TreeNode::Internal { feature, left, right } => {
                    node = if row[*feature] == 0 { left } else { right };
                }
                TreeNode::Leaf(leaf) => {
                    return Prediction {
                        class: leaf.predicted,
                        leaf_rate: leaf.rate,
                        leaf_index: leaf.leaf_index,
                    }
                }
            }
        }
    }

    /// Indented text rendering with feature names, counts, and S per node.
    pub fn dump(&self, feature_names: &[String]) -> String {
        let mut out = String::new();
        dump_node(&self.root, feature_names, 0, &mut out);
        out
    }
}

fn dump_node(node: &TreeNode, names: &[String], depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    match node {
        TreeNode::Internal { feature, left, right } => {
            out.push_str(&format!("{pad}split {}\n", names[*feature]));
            out.push_str(&format!("{pad}=0:\n"));
            dump_node(left, names, depth + 1, out);
            out.push_str(&format!("{pad}=1:\n"));
            dump_node(right, names, depth + 1, out);
        }
        TreeNode::Leaf(l) => {
            out.push_str(&format!(
                "{pad}leaf size={} targets={} S={:.4} -> {}\n",
                l.size, l.target_count, l.rate, l.predicted
            ));
        }
    }
}

struct Builder<'a> {
    data: &'a EncodedDataset,
    params: &'a TreeParams,
    excluded: Vec<bool>,
    leaf_count: usize,
}

impl Builder<'_> {
    fn grow(&mut self, rows: Vec<usize>, depth: u32) -> TreeNode {
        let target = self.data.target();
        let n = rows.len();
        let targets: u64 = rows.iter().map(|&r| target[r] as u64).sum();

        let depth_cap = self.params.max_depth.is_some_and(|d| depth >= d);
        let pure = targets == 0 || targets == n as u64;
        if pure || depth_cap || n < self.params.min_samples_split {
            return self.leaf(n as u64, targets);
        }

        match self.best_split(&rows) {
            None => self.leaf(n as u64, targets),
            Some(feature) => {
                let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
                    .into_iter()
                    .partition(|&r| self.data.value(r, feature) == 0);
                let left = Box::new(self.grow(left_rows, depth + 1));
                let right = Box::new(self.grow(right_rows, depth + 1));
                TreeNode::Internal { feature, left, right }
            }
        }
    }

    fn leaf(&mut self, size: u64, target_count: u64) -> TreeNode {
        let rate = target_count as f64 / size as f64;
        let leaf = LeafInfo {
            leaf_index: self.leaf_count,
            size,
            target_count,
            rate,
            predicted: u8::from(rate > 0.5),
        };
        self.leaf_count += 1;
        TreeNode::Leaf(leaf)
    }

    /// Lowest-index feature minimizing the size-weighted child Gini, among
    /// splits with both sides populated and above the leaf minimum.
    /// Equivalent to maximizing Gini gain since the parent term is fixed.
    fn best_split(&self, rows: &[usize]) -> Option<usize> {
        let data = self.data;
        let n_features = data.n_features();
        let mut left_n = vec![0u64; n_features];
        let mut left_t = vec![0u64; n_features];
        let mut right_t = vec![0u64; n_features];
        for &r in rows {
            let row = data.row(r);
            let t = data.target()[r] as u64;
            for (f, &v) in row.iter().enumerate() {
                if v == 0 {
                    left_n[f] += 1;
                    left_t[f] += t;
                } else {
                    right_t[f] += t;
                }
            }
        }

        let n = rows.len() as u64;
        let min_leaf = self.params.min_samples_leaf as u64;
        let mut best: Option<(usize, f64)> = None;
        for f in 0..n_features {
            if self.excluded[f] {
                continue;
            }
            let nl = left_n[f];
            let nr = n - nl;
            if nl < min_leaf || nr < min_leaf || nl == 0 || nr == 0 {
                continue;
            }
            let score = weighted_child_gini(nl, left_t[f], nr, right_t[f]);
            if best.is_none_or(|(_, s)| score < s - 1e-15) {
                best = Some((f, score));
            }
        }
        best.map(|(f, _)| f)
    }
}

fn gini(n: u64, t: u64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let p = t as f64 / n as f64;
    2.0 * p * (1.0 - p)
}

fn weighted_child_gini(nl: u64, tl: u64, nr: u64, tr: u64) -> f64 {
    let total = (nl + nr) as f64;
    (nl as f64 / total) * gini(nl, tl) + (nr as f64 / total) * gini(nr, tr)
}

/// Per-leaf statistics over a tree's training rows.
#[derive(Debug, Clone, PartialEq)]
pub struct LeafStats {
    leaves: Vec<LeafRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LeafRecord {
    pub leaf_index: usize,
    pub size: u64,
    pub target_count: u64,
    pub rate: f64,
    /// Training rows routed to this leaf (original dataset indices).
    pub rows: Vec<usize>,
}

impl LeafStats {
    pub fn leaves(&self) -> &[LeafRecord] {
        &self.leaves
    }

    /// Histogram of full leaf sizes, mass-weighted over the training rows.
    pub fn size_histogram(&self) -> Result<LeafSizeHistogram> {
        let sizes: Vec<u64> = self.leaves.iter().map(|l| l.size).collect();
        LeafSizeHistogram::from_leaf_sizes(&sizes)
    }

    /// Histogram where a leaf's size is its count of member rows, for the
    /// subset selected by `member`. Leaves without members drop out.
    pub fn subset_histogram(&self, member: impl Fn(usize) -> bool) -> Result<LeafSizeHistogram> {
        let sizes = self.subset_leaf_sizes(&member);
        LeafSizeHistogram::from_leaf_sizes(&sizes)
    }

    /// Per-leaf member counts for a subset, zero-count leaves omitted.
    pub fn subset_leaf_sizes(&self, member: &impl Fn(usize) -> bool) -> Vec<u64> {
        self.leaves
            .iter()
            .filter_map(|l| {
                let count = l.rows.iter().filter(|&&r| member(r)).count() as u64;
                (count > 0).then_some(count)
            })
            .collect()
    }
}

/// Route the training rows back through the tree and collect per-leaf
/// membership. `rows` must be the same set the tree was trained on for the
/// counts to line up with the stored leaf sizes.
pub fn leaf_statistics(tree: &DecisionTree, data: &EncodedDataset, rows: &[usize]) -> LeafStats {
    let mut membership: Vec<Vec<usize>> = vec![Vec::new(); tree.leaf_count()];
    for &r in rows {
        let p = tree.predict_row(data.row(r));
        membership[p.leaf_index].push(r);
    }
    let mut leaves = Vec::with_capacity(tree.leaf_count());
    collect_leaves(&tree.root, &mut |leaf: &LeafInfo| {
        let rows = std::mem::take(&mut membership[leaf.leaf_index]);
        debug_assert_eq!(rows.len() as u64, leaf.size, "rows are not the training set");
        leaves.push(LeafRecord {
            leaf_index: leaf.leaf_index,
            size: leaf.size,
            target_count: leaf.target_count,
            rate: leaf.rate,
            rows,
        });
    });
    LeafStats { leaves }
}

fn collect_leaves(node: &TreeNode, visit: &mut impl FnMut(&LeafInfo)) {
    match node {
        TreeNode::Internal { left, right, .. } => {
            collect_leaves(left, visit);
            collect_leaves(right, visit);
        }
        TreeNode::Leaf(leaf) => visit(leaf),
    }
}
