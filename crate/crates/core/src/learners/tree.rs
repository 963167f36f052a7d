//! Binary decision trees grown by least-squares split search.
//!
//! On 0/1 labels the Gini impurity of a node equals twice its within-node sum
//! of squares, so the same variance-reduction search grows classification
//! trees (targets = labels) and the regression trees used by gradient
//! boosting (targets = pseudo-residuals). Only the leaf values differ.

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::rng::Rng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitRule {
    /// Rows with `x <= threshold` go left.
    Threshold(f64),
    /// Rows whose category code is listed go left.
    Categories(Vec<u32>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Node {
    Leaf {
        value: f64,
    },
    Split {
        feature: usize,
        rule: SplitRule,
        left: usize,
        right: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { value } => return *value,
                Node::Split {
                    feature,
                    rule,
                    left,
                    right,
                } => {
                    let x = row[*feature];
                    let go_left = match rule {
                        SplitRule::Threshold(t) => x <= *t,
                        SplitRule::Categories(set) => set.contains(&(x as u32)),
                    };
                    at = if go_left { *left } else { *right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }

    pub fn scale_leaves(&mut self, factor: f64) {
        for node in &mut self.nodes {
            if let Node::Leaf { value } = node {
                *value *= factor;
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FeatureKind {
    Numeric,
    Categorical(usize),
}

#[derive(Clone, Copy, Debug)]
pub struct GrowConfig {
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    /// Features examined per node; `None` examines all of them.
    pub max_features: Option<usize>,
}

struct Candidate {
    gain: f64,
    feature: usize,
    rule: SplitRule,
}

pub struct TreeGrower<'a, F> {
    rows: &'a [Vec<f64>],
    kinds: &'a [FeatureKind],
    targets: &'a [f64],
    config: GrowConfig,
    leaf_value: F,
    nodes: Vec<Node>,
}

impl<'a, F: Fn(&[usize]) -> f64> TreeGrower<'a, F> {
    pub fn new(
        rows: &'a [Vec<f64>],
        kinds: &'a [FeatureKind],
        targets: &'a [f64],
        config: GrowConfig,
        leaf_value: F,
    ) -> Self {
        TreeGrower {
            rows,
            kinds,
            targets,
            config,
            leaf_value,
            nodes: Vec::new(),
        }
    }

    /// Grows a tree on `indices` (repeats allowed, e.g. for bootstrap samples).
    pub fn grow(mut self, indices: Vec<usize>, rng: &mut Rng) -> Tree {
        self.grow_node(indices, 0, rng);
        Tree { nodes: self.nodes }
    }

    fn grow_node(&mut self, indices: Vec<usize>, depth: usize, rng: &mut Rng) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { value: 0.0 });
        let split = if depth < self.config.max_depth
            && indices.len() >= 2 * self.config.min_samples_leaf
        {
            self.best_split(&indices, rng)
        } else {
            None
        };
        match split {
            None => {
                self.nodes[id] = Node::Leaf {
                    value: (self.leaf_value)(&indices),
                };
            }
            Some(c) => {
                let (l, r): (Vec<usize>, Vec<usize>) = indices.iter().partition(|&&i| {
                    let x = self.rows[i][c.feature];
                    match &c.rule {
                        SplitRule::Threshold(t) => x <= *t,
                        SplitRule::Categories(set) => set.contains(&(x as u32)),
                    }
                });
                let left = self.grow_node(l, depth + 1, rng);
                let right = self.grow_node(r, depth + 1, rng);
                self.nodes[id] = Node::Split {
                    feature: c.feature,
                    rule: c.rule,
                    left,
                    right,
                };
            }
        }
        id
    }

    fn best_split(&self, indices: &[usize], rng: &mut Rng) -> Option<Candidate> {
        let n = indices.len() as f64;
        let mean = indices.iter().map(|&i| self.targets[i]).sum::<f64>() / n;
        let sse: f64 = indices
            .iter()
            .map(|&i| (self.targets[i] - mean).powi(2))
            .sum();
        if sse <= 1e-14 * n {
            return None;
        }
        let p = self.kinds.len();
        let features: Vec<usize> = match self.config.max_features {
            Some(k) if k < p => {
                let mut f = index::sample(rng, p, k).into_vec();
                f.sort_unstable();
                f
            }
            _ => (0..p).collect(),
        };
        let total: f64 = indices.iter().map(|&i| self.targets[i]).sum();
        let base = total * total / n;
        let min_gain = sse * 1e-10;
        let mut best: Option<Candidate> = None;
        for f in features {
            let found = match self.kinds[f] {
                FeatureKind::Numeric => self.numeric_split(indices, f, total, base),
                FeatureKind::Categorical(k) => self.categorical_split(indices, f, k, total, base),
            };
            if let Some(c) = found {
                let threshold = best.as_ref().map_or(min_gain, |b| b.gain);
                if c.gain > threshold {
                    best = Some(c);
                }
            }
        }
        best
    }

    fn numeric_split(
        &self,
        indices: &[usize],
        feature: usize,
        total: f64,
        base: f64,
    ) -> Option<Candidate> {
        let mut sorted: Vec<(f64, f64)> = indices
            .iter()
            .map(|&i| (self.rows[i][feature], self.targets[i]))
            .collect();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let n = sorted.len();
        let min_leaf = self.config.min_samples_leaf.max(1);
        let mut left_sum = 0.0;
        let mut best: Option<(f64, usize)> = None;
        for i in 0..n - 1 {
            left_sum += sorted[i].1;
            let n_left = i + 1;
            if n_left < min_leaf || n - n_left < min_leaf || sorted[i].0 == sorted[i + 1].0 {
                continue;
            }
            let right_sum = total - left_sum;
            let gain = left_sum * left_sum / n_left as f64
                + right_sum * right_sum / (n - n_left) as f64
                - base;
            if best.is_none_or(|(g, _)| gain > g) {
                best = Some((gain, i));
            }
        }
        best.map(|(gain, i)| {
            let (a, b) = (sorted[i].0, sorted[i + 1].0);
            let mid = a + (b - a) / 2.0;
            let threshold = if mid < b { mid } else { a };
            Candidate {
                gain,
                feature,
                rule: SplitRule::Threshold(threshold),
            }
        })
    }

    /// Orders categories by mean target and scans prefixes, which finds the
    /// optimal binary partition for squared error.
    fn categorical_split(
        &self,
        indices: &[usize],
        feature: usize,
        n_categories: usize,
        total: f64,
        base: f64,
    ) -> Option<Candidate> {
        let mut count = vec![0usize; n_categories];
        let mut sum = vec![0.0; n_categories];
        for &i in indices {
            let c = self.rows[i][feature] as usize;
            count[c] += 1;
            sum[c] += self.targets[i];
        }
        let mut present: Vec<usize> = (0..n_categories).filter(|&c| count[c] > 0).collect();
        if present.len() < 2 {
            return None;
        }
        present.sort_by(|&a, &b| {
            (sum[a] / count[a] as f64)
                .total_cmp(&(sum[b] / count[b] as f64))
                .then(a.cmp(&b))
        });
        let n = indices.len();
        let min_leaf = self.config.min_samples_leaf.max(1);
        let mut left_n = 0;
        let mut left_sum = 0.0;
        let mut best: Option<(f64, usize)> = None;
        for (pos, &c) in present[..present.len() - 1].iter().enumerate() {
            left_n += count[c];
            left_sum += sum[c];
            if left_n < min_leaf || n - left_n < min_leaf {
                continue;
            }
            let right_sum = total - left_sum;
            let gain =
                left_sum * left_sum / left_n as f64 + right_sum * right_sum / (n - left_n) as f64
                    - base;
            if best.is_none_or(|(g, _)| gain > g) {
                best = Some((gain, pos));
            }
        }
        best.map(|(gain, pos)| {
            let mut set: Vec<u32> = present[..=pos].iter().map(|&c| c as u32).collect();
            set.sort_unstable();
            Candidate {
                gain,
                feature,
                rule: SplitRule::Categories(set),
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn mean_leaf(targets: &[f64]) -> impl Fn(&[usize]) -> f64 + '_ {
        move |idx: &[usize]| idx.iter().map(|&i| targets[i]).sum::<f64>() / idx.len() as f64
    }

    #[test]
    fn separable_stump() {
        let rows: Vec<Vec<f64>> = (-5..5).map(|i| vec![i as f64]).collect();
        let y: Vec<f64> = rows.iter().map(|r| f64::from(u8::from(r[0] >= 0.0))).collect();
        let cfg = GrowConfig {
            max_depth: 1,
            min_samples_leaf: 1,
            max_features: None,
        };
        let tree = TreeGrower::new(&rows, &[FeatureKind::Numeric], &y, cfg, mean_leaf(&y))
            .grow((0..10).collect(), &mut Rng::seed_from_u64(0));
        assert_eq!(tree.depth(), 1);
        assert_eq!(tree.predict(&[-0.7]), 0.0);
        assert_eq!(tree.predict(&[0.0]), 1.0);
        assert_eq!(tree.predict(&[3.0]), 1.0);
    }

    #[test]
    fn categorical_partition() {
        // categories 0 and 2 are positive, 1 is negative
        let rows: Vec<Vec<f64>> = (0..30).map(|i| vec![(i % 3) as f64]).collect();
        let y: Vec<f64> = rows.iter().map(|r| f64::from(u8::from(r[0] != 1.0))).collect();
        let cfg = GrowConfig {
            max_depth: 3,
            min_samples_leaf: 1,
            max_features: None,
        };
        let tree = TreeGrower::new(&rows, &[FeatureKind::Categorical(3)], &y, cfg, mean_leaf(&y))
            .grow((0..30).collect(), &mut Rng::seed_from_u64(0));
        assert_eq!(tree.n_leaves(), 2);
        assert_eq!(tree.predict(&[1.0]), 0.0);
        assert_eq!(tree.predict(&[2.0]), 1.0);
    }

    #[test]
    fn respects_min_leaf() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let y: Vec<f64> = (0..10).map(|i| f64::from(u8::from(i == 9))).collect();
        let cfg = GrowConfig {
            max_depth: 5,
            min_samples_leaf: 3,
            max_features: None,
        };
        let tree = TreeGrower::new(&rows, &[FeatureKind::Numeric], &y, cfg, mean_leaf(&y))
            .grow((0..10).collect(), &mut Rng::seed_from_u64(0));
        // the lone positive cannot be isolated
        assert!(tree.predict(&[9.0]) < 1.0);
    }
}
