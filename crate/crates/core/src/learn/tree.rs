//! CART classification trees (Gini impurity) and a bagged random forest.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::matrix::Matrix;
use crate::seed::substream;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeParams {
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    /// Features examined per split; `None` examines all of them.
    pub max_features: Option<usize>,
}

#[derive(Debug, Clone)]
enum Node {
    Leaf {
        proba1: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone)]
pub struct DecisionTree {
    nodes: Vec<Node>,
}

fn gini(c0: f64, c1: f64) -> f64 {
    let n = c0 + c1;
    if n == 0.0 {
        return 0.0;
    }
    1.0 - (c0 / n).powi(2) - (c1 / n).powi(2)
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    proxy: f64,
}

impl DecisionTree {
    /// Grows a tree on `samples` (row indices, duplicates allowed for
    /// bootstrap weighting). Returns the tree and the raw weighted impurity
    /// decrease per feature.
    pub fn fit<R: Rng>(
        x: &Matrix,
        y: &[usize],
        samples: Vec<usize>,
        params: &TreeParams,
        rng: &mut R,
    ) -> (Self, Vec<f64>) {
        let p = x.cols();
        let min_leaf = params.min_samples_leaf.max(1);
        let mut importance = vec![0.0; p];
        let mut nodes = vec![Node::Leaf { proba1: 0.0 }];
        let mut work = vec![(0usize, samples, 0usize)];
        let mut features: Vec<usize> = (0..p).collect();
        let mut pairs: Vec<(f64, usize)> = Vec::new();

        while let Some((slot, node_samples, depth)) = work.pop() {
            let m = node_samples.len();
            let c1 = node_samples.iter().filter(|&&i| y[i] == 1).count() as f64;
            let c0 = m as f64 - c1;
            let proba1 = if m == 0 { 0.0 } else { c1 / m as f64 };
            nodes[slot] = Node::Leaf { proba1 };

            let depth_reached = params.max_depth.is_some_and(|d| depth >= d);
            if depth_reached || c0 == 0.0 || c1 == 0.0 || m < 2 * min_leaf {
                continue;
            }

            let budget = params.max_features.unwrap_or(p).clamp(1, p.max(1));
            if budget < p {
                features.shuffle(rng);
            }
            let mut best: Option<BestSplit> = None;
            let mut visited = 0;
            for &f in features.iter() {
                if visited >= budget {
                    break;
                }
                pairs.clear();
                pairs.extend(node_samples.iter().map(|&i| (x.get(i, f), y[i])));
                let (lo, hi) = pairs
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(v, _)| {
                        (lo.min(v), hi.max(v))
                    });
                if lo >= hi {
                    // constant features do not count against the budget
                    continue;
                }
                visited += 1;
                pairs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));

                let (mut l0, mut l1) = (0.0, 0.0);
                for i in 0..m - 1 {
                    if pairs[i].1 == 1 {
                        l1 += 1.0;
                    } else {
                        l0 += 1.0;
                    }
                    let n_left = i + 1;
                    if pairs[i].0 >= pairs[i + 1].0 || n_left < min_leaf || m - n_left < min_leaf {
                        continue;
                    }
                    let (r0, r1) = (c0 - l0, c1 - l1);
                    let nl = n_left as f64;
                    let nr = (m - n_left) as f64;
                    // maximising this minimises the weighted child Gini impurity
                    let proxy = (l0 * l0 + l1 * l1) / nl + (r0 * r0 + r1 * r1) / nr;
                    if best.as_ref().is_none_or(|b| proxy > b.proxy) {
                        let a = pairs[i].0;
                        let b = pairs[i + 1].0;
                        let mut threshold = a + (b - a) / 2.0;
                        if threshold >= b {
                            threshold = a;
                        }
                        best = Some(BestSplit {
                            feature: f,
                            threshold,
                            proxy,
                        });
                    }
                }
            }

            let Some(split) = best else { continue };
            let (left, right): (Vec<usize>, Vec<usize>) = node_samples
                .iter()
                .partition(|&&i| x.get(i, split.feature) <= split.threshold);
            let count1 = |s: &[usize]| s.iter().filter(|&&i| y[i] == 1).count() as f64;
            let (lc1, rc1) = (count1(&left), count1(&right));
            let (nl, nr) = (left.len() as f64, right.len() as f64);
            importance[split.feature] += m as f64 * gini(c0, c1)
                - nl * gini(nl - lc1, lc1)
                - nr * gini(nr - rc1, rc1);

            let left_slot = nodes.len();
            nodes.push(Node::Leaf { proba1: 0.0 });
            let right_slot = nodes.len();
            nodes.push(Node::Leaf { proba1: 0.0 });
            nodes[slot] = Node::Split {
                feature: split.feature,
                threshold: split.threshold,
                left: left_slot,
                right: right_slot,
            };
            work.push((right_slot, right, depth + 1));
            work.push((left_slot, left, depth + 1));
        }
        (Self { nodes }, importance)
    }

    pub fn predict_proba(&self, row: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { proba1 } => return proba1,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if row[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn predict(&self, row: &[f64]) -> usize {
        usize::from(self.predict_proba(row) > 0.5)
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

fn normalize(v: &mut [f64]) {
    let total: f64 = v.iter().sum();
    if total > 0.0 {
        v.iter_mut().for_each(|x| *x /= total);
    }
}

#[derive(Debug, Clone)]
pub struct RandomForest {
    trees: Vec<DecisionTree>,
}

impl RandomForest {
    /// Bagged CART trees examining `floor(sqrt(p))` features per split.
    /// Tree `t` draws from its own substream of `seed`, so the fitted forest
    /// does not depend on thread scheduling.
    pub fn fit(
        x: &Matrix,
        y: &[usize],
        n_trees: usize,
        max_depth: Option<usize>,
        min_samples_leaf: usize,
        bootstrap: bool,
        seed: u64,
    ) -> (Self, Vec<f64>) {
        let p = x.cols();
        let n = x.rows();
        let params = TreeParams {
            max_depth,
            min_samples_leaf,
            max_features: Some(((p as f64).sqrt().floor() as usize).max(1)),
        };
        let grown: Vec<(DecisionTree, Vec<f64>)> = (0..n_trees.max(1))
            .into_par_iter()
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(substream(seed, t as u64));
                let samples = if bootstrap {
                    (0..n).map(|_| rng.random_range(0..n)).collect()
                } else {
                    (0..n).collect()
                };
                DecisionTree::fit(x, y, samples, &params, &mut rng)
            })
            .collect();

        let mut importance = vec![0.0; p];
        let mut trees = Vec::with_capacity(grown.len());
        for (tree, mut imp) in grown {
            normalize(&mut imp);
            for (acc, v) in importance.iter_mut().zip(&imp) {
                *acc += v;
            }
            trees.push(tree);
        }
        normalize(&mut importance);
        (Self { trees }, importance)
    }

    pub fn predict_proba(&self, row: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.predict_proba(row)).sum::<f64>() / self.trees.len() as f64
    }

    pub fn predict(&self, row: &[f64]) -> usize {
        usize::from(self.predict_proba(row) > 0.5)
    }
}
