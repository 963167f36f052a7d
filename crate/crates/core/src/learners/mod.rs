//! Built-in classifiers, AUC, cross-validated grid search and the model store.

mod auc;
mod grid;
mod logistic;
mod store;
pub mod tree;

use std::collections::BTreeMap;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, VariableKind};
use crate::error::{Error, Result};
use crate::rng;

pub use auc::auc;
pub use grid::{grid_search, CellFailure, FamilyGrid, GridCell, GridSearchReport, GridSpec};
pub use logistic::{FeatureEncoding, LogisticState};
pub use store::{load_models, save_models, STORE_FORMAT_VERSION};
pub use tree::{Node, SplitRule, Tree};

use tree::{FeatureKind, GrowConfig, TreeGrower};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    DecisionTree,
    RandomForest,
    GradientBoosting,
    LogisticRegression,
}

impl Family {
    /// Short prefix used for generated model ids (`rf1`, `gbm3`, ...).
    pub fn id_prefix(self) -> &'static str {
        match self {
            Family::DecisionTree => "dt",
            Family::RandomForest => "rf",
            Family::GradientBoosting => "gbm",
            Family::LogisticRegression => "lr",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_samples_leaf: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    /// Fraction of features examined at each node.
    pub max_features: f64,
    pub bootstrap: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoostingParams {
    pub n_trees: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    /// Row fraction drawn without replacement per stage.
    pub subsample: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogisticParams {
    pub l2: f64,
    pub max_iter: usize,
    pub tolerance: f64,
}

impl Default for LogisticParams {
    fn default() -> Self {
        LogisticParams {
            l2: 0.0,
            max_iter: 20_000,
            tolerance: 1e-8,
        }
    }
}

/// A family together with its hyperparameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ModelSpec {
    DecisionTree(TreeParams),
    RandomForest(ForestParams),
    GradientBoosting(BoostingParams),
    LogisticRegression(LogisticParams),
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidHyperparameter(msg()))
    }
}

impl ModelSpec {
    pub fn family(&self) -> Family {
        match self {
            ModelSpec::DecisionTree(_) => Family::DecisionTree,
            ModelSpec::RandomForest(_) => Family::RandomForest,
            ModelSpec::GradientBoosting(_) => Family::GradientBoosting,
            ModelSpec::LogisticRegression(_) => Family::LogisticRegression,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ModelSpec::DecisionTree(p) => {
                check(p.max_depth >= 1, || "max_depth must be >= 1".into())?;
                check(p.min_samples_leaf >= 1, || "min_samples_leaf must be >= 1".into())
            }
            ModelSpec::RandomForest(p) => {
                check(p.n_trees >= 1, || "n_trees must be >= 1".into())?;
                check(p.max_depth >= 1, || "max_depth must be >= 1".into())?;
                check(p.min_samples_leaf >= 1, || "min_samples_leaf must be >= 1".into())?;
                check(p.max_features > 0.0 && p.max_features <= 1.0, || {
                    format!("max_features {} outside (0, 1]", p.max_features)
                })
            }
            ModelSpec::GradientBoosting(p) => {
                check(p.n_trees >= 1, || "n_trees must be >= 1".into())?;
                check(p.max_depth >= 1, || "max_depth must be >= 1".into())?;
                check(p.min_samples_leaf >= 1, || "min_samples_leaf must be >= 1".into())?;
                check(p.learning_rate > 0.0 && p.learning_rate <= 1.0, || {
                    format!("learning_rate {} outside (0, 1]", p.learning_rate)
                })?;
                check(p.subsample > 0.0 && p.subsample <= 1.0, || {
                    format!("subsample {} outside (0, 1]", p.subsample)
                })
            }
            ModelSpec::LogisticRegression(p) => {
                check(p.l2 >= 0.0 && p.l2.is_finite(), || format!("l2 {} must be >= 0", p.l2))?;
                check(p.max_iter >= 1, || "max_iter must be >= 1".into())?;
                check(p.tolerance > 0.0, || "tolerance must be > 0".into())
            }
        }
    }

    /// Flat name → value view of the hyperparameters.
    pub fn hyperparameters(&self) -> BTreeMap<String, f64> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: f64| {
            m.insert(k.to_string(), v);
        };
        match self {
            ModelSpec::DecisionTree(p) => {
                put("max_depth", p.max_depth as f64);
                put("min_samples_leaf", p.min_samples_leaf as f64);
            }
            ModelSpec::RandomForest(p) => {
                put("n_trees", p.n_trees as f64);
                put("max_depth", p.max_depth as f64);
                put("min_samples_leaf", p.min_samples_leaf as f64);
                put("max_features", p.max_features);
                put("bootstrap", f64::from(u8::from(p.bootstrap)));
            }
            ModelSpec::GradientBoosting(p) => {
                put("n_trees", p.n_trees as f64);
                put("learning_rate", p.learning_rate);
                put("max_depth", p.max_depth as f64);
                put("min_samples_leaf", p.min_samples_leaf as f64);
                put("subsample", p.subsample);
            }
            ModelSpec::LogisticRegression(p) => {
                put("l2", p.l2);
                put("max_iter", p.max_iter as f64);
                put("tolerance", p.tolerance);
            }
        }
        m
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FittedState {
    Tree {
        tree: Tree,
    },
    Forest {
        trees: Vec<Tree>,
    },
    /// Leaf values already include the learning rate.
    Boosting {
        base_margin: f64,
        trees: Vec<Tree>,
    },
    Logistic(LogisticState),
}

/// A fitted scoring function `row -> P(y = 1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictiveModel {
    pub id: String,
    pub spec: ModelSpec,
    pub feature_names: Vec<String>,
    pub state: FittedState,
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

impl PredictiveModel {
    pub fn family(&self) -> Family {
        self.spec.family()
    }

    pub fn score(&self, row: &[f64]) -> f64 {
        match &self.state {
            FittedState::Tree { tree } => tree.predict(row),
            FittedState::Forest { trees } => {
                trees.iter().map(|t| t.predict(row)).sum::<f64>() / trees.len() as f64
            }
            FittedState::Boosting { base_margin, trees } => {
                sigmoid(trees.iter().fold(*base_margin, |acc, t| acc + t.predict(row)))
            }
            FittedState::Logistic(state) => state.score(row),
        }
    }

    pub fn score_rows(&self, rows: &[Vec<f64>]) -> Vec<f64> {
        rows.iter().map(|r| self.score(r)).collect()
    }

    /// Checks that the model was trained on the same variables, in order.
    pub fn check_features(&self, data: &Dataset) -> Result<()> {
        let same = self.feature_names.len() == data.n_vars()
            && self
                .feature_names
                .iter()
                .zip(&data.variables)
                .all(|(a, b)| *a == b.name);
        if same {
            Ok(())
        } else {
            Err(Error::FeatureMismatch {
                model: self.id.clone(),
            })
        }
    }
}

fn feature_kinds(data: &Dataset) -> Vec<FeatureKind> {
    data.variables
        .iter()
        .map(|v| match v.kind {
            VariableKind::Numeric => FeatureKind::Numeric,
            VariableKind::Categorical => FeatureKind::Categorical(v.categories.len()),
        })
        .collect()
}

fn mean_of(values: &[f64], idx: &[usize]) -> f64 {
    idx.iter().map(|&i| values[i]).sum::<f64>() / idx.len() as f64
}

/// Fits one model. All randomness is drawn from streams derived from `seed`.
pub fn train(id: &str, spec: &ModelSpec, data: &Dataset, seed: u64) -> Result<PredictiveModel> {
    spec.validate()?;
    let [neg, pos] = data.class_counts();
    if neg == 0 || pos == 0 {
        return Err(Error::SingleClassData);
    }
    let n = data.n_rows();
    let kinds = feature_kinds(data);
    let labels: Vec<f64> = data.target.iter().map(|&y| f64::from(y)).collect();

    let state = match spec {
        ModelSpec::DecisionTree(p) => {
            let cfg = GrowConfig {
                max_depth: p.max_depth,
                min_samples_leaf: p.min_samples_leaf,
                max_features: None,
            };
            let tree = TreeGrower::new(&data.rows, &kinds, &labels, cfg, |idx: &[usize]| {
                mean_of(&labels, idx)
            })
            .grow((0..n).collect(), &mut rng::stream(seed, "tree", 0));
            FittedState::Tree { tree }
        }
        ModelSpec::RandomForest(p) => {
            let n_features = ((p.max_features * kinds.len() as f64).round() as usize).max(1);
            let cfg = GrowConfig {
                max_depth: p.max_depth,
                min_samples_leaf: p.min_samples_leaf,
                max_features: Some(n_features),
            };
            let trees = (0..p.n_trees)
                .map(|t| {
                    let mut r = rng::stream(seed, "forest_tree", t as u64);
                    let sample: Vec<usize> = if p.bootstrap {
                        (0..n).map(|_| r.random_range(0..n)).collect()
                    } else {
                        (0..n).collect()
                    };
                    TreeGrower::new(&data.rows, &kinds, &labels, cfg, |idx: &[usize]| {
                        mean_of(&labels, idx)
                    })
                    .grow(sample, &mut r)
                })
                .collect();
            FittedState::Forest { trees }
        }
        ModelSpec::GradientBoosting(p) => {
            train_boosting(p, data, &kinds, &labels, seed)
        }
        ModelSpec::LogisticRegression(p) => FittedState::Logistic(logistic::fit(p, data)?),
    };
    Ok(PredictiveModel {
        id: id.to_string(),
        spec: spec.clone(),
        feature_names: data.feature_names(),
        state,
    })
}

/// Stagewise logistic-loss boosting: each stage fits a least-squares tree to
/// the residuals `y - p` and sets every leaf by one Newton step
/// `sum(r) / sum(p (1 - p))`.
fn train_boosting(
    p: &BoostingParams,
    data: &Dataset,
    kinds: &[FeatureKind],
    labels: &[f64],
    seed: u64,
) -> FittedState {
    let n = data.n_rows();
    let prior = labels.iter().sum::<f64>() / n as f64;
    let base_margin = (prior / (1.0 - prior)).ln();
    let mut margins = vec![base_margin; n];
    let cfg = GrowConfig {
        max_depth: p.max_depth,
        min_samples_leaf: p.min_samples_leaf,
        max_features: None,
    };
    let n_sub = ((p.subsample * n as f64).round() as usize).clamp(1, n);
    let mut trees = Vec::with_capacity(p.n_trees);
    for stage in 0..p.n_trees {
        let probs: Vec<f64> = margins.iter().map(|&m| sigmoid(m)).collect();
        let residuals: Vec<f64> = labels.iter().zip(&probs).map(|(y, q)| y - q).collect();
        let mut r = rng::stream(seed, "boost_stage", stage as u64);
        let sample: Vec<usize> = if n_sub < n {
            let mut s = rand::seq::index::sample(&mut r, n, n_sub).into_vec();
            s.sort_unstable();
            s
        } else {
            (0..n).collect()
        };
        let leaf = |idx: &[usize]| {
            let num: f64 = idx.iter().map(|&i| residuals[i]).sum();
            let den: f64 = idx.iter().map(|&i| probs[i] * (1.0 - probs[i])).sum();
            if den.abs() < 1e-12 {
                0.0
            } else {
                num / den
            }
        };
        let mut tree = TreeGrower::new(&data.rows, kinds, &residuals, cfg, leaf).grow(sample, &mut r);
        tree.scale_leaves(p.learning_rate);
        for (m, row) in margins.iter_mut().zip(&data.rows) {
            *m += tree.predict(row);
        }
        trees.push(tree);
    }
    FittedState::Boosting { base_margin, trees }
}

/// A trained model with its cross-validated (and optionally held-out) AUC.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelRecord {
    pub model: PredictiveModel,
    pub cv_auc_mean: f64,
    pub cv_auc_per_fold: Vec<f64>,
    #[serde(default)]
    pub test_auc: Option<f64>,
}

impl ModelRecord {
    pub fn id(&self) -> &str {
        &self.model.id
    }
}
