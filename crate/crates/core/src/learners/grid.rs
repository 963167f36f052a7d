//! Hyperparameter grids and cross-validated grid search.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    auc, train, BoostingParams, ForestParams, LogisticParams, ModelRecord, ModelSpec, TreeParams,
};
use crate::data::{stratified_folds, Dataset};
use crate::error::{Error, Result, ResultExt};
use crate::rng::derive_seed;

/// Cartesian product of hyperparameter values for one family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FamilyGrid {
    DecisionTree {
        max_depth: Vec<usize>,
        min_samples_leaf: Vec<usize>,
    },
    RandomForest {
        n_trees: Vec<usize>,
        max_depth: Vec<usize>,
        min_samples_leaf: Vec<usize>,
        max_features: Vec<f64>,
        #[serde(default = "default_bootstrap")]
        bootstrap: Vec<bool>,
    },
    GradientBoosting {
        n_trees: Vec<usize>,
        learning_rate: Vec<f64>,
        max_depth: Vec<usize>,
        min_samples_leaf: Vec<usize>,
        #[serde(default = "default_subsample")]
        subsample: Vec<f64>,
    },
    LogisticRegression {
        l2: Vec<f64>,
    },
}

fn default_bootstrap() -> Vec<bool> {
    vec![true]
}

fn default_subsample() -> Vec<f64> {
    vec![1.0]
}

impl FamilyGrid {
    fn expand(&self) -> Vec<ModelSpec> {
        let mut out = Vec::new();
        match self {
            FamilyGrid::DecisionTree {
                max_depth,
                min_samples_leaf,
            } => {
                for &d in max_depth {
                    for &l in min_samples_leaf {
                        out.push(ModelSpec::DecisionTree(TreeParams {
                            max_depth: d,
                            min_samples_leaf: l,
                        }));
                    }
                }
            }
            FamilyGrid::RandomForest {
                n_trees,
                max_depth,
                min_samples_leaf,
                max_features,
                bootstrap,
            } => {
                for &t in n_trees {
                    for &d in max_depth {
                        for &l in min_samples_leaf {
                            for &f in max_features {
                                for &b in bootstrap {
                                    out.push(ModelSpec::RandomForest(ForestParams {
                                        n_trees: t,
                                        max_depth: d,
                                        min_samples_leaf: l,
                                        max_features: f,
                                        bootstrap: b,
                                    }));
                                }
                            }
                        }
                    }
                }
            }
            FamilyGrid::GradientBoosting {
                n_trees,
                learning_rate,
                max_depth,
                min_samples_leaf,
                subsample,
            } => {
                for &t in n_trees {
                    for &r in learning_rate {
                        for &d in max_depth {
                            for &l in min_samples_leaf {
                                for &s in subsample {
                                    out.push(ModelSpec::GradientBoosting(BoostingParams {
                                        n_trees: t,
                                        learning_rate: r,
                                        max_depth: d,
                                        min_samples_leaf: l,
                                        subsample: s,
                                    }));
                                }
                            }
                        }
                    }
                }
            }
            FamilyGrid::LogisticRegression { l2 } => {
                for &v in l2 {
                    out.push(ModelSpec::LogisticRegression(LogisticParams {
                        l2: v,
                        ..LogisticParams::default()
                    }));
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub families: Vec<FamilyGrid>,
    pub seed: u64,
    /// Number of repeated k-fold rounds.
    #[serde(default = "one")]
    pub repeats: usize,
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub id: String,
    pub spec: ModelSpec,
}

impl GridSpec {
    /// Random forests and gradient boosting, 20 cells.
    pub fn default_grid(seed: u64) -> Self {
        GridSpec {
            families: vec![
                FamilyGrid::RandomForest {
                    n_trees: vec![100],
                    max_depth: vec![3, 6, 12],
                    min_samples_leaf: vec![1, 5],
                    max_features: vec![0.3, 0.6],
                    bootstrap: vec![true],
                },
                FamilyGrid::GradientBoosting {
                    n_trees: vec![50, 100],
                    learning_rate: vec![0.05, 0.1],
                    max_depth: vec![2, 3],
                    min_samples_leaf: vec![3],
                    subsample: vec![1.0],
                },
            ],
            seed,
            repeats: 1,
        }
    }

    /// Expanded cells, numbered per family in expansion order (`rf1`, `rf2`, ..., `gbm1`, ...).
    pub fn cells(&self) -> Vec<GridCell> {
        let mut counters = std::collections::BTreeMap::new();
        let mut out = Vec::new();
        for fam in &self.families {
            for spec in fam.expand() {
                let prefix = spec.family().id_prefix();
                let n = counters.entry(prefix).or_insert(0usize);
                *n += 1;
                out.push(GridCell {
                    id: format!("{prefix}{n}"),
                    spec,
                });
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellFailure {
    pub id: String,
    pub spec: ModelSpec,
    pub kind: String,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSearchReport {
    /// Sorted by descending mean CV AUC, ties by id.
    pub records: Vec<ModelRecord>,
    pub failures: Vec<CellFailure>,
}

pub(crate) fn sort_records(records: &mut [ModelRecord]) {
    records.sort_by(|a, b| {
        b.cv_auc_mean
            .total_cmp(&a.cv_auc_mean)
            .then_with(|| a.model.id.cmp(&b.model.id))
    });
}

fn evaluate_cell(
    cell: &GridCell,
    cell_seed: u64,
    data: &Dataset,
    fold_sets: &[Vec<usize>],
    n_folds: usize,
) -> Result<ModelRecord> {
    let mut per_fold = Vec::with_capacity(fold_sets.len() * n_folds);
    for (r, folds) in fold_sets.iter().enumerate() {
        for f in 0..n_folds {
            let (held, kept): (Vec<usize>, Vec<usize>) =
                (0..data.n_rows()).partition(|&i| folds[i] == f);
            let fit_on = data.subset(&kept)?;
            let model = train(
                &cell.id,
                &cell.spec,
                &fit_on,
                derive_seed(cell_seed, "fold", (r * n_folds + f) as u64),
            )
            .context_with(|| format!("repeat {r}, fold {f}"))?;
            let scores: Vec<f64> = held.iter().map(|&i| model.score(&data.rows[i])).collect();
            let labels: Vec<u8> = held.iter().map(|&i| data.target[i]).collect();
            per_fold.push(auc(&scores, &labels)?);
        }
    }
    let model = train(&cell.id, &cell.spec, data, derive_seed(cell_seed, "final", 0))?;
    Ok(ModelRecord {
        model,
        cv_auc_mean: per_fold.iter().sum::<f64>() / per_fold.len() as f64,
        cv_auc_per_fold: per_fold,
        test_auc: None,
    })
}

/// Trains every grid cell with stratified k-fold cross-validation and refits
/// each on all of `data`.
///
/// All cells share the same fold assignment. A cell's randomness is keyed by
/// `grid.seed` and its hyperparameters, so results do not depend on thread
/// scheduling and two cells with equal hyperparameters score identically.
pub fn grid_search(grid: &GridSpec, data: &Dataset, n_folds: usize) -> Result<GridSearchReport> {
    if grid.repeats == 0 {
        return Err(Error::InvalidConfig("repeats must be >= 1".into()));
    }
    let fold_sets = (0..grid.repeats)
        .map(|r| stratified_folds(&data.target, n_folds, derive_seed(grid.seed, "cv", r as u64)))
        .collect::<Result<Vec<_>>>()?;
    let cells = grid.cells();
    let outcomes: Vec<(GridCell, Result<ModelRecord>)> = cells
        .into_par_iter()
        .map(|cell| {
            let out = serde_json::to_string(&cell.spec)
                .map_err(Error::from)
                .and_then(|key| {
                    let seed = derive_seed(grid.seed, &key, 0);
                    evaluate_cell(&cell, seed, data, &fold_sets, n_folds)
                });
            (cell, out)
        })
        .collect();
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (cell, outcome) in outcomes {
        match outcome {
            Ok(r) => records.push(r),
            Err(e) => failures.push(CellFailure {
                kind: e.kind().to_string(),
                message: e.to_string(),
                id: cell.id,
                spec: cell.spec,
            }),
        }
    }
    sort_records(&mut records);
    Ok(GridSearchReport { records, failures })
}

impl ModelRecord {
    /// Sets `test_auc` from a held-out dataset.
    pub fn evaluate_test(&mut self, test: &Dataset) -> Result<()> {
        self.model.check_features(test)?;
        let scores = self.model.score_rows(&test.rows);
        self.test_auc = Some(auc(&scores, &test.target)?);
        Ok(())
    }
}
