//! Model multiplicity analysis for binary classifiers.
//!
//! The crate trains populations of classifiers over hyperparameter grids,
//! gathers the near-optimal ones into a Rashomon set, describes every model by
//! its partial-dependence profiles and then picks the `k` models whose profiles
//! disagree the most.
//!
//! Module map:
//!
//! * [`data`] — CSV ingestion, stratified splits and folds.
//! * [`learners`] — CART, random forest, gradient boosting, logistic regression,
//!   AUC, cross-validated grid search and the model store.
//! * [`profiles`] — evaluation grids, partial dependence and the profile-exchange file.
//! * [`measures`] — local polynomial derivatives, L² distances, the profile
//!   disparity index and pairwise disparity matrices.
//! * [`rashomon`] — reference model, Rashomon set and the detection algorithm.
//! * [`scenarios`] — synthetic profile pairs for comparing the measures.
//! * [`demo`] — a seeded clinical-style dataset for smoke tests.

pub mod data;
pub mod demo;
pub mod error;
pub mod learners;
pub mod measures;
pub mod profiles;
pub mod rashomon;
pub mod rng;
pub mod scenarios;

pub use data::{Dataset, SplitSpec, VariableKind, VariableMeta};
pub use error::{Error, Result};
pub use learners::{
    auc, grid_search, load_models, save_models, train, Family, GridSearchReport, GridSpec,
    ModelRecord, ModelSpec, PredictiveModel,
};
pub use measures::{
    categorical_disparity, gold_derivative, l2_derivatives, l2_profiles, pairwise_disparity, pdi,
    DisparityAnalysis, DisparityMatrix, DisparityRecord, GoldParams, MeasureConfig, MeasureKind,
    SignTolerance,
};
pub use profiles::{
    make_grid, pdp, pdp_categorical, profile_bundle, read_exchange, write_exchange,
    CategoricalProfile, Grid, GridStrategy, Profile, ProfileBundle, ProfileOptions, VariableAxis,
};
pub use rashomon::{
    build_rashomon_set, default_k, rashomon_detect, rashomon_detect_greedy, reference_model, run_detect,
    DetectResult, ModelScore, PerformanceMetric, RashomonConfig, ReferenceSelector, Variant,
};
