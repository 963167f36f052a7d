//! Rashomon sets and detection of the most mutually different models.
//!
//! Detection starts from the reference model and repeatedly adds the remaining
//! member with the largest average disparity to the models selected so far
//! (full variant) or to the most recently selected model (greedy variant),
//! until `k` models are chosen. Ties go to the lexicographically smallest id.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::ModelRecord;
use crate::measures::{pairwise_disparity, DisparityAnalysis, DisparityMatrix, MeasureConfig, MeasureKind};
use crate::profiles::ProfileBundle;

/// Slack for floating-point noise in the membership threshold.
const MEMBERSHIP_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelScore {
    pub id: String,
    pub auc: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerformanceMetric {
    #[default]
    CvMean,
    Test,
}

impl PerformanceMetric {
    pub fn scores(self, records: &[ModelRecord]) -> Result<Vec<ModelScore>> {
        records
            .iter()
            .map(|r| {
                let auc = match self {
                    PerformanceMetric::CvMean => r.cv_auc_mean,
                    PerformanceMetric::Test => r
                        .test_auc
                        .ok_or_else(|| Error::MissingTestAuc(r.model.id.clone()))?,
                };
                Ok(ModelScore {
                    id: r.model.id.clone(),
                    auc,
                })
            })
            .collect()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceSelector {
    #[default]
    BestByMetric,
    Explicit(String),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    #[default]
    Full,
    Greedy,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RashomonConfig {
    /// AUC tolerance below the reference.
    pub epsilon: f64,
    /// Number of models to select; `None` uses [`default_k`].
    pub k: Option<usize>,
    pub measure: MeasureConfig,
    pub grid_size: usize,
    pub reference: ReferenceSelector,
    pub variant: Variant,
    pub metric: PerformanceMetric,
}

impl Default for RashomonConfig {
    fn default() -> Self {
        RashomonConfig {
            epsilon: 0.04,
            k: None,
            measure: MeasureConfig::new(MeasureKind::Pdi),
            grid_size: 101,
            reference: ReferenceSelector::BestByMetric,
            variant: Variant::Full,
            metric: PerformanceMetric::CvMean,
        }
    }
}

impl RashomonConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidConfig(format!("epsilon {} must be >= 0", self.epsilon)));
        }
        if let Some(k) = self.k {
            if k < 2 {
                return Err(Error::InvalidConfig(format!("k = {k} must be >= 2")));
            }
        }
        self.measure.validate()
    }
}

/// Best model by AUC (ties to the smallest id), or the explicitly named one.
pub fn reference_model(scores: &[ModelScore], selector: &ReferenceSelector) -> Result<String> {
    if scores.is_empty() {
        return Err(Error::NoModels);
    }
    match selector {
        ReferenceSelector::Explicit(id) => scores
            .iter()
            .find(|s| &s.id == id)
            .map(|s| s.id.clone())
            .ok_or_else(|| Error::UnknownExplicitId(id.clone())),
        ReferenceSelector::BestByMetric => {
            let best = scores
                .iter()
                .min_by(|a, b| b.auc.total_cmp(&a.auc).then_with(|| a.id.cmp(&b.id)))
                .expect("nonempty");
            Ok(best.id.clone())
        }
    }
}

/// Ids of all models with `AUC >= AUC(reference) - epsilon`, sorted.
pub fn build_rashomon_set(scores: &[ModelScore], reference: &str, epsilon: f64) -> Result<Vec<String>> {
    let ref_auc = scores
        .iter()
        .find(|s| s.id == reference)
        .ok_or_else(|| Error::UnknownExplicitId(reference.to_string()))?
        .auc;
    let threshold = ref_auc - epsilon - MEMBERSHIP_SLACK;
    let mut ids: Vec<String> = scores
        .iter()
        .filter(|s| s.id == reference || s.auc >= threshold)
        .map(|s| s.id.clone())
        .collect();
    ids.sort();
    ids.dedup();
    Ok(ids)
}

/// `max(2, round(sqrt(size)))`.
pub fn default_k(rashomon_size: usize) -> usize {
    ((rashomon_size as f64).sqrt().round() as usize).max(2)
}

/// One selection step's outcome.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionStep {
    pub model: String,
    /// Average disparity that won the step.
    pub score: f64,
}

/// Runs the selection loop on a precomputed matrix. Returns matrix indices in
/// selection order (reference first) and the winning score of every step
/// after the first. Stops after `k` models or when the candidates run out.
pub fn select_from_matrix(matrix: &DisparityMatrix, reference: usize, k: usize, variant: Variant) -> (Vec<usize>, Vec<f64>) {
    let n = matrix.ids.len();
    let mut candidates: Vec<usize> = (0..n).filter(|&i| i != reference).collect();
    candidates.sort_by(|&a, &b| matrix.ids[a].cmp(&matrix.ids[b]));
    let mut selected = vec![reference];
    let mut scores = Vec::new();
    while selected.len() < k && !candidates.is_empty() {
        let mut best: Option<(usize, f64)> = None;
        for (pos, &c) in candidates.iter().enumerate() {
            let score = match variant {
                Variant::Full => {
                    selected.iter().map(|&s| matrix.values[s][c]).sum::<f64>() / selected.len() as f64
                }
                Variant::Greedy => matrix.values[*selected.last().unwrap()][c],
            };
            if best.is_none_or(|(_, b)| score > b) {
                best = Some((pos, score));
            }
        }
        let (pos, score) = best.expect("candidates nonempty");
        selected.push(candidates.remove(pos));
        scores.push(score);
    }
    (selected, scores)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairSummary {
    pub model_a: String,
    pub model_b: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectResult {
    pub reference: String,
    pub reference_auc: f64,
    /// Selection order, reference first.
    pub selected: Vec<String>,
    /// Winning average disparity for `selected[1..]`.
    pub selection_scores: Vec<f64>,
    /// All Rashomon set members, sorted.
    pub rashomon_ids: Vec<String>,
    pub k: usize,
    pub epsilon: f64,
    pub variant: Variant,
    pub metric: PerformanceMetric,
    pub measure: MeasureConfig,
    /// Set when `k >= |R|` and the whole set was returned.
    pub k_exceeds_set: bool,
    /// `(model, variable)` profiles replaced by the constant-0 function.
    pub zero_filled: Vec<(String, String)>,
    pub analysis: DisparityAnalysis,
}

impl DetectResult {
    /// Average disparities of all pairs among the selected models, largest first.
    pub fn pair_summary(&self) -> Vec<PairSummary> {
        let mut out = Vec::new();
        for (i, a) in self.selected.iter().enumerate() {
            for b in &self.selected[i + 1..] {
                let value = self.analysis.matrix.get(a, b).expect("selected models are in the matrix");
                let (a, b) = if a <= b { (a, b) } else { (b, a) };
                out.push(PairSummary {
                    model_a: a.clone(),
                    model_b: b.clone(),
                    value,
                });
            }
        }
        out.sort_by(|x, y| {
            y.value
                .total_cmp(&x.value)
                .then_with(|| x.model_a.cmp(&y.model_a))
                .then_with(|| x.model_b.cmp(&y.model_b))
        });
        out
    }

    pub fn steps(&self) -> Vec<SelectionStep> {
        self.selected[1..]
            .iter()
            .zip(&self.selection_scores)
            .map(|(m, &score)| SelectionStep {
                model: m.clone(),
                score,
            })
            .collect()
    }
}

fn detect(scores: &[ModelScore], bundle: &ProfileBundle, config: &RashomonConfig, variant: Variant) -> Result<DetectResult> {
    config.validate()?;
    let reference = reference_model(scores, &config.reference)?;
    let members = build_rashomon_set(scores, &reference, config.epsilon)?;
    for id in &members {
        if bundle.model_index(id).is_none() {
            return Err(Error::BundleIncomplete(id.clone()));
        }
    }
    let k = config.k.unwrap_or_else(|| default_k(members.len()));
    let sub = bundle.select(&members)?;
    let zero_filled = sub.missing();
    let analysis = pairwise_disparity(&sub, &config.measure)?;
    let ref_idx = analysis.matrix.index_of(&reference).expect("reference is a member");
    let (order, selection_scores) = select_from_matrix(&analysis.matrix, ref_idx, k, variant);
    let reference_auc = scores.iter().find(|s| s.id == reference).expect("known").auc;
    Ok(DetectResult {
        selected: order.iter().map(|&i| analysis.matrix.ids[i].clone()).collect(),
        selection_scores,
        k_exceeds_set: k >= members.len(),
        rashomon_ids: members,
        reference,
        reference_auc,
        k,
        epsilon: config.epsilon,
        variant,
        metric: config.metric,
        measure: config.measure,
        zero_filled,
        analysis,
    })
}

/// Full variant: each step maximizes the mean disparity to all selected models.
pub fn rashomon_detect(scores: &[ModelScore], bundle: &ProfileBundle, config: &RashomonConfig) -> Result<DetectResult> {
    detect(scores, bundle, config, Variant::Full)
}

/// Greedy variant: each step maximizes the disparity to the last selected model.
pub fn rashomon_detect_greedy(scores: &[ModelScore], bundle: &ProfileBundle, config: &RashomonConfig) -> Result<DetectResult> {
    detect(scores, bundle, config, Variant::Greedy)
}

/// Runs the variant named in `config`.
pub fn run_detect(scores: &[ModelScore], bundle: &ProfileBundle, config: &RashomonConfig) -> Result<DetectResult> {
    detect(scores, bundle, config, config.variant)
}
