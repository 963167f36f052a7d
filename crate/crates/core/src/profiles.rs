//! Partial-dependence profiles.
//!
//! A profile of model `f` for variable `j` is evaluated on a grid `z_1 < ... < z_m`
//! as the average prediction over the background rows with column `j`
//! overwritten by `z_t`. Bundles evaluate every model on the same grid per
//! variable so that profiles are directly comparable.
//!
//! The exchange file lets externally trained models take part:
//!
//! ```json
//! {"format_version": 1,
//!  "models": [{"id": "a", "auc": 0.8}],
//!  "variables": [{"name": "x", "kind": "numeric", "grid": [0, 0.5, 1]}],
//!  "profiles": [{"model_id": "a", "variable": "x", "values": [0.1, 0.2, 0.4]}]}
//! ```
//!
//! Missing `(model, variable)` profiles are allowed and later zero-filled.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, VariableKind, VariableMeta};
use crate::error::{Error, Result, ResultExt};
use crate::learners::{sigmoid, FittedState, Node, PredictiveModel, SplitRule, Tree};
use crate::rashomon::ModelScore;
use crate::rng;

pub const EXCHANGE_FORMAT_VERSION: u64 = 1;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridStrategy {
    #[default]
    Uniform,
    Quantile,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub variable: String,
    pub points: Vec<f64>,
    pub strategy: GridStrategy,
}

impl Grid {
    /// Validates a grid supplied from outside (m >= 2, finite, strictly increasing).
    pub fn new(variable: impl Into<String>, points: Vec<f64>, strategy: GridStrategy) -> Result<Self> {
        let variable = variable.into();
        if points.len() < 2 {
            return Err(Error::InvalidGrid(format!("`{variable}` needs at least 2 points")));
        }
        if points.iter().any(|p| !p.is_finite()) || points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidGrid(format!(
                "`{variable}` grid must be finite and strictly increasing"
            )));
        }
        Ok(Grid {
            variable,
            points,
            strategy,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn span(&self) -> f64 {
        self.points[self.points.len() - 1] - self.points[0]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub model_id: String,
    pub variable: String,
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl Profile {
    pub fn new(model_id: impl Into<String>, grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch(format!(
                "{} values for a {}-point grid",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid("profile values must be finite".into()));
        }
        Ok(Profile {
            model_id: model_id.into(),
            variable: grid.variable.clone(),
            grid,
            values,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CategoricalProfile {
    pub model_id: String,
    pub variable: String,
    pub categories: Vec<String>,
    pub values: Vec<f64>,
}

/// Evaluation grid over a numeric variable's observed domain.
pub fn make_grid(meta: &VariableMeta, m: usize, strategy: GridStrategy, data: &Dataset) -> Result<Grid> {
    if meta.kind != VariableKind::Numeric {
        return Err(Error::CategoricalVariable(meta.name.clone()));
    }
    if m < 2 {
        return Err(Error::InvalidGrid(format!("grid size {m} < 2")));
    }
    let [lo, hi] = meta.observed_domain.expect("numeric variables carry a domain");
    if lo == hi {
        return Err(Error::DegenerateDomain(meta.name.clone()));
    }
    let points = match strategy {
        GridStrategy::Uniform => {
            let step = (hi - lo) / (m - 1) as f64;
            let mut pts: Vec<f64> = (0..m).map(|i| lo + step * i as f64).collect();
            pts[m - 1] = hi;
            pts
        }
        GridStrategy::Quantile => {
            let j = data
                .variable_index(&meta.name)
                .ok_or_else(|| Error::UnknownVariable(meta.name.clone()))?;
            let mut col = data.column(j);
            col.sort_by(f64::total_cmp);
            let mut pts: Vec<f64> = (0..m)
                .map(|i| quantile_sorted(&col, i as f64 / (m - 1) as f64))
                .collect();
            pts.dedup();
            pts
        }
    };
    Ok(Grid {
        variable: meta.name.clone(),
        points,
        strategy,
    })
}

/// Linear-interpolation quantile of sorted data.
pub(crate) fn quantile_sorted(sorted: &[f64], prob: f64) -> f64 {
    let h = prob * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
    }
}

fn variable_position(model: &PredictiveModel, data: &Dataset, name: &str) -> Result<usize> {
    let j = data
        .variable_index(name)
        .ok_or_else(|| Error::UnknownVariable(name.to_string()))?;
    if model.feature_names.get(j).map(String::as_str) != Some(name) {
        return Err(Error::UnknownVariable(format!(
            "{name} (not a feature of model `{}` at the same position)",
            model.id
        )));
    }
    Ok(j)
}

fn averaged_replacement(model: &PredictiveModel, data: &Dataset, j: usize, values: &[f64]) -> Vec<f64> {
    let sorted = values.windows(2).all(|w| w[0] <= w[1]);
    let trees: Option<(&[Tree], Option<f64>)> = match &model.state {
        FittedState::Tree { tree } => Some((std::slice::from_ref(tree), None)),
        FittedState::Forest { trees } => Some((trees, None)),
        FittedState::Boosting { base_margin, trees } => Some((trees, Some(*base_margin))),
        FittedState::Logistic(_) => None,
    };
    match trees {
        Some((trees, margin)) if sorted => tree_replacement(model, data, j, values, trees, margin),
        _ => naive_replacement(model, data, j, values),
    }
}

fn naive_replacement(model: &PredictiveModel, data: &Dataset, j: usize, values: &[f64]) -> Vec<f64> {
    let n = data.n_rows() as f64;
    let mut scratch: Vec<Vec<f64>> = data.rows.clone();
    values
        .iter()
        .map(|&z| {
            let mut sum = 0.0;
            for row in scratch.iter_mut() {
                row[j] = z;
                sum += model.score(row);
            }
            sum / n
        })
        .collect()
}

/// Adds the leaf reached by every grid point in `lo..hi` to `acc`, walking the
/// tree once and splitting the (sorted) range at thresholds on feature `j`.
#[allow(clippy::too_many_arguments)]
fn add_leaves(tree: &Tree, at: usize, row: &[f64], j: usize, points: &[f64], lo: usize, hi: usize, acc: &mut [f64]) {
    if lo == hi {
        return;
    }
    match &tree.nodes[at] {
        Node::Leaf { value } => {
            for a in &mut acc[lo..hi] {
                *a += *value;
            }
        }
        Node::Split {
            feature,
            rule,
            left,
            right,
        } if *feature == j => match rule {
            SplitRule::Threshold(t) => {
                let mid = lo + points[lo..hi].partition_point(|&z| z <= *t);
                add_leaves(tree, *left, row, j, points, lo, mid, acc);
                add_leaves(tree, *right, row, j, points, mid, hi, acc);
            }
            SplitRule::Categories(set) => {
                for g in lo..hi {
                    let next = if set.contains(&(points[g] as u32)) { *left } else { *right };
                    add_leaves(tree, next, row, j, points, g, g + 1, acc);
                }
            }
        },
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
            add_leaves(tree, if go_left { *left } else { *right }, row, j, points, lo, hi, acc);
        }
    }
}

/// Same arithmetic as [`naive_replacement`] (trees summed in order per row,
/// rows summed in order per grid point), so results agree bit for bit.
fn tree_replacement(
    model: &PredictiveModel,
    data: &Dataset,
    j: usize,
    points: &[f64],
    trees: &[Tree],
    margin: Option<f64>,
) -> Vec<f64> {
    let m = points.len();
    let zero: f64 = std::iter::empty::<f64>().sum();
    let mut sums = vec![0.0; m];
    let mut acc = vec![0.0; m];
    for row in &data.rows {
        acc.fill(margin.unwrap_or(zero));
        for t in trees {
            add_leaves(t, 0, row, j, points, 0, m, &mut acc);
        }
        for (s, a) in sums.iter_mut().zip(&acc) {
            *s += match &model.state {
                FittedState::Tree { .. } => *a,
                FittedState::Forest { .. } => *a / trees.len() as f64,
                _ => sigmoid(*a),
            };
        }
    }
    let n = data.n_rows() as f64;
    sums.into_iter().map(|s| s / n).collect()
}

/// Partial dependence of `model` on the grid's variable, averaged over all rows of `data`.
pub fn pdp(model: &PredictiveModel, data: &Dataset, grid: &Grid) -> Result<Profile> {
    let j = variable_position(model, data, &grid.variable)?;
    if data.variables[j].kind != VariableKind::Numeric {
        return Err(Error::CategoricalVariable(grid.variable.clone()));
    }
    let values = averaged_replacement(model, data, j, &grid.points);
    Ok(Profile {
        model_id: model.id.clone(),
        variable: grid.variable.clone(),
        grid: grid.clone(),
        values,
    })
}

/// One averaged prediction per category.
pub fn pdp_categorical(model: &PredictiveModel, data: &Dataset, meta: &VariableMeta) -> Result<CategoricalProfile> {
    if meta.kind != VariableKind::Categorical {
        return Err(Error::NumericVariable(meta.name.clone()));
    }
    let j = variable_position(model, data, &meta.name)?;
    let codes: Vec<f64> = (0..meta.categories.len()).map(|c| c as f64).collect();
    Ok(CategoricalProfile {
        model_id: model.id.clone(),
        variable: meta.name.clone(),
        categories: meta.categories.clone(),
        values: averaged_replacement(model, data, j, &codes),
    })
}

/// Shared axis of one variable across a bundle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VariableAxis {
    Numeric { grid: Grid },
    Categorical { name: String, categories: Vec<String> },
}

impl VariableAxis {
    pub fn name(&self) -> &str {
        match self {
            VariableAxis::Numeric { grid } => &grid.variable,
            VariableAxis::Categorical { name, .. } => name,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            VariableAxis::Numeric { grid } => grid.len(),
            VariableAxis::Categorical { categories, .. } => categories.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Profiles of several models on shared per-variable axes.
#[derive(Clone, Debug, PartialEq)]
pub struct ProfileBundle {
    pub models: Vec<String>,
    pub axes: Vec<VariableAxis>,
    /// `values[model][variable]`; `None` marks a profile the source did not supply.
    pub values: Vec<Vec<Option<Vec<f64>>>>,
}

impl ProfileBundle {
    pub fn model_index(&self, id: &str) -> Option<usize> {
        self.models.iter().position(|m| m == id)
    }

    pub fn values_of(&self, model: usize, variable: usize) -> Option<&[f64]> {
        self.values[model][variable].as_deref()
    }

    /// Profile values with missing entries replaced by the constant-0 function.
    pub fn filled(&self, model: usize, variable: usize) -> std::borrow::Cow<'_, [f64]> {
        match &self.values[model][variable] {
            Some(v) => std::borrow::Cow::Borrowed(v.as_slice()),
            None => std::borrow::Cow::Owned(vec![0.0; self.axes[variable].len()]),
        }
    }

    /// `(model id, variable name)` pairs that will be zero-filled.
    pub fn missing(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        for (i, row) in self.values.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if v.is_none() {
                    out.push((self.models[i].clone(), self.axes[j].name().to_string()));
                }
            }
        }
        out
    }

    pub fn profile(&self, model: usize, variable: usize) -> Option<Profile> {
        match &self.axes[variable] {
            VariableAxis::Numeric { grid } => Some(Profile {
                model_id: self.models[model].clone(),
                variable: grid.variable.clone(),
                grid: grid.clone(),
                values: self.filled(model, variable).into_owned(),
            }),
            VariableAxis::Categorical { .. } => None,
        }
    }

    pub fn categorical_profile(&self, model: usize, variable: usize) -> Option<CategoricalProfile> {
        match &self.axes[variable] {
            VariableAxis::Categorical { name, categories } => Some(CategoricalProfile {
                model_id: self.models[model].clone(),
                variable: name.clone(),
                categories: categories.clone(),
                values: self.filled(model, variable).into_owned(),
            }),
            VariableAxis::Numeric { .. } => None,
        }
    }

    /// Bundle restricted to `ids`, in the given order.
    pub fn select(&self, ids: &[String]) -> Result<ProfileBundle> {
        let mut values = Vec::with_capacity(ids.len());
        for id in ids {
            let i = self
                .model_index(id)
                .ok_or_else(|| Error::BundleIncomplete(id.clone()))?;
            values.push(self.values[i].clone());
        }
        Ok(ProfileBundle {
            models: ids.to_vec(),
            axes: self.axes.clone(),
            values,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileOptions {
    pub grid_size: usize,
    pub strategy: GridStrategy,
    /// Subtract each profile's mean before comparison.
    pub center: bool,
    /// Cap on background rows, sampled without replacement with `seed`.
    pub background_rows: Option<usize>,
    pub seed: u64,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        ProfileOptions {
            grid_size: 101,
            strategy: GridStrategy::Uniform,
            center: false,
            background_rows: None,
            seed: 0,
        }
    }
}

/// Numeric variables with a single observed value have no grid and are left out.
pub fn profile_bundle(models: &[&PredictiveModel], data: &Dataset, opts: &ProfileOptions) -> Result<ProfileBundle> {
    for m in models {
        m.check_features(data)?;
    }
    let background = match opts.background_rows {
        Some(cap) if cap < data.n_rows() => {
            let mut idx = index::sample(&mut rng::stream(opts.seed, "background", 0), data.n_rows(), cap)
                .into_vec();
            idx.sort_unstable();
            data.subset(&idx)?
        }
        _ => data.clone(),
    };
    let mut axes = Vec::new();
    for meta in &data.variables {
        match meta.kind {
            VariableKind::Numeric => match make_grid(meta, opts.grid_size, opts.strategy, data) {
                Ok(grid) => axes.push(VariableAxis::Numeric { grid }),
                Err(Error::DegenerateDomain(_)) => continue,
                Err(e) => return Err(e),
            },
            VariableKind::Categorical => axes.push(VariableAxis::Categorical {
                name: meta.name.clone(),
                categories: meta.categories.clone(),
            }),
        }
    }
    let tasks: Vec<(usize, usize)> = (0..models.len())
        .flat_map(|i| (0..axes.len()).map(move |j| (i, j)))
        .collect();
    let profile_of = |i: usize, j: usize| -> Result<Vec<f64>> {
        let model = models[i];
        let mut values = match &axes[j] {
            VariableAxis::Numeric { grid } => pdp(model, &background, grid)?.values,
            VariableAxis::Categorical { name, .. } => {
                let meta = &data.variables[data.variable_index(name).unwrap()];
                pdp_categorical(model, &background, meta)?.values
            }
        };
        if opts.center {
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            values.iter_mut().for_each(|v| *v -= mean);
        }
        Ok(values)
    };
    let computed: Vec<Vec<f64>> = tasks
        .par_iter()
        .map(|&(i, j)| {
            profile_of(i, j)
                .context_with(|| format!("model `{}`, variable `{}`", models[i].id, axes[j].name()))
        })
        .collect::<Result<_>>()?;
    let mut values = vec![Vec::with_capacity(axes.len()); models.len()];
    for ((i, _), v) in tasks.into_iter().zip(computed) {
        values[i].push(Some(v));
    }
    Ok(ProfileBundle {
        models: models.iter().map(|m| m.id.clone()).collect(),
        axes,
        values,
    })
}

#[derive(Serialize, Deserialize)]
struct ExchangeModel {
    id: String,
    auc: f64,
}

#[derive(Serialize, Deserialize)]
struct ExchangeVariable {
    name: String,
    kind: VariableKind,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    grid: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    categories: Option<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
struct ExchangeProfile {
    model_id: String,
    variable: String,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ExchangeFile {
    format_version: u64,
    models: Vec<ExchangeModel>,
    variables: Vec<ExchangeVariable>,
    profiles: Vec<ExchangeProfile>,
}

/// Serializes a bundle with one performance score per model.
pub fn exchange_to_string(bundle: &ProfileBundle, scores: &[ModelScore]) -> Result<String> {
    let mut models = Vec::with_capacity(bundle.models.len());
    for id in &bundle.models {
        let s = scores
            .iter()
            .find(|s| &s.id == id)
            .ok_or_else(|| Error::SchemaMismatch(format!("no score for model `{id}`")))?;
        models.push(ExchangeModel {
            id: id.clone(),
            auc: s.auc,
        });
    }
    let variables = bundle
        .axes
        .iter()
        .map(|a| match a {
            VariableAxis::Numeric { grid } => ExchangeVariable {
                name: grid.variable.clone(),
                kind: VariableKind::Numeric,
                grid: Some(grid.points.clone()),
                categories: None,
            },
            VariableAxis::Categorical { name, categories } => ExchangeVariable {
                name: name.clone(),
                kind: VariableKind::Categorical,
                grid: None,
                categories: Some(categories.clone()),
            },
        })
        .collect();
    let mut profiles = Vec::new();
    for (i, id) in bundle.models.iter().enumerate() {
        for (j, axis) in bundle.axes.iter().enumerate() {
            if let Some(v) = &bundle.values[i][j] {
                profiles.push(ExchangeProfile {
                    model_id: id.clone(),
                    variable: axis.name().to_string(),
                    values: v.clone(),
                });
            }
        }
    }
    let file = ExchangeFile {
        format_version: EXCHANGE_FORMAT_VERSION,
        models,
        variables,
        profiles,
    };
    let mut s = serde_json::to_string_pretty(&file)?;
    s.push('\n');
    Ok(s)
}

pub fn write_exchange(bundle: &ProfileBundle, scores: &[ModelScore], path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, exchange_to_string(bundle, scores)?)?;
    Ok(())
}

pub(crate) fn looks_uniform(points: &[f64]) -> bool {
    let span = points[points.len() - 1] - points[0];
    let step = span / (points.len() - 1) as f64;
    points
        .windows(2)
        .all(|w| ((w[1] - w[0]) - step).abs() <= 1e-9 * span)
}

pub fn exchange_from_str(s: &str) -> Result<(ProfileBundle, Vec<ModelScore>)> {
    let file: ExchangeFile = serde_json::from_str(s).map_err(|e| Error::SchemaMismatch(e.to_string()))?;
    if file.format_version != EXCHANGE_FORMAT_VERSION {
        return Err(Error::SchemaMismatch(format!(
            "format_version {} (expected {EXCHANGE_FORMAT_VERSION})",
            file.format_version
        )));
    }
    let mut seen = BTreeSet::new();
    let mut scores = Vec::new();
    for m in &file.models {
        if !seen.insert(m.id.clone()) {
            return Err(Error::SchemaMismatch(format!("duplicate model `{}`", m.id)));
        }
        if !(0.0..=1.0).contains(&m.auc) {
            return Err(Error::SchemaMismatch(format!("AUC of `{}` outside [0, 1]", m.id)));
        }
        scores.push(ModelScore {
            id: m.id.clone(),
            auc: m.auc,
        });
    }

    let mut axes: Vec<VariableAxis> = Vec::new();
    for v in file.variables {
        let axis = match (v.kind, v.grid, v.categories) {
            (VariableKind::Numeric, Some(points), None) => {
                let strategy = if points.len() >= 2 && looks_uniform(&points) {
                    GridStrategy::Uniform
                } else {
                    GridStrategy::Quantile
                };
                VariableAxis::Numeric {
                    grid: Grid::new(v.name.clone(), points, strategy)?,
                }
            }
            (VariableKind::Categorical, None, Some(categories)) if !categories.is_empty() => {
                VariableAxis::Categorical {
                    name: v.name.clone(),
                    categories,
                }
            }
            _ => {
                return Err(Error::SchemaMismatch(format!(
                    "variable `{}` needs a grid (numeric) or categories (categorical)",
                    v.name
                )))
            }
        };
        match axes.iter().find(|a| a.name() == axis.name()) {
            Some(existing) if existing == &axis => {}
            Some(existing) => {
                let same_points = matches!((existing, &axis),
                    (VariableAxis::Numeric { grid: a }, VariableAxis::Numeric { grid: b }) if a.points == b.points);
                if same_points {
                    continue;
                }
                return Err(match axis {
                    VariableAxis::Numeric { .. } => Error::GridMismatch(v.name),
                    VariableAxis::Categorical { .. } => Error::CategoryMismatch(v.name),
                });
            }
            None => axes.push(axis),
        }
    }

    let model_pos: BTreeMap<&str, usize> = scores.iter().enumerate().map(|(i, s)| (s.id.as_str(), i)).collect();
    let mut values = vec![vec![None; axes.len()]; scores.len()];
    for p in file.profiles {
        let i = *model_pos
            .get(p.model_id.as_str())
            .ok_or_else(|| Error::SchemaMismatch(format!("profile for unknown model `{}`", p.model_id)))?;
        let j = axes
            .iter()
            .position(|a| a.name() == p.variable)
            .ok_or_else(|| Error::SchemaMismatch(format!("profile for unknown variable `{}`", p.variable)))?;
        if p.values.len() != axes[j].len() {
            return Err(Error::GridMismatch(p.variable));
        }
        if p.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::SchemaMismatch(format!(
                "non-finite value in profile `{}`/`{}`",
                p.model_id, p.variable
            )));
        }
        if values[i][j].is_some() {
            return Err(Error::SchemaMismatch(format!(
                "duplicate profile `{}`/`{}`",
                p.model_id, p.variable
            )));
        }
        values[i][j] = Some(p.values);
    }
    let bundle = ProfileBundle {
        models: scores.iter().map(|s| s.id.clone()).collect(),
        axes,
        values,
    };
    Ok((bundle, scores))
}

pub fn read_exchange(path: impl AsRef<Path>) -> Result<(ProfileBundle, Vec<ModelScore>)> {
    exchange_from_str(&std::fs::read_to_string(path)?)
}
