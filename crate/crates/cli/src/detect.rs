use std::path::{Path, PathBuf};

use rashomon_core::data::{load_csv, Schema};
use rashomon_core::profiles::exchange_to_string;
use rashomon_core::{
    build_rashomon_set, load_models, profile_bundle, read_exchange, reference_model, run_detect,
    Dataset, DetectResult, MeasureConfig, ModelScore, ProfileBundle, ProfileOptions,
    RashomonConfig, ReferenceSelector, VariableAxis,
};
use serde::Serialize;

use crate::config::DetectConfig;
use crate::error::{CliError, CliResult};
use crate::io;

#[derive(Serialize)]
struct DetectManifest<'a> {
    command: &'static str,
    config: &'a DetectConfig,
    background_data: Option<PathBuf>,
    rashomon_size: usize,
    k: usize,
    warnings: &'a [String],
    zero_filled: &'a [(String, String)],
}

/// Training manifest fields needed to reload the background rows.
#[derive(serde::Deserialize)]
struct TrainManifest {
    dataset: TrainDataset,
}

#[derive(serde::Deserialize)]
struct TrainDataset {
    target: String,
    class_labels: [String; 2],
}

fn train_manifest(dir: &Path) -> Option<TrainManifest> {
    let text = std::fs::read_to_string(dir.join("run_config.json")).ok()?;
    serde_json::from_str(&text).ok()
}

fn background(cfg: &DetectConfig, models_path: &Path) -> CliResult<(PathBuf, Dataset)> {
    let dir = models_path.parent().unwrap_or(Path::new("."));
    let manifest = train_manifest(dir);
    let path = cfg.data.clone().unwrap_or_else(|| dir.join("data.csv"));
    let target = cfg
        .target
        .clone()
        .or_else(|| manifest.as_ref().map(|m| m.dataset.target.clone()))
        .ok_or_else(|| {
            CliError::Usage("--target is required when the training run config is unavailable".into())
        })?;
    let schema = Schema {
        positive_label: manifest.map(|m| m.dataset.class_labels[1].clone()),
        ..Schema::default()
    };
    let data = load_csv(&path, &target, &schema)?;
    Ok((path, data))
}

fn rashomon_config(cfg: &DetectConfig) -> RashomonConfig {
    RashomonConfig {
        epsilon: cfg.epsilon,
        k: cfg.k,
        measure: MeasureConfig {
            gold: cfg.gold,
            sign_tolerance: cfg.sign_tolerance,
            ..MeasureConfig::new(cfg.measure)
        },
        grid_size: cfg.grid_size,
        reference: cfg
            .reference
            .clone()
            .map_or(ReferenceSelector::BestByMetric, ReferenceSelector::Explicit),
        variant: cfg.variant,
        metric: cfg.metric,
    }
}

/// Profiles for the Rashomon members only; the rest of the population is never evaluated.
fn profiles_from_models(
    cfg: &DetectConfig,
    rc: &RashomonConfig,
    models_path: &Path,
) -> CliResult<(ProfileBundle, Vec<ModelScore>, PathBuf)> {
    let bytes = std::fs::read(models_path).map_err(|source| CliError::File {
        path: models_path.to_path_buf(),
        source,
    })?;
    let records = load_models(&bytes)?;
    let scores = cfg.metric.scores(&records)?;
    rc.validate()?;
    let reference = reference_model(&scores, &rc.reference)?;
    let members = build_rashomon_set(&scores, &reference, rc.epsilon)?;
    let (data_path, data) = background(cfg, models_path)?;
    let models: Vec<_> = records
        .iter()
        .filter(|r| members.binary_search(&r.model.id).is_ok())
        .map(|r| &r.model)
        .collect();
    let opts = ProfileOptions {
        grid_size: cfg.grid_size,
        strategy: cfg.grid_strategy,
        center: cfg.center_profiles,
        background_rows: cfg.background_rows,
        seed: cfg.seed,
    };
    let bundle = profile_bundle(&models, &data, &opts)?;
    Ok((bundle, scores, data_path))
}

fn fmt(v: f64) -> String {
    v.to_string()
}

fn profile_rows(bundle: &ProfileBundle, result: &DetectResult) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for (i, model) in bundle.models.iter().enumerate() {
        let selected = result.selected.contains(model);
        for (j, axis) in bundle.axes.iter().enumerate() {
            let values = bundle.filled(i, j);
            let labels: Vec<String> = match axis {
                VariableAxis::Numeric { grid } => grid.points.iter().copied().map(fmt).collect(),
                VariableAxis::Categorical { categories, .. } => categories.clone(),
            };
            for (z, v) in labels.into_iter().zip(values.iter()) {
                rows.push(vec![
                    model.clone(),
                    axis.name().to_string(),
                    z,
                    fmt(*v),
                    selected.to_string(),
                ]);
            }
        }
    }
    rows
}

/// Variable × partner disparities for one selected model.
fn heatmap_rows(result: &DetectResult, model: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let partners: Vec<&String> = result.rashomon_ids.iter().filter(|m| *m != model).collect();
    let mut header = vec!["variable".to_string()];
    header.extend(partners.iter().map(|m| m.to_string()));
    let rows = result
        .analysis
        .variables
        .iter()
        .map(|var| {
            let mut row = vec![var.clone()];
            for p in &partners {
                let v = result
                    .analysis
                    .record(model, p)
                    .map_or(0.0, |r| r.per_variable[var]);
                row.push(fmt(v));
            }
            row
        })
        .collect();
    (header, rows)
}

pub fn write_outputs(
    cfg: &DetectConfig,
    bundle: &ProfileBundle,
    scores: &[ModelScore],
    result: &DetectResult,
    data_path: Option<PathBuf>,
    warnings: &[String],
) -> CliResult<()> {
    let out = &cfg.out;
    io::create_dir(out)?;
    io::write_json(&out.join("detect.json"), result)?;
    io::write(&out.join("matrix.csv"), result.analysis.matrix.to_csv())?;

    let var_dir = out.join("variables");
    io::create_dir(&var_dir)?;
    for var in &result.analysis.variables {
        let m = result.analysis.variable_matrix(var).expect("listed variable");
        io::write(&var_dir.join(format!("{}.csv", io::slug(var))), m.to_csv())?;
    }
    for model in &result.selected {
        let (header, rows) = heatmap_rows(result, model);
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        io::write_csv(&out.join(format!("heatmap_{}.csv", io::slug(model))), &header, rows)?;
    }
    io::write_csv(
        &out.join("profiles.csv"),
        &["model", "variable", "z", "value", "selected"],
        profile_rows(bundle, result),
    )?;
    io::write_csv(
        &out.join("summary.csv"),
        &["model_a", "model_b", "value"],
        result
            .pair_summary()
            .into_iter()
            .map(|p| vec![p.model_a, p.model_b, fmt(p.value)]),
    )?;
    let member_scores: Vec<ModelScore> = scores
        .iter()
        .filter(|s| bundle.model_index(&s.id).is_some())
        .cloned()
        .collect();
    io::write(&out.join("profiles.json"), exchange_to_string(bundle, &member_scores)?)?;
    io::write_json(
        &out.join("run_config.json"),
        &DetectManifest {
            command: "detect",
            config: cfg,
            background_data: data_path,
            rashomon_size: result.rashomon_ids.len(),
            k: result.k,
            warnings,
            zero_filled: &result.zero_filled,
        },
    )
}

pub fn run(cfg: DetectConfig) -> CliResult<()> {
    let rc = rashomon_config(&cfg);
    let (bundle, scores, data_path) = match (&cfg.models, &cfg.profiles) {
        (Some(models), _) => {
            let (b, s, p) = profiles_from_models(&cfg, &rc, models)?;
            (b, s, Some(p))
        }
        (None, Some(profiles)) => {
            let (b, s) = read_exchange(profiles)?;
            (b, s, None)
        }
        (None, None) => unreachable!("validated"),
    };
    let result = run_detect(&scores, &bundle, &rc)?;

    let mut warnings = Vec::new();
    if result.k_exceeds_set {
        warnings.push(format!(
            "k = {} >= |R| = {}; returning the whole Rashomon set",
            result.k,
            result.rashomon_ids.len()
        ));
    }
    if !result.zero_filled.is_empty() {
        warnings.push(format!(
            "{} missing profiles treated as the constant-0 function",
            result.zero_filled.len()
        ));
    }
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    write_outputs(&cfg, &bundle, &scores, &result, data_path, &warnings)?;
    println!(
        "reference {} (AUC {:.4}); |R| = {}; selected {}",
        result.reference,
        result.reference_auc,
        result.rashomon_ids.len(),
        result.selected.join(", ")
    );
    Ok(())
}
