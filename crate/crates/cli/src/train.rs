use rashomon_core::data::{load_csv, split, Schema};
use rashomon_core::learners::GridSpec;
use rashomon_core::{demo, grid_search, save_models, Dataset, ModelRecord, SplitSpec};
use serde::Serialize;

use crate::config::TrainConfig;
use crate::error::CliResult;
use crate::io;

#[derive(Serialize)]
struct DatasetSummary {
    name: String,
    target: String,
    class_labels: [String; 2],
    rows: usize,
    variables: Vec<String>,
    class_counts: [usize; 2],
}

impl DatasetSummary {
    fn of(d: &Dataset) -> Self {
        DatasetSummary {
            name: d.name.clone(),
            target: d.target_name.clone(),
            class_labels: d.class_labels.clone(),
            rows: d.n_rows(),
            variables: d.feature_names(),
            class_counts: d.class_counts(),
        }
    }
}

#[derive(Serialize)]
struct TrainManifest<'a> {
    command: &'static str,
    config: &'a TrainConfig,
    dataset: DatasetSummary,
    train_rows: usize,
    test_rows: usize,
    n_models: usize,
    n_failures: usize,
}

pub fn load_dataset(cfg: &TrainConfig) -> CliResult<Dataset> {
    if cfg.demo {
        return Ok(demo::clinical_cohort(101, demo::DEMO_SEED)?);
    }
    let path = cfg.data.as_ref().expect("validated");
    let schema = Schema {
        positive_label: cfg.positive_label.clone(),
        ..Schema::default()
    };
    Ok(load_csv(path, cfg.target.as_deref().expect("validated"), &schema)?)
}

fn std_dev(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

fn metrics_rows(records: &[ModelRecord]) -> Vec<Vec<String>> {
    records
        .iter()
        .enumerate()
        .map(|(rank, r)| {
            let hp = r
                .model
                .spec
                .hyperparameters()
                .iter()
                .map(|(k, v)| format!("{k}={v}"))
                .collect::<Vec<_>>()
                .join(";");
            vec![
                (rank + 1).to_string(),
                r.model.id.clone(),
                r.model.family().id_prefix().to_string(),
                r.cv_auc_mean.to_string(),
                std_dev(&r.cv_auc_per_fold).to_string(),
                r.test_auc.map(|v| v.to_string()).unwrap_or_default(),
                hp,
            ]
        })
        .collect()
}

pub fn run(cfg: TrainConfig) -> CliResult<()> {
    let data = load_dataset(&cfg)?;
    let (train, test) = if cfg.test_fraction > 0.0 {
        let (a, b) = split(
            &data,
            SplitSpec {
                test_fraction: cfg.test_fraction,
                seed: cfg.seed,
            },
        )?;
        (a, Some(b))
    } else {
        (data.clone(), None)
    };
    let grid: &GridSpec = cfg.grid.as_ref().expect("resolved");
    let mut report = grid_search(grid, &train, cfg.folds)?;
    if let Some(test) = &test {
        for r in &mut report.records {
            r.evaluate_test(test)?;
        }
    }

    io::create_dir(&cfg.out)?;
    io::write(&cfg.out.join("models.json"), save_models(&report.records)?)?;
    io::write_csv(
        &cfg.out.join("metrics.csv"),
        &["rank", "model", "family", "cv_auc_mean", "cv_auc_sd", "test_auc", "hyperparameters"],
        metrics_rows(&report.records),
    )?;
    io::write_json(&cfg.out.join("failures.json"), &report.failures)?;
    data.save_csv(cfg.out.join("data.csv"))?;
    train.save_csv(cfg.out.join("train_data.csv"))?;
    if let Some(test) = &test {
        test.save_csv(cfg.out.join("test_data.csv"))?;
    }
    for f in &report.failures {
        eprintln!("warning: grid cell {} failed: {}", f.id, f.message);
    }
    io::write_json(
        &cfg.out.join("run_config.json"),
        &TrainManifest {
            command: "train",
            config: &cfg,
            dataset: DatasetSummary::of(&data),
            train_rows: train.n_rows(),
            test_rows: test.as_ref().map_or(0, Dataset::n_rows),
            n_models: report.records.len(),
            n_failures: report.failures.len(),
        },
    )?;
    if let Some(best) = report.records.first() {
        println!(
            "trained {} models ({} failed); best {} cv AUC {:.4}",
            report.records.len(),
            report.failures.len(),
            best.model.id,
            best.cv_auc_mean
        );
    }
    Ok(())
}
