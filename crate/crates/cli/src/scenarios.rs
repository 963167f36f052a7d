use std::collections::BTreeMap;

use rashomon_core::scenarios::{evaluate_scenarios, median_ranks, results_to_csv, ScenarioSpec, Summary};
use rashomon_core::{MeasureConfig, MeasureKind};
use serde::Serialize;

use crate::config::ScenarioConfig;
use crate::error::CliResult;
use crate::io;

#[derive(Serialize)]
struct ScenarioSummary {
    summaries: BTreeMap<u32, BTreeMap<&'static str, Summary>>,
    /// Rank of each scenario's median per measure, 1 = most similar.
    median_ranks: BTreeMap<&'static str, BTreeMap<u32, usize>>,
}

#[derive(Serialize)]
struct ScenarioManifest<'a> {
    command: &'static str,
    config: &'a ScenarioConfig,
}

pub fn run(cfg: ScenarioConfig) -> CliResult<()> {
    let specs: Vec<ScenarioSpec> = cfg
        .scenarios
        .iter()
        .map(|&id| ScenarioSpec {
            n_pairs: cfg.n_pairs,
            sigma: cfg.sigma,
            grid_size: cfg.grid_size,
            ..ScenarioSpec::new(id, cfg.seed)
        })
        .collect();
    let measures: Vec<MeasureConfig> = MeasureKind::ALL
        .iter()
        .map(|&kind| MeasureConfig {
            gold: cfg.gold,
            sign_tolerance: cfg.sign_tolerance,
            ..MeasureConfig::new(kind)
        })
        .collect();
    let results = evaluate_scenarios(&specs, &measures)?;

    let summary = ScenarioSummary {
        summaries: results
            .iter()
            .map(|r| (r.scenario, r.summary.iter().map(|(k, s)| (k.name(), *s)).collect()))
            .collect(),
        median_ranks: MeasureKind::ALL
            .iter()
            .map(|&k| (k.name(), median_ranks(&results, k)))
            .collect(),
    };

    io::create_dir(&cfg.out)?;
    io::write(&cfg.out.join("scenarios.csv"), results_to_csv(&results))?;
    io::write_json(&cfg.out.join("scenarios_summary.json"), &summary)?;
    io::write_json(
        &cfg.out.join("run_config.json"),
        &ScenarioManifest {
            command: "scenarios",
            config: &cfg,
        },
    )?;

    println!("{:>8} {:>10} {:>10} {:>10}", "scenario", "pdi", "l2", "l2der");
    for r in &results {
        let med = |k: MeasureKind| r.summary[&k].median;
        println!(
            "{:>8} {:>10.4} {:>10.4} {:>10.4}",
            r.scenario,
            med(MeasureKind::Pdi),
            med(MeasureKind::L2Profiles),
            med(MeasureKind::L2Derivatives)
        );
    }
    Ok(())
}
