//! Fixtures shared by the benchmarks.

use rashomon_core::{demo, Grid, GridStrategy, ModelScore, ProfileBundle, VariableAxis};

pub fn uniform_grid(variable: &str, m: usize, lo: f64, hi: f64) -> Grid {
    let mut pts: Vec<f64> = (0..m).map(|i| lo + (hi - lo) * i as f64 / (m - 1) as f64).collect();
    pts[m - 1] = hi;
    Grid::new(variable, pts, GridStrategy::Uniform).expect("increasing grid")
}

/// `n_models` smooth profiles on `n_vars` variables, deterministic in the indices.
pub fn synthetic_bundle(n_models: usize, n_vars: usize, m: usize) -> (ProfileBundle, Vec<ModelScore>) {
    let axes: Vec<VariableAxis> = (0..n_vars)
        .map(|j| VariableAxis::Numeric {
            grid: uniform_grid(&format!("v{j}"), m, -2.0, 2.0),
        })
        .collect();
    let values = (0..n_models)
        .map(|i| {
            axes.iter()
                .enumerate()
                .map(|(j, a)| {
                    let (f, p) = (0.5 + 0.37 * i as f64, 0.11 * j as f64);
                    match a {
                        VariableAxis::Numeric { grid } => {
                            Some(grid.points.iter().map(|&z| (f * z + p).sin() + 0.05 * i as f64 * z).collect())
                        }
                        VariableAxis::Categorical { .. } => None,
                    }
                })
                .collect()
        })
        .collect();
    let models: Vec<String> = (0..n_models).map(|i| format!("m{i:02}")).collect();
    let scores = models
        .iter()
        .enumerate()
        .map(|(i, id)| ModelScore {
            id: id.clone(),
            auc: 0.8 - 0.001 * i as f64,
        })
        .collect();
    (ProfileBundle { models, axes, values }, scores)
}

/// The demo cohort, as used by the end-to-end runs.
pub fn demo_data() -> rashomon_core::Dataset {
    demo::clinical_cohort(101, demo::DEMO_SEED).expect("demo cohort")
}
