mod common;

use proptest::prelude::*;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rashomon_core::data::VariableMeta;
use rashomon_core::learners::{
    BoostingParams, FamilyGrid, FittedState, ForestParams, LogisticParams, TreeParams,
};
use rashomon_core::{
    grid_search, load_models, save_models, train, Dataset, Error, GridSpec, ModelRecord, ModelSpec,
};

fn forest(n_trees: usize, depth: usize) -> ModelSpec {
    ModelSpec::RandomForest(ForestParams {
        n_trees,
        max_depth: depth,
        min_samples_leaf: 2,
        max_features: 0.5,
        bootstrap: true,
    })
}

fn boosting(n_trees: usize, rate: f64) -> ModelSpec {
    ModelSpec::GradientBoosting(BoostingParams {
        n_trees,
        learning_rate: rate,
        max_depth: 2,
        min_samples_leaf: 3,
        subsample: 0.8,
    })
}

fn all_specs() -> Vec<ModelSpec> {
    vec![
        ModelSpec::DecisionTree(TreeParams {
            max_depth: 4,
            min_samples_leaf: 2,
        }),
        forest(10, 4),
        boosting(20, 0.1),
        ModelSpec::LogisticRegression(LogisticParams::default()),
    ]
}

/// Newton–Raphson on (intercept, slope) in the raw coordinate.
fn newton_logistic(x: &[f64], y: &[u8]) -> (f64, f64) {
    let (mut a, mut b) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let (mut g0, mut g1, mut h00, mut h01, mut h11) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (&xi, &yi) in x.iter().zip(y) {
            let p = 1.0 / (1.0 + (-(a + b * xi)).exp());
            let r = f64::from(yi) - p;
            let w = p * (1.0 - p);
            g0 += r;
            g1 += r * xi;
            h00 += w;
            h01 += w * xi;
            h11 += w * xi * xi;
        }
        let det = h00 * h11 - h01 * h01;
        let da = (h11 * g0 - h01 * g1) / det;
        let db = (h00 * g1 - h01 * g0) / det;
        a += da;
        b += db;
        if da.abs() + db.abs() < 1e-14 {
            break;
        }
    }
    (a, b)
}

#[test]
fn logistic_slope_matches_independent_maximizer() {
    let mut r = common::rng(2024);
    let n = 2000;
    let x: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut r)).collect();
    let y: Vec<u8> = x
        .iter()
        .map(|&v| u8::from(r.random::<f64>() < 1.0 / (1.0 + (-2.0 * v).exp())))
        .collect();
    let data = Dataset::from_parts(
        "logit",
        "y",
        ["0".into(), "1".into()],
        vec![VariableMeta::numeric("x", 0.0, 0.0)],
        x.iter().map(|&v| vec![v]).collect(),
        y.clone(),
    )
    .unwrap();
    let model = train("lr", &ModelSpec::LogisticRegression(LogisticParams::default()), &data, 0).unwrap();
    let FittedState::Logistic(state) = &model.state else {
        panic!("logistic state expected")
    };
    let slope = state.raw_slope(0).unwrap();
    let (a, b) = newton_logistic(&x, &y);
    assert!((slope - b).abs() < 1e-3, "gd {slope} vs newton {b}");
    assert!((model.score(&[0.0]) - 1.0 / (1.0 + (-a).exp())).abs() < 1e-4);
    assert!((slope - 2.0).abs() < 0.3, "{slope}");
}

#[test]
fn boosting_with_vanishing_rate_is_the_prior() {
    let d = common::numeric_dataset(120, 3, 4);
    let spec = ModelSpec::GradientBoosting(BoostingParams {
        n_trees: 1,
        learning_rate: 1e-6,
        max_depth: 3,
        min_samples_leaf: 1,
        subsample: 1.0,
    });
    let m = train("g", &spec, &d, 1).unwrap();
    let prior = d.class_counts()[1] as f64 / d.n_rows() as f64;
    for row in &d.rows {
        assert!((m.score(row) - prior).abs() < 1e-3);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn scores_are_probabilities(seed in 0u64..1000) {
        let d = common::mixed_dataset(60, seed);
        let mut r = common::rng(seed);
        for spec in all_specs() {
            let m = train("m", &spec, &d, seed).unwrap();
            for _ in 0..50 {
                let row = vec![r.random_range(-3.0..3.0), r.random_range(-5.0..15.0), r.random_range(0..3) as f64];
                let s = m.score(&row);
                prop_assert!((0.0..=1.0).contains(&s));
            }
        }
    }

    #[test]
    fn store_round_trip_is_bit_exact(seed in 0u64..1000) {
        let d = common::mixed_dataset(50, seed);
        let records: Vec<ModelRecord> = all_specs()
            .iter()
            .enumerate()
            .map(|(i, spec)| ModelRecord {
                model: train(&format!("m{i}"), spec, &d, seed).unwrap(),
                cv_auc_mean: 0.5 + i as f64 / 10.0,
                cv_auc_per_fold: vec![0.1 * i as f64, 1.0 / 3.0],
                test_auc: if i % 2 == 0 { Some(2.0 / 3.0) } else { None },
            })
            .collect();
        let bytes = save_models(&records).unwrap();
        let back = load_models(&bytes).unwrap();
        prop_assert_eq!(&back, &records);
        let mut r = common::rng(seed ^ 1);
        for _ in 0..100 {
            let row = vec![r.random_range(-2.0..2.0), r.random_range(-1.0..11.0), r.random_range(0..3) as f64];
            for (a, b) in records.iter().zip(&back) {
                prop_assert_eq!(a.model.score(&row).to_bits(), b.model.score(&row).to_bits());
            }
        }
        // second save is byte-identical
        prop_assert_eq!(save_models(&back).unwrap(), bytes);
    }
}

#[test]
fn store_rejects_bad_payloads() {
    let d = common::numeric_dataset(40, 2, 1);
    let rec = ModelRecord {
        model: train("t", &all_specs()[0], &d, 0).unwrap(),
        cv_auc_mean: 0.7,
        cv_auc_per_fold: vec![0.7],
        test_auc: None,
    };
    let bytes = save_models(&[rec]).unwrap();
    let text = String::from_utf8(bytes.clone()).unwrap();
    let flipped = text.replacen("\"format_version\": 1", "\"format_version\": 2", 1);
    assert_ne!(flipped, text);
    assert!(matches!(
        load_models(flipped.as_bytes()),
        Err(Error::VersionMismatch { found: 2, expected: 1 })
    ));
    assert!(matches!(load_models(&bytes[..bytes.len() / 2]), Err(Error::CorruptPayload(_))));
    assert!(matches!(load_models(b"{}"), Err(Error::CorruptPayload(_))));
}

fn forest_grid(n_trees: Vec<usize>, depth: Vec<usize>) -> FamilyGrid {
    FamilyGrid::RandomForest {
        n_trees,
        max_depth: depth,
        min_samples_leaf: vec![2],
        max_features: vec![0.5],
        bootstrap: vec![true],
    }
}

#[test]
fn single_cell_grid() {
    let d = common::numeric_dataset(80, 3, 8);
    let grid = GridSpec {
        families: vec![forest_grid(vec![15], vec![3])],
        seed: 3,
        repeats: 1,
    };
    let rep = grid_search(&grid, &d, 5).unwrap();
    assert_eq!(rep.records.len(), 1);
    assert_eq!(rep.records[0].cv_auc_per_fold.len(), 5);
    assert_eq!(rep.records[0].id(), "rf1");
}

#[test]
fn identical_cells_score_identically() {
    let d = common::numeric_dataset(80, 3, 8);
    let grid = GridSpec {
        families: vec![forest_grid(vec![15, 15], vec![3])],
        seed: 3,
        repeats: 2,
    };
    let rep = grid_search(&grid, &d, 4).unwrap();
    assert_eq!(rep.records.len(), 2);
    assert_eq!(rep.records[0].cv_auc_mean, rep.records[1].cv_auc_mean);
    assert_eq!(rep.records[0].cv_auc_per_fold.len(), 8);
    // equal means: ordered by id
    assert_eq!(rep.records[0].id(), "rf1");
}

#[test]
fn failed_cells_are_reported() {
    let d = common::numeric_dataset(60, 2, 8);
    let grid = GridSpec {
        families: vec![forest_grid(vec![5, 0], vec![2])],
        seed: 1,
        repeats: 1,
    };
    let rep = grid_search(&grid, &d, 3).unwrap();
    assert_eq!(rep.records.len(), 1);
    assert_eq!(rep.failures.len(), 1);
    assert_eq!(rep.failures[0].id, "rf2");
    assert_eq!(rep.failures[0].kind, "InvalidHyperparameter");
}

#[test]
fn twelve_cells_on_five_hundred_rows() {
    let d = common::numeric_dataset(500, 6, 12);
    let grid = GridSpec {
        families: vec![
            forest_grid(vec![50], vec![3, 6, 9]),
            FamilyGrid::GradientBoosting {
                n_trees: vec![50],
                learning_rate: vec![0.05, 0.1],
                max_depth: vec![2, 3],
                min_samples_leaf: vec![3],
                subsample: vec![1.0],
            },
            FamilyGrid::DecisionTree {
                max_depth: vec![3, 5, 8],
                min_samples_leaf: vec![5],
            },
            FamilyGrid::LogisticRegression { l2: vec![0.0, 0.1] },
        ],
        seed: 5,
        repeats: 1,
    };
    let t = std::time::Instant::now();
    let rep = grid_search(&grid, &d, 5).unwrap();
    assert!(t.elapsed().as_secs_f64() < 60.0);
    assert_eq!(rep.records.len(), 12);
    assert!(rep.failures.is_empty());
    for w in rep.records.windows(2) {
        assert!(
            w[0].cv_auc_mean > w[1].cv_auc_mean
                || (w[0].cv_auc_mean == w[1].cv_auc_mean && w[0].id() < w[1].id())
        );
    }
    // deterministic under rerun
    let again = grid_search(&grid, &d, 5).unwrap();
    assert_eq!(save_models(&rep.records).unwrap(), save_models(&again.records).unwrap());
}
