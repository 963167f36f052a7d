#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rashomon_core::data::VariableMeta;
use rashomon_core::{Dataset, Grid, GridStrategy, PredictiveModel, Profile};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Numeric features in [-2, 2]; label drawn from a logistic model on the first two.
pub fn numeric_dataset(n: usize, p: usize, seed: u64) -> Dataset {
    let mut r = rng(seed);
    loop {
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..p).map(|_| r.random_range(-2.0..2.0)).collect())
            .collect();
        let target: Vec<u8> = rows
            .iter()
            .map(|row| {
                let z = 1.5 * row[0] - row[1.min(p - 1)] * 0.8;
                u8::from(r.random::<f64>() < 1.0 / (1.0 + (-z).exp()))
            })
            .collect();
        let pos = target.iter().filter(|&&y| y == 1).count();
        if pos < 5 || n - pos < 5 {
            continue;
        }
        let vars = (0..p).map(|j| VariableMeta::numeric(format!("x{j}"), 0.0, 0.0)).collect();
        return Dataset::from_parts("synthetic", "y", ["0".into(), "1".into()], vars, rows, target)
            .unwrap();
    }
}

/// Two numeric features plus one three-level categorical.
pub fn mixed_dataset(n: usize, seed: u64) -> Dataset {
    let mut r = rng(seed);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            vec![
                r.random_range(-1.0..1.0),
                r.random_range(0.0..10.0),
                (i % 3) as f64,
            ]
        })
        .collect();
    let target: Vec<u8> = rows
        .iter()
        .enumerate()
        .map(|(i, row)| {
            if i < 2 {
                i as u8
            } else {
                u8::from(row[0] + 0.5 * (row[2] - 1.0) + r.random_range(-0.5..0.5) > 0.0)
            }
        })
        .collect();
    let vars = vec![
        VariableMeta::numeric("a", 0.0, 0.0),
        VariableMeta::numeric("b", 0.0, 0.0),
        VariableMeta::categorical("c", vec!["hi".into(), "lo".into(), "mid".into()]),
    ];
    Dataset::from_parts("mixed", "y", ["no".into(), "yes".into()], vars, rows, target).unwrap()
}

/// Plain double loop: for every grid value, average the scores of all rows
/// with the variable overwritten.
pub fn naive_pdp(model: &PredictiveModel, data: &Dataset, j: usize, values: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    for &g in values {
        let mut total = 0.0;
        for row in &data.rows {
            let mut x = row.clone();
            x[j] = g;
            total += model.score(&x);
        }
        out.push(total / data.rows.len() as f64);
    }
    out
}

/// Exhaustive pairwise concordance.
pub fn naive_auc(scores: &[f64], labels: &[u8]) -> f64 {
    let mut twice = 0u64;
    let (mut n1, mut n0) = (0u64, 0u64);
    for (i, &yi) in labels.iter().enumerate() {
        if yi == 1 {
            n1 += 1;
        } else {
            n0 += 1;
        }
        if yi != 1 {
            continue;
        }
        for (j, &yj) in labels.iter().enumerate() {
            if yj == 0 {
                if scores[i] > scores[j] {
                    twice += 2;
                } else if scores[i] == scores[j] {
                    twice += 1;
                }
            }
        }
    }
    twice as f64 / (2 * n1 * n0) as f64
}

pub fn uniform_grid(m: usize, lo: f64, hi: f64) -> Grid {
    let mut pts: Vec<f64> = (0..m).map(|i| lo + (hi - lo) * i as f64 / (m - 1) as f64).collect();
    pts[m - 1] = hi;
    Grid::new("x", pts, GridStrategy::Uniform).unwrap()
}

pub fn profile_of(id: &str, grid: &Grid, f: impl Fn(f64) -> f64) -> Profile {
    Profile::new(id, grid.clone(), grid.points.iter().map(|&z| f(z)).collect()).unwrap()
}
