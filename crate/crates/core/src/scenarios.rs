//! Synthetic profile pairs for comparing the disparity measures.
//!
//! Each of the eight scenarios produces pairs of profiles on a shared grid of
//! `m` uniform points spanning the sample range of 500 standard normal draws.
//! Shapes are written in the rescaled coordinate `s ∈ [-1, 1]` and all values
//! are clamped to `[-1, 1]`:
//!
//! 1. two increasing lines with different slopes;
//! 2. two increasing curves (cubic vs. saturating) that cross;
//! 3. one saturating curve and a noisy copy of it;
//! 4. two rising staircases with many small, wobbly steps (forest-like);
//! 5. a rising line vs. a unimodal hump;
//! 6. a rising line vs. a falling-then-flat curve;
//! 7. a coarse staircase vs. the line it follows (single shallow tree vs. linear model);
//! 8. a curve vs. its noisy negation.
//!
//! Generator constants are part of the suite's contract: changing them
//! changes every downstream number.

use std::collections::BTreeMap;

use rand::Rng as _;
use rand_distr::{Distribution, Normal, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{MeasureConfig, MeasureKind};
use crate::profiles::{quantile_sorted, Grid, GridStrategy, Profile};
use crate::rng::{self, derive_seed, Rng};

pub const DEFAULT_SIGMA: f64 = 0.005;
const RANGE_DRAWS: usize = 500;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub id: u32,
    pub n_pairs: usize,
    /// Standard deviation of the additive noise in scenarios 3 and 8.
    pub sigma: f64,
    pub seed: u64,
    pub grid_size: usize,
}

impl ScenarioSpec {
    pub fn new(id: u32, seed: u64) -> Self {
        ScenarioSpec {
            id,
            n_pairs: 100,
            sigma: DEFAULT_SIGMA,
            seed,
            grid_size: 101,
        }
    }

    /// All eight scenarios with default settings.
    pub fn all(seed: u64) -> Vec<ScenarioSpec> {
        (1..=8).map(|id| ScenarioSpec::new(id, seed)).collect()
    }

    fn validate(&self) -> Result<()> {
        if !(1..=8).contains(&self.id) {
            return Err(Error::UnknownScenario(self.id));
        }
        if self.grid_size < 2 || !(self.sigma >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "scenario {}: grid size >= 2 and sigma >= 0 required",
                self.id
            )));
        }
        Ok(())
    }
}

fn uniform(r: &mut Rng, lo: f64, hi: f64) -> f64 {
    r.random_range(lo..hi)
}

fn saturating(s: f64, a: f64, b: f64) -> f64 {
    a * (b * s).tanh() / b.tanh()
}

/// Piecewise-constant copy of `f` with pieces cut at `breaks` (sorted, inside (-1, 1)).
fn staircase(s: f64, breaks: &[f64], f: impl Fn(f64) -> f64) -> f64 {
    let k = breaks.partition_point(|&b| b <= s);
    let lo = if k == 0 { -1.0 } else { breaks[k - 1] };
    let hi = if k == breaks.len() { 1.0 } else { breaks[k] };
    f(0.5 * (lo + hi))
}

fn random_breaks(r: &mut Rng, count: usize) -> Vec<f64> {
    let mut b: Vec<f64> = (0..count).map(|_| uniform(r, -0.95, 0.95)).collect();
    b.sort_by(f64::total_cmp);
    b
}

type Shape = Box<dyn Fn(f64) -> f64>;

fn shapes(id: u32, r: &mut Rng) -> (Shape, Shape, bool) {
    // third element: whether the second profile receives noise
    match id {
        1 => {
            let (a1, a2) = (uniform(r, 0.3, 0.9), uniform(r, 0.3, 0.9));
            let (b1, b2) = (uniform(r, -0.1, 0.1), uniform(r, -0.1, 0.1));
            (Box::new(move |s| a1 * s + b1), Box::new(move |s| a2 * s + b2), false)
        }
        2 => {
            let (a1, c) = (uniform(r, 0.5, 0.9), uniform(r, 0.5, 1.5));
            let (a2, b) = (uniform(r, 0.5, 0.9), uniform(r, 1.0, 2.0));
            let shift = uniform(r, -0.1, 0.1);
            (
                Box::new(move |s| a1 * (s + c * s * s * s) / (1.0 + c) + shift),
                Box::new(move |s| saturating(s, a2, b) + shift),
                false,
            )
        }
        3 => {
            let (a, b, shift) = (uniform(r, 0.5, 0.9), uniform(r, 0.5, 1.5), uniform(r, -0.1, 0.1));
            let f = move |s| saturating(s, a, b) + shift;
            (Box::new(f), Box::new(f), true)
        }
        4 => {
            let one = |r: &mut Rng| -> Shape {
                let a = uniform(r, 0.4, 0.8);
                let amp = uniform(r, 0.03, 0.08);
                let freq = uniform(r, 6.0, 12.0);
                let phase = uniform(r, 0.0, std::f64::consts::TAU);
                let breaks = random_breaks(r, 24);
                Box::new(move |s| staircase(s, &breaks, |t| a * t + amp * (freq * t + phase).sin()))
            };
            let f1 = one(r);
            let f2 = one(r);
            (f1, f2, false)
        }
        5 => {
            let (a, b) = (uniform(r, 0.5, 0.9), uniform(r, -0.1, 0.1));
            let (h, c, w) = (uniform(r, 0.8, 1.4), uniform(r, -0.3, 0.3), uniform(r, 0.3, 0.5));
            (
                Box::new(move |s| a * s + b),
                Box::new(move |s| h * (-(s - c).powi(2) / (2.0 * w * w)).exp() - 0.5 * h),
                false,
            )
        }
        6 => {
            let (a, b) = (uniform(r, 0.5, 0.9), uniform(r, -0.1, 0.1));
            let (a2, knee) = (uniform(r, 0.4, 0.7), uniform(r, -0.2, 0.4));
            (
                Box::new(move |s| a * s + b),
                Box::new(move |s| a2 * (knee - s).max(0.0) - 0.5),
                false,
            )
        }
        7 => {
            let (a, b) = (uniform(r, 0.5, 0.9), uniform(r, -0.1, 0.1));
            let steps = r.random_range(3..=5usize);
            let breaks: Vec<f64> = (1..steps).map(|i| -1.0 + 2.0 * i as f64 / steps as f64).collect();
            (
                Box::new(move |s| a * s + b),
                Box::new(move |s| staircase(s, &breaks, |t| a * t + b)),
                false,
            )
        }
        8 => {
            let (a, b, shift) = (uniform(r, 0.5, 0.9), uniform(r, 0.5, 1.5), uniform(r, -0.1, 0.1));
            (
                Box::new(move |s| saturating(s, a, b) + shift),
                Box::new(move |s| -(saturating(s, a, b) + shift)),
                true,
            )
        }
        _ => unreachable!("validated"),
    }
}

/// The `pair_index`-th pair of scenario `spec.id`; deterministic in `(seed, id, pair_index)`.
pub fn generate_pair(spec: &ScenarioSpec, pair_index: usize) -> Result<(Profile, Profile)> {
    spec.validate()?;
    let mut r = rng::stream(
        derive_seed(spec.seed, "scenario", u64::from(spec.id)),
        "pair",
        pair_index as u64,
    );
    let mut draws: Vec<f64> = (0..RANGE_DRAWS).map(|_| StandardNormal.sample(&mut r)).collect();
    draws.sort_by(f64::total_cmp);
    let (lo, hi) = (draws[0], draws[RANGE_DRAWS - 1]);
    let m = spec.grid_size;
    let mut points: Vec<f64> = (0..m).map(|i| lo + (hi - lo) * i as f64 / (m - 1) as f64).collect();
    points[m - 1] = hi;
    let grid = Grid::new(format!("scenario{}", spec.id), points, GridStrategy::Uniform)?;

    let (f1, f2, noisy) = shapes(spec.id, &mut r);
    let noise = Normal::new(0.0, spec.sigma).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let clamp = |v: f64| v.clamp(-1.0, 1.0);
    let mut v1 = Vec::with_capacity(m);
    let mut v2 = Vec::with_capacity(m);
    for &z in &grid.points {
        let s = 2.0 * (z - lo) / (hi - lo) - 1.0;
        v1.push(clamp(f1(s)));
        let e = if noisy && spec.sigma > 0.0 {
            noise.sample(&mut r)
        } else {
            0.0
        };
        v2.push(clamp(f2(s) + e));
    }
    Ok((
        Profile::new(format!("s{}p{}a", spec.id, pair_index), grid.clone(), v1)?,
        Profile::new(format!("s{}p{}b", spec.id, pair_index), grid, v2)?,
    ))
}

/// Five-number summary plus mean.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Summary {
        let mut s = values.to_vec();
        s.sort_by(f64::total_cmp);
        Summary {
            min: s[0],
            q1: quantile_sorted(&s, 0.25),
            median: quantile_sorted(&s, 0.5),
            q3: quantile_sorted(&s, 0.75),
            max: s[s.len() - 1],
            mean: s.iter().sum::<f64>() / s.len() as f64,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub scenario: u32,
    pub values: BTreeMap<MeasureKind, Vec<f64>>,
    pub summary: BTreeMap<MeasureKind, Summary>,
}

/// Evaluates every measure on every pair of every scenario.
pub fn evaluate_scenarios(specs: &[ScenarioSpec], measures: &[MeasureConfig]) -> Result<Vec<ScenarioResult>> {
    if measures.is_empty() {
        return Err(Error::InvalidConfig("no measures requested".into()));
    }
    for s in specs {
        s.validate()?;
        if s.n_pairs == 0 {
            return Err(Error::InvalidConfig(format!("scenario {}: n_pairs must be > 0", s.id)));
        }
    }
    specs
        .iter()
        .map(|spec| {
            let per_pair: Vec<Vec<f64>> = (0..spec.n_pairs)
                .into_par_iter()
                .map(|i| {
                    let (a, b) = generate_pair(spec, i)?;
                    measures.iter().map(|m| m.compare(&a, &b)).collect::<Result<Vec<f64>>>()
                })
                .collect::<Result<_>>()?;
            let mut values = BTreeMap::new();
            for (k, m) in measures.iter().enumerate() {
                values.insert(m.kind, per_pair.iter().map(|row| row[k]).collect::<Vec<f64>>());
            }
            let summary = values.iter().map(|(k, v)| (*k, Summary::of(v))).collect();
            Ok(ScenarioResult {
                scenario: spec.id,
                values,
                summary,
            })
        })
        .collect()
}

/// Long format: `scenario,pair,measure,value`.
pub fn results_to_csv(results: &[ScenarioResult]) -> String {
    let mut s = String::from("scenario,pair,measure,value\n");
    for r in results {
        for (kind, vals) in &r.values {
            for (i, v) in vals.iter().enumerate() {
                s.push_str(&format!("{},{},{},{}\n", r.scenario, i, kind.name(), v));
            }
        }
    }
    s
}

/// Rank (1 = smallest median) of each scenario's median under `kind`.
pub fn median_ranks(results: &[ScenarioResult], kind: MeasureKind) -> BTreeMap<u32, usize> {
    let mut med: Vec<(u32, f64)> = results
        .iter()
        .filter_map(|r| r.summary.get(&kind).map(|s| (r.scenario, s.median)))
        .collect();
    med.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    med.into_iter().enumerate().map(|(i, (id, _))| (id, i + 1)).collect()
}
