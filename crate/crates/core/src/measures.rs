//! Dissimilarity between profiles.
//!
//! Three measures compare two numeric profiles on a shared grid:
//!
//! * `l2_profiles` — `sqrt(∫ (g1 - g2)^2 dz)`;
//! * `l2_derivatives` — the same on first derivatives, blind to level shifts;
//! * `pdi` — the profile disparity index, the share of the domain on which the
//!   two derivative signs disagree. 0 means the same direction everywhere,
//!   1 means opposite (or flat vs. moving) everywhere.
//!
//! Integrals use the trapezoidal rule on the grid. Derivatives come from
//! local least-squares polynomial fits in an orthogonal basis
//! ([`gold_derivative`]). Categorical variables are compared as centred
//! vectors ([`categorical_disparity`]).

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, ResultExt};
use crate::profiles::{looks_uniform, CategoricalProfile, Profile, ProfileBundle, VariableAxis};

/// Window width `w` (odd) and polynomial degree `q` of the local derivative fit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldParams {
    pub window: usize,
    pub degree: usize,
}

impl Default for GoldParams {
    fn default() -> Self {
        GoldParams {
            window: 7,
            degree: 2,
        }
    }
}

impl GoldParams {
    pub fn validate(&self) -> Result<()> {
        if self.window < 3 || self.window % 2 == 0 || self.degree < 1 || self.degree >= self.window {
            return Err(Error::BadWindow {
                window: self.window,
                degree: self.degree,
            });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivativeVector {
    pub model_id: String,
    pub variable: String,
    pub values: Vec<f64>,
    pub params: GoldParams,
}

/// First derivative of `values` sampled at `points`.
///
/// At index `i` the `w` grid points nearest to `i` (shifted inwards at the
/// edges) are fitted by a degree-`q` polynomial in `(z - z_i)`. The basis is
/// built by the Stieltjes three-term recurrence, which is orthogonal over the
/// window points, and the returned value is the fitted polynomial's slope at
/// `z_i`. Polynomials of degree `<= q` are reproduced exactly.
pub fn gold_derivative_values(points: &[f64], values: &[f64], params: GoldParams) -> Result<Vec<f64>> {
    params.validate()?;
    let m = points.len();
    if values.len() != m {
        return Err(Error::LengthMismatch(format!("{} values on {m} points", values.len())));
    }
    let w = params.window;
    if m < w {
        return Err(Error::ProfileTooShort { len: m, window: w });
    }
    let q = params.degree;
    let half = w / 2;
    let mut out = Vec::with_capacity(m);
    let mut u = vec![0.0; w];
    let mut y = vec![0.0; w];
    let mut prev = vec![0.0; w];
    let mut cur = vec![0.0; w];
    let mut next = vec![0.0; w];
    for i in 0..m {
        let start = i.saturating_sub(half).min(m - w);
        let zi = points[i];
        let scale = (points[start + w - 1] - zi).abs().max((zi - points[start]).abs());
        for k in 0..w {
            u[k] = (points[start + k] - zi) / scale;
            // fitting y - y_i keeps flat stretches exactly flat
            y[k] = values[start + k] - values[i];
        }

        // phi_0 = 1
        cur.iter_mut().for_each(|v| *v = 1.0);
        prev.iter_mut().for_each(|v| *v = 0.0);
        let (mut at0, mut at0_prev) = (1.0, 0.0);
        let (mut d0, mut d0_prev) = (0.0, 0.0);
        let mut norm_prev = 1.0;
        let mut slope = 0.0;
        for k in 0..=q {
            let norm: f64 = cur.iter().map(|p| p * p).sum();
            let coef = cur.iter().zip(&y).map(|(p, v)| p * v).sum::<f64>() / norm;
            slope += coef * d0;
            if k == q {
                break;
            }
            let alpha = cur.iter().zip(&u).map(|(p, x)| x * p * p).sum::<f64>() / norm;
            let beta = if k == 0 { 0.0 } else { norm / norm_prev };
            for t in 0..w {
                next[t] = (u[t] - alpha) * cur[t] - beta * prev[t];
            }
            let at0_next = -alpha * at0 - beta * at0_prev;
            let d0_next = at0 - alpha * d0 - beta * d0_prev;
            std::mem::swap(&mut prev, &mut cur);
            std::mem::swap(&mut cur, &mut next);
            at0_prev = at0;
            at0 = at0_next;
            d0_prev = d0;
            d0 = d0_next;
            norm_prev = norm;
        }
        out.push(slope / scale);
    }
    Ok(out)
}

pub fn gold_derivative(profile: &Profile, params: GoldParams) -> Result<DerivativeVector> {
    let values = gold_derivative_values(&profile.grid.points, &profile.values, params)?;
    Ok(DerivativeVector {
        model_id: profile.model_id.clone(),
        variable: profile.variable.clone(),
        values,
        params,
    })
}

/// Dead zone `τ` for the sign comparison; `|v| <= τ` counts as flat.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "value", rename_all = "snake_case")]
pub enum SignTolerance {
    /// `c · (max g - min g) / (grid span)`, per profile.
    Relative(f64),
    Absolute(f64),
}

impl Default for SignTolerance {
    fn default() -> Self {
        SignTolerance::Relative(0.01)
    }
}

impl SignTolerance {
    pub fn validate(&self) -> Result<()> {
        let (SignTolerance::Relative(v) | SignTolerance::Absolute(v)) = *self;
        if v >= 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidTolerance(v))
        }
    }

    pub fn resolve(&self, values: &[f64], span: f64) -> f64 {
        match *self {
            SignTolerance::Absolute(t) => t,
            SignTolerance::Relative(c) => {
                let (lo, hi) = values
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
                c * (hi - lo) / span
            }
        }
    }
}

fn sign_with_tolerance(v: f64, tau: f64) -> i8 {
    if v.abs() <= tau {
        0
    } else if v > 0.0 {
        1
    } else {
        -1
    }
}

fn check_grids(p1: &Profile, p2: &Profile) -> Result<()> {
    if p1.grid.points != p2.grid.points || p1.values.len() != p2.values.len() {
        return Err(Error::GridMismatch(p1.variable.clone()));
    }
    Ok(())
}

fn trapezoid_l2(points: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..points.len() - 1 {
        let d0 = a[i] - b[i];
        let d1 = a[i + 1] - b[i + 1];
        acc += 0.5 * (points[i + 1] - points[i]) * (d0 * d0 + d1 * d1);
    }
    acc.sqrt()
}

/// Share of the domain where the sign patterns differ. Uniform grids count
/// disagreeing points over `m`; other grids weight each point by its
/// trapezoid cell so the result still integrates over the domain.
fn sign_disagreement(points: &[f64], d1: &[f64], tau1: f64, d2: &[f64], tau2: f64) -> f64 {
    let m = points.len();
    let differs = |i: usize| sign_with_tolerance(d1[i], tau1) != sign_with_tolerance(d2[i], tau2);
    if looks_uniform(points) {
        return (0..m).filter(|&i| differs(i)).count() as f64 / m as f64;
    }
    let span = points[m - 1] - points[0];
    let mut acc = 0.0;
    for i in 0..m {
        if differs(i) {
            let left = if i > 0 { points[i] - points[i - 1] } else { 0.0 };
            let right = if i + 1 < m { points[i + 1] - points[i] } else { 0.0 };
            acc += 0.5 * (left + right);
        }
    }
    (acc / span).clamp(0.0, 1.0)
}

pub fn l2_profiles(p1: &Profile, p2: &Profile) -> Result<f64> {
    check_grids(p1, p2)?;
    Ok(trapezoid_l2(&p1.grid.points, &p1.values, &p2.values))
}

pub fn l2_derivatives(p1: &Profile, p2: &Profile, params: GoldParams) -> Result<f64> {
    check_grids(p1, p2)?;
    let d1 = gold_derivative_values(&p1.grid.points, &p1.values, params)?;
    let d2 = gold_derivative_values(&p2.grid.points, &p2.values, params)?;
    Ok(trapezoid_l2(&p1.grid.points, &d1, &d2))
}

/// Profile disparity index, in `[0, 1]`.
pub fn pdi(p1: &Profile, p2: &Profile, params: GoldParams, tolerance: SignTolerance) -> Result<f64> {
    check_grids(p1, p2)?;
    tolerance.validate()?;
    let points = &p1.grid.points;
    let span = p1.grid.span();
    let d1 = gold_derivative_values(points, &p1.values, params)?;
    let d2 = gold_derivative_values(points, &p2.values, params)?;
    let t1 = tolerance.resolve(&p1.values, span);
    let t2 = tolerance.resolve(&p2.values, span);
    Ok(sign_disagreement(points, &d1, t1, &d2, t2))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CategoricalNorm {
    /// Euclidean distance divided by `sqrt(#categories)`.
    #[default]
    Normalized,
    Raw,
}

fn centered_distance(a: &[f64], b: &[f64], norm: CategoricalNorm) -> f64 {
    let k = a.len() as f64;
    let ma = a.iter().sum::<f64>() / k;
    let mb = b.iter().sum::<f64>() / k;
    let d = a
        .iter()
        .zip(b)
        .map(|(x, y)| ((x - ma) - (y - mb)).powi(2))
        .sum::<f64>()
        .sqrt();
    match norm {
        CategoricalNorm::Normalized => d / k.sqrt(),
        CategoricalNorm::Raw => d,
    }
}

/// Distance between mean-centred category vectors.
pub fn categorical_disparity(c1: &CategoricalProfile, c2: &CategoricalProfile, norm: CategoricalNorm) -> Result<f64> {
    if c1.categories != c2.categories || c1.values.len() != c2.values.len() {
        return Err(Error::CategoryMismatch(c1.variable.clone()));
    }
    Ok(centered_distance(&c1.values, &c2.values, norm))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureKind {
    Pdi,
    L2Profiles,
    L2Derivatives,
}

impl MeasureKind {
    pub const ALL: [MeasureKind; 3] = [MeasureKind::Pdi, MeasureKind::L2Profiles, MeasureKind::L2Derivatives];

    pub fn name(self) -> &'static str {
        match self {
            MeasureKind::Pdi => "pdi",
            MeasureKind::L2Profiles => "l2",
            MeasureKind::L2Derivatives => "l2der",
        }
    }

    fn needs_derivatives(self) -> bool {
        !matches!(self, MeasureKind::L2Profiles)
    }
}

impl std::str::FromStr for MeasureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pdi" => Ok(MeasureKind::Pdi),
            "l2" | "l2_profiles" => Ok(MeasureKind::L2Profiles),
            "l2der" | "l2_derivatives" => Ok(MeasureKind::L2Derivatives),
            other => Err(Error::InvalidConfig(format!("unknown measure `{other}`"))),
        }
    }
}

impl std::fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureConfig {
    pub kind: MeasureKind,
    #[serde(default)]
    pub gold: GoldParams,
    #[serde(default)]
    pub sign_tolerance: SignTolerance,
    #[serde(default)]
    pub categorical: CategoricalNorm,
}

impl MeasureConfig {
    pub fn new(kind: MeasureKind) -> Self {
        MeasureConfig {
            kind,
            gold: GoldParams::default(),
            sign_tolerance: SignTolerance::default(),
            categorical: CategoricalNorm::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.gold.validate()?;
        self.sign_tolerance.validate()
    }

    /// The configured numeric measure on one profile pair.
    pub fn compare(&self, p1: &Profile, p2: &Profile) -> Result<f64> {
        match self.kind {
            MeasureKind::Pdi => pdi(p1, p2, self.gold, self.sign_tolerance),
            MeasureKind::L2Profiles => l2_profiles(p1, p2),
            MeasureKind::L2Derivatives => l2_derivatives(p1, p2, self.gold),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisparityRecord {
    pub model_a: String,
    pub model_b: String,
    pub per_variable: BTreeMap<String, f64>,
    /// Mean over all variables.
    pub average: f64,
}

/// Symmetric matrix of averaged disparities with a zero diagonal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisparityMatrix {
    pub ids: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl DisparityMatrix {
    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|m| m == id)
    }

    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        Some(self.values[self.index_of(a)?][self.index_of(b)?])
    }

    /// Square CSV with model ids as header and first column.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("model");
        for id in &self.ids {
            s.push(',');
            s.push_str(id);
        }
        s.push('\n');
        for (id, row) in self.ids.iter().zip(&self.values) {
            s.push_str(id);
            for v in row {
                s.push(',');
                s.push_str(&v.to_string());
            }
            s.push('\n');
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisparityAnalysis {
    pub measure: MeasureConfig,
    pub variables: Vec<String>,
    pub matrix: DisparityMatrix,
    /// One record per unordered pair, `model_a` before `model_b` in matrix order.
    pub records: Vec<DisparityRecord>,
}

impl DisparityAnalysis {
    pub fn record(&self, a: &str, b: &str) -> Option<&DisparityRecord> {
        self.records
            .iter()
            .find(|r| (r.model_a == a && r.model_b == b) || (r.model_a == b && r.model_b == a))
    }

    /// Matrix of one variable's disparities.
    pub fn variable_matrix(&self, variable: &str) -> Option<DisparityMatrix> {
        if !self.variables.iter().any(|v| v == variable) {
            return None;
        }
        let n = self.matrix.ids.len();
        let mut values = vec![vec![0.0; n]; n];
        for r in &self.records {
            let i = self.matrix.index_of(&r.model_a)?;
            let j = self.matrix.index_of(&r.model_b)?;
            let v = r.per_variable[variable];
            values[i][j] = v;
            values[j][i] = v;
        }
        Some(DisparityMatrix {
            ids: self.matrix.ids.clone(),
            values,
        })
    }
}

/// Per-(model, variable) quantities reused across all pairs.
enum Prepared<'a> {
    Numeric {
        values: std::borrow::Cow<'a, [f64]>,
        derivative: Vec<f64>,
        tau: f64,
    },
    Categorical(std::borrow::Cow<'a, [f64]>),
}

/// Disparities for every model pair in `bundle`, per variable and averaged.
/// Profiles the bundle lacks are taken as the constant-0 function.
pub fn pairwise_disparity(bundle: &ProfileBundle, config: &MeasureConfig) -> Result<DisparityAnalysis> {
    config.validate()?;
    let p = bundle.axes.len();
    if p == 0 {
        return Err(Error::InvalidConfig("bundle has no variables".into()));
    }
    let n = bundle.models.len();
    let prepared: Vec<Vec<Prepared>> = (0..n)
        .into_par_iter()
        .map(|i| {
            bundle
                .axes
                .iter()
                .enumerate()
                .map(|(j, axis)| {
                    let values = bundle.filled(i, j);
                    match axis {
                        VariableAxis::Numeric { grid } => {
                            let derivative = if config.kind.needs_derivatives() {
                                gold_derivative_values(&grid.points, &values, config.gold)
                                    .context_with(|| format!("model `{}`, variable `{}`", bundle.models[i], grid.variable))?
                            } else {
                                Vec::new()
                            };
                            let tau = config.sign_tolerance.resolve(&values, grid.span());
                            Ok(Prepared::Numeric {
                                values,
                                derivative,
                                tau,
                            })
                        }
                        VariableAxis::Categorical { .. } => Ok(Prepared::Categorical(values)),
                    }
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    let per_pair: Vec<Vec<f64>> = pairs
        .par_iter()
        .map(|&(a, b)| {
            bundle
                .axes
                .iter()
                .enumerate()
                .map(|(j, axis)| match (axis, &prepared[a][j], &prepared[b][j]) {
                    (
                        VariableAxis::Numeric { grid },
                        Prepared::Numeric { values: va, derivative: da, tau: ta },
                        Prepared::Numeric { values: vb, derivative: db, tau: tb },
                    ) => match config.kind {
                        MeasureKind::Pdi => sign_disagreement(&grid.points, da, *ta, db, *tb),
                        MeasureKind::L2Profiles => trapezoid_l2(&grid.points, va, vb),
                        MeasureKind::L2Derivatives => trapezoid_l2(&grid.points, da, db),
                    },
                    (_, Prepared::Categorical(va), Prepared::Categorical(vb)) => {
                        centered_distance(va, vb, config.categorical)
                    }
                    _ => unreachable!("preparation follows the axis kind"),
                })
                .collect()
        })
        .collect();

    let mut matrix = vec![vec![0.0; n]; n];
    let mut records = Vec::with_capacity(pairs.len());
    for (&(a, b), values) in pairs.iter().zip(per_pair) {
        let average = values.iter().sum::<f64>() / p as f64;
        matrix[a][b] = average;
        matrix[b][a] = average;
        records.push(DisparityRecord {
            model_a: bundle.models[a].clone(),
            model_b: bundle.models[b].clone(),
            per_variable: bundle
                .axes
                .iter()
                .map(|ax| ax.name().to_string())
                .zip(values)
                .collect(),
            average,
        });
    }
    Ok(DisparityAnalysis {
        measure: *config,
        variables: bundle.axes.iter().map(|a| a.name().to_string()).collect(),
        matrix: DisparityMatrix {
            ids: bundle.models.clone(),
            values: matrix,
        },
        records,
    })
}
