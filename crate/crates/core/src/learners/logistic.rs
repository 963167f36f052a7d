//! L2-penalized logistic regression fitted by gradient descent with
//! backtracking line search. Numeric inputs are standardized internally and
//! categorical inputs are one-hot coded against their first category.

use serde::{Deserialize, Serialize};

use super::{sigmoid, LogisticParams};
use crate::data::{Dataset, VariableKind};
use crate::error::Result;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "encoding", rename_all = "snake_case")]
pub enum FeatureEncoding {
    Standardized { mean: f64, scale: f64 },
    OneHot { n_categories: usize },
}

impl FeatureEncoding {
    fn width(&self) -> usize {
        match self {
            FeatureEncoding::Standardized { .. } => 1,
            FeatureEncoding::OneHot { n_categories } => n_categories.saturating_sub(1),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogisticState {
    pub intercept: f64,
    /// One weight per encoded column.
    pub coefficients: Vec<f64>,
    pub encodings: Vec<FeatureEncoding>,
    pub iterations: usize,
}

impl LogisticState {
    fn encode_into(&self, row: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for (x, enc) in row.iter().zip(&self.encodings) {
            match enc {
                FeatureEncoding::Standardized { mean, scale } => out.push((x - mean) / scale),
                FeatureEncoding::OneHot { n_categories } => {
                    let code = *x as usize;
                    out.extend((1..*n_categories).map(|c| f64::from(u8::from(c == code))));
                }
            }
        }
    }

    pub fn margin(&self, row: &[f64]) -> f64 {
        let mut z = self.intercept;
        let mut col = 0;
        for (x, enc) in row.iter().zip(&self.encodings) {
            match enc {
                FeatureEncoding::Standardized { mean, scale } => {
                    z += self.coefficients[col] * ((x - mean) / scale);
                }
                FeatureEncoding::OneHot { n_categories } => {
                    let code = *x as usize;
                    if code >= 1 && code < *n_categories {
                        z += self.coefficients[col + code - 1];
                    }
                }
            }
            col += enc.width();
        }
        z
    }

    pub fn score(&self, row: &[f64]) -> f64 {
        sigmoid(self.margin(row))
    }

    /// Slope of the log-odds per raw unit of a numeric feature.
    pub fn raw_slope(&self, feature: usize) -> Option<f64> {
        let col: usize = self.encodings[..feature].iter().map(FeatureEncoding::width).sum();
        match self.encodings[feature] {
            FeatureEncoding::Standardized { scale, .. } => Some(self.coefficients[col] / scale),
            FeatureEncoding::OneHot { .. } => None,
        }
    }
}

fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

struct Problem {
    x: Vec<Vec<f64>>,
    y: Vec<f64>,
    l2: f64,
}

impl Problem {
    /// Objective and gradient; the intercept sits at index 0 and is not penalized.
    fn eval(&self, w: &[f64]) -> (f64, Vec<f64>) {
        let n = self.x.len() as f64;
        let mut loss = 0.0;
        let mut grad = vec![0.0; w.len()];
        for (xi, &yi) in self.x.iter().zip(&self.y) {
            let z = w[0] + xi.iter().zip(&w[1..]).map(|(a, b)| a * b).sum::<f64>();
            loss += softplus(z) - yi * z;
            let r = sigmoid(z) - yi;
            grad[0] += r;
            for (g, a) in grad[1..].iter_mut().zip(xi) {
                *g += r * a;
            }
        }
        loss /= n;
        for g in &mut grad {
            *g /= n;
        }
        let penalty: f64 = w[1..].iter().map(|v| v * v).sum();
        loss += 0.5 * self.l2 * penalty;
        for (g, v) in grad[1..].iter_mut().zip(&w[1..]) {
            *g += self.l2 * v;
        }
        (loss, grad)
    }
}

pub(super) fn fit(params: &LogisticParams, data: &Dataset) -> Result<LogisticState> {
    let encodings: Vec<FeatureEncoding> = data
        .variables
        .iter()
        .enumerate()
        .map(|(j, v)| match v.kind {
            VariableKind::Numeric => {
                let col = data.column(j);
                let n = col.len() as f64;
                let mean = col.iter().sum::<f64>() / n;
                let var = col.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
                let scale = if var > 0.0 { var.sqrt() } else { 1.0 };
                FeatureEncoding::Standardized { mean, scale }
            }
            VariableKind::Categorical => FeatureEncoding::OneHot {
                n_categories: v.categories.len(),
            },
        })
        .collect();
    let mut state = LogisticState {
        intercept: 0.0,
        coefficients: vec![0.0; encodings.iter().map(FeatureEncoding::width).sum()],
        encodings,
        iterations: 0,
    };
    let mut buf = Vec::new();
    let x: Vec<Vec<f64>> = data
        .rows
        .iter()
        .map(|r| {
            state.encode_into(r, &mut buf);
            buf.clone()
        })
        .collect();
    let problem = Problem {
        x,
        y: data.target.iter().map(|&y| f64::from(y)).collect(),
        l2: params.l2,
    };

    let mut w = vec![0.0; state.coefficients.len() + 1];
    let (mut f, mut g) = problem.eval(&w);
    let mut step = 1.0;
    let mut iterations = 0;
    while iterations < params.max_iter {
        let gnorm2: f64 = g.iter().map(|v| v * v).sum();
        if gnorm2.sqrt() < params.tolerance {
            break;
        }
        // Armijo backtracking, then let the step grow again.
        let mut accepted = false;
        while step > 1e-12 {
            let trial: Vec<f64> = w.iter().zip(&g).map(|(a, b)| a - step * b).collect();
            let (ft, gt) = problem.eval(&trial);
            if ft <= f - 0.5 * step * gnorm2 {
                w = trial;
                f = ft;
                g = gt;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        iterations += 1;
        if !accepted {
            break;
        }
        step *= 2.0;
    }
    state.intercept = w[0];
    state.coefficients = w[1..].to_vec();
    state.iterations = iterations;
    Ok(state)
}
