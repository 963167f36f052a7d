//! Seeded synthetic cohort shaped like a small intensive-care study:
//! 13 laboratory/clinical covariates and a binary survival outcome.
//!
//! The outcome depends on a platelet plateau, a coagulation threshold, age,
//! ferritin and haemoglobin, so that tree ensembles and boosted models end up
//! with visibly different partial-dependence shapes.

use rand_distr::{Distribution, LogNormal, Normal};

use crate::data::{Dataset, VariableMeta};
use crate::error::Result;
use crate::rng;

/// Seed of the shipped demo CSV.
pub const DEMO_SEED: u64 = 7;

pub const DEMO_VARIABLES: [&str; 13] = [
    "ALT",
    "ANC",
    "APTT",
    "AST",
    "Age",
    "Bilirubin",
    "CRP",
    "Ferritin",
    "Fibronectin",
    "Fluid",
    "Hb",
    "PLT",
    "RBC",
];

fn round_to(v: f64, decimals: i32) -> f64 {
    let f = 10f64.powi(decimals);
    (v * f).round() / f
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// `n` rows drawn deterministically from `seed`. Target `survival`: 1 = survived.
pub fn clinical_cohort(n: usize, seed: u64) -> Result<Dataset> {
    let mut r = rng::stream(seed, "demo", 0);
    let normal = |m: f64, s: f64| Normal::new(m, s).expect("valid normal");
    let lognormal = |m: f64, s: f64| LogNormal::new(m.ln(), s).expect("valid lognormal");

    let mut rows = Vec::with_capacity(n);
    let mut target = Vec::with_capacity(n);
    for _ in 0..n {
        let alt = round_to(lognormal(80.0, 0.8).sample(&mut r), 0);
        let anc = round_to(lognormal(3.0, 0.7).sample(&mut r), 2);
        let aptt = round_to(normal(38.0, 8.0).sample(&mut r).clamp(22.0, 90.0), 1);
        let ast = round_to(lognormal(100.0, 0.8).sample(&mut r), 0);
        let age = round_to(normal(50.0, 15.0).sample(&mut r).clamp(18.0, 88.0), 0);
        let bili = round_to(lognormal(1.5, 0.8).sample(&mut r), 2);
        let crp = round_to(lognormal(60.0, 0.9).sample(&mut r), 1);
        let ferritin = round_to(lognormal(5000.0, 1.2).sample(&mut r), 0);
        let fibronectin = round_to(normal(250.0, 80.0).sample(&mut r).clamp(40.0, 600.0), 0);
        let fluid = round_to(normal(1.0, 1.5).sample(&mut r), 2);
        let hb = round_to(normal(9.5, 1.8).sample(&mut r).clamp(4.0, 16.0), 1);
        let plt = round_to(lognormal(60.0, 0.9).sample(&mut r), 0);
        let rbc = round_to(normal(3.3, 0.6).sample(&mut r).clamp(1.5, 5.5), 2);

        let logit = 0.6 + 1.4 * ((plt - 30.0) / 20.0).tanh()
            - 1.5 * sigmoid((aptt - 45.0) / 3.0)
            - 0.03 * (age - 50.0)
            - 0.5 * (ferritin / 5000.0).ln()
            - 0.3 * bili.ln()
            + 0.25 * (hb - 9.5)
            - 0.2 * fluid;
        let u: f64 = rand::Rng::random(&mut r);
        target.push(u8::from(u < sigmoid(logit)));
        rows.push(vec![
            alt, anc, aptt, ast, age, bili, crp, ferritin, fibronectin, fluid, hb, plt, rbc,
        ]);
    }
    let variables = DEMO_VARIABLES
        .iter()
        .map(|name| VariableMeta::numeric(*name, 0.0, 0.0))
        .collect();
    Dataset::from_parts(
        "clinical_demo",
        "survival",
        ["died".to_string(), "survived".to_string()],
        variables,
        rows,
        target,
    )
}
