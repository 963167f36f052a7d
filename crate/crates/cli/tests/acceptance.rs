//! Acceptance suite: one PASS/FAIL line per criterion, each under a wall-clock
//! budget. Exits nonzero if anything fails.
//!
//! Set `RASHOMON_BLESS=1` to rewrite the golden files of the end-to-end smoke run.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rashomon_core::data::VariableMeta;
use rashomon_core::learners::{BoostingParams, ForestParams, LogisticParams, TreeParams};
use rashomon_core::measures::gold_derivative_values;
use rashomon_core::rashomon::select_from_matrix;
use rashomon_core::scenarios::{evaluate_scenarios, median_ranks, ScenarioSpec};
use rashomon_core::{
    auc, l2_profiles, pdi, pdp, rashomon_detect, rashomon_detect_greedy, run_detect, train,
    Dataset, DisparityMatrix, GoldParams, Grid, GridStrategy, MeasureConfig,
    MeasureKind, ModelScore, ModelSpec, PredictiveModel, Profile, ProfileBundle, RashomonConfig,
    SignTolerance, Variant, VariableAxis,
};

type Check = Result<String, String>;
type Shape = (&'static str, Box<dyn Fn(f64) -> f64>);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn uniform_grid(m: usize, lo: f64, hi: f64) -> Grid {
    let mut pts: Vec<f64> = (0..m).map(|i| lo + (hi - lo) * i as f64 / (m - 1) as f64).collect();
    pts[m - 1] = hi;
    Grid::new("x", pts, GridStrategy::Uniform).unwrap()
}

fn profile(id: &str, grid: &Grid, values: Vec<f64>) -> Profile {
    Profile::new(id, grid.clone(), values).unwrap()
}

/// Random smooth-ish profile: a few sinusoids plus a trend, occasionally a
/// random walk or a constant.
fn random_profile(r: &mut ChaCha8Rng, grid: &Grid) -> Vec<f64> {
    match r.random_range(0..10) {
        0 => vec![r.random_range(-1.0..1.0); grid.len()],
        1 => {
            let mut v = 0.0;
            grid.points
                .iter()
                .map(|_| {
                    v += r.random_range(-0.1..0.1);
                    v
                })
                .collect()
        }
        _ => {
            let terms: Vec<(f64, f64, f64)> = (0..3)
                .map(|_| (r.random_range(-1.0..1.0), r.random_range(0.2..4.0), r.random_range(0.0..6.3)))
                .collect();
            let slope = r.random_range(-0.5..0.5);
            grid.points
                .iter()
                .map(|&z| slope * z + terms.iter().map(|(a, f, p)| a * (f * z + p).sin()).sum::<f64>())
                .collect()
        }
    }
}

// ---------------------------------------------------------------- criteria

fn pdi_bounds() -> Check {
    let mut r = rng(1);
    let grid = uniform_grid(101, -3.0, 3.0);
    let (g, tol) = (GoldParams::default(), SignTolerance::default());
    for i in 0..10_000 {
        let a = profile("a", &grid, random_profile(&mut r, &grid));
        let b = profile("b", &grid, random_profile(&mut r, &grid));
        let ab = pdi(&a, &b, g, tol).map_err(|e| e.to_string())?;
        let ba = pdi(&b, &a, g, tol).map_err(|e| e.to_string())?;
        let aa = pdi(&a, &a, g, tol).map_err(|e| e.to_string())?;
        ensure((0.0..=1.0).contains(&ab), || format!("pair {i}: pdi {ab} outside [0,1]"))?;
        ensure(ab.to_bits() == ba.to_bits(), || format!("pair {i}: asymmetric {ab} vs {ba}"))?;
        ensure(aa == 0.0, || format!("pair {i}: pdi(p,p) = {aa}"))?;
    }
    Ok("10000 pairs".into())
}

fn scenario_orderings() -> Check {
    let measures: Vec<MeasureConfig> = MeasureKind::ALL.iter().map(|&k| MeasureConfig::new(k)).collect();
    let res = evaluate_scenarios(&ScenarioSpec::all(42), &measures).map_err(|e| e.to_string())?;
    let med = |s: u32, k: MeasureKind| res[s as usize - 1].summary[&k].median;
    let (p, d) = (MeasureKind::Pdi, MeasureKind::L2Derivatives);
    ensure(med(1, p) < 0.05, || format!("S1 pdi median {}", med(1, p)))?;
    ensure(med(2, p) < 0.05, || format!("S2 pdi median {}", med(2, p)))?;
    ensure(med(3, p) < 0.1, || format!("S3 pdi median {}", med(3, p)))?;
    ensure(med(8, p) > 0.9, || format!("S8 pdi median {}", med(8, p)))?;
    ensure(med(1, d) > med(3, d), || format!("l2der S1 {} <= S3 {}", med(1, d), med(3, d)))?;
    let l2 = median_ranks(&res, MeasureKind::L2Profiles)[&7];
    let pr = median_ranks(&res, p)[&7];
    ensure(l2 < pr, || format!("S7 rank l2 {l2} vs pdi {pr}"))?;
    Ok(format!("S7 rank l2 {l2} < pdi {pr}; S8 pdi median {:.3}", med(8, p)))
}

fn random_dataset(r: &mut ChaCha8Rng, n: usize, p: usize) -> Dataset {
    loop {
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..p).map(|_| (r.random_range(-2.0..2.0) * 8.0f64).round() / 8.0).collect())
            .collect();
        let target: Vec<u8> = rows
            .iter()
            .map(|x| u8::from(r.random::<f64>() < 1.0 / (1.0 + (-(1.5 * x[0] - x[1])).exp())))
            .collect();
        let pos = target.iter().filter(|&&y| y == 1).count();
        if pos < 5 || n - pos < 5 {
            continue;
        }
        let vars = (0..p).map(|j| VariableMeta::numeric(format!("x{j}"), 0.0, 0.0)).collect();
        return Dataset::from_parts("acc", "y", ["0".into(), "1".into()], vars, rows, target).unwrap();
    }
}

fn naive_pdp(model: &PredictiveModel, data: &Dataset, j: usize, values: &[f64]) -> Vec<f64> {
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

fn random_spec(r: &mut ChaCha8Rng, i: usize) -> ModelSpec {
    match i % 4 {
        0 => ModelSpec::DecisionTree(TreeParams {
            max_depth: r.random_range(1..6),
            min_samples_leaf: r.random_range(1..6),
        }),
        1 => ModelSpec::RandomForest(ForestParams {
            n_trees: r.random_range(3..15),
            max_depth: r.random_range(2..6),
            min_samples_leaf: 2,
            max_features: 0.6,
            bootstrap: true,
        }),
        2 => ModelSpec::GradientBoosting(BoostingParams {
            n_trees: r.random_range(5..20),
            learning_rate: 0.1,
            max_depth: 2,
            min_samples_leaf: 3,
            subsample: 1.0,
        }),
        _ => ModelSpec::LogisticRegression(LogisticParams {
            l2: r.random_range(0.0..1.0),
            ..LogisticParams::default()
        }),
    }
}

fn pdp_oracle() -> Check {
    let mut r = rng(3);
    for i in 0..20 {
        let n = r.random_range(30..=100);
        let data = random_dataset(&mut r, n, 3);
        let spec = random_spec(&mut r, i);
        let model = train(&format!("m{i}"), &spec, &data, i as u64).map_err(|e| e.to_string())?;
        for j in 0..3 {
            let col = data.column(j);
            let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mut grid = uniform_grid(41, lo, hi);
            grid.variable = format!("x{j}");
            let fast = pdp(&model, &data, &grid).map_err(|e| e.to_string())?;
            let slow = naive_pdp(&model, &data, j, &grid.points);
            let same = fast.values.iter().zip(&slow).all(|(a, b)| a.to_bits() == b.to_bits());
            ensure(same, || format!("model {i} ({:?}) variable {j} differs", spec.family()))?;
        }
    }
    Ok("20 models x 3 variables bitwise equal".into())
}

fn quadrature() -> Check {
    let g = uniform_grid(1001, 0.0, 1.0);
    let make = |id: &str, f: fn(f64) -> f64| profile(id, &g, g.points.iter().map(|&z| f(z)).collect());
    let zero = make("0", |_| 0.0);
    let lin = make("z", |z| z);
    let quad = make("z2", |z| z * z);
    let shifted = make("z+1", |z| 2.0 * z + 1.0);
    let cases = [
        ("z vs 0", l2_profiles(&lin, &zero), (1.0f64 / 3.0).sqrt()),
        ("z^2 vs 0", l2_profiles(&quad, &zero), (1.0f64 / 5.0).sqrt()),
        ("z vs z^2", l2_profiles(&lin, &quad), (1.0f64 / 30.0).sqrt()),
        // ∫(z + 1)² over [0, 1] = 7/3
        ("2z+1 vs z", l2_profiles(&shifted, &lin), (7.0f64 / 3.0).sqrt()),
    ];
    let mut worst = 0.0f64;
    for (name, got, want) in cases {
        let got = got.map_err(|e| e.to_string())?;
        ensure((got - want).abs() < 1e-4, || format!("{name}: {got} vs {want}"))?;
        worst = worst.max((got - want).abs());
    }
    Ok(format!("max error {worst:.2e}"))
}

fn gold_exactness() -> Check {
    let mut r = rng(4);
    let mut worst = 0.0f64;
    for trial in 0..200 {
        let q = r.random_range(1..=3usize);
        let deg = r.random_range(0..=q);
        let c: Vec<f64> = (0..=deg).map(|_| r.random_range(-3.0..3.0)).collect();
        let mut pts = vec![r.random_range(-2.0..0.0)];
        for _ in 0..60 {
            pts.push(pts.last().unwrap() + r.random_range(0.02..0.1));
        }
        let f = |z: f64| c.iter().enumerate().map(|(k, a)| a * z.powi(k as i32)).sum::<f64>();
        let df = |z: f64| (1..c.len()).map(|k| k as f64 * c[k] * z.powi(k as i32 - 1)).sum::<f64>();
        let vals: Vec<f64> = pts.iter().map(|&z| f(z)).collect();
        let w = 7;
        let d = gold_derivative_values(&pts, &vals, GoldParams { window: w, degree: q })
            .map_err(|e| e.to_string())?;
        for i in w / 2..pts.len() - w / 2 {
            let err = (d[i] - df(pts[i])).abs();
            worst = worst.max(err);
            ensure(err < 1e-9, || format!("trial {trial} (q={q}, deg={deg}) point {i}: error {err:e}"))?;
        }
    }
    Ok(format!("200 polynomials, max interior error {worst:.2e}"))
}

fn naive_auc(scores: &[f64], labels: &[u8]) -> f64 {
    let (mut twice, mut n1, mut n0) = (0u64, 0u64, 0u64);
    for (i, &yi) in labels.iter().enumerate() {
        if yi == 0 {
            n0 += 1;
            continue;
        }
        n1 += 1;
        for (j, &yj) in labels.iter().enumerate() {
            if yj == 0 {
                twice += match scores[i].partial_cmp(&scores[j]).unwrap() {
                    std::cmp::Ordering::Greater => 2,
                    std::cmp::Ordering::Equal => 1,
                    std::cmp::Ordering::Less => 0,
                };
            }
        }
    }
    twice as f64 / (2 * n1 * n0) as f64
}

fn auc_oracle() -> Check {
    let mut r = rng(5);
    let mut done = 0;
    while done < 1000 {
        let n = r.random_range(2..300);
        let ties = r.random_bool(0.5);
        let s: Vec<f64> = (0..n)
            .map(|_| if ties { f64::from(r.random_range(0..6)) } else { r.random_range(-3.0..3.0) })
            .collect();
        let y: Vec<u8> = (0..n).map(|_| r.random_range(0..2)).collect();
        if !(y.contains(&0) && y.contains(&1)) {
            continue;
        }
        let got = auc(&s, &y).map_err(|e| e.to_string())?;
        let want = naive_auc(&s, &y);
        ensure(got == want, || format!("vector {done}: {got} vs {want}"))?;
        done += 1;
    }
    Ok("1000 vectors exact".into())
}

fn symmetric(r: &mut ChaCha8Rng, n: usize) -> DisparityMatrix {
    let mut values = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            // coarse lattice forces plenty of ties
            let v = if r.random_bool(0.3) { f64::from(r.random_range(0..4)) / 4.0 } else { r.random::<f64>() };
            values[i][j] = v;
            values[j][i] = v;
        }
    }
    DisparityMatrix {
        ids: (0..n).map(|i| format!("m{i:02}")).collect(),
        values,
    }
}

/// Independent loop: candidates scanned in id order, first strict maximum wins.
fn argmax_trace(m: &DisparityMatrix, k: usize, full: bool) -> Vec<usize> {
    let mut order: Vec<usize> = (0..m.ids.len()).collect();
    order.sort_by(|&a, &b| m.ids[a].cmp(&m.ids[b]));
    let mut chosen = vec![0usize];
    while chosen.len() < k.min(m.ids.len()) {
        let (mut best, mut best_score) = (usize::MAX, f64::NEG_INFINITY);
        for &c in order.iter().filter(|c| !chosen.contains(c)) {
            let score = if full {
                chosen.iter().map(|&x| m.values[x][c]).sum::<f64>() / chosen.len() as f64
            } else {
                m.values[*chosen.last().unwrap()][c]
            };
            if score > best_score {
                best_score = score;
                best = c;
            }
        }
        chosen.push(best);
    }
    chosen
}

fn single_axis_bundle(shapes: &[Shape]) -> ProfileBundle {
    let g = uniform_grid(101, 0.0, 1.0);
    ProfileBundle {
        models: shapes.iter().map(|(id, _)| id.to_string()).collect(),
        values: shapes
            .iter()
            .map(|(_, f)| vec![Some(g.points.iter().map(|&z| f(z)).collect())])
            .collect(),
        axes: vec![VariableAxis::Numeric { grid: g }],
    }
}

fn scores_for(bundle: &ProfileBundle) -> Vec<ModelScore> {
    bundle
        .models
        .iter()
        .enumerate()
        .map(|(i, id)| ModelScore {
            id: id.clone(),
            auc: if i == 0 { 0.85 } else { 0.84 },
        })
        .collect()
}

fn detect_correctness() -> Check {
    let mut r = rng(6);
    for case in 0..500 {
        let n = r.random_range(2..14);
        let k = r.random_range(2..8);
        let m = symmetric(&mut r, n);
        for (variant, full) in [(Variant::Full, true), (Variant::Greedy, false)] {
            let (got, _) = select_from_matrix(&m, 0, k, variant);
            let want = argmax_trace(&m, k, full);
            ensure(got == want, || format!("case {case} {variant:?}: {got:?} vs {want:?}"))?;
        }
        let (f2, _) = select_from_matrix(&m, 0, 2, Variant::Full);
        let (g2, _) = select_from_matrix(&m, 0, 2, Variant::Greedy);
        ensure(f2 == g2, || format!("case {case}: k=2 full {f2:?} vs greedy {g2:?}"))?;
    }

    let tau = std::f64::consts::TAU;
    let ramp = |z: f64, knots: &[(f64, f64)]| {
        for w in knots.windows(2) {
            if z <= w[1].0 {
                return w[0].1 + (w[1].1 - w[0].1) * (z - w[0].0) / (w[1].0 - w[0].0);
            }
        }
        knots.last().unwrap().1
    };
    let sign_clusters: Vec<Shape> = vec![
        ("a1", Box::new(move |z| ramp(z, &[(0.0, 0.0), (1.0, 1.0)]))),
        ("a2", Box::new(move |z| 2.0 * ramp(z, &[(0.0, 0.0), (1.0, 1.0)]) + 0.1)),
        ("b1", Box::new(move |z| ramp(z, &[(0.0, 0.0), (0.75, 0.75), (1.0, 0.5)]))),
        ("b2", Box::new(move |z| 1.5 * ramp(z, &[(0.0, 0.0), (0.75, 0.75), (1.0, 0.5)]) - 0.2)),
        ("c1", Box::new(move |z| ramp(z, &[(0.0, 0.75), (0.75, 0.0), (1.0, 0.25)]))),
        ("c2", Box::new(move |z| 0.5 * ramp(z, &[(0.0, 0.75), (0.75, 0.0), (1.0, 0.25)]) + 0.3)),
    ];
    let wave_clusters: Vec<Shape> = vec![
        ("a1", Box::new(move |z| (tau * z).sin())),
        ("a2", Box::new(move |z| (tau * z).sin() + 0.01 * z)),
        ("b1", Box::new(move |z| 1.2 * (2.0 * tau * z).sin())),
        ("b2", Box::new(move |z| 1.2 * (2.0 * tau * z).sin() + 0.01)),
        ("c1", Box::new(move |z| 1.4 * (3.0 * tau * z).sin())),
        ("c2", Box::new(move |z| 1.41 * (3.0 * tau * z).sin())),
    ];
    let runs = [
        (single_axis_bundle(&sign_clusters), MeasureKind::Pdi),
        (single_axis_bundle(&wave_clusters), MeasureKind::L2Profiles),
        (single_axis_bundle(&wave_clusters), MeasureKind::L2Derivatives),
    ];
    for (bundle, kind) in &runs {
        let cfg = RashomonConfig {
            k: Some(3),
            measure: MeasureConfig::new(*kind),
            ..Default::default()
        };
        let scores = scores_for(bundle);
        for res in [
            rashomon_detect(&scores, bundle, &cfg).map_err(|e| e.to_string())?,
            rashomon_detect_greedy(&scores, bundle, &cfg).map_err(|e| e.to_string())?,
        ] {
            let mut clusters: Vec<char> = res.selected.iter().map(|s| s.as_bytes()[0] as char).collect();
            clusters.sort_unstable();
            ensure(clusters == ['a', 'b', 'c'], || {
                format!("{kind} {:?}: selected {:?}", res.variant, res.selected)
            })?;
        }
    }
    Ok("500 random matrices; cluster recovery under pdi, l2, l2der".into())
}

// ---------------------------------------------------------------- end to end

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_rashomon")
}

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn run(dir: &Path, args: &[&str]) -> Result<(), String> {
    let out = Command::new(bin())
        .args(args)
        .current_dir(dir)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || {
        format!("`rashomon {}` failed: {}", args.join(" "), String::from_utf8_lossy(&out.stderr))
    })
}

fn smoke_pipeline(dir: &Path) -> Result<(), String> {
    let csv = crate_dir().join("data/clinical_demo.csv");
    let csv = csv.to_str().unwrap();
    run(dir, &["train", "--data", csv, "--target", "survival", "--seed", "1", "--out", "train"])?;
    run(dir, &["detect", "--models", "train/models.json", "--out", "detect"])?;
    run(dir, &["export-plots", "--run", "detect"])
}

fn read(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn smoke() -> Check {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    smoke_pipeline(tmp.path())?;
    let det = tmp.path().join("detect");
    let result: serde_json::Value = serde_json::from_str(&read(&det.join("detect.json"))?).map_err(|e| e.to_string())?;
    let selected: Vec<String> = serde_json::from_value(result["selected"].clone()).map_err(|e| e.to_string())?;
    let members: Vec<String> = serde_json::from_value(result["rashomon_ids"].clone()).map_err(|e| e.to_string())?;
    ensure(selected.len() == 3, || format!("selected {selected:?} from |R| = {}", members.len()))?;

    // complete matrix: every member on both axes, zero diagonal, symmetric, finite
    let matrix = read(&det.join("matrix.csv"))?;
    let rows: Vec<Vec<&str>> = matrix.lines().map(|l| l.split(',').collect()).collect();
    ensure(rows.len() == members.len() + 1, || "matrix row count".into())?;
    let header: Vec<&str> = rows[0][1..].to_vec();
    ensure(header == members.iter().map(String::as_str).collect::<Vec<_>>(), || "matrix header".into())?;
    let vals: Vec<Vec<f64>> = rows[1..]
        .iter()
        .map(|r| r[1..].iter().map(|v| v.parse().unwrap_or(f64::NAN)).collect())
        .collect();
    for i in 0..vals.len() {
        ensure(vals[i].len() == members.len(), || format!("matrix row {i} length"))?;
        for j in 0..vals.len() {
            ensure(vals[i][j].is_finite(), || format!("matrix[{i}][{j}] not finite"))?;
            ensure(vals[i][j] == vals[j][i], || format!("matrix[{i}][{j}] asymmetric"))?;
        }
        ensure(vals[i][i] == 0.0, || format!("matrix[{i}][{i}] nonzero"))?;
    }

    // pair table sorted descending
    let summary = read(&det.join("summary.csv"))?;
    let pair_vals: Vec<f64> = summary.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    ensure(pair_vals.len() == 3, || format!("{} pairs in summary", pair_vals.len()))?;
    ensure(pair_vals.windows(2).all(|w| w[0] >= w[1]), || "summary not sorted descending".into())?;
    ensure(det.join("plots").join("profile_PLT.svg").is_file(), || "missing PLT plot".into())?;

    let selection = serde_json::json!({
        "reference": result["reference"],
        "selected": selected,
        "rashomon_ids": members,
        "k": result["k"],
    });
    let selection = format!("{}
", serde_json::to_string_pretty(&selection).unwrap());
    let golden_dir = crate_dir().join("tests/golden");
    let produced = [
        ("selection.json", selection),
        ("matrix.csv", matrix),
        ("summary.csv", summary),
    ];
    if std::env::var_os("RASHOMON_BLESS").is_some() {
        std::fs::create_dir_all(&golden_dir).map_err(|e| e.to_string())?;
        for (name, text) in &produced {
            std::fs::write(golden_dir.join(name), text).map_err(|e| e.to_string())?;
        }
    }
    for (name, text) in &produced {
        let golden = read(&golden_dir.join(name))?;
        ensure(&golden == text, || format!("{name} differs from golden file"))?;
    }
    Ok(format!("|R| = {}, selected {}", members.len(), selected.join(",")))
}

fn collect_files(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    fn walk(root: &Path, at: &Path, out: &mut BTreeMap<PathBuf, Vec<u8>>) {
        for entry in std::fs::read_dir(at).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                walk(root, &p, out);
            } else {
                out.insert(p.strip_prefix(root).unwrap().to_path_buf(), std::fs::read(&p).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}

fn determinism() -> Check {
    let mut snapshots = Vec::new();
    for _ in 0..2 {
        let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
        smoke_pipeline(tmp.path())?;
        run(tmp.path(), &["detect", "--models", "train/models.json", "--variant", "greedy", "--measure", "l2der", "--out", "greedy"])?;
        run(tmp.path(), &["scenarios", "--n-pairs", "20", "--out", "scen"])?;
        snapshots.push(collect_files(tmp.path()));
    }
    let (a, b) = (&snapshots[0], &snapshots[1]);
    ensure(a.keys().eq(b.keys()), || "different file sets".into())?;
    for (path, bytes) in a {
        ensure(&b[path] == bytes, || format!("{} differs between runs", path.display()))?;
    }
    Ok(format!("{} files byte-identical", a.len()))
}

fn performance() -> Check {
    let mut r = rng(8);
    let n_models = 20;
    let axes: Vec<VariableAxis> = (0..10)
        .map(|j| {
            let mut g = uniform_grid(101, -2.0, 2.0);
            g.variable = format!("v{j}");
            VariableAxis::Numeric { grid: g }
        })
        .collect();
    let values = (0..n_models)
        .map(|_| {
            axes.iter()
                .map(|a| match a {
                    VariableAxis::Numeric { grid } => Some(random_profile(&mut r, grid)),
                    VariableAxis::Categorical { .. } => None,
                })
                .collect()
        })
        .collect();
    let bundle = ProfileBundle {
        models: (0..n_models).map(|i| format!("m{i:02}")).collect(),
        axes,
        values,
    };
    let scores: Vec<ModelScore> = bundle
        .models
        .iter()
        .enumerate()
        .map(|(i, id)| ModelScore { id: id.clone(), auc: 0.8 - 0.001 * i as f64 })
        .collect();
    for kind in MeasureKind::ALL {
        let cfg = RashomonConfig {
            measure: MeasureConfig::new(kind),
            ..Default::default()
        };
        let res = run_detect(&scores, &bundle, &cfg).map_err(|e| e.to_string())?;
        ensure(res.rashomon_ids.len() == n_models, || "all models should be members".into())?;
        ensure(res.selected.len() == res.k, || "short selection".into())?;
    }
    Ok("20 models x 10 variables x m=101, all three measures".into())
}

fn main() {
    let criteria: Vec<(&str, u64, fn() -> Check)> = vec![
        ("PDI bounds and identities", 10, pdi_bounds),
        ("Scenario orderings", 30, scenario_orderings),
        ("PDP oracle equivalence", 10, pdp_oracle),
        ("Quadrature accuracy", 1, quadrature),
        ("GOLD exactness", 1, gold_exactness),
        ("AUC oracle", 5, auc_oracle),
        ("Detect correctness", 10, detect_correctness),
        ("Clinical-shaped smoke test", 90, smoke),
        ("Determinism", 120, determinism),
        ("Performance envelope", 10, performance),
    ];
    let mut failed = 0;
    for (name, budget, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let over = elapsed > Duration::from_secs(budget);
        match (&outcome, over) {
            (Ok(detail), false) => println!("PASS {name} ({:.2} s / {budget} s): {detail}", elapsed.as_secs_f64()),
            (Ok(_), true) => {
                failed += 1;
                println!("FAIL {name}: took {:.2} s, budget {budget} s", elapsed.as_secs_f64());
            }
            (Err(why), _) => {
                failed += 1;
                println!("FAIL {name} ({:.2} s): {why}", elapsed.as_secs_f64());
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}
