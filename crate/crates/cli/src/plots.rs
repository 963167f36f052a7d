//! Minimal hand-written SVG output: profile overlays and per-model heatmaps.
//! Output depends only on the run files, so repeated exports are byte-identical.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rashomon_core::profiles::exchange_from_str;
use rashomon_core::{DetectResult, ProfileBundle, VariableAxis};

use crate::config::PlotArgs;
use crate::error::{CliError, CliResult};
use crate::io;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 50.0;
const HIGHLIGHT: [&str; 3] = ["#d62728", "#2ca02c", "#1f77b4"];

fn num(v: f64) -> String {
    format!("{v:.2}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn svg_open(s: &mut String, w: f64, h: f64, title: &str) {
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" font-family="sans-serif" font-size="15" text-anchor="middle">{}</text>"#,
        w / 2.0,
        escape(title)
    );
}

/// Profiles of every Rashomon member on one variable; selected models are
/// colored when at least two were selected, the rest stay grey.
fn profile_svg(bundle: &ProfileBundle, var: usize, selected: &[String]) -> String {
    let axis = &bundle.axes[var];
    let xs: Vec<f64> = match axis {
        VariableAxis::Numeric { grid } => grid.points.clone(),
        VariableAxis::Categorical { categories, .. } => (0..categories.len()).map(|i| i as f64).collect(),
    };
    let series: Vec<_> = (0..bundle.models.len()).map(|i| bundle.filled(i, var)).collect();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in series.iter().flat_map(|s| s.iter()) {
        lo = lo.min(*v);
        hi = hi.max(*v);
    }
    if hi - lo < 1e-12 {
        lo -= 0.5;
        hi += 0.5;
    }
    let (x0, x1) = (xs[0], *xs.last().unwrap());
    let xspan = if x1 > x0 { x1 - x0 } else { 1.0 };
    let px = |x: f64| MARGIN + (x - x0) / xspan * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - (y - lo) / (hi - lo) * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    svg_open(&mut s, WIDTH, HEIGHT, axis.name());
    let _ = writeln!(
        s,
        r#"<rect x="{m}" y="{m}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN,
        m = MARGIN
    );
    for (label, y) in [(lo, HEIGHT - MARGIN), (hi, MARGIN)] {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="end">{}</text>"#,
            MARGIN - 4.0,
            num(y + 4.0),
            num(label)
        );
    }
    let color_selected = selected.len() >= 2;
    let mut order: Vec<usize> = (0..bundle.models.len()).collect();
    // grey first so the highlighted lines end up on top
    order.sort_by_key(|&i| selected.contains(&bundle.models[i]));
    for i in order {
        let model = &bundle.models[i];
        let (color, width) = match selected.iter().position(|m| m == model) {
            Some(p) if color_selected => (HIGHLIGHT[p % HIGHLIGHT.len()], 2.5),
            _ => ("#b0b0b0", 1.0),
        };
        let pts: Vec<String> = xs
            .iter()
            .zip(series[i].iter())
            .map(|(&x, &y)| format!("{},{}", num(px(x)), num(py(y))))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="{width}" points="{}"><title>{}</title></polyline>"#,
            pts.join(" "),
            escape(model)
        );
    }
    if color_selected {
        for (p, model) in selected.iter().enumerate() {
            let y = MARGIN + 14.0 + 16.0 * p as f64;
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" fill="{}">{}</text>"#,
                MARGIN + 8.0,
                num(y),
                HIGHLIGHT[p % HIGHLIGHT.len()],
                escape(model)
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

/// Variables × other members, shaded by disparity to `model`.
fn heatmap_svg(result: &DetectResult, model: &str) -> String {
    let partners: Vec<&String> = result.rashomon_ids.iter().filter(|m| *m != model).collect();
    let vars = &result.analysis.variables;
    let cell = 28.0;
    let left = 110.0;
    let top = 90.0;
    let w = left + cell * partners.len().max(1) as f64 + 20.0;
    let h = top + cell * vars.len() as f64 + 20.0;
    let value = |var: &str, p: &str| result.analysis.record(model, p).map_or(0.0, |r| r.per_variable[var]);
    let max = vars
        .iter()
        .flat_map(|v| partners.iter().map(move |p| (v, p)))
        .map(|(v, p)| value(v, p))
        .fold(0.0_f64, f64::max);

    let mut s = String::new();
    svg_open(&mut s, w, h, &format!("{} vs Rashomon set ({})", model, result.measure.kind));
    for (c, p) in partners.iter().enumerate() {
        let x = left + cell * (c as f64 + 0.5);
        let _ = writeln!(
            s,
            r#"<text x="{x}" y="{}" font-family="sans-serif" font-size="10" transform="rotate(-60 {x} {})">{}</text>"#,
            top - 6.0,
            top - 6.0,
            escape(p)
        );
    }
    for (r, var) in vars.iter().enumerate() {
        let y = top + cell * r as f64;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="end">{}</text>"#,
            left - 6.0,
            num(y + cell * 0.65),
            escape(var)
        );
        for (c, p) in partners.iter().enumerate() {
            let v = value(var, p);
            let t = if max > 0.0 { v / max } else { 0.0 };
            let shade = (255.0 * (1.0 - t)).round() as u8;
            let _ = writeln!(
                s,
                r#"<rect x="{}" y="{}" width="{cell}" height="{cell}" fill="rgb(255,{shade},{shade})" stroke="white"><title>{}</title></rect>"#,
                num(left + cell * c as f64),
                num(y),
                num(v)
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

fn required(run: &Path, name: &str) -> CliResult<String> {
    let path = run.join(name);
    if !path.is_file() {
        return Err(CliError::MissingRunDirectory(run.to_path_buf()));
    }
    io::read_to_string(&path)
}

/// Returns the written file paths.
pub fn export(run: &Path, out: &Path) -> CliResult<Vec<PathBuf>> {
    let result: DetectResult = serde_json::from_str(&required(run, "detect.json")?)?;
    let (bundle, _) = exchange_from_str(&required(run, "profiles.json")?)?;
    io::create_dir(out)?;
    let mut written = Vec::new();
    for (j, axis) in bundle.axes.iter().enumerate() {
        let path = out.join(format!("profile_{}.svg", io::slug(axis.name())));
        io::write(&path, profile_svg(&bundle, j, &result.selected))?;
        written.push(path);
    }
    for model in &result.selected {
        let path = out.join(format!("heatmap_{}.svg", io::slug(model)));
        io::write(&path, heatmap_svg(&result, model))?;
        written.push(path);
    }
    Ok(written)
}

pub fn run(args: PlotArgs) -> CliResult<()> {
    let out = args.out.unwrap_or_else(|| args.run.join("plots"));
    let written = export(&args.run, &out)?;
    println!("wrote {} plots to {}", written.len(), out.display());
    Ok(())
}
