//! SVG figures from result tables. Each figure embeds the plotted numbers
//! as a CSV block inside an XML comment.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;

use envtrack::decoder::LAG_STEP_MS;
use envtrack::io::{read_records, read_table};
use envtrack::{Cell, Error, Noise, Result};

use crate::args::{ReportArgs, Style};
use crate::rows::*;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const MARGIN: [f64; 4] = [60.0, 170.0, 40.0, 50.0]; // left, right, top, bottom
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];

pub fn run(a: ReportArgs) -> Result<()> {
    let kind = read_table(&a.from, None)?.kind;
    let svg = match (a.style, kind.as_str()) {
        (Style::Fig2, SWEEP) => fig2(sweep_curves(&read_records(&a.from, SWEEP)?)),
        (Style::Fig2, SCORES) => fig2(score_curves(&read_records(&a.from, SCORES)?)?),
        (Style::Fig3, SCORES) => fig3(&read_records(&a.from, SCORES)?),
        (Style::Fig4, PROFILES) => fig4(profile_grid(&a.from)?),
        (Style::Fig4, RADAR) => fig4(radar_grid(&read_records(&a.from, RADAR)?)),
        (style, kind) => {
            return Err(Error::InvalidArgument(format!("style {style:?} cannot be drawn from a {kind} table")))
        }
    };
    fs::write(&a.out, svg)?;
    Ok(())
}

struct Curve {
    cell: Cell,
    /// (lag ms, mean r_z, optional chance band)
    points: Vec<(f64, f64, Option<(f64, f64)>)>,
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        f64::NAN
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

fn sweep_curves(rows: &[SweepRow]) -> Vec<Curve> {
    type Acc = (Vec<f64>, Vec<f64>, Vec<f64>);
    let mut acc: BTreeMap<Cell, BTreeMap<usize, (f64, Acc)>> = BTreeMap::new();
    for r in rows {
        let e = acc.entry(Cell::new(r.condition, r.noise)).or_default().entry(r.lag_index).or_default();
        e.0 = r.lag_ms;
        e.1 .0.push(r.mean_rz);
        if let (Some(lo), Some(hi)) = (r.chance_q025, r.chance_q975) {
            e.1 .1.push(lo);
            e.1 .2.push(hi);
        }
    }
    acc.into_iter()
        .map(|(cell, lags)| Curve {
            cell,
            points: lags
                .into_values()
                .map(|(ms, (y, lo, hi))| {
                    let band = (!lo.is_empty()).then(|| (mean(&lo), mean(&hi)));
                    (ms, mean(&y), band)
                })
                .collect(),
        })
        .collect()
}

/// Lag position of a score label: `lagK` or the midpoint of `A-Bms`.
fn label_ms(label: &str) -> Result<f64> {
    let bad = || Error::Format(format!("unrecognized lag label '{label}'"));
    if let Some(k) = label.strip_prefix("lag") {
        return Ok(k.parse::<usize>().map_err(|_| bad())? as f64 * LAG_STEP_MS);
    }
    let (lo, hi) = label.strip_suffix("ms").and_then(|s| s.split_once('-')).ok_or_else(bad)?;
    let lo: f64 = lo.parse().map_err(|_| bad())?;
    let hi: f64 = hi.parse().map_err(|_| bad())?;
    Ok(0.5 * (lo + hi))
}

/// Subject means per (cell, label), then the grand mean across subjects.
fn score_curves(rows: &[ScoreRow]) -> Result<Vec<Curve>> {
    let mut per_subject: BTreeMap<(Cell, String, String), Vec<f64>> = BTreeMap::new();
    for r in rows {
        per_subject
            .entry((r.cell(), r.lag_or_window.clone(), r.subject_id.clone()))
            .or_default()
            .push(r.r_z);
    }
    let mut acc: BTreeMap<Cell, BTreeMap<String, Vec<f64>>> = BTreeMap::new();
    for ((cell, label, _), v) in per_subject {
        acc.entry(cell).or_default().entry(label).or_default().push(mean(&v));
    }
    acc.into_iter()
        .map(|(cell, labels)| {
            let mut points = labels
                .into_iter()
                .map(|(l, v)| Ok((label_ms(&l)?, mean(&v), None)))
                .collect::<Result<Vec<_>>>()?;
            points.sort_by(|a, b| a.0.total_cmp(&b.0));
            Ok(Curve { cell, points })
        })
        .collect()
}

fn cell_color(cell: Cell) -> &'static str {
    let i = Cell::all().iter().position(|c| *c == cell).unwrap_or(0);
    PALETTE[i % PALETTE.len()]
}

fn header(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(title));
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn data_comment(s: &mut String, columns: &str, rows: &[String]) {
    let _ = writeln!(s, "<!-- data\n{columns}");
    for r in rows {
        // "--" may not appear inside an XML comment
        let _ = writeln!(s, "{}", r.replace("--", "- -"));
    }
    let _ = writeln!(s, "-->");
}

/// Linear map of [lo, hi] onto [a, b]; a degenerate range maps to the middle.
fn scale(lo: f64, hi: f64, a: f64, b: f64) -> impl Fn(f64) -> f64 {
    move |v| {
        if hi > lo {
            a + (v - lo) / (hi - lo) * (b - a)
        } else {
            0.5 * (a + b)
        }
    }
}

/// Data range padded by 5% and widened to include zero.
fn y_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut lo, mut hi) = values.filter(|v| v.is_finite()).fold((0.0f64, 0.0f64), |(l, h), v| (l.min(v), h.max(v)));
    if hi - lo < 1e-12 {
        lo -= 0.1;
        hi += 0.1;
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn axes(s: &mut String, x_label: &str, y_label: &str, y_lo: f64, y_hi: f64) {
    let (l, r, t, b) = (MARGIN[0], WIDTH - MARGIN[1], MARGIN[2], HEIGHT - MARGIN[3]);
    let _ = writeln!(s, r#"<line x1="{l}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/>"#);
    let _ = writeln!(s, r#"<line x1="{l}" y1="{t}" x2="{l}" y2="{b}" stroke="black"/>"#);
    let y = scale(y_lo, y_hi, b, t);
    for k in 0..=4 {
        let v = y_lo + (y_hi - y_lo) * k as f64 / 4.0;
        let _ = writeln!(s, r#"<text x="{}" y="{:.1}" text-anchor="end">{v:.3}</text>"#, l - 6.0, y(v) + 4.0);
    }
    if y_lo < 0.0 && y_hi > 0.0 {
        let _ = writeln!(s, r##"<line x1="{l}" y1="{0:.1}" x2="{r}" y2="{0:.1}" stroke="#999" stroke-dasharray="4 3"/>"##, y(0.0));
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, (l + r) / 2.0, HEIGHT - 12.0, escape(x_label));
    let _ = writeln!(
        s,
        r#"<text x="16" y="{0}" text-anchor="middle" transform="rotate(-90 16 {0})">{1}</text>"#,
        (t + b) / 2.0,
        escape(y_label)
    );
}

fn legend(s: &mut String, entries: &[(String, &str, bool)]) {
    let x = WIDTH - MARGIN[1] + 14.0;
    for (i, (name, color, dashed)) in entries.iter().enumerate() {
        let y = MARGIN[2] + 10.0 + 18.0 * i as f64;
        let dash = if *dashed { r#" stroke-dasharray="5 3""# } else { "" };
        let _ = writeln!(s, r#"<line x1="{x}" y1="{y}" x2="{}" y2="{y}" stroke="{color}" stroke-width="2"{dash}/>"#, x + 22.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, x + 28.0, y + 4.0, escape(name));
    }
}

fn fig2(curves: Vec<Curve>) -> String {
    let mut s = header("Envelope reconstruction across lags");
    let mut data = Vec::new();
    for c in &curves {
        for (x, y, band) in &c.points {
            let (lo, hi) = band.map_or((String::new(), String::new()), |(a, b)| (a.to_string(), b.to_string()));
            data.push(format!("{},{x},{y},{lo},{hi}", c.cell));
        }
    }
    data_comment(&mut s, "cell,lag_ms,mean_rz,chance_q025,chance_q975", &data);
    let xs = curves.iter().flat_map(|c| c.points.iter().map(|p| p.0));
    let (x_lo, x_hi) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
    let (x_lo, x_hi) = if x_lo.is_finite() { (x_lo, x_hi) } else { (0.0, 1.0) };
    let (y_lo, y_hi) = y_range(curves.iter().flat_map(|c| {
        c.points
            .iter()
            .flat_map(|(_, y, b)| std::iter::once(*y).chain(b.iter().flat_map(|(lo, hi)| [*lo, *hi])))
    }));
    axes(&mut s, "lag (ms)", "mean r_z", y_lo, y_hi);
    let x = scale(x_lo, x_hi, MARGIN[0], WIDTH - MARGIN[1]);
    let y = scale(y_lo, y_hi, HEIGHT - MARGIN[3], MARGIN[2]);
    for c in &curves {
        let color = cell_color(c.cell);
        let band: Vec<_> = c.points.iter().filter_map(|(px, _, b)| b.map(|(lo, hi)| (*px, lo, hi))).collect();
        if band.len() == c.points.len() && !band.is_empty() {
            let mut d = String::new();
            for (i, (px, _, hi)) in band.iter().enumerate() {
                let _ = write!(d, "{}{:.1},{:.1} ", if i == 0 { "M" } else { "L" }, x(*px), y(*hi));
            }
            for (px, lo, _) in band.iter().rev() {
                let _ = write!(d, "L{:.1},{:.1} ", x(*px), y(*lo));
            }
            let _ = writeln!(s, r#"<path d="{d}Z" fill="{color}" fill-opacity="0.12" stroke="none"/>"#);
        }
        let pts: Vec<String> = c.points.iter().map(|(px, py, _)| format!("{:.1},{:.1}", x(*px), y(*py))).collect();
        let dash = if c.cell.noise == Noise::Noise { r#" stroke-dasharray="5 3""# } else { "" };
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"{dash}/>"#,
            pts.join(" ")
        );
    }
    for k in 0..=4 {
        let v = x_lo + (x_hi - x_lo) * k as f64 / 4.0;
        let _ = writeln!(s, r#"<text x="{:.1}" y="{}" text-anchor="middle">{v:.0}</text>"#, x(v), HEIGHT - MARGIN[3] + 16.0);
    }
    let entries: Vec<_> = curves
        .iter()
        .map(|c| (c.cell.to_string(), cell_color(c.cell), c.cell.noise == Noise::Noise))
        .collect();
    legend(&mut s, &entries);
    s.push_str("</svg>\n");
    s
}

/// Mean and standard error across subjects of each subject's cell mean.
fn cell_summary(rows: &[ScoreRow]) -> Vec<(Cell, f64, f64, usize)> {
    let mut per_subject: BTreeMap<(Cell, String), Vec<f64>> = BTreeMap::new();
    for r in rows {
        per_subject.entry((r.cell(), r.subject_id.clone())).or_default().push(r.r_z);
    }
    let mut by_cell: BTreeMap<Cell, Vec<f64>> = BTreeMap::new();
    for ((cell, _), v) in per_subject {
        by_cell.entry(cell).or_default().push(mean(&v));
    }
    Cell::all()
        .into_iter()
        .filter_map(|cell| {
            let v = by_cell.get(&cell)?;
            let m = mean(v);
            let se = if v.len() > 1 {
                (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt() / (v.len() as f64).sqrt()
            } else {
                0.0
            };
            Some((cell, m, se, v.len()))
        })
        .collect()
}

fn fig3(rows: &[ScoreRow]) -> String {
    let cells = cell_summary(rows);
    let title = match rows.first() {
        Some(r) => format!("Tracking accuracy by condition ({})", r.lag_or_window),
        None => "Tracking accuracy by condition".to_string(),
    };
    let mut s = header(&title);
    let data: Vec<String> = cells
        .iter()
        .map(|(c, m, se, n)| format!("{},{},{m},{se},{n}", c.condition, c.noise))
        .collect();
    data_comment(&mut s, "condition,noise,mean_rz,se,n_subjects", &data);
    let (y_lo, y_hi) = y_range(cells.iter().flat_map(|(_, m, se, _)| [m - se, m + se]));
    axes(&mut s, "condition", "mean r_z", y_lo, y_hi);
    let y = scale(y_lo, y_hi, HEIGHT - MARGIN[3], MARGIN[2]);
    let plot_w = WIDTH - MARGIN[0] - MARGIN[1];
    let group_w = plot_w / 4.0;
    let bar_w = group_w * 0.35;
    let noise_color = |n: Noise| if n == Noise::Quiet { PALETTE[0] } else { PALETTE[1] };
    for (cell, m, se, _) in &cells {
        let g = envtrack::Condition::ALL.iter().position(|c| *c == cell.condition).unwrap_or(0) as f64;
        let offset = if cell.noise == Noise::Quiet { -bar_w } else { 0.0 };
        let x0 = MARGIN[0] + group_w * (g + 0.5) + offset;
        let (top, bottom) = (y(m.max(0.0)), y(m.min(0.0)));
        let _ = writeln!(
            s,
            r#"<rect x="{x0:.1}" y="{top:.1}" width="{bar_w:.1}" height="{:.1}" fill="{}"/>"#,
            (bottom - top).max(0.5),
            noise_color(cell.noise)
        );
        let cx = x0 + bar_w / 2.0;
        let _ = writeln!(
            s,
            r#"<line x1="{cx:.1}" y1="{:.1}" x2="{cx:.1}" y2="{:.1}" stroke="black"/>"#,
            y(m - se),
            y(m + se)
        );
    }
    for (g, c) in envtrack::Condition::ALL.iter().enumerate() {
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{}" text-anchor="middle">{c}</text>"#,
            MARGIN[0] + group_w * (g as f64 + 0.5),
            HEIGHT - MARGIN[3] + 16.0
        );
    }
    legend(
        &mut s,
        &[
            ("quiet".into(), noise_color(Noise::Quiet), false),
            ("noise".into(), noise_color(Noise::Noise), false),
        ],
    );
    s.push_str("</svg>\n");
    s
}

struct Grid {
    features: Vec<String>,
    speakers: Vec<String>,
    /// speakers × features
    values: Vec<Vec<f64>>,
}

fn profile_grid(path: &std::path::Path) -> Result<Grid> {
    let t = read_table(path, Some(PROFILES))?;
    let features = t.columns.get(1..).unwrap_or_default().to_vec();
    let mut speakers = Vec::new();
    let mut values = Vec::new();
    for r in &t.rows {
        speakers.push(r[0].clone());
        values.push(
            r[1..]
                .iter()
                .map(|v| v.trim().parse::<f64>().map_err(|_| Error::Format(format!("'{v}' is not a number"))))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    Ok(Grid { features, speakers, values })
}

fn radar_grid(rows: &[RadarRow]) -> Grid {
    let mut features: Vec<String> = Vec::new();
    let mut speakers: Vec<String> = Vec::new();
    for r in rows {
        if !features.contains(&r.feature) {
            features.push(r.feature.clone());
        }
        if !speakers.contains(&r.speaker_id) {
            speakers.push(r.speaker_id.clone());
        }
    }
    let mut values = vec![vec![f64::NAN; features.len()]; speakers.len()];
    for r in rows {
        let i = speakers.iter().position(|s| *s == r.speaker_id).expect("collected");
        let j = features.iter().position(|f| *f == r.feature).expect("collected");
        values[i][j] = r.value;
    }
    Grid { features, speakers, values }
}

/// Diverging blue-white-red for values in [-1, 1].
fn diverging(v: f64) -> String {
    if !v.is_finite() {
        return "#dddddd".into();
    }
    let v = v.clamp(-1.0, 1.0);
    let (r, g, b) = if v >= 0.0 {
        (255.0, 255.0 * (1.0 - v), 255.0 * (1.0 - v))
    } else {
        (255.0 * (1.0 + v), 255.0 * (1.0 + v), 255.0)
    };
    format!("#{:02x}{:02x}{:02x}", r as u8, g as u8, b as u8)
}

fn fig4(grid: Grid) -> String {
    let mut s = header("Normalized speaker profiles");
    let mut data = Vec::new();
    for (i, sp) in grid.speakers.iter().enumerate() {
        for (j, f) in grid.features.iter().enumerate() {
            data.push(format!("{sp},{f},{}", grid.values[i][j]));
        }
    }
    data_comment(&mut s, "speaker_id,feature,value", &data);
    let left = 120.0;
    let top = MARGIN[2] + 10.0;
    let nf = grid.features.len().max(1) as f64;
    let ns = grid.speakers.len().max(1) as f64;
    let cw = (WIDTH - left - 20.0) / nf;
    let ch = ((HEIGHT - top - 110.0) / ns).min(40.0);
    for (i, sp) in grid.speakers.iter().enumerate() {
        let y = top + ch * i as f64;
        let _ = writeln!(s, r#"<text x="{}" y="{:.1}" text-anchor="end">{}</text>"#, left - 6.0, y + ch / 2.0 + 4.0, escape(sp));
        for j in 0..grid.features.len() {
            let _ = writeln!(
                s,
                r#"<rect x="{:.1}" y="{y:.1}" width="{cw:.1}" height="{ch:.1}" fill="{}" stroke="white"/>"#,
                left + cw * j as f64,
                diverging(grid.values[i][j])
            );
        }
    }
    let label_y = top + ch * ns + 8.0;
    for (j, f) in grid.features.iter().enumerate() {
        let x = left + cw * (j as f64 + 0.5);
        let _ = writeln!(
            s,
            r#"<text x="{x:.1}" y="{label_y:.1}" font-size="10" text-anchor="end" transform="rotate(-60 {x:.1} {label_y:.1})">{}</text>"#,
            escape(f)
        );
    }
    s.push_str("</svg>\n");
    s
}
