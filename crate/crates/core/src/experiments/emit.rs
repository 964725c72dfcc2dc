//! CSV and SVG emission for experiment records.

use super::run::ExperimentRecord;
use crate::Result;
use std::path::Path;

pub const CSV_HEADER: &str =
    "experiment,distribution,n,m,algorithm,lambda,x,run,seed,objective,baseline,ratio,eta_s,ell1";

/// Serializes records to CSV. Rows are sorted by (algorithm, x, run) so output is
/// independent of evaluation order; the lambda field is empty for non-PTS rows.
pub fn to_csv(records: &[ExperimentRecord]) -> String {
    let mut sorted: Vec<&ExperimentRecord> = records.iter().collect();
    sorted.sort_by(|a, b| {
        a.algorithm
            .cmp(&b.algorithm)
            .then(a.x.partial_cmp(&b.x).unwrap())
            .then(a.run.cmp(&b.run))
    });
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in sorted {
        let lambda = r.lambda.map_or(String::new(), |l| l.to_string());
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.experiment,
            r.distribution,
            r.n,
            r.m,
            r.algorithm,
            lambda,
            r.x,
            r.run,
            r.seed,
            r.objective,
            r.baseline,
            r.ratio,
            r.eta_s,
            r.ell1
        ));
    }
    out
}

pub fn write_csv(path: &Path, records: &[ExperimentRecord]) -> Result<()> {
    std::fs::write(path, to_csv(records))?;
    Ok(())
}

/// Parses a CSV produced by [`to_csv`].
pub fn from_csv(text: &str) -> Result<Vec<ExperimentRecord>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        other => {
            return Err(crate::Error::Parse(format!(
                "unexpected CSV header: {}",
                other.unwrap_or("<empty>")
            )))
        }
    }
    let mut records = Vec::new();
    for (lineno, line) in lines.enumerate() {
        // Policy names like `pts(wspt,rr,0.1)` embed commas, so the algorithm
        // field is everything between the four leading and nine trailing ones.
        let raw: Vec<&str> = line.split(',').collect();
        if raw.len() < 14 {
            return Err(crate::Error::Parse(format!(
                "line {}: {} fields, expected at least 14",
                lineno + 2,
                raw.len()
            )));
        }
        let algorithm = raw[4..raw.len() - 9].join(",");
        let mut f: Vec<&str> = raw[..4].to_vec();
        f.push(&algorithm);
        f.extend_from_slice(&raw[raw.len() - 9..]);
        let num = |s: &str| -> Result<f64> {
            s.parse().map_err(|e| crate::Error::Parse(format!("line {}: {e}", lineno + 2)))
        };
        records.push(ExperimentRecord {
            experiment: f[0].into(),
            distribution: f[1].into(),
            n: num(f[2])? as usize,
            m: num(f[3])? as usize,
            algorithm: f[4].into(),
            lambda: if f[5].is_empty() { None } else { Some(num(f[5])?) },
            x: num(f[6])?,
            run: num(f[7])? as usize,
            seed: f[8]
                .parse()
                .map_err(|e| crate::Error::Parse(format!("line {}: {e}", lineno + 2)))?,
            objective: num(f[9])?,
            baseline: num(f[10])?,
            ratio: num(f[11])?,
            eta_s: num(f[12])?,
            ell1: num(f[13])?,
        });
    }
    Ok(records)
}

struct Series {
    name: String,
    /// (x, mean ratio, 95% half-width) per grid point.
    points: Vec<(f64, f64, f64)>,
}

fn series_of(records: &[ExperimentRecord]) -> Vec<Series> {
    let mut names: Vec<String> = records.iter().map(|r| r.algorithm.clone()).collect();
    names.sort();
    names.dedup();
    names
        .into_iter()
        .map(|name| {
            let mut xs: Vec<f64> =
                records.iter().filter(|r| r.algorithm == name).map(|r| r.x).collect();
            xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            xs.dedup();
            let points = xs
                .into_iter()
                .map(|x| {
                    let vals: Vec<f64> = records
                        .iter()
                        .filter(|r| r.algorithm == name && r.x == x && r.ratio.is_finite())
                        .map(|r| r.ratio)
                        .collect();
                    let k = vals.len().max(1) as f64;
                    let mean = vals.iter().sum::<f64>() / k;
                    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>()
                        / (k - 1.0).max(1.0);
                    let half = 1.96 * (var / k).sqrt();
                    (x, mean, half)
                })
                .collect();
            Series { name, points }
        })
        .collect()
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

/// Renders a line chart of mean ratio versus x with 95% confidence bands, one
/// series per algorithm.
pub fn to_svg(records: &[ExperimentRecord], x_label: &str) -> String {
    let series = series_of(records);
    let (w, h) = (720.0, 480.0);
    let (left, right, top, bottom) = (70.0, 180.0, 30.0, 50.0);
    let (pw, ph) = (w - left - right, h - top - bottom);

    let mut x_min = f64::INFINITY;
    let mut x_max = f64::NEG_INFINITY;
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for s in &series {
        for &(x, m, c) in &s.points {
            x_min = x_min.min(x);
            x_max = x_max.max(x);
            y_min = y_min.min(m - c);
            y_max = y_max.max(m + c);
        }
    }
    if !x_min.is_finite() {
        (x_min, x_max, y_min, y_max) = (0.0, 1.0, 0.0, 1.0);
    }
    if x_max - x_min < 1e-12 {
        x_max = x_min + 1.0;
    }
    let pad = 0.05 * (y_max - y_min).max(1e-9);
    y_min -= pad;
    y_max += pad;
    let sx = move |x: f64| left + (x - x_min) / (x_max - x_min) * pw;
    let sy = move |y: f64| top + (1.0 - (y - y_min) / (y_max - y_min)) * ph;

    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" \
         viewBox=\"0 0 {w} {h}\" font-family=\"sans-serif\" font-size=\"12\">\n\
         <rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n"
    );
    // Axes with 5 ticks each.
    svg.push_str(&format!(
        "<line x1=\"{left}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n\
         <line x1=\"{left}\" y1=\"{top}\" x2=\"{left}\" y2=\"{}\" stroke=\"black\"/>\n",
        h - bottom,
        w - right,
        h - bottom,
        h - bottom
    ));
    for k in 0..=4 {
        let fx = x_min + (x_max - x_min) * k as f64 / 4.0;
        let fy = y_min + (y_max - y_min) * k as f64 / 4.0;
        svg.push_str(&format!(
            "<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"black\"/>\n\
             <text x=\"{0}\" y=\"{3}\" text-anchor=\"middle\">{4:.2}</text>\n",
            sx(fx),
            h - bottom,
            h - bottom + 5.0,
            h - bottom + 20.0,
            fx
        ));
        svg.push_str(&format!(
            "<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"black\"/>\n\
             <text x=\"{3}\" y=\"{4}\" text-anchor=\"end\">{5:.3}</text>\n",
            left - 5.0,
            sy(fy),
            left,
            left - 8.0,
            sy(fy) + 4.0,
            fy
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{x_label}</text>\n\
         <text x=\"18\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {})\">ratio</text>\n",
        left + pw / 2.0,
        h - 10.0,
        top + ph / 2.0,
        top + ph / 2.0
    ));

    for (si, s) in series.iter().enumerate() {
        let color = PALETTE[si % PALETTE.len()];
        // Confidence band: upper edge forward, lower edge backward.
        let mut band = String::new();
        for &(x, m, c) in &s.points {
            band.push_str(&format!("{},{} ", sx(x), sy(m + c)));
        }
        for &(x, m, c) in s.points.iter().rev() {
            band.push_str(&format!("{},{} ", sx(x), sy(m - c)));
        }
        svg.push_str(&format!(
            "<polygon points=\"{}\" fill=\"{color}\" opacity=\"0.15\"/>\n",
            band.trim_end()
        ));
        let line: Vec<String> =
            s.points.iter().map(|&(x, m, _)| format!("{},{}", sx(x), sy(m))).collect();
        svg.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
            line.join(" ")
        ));
        let ly = top + 16.0 * si as f64 + 10.0;
        svg.push_str(&format!(
            "<line x1=\"{0}\" y1=\"{ly}\" x2=\"{1}\" y2=\"{ly}\" stroke=\"{color}\" stroke-width=\"2\"/>\n\
             <text x=\"{2}\" y=\"{3}\">{4}</text>\n",
            w - right + 10.0,
            w - right + 35.0,
            w - right + 40.0,
            ly + 4.0,
            s.name
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

pub fn write_svg(path: &Path, records: &[ExperimentRecord], x_label: &str) -> Result<()> {
    std::fs::write(path, to_svg(records, x_label))?;
    Ok(())
}
