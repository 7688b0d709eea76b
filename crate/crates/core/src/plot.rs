//! Self-rendered SVG charts over one or more metrics series.
//!
//! Output depends only on the input series: fixed canvas, fixed palette,
//! coordinates printed with two decimals.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::output::format_sig;
use crate::sim::MetricsSeries;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const TICKS: usize = 5;
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
];
/// Rounds are grouped into this many bins for the per-round bar chart.
const BINS: usize = 10;

/// A named series to draw.
#[derive(Debug, Clone, Copy)]
pub struct Labeled<'a> {
    pub label: &'a str,
    pub series: &'a MetricsSeries,
}

/// File names of the six charts, in render order.
pub const PLOT_FILES: [&str; 6] = [
    "active_nodes.svg",
    "lifetime.svg",
    "average_energy.svg",
    "total_energy.svg",
    "coverage.svg",
    "energy_utilization.svg",
];

/// Writes all six charts into `out_dir` and returns their paths.
pub fn render_plots(series: &[Labeled], out_dir: &Path) -> Result<Vec<PathBuf>> {
    let charts = [
        active_nodes_svg(series),
        lifetime_svg(series),
        average_energy_svg(series),
        total_energy_svg(series),
        coverage_svg(series),
        energy_utilization_svg(series),
    ];
    let mut paths = Vec::with_capacity(charts.len());
    for (name, svg) in PLOT_FILES.iter().zip(charts) {
        let path = out_dir.join(name);
        std::fs::write(&path, svg).map_err(|e| Error::io(&path, e))?;
        paths.push(path);
    }
    Ok(paths)
}

pub fn active_nodes_svg(series: &[Labeled]) -> String {
    line_chart(
        "Active nodes per round",
        "active nodes",
        series,
        |s| {
            s.rows
                .iter()
                .map(|r| (r.round as f64, r.active as f64))
                .collect()
        },
        None,
    )
}

/// Alive nodes (active plus stand-by) against rounds.
pub fn lifetime_svg(series: &[Labeled]) -> String {
    line_chart(
        "Network lifetime",
        "alive nodes",
        series,
        |s| {
            s.rows
                .iter()
                .map(|r| (r.round as f64, (r.active + r.standby) as f64))
                .collect()
        },
        None,
    )
}

pub fn total_energy_svg(series: &[Labeled]) -> String {
    line_chart(
        "Total residual energy",
        "energy (J)",
        series,
        |s| {
            s.rows
                .iter()
                .map(|r| (r.round as f64, r.energy_total))
                .collect()
        },
        None,
    )
}

pub fn coverage_svg(series: &[Labeled]) -> String {
    line_chart(
        "Network coverage",
        "coverage (%)",
        series,
        |s| {
            s.rows
                .iter()
                .map(|r| (r.round as f64, 100.0 * r.coverage))
                .collect()
        },
        Some((0.0, 100.0)),
    )
}

/// Mean energy spent per round, in equal-width round bins.
pub fn average_energy_svg(series: &[Labeled]) -> String {
    let last = series
        .iter()
        .map(|s| s.series.last_round())
        .max()
        .unwrap_or(0)
        .max(1);
    let width = last.div_ceil(BINS as u64).max(1);
    let bins = last.div_ceil(width) as usize;
    let categories: Vec<String> = (0..bins)
        .map(|b| {
            format!(
                "{}-{}",
                b as u64 * width + 1,
                ((b as u64 + 1) * width).min(last)
            )
        })
        .collect();
    let values: Vec<Vec<f64>> = series
        .iter()
        .map(|s| {
            let mut sum = vec![0.0; bins];
            let mut n = vec![0usize; bins];
            for r in s.series.rows.iter().filter(|r| r.round > 0) {
                let b = (((r.round - 1) / width) as usize).min(bins - 1);
                sum[b] += r.energy_spent;
                n[b] += 1;
            }
            sum.iter()
                .zip(&n)
                .map(|(s, &n)| if n == 0 { 0.0 } else { s / n as f64 })
                .collect()
        })
        .collect();
    bar_chart(
        "Average energy per round",
        "energy per round (J)",
        "rounds",
        series,
        &categories,
        &values,
        None,
    )
}

/// Share of the initial energy consumed and left at the end of each run.
pub fn energy_utilization_svg(series: &[Labeled]) -> String {
    let categories = vec!["consumed".to_string(), "residual".to_string()];
    let values: Vec<Vec<f64>> = series
        .iter()
        .map(|s| {
            let (Some(first), Some(last)) = (s.series.rows.first(), s.series.rows.last()) else {
                return vec![0.0, 0.0];
            };
            let initial = first.energy_total + first.energy_spent;
            if initial <= 0.0 {
                return vec![0.0, 0.0];
            }
            let left = 100.0 * last.energy_total / initial;
            vec![100.0 - left, left]
        })
        .collect();
    bar_chart(
        "Energy utilisation",
        "share of initial energy (%)",
        "",
        series,
        &categories,
        &values,
        Some((0.0, 100.0)),
    )
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Round-number tick spacing covering `span` in about `TICKS` steps.
fn nice_step(span: f64) -> f64 {
    if span <= 0.0 || !span.is_finite() {
        return 1.0;
    }
    let raw = span / TICKS as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let step = if norm <= 1.0 {
        1.0
    } else if norm <= 2.0 {
        2.0
    } else if norm <= 5.0 {
        5.0
    } else {
        10.0
    };
    step * mag
}

/// Axis range widened to whole ticks.
fn nice_range(lo: f64, hi: f64) -> (f64, f64, f64) {
    let (lo, hi) = if hi > lo { (lo, hi) } else { (lo, lo + 1.0) };
    let step = nice_step(hi - lo);
    ((lo / step).floor() * step, (hi / step).ceil() * step, step)
}

fn tick_label(v: f64) -> String {
    let s = format_sig(v);
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - TOP - BOTTOM)
    }
}

fn open(svg: &mut String, title: &str) {
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        svg,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        (WIDTH - RIGHT + LEFT) / 2.0,
        escape(title)
    );
}

fn y_axis(svg: &mut String, frame: &Frame, step: f64, label: &str) {
    let plot_right = WIDTH - RIGHT;
    let n = ((frame.y1 - frame.y0) / step).round() as usize;
    for i in 0..=n {
        let v = frame.y0 + i as f64 * step;
        let y = frame.py(v);
        let _ = writeln!(
            svg,
            r##"<line x1="{LEFT}" y1="{y:.2}" x2="{plot_right}" y2="{y:.2}" stroke="#e0e0e0"/>"##
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 6.0,
            y + 4.0,
            tick_label(v)
        );
    }
    let cy = (TOP + HEIGHT - BOTTOM) / 2.0;
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{cy:.2}" text-anchor="middle" transform="rotate(-90 18 {cy:.2})">{}</text>"#,
        escape(label)
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{}" stroke="black"/>"#,
        HEIGHT - BOTTOM
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{LEFT}" y1="{0}" x2="{plot_right}" y2="{0}" stroke="black"/>"#,
        HEIGHT - BOTTOM
    );
}

fn x_label(svg: &mut String, label: &str) {
    if label.is_empty() {
        return;
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        (LEFT + WIDTH - RIGHT) / 2.0,
        HEIGHT - 16.0,
        escape(label)
    );
}

fn legend(svg: &mut String, series: &[Labeled]) {
    for (i, s) in series.iter().enumerate() {
        let y = TOP + 10.0 + 20.0 * i as f64;
        let x = WIDTH - RIGHT + 16.0;
        let colour = PALETTE[i % PALETTE.len()];
        let _ = writeln!(
            svg,
            r#"<rect x="{x:.2}" y="{:.2}" width="14" height="10" fill="{colour}"/>"#,
            y - 9.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{y:.2}">{}</text>"#,
            x + 20.0,
            escape(s.label)
        );
    }
}

fn line_chart(
    title: &str,
    y_label: &str,
    series: &[Labeled],
    points: impl Fn(&MetricsSeries) -> Vec<(f64, f64)>,
    fixed_y: Option<(f64, f64)>,
) -> String {
    let data: Vec<Vec<(f64, f64)>> = series.iter().map(|s| points(s.series)).collect();
    let all = data.iter().flatten();
    let x_hi = all.clone().map(|p| p.0).fold(0.0, f64::max);
    let (x0, x1, x_step) = nice_range(0.0, x_hi);
    let (y0, y1, y_step) = match fixed_y {
        Some((lo, hi)) => (lo, hi, nice_step(hi - lo)),
        None => nice_range(0.0, all.map(|p| p.1).fold(0.0, f64::max)),
    };
    let frame = Frame { x0, x1, y0, y1 };

    let mut svg = String::new();
    open(&mut svg, title);
    y_axis(&mut svg, &frame, y_step, y_label);
    let n = ((x1 - x0) / x_step).round() as usize;
    for i in 0..=n {
        let v = x0 + i as f64 * x_step;
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            frame.px(v),
            HEIGHT - BOTTOM + 18.0,
            tick_label(v)
        );
    }
    x_label(&mut svg, "round");
    for (i, pts) in data.iter().enumerate() {
        let mut coords = String::new();
        for (j, &(x, y)) in pts.iter().enumerate() {
            if j > 0 {
                coords.push(' ');
            }
            let _ = write!(coords, "{:.2},{:.2}", frame.px(x), frame.py(y));
        }
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{}" stroke-width="1.5" points="{coords}"/>"#,
            PALETTE[i % PALETTE.len()]
        );
    }
    legend(&mut svg, series);
    svg.push_str("</svg>\n");
    svg
}

fn bar_chart(
    title: &str,
    y_label: &str,
    x_label_text: &str,
    series: &[Labeled],
    categories: &[String],
    values: &[Vec<f64>],
    fixed_y: Option<(f64, f64)>,
) -> String {
    let (y0, y1, y_step) = match fixed_y {
        Some((lo, hi)) => (lo, hi, nice_step(hi - lo)),
        None => nice_range(0.0, values.iter().flatten().copied().fold(0.0, f64::max)),
    };
    let frame = Frame {
        x0: 0.0,
        x1: categories.len().max(1) as f64,
        y0,
        y1,
    };
    let mut svg = String::new();
    open(&mut svg, title);
    y_axis(&mut svg, &frame, y_step, y_label);
    let slot = frame.px(1.0) - frame.px(0.0);
    let bar = 0.8 * slot / series.len().max(1) as f64;
    for (c, name) in categories.iter().enumerate() {
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="10">{}</text>"#,
            frame.px(c as f64 + 0.5),
            HEIGHT - BOTTOM + 16.0,
            escape(name)
        );
        for (i, v) in values.iter().enumerate() {
            let value = v.get(c).copied().unwrap_or(0.0);
            let x = frame.px(c as f64) + 0.1 * slot + i as f64 * bar;
            let top = frame.py(value);
            let _ = writeln!(
                svg,
                r#"<rect x="{x:.2}" y="{top:.2}" width="{bar:.2}" height="{:.2}" fill="{}"/>"#,
                (frame.py(y0) - top).max(0.0),
                PALETTE[i % PALETTE.len()]
            );
        }
    }
    x_label(&mut svg, x_label_text);
    legend(&mut svg, series);
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::RoundMetrics;

    fn series(rounds: u64, decay: f64) -> MetricsSeries {
        let mut s = MetricsSeries::default();
        for r in 0..=rounds {
            let dead = (r as f64 * decay) as usize;
            s.push(RoundMetrics {
                round: r,
                active: 40 - dead.min(40),
                standby: 60 - dead.min(60),
                dead: dead.min(100),
                coverage: 1.0 - r as f64 / (rounds as f64 * 2.0),
                energy_total: 50.0 - 0.02 * r as f64,
                energy_spent: if r == 0 { 0.0 } else { 0.02 },
                ch_count: 4,
            });
        }
        s
    }

    fn parse(svg: &str) {
        roxmltree::Document::parse(svg).expect("well-formed svg");
    }

    #[test]
    fn six_well_formed_files() {
        let s = series(120, 0.3);
        let dir = tempfile::tempdir().unwrap();
        let paths = render_plots(
            &[Labeled {
                label: "ccabc",
                series: &s,
            }],
            dir.path(),
        )
        .unwrap();
        assert_eq!(paths.len(), 6);
        for p in paths {
            parse(&std::fs::read_to_string(p).unwrap());
        }
    }

    #[test]
    fn lifetime_has_one_polyline_per_series() {
        let a = series(120, 0.3);
        let b = series(90, 0.6);
        let svg = lifetime_svg(&[
            Labeled {
                label: "ccabc",
                series: &a,
            },
            Labeled {
                label: "leach",
                series: &b,
            },
        ]);
        parse(&svg);
        assert_eq!(svg.matches("<polyline").count(), 2);
    }

    #[test]
    fn coverage_axis_is_zero_to_hundred() {
        let s = series(50, 0.1);
        let svg = coverage_svg(&[Labeled {
            label: "a",
            series: &s,
        }]);
        let doc = roxmltree::Document::parse(&svg).unwrap();
        let ticks: Vec<f64> = doc
            .descendants()
            .filter(|n| n.has_tag_name("text") && n.attribute("text-anchor") == Some("end"))
            .map(|n| n.text().unwrap().parse().unwrap())
            .collect();
        assert_eq!(ticks.first(), Some(&0.0));
        assert_eq!(ticks.last(), Some(&100.0));
        // every plotted point sits inside the axis box
        let line = doc
            .descendants()
            .find(|n| n.has_tag_name("polyline"))
            .unwrap();
        for pt in line.attribute("points").unwrap().split(' ') {
            let y: f64 = pt.split(',').nth(1).unwrap().parse().unwrap();
            assert!((TOP..=HEIGHT - BOTTOM).contains(&y));
        }
    }

    #[test]
    fn labels_are_escaped() {
        let s = series(10, 0.0);
        let svg = energy_utilization_svg(&[Labeled {
            label: "a<b&c",
            series: &s,
        }]);
        parse(&svg);
        assert!(svg.contains("a&lt;b&amp;c"));
    }

    #[test]
    fn same_input_same_bytes() {
        let s = series(80, 0.4);
        let l = [Labeled {
            label: "x",
            series: &s,
        }];
        assert_eq!(average_energy_svg(&l), average_energy_svg(&l));
        assert_eq!(total_energy_svg(&l), total_energy_svg(&l));
    }

    #[test]
    fn snapshot_only_series_still_renders() {
        let s = series(0, 0.0);
        let dir = tempfile::tempdir().unwrap();
        for p in render_plots(
            &[Labeled {
                label: "z",
                series: &s,
            }],
            dir.path(),
        )
        .unwrap()
        {
            parse(&std::fs::read_to_string(p).unwrap());
        }
    }

    #[test]
    fn nice_steps() {
        assert_eq!(nice_step(100.0), 20.0);
        assert_eq!(nice_step(2213.0), 500.0);
        assert_eq!(nice_range(0.0, 47.0), (0.0, 50.0, 10.0));
    }
}
