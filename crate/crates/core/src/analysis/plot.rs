// Copyright (c) 2026 The cprof Authors
//
// SPDX-License-Identifier: Apache-2.0
//

//! Static SVG time-series plots.
//!
//! Series are stacked into panels (by default cpu, memory, disk, network,
//! then anything else), each with its own y axis and legend and a shared
//! time axis in seconds since the first point.
//!
//! Style file (INI), every key optional:
//!
//! ```ini
//! [plot]
//! title = nightly build
//! width = 960
//! panel_height = 240
//!
//! [panel.cpu]
//! title = CPU
//! y_label = ticks per interval
//!
//! [vCpuTimeUserMode]
//! panel = cpu
//! label = user
//! color = #1f77b4
//! ```
//!
//! Colors are 3 or 6 hex digits; the leading `#` is optional.

use super::deltas::DeltaSeries;
use super::AnalysisError;
use crate::catalog::{lookup, Category};
use ini::Ini;
use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

const PALETTE: [&str; 10] =
    ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"];
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 220.0;
const PANEL_TOP: f64 = 30.0;
const PANEL_BOTTOM: f64 = 45.0;
const TITLE_HEIGHT: f64 = 30.0;
/// Aim for about this many intervals per axis.
const TICKS: f64 = 5.0;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PanelStyle {
    pub title: Option<String>,
    pub y_label: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetricStyle {
    pub panel: Option<String>,
    pub label: Option<String>,
    pub color: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotStyle {
    pub title: Option<String>,
    pub width: u32,
    pub panel_height: u32,
    pub panels: HashMap<String, PanelStyle>,
    pub metrics: HashMap<String, MetricStyle>,
}

impl Default for PlotStyle {
    fn default() -> Self {
        PlotStyle { title: None, width: 960, panel_height: 240, panels: HashMap::new(), metrics: HashMap::new() }
    }
}

fn config_err(msg: String) -> AnalysisError {
    AnalysisError::Config(msg)
}

fn parse_color(metric: &str, raw: &str) -> Result<String, AnalysisError> {
    let hex = raw.trim().trim_start_matches('#');
    if (hex.len() == 6 || hex.len() == 3) && hex.bytes().all(|b| b.is_ascii_hexdigit()) {
        Ok(format!("#{hex}"))
    } else {
        Err(config_err(format!("{metric}: color `{raw}` is not a hex color")))
    }
}

impl PlotStyle {
    pub fn parse_ini(text: &str) -> Result<Self, AnalysisError> {
        let ini = Ini::load_from_str_noescape(text).map_err(|e| config_err(e.to_string()))?;
        let mut style = PlotStyle::default();
        for (section, props) in ini.iter() {
            let Some(section) = section else {
                if let Some((k, _)) = props.iter().next() {
                    return Err(config_err(format!("key `{k}` outside a section")));
                }
                continue;
            };
            if section == "plot" {
                for (k, v) in props.iter() {
                    let dim = || v.trim().parse::<u32>().ok().filter(|d| *d >= 100);
                    match k {
                        "title" => style.title = Some(v.to_string()),
                        "width" => style.width = dim().ok_or_else(|| config_err(format!("bad width `{v}`")))?,
                        "panel_height" => {
                            style.panel_height = dim().ok_or_else(|| config_err(format!("bad panel_height `{v}`")))?
                        }
                        _ => return Err(config_err(format!("[plot]: unknown key `{k}`"))),
                    }
                }
            } else if let Some(panel) = section.strip_prefix("panel.") {
                let p = style.panels.entry(panel.to_string()).or_default();
                for (k, v) in props.iter() {
                    match k {
                        "title" => p.title = Some(v.to_string()),
                        "y_label" => p.y_label = Some(v.to_string()),
                        _ => return Err(config_err(format!("[{section}]: unknown key `{k}`"))),
                    }
                }
            } else {
                let m = style.metrics.entry(section.to_string()).or_default();
                for (k, v) in props.iter() {
                    match k {
                        "panel" => m.panel = Some(v.to_string()),
                        "label" => m.label = Some(v.to_string()),
                        "color" => m.color = Some(parse_color(section, v)?),
                        _ => return Err(config_err(format!("[{section}]: unknown key `{k}`"))),
                    }
                }
            }
        }
        Ok(style)
    }

    pub fn load(path: &Path) -> Result<Self, AnalysisError> {
        let text =
            fs::read_to_string(path).map_err(|source| AnalysisError::Read { path: path.to_path_buf(), source })?;
        Self::parse_ini(&text)
    }

    fn panel_of(&self, metric: &str) -> String {
        if let Some(p) = self.metrics.get(metric).and_then(|m| m.panel.clone()) {
            return p;
        }
        match metric {
            "vBytesWritten" => "disk".to_string(),
            "vMemoryUsed" => "memory".to_string(),
            _ => lookup(metric).map_or("derived", |d| d.category.as_str()).to_string(),
        }
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
    out
}

/// Compact tick label: integers without decimals, others to 3 significant
/// decimals with trailing zeros trimmed.
fn tick_label(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        return format!("{}", v as i64);
    }
    let s = format!("{v:.3}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// Round step (1, 2 or 5 times a power of ten) giving about `TICKS`
/// intervals over `span`.
fn nice_step(span: f64) -> f64 {
    let raw = span / TICKS;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].into_iter().map(|m| m * mag).find(|s| *s >= raw * 0.999);
    step.unwrap_or(10.0 * mag)
}

struct Panel<'a> {
    key: String,
    series: Vec<&'a DeltaSeries>,
}

fn group_panels<'a>(series: &'a [DeltaSeries], style: &PlotStyle) -> Vec<Panel<'a>> {
    let mut panels: Vec<Panel<'a>> = Vec::new();
    for s in series {
        let key = style.panel_of(&s.metric);
        match panels.iter_mut().find(|p| p.key == key) {
            Some(p) => p.series.push(s),
            None => panels.push(Panel { key, series: vec![s] }),
        }
    }
    let rank = |k: &str| Category::ALL.iter().position(|c| c.as_str() == k).unwrap_or(Category::ALL.len());
    // Stable: non-standard panels keep first-appearance order.
    panels.sort_by_key(|p| rank(&p.key));
    panels
}

fn default_y_label(panel: &Panel<'_>) -> String {
    let mut units: Vec<&str> = Vec::new();
    for s in &panel.series {
        let u = lookup(&s.metric).map_or("derived", |d| d.unit.as_str());
        if !units.contains(&u) {
            units.push(u);
        }
    }
    units.join(", ")
}

/// Renders the series to an SVG document.
pub fn render_svg(series: &[DeltaSeries], style: &PlotStyle) -> Result<String, AnalysisError> {
    if series.iter().all(|s| s.points.is_empty()) {
        return Err(AnalysisError::NoSeries);
    }
    let panels = group_panels(series, style);
    let times = series.iter().flat_map(|s| s.points.iter().map(|p| p.wall_clock));
    let t_min = times.clone().fold(f64::INFINITY, f64::min);
    let t_max = times.fold(f64::NEG_INFINITY, f64::max);
    let t_step = nice_step(if t_max > t_min { t_max - t_min } else { 1.0 });
    // Sampling jitter may overshoot the last round tick by a hair.
    let t_ticks = ((t_max - t_min) / t_step - 0.01).ceil().max(1.0) as usize;
    let t_span = t_step * t_ticks as f64;

    let width = style.width as f64;
    let panel_h = style.panel_height as f64;
    let height = TITLE_HEIGHT + panel_h * panels.len() as f64;
    let plot_w = width - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = panel_h - PANEL_TOP - PANEL_BOTTOM;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    if let Some(t) = &style.title {
        let _ = writeln!(
            svg,
            r#"<text class="title" x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
            width / 2.0,
            escape(t)
        );
    }

    let mut color_idx = 0;
    for (pi, panel) in panels.iter().enumerate() {
        let pstyle = style.panels.get(&panel.key).cloned().unwrap_or_default();
        let top = TITLE_HEIGHT + pi as f64 * panel_h + PANEL_TOP;
        let bottom = top + plot_h;
        let left = MARGIN_LEFT;
        let right = left + plot_w;

        let values = panel.series.iter().flat_map(|s| s.points.iter().map(|p| p.value.as_f64()));
        let mut y_min = values.clone().fold(f64::INFINITY, f64::min).min(0.0);
        let mut y_max = values.fold(f64::NEG_INFINITY, f64::max);
        if !y_max.is_finite() {
            y_max = 1.0;
        }
        if !y_min.is_finite() {
            y_min = 0.0;
        }
        if y_max <= y_min {
            y_max = y_min + 1.0;
        }
        let y_step = nice_step(y_max - y_min);
        y_min = (y_min / y_step).floor() * y_step;
        let y_ticks = ((y_max - y_min) / y_step - 1e-9).ceil().max(1.0) as usize;
        y_max = y_min + y_step * y_ticks as f64;
        let x_of = |t: f64| left + (t - t_min) / t_span * plot_w;
        let y_of = |v: f64| bottom - (v - y_min) / (y_max - y_min) * plot_h;

        let _ = writeln!(svg, r#"<g class="panel" data-panel="{}">"#, escape(&panel.key));
        let title = pstyle.title.clone().unwrap_or_else(|| panel.key.clone());
        let _ = writeln!(
            svg,
            r#"<text class="panel-title" x="{left}" y="{}" font-size="12" font-weight="bold">{}</text>"#,
            top - 8.0,
            escape(&title)
        );
        let _ = writeln!(
            svg,
            r#"<path class="axes" d="M{left},{top} L{left},{bottom} L{right},{bottom}" fill="none" stroke="black"/>"#
        );
        for k in 0..=t_ticks {
            let x = left + k as f64 / t_ticks as f64 * plot_w;
            let _ = writeln!(
                svg,
                r#"<text class="x-tick" x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                bottom + 14.0,
                tick_label(k as f64 * t_step)
            );
        }
        for k in 0..=y_ticks {
            let y = bottom - k as f64 / y_ticks as f64 * plot_h;
            let _ = writeln!(
                svg,
                r#"<text class="y-tick" x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
                left - 6.0,
                y + 4.0,
                tick_label(y_min + k as f64 * y_step)
            );
            let _ = writeln!(
                svg,
                r##"<line class="grid" x1="{left}" y1="{y:.2}" x2="{right}" y2="{y:.2}" stroke="#dddddd"/>"##
            );
        }
        let _ = writeln!(
            svg,
            r#"<text class="x-label" x="{:.2}" y="{:.2}" text-anchor="middle">Time (s)</text>"#,
            left + plot_w / 2.0,
            bottom + 32.0
        );
        let y_label = pstyle.y_label.clone().unwrap_or_else(|| default_y_label(panel));
        let (yx, yy) = (16.0, top + plot_h / 2.0);
        let _ = writeln!(
            svg,
            r#"<text class="y-label" x="{yx}" y="{yy:.2}" text-anchor="middle" transform="rotate(-90 {yx} {yy:.2})">{}</text>"#,
            escape(&y_label)
        );

        for (si, s) in panel.series.iter().enumerate() {
            let mstyle = style.metrics.get(&s.metric).cloned().unwrap_or_default();
            let color = mstyle.color.clone().unwrap_or_else(|| {
                let c = PALETTE[color_idx % PALETTE.len()].to_string();
                color_idx += 1;
                c
            });
            let points: Vec<String> =
                s.points.iter().map(|p| format!("{:.2},{:.2}", x_of(p.wall_clock), y_of(p.value.as_f64()))).collect();
            let _ = writeln!(
                svg,
                r#"<polyline class="series" data-metric="{}" points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                escape(&s.label()),
                points.join(" ")
            );
            if s.points.len() == 1 {
                let p = &s.points[0];
                let _ = writeln!(
                    svg,
                    r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}"/>"#,
                    x_of(p.wall_clock),
                    y_of(p.value.as_f64())
                );
            }
            let ly = top + 6.0 + si as f64 * 16.0;
            let label = match (&mstyle.label, s.pid) {
                (Some(l), Some(pid)) => format!("{l} [{pid}]"),
                (Some(l), None) => l.clone(),
                (None, _) => match &s.process_name {
                    Some(name) => format!("{} ({name})", s.label()),
                    None => s.label(),
                },
            };
            let _ = writeln!(
                svg,
                r#"<g class="legend-entry"><rect x="{:.2}" y="{:.2}" width="12" height="4" fill="{color}"/><text x="{:.2}" y="{:.2}">{}</text></g>"#,
                right + 12.0,
                ly - 2.0,
                right + 30.0,
                ly + 3.0,
                escape(&label)
            );
        }
        let _ = writeln!(svg, "</g>");
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

pub fn render_plot(series: &[DeltaSeries], path: &Path, style: &PlotStyle) -> Result<(), AnalysisError> {
    let svg = render_svg(series, style)?;
    fs::write(path, svg).map_err(|source| AnalysisError::Write { path: path.to_path_buf(), source })
}
