//! Text and file formats: numbers, track tables, flow tables and SVG plots.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::enumeration::TrackSet;
use crate::error::{Error, Result};
use crate::flow::FlowResult;
use crate::multiset::Multiset;
use crate::space::{Ambient, BasedSpace};
use crate::spectra::SampledOperatorPath;

pub const DEFAULT_DIGITS: usize = 12;

/// Formats `x` with `digits` significant digits, like C's `%g` but keeping
/// a trailing `.0` on integers.
pub fn fmt_sig(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0.0".into();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if exp < -5 || exp >= digits as i32 {
        let m = trim_zeros(mantissa);
        return format!("{m}e{exp}");
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    let fixed = format!("{:.*}", decimals, x);
    let t = trim_zeros(&fixed);
    if t.contains('.') {
        t
    } else {
        format!("{t}.0")
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

/// A sampled path of multisets, as read from and written to JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultisetPath {
    pub params: Vec<f64>,
    pub samples: Vec<Multiset>,
}

/// Input accepted wherever a path is expected.
#[derive(Debug, Clone)]
pub enum PathInput {
    Operator(SampledOperatorPath),
    Multisets(MultisetPath),
}

impl PathInput {
    /// Operator paths carry `matrices`, multiset paths carry `samples`.
    pub fn from_json(s: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(s).map_err(json_error)?;
        if value.get("matrices").is_some() {
            let path: SampledOperatorPath = serde_json::from_value(value).map_err(json_error)?;
            path.validate()?;
            Ok(PathInput::Operator(path))
        } else if value.get("samples").is_some() {
            let path: MultisetPath = serde_json::from_value(value).map_err(json_error)?;
            if path.params.len() != path.samples.len() {
                return Err(Error::Parameter("params and samples differ in length".into()));
            }
            Ok(PathInput::Multisets(path))
        } else {
            Err(Error::Parameter("expected an operator path (matrices) or a multiset path (samples)".into()))
        }
    }

    /// Parameters and spectra.
    pub fn multisets(&self) -> Result<MultisetPath> {
        match self {
            PathInput::Operator(p) => Ok(MultisetPath { params: p.params.clone(), samples: p.spectra()? }),
            PathInput::Multisets(m) => Ok(m.clone()),
        }
    }
}

pub fn json_error(e: serde_json::Error) -> Error {
    Error::Parameter(format!("JSON: {e}"))
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map(|s| s + "\n").map_err(json_error)
}

/// Long-format CSV: one row per (sample, track).
pub fn tracks_csv(ts: &TrackSet, digits: usize) -> String {
    let mut out = String::from("t,track_id,value,active\n");
    for (j, t) in ts.params.iter().enumerate() {
        for (id, tr) in ts.tracks.iter().enumerate() {
            let (value, active) = match tr.values[j] {
                Some(v) => (v, 1),
                None => (ts.space.basepoint().unwrap_or(f64::NAN), 0),
            };
            let value = if value.is_nan() { String::new() } else { fmt_sig(value, digits) };
            let _ = writeln!(out, "{},{id},{value},{active}", fmt_sig(*t, digits));
        }
    }
    out
}

pub fn tracks_json(ts: &TrackSet) -> Result<String> {
    to_json(ts)
}

pub fn tracks_from_json(s: &str) -> Result<TrackSet> {
    let ts: TrackSet = serde_json::from_str(s).map_err(json_error)?;
    ts.space.validate()?;
    if ts.tracks.iter().any(|tr| tr.values.len() != ts.params.len()) {
        return Err(Error::Parameter("track length differs from parameter count".into()));
    }
    Ok(ts)
}

pub fn flow_csv(result: &FlowResult, digits: usize) -> String {
    let mut out = String::from("theta,sf_winding,sf_crossing\n");
    for ((theta, w), c) in result.theta_grid.iter().zip(&result.winding).zip(&result.crossing) {
        let _ = writeln!(out, "{},{w},{c}", fmt_sig(*theta, digits));
    }
    out
}

const PALETTE: [&str; 8] =
    ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2"];

/// Static plot of a track set. On the circle, time runs outward from
/// radius 0.55 to 1 so tracks do not overdraw; each angle in `rays` is
/// drawn as a dashed ray. On the line, value is plotted against `t`.
pub fn tracks_svg(ts: &TrackSet, rays: &[f64]) -> String {
    match ts.space.ambient() {
        Ambient::Circle => circle_svg(ts, rays),
        Ambient::Line => line_svg(ts),
    }
}

fn svg_header(out: &mut String, w: u32, h: u32) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(out, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
}

fn polyline(out: &mut String, pts: &[(f64, f64)], color: &str) {
    if pts.len() < 2 {
        if let Some((x, y)) = pts.first() {
            let _ = writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="2" fill="{color}"/>"#);
        }
        return;
    }
    let coords: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
    let _ = writeln!(
        out,
        r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
        coords.join(" ")
    );
}

/// Maximal runs of consecutive active samples, as index ranges.
fn active_runs(values: &[Option<f64>]) -> Vec<std::ops::Range<usize>> {
    let mut runs = Vec::new();
    let mut start = None;
    for (j, v) in values.iter().enumerate() {
        match (v.is_some(), start) {
            (true, None) => start = Some(j),
            (false, Some(s)) => {
                runs.push(s..j);
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        runs.push(s..values.len());
    }
    runs
}

fn circle_svg(ts: &TrackSet, rays: &[f64]) -> String {
    let (size, c, scale) = (520u32, 260.0, 230.0);
    let mut out = String::new();
    svg_header(&mut out, size, size);
    let _ = writeln!(
        out,
        r##"<circle cx="{c}" cy="{c}" r="{scale}" fill="none" stroke="#888" stroke-width="1"/>"##
    );
    if let BasedSpace::QuotientCircle { k } = &ts.space {
        for piece in k.pieces() {
            let n = ((piece.hi - piece.lo) / 0.02).ceil().max(1.0) as usize;
            let pts: Vec<(f64, f64)> = (0..=n)
                .map(|i| {
                    let a = piece.lo + (piece.hi - piece.lo) * i as f64 / n as f64;
                    (c + scale * a.cos(), c - scale * a.sin())
                })
                .collect();
            let coords: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
            let _ = writeln!(
                out,
                r##"<polyline fill="none" stroke="#000" stroke-width="4" points="{}"/>"##,
                coords.join(" ")
            );
        }
    }
    for &theta in rays {
        let (x, y) = (c + scale * 1.05 * theta.cos(), c - scale * 1.05 * theta.sin());
        let _ = writeln!(
            out,
            r##"<line x1="{c}" y1="{c}" x2="{x:.2}" y2="{y:.2}" stroke="#bbb" stroke-dasharray="4 3"/>"##
        );
    }
    let (t0, t1) = (ts.params[0], *ts.params.last().unwrap());
    let span = if t1 > t0 { t1 - t0 } else { 1.0 };
    for (id, tr) in ts.tracks.iter().enumerate() {
        let color = PALETTE[id % PALETTE.len()];
        for run in active_runs(&tr.values) {
            let pts: Vec<(f64, f64)> = run
                .map(|j| {
                    let a = tr.values[j].unwrap().rem_euclid(TAU);
                    let r = scale * (0.55 + 0.45 * (ts.params[j] - t0) / span);
                    (c + r * a.cos(), c - r * a.sin())
                })
                .collect();
            polyline(&mut out, &pts, color);
        }
    }
    out.push_str("</svg>\n");
    out
}

fn line_svg(ts: &TrackSet) -> String {
    let (w, h, margin) = (640u32, 400u32, 30.0);
    let mut out = String::new();
    svg_header(&mut out, w, h);
    let values = ts.tracks.iter().flat_map(|tr| tr.values.iter().flatten().copied());
    let (mut lo, mut hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        (lo, hi) = (-1.0, 1.0);
    }
    if hi - lo < 1e-12 {
        (lo, hi) = (lo - 1.0, hi + 1.0);
    }
    let (t0, t1) = (ts.params[0], *ts.params.last().unwrap());
    let span = if t1 > t0 { t1 - t0 } else { 1.0 };
    let px = |t: f64| margin + (w as f64 - 2.0 * margin) * (t - t0) / span;
    let py = |v: f64| h as f64 - margin - (h as f64 - 2.0 * margin) * (v - lo) / (hi - lo);
    let _ = writeln!(
        out,
        r##"<rect x="{margin}" y="{margin}" width="{}" height="{}" fill="none" stroke="#888"/>"##,
        w as f64 - 2.0 * margin,
        h as f64 - 2.0 * margin
    );
    for (id, tr) in ts.tracks.iter().enumerate() {
        let color = PALETTE[id % PALETTE.len()];
        for run in active_runs(&tr.values) {
            let pts: Vec<(f64, f64)> =
                run.map(|j| (px(ts.params[j]), py(tr.values[j].unwrap()))).collect();
            polyline(&mut out, &pts, color);
        }
    }
    out.push_str("</svg>\n");
    out
}
