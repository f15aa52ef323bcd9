//! CSV encoding shared by the CLI and the experiment writers.
//!
//! Reals are written with 17 significant digits so that every `f64`
//! round-trips exactly.

use std::fmt::Write as _;

use crate::error::{AbcError, Result};
use crate::samplers::AcceptedDraw;

pub fn fmt_real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

pub fn parse_real(s: &str) -> Option<f64> {
    match s.trim() {
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        "nan" => Some(f64::NAN),
        t => t.parse().ok(),
    }
}

/// Draws as CSV: `theta_1..p, s_1..d, weight, distance`, optionally followed
/// by `theta_adj_1..p`.
pub fn write_draws(draws: &[AcceptedDraw], adjusted: Option<&[AcceptedDraw]>) -> String {
    let (p, d) = draws.first().map_or((0, 0), |x| (x.theta.len(), x.summary.len()));
    let mut header: Vec<String> = (1..=p).map(|i| format!("theta_{i}")).collect();
    header.extend((1..=d).map(|j| format!("s_{j}")));
    header.push("weight".into());
    header.push("distance".into());
    if adjusted.is_some() {
        header.extend((1..=p).map(|i| format!("theta_adj_{i}")));
    }
    let mut out = header.join(",");
    out.push('\n');
    for (k, x) in draws.iter().enumerate() {
        let mut cells: Vec<String> = x.theta.iter().chain(&x.summary).map(|v| fmt_real(*v)).collect();
        cells.push(fmt_real(x.weight));
        cells.push(fmt_real(x.distance));
        if let Some(adj) = adjusted {
            cells.extend(adj[k].theta.iter().map(|v| fmt_real(*v)));
        }
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}

/// Parses a draws CSV written by [`write_draws`]; extra columns are ignored.
pub fn read_draws(text: &str) -> Result<Vec<AcceptedDraw>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#'));
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| AbcError::InvalidArgument("empty draws file".into()))?
        .split(',')
        .map(str::trim)
        .collect();
    let cols = |prefix: &str| -> Vec<usize> {
        let mut v: Vec<(usize, usize)> = header
            .iter()
            .enumerate()
            .filter_map(|(i, h)| h.strip_prefix(prefix).and_then(|r| r.parse().ok()).map(|k: usize| (k, i)))
            .collect();
        v.sort();
        v.into_iter().map(|(_, i)| i).collect()
    };
    let theta_cols = cols("theta_");
    let s_cols = cols("s_");
    let find = |name: &str| {
        header
            .iter()
            .position(|h| *h == name)
            .ok_or_else(|| AbcError::InvalidArgument(format!("draws file lacks a '{name}' column")))
    };
    let (w_col, d_col) = (find("weight")?, find("distance")?);
    if theta_cols.is_empty() || s_cols.is_empty() {
        return Err(AbcError::InvalidArgument("draws file needs theta_* and s_* columns".into()));
    }
    lines
        .enumerate()
        .map(|(row, line)| {
            let cells: Vec<&str> = line.split(',').collect();
            let get = |i: usize| {
                cells
                    .get(i)
                    .and_then(|c| parse_real(c))
                    .ok_or_else(|| AbcError::InvalidArgument(format!("row {}: bad value in column {}", row + 1, i + 1)))
            };
            Ok(AcceptedDraw {
                theta: theta_cols.iter().map(|&i| get(i)).collect::<Result<_>>()?,
                summary: s_cols.iter().map(|&i| get(i)).collect::<Result<_>>()?,
                weight: get(w_col)?,
                distance: get(d_col)?,
            })
        })
        .collect()
}
