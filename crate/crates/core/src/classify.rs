//! Fisher–Jenks natural breaks and priority classification.
//!
//! [`jenks_breaks`] finds the partition of the sorted values into `k`
//! contiguous classes with the smallest within-class sum of squared
//! deviations (SDCM), by dynamic programming over the distinct values.
//! Goodness of variance fit is `1 - SDCM / SDAM`, with SDAM the squared
//! deviation about the overall mean.
//!
//! Class membership is right-closed: a value equal to a break belongs to
//! the class below it. When classifying a raster the highest class becomes
//! priority 1, so a cell sitting exactly on the upper break goes to the
//! lower priority (priority 2 for three classes).

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geodata::{CategoricalRaster, Legend, NumericRaster};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BreaksResult {
    pub k: usize,
    /// Interior class boundaries, strictly ascending; each is the upper
    /// end (inclusive) of its class.
    pub breaks: Vec<f64>,
    pub sdam: f64,
    pub sdcm: f64,
    pub gvf: f64,
}

fn sum_sq_dev(sorted: &[f64]) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let mean = sorted.iter().sum::<f64>() / sorted.len() as f64;
    sorted.iter().map(|v| (v - mean) * (v - mean)).sum()
}

fn sorted_finite(values: &[f64]) -> Result<Vec<f64>> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("breaks", "values must be finite"));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Slices of `sorted` per right-closed class.
fn class_slices<'a>(sorted: &'a [f64], breaks: &[f64]) -> Vec<&'a [f64]> {
    let mut out = Vec::with_capacity(breaks.len() + 1);
    let mut start = 0;
    for b in breaks {
        let end = start + sorted[start..].partition_point(|v| v <= b);
        out.push(&sorted[start..end]);
        start = end;
    }
    out.push(&sorted[start..]);
    out
}

fn gvf_from(sdam: f64, sdcm: f64) -> f64 {
    if sdam == 0.0 {
        1.0
    } else {
        (1.0 - sdcm / sdam).clamp(0.0, 1.0)
    }
}

/// Statistics of a given set of breaks.
pub fn breaks_result(values: &[f64], breaks: &[f64]) -> Result<BreaksResult> {
    if values.is_empty() {
        return Err(Error::invalid("breaks", "no values"));
    }
    if breaks.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::invalid("breaks", "breaks must be strictly ascending"));
    }
    let sorted = sorted_finite(values)?;
    let sdam = sum_sq_dev(&sorted);
    let sdcm = class_slices(&sorted, breaks).into_iter().map(sum_sq_dev).sum();
    Ok(BreaksResult {
        k: breaks.len() + 1,
        breaks: breaks.to_vec(),
        sdam,
        sdcm,
        gvf: gvf_from(sdam, sdcm),
    })
}

/// Goodness of variance fit of `breaks` on `values`; 1 for constant data.
pub fn gvf(values: &[f64], breaks: &[f64]) -> f64 {
    breaks_result(values, breaks).map_or(1.0, |r| r.gvf)
}

/// Exact optimal `k`-class natural breaks.
///
/// Runs in O(k·m²) for m distinct values. Among partitions with equal
/// SDCM the one with the lowest first break wins, then the lowest second,
/// and so on.
pub fn jenks_breaks(values: &[f64], k: usize) -> Result<BreaksResult> {
    if values.is_empty() {
        return Err(Error::invalid("breaks", "no values"));
    }
    if k == 0 {
        return Err(Error::invalid("breaks", "k must be at least 1"));
    }
    let sorted = sorted_finite(values)?;

    let mut distinct: Vec<f64> = Vec::new();
    let mut counts: Vec<f64> = Vec::new();
    for &v in &sorted {
        if distinct.last() == Some(&v) {
            *counts.last_mut().unwrap() += 1.0;
        } else {
            distinct.push(v);
            counts.push(1.0);
        }
    }
    let m = distinct.len();
    if k > m {
        return Err(Error::invalid(
            "breaks",
            format!("k = {k} exceeds the {m} distinct values"),
        ));
    }

    // weighted prefix sums over distinct values
    let mut w = vec![0.0; m + 1];
    let mut s1 = vec![0.0; m + 1];
    let mut s2 = vec![0.0; m + 1];
    for i in 0..m {
        w[i + 1] = w[i] + counts[i];
        s1[i + 1] = s1[i] + counts[i] * distinct[i];
        s2[i + 1] = s2[i] + counts[i] * distinct[i] * distinct[i];
    }
    // squared deviation of distinct values a..=b
    let cost = |a: usize, b: usize| -> f64 {
        let n = w[b + 1] - w[a];
        let s = s1[b + 1] - s1[a];
        (s2[b + 1] - s2[a] - s * s / n).max(0.0)
    };

    // best[j][i]: optimal cost of splitting distinct[i..] into j + 1 classes;
    // end[j][i]: last index of the first of those classes.
    let mut best = vec![vec![f64::INFINITY; m]; k];
    let mut end = vec![vec![0usize; m]; k];
    for i in 0..m {
        best[0][i] = cost(i, m - 1);
        end[0][i] = m - 1;
    }
    for j in 1..k {
        for i in 0..m.saturating_sub(j) {
            let mut bv = f64::INFINITY;
            let mut be = i;
            for e in i..m - j {
                let c = cost(i, e) + best[j - 1][e + 1];
                if c < bv {
                    bv = c;
                    be = e;
                }
            }
            best[j][i] = bv;
            end[j][i] = be;
        }
    }

    let mut breaks = Vec::with_capacity(k - 1);
    let mut i = 0;
    for j in (1..k).rev() {
        let e = end[j][i];
        breaks.push(distinct[e]);
        i = e + 1;
    }
    breaks_result(&sorted, &breaks)
}

pub fn priority_label(priority: usize) -> String {
    const ORDINALS: [&str; 10] = [
        "First", "Second", "Third", "Fourth", "Fifth", "Sixth", "Seventh", "Eighth", "Ninth", "Tenth",
    ];
    match ORDINALS.get(priority.wrapping_sub(1)) {
        Some(o) => format!("{o} Priority"),
        None => format!("Priority {priority}"),
    }
}

pub fn priority_legend(k: usize) -> Result<Legend> {
    Legend::new((1..=k).map(|p| (p as i64, priority_label(p))))
}

/// Priority of a value: 1 for the top class, `k` for the bottom one.
pub fn priority_of(v: f64, breaks: &[f64]) -> usize {
    let class_from_bottom = breaks.iter().filter(|b| v > **b).count();
    breaks.len() + 1 - class_from_bottom
}

/// Priority raster from a numeric raster and its breaks.
pub fn classify_raster(raster: &NumericRaster, breaks: &BreaksResult) -> Result<CategoricalRaster> {
    let k = breaks.breaks.len() + 1;
    let nodata = raster.header.nodata_code();
    if (1..=k as i64).contains(&nodata) {
        return Err(Error::invalid(
            "priority raster",
            format!("nodata value {nodata} collides with a priority code"),
        ));
    }
    let codes = raster
        .values()
        .map(|v| v.map_or(nodata, |v| priority_of(v, &breaks.breaks) as i64))
        .collect();
    CategoricalRaster::new(raster.header, codes, priority_legend(k)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrioritySummary {
    pub priority: usize,
    pub label: String,
    pub cells: usize,
    pub hectares: f64,
    /// Smallest and largest classified value, absent for empty classes.
    pub min: Option<f64>,
    pub max: Option<f64>,
}

/// Cell counts, areas and value ranges per priority.
pub fn summarize_priorities(values: &NumericRaster, priorities: &CategoricalRaster) -> Vec<PrioritySummary> {
    let mut acc: BTreeMap<i64, (usize, f64, f64)> = BTreeMap::new();
    for i in 0..priorities.codes().len() {
        if let (Some(code), Some(v)) = (priorities.code(i), values.get(i)) {
            let e = acc.entry(code).or_insert((0, f64::INFINITY, f64::NEG_INFINITY));
            e.0 += 1;
            e.1 = e.1.min(v);
            e.2 = e.2.max(v);
        }
    }
    let ha = priorities.header.cell_hectares();
    priorities
        .legend
        .iter()
        .map(|(code, label)| {
            let (cells, lo, hi) = acc.get(&code).copied().unwrap_or((0, f64::NAN, f64::NAN));
            PrioritySummary {
                priority: code as usize,
                label: label.to_string(),
                cells,
                hectares: cells as f64 * ha,
                min: (cells > 0).then_some(lo),
                max: (cells > 0).then_some(hi),
            }
        })
        .collect()
}
