//! Weighted raster overlay: per-aspect surfaces from class rasters, then
//! the weighted composite of the aspect surfaces.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::ahp::{Aspect, Hierarchy};
use crate::error::{Error, Result};
use crate::geodata::{assert_aligned, CategoricalRaster, NumericRaster};

/// Composite weights must sum to a value in this range.
pub const WEIGHT_SUM_RANGE: (f64, f64) = (0.98, 1.02);

#[derive(Debug, Clone, PartialEq)]
pub struct SubcriterionLayer {
    pub name: String,
    pub raster: CategoricalRaster,
    pub class_values: BTreeMap<String, f64>,
}

impl SubcriterionLayer {
    pub fn new(
        name: impl Into<String>,
        raster: CategoricalRaster,
        class_values: BTreeMap<String, f64>,
    ) -> Result<Self> {
        let name = name.into();
        for label in raster.legend.labels() {
            if !class_values.contains_key(label) {
                return Err(Error::missing("class value", format!("{name}: {label}")));
            }
        }
        Ok(SubcriterionLayer {
            name,
            raster,
            class_values,
        })
    }

    /// Class value per cell, `None` for nodata.
    fn lookup(&self) -> Vec<Option<f64>> {
        let by_code: BTreeMap<i64, f64> = self
            .raster
            .legend
            .iter()
            .map(|(c, l)| (c, self.class_values[l]))
            .collect();
        (0..self.raster.codes().len())
            .map(|i| self.raster.code(i).map(|c| by_code[&c]))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AspectSurface {
    pub name: String,
    pub raster: NumericRaster,
}

/// Cell-wise `Σ_k score_k × class value of layer k`. Nodata in any layer
/// gives nodata.
pub fn aspect_score(
    name: impl Into<String>,
    layers: &[SubcriterionLayer],
    scores: &BTreeMap<String, f64>,
) -> Result<AspectSurface> {
    let first = layers
        .first()
        .ok_or_else(|| Error::invalid("aspect score", "no layers"))?;
    let headers: Vec<_> = layers.iter().map(|l| &l.raster.header).collect();
    assert_aligned(&headers)?;
    let weights = layers
        .iter()
        .map(|l| {
            scores
                .get(&l.name)
                .copied()
                .ok_or_else(|| Error::missing("subcriterion score", &l.name))
        })
        .collect::<Result<Vec<f64>>>()?;
    let lookups: Vec<Vec<Option<f64>>> = layers.iter().map(SubcriterionLayer::lookup).collect();
    let n = first.raster.header.cell_count();
    let values = (0..n).map(|i| {
        let mut acc = 0.0;
        for (w, lk) in weights.iter().zip(&lookups) {
            acc += w * lk[i]?;
        }
        Some(acc)
    });
    Ok(AspectSurface {
        name: name.into(),
        raster: NumericRaster::from_options(first.raster.header, values)?,
    })
}

/// Aspect surfaces for every aspect of `hierarchy`, each built from the
/// layers named after its subcriteria.
pub fn aspect_surfaces(
    hierarchy: &Hierarchy,
    layers: &BTreeMap<String, SubcriterionLayer>,
) -> Result<Vec<AspectSurface>> {
    hierarchy
        .aspects
        .iter()
        .map(|a| {
            let picked = a
                .subcriteria
                .iter()
                .map(|s| {
                    layers
                        .get(&s.name)
                        .cloned()
                        .ok_or_else(|| Error::missing("layer for subcriterion", &s.name))
                })
                .collect::<Result<Vec<_>>>()?;
            let scores = a.subcriteria.iter().map(|s| (s.name.clone(), s.score)).collect();
            aspect_score(&a.name, &picked, &scores)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CompositeOptions {
    /// Rescale the weights to sum 1 before combining.
    pub renormalize: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightRecord {
    pub supplied: Vec<f64>,
    pub used: Vec<f64>,
    pub supplied_sum: f64,
    pub renormalized: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Composite {
    pub raster: NumericRaster,
    pub weights: WeightRecord,
}

/// Cell-wise weighted sum of aspect surfaces. Weights must be non-negative
/// with a sum in [0.98, 1.02]; they are used as given unless
/// `renormalize` is set.
pub fn weighted_composite(
    surfaces: &[&AspectSurface],
    weights: &[f64],
    opts: CompositeOptions,
) -> Result<Composite> {
    if surfaces.is_empty() || surfaces.len() != weights.len() {
        return Err(Error::invalid("composite", "need one weight per surface"));
    }
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::invalid("composite", "weights must be finite and non-negative"));
    }
    let sum: f64 = weights.iter().sum();
    let (lo, hi) = WEIGHT_SUM_RANGE;
    if sum < lo - 1e-12 || sum > hi + 1e-12 {
        return Err(Error::invalid(
            "composite",
            format!("weights sum to {sum:.4}, outside [{lo}, {hi}]"),
        ));
    }
    let headers: Vec<_> = surfaces.iter().map(|s| &s.raster.header).collect();
    assert_aligned(&headers)?;
    let used: Vec<f64> = if opts.renormalize {
        weights.iter().map(|w| w / sum).collect()
    } else {
        weights.to_vec()
    };
    let header = surfaces[0].raster.header;
    let values = (0..header.cell_count()).map(|i| {
        let mut acc = 0.0;
        for (s, w) in surfaces.iter().zip(&used) {
            acc += w * s.raster.get(i)?;
        }
        Some(acc)
    });
    Ok(Composite {
        raster: NumericRaster::from_options(header, values)?,
        weights: WeightRecord {
            supplied: weights.to_vec(),
            used,
            supplied_sum: sum,
            renormalized: opts.renormalize,
        },
    })
}

/// Three-aspect composite: ecological, economic and social surfaces with
/// their weights in that order.
pub fn sp_corn(
    ecological: &AspectSurface,
    economic: &AspectSurface,
    social: &AspectSurface,
    weights: [f64; 3],
    opts: CompositeOptions,
) -> Result<Composite> {
    weighted_composite(&[ecological, economic, social], &weights, opts)
}

/// Smallest and largest value an aspect surface can take given the class
/// values and scores of its layers.
pub fn achievable_range(layers: &[SubcriterionLayer], scores: &BTreeMap<String, f64>) -> (f64, f64) {
    layers.iter().fold((0.0, 0.0), |(lo, hi), l| {
        let w = scores.get(&l.name).copied().unwrap_or(0.0);
        let vals = l.class_values.values();
        let min = vals.clone().fold(f64::INFINITY, |a, b| a.min(*b));
        let max = vals.fold(f64::NEG_INFINITY, |a, b| a.max(*b));
        let (a, b) = (w * min, w * max);
        (lo + a.min(b), hi + a.max(b))
    })
}

/// Range of an aspect surface implied by its hierarchy entry alone.
pub fn aspect_bounds(aspect: &Aspect) -> (f64, f64) {
    aspect.subcriteria.iter().fold((0.0, 0.0), |(lo, hi), s| {
        let min = s.classes.iter().map(|c| c.value).fold(f64::INFINITY, f64::min);
        let max = s.classes.iter().map(|c| c.value).fold(f64::NEG_INFINITY, f64::max);
        let (a, b) = (s.score * min, s.score * max);
        (lo + a.min(b), hi + a.max(b))
    })
}
