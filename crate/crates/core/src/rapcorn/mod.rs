//! Rapid-appraisal sustainability ordination.
//!
//! Objects scored on ordinal attributes are joined by synthetic reference
//! rows (GOOD, BAD and optional midpoint anchors), normalised to [0, 1],
//! ordinated in two dimensions with SMACOF and rotated so that BAD sits at
//! 0 and GOOD at 100 on the horizontal axis. An object's horizontal
//! position is its sustainability index.

mod mds;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use mds::{align_to_axis, classical_scaling, fit_statistics, smacof_mds, MdsSolution, Point, SmacofOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dimension {
    Ecological,
    Economic,
    Social,
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dimension::Ecological => "ecological",
            Dimension::Economic => "economic",
            Dimension::Social => "social",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GoodDirection {
    High,
    Low,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attribute {
    pub name: String,
    pub scale_min: i32,
    pub scale_max: i32,
    pub good_direction: GoodDirection,
}

impl Attribute {
    pub fn best(&self) -> i32 {
        match self.good_direction {
            GoodDirection::High => self.scale_max,
            GoodDirection::Low => self.scale_min,
        }
    }

    pub fn worst(&self) -> i32 {
        match self.good_direction {
            GoodDirection::High => self.scale_min,
            GoodDirection::Low => self.scale_max,
        }
    }

    /// Score mapped to [0, 1] with 1 at the good end.
    pub fn normalize(&self, score: i32) -> f64 {
        let t = f64::from(score - self.scale_min) / f64::from(self.scale_max - self.scale_min);
        match self.good_direction {
            GoodDirection::High => t,
            GoodDirection::Low => 1.0 - t,
        }
    }
}

/// Attributes of one sustainability dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeSchema {
    pub dimension: Dimension,
    pub attributes: Vec<Attribute>,
}

impl AttributeSchema {
    pub fn new(dimension: Dimension, attributes: Vec<Attribute>) -> Result<Self> {
        let s = AttributeSchema {
            dimension,
            attributes,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.attributes.is_empty() {
            return Err(Error::invalid("attribute schema", "no attributes"));
        }
        let mut names = BTreeSet::new();
        for a in &self.attributes {
            if !names.insert(a.name.as_str()) {
                return Err(Error::invalid(
                    "attribute schema",
                    format!("duplicate attribute `{}`", a.name),
                ));
            }
            if a.scale_min >= a.scale_max {
                return Err(Error::invalid(
                    "attribute schema",
                    format!("`{}`: scale_min must be below scale_max", a.name),
                ));
            }
        }
        Ok(())
    }

    /// Schema without attribute `idx`.
    pub fn without(&self, idx: usize) -> AttributeSchema {
        let mut attributes = self.attributes.clone();
        attributes.remove(idx);
        AttributeSchema {
            dimension: self.dimension,
            attributes,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowKind {
    Real,
    Good,
    Bad,
    MidLow,
    MidHigh,
}

impl RowKind {
    pub fn is_synthetic(self) -> bool {
        self != RowKind::Real
    }

    fn reserved_id(self) -> &'static str {
        match self {
            RowKind::Real => "",
            RowKind::Good => "GOOD",
            RowKind::Bad => "BAD",
            RowKind::MidLow => "MID_LOW",
            RowKind::MidHigh => "MID_HIGH",
        }
    }
}

const RESERVED: [&str; 4] = ["GOOD", "BAD", "MID_LOW", "MID_HIGH"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub id: String,
    pub kind: RowKind,
    pub scores: Vec<i32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    pub schema: AttributeSchema,
    pub rows: Vec<ScoreRow>,
}

impl ScoreMatrix {
    /// Matrix of real objects. Scores must lie on each attribute's scale.
    pub fn new(schema: AttributeSchema, objects: Vec<(String, Vec<i32>)>) -> Result<Self> {
        schema.validate()?;
        if objects.is_empty() {
            return Err(Error::invalid("score matrix", "no objects"));
        }
        let mut ids = BTreeSet::new();
        let mut rows = Vec::with_capacity(objects.len());
        for (id, scores) in objects {
            if RESERVED.contains(&id.as_str()) {
                return Err(Error::invalid("score matrix", format!("object id `{id}` is reserved")));
            }
            if !ids.insert(id.clone()) {
                return Err(Error::invalid("score matrix", format!("duplicate object `{id}`")));
            }
            if scores.len() != schema.attributes.len() {
                return Err(Error::invalid(
                    "score matrix",
                    format!("`{id}` has {} scores for {} attributes", scores.len(), schema.attributes.len()),
                ));
            }
            for (a, s) in schema.attributes.iter().zip(&scores) {
                if *s < a.scale_min || *s > a.scale_max {
                    return Err(Error::invalid(
                        "score matrix",
                        format!("`{id}`: {} score {s} outside {}..={}", a.name, a.scale_min, a.scale_max),
                    ));
                }
            }
            rows.push(ScoreRow {
                id,
                kind: RowKind::Real,
                scores,
            });
        }
        Ok(ScoreMatrix { schema, rows })
    }

    /// Read `id,<attribute>...` CSV; columns are matched to the schema by
    /// name, in any order.
    pub fn from_csv(schema: AttributeSchema, text: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers = rdr
            .headers()
            .map_err(|e| Error::Parse {
                line: 1,
                message: e.to_string(),
            })?
            .clone();
        let cols = schema
            .attributes
            .iter()
            .map(|a| {
                headers
                    .iter()
                    .position(|h| h == a.name)
                    .ok_or_else(|| Error::missing("score column", &a.name))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut objects = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| Error::Parse {
                line: e.position().map_or(0, |p| p.line() as usize),
                message: e.to_string(),
            })?;
            let line = rec.position().map_or(0, |p| p.line() as usize);
            let scores = cols
                .iter()
                .map(|&c| {
                    rec[c].parse::<i32>().map_err(|_| Error::Parse {
                        line,
                        message: format!("score `{}` is not an integer", &rec[c]),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            objects.push((rec[0].to_string(), scores));
        }
        ScoreMatrix::new(schema, objects)
    }

    pub fn real_rows(&self) -> impl Iterator<Item = &ScoreRow> {
        self.rows.iter().filter(|r| r.kind == RowKind::Real)
    }

    fn position(&self, kind: RowKind) -> Option<usize> {
        self.rows.iter().position(|r| r.kind == kind)
    }

    /// Same objects with attribute `idx` dropped; reference rows removed.
    pub fn without_attribute(&self, idx: usize) -> ScoreMatrix {
        ScoreMatrix {
            schema: self.schema.without(idx),
            rows: self
                .real_rows()
                .map(|r| {
                    let mut scores = r.scores.clone();
                    scores.remove(idx);
                    ScoreRow {
                        id: r.id.clone(),
                        kind: RowKind::Real,
                        scores,
                    }
                })
                .collect(),
        }
    }
}

/// Which synthetic rows join the real objects before ordination.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnchorPolicy {
    GoodBad,
    #[default]
    GoodBadMidpoints,
}

/// Append GOOD, BAD and, under [`AnchorPolicy::GoodBadMidpoints`], the
/// floor and ceiling of each scale midpoint as MID_LOW and MID_HIGH.
/// Existing reference rows are replaced.
pub fn add_reference_rows(matrix: &ScoreMatrix, policy: AnchorPolicy) -> ScoreMatrix {
    let attrs = &matrix.schema.attributes;
    let mut rows: Vec<ScoreRow> = matrix.real_rows().cloned().collect();
    let mut push = |kind: RowKind, scores: Vec<i32>| {
        rows.push(ScoreRow {
            id: kind.reserved_id().to_string(),
            kind,
            scores,
        })
    };
    push(RowKind::Good, attrs.iter().map(Attribute::best).collect());
    push(RowKind::Bad, attrs.iter().map(Attribute::worst).collect());
    if policy == AnchorPolicy::GoodBadMidpoints {
        // floor/ceil of (min + max) / 2 without going through floats
        push(
            RowKind::MidLow,
            attrs.iter().map(|a| (a.scale_min + a.scale_max).div_euclid(2)).collect(),
        );
        push(
            RowKind::MidHigh,
            attrs
                .iter()
                .map(|a| (a.scale_min + a.scale_max + 1).div_euclid(2))
                .collect(),
        );
    }
    ScoreMatrix {
        schema: matrix.schema.clone(),
        rows,
    }
}

/// Per-row scores mapped to [0, 1], 1 at the good end of every attribute.
pub fn normalize_scores(matrix: &ScoreMatrix) -> Result<Vec<Vec<f64>>> {
    if matrix.position(RowKind::Good).is_none() || matrix.position(RowKind::Bad).is_none() {
        return Err(Error::invalid("score matrix", "reference rows are missing"));
    }
    Ok(matrix
        .rows
        .iter()
        .map(|r| {
            matrix
                .schema
                .attributes
                .iter()
                .zip(&r.scores)
                .map(|(a, s)| a.normalize(*s))
                .collect()
        })
        .collect())
}

/// Pairwise distances; squared terms are summed in sorted order so the
/// result does not depend on attribute order.
fn euclidean_distances(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    points
        .iter()
        .map(|a| {
            points
                .iter()
                .map(|b| {
                    let mut sq: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).collect();
                    sq.sort_by(f64::total_cmp);
                    sq.iter().sum::<f64>().sqrt()
                })
                .collect()
        })
        .collect()
}

fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or_else(|| a.len().cmp(&b.len()))
}

/// Row order derived from the data alone, so the solver sees the same
/// problem however the objects were listed.
fn canonical_order(kinds: &[RowKind], points: &[Vec<f64>], distances: &[Vec<f64>]) -> Vec<usize> {
    let sorted = |v: &[f64]| {
        let mut v = v.to_vec();
        v.sort_by(f64::total_cmp);
        v
    };
    let profiles: Vec<(Vec<f64>, Vec<f64>)> = points
        .iter()
        .zip(distances)
        .map(|(p, d)| (sorted(d), sorted(p)))
        .collect();
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| {
        kinds[i]
            .cmp(&kinds[j])
            .then_with(|| lex_cmp(&profiles[i].0, &profiles[j].0))
            .then_with(|| lex_cmp(&profiles[i].1, &profiles[j].1))
            .then_with(|| lex_cmp(&points[i], &points[j]))
    });
    order
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RapParams {
    pub max_iter: usize,
    pub tol: f64,
    pub seed: u64,
    pub anchors: AnchorPolicy,
}

impl Default for RapParams {
    fn default() -> Self {
        RapParams {
            max_iter: 500,
            tol: 1e-8,
            seed: 0,
            anchors: AnchorPolicy::default(),
        }
    }
}

impl RapParams {
    fn smacof(&self) -> SmacofOptions {
        SmacofOptions {
            max_iter: self.max_iter,
            tol: self.tol,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrdinatedRow {
    pub id: String,
    pub kind: RowKind,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrdinationResult {
    pub dimension: Dimension,
    pub rows: Vec<OrdinatedRow>,
    /// Kruskal stress-1
    pub stress: f64,
    pub rsq: f64,
    pub iterations: usize,
    /// Index of each real object, in percent. Not clamped.
    pub index: BTreeMap<String, f64>,
    /// Real objects whose index falls outside [0, 100].
    pub out_of_range: Vec<String>,
}

impl OrdinationResult {
    /// Mean index over the real objects.
    pub fn dimension_index(&self) -> f64 {
        self.index.values().sum::<f64>() / self.index.len() as f64
    }

    pub fn has_warning(&self) -> bool {
        !self.out_of_range.is_empty()
    }
}

/// Anchor, normalise, ordinate and align; report each object's position
/// along the BAD→GOOD axis.
pub fn sustainability_index(matrix: &ScoreMatrix, params: &RapParams) -> Result<OrdinationResult> {
    matrix.schema.validate()?;
    if matrix.real_rows().next().is_none() {
        return Err(Error::invalid("score matrix", "no real objects"));
    }
    let anchored = add_reference_rows(matrix, params.anchors);
    let normalized = normalize_scores(&anchored)?;
    let distances = euclidean_distances(&normalized);
    let kinds: Vec<RowKind> = anchored.rows.iter().map(|r| r.kind).collect();
    let order = canonical_order(&kinds, &normalized, &distances);
    let permuted: Vec<Vec<f64>> = order
        .iter()
        .map(|&i| order.iter().map(|&j| distances[i][j]).collect())
        .collect();
    let sol = smacof_mds(&permuted, &params.smacof())?;
    let mut coords = vec![[0.0; 2]; order.len()];
    for (k, &i) in order.iter().enumerate() {
        coords[i] = sol.coords[k];
    }
    let good = anchored.position(RowKind::Good).expect("anchored");
    let bad = anchored.position(RowKind::Bad).expect("anchored");
    let aligned = align_to_axis(&coords, good, bad)?;

    let rows: Vec<OrdinatedRow> = anchored
        .rows
        .iter()
        .zip(&aligned)
        .map(|(r, p)| OrdinatedRow {
            id: r.id.clone(),
            kind: r.kind,
            x: p[0],
            y: p[1],
        })
        .collect();
    let index: BTreeMap<String, f64> = rows
        .iter()
        .filter(|r| r.kind == RowKind::Real)
        .map(|r| (r.id.clone(), r.x))
        .collect();
    let out_of_range = index
        .iter()
        .filter(|(_, v)| !(0.0..=100.0).contains(*v))
        .map(|(k, _)| k.clone())
        .collect();
    Ok(OrdinationResult {
        dimension: matrix.schema.dimension,
        rows,
        stress: sol.stress,
        rsq: sol.rsq,
        iterations: sol.iterations,
        index,
        out_of_range,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SustainabilityCategory {
    NotSustainable,
    LessSustainable,
    QuiteSustainable,
    VerySustainable,
}

impl SustainabilityCategory {
    pub fn label(self) -> &'static str {
        match self {
            SustainabilityCategory::NotSustainable => "Not Sustainable",
            SustainabilityCategory::LessSustainable => "Less Sustainable",
            SustainabilityCategory::QuiteSustainable => "Quite Sustainable",
            SustainabilityCategory::VerySustainable => "Very Sustainable",
        }
    }
}

impl fmt::Display for SustainabilityCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Upper bounds are closed: 25.00 is Not, 25.01 is Less.
pub fn categorize(index: f64) -> SustainabilityCategory {
    if index <= 25.0 {
        SustainabilityCategory::NotSustainable
    } else if index <= 50.0 {
        SustainabilityCategory::LessSustainable
    } else if index <= 75.0 {
        SustainabilityCategory::QuiteSustainable
    } else {
        SustainabilityCategory::VerySustainable
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttributeLeverage {
    pub attribute: String,
    pub rms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeverageReport {
    pub attributes: Vec<AttributeLeverage>,
}

impl LeverageReport {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.attributes.iter().find(|a| a.attribute == name).map(|a| a.rms)
    }
}

/// Root mean square change of the object indices when each attribute in
/// turn is left out. All reruns share `params`, seed included.
pub fn leverage(matrix: &ScoreMatrix, params: &RapParams) -> Result<LeverageReport> {
    let m = matrix.schema.attributes.len();
    if m < 2 {
        return Err(Error::invalid("leverage", "needs at least two attributes"));
    }
    let full = sustainability_index(matrix, params)?;
    let mut attributes = Vec::with_capacity(m);
    for (idx, attr) in matrix.schema.attributes.iter().enumerate() {
        let reduced = sustainability_index(&matrix.without_attribute(idx), params)?;
        let sum_sq: f64 = full
            .index
            .iter()
            .map(|(id, v)| (v - reduced.index[id]).powi(2))
            .sum();
        attributes.push(AttributeLeverage {
            attribute: attr.name.clone(),
            rms: (sum_sq / full.index.len() as f64).sqrt(),
        });
    }
    Ok(LeverageReport { attributes })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloParams {
    pub trials: usize,
    pub flip_prob: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObjectSpread {
    pub id: String,
    pub mean: f64,
    pub std_dev: f64,
    pub p2_5: f64,
    pub p97_5: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloReport {
    pub trials: usize,
    pub flip_prob: f64,
    pub seed: u64,
    pub objects: Vec<ObjectSpread>,
}

/// Generator for one trial. Trials are independent streams of the same
/// seed, so they can run in any order.
fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

/// Scores of the real objects after one random ±1 perturbation pass.
pub fn perturb(matrix: &ScoreMatrix, flip_prob: f64, rng: &mut impl Rng) -> ScoreMatrix {
    let mut out = matrix.clone();
    out.rows.retain(|r| r.kind == RowKind::Real);
    for row in &mut out.rows {
        for (s, a) in row.scores.iter_mut().zip(&matrix.schema.attributes) {
            if rng.random::<f64>() < flip_prob {
                let step = if rng.random::<bool>() { 1 } else { -1 };
                *s = (*s + step).clamp(a.scale_min, a.scale_max);
            }
        }
    }
    out
}

/// Linear-interpolation percentile of sorted data, `p` in [0, 1].
fn percentile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Index spread under random scoring error: in every trial each real score
/// moves one step up or down with probability `flip_prob`.
pub fn monte_carlo(
    matrix: &ScoreMatrix,
    mc: &MonteCarloParams,
    params: &RapParams,
) -> Result<MonteCarloReport> {
    if mc.trials == 0 {
        return Err(Error::invalid("monte carlo", "trials must be at least 1"));
    }
    if !(0.0..=1.0).contains(&mc.flip_prob) {
        return Err(Error::invalid("monte carlo", "flip_prob must lie in [0, 1]"));
    }
    let ids: Vec<String> = matrix.real_rows().map(|r| r.id.clone()).collect();
    let mut samples: Vec<Vec<f64>> = vec![Vec::with_capacity(mc.trials); ids.len()];
    for trial in 0..mc.trials {
        let mut rng = trial_rng(mc.seed, trial);
        let perturbed = perturb(matrix, mc.flip_prob, &mut rng);
        let result = sustainability_index(&perturbed, params)?;
        for (s, id) in samples.iter_mut().zip(&ids) {
            s.push(result.index[id]);
        }
    }
    let objects = ids
        .into_iter()
        .zip(samples)
        .map(|(id, mut s)| {
            let n = s.len() as f64;
            let mean = s.iter().sum::<f64>() / n;
            let var = if s.len() > 1 {
                s.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
            } else {
                0.0
            };
            s.sort_by(f64::total_cmp);
            ObjectSpread {
                id,
                mean,
                std_dev: var.sqrt(),
                p2_5: percentile(&s, 0.025),
                p97_5: percentile(&s, 0.975),
            }
        })
        .collect();
    Ok(MonteCarloReport {
        trials: mc.trials,
        flip_prob: mc.flip_prob,
        seed: mc.seed,
        objects,
    })
}
