//! Seeded inputs for the kernel benchmarks in `benches/`.

use std::collections::BTreeMap;

use agromcda::ahp::PairwiseMatrix;
use agromcda::geodata::{CategoricalRaster, GridHeader, Legend};
use agromcda::overlay::SubcriterionLayer;
use agromcda::rapcorn::{Attribute, AttributeSchema, Dimension, GoodDirection, ScoreMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n` values drawn uniformly from [0, 1).
pub fn values(n: usize, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    (0..n).map(|_| r.random_range(0.0..1.0)).collect()
}

/// Euclidean distances between `n` random points in the plane.
pub fn planar_distances(n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut r = rng(seed);
    let pts: Vec<[f64; 2]> = (0..n).map(|_| [r.random_range(0.0..1.0), r.random_range(0.0..1.0)]).collect();
    pts.iter()
        .map(|a| pts.iter().map(|b| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()).collect())
        .collect()
}

/// Reciprocal matrix of order `n` with judgments on the 1..9 scale.
pub fn pairwise(n: usize, seed: u64) -> PairwiseMatrix {
    let mut r = rng(seed);
    let upper: Vec<f64> = (0..n * (n - 1) / 2)
        .map(|_| {
            let v = f64::from(r.random_range(1..=9));
            if r.random_bool(0.5) { v } else { 1.0 / v }
        })
        .collect();
    PairwiseMatrix::from_upper(n, &upper).expect("reciprocal by construction")
}

/// `objects` rows scored on `attributes` attributes of scale 0..=3.
pub fn scores(objects: usize, attributes: usize, seed: u64) -> ScoreMatrix {
    let mut r = rng(seed);
    let attrs = (0..attributes)
        .map(|j| Attribute {
            name: format!("a{j}"),
            scale_min: 0,
            scale_max: 3,
            good_direction: if j % 3 == 0 { GoodDirection::Low } else { GoodDirection::High },
        })
        .collect();
    let schema = AttributeSchema::new(Dimension::Ecological, attrs).expect("valid schema");
    let rows = (0..objects)
        .map(|i| (format!("o{i}"), (0..attributes).map(|_| r.random_range(0..=3)).collect()))
        .collect();
    ScoreMatrix::new(schema, rows).expect("valid scores")
}

/// Square three-class layer with random classes.
pub fn layer(name: &str, side: usize, seed: u64) -> SubcriterionLayer {
    let mut r = rng(seed);
    let header = GridHeader::new(side, side, 0.0, 0.0, 30.0, -9999.0).expect("header");
    let legend = Legend::new([(1, "low".to_string()), (2, "mid".to_string()), (3, "high".to_string())]).expect("legend");
    let codes = (0..side * side).map(|_| r.random_range(1..=3)).collect();
    let raster = CategoricalRaster::new(header, codes, legend).expect("raster");
    let values: BTreeMap<String, f64> = [("low", 0.1), ("mid", 0.3), ("high", 0.6)]
        .into_iter()
        .map(|(l, v)| (l.to_string(), v))
        .collect();
    SubcriterionLayer::new(name, raster, values).expect("layer")
}
