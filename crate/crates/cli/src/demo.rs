//! Synthetic example scenario: a 50×50 study area with six land units,
//! eleven subcriterion class maps, three sets of appraisal scores and a
//! config wiring them together. Everything is derived from closed-form
//! patterns, so the same files come out on every run.

use std::path::Path;

use agromcda::ahp::Hierarchy;
use agromcda::geodata::{serialize_ascii_grid, DEFAULT_NODATA};
use agromcda::{GridHeader, NumericRaster};
use serde_json::json;

use crate::error::CliError;
use crate::{csv_field, slug};

pub const CORN_REQUIREMENTS: &str = include_str!("../../../fixtures/corn_requirements.json");
pub const OBSERVATIONS: &str = include_str!("../../../fixtures/corn_observations.csv");
pub const HIERARCHY: &str = include_str!("../../../fixtures/criteria_hierarchy.json");

pub const ROWS: usize = 50;
pub const COLS: usize = 50;
/// 100 m cells, one hectare each.
pub const CELLSIZE: f64 = 100.0;

pub fn header() -> GridHeader {
    GridHeader::new(COLS, ROWS, 500_000.0, 9_100_000.0, CELLSIZE, DEFAULT_NODATA).expect("valid header")
}

/// Cells outside the surveyed area.
pub fn outside(row: usize, col: usize) -> bool {
    row + col < 3
}

/// Land unit 1..=6 of a cell.
pub fn unit_of(row: usize, col: usize) -> usize {
    1 + col * 3 / COLS + if row >= ROWS / 2 { 3 } else { 0 }
}

/// Class index 0..3 of subcriterion `k` at a cell. Diagonal bands whose
/// direction and width vary by subcriterion.
pub fn class_of(k: usize, row: usize, col: usize) -> usize {
    let band = (row * (k % 4 + 1) + col * (4 - k % 4) + 7 * k) / (9 + k);
    // skew toward the middle class
    [0, 1, 1, 2, 1][band % 5]
}

fn grid(f: impl Fn(usize, usize) -> f64) -> NumericRaster {
    let h = header();
    let cells = (0..ROWS)
        .flat_map(|r| (0..COLS).map(move |c| (r, c)))
        .map(|(r, c)| if outside(r, c) { DEFAULT_NODATA } else { f(r, c) })
        .collect();
    NumericRaster::new(h, cells).expect("valid raster")
}

/// Attribute name, scale maximum and whether low scores are good.
type AttrSpec = (&'static str, i32, bool);

const ECOLOGICAL: [AttrSpec; 11] = [
    ("soil_organic_carbon", 3, false),
    ("biological_agents", 2, false),
    ("fertilization", 3, false),
    ("pesticide_use", 3, true),
    ("land_conversion", 2, true),
    ("erosion_control", 2, false),
    ("water_use", 3, false),
    ("crop_rotation", 2, false),
    ("residue_return", 2, false),
    ("tillage_intensity", 3, true),
    ("irrigation_condition", 3, false),
];

const ECONOMIC: [AttrSpec; 7] = [
    ("profit", 3, false),
    ("yield_per_hectare", 3, false),
    ("market_access", 2, false),
    ("price_stability", 2, false),
    ("input_cost", 3, true),
    ("credit_access", 2, false),
    ("farm_income", 3, false),
];

const SOCIAL: [AttrSpec; 7] = [
    ("farmer_welfare", 3, false),
    ("women_involvement", 2, false),
    ("education_level", 3, false),
    ("land_tenure", 2, false),
    ("extension_contact", 3, false),
    ("group_membership", 2, false),
    ("conflict_frequency", 2, true),
];

const GROUPS: usize = 8;

fn rap_files(dimension: &str, attrs: &[AttrSpec], offset: usize) -> (String, String) {
    let schema = json!({
        "dimension": dimension,
        "attributes": attrs.iter().map(|(name, max, low)| json!({
            "name": name,
            "scale_min": 0,
            "scale_max": max,
            "good_direction": if *low { "low" } else { "high" },
        })).collect::<Vec<_>>(),
    });
    let mut csv = String::from("id");
    for (name, _, _) in attrs {
        csv.push(',');
        csv.push_str(name);
    }
    csv.push('\n');
    for g in 0..GROUPS {
        csv.push_str(&format!("G{}", g + 1));
        for (j, (_, max, _)) in attrs.iter().enumerate() {
            let score = (g * 3 + j * 5 + offset + g * j) % (*max as usize + 1);
            csv.push_str(&format!(",{score}"));
        }
        csv.push('\n');
    }
    (pretty(&schema), csv)
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn write(dir: &Path, rel: &str, contents: &str) -> Result<(), CliError> {
    let path = dir.join(rel);
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| CliError::io(parent.display().to_string(), e))?;
    }
    std::fs::write(&path, contents).map_err(|e| CliError::io(path.display().to_string(), e))
}

/// Write the scenario and its `config.json` into `dir`.
pub fn write_scenario(dir: &Path) -> Result<(), CliError> {
    write(dir, "corn_requirements.json", CORN_REQUIREMENTS)?;
    write(dir, "observations.csv", OBSERVATIONS)?;
    write(dir, "hierarchy.json", HIERARCHY)?;

    let units = grid(|r, c| unit_of(r, c) as f64);
    write(dir, "units.asc", &serialize_ascii_grid(&units, 0))?;
    let mut legend = String::from("code,label\n");
    for u in 1..=6 {
        legend.push_str(&format!("{u},SPL{u}\n"));
    }
    write(dir, "units_legend.csv", &legend)?;

    let mut dims = Vec::new();
    for (i, (name, attrs)) in [("ecological", &ECOLOGICAL[..]), ("economic", &ECONOMIC[..]), ("social", &SOCIAL[..])]
        .into_iter()
        .enumerate()
    {
        let (schema, scores) = rap_files(name, attrs, i * 2);
        let schema_path = format!("rap/{name}_schema.json");
        let scores_path = format!("rap/{name}_scores.csv");
        write(dir, &schema_path, &schema)?;
        write(dir, &scores_path, &scores)?;
        dims.push(json!({"schema": schema_path, "scores": scores_path}));
    }

    let hierarchy: Hierarchy = serde_json::from_str(HIERARCHY).expect("bundled hierarchy");
    let mut layers = serde_json::Map::new();
    let subcriteria = hierarchy.aspects.iter().flat_map(|a| &a.subcriteria);
    for (k, s) in subcriteria.enumerate() {
        let raster = grid(|r, c| (class_of(k, r, c) + 1) as f64);
        let base = format!("layers/{}", slug(&s.name));
        write(dir, &format!("{base}.asc"), &serialize_ascii_grid(&raster, 0))?;
        let mut legend = String::from("code,label\n");
        for (i, c) in s.classes.iter().enumerate() {
            legend.push_str(&format!("{},{}\n", i + 1, csv_field(&c.label)));
        }
        write(dir, &format!("{base}_legend.csv"), &legend)?;
        layers.insert(
            s.name.clone(),
            json!({"raster": format!("{base}.asc"), "legend": format!("{base}_legend.csv")}),
        );
    }

    let organic = "Raise soil organic matter with organic fertiliser";
    let partners = "Build partnerships among government, research institutes and private firms";
    let capacity = "Run capacity-building and empowerment programmes for farmers";
    let schooling = "Widen access to farmer education programmes";
    let config = json!({
        "seed": 42,
        "output_dir": "out",
        "suitability": {
            "requirements": "corn_requirements.json",
            "observations": "observations.csv",
            "units": {"raster": "units.asc", "legend": "units_legend.csv"},
        },
        "rap": {
            "dimensions": dims,
            "monte_carlo": {"trials": 50, "flip_prob": 0.1},
        },
        "ahp": {"hierarchy": "hierarchy.json"},
        "overlay": {
            "layers": layers,
            "weights": {"variant": "composite", "values": [0.46, 0.32, 0.21]},
        },
        "classify": {
            "k": 3,
            "directions": {
                "1": [organic, partners],
                "2": [organic, capacity, partners],
                "3": [organic, capacity, schooling, partners],
            },
        },
    });
    write(dir, "config.json", &pretty(&config))
}
