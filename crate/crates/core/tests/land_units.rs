use agromcda::suitability::{
    evaluate_unit, evaluate_units, parse_observations_csv, CropRequirementTable, FactorGroup, Observed,
    SuitClass,
};

const TABLE: &str = include_str!("../../../fixtures/corn_requirements.json");
const OBS: &str = include_str!("../../../fixtures/corn_observations.csv");

fn table() -> CropRequirementTable {
    let t: CropRequirementTable = serde_json::from_str(TABLE).unwrap();
    t.validate().unwrap();
    t
}

/// Reference rating of each characteristic, in SPL 1..6 order.
fn reference() -> Vec<(&'static str, [SuitClass; 6])> {
    use SuitClass::*;
    let all = |c| [c; 6];
    vec![
        ("temperature", all(S1)),
        ("dry_months", all(S1)),
        ("rainfall", all(S1)),
        ("humidity", all(S1)),
        ("drainage", all(S3)),
        ("texture", all(S1)),
        ("effective_depth", all(S1)),
        ("cec", all(S1)),
        ("base_saturation", [S3, S3, S3, S2, S3, S3]),
        ("ph", all(S3)),
        ("c_organic", all(S1)),
        ("n_total", all(S1)),
        ("p2o5", all(S2)),
        ("k2o", [S2, S3, S2, S2, S2, S2]),
        ("erosion", all(S1)),
        ("slope", all(S1)),
        ("flood", all(S1)),
    ]
}

#[test]
fn ratings_match_reference() {
    let t = table();
    let results = evaluate_units(&parse_observations_csv(OBS, &t).unwrap(), &t).unwrap();
    assert_eq!(results.len(), 6);
    for (name, classes) in reference() {
        for (r, expected) in results.iter().zip(classes) {
            assert_eq!(r.per_characteristic[name], expected, "{} {}", r.unit_id, name);
        }
    }
}

#[test]
fn subclasses() {
    let t = table();
    let results = evaluate_units(&parse_observations_csv(OBS, &t).unwrap(), &t).unwrap();
    let subclasses: Vec<&str> = results.iter().map(|r| r.subclass.as_str()).collect();
    assert_eq!(subclasses, ["S3rf", "S3rfn", "S3rf", "S3rf", "S3rf", "S3rf"]);
    assert_eq!(
        results[0].limiting_groups,
        vec![FactorGroup::Rooting, FactorGroup::NutrientRetention]
    );
}

#[test]
fn adding_an_s3_nutrient_adds_n() {
    let t = table();
    let mut unit = parse_observations_csv(OBS, &t).unwrap().remove(0);
    unit.values.insert("p2o5".into(), Observed::Number(5.0));
    let r = evaluate_unit(&unit, &t).unwrap();
    assert_eq!(r.per_characteristic["p2o5"], SuitClass::S3);
    assert_eq!(r.subclass, "S3rfn");
}

#[test]
fn boundary_values() {
    let t = table();
    let mut unit = parse_observations_csv(OBS, &t).unwrap().remove(0);
    // shared endpoints go to the better class
    for (value, expected) in [(50.0, SuitClass::S1), (35.0, SuitClass::S2), (34.9, SuitClass::S3)] {
        unit.values.insert("base_saturation".into(), Observed::Number(value));
        assert_eq!(evaluate_unit(&unit, &t).unwrap().per_characteristic["base_saturation"], expected);
    }
    unit.values.insert("drainage".into(), Observed::Label("Very Hampered".into()));
    let r = evaluate_unit(&unit, &t).unwrap();
    assert_eq!(r.subclass, "Nr");
}
