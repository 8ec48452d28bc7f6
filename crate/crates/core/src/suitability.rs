//! Maximum-limitation land suitability matching.
//!
//! Each land characteristic is rated S1..N against a crop requirement
//! table. A unit's overall class is its worst rating, and its subclass
//! appends the letters of every limiting-factor group that reaches that
//! class, in the order `t w r f n e b`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geodata::CategoricalRaster;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SuitClass {
    S1,
    S2,
    S3,
    N,
}

impl SuitClass {
    pub const RATED: [SuitClass; 3] = [SuitClass::S1, SuitClass::S2, SuitClass::S3];

    pub fn as_str(self) -> &'static str {
        match self {
            SuitClass::S1 => "S1",
            SuitClass::S2 => "S2",
            SuitClass::S3 => "S3",
            SuitClass::N => "N",
        }
    }
}

impl fmt::Display for SuitClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Limiting-factor group. Declaration order is the canonical subclass order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FactorGroup {
    /// temperature
    #[serde(rename = "t")]
    Temperature,
    /// water availability
    #[serde(rename = "w")]
    Water,
    /// rooting medium
    #[serde(rename = "r")]
    Rooting,
    /// nutrient retention
    #[serde(rename = "f")]
    NutrientRetention,
    /// available nutrients
    #[serde(rename = "n")]
    Nutrients,
    /// erosion hazard
    #[serde(rename = "e")]
    Erosion,
    /// flood hazard
    #[serde(rename = "b")]
    Flood,
}

impl FactorGroup {
    pub fn letter(self) -> char {
        match self {
            FactorGroup::Temperature => 't',
            FactorGroup::Water => 'w',
            FactorGroup::Rooting => 'r',
            FactorGroup::NutrientRetention => 'f',
            FactorGroup::Nutrients => 'n',
            FactorGroup::Erosion => 'e',
            FactorGroup::Flood => 'b',
        }
    }
}

/// Rating rules of one characteristic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ClassRules {
    /// Closed intervals per class. A value takes the first class (S1, S2,
    /// S3) with a matching interval, otherwise N.
    Numeric { rules: BTreeMap<SuitClass, Vec<[f64; 2]>> },
    /// Explicit label → class map. Unknown labels are an error.
    Categorical { classes: BTreeMap<String, SuitClass> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicSpec {
    pub name: String,
    pub group: FactorGroup,
    #[serde(flatten)]
    pub rules: ClassRules,
}

impl CharacteristicSpec {
    pub fn validate(&self) -> Result<()> {
        let ClassRules::Numeric { rules } = &self.rules else {
            return Ok(());
        };
        if rules.contains_key(&SuitClass::N) {
            return Err(Error::invalid(
                "characteristic",
                format!("`{}`: N is the fallback class and takes no intervals", self.name),
            ));
        }
        for (class, intervals) in rules {
            let mut sorted = intervals.clone();
            for [lo, hi] in &sorted {
                if lo.is_nan() || hi.is_nan() || lo > hi {
                    return Err(Error::invalid(
                        "characteristic",
                        format!("`{}` {class}: bad interval [{lo}, {hi}]", self.name),
                    ));
                }
            }
            sorted.sort_by(|a, b| a[0].total_cmp(&b[0]));
            if sorted.windows(2).any(|w| w[1][0] <= w[0][1]) {
                return Err(Error::invalid(
                    "characteristic",
                    format!("`{}` {class}: overlapping intervals", self.name),
                ));
            }
        }
        Ok(())
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self.rules, ClassRules::Numeric { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CropRequirementTable {
    #[serde(default)]
    pub crop: String,
    pub characteristics: Vec<CharacteristicSpec>,
}

impl CropRequirementTable {
    pub fn validate(&self) -> Result<()> {
        if self.characteristics.is_empty() {
            return Err(Error::invalid("crop requirement table", "no characteristics"));
        }
        let mut seen = BTreeSet::new();
        for c in &self.characteristics {
            if !seen.insert(c.name.as_str()) {
                return Err(Error::invalid(
                    "crop requirement table",
                    format!("duplicate characteristic `{}`", c.name),
                ));
            }
            c.validate()?;
        }
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&CharacteristicSpec> {
        self.characteristics.iter().find(|c| c.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Observed {
    Number(f64),
    Label(String),
}

impl From<f64> for Observed {
    fn from(v: f64) -> Self {
        Observed::Number(v)
    }
}

impl From<&str> for Observed {
    fn from(v: &str) -> Self {
        Observed::Label(v.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandUnitObservation {
    pub unit_id: String,
    pub values: BTreeMap<String, Observed>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuitabilityResult {
    pub unit_id: String,
    pub per_characteristic: BTreeMap<String, SuitClass>,
    pub overall: SuitClass,
    pub limiting_groups: Vec<FactorGroup>,
    pub subclass: String,
}

pub fn rate_characteristic(value: &Observed, spec: &CharacteristicSpec) -> Result<SuitClass> {
    match (&spec.rules, value) {
        (ClassRules::Numeric { rules }, Observed::Number(v)) => {
            let hit = SuitClass::RATED.into_iter().find(|class| {
                rules
                    .get(class)
                    .is_some_and(|ivs| ivs.iter().any(|[lo, hi]| lo <= v && v <= hi))
            });
            Ok(hit.unwrap_or(SuitClass::N))
        }
        (ClassRules::Categorical { classes }, Observed::Label(label)) => classes
            .get(label)
            .copied()
            .ok_or_else(|| Error::missing("category label", format!("{}: {label}", spec.name))),
        (ClassRules::Numeric { .. }, Observed::Label(l)) => Err(Error::invalid(
            "observation",
            format!("`{}` expects a number, got `{l}`", spec.name),
        )),
        (ClassRules::Categorical { .. }, Observed::Number(v)) => Err(Error::invalid(
            "observation",
            format!("`{}` expects a label, got {v}", spec.name),
        )),
    }
}

/// Subclass label from the overall class and its limiting groups.
pub fn subclass_label(overall: SuitClass, groups: &[FactorGroup]) -> String {
    let mut s = overall.as_str().to_string();
    if overall != SuitClass::S1 {
        let mut sorted = groups.to_vec();
        sorted.sort();
        sorted.dedup();
        s.extend(sorted.iter().map(|g| g.letter()));
    }
    s
}

pub fn evaluate_unit(
    obs: &LandUnitObservation,
    table: &CropRequirementTable,
) -> Result<SuitabilityResult> {
    let mut per_characteristic = BTreeMap::new();
    let mut ratings = Vec::with_capacity(table.characteristics.len());
    for spec in &table.characteristics {
        let value = obs
            .values
            .get(&spec.name)
            .ok_or_else(|| Error::missing("characteristic value", format!("{}: {}", obs.unit_id, spec.name)))?;
        let class = rate_characteristic(value, spec)?;
        per_characteristic.insert(spec.name.clone(), class);
        ratings.push((spec.group, class));
    }
    let overall = ratings.iter().map(|(_, c)| *c).max().unwrap_or(SuitClass::S1);
    let limiting_groups: Vec<FactorGroup> = if overall == SuitClass::S1 {
        Vec::new()
    } else {
        ratings
            .iter()
            .filter(|(_, c)| *c == overall)
            .map(|(g, _)| *g)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    };
    let subclass = subclass_label(overall, &limiting_groups);
    Ok(SuitabilityResult {
        unit_id: obs.unit_id.clone(),
        per_characteristic,
        overall,
        limiting_groups,
        subclass,
    })
}

/// Evaluate all units, returned sorted by unit id.
pub fn evaluate_units(
    observations: &[LandUnitObservation],
    table: &CropRequirementTable,
) -> Result<Vec<SuitabilityResult>> {
    let mut out = observations
        .iter()
        .map(|o| evaluate_unit(o, table))
        .collect::<Result<Vec<_>>>()?;
    out.sort_by(|a, b| a.unit_id.cmp(&b.unit_id));
    Ok(out)
}

/// Hectares per subclass over a raster whose legend labels are unit ids.
pub fn area_summary(
    units: &CategoricalRaster,
    results: &[SuitabilityResult],
) -> Result<BTreeMap<String, f64>> {
    let by_unit: BTreeMap<&str, &str> = results
        .iter()
        .map(|r| (r.unit_id.as_str(), r.subclass.as_str()))
        .collect();
    let mut subclass_of_code = BTreeMap::new();
    for (code, label) in units.legend.iter() {
        let subclass = by_unit
            .get(label)
            .ok_or_else(|| Error::missing("suitability result for unit", label))?;
        subclass_of_code.insert(code, *subclass);
    }
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for i in 0..units.codes().len() {
        if let Some(code) = units.code(i) {
            *counts.entry(subclass_of_code[&code]).or_default() += 1;
        }
    }
    let ha = units.header.cell_hectares();
    Ok(counts
        .into_iter()
        .map(|(s, n)| (s.to_string(), n as f64 * ha))
        .collect())
}

/// Read observations: header `unit_id,<characteristic>...`, one row per unit.
///
/// Columns of numeric characteristics are parsed as numbers, the rest kept
/// as labels. Columns not in the table are ignored.
pub fn parse_observations_csv(
    text: &str,
    table: &CropRequirementTable,
) -> Result<Vec<LandUnitObservation>> {
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
    if headers.get(0) != Some("unit_id") {
        return Err(Error::Parse {
            line: 1,
            message: "first column must be `unit_id`".into(),
        });
    }
    for spec in &table.characteristics {
        if !headers.iter().any(|h| h == spec.name) {
            return Err(Error::missing("observation column", &spec.name));
        }
    }
    let mut out = Vec::new();
    let mut ids = BTreeSet::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let unit_id = rec[0].to_string();
        if !ids.insert(unit_id.clone()) {
            return Err(Error::Parse {
                line,
                message: format!("duplicate unit `{unit_id}`"),
            });
        }
        let mut values = BTreeMap::new();
        for (h, field) in headers.iter().zip(rec.iter()).skip(1) {
            let Some(spec) = table.get(h) else { continue };
            let v = if spec.is_numeric() {
                Observed::Number(field.parse().map_err(|_| Error::Parse {
                    line,
                    message: format!("`{h}` value `{field}` is not a number"),
                })?)
            } else {
                Observed::Label(field.to_string())
            };
            values.insert(h.to_string(), v);
        }
        out.push(LandUnitObservation { unit_id, values });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geodata::{GridHeader, Legend};
    use proptest::prelude::*;

    fn numeric(name: &str, group: FactorGroup, rules: &[(SuitClass, &[[f64; 2]])]) -> CharacteristicSpec {
        CharacteristicSpec {
            name: name.into(),
            group,
            rules: ClassRules::Numeric {
                rules: rules.iter().map(|(c, iv)| (*c, iv.to_vec())).collect(),
            },
        }
    }

    fn categorical(name: &str, group: FactorGroup, classes: &[(&str, SuitClass)]) -> CharacteristicSpec {
        CharacteristicSpec {
            name: name.into(),
            group,
            rules: ClassRules::Categorical {
                classes: classes.iter().map(|(l, c)| (l.to_string(), *c)).collect(),
            },
        }
    }

    fn drainage() -> CharacteristicSpec {
        use SuitClass::*;
        categorical(
            "drainage",
            FactorGroup::Rooting,
            &[("Good", S1), ("Moderate", S2), ("Hampered", S3), ("Very Hampered", N)],
        )
    }

    fn base_saturation() -> CharacteristicSpec {
        use SuitClass::*;
        numeric(
            "base_saturation",
            FactorGroup::NutrientRetention,
            &[(S1, &[[50.0, 100.0]]), (S2, &[[35.0, 50.0]]), (S3, &[[0.0, 35.0]])],
        )
    }

    #[test]
    fn rates_table_examples() {
        assert_eq!(rate_characteristic(&"Hampered".into(), &drainage()).unwrap(), SuitClass::S3);
        assert_eq!(rate_characteristic(&30.0.into(), &base_saturation()).unwrap(), SuitClass::S3);
        // closed bounds, first match wins
        assert_eq!(rate_characteristic(&35.0.into(), &base_saturation()).unwrap(), SuitClass::S2);
        assert_eq!(rate_characteristic(&150.0.into(), &base_saturation()).unwrap(), SuitClass::N);
        assert!(matches!(
            rate_characteristic(&"Swamp".into(), &drainage()),
            Err(Error::Missing { .. })
        ));
        assert!(rate_characteristic(&1.0.into(), &drainage()).is_err());
    }

    #[test]
    fn spec_validation() {
        use SuitClass::*;
        let overlap = numeric("x", FactorGroup::Water, &[(S1, &[[0.0, 2.0], [1.0, 3.0]])]);
        assert!(overlap.validate().is_err());
        let with_n = numeric("x", FactorGroup::Water, &[(N, &[[0.0, 1.0]])]);
        assert!(with_n.validate().is_err());
        let reversed = numeric("x", FactorGroup::Water, &[(S2, &[[3.0, 1.0]])]);
        assert!(reversed.validate().is_err());
        assert!(base_saturation().validate().is_ok());
    }

    #[test]
    fn table_json_shape() {
        let json = r#"{"crop":"corn","characteristics":[
            {"name":"drainage","group":"r","kind":"categorical","classes":{"Hampered":"S3","Good":"S1"}},
            {"name":"ph","group":"f","kind":"numeric","rules":{"S1":[[6.9,7.6]],"S3":[[5.5,6.9]]}}]}"#;
        let table: CropRequirementTable = serde_json::from_str(json).unwrap();
        table.validate().unwrap();
        assert_eq!(table.characteristics[1].group, FactorGroup::NutrientRetention);
        assert_eq!(
            rate_characteristic(&6.01.into(), &table.characteristics[1]).unwrap(),
            SuitClass::S3
        );
    }

    fn obs(id: &str, vals: &[(&str, Observed)]) -> LandUnitObservation {
        LandUnitObservation {
            unit_id: id.into(),
            values: vals.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
        }
    }

    #[test]
    fn all_s1_has_no_suffix() {
        let table = CropRequirementTable {
            crop: "corn".into(),
            characteristics: vec![drainage(), base_saturation()],
        };
        let r = evaluate_unit(
            &obs("u", &[("drainage", "Good".into()), ("base_saturation", 80.0.into())]),
            &table,
        )
        .unwrap();
        assert_eq!(r.overall, SuitClass::S1);
        assert_eq!(r.subclass, "S1");
        assert!(r.limiting_groups.is_empty());
    }

    #[test]
    fn missing_value_is_an_error() {
        let table = CropRequirementTable {
            crop: String::new(),
            characteristics: vec![drainage(), base_saturation()],
        };
        assert!(matches!(
            evaluate_unit(&obs("u", &[("drainage", "Good".into())]), &table),
            Err(Error::Missing { .. })
        ));
    }

    #[test]
    fn area_counts_cells() {
        let header = GridHeader::new(2, 2, 0.0, 0.0, 100.0, -9999.0).unwrap();
        let legend = Legend::new([(1, "A".into()), (2, "B".into())]).unwrap();
        let results = vec![
            SuitabilityResult {
                unit_id: "A".into(),
                per_characteristic: BTreeMap::new(),
                overall: SuitClass::S3,
                limiting_groups: vec![FactorGroup::Rooting],
                subclass: "S3r".into(),
            },
            SuitabilityResult {
                unit_id: "B".into(),
                per_characteristic: BTreeMap::new(),
                overall: SuitClass::S2,
                limiting_groups: vec![FactorGroup::Water],
                subclass: "S2w".into(),
            },
        ];
        let one = CategoricalRaster::new(header, vec![1, 1, 1, 1], legend.clone()).unwrap();
        let areas = area_summary(&one, &results).unwrap();
        assert_eq!(areas.len(), 1);
        assert_eq!(areas["S3r"], 4.0);

        let split = CategoricalRaster::new(header, vec![1, 1, 2, 1], legend.clone()).unwrap();
        let areas = area_summary(&split, &results).unwrap();
        assert_eq!(areas["S3r"], 3.0 * areas["S2w"]);

        let unmapped = CategoricalRaster::new(header, vec![1, 2, 2, 1], legend).unwrap();
        assert!(area_summary(&unmapped, &results[..1]).is_err());
    }

    #[test]
    fn observations_csv() {
        let table = CropRequirementTable {
            crop: String::new(),
            characteristics: vec![drainage(), base_saturation()],
        };
        let rows = parse_observations_csv(
            "unit_id,drainage,base_saturation,notes\nSPL 1,Hampered,30,x\nSPL 2,Good,55,y\n",
            &table,
        )
        .unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].values["base_saturation"], Observed::Number(30.0));
        assert!(parse_observations_csv("unit_id,drainage\nA,Good\n", &table).is_err());
        assert!(matches!(
            parse_observations_csv("unit_id,drainage,base_saturation\nA,Good,lots\n", &table),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    fn group_strategy() -> impl Strategy<Value = FactorGroup> {
        use FactorGroup::*;
        prop::sample::select(vec![Temperature, Water, Rooting, NutrientRetention, Nutrients, Erosion, Flood])
    }

    fn class_strategy() -> impl Strategy<Value = SuitClass> {
        prop::sample::select(vec![SuitClass::S1, SuitClass::S2, SuitClass::S3, SuitClass::N])
    }

    /// One categorical characteristic per generated rating, keyed by a
    /// label equal to the class name.
    fn synthetic(ratings: &[(FactorGroup, SuitClass)]) -> (CropRequirementTable, LandUnitObservation) {
        use SuitClass::*;
        let characteristics = ratings
            .iter()
            .enumerate()
            .map(|(i, (g, _))| {
                categorical(&format!("c{i}"), *g, &[("S1", S1), ("S2", S2), ("S3", S3), ("N", N)])
            })
            .collect();
        let values = ratings
            .iter()
            .enumerate()
            .map(|(i, (_, c))| (format!("c{i}"), Observed::Label(c.as_str().to_string())))
            .collect();
        (
            CropRequirementTable {
                crop: String::new(),
                characteristics,
            },
            LandUnitObservation {
                unit_id: "u".into(),
                values,
            },
        )
    }

    proptest! {
        #[test]
        fn overall_is_worst_and_suffix_canonical(
            ratings in proptest::collection::vec((group_strategy(), class_strategy()), 1..12)
        ) {
            let (table, o) = synthetic(&ratings);
            let r = evaluate_unit(&o, &table).unwrap();
            let worst = ratings.iter().map(|(_, c)| *c).max().unwrap();
            prop_assert_eq!(r.overall, worst);
            let letters: Vec<char> = r.subclass.chars().skip(worst.as_str().len()).collect();
            let canonical = "twrfneb";
            let positions: Vec<usize> = letters.iter().map(|c| canonical.find(*c).unwrap()).collect();
            prop_assert!(positions.windows(2).all(|w| w[0] < w[1]));
            if worst == SuitClass::S1 {
                prop_assert!(letters.is_empty());
            }
        }

        #[test]
        fn worsening_never_improves(
            ratings in proptest::collection::vec((group_strategy(), class_strategy()), 1..10),
            pick in any::<prop::sample::Index>(),
            worse in class_strategy(),
        ) {
            let (table, o) = synthetic(&ratings);
            let before = evaluate_unit(&o, &table).unwrap().overall;
            let i = pick.index(ratings.len());
            let mut changed = ratings.clone();
            changed[i].1 = changed[i].1.max(worse);
            let (table2, o2) = synthetic(&changed);
            prop_assert!(evaluate_unit(&o2, &table2).unwrap().overall >= before);
        }

        #[test]
        fn permutation_invariant(
            ratings in proptest::collection::vec((group_strategy(), class_strategy()), 1..10),
            seed in any::<u64>(),
        ) {
            let (table, o) = synthetic(&ratings);
            let r = evaluate_unit(&o, &table).unwrap();
            let mut shuffled = table.clone();
            // deterministic rotation driven by the seed
            let k = (seed as usize) % shuffled.characteristics.len();
            shuffled.characteristics.rotate_left(k);
            shuffled.characteristics.reverse();
            let r2 = evaluate_unit(&o, &shuffled).unwrap();
            prop_assert_eq!(r.subclass, r2.subclass);
            prop_assert_eq!(r.limiting_groups, r2.limiting_groups);
        }
    }
}
