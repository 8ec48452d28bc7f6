//! The five pipeline stages as run from a config: read inputs, call the
//! library, write outputs.

use std::collections::BTreeMap;
use std::path::PathBuf;

use agromcda::ahp::{
    compile_coefficients, derive_hierarchy, parse_pairwise_csv, Hierarchy, JudgmentNode, NodeAssessment,
    PowerOptions, CR_THRESHOLD,
};
use agromcda::classify::{breaks_result, classify_raster, jenks_breaks, summarize_priorities};
use agromcda::geodata::{parse_ascii_grid, parse_legend_csv, serialize_ascii_grid};
use agromcda::overlay::{
    aspect_bounds, aspect_surfaces, weighted_composite, AspectSurface, Composite, CompositeOptions,
    SubcriterionLayer,
};
use agromcda::rapcorn::{
    categorize, leverage, monte_carlo, sustainability_index, AttributeSchema, MonteCarloParams, RapParams,
    ScoreMatrix,
};
use agromcda::suitability::{area_summary, evaluate_units, parse_observations_csv, CropRequirementTable};
use agromcda::{CategoricalRaster, NumericRaster};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{JudgmentInput, LoadedConfig, RasterInput, Stage};
use crate::error::{CliError, Context};
use crate::{csv_field, kite, sha256_hex, slug};

/// Files written by a stage and a short summary for the run report.
#[derive(Debug, Clone, Serialize)]
pub struct StageOutput {
    pub files: Vec<String>,
    pub summary: Value,
}

pub struct AhpOutcome {
    pub hierarchy: Hierarchy,
    pub source: &'static str,
    pub matrices: Vec<NodeAssessment>,
}

pub struct OverlayOutcome {
    pub surfaces: Vec<AspectSurface>,
    pub composite: Composite,
    pub variant: String,
    inputs: Vec<String>,
}

/// State of one invocation.
pub struct Run<'a> {
    cfg: &'a LoadedConfig,
    out_dir: PathBuf,
    pub seed: u64,
    pub strict: bool,
    /// sha256 of every input read, keyed by the path as written in the config
    pub inputs: BTreeMap<String, String>,
    ahp: Option<AhpOutcome>,
    overlay: Option<OverlayOutcome>,
}

fn json_bytes(v: &impl Serialize) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("serializable report");
    s.push('\n');
    s.into_bytes()
}

impl<'a> Run<'a> {
    pub fn new(cfg: &'a LoadedConfig, out_dir: PathBuf, seed: u64, strict: bool) -> Self {
        Run {
            cfg,
            out_dir,
            seed,
            strict,
            inputs: BTreeMap::new(),
            ahp: None,
            overlay: None,
        }
    }

    fn read(&mut self, rel: &str) -> Result<String, CliError> {
        let bytes = std::fs::read(self.cfg.resolve(rel)).map_err(|e| CliError::io(rel, e))?;
        self.inputs.insert(rel.to_string(), sha256_hex(&bytes));
        String::from_utf8(bytes).map_err(|_| CliError::config(format!("`{rel}` is not UTF-8 text")))
    }

    fn read_json<T: serde::de::DeserializeOwned>(&mut self, rel: &str) -> Result<T, CliError> {
        let text = self.read(rel)?;
        serde_json::from_str(&text).map_err(|e| CliError::config(format!("{rel}: {e}")))
    }

    fn read_categorical(&mut self, input: &RasterInput) -> Result<CategoricalRaster, CliError> {
        let raster = parse_ascii_grid(&self.read(&input.raster)?).context(&input.raster)?;
        let legend = parse_legend_csv(&self.read(&input.legend)?).context(&input.legend)?;
        CategoricalRaster::from_numeric(&raster, legend).context(&input.raster)
    }

    fn digests(&self, paths: &[String]) -> Vec<Value> {
        paths
            .iter()
            .map(|p| json!({"path": p, "sha256": self.inputs[p]}))
            .collect()
    }

    pub fn write_file(&self, name: &str, contents: &[u8]) -> Result<String, CliError> {
        std::fs::create_dir_all(&self.out_dir).map_err(|e| CliError::io(self.out_dir.display().to_string(), e))?;
        let path = self.out_dir.join(name);
        std::fs::write(&path, contents).map_err(|e| CliError::io(path.display().to_string(), e))?;
        Ok(name.to_string())
    }

    pub fn run_stage(&mut self, stage: Stage) -> Result<StageOutput, CliError> {
        match stage {
            Stage::Suitability => self.suitability(),
            Stage::Rap => self.rap(),
            Stage::Ahp => self.ahp(),
            Stage::Overlay => self.overlay(),
            Stage::Classify => self.classify(),
        }
    }

    fn suitability(&mut self) -> Result<StageOutput, CliError> {
        let s = self.cfg.config.suitability.clone().expect("validated");
        let table: CropRequirementTable = self.read_json(&s.requirements)?;
        table.validate().context(&s.requirements)?;
        let obs = parse_observations_csv(&self.read(&s.observations)?, &table).context(&s.observations)?;
        if obs.is_empty() {
            return Err(CliError::config(format!("`{}` has no land units", s.observations)));
        }
        let results = evaluate_units(&obs, &table).context("suitability")?;

        let mut units = String::from("unit_id,subclass,overall");
        for c in &table.characteristics {
            units.push(',');
            units.push_str(&csv_field(&c.name));
        }
        units.push('\n');
        for r in &results {
            units.push_str(&format!("{},{},{}", csv_field(&r.unit_id), r.subclass, r.overall.as_str()));
            for c in &table.characteristics {
                units.push(',');
                units.push_str(r.per_characteristic[&c.name].as_str());
            }
            units.push('\n');
        }
        let mut files = vec![self.write_file("suitability_units.csv", units.as_bytes())?];

        let mut by_subclass: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for r in &results {
            by_subclass.entry(&r.subclass).or_default().push(&r.unit_id);
        }
        let mut summary = json!({"units": results.len(), "subclasses": by_subclass});
        if let Some(u) = &s.units {
            let raster = self.read_categorical(u)?;
            let areas = area_summary(&raster, &results).context(&u.raster)?;
            let mut csv = String::from("subclass,hectares\n");
            for (subclass, ha) in &areas {
                csv.push_str(&format!("{subclass},{ha:.4}\n"));
            }
            files.push(self.write_file("suitability_areas.csv", csv.as_bytes())?);
            summary["hectares"] = json!(areas);
        }
        Ok(StageOutput { files, summary })
    }

    fn rap(&mut self) -> Result<StageOutput, CliError> {
        let r = self.cfg.config.rap.clone().expect("validated");
        let params = RapParams {
            max_iter: r.max_iter.unwrap_or(RapParams::default().max_iter),
            tol: r.tol.unwrap_or(RapParams::default().tol),
            seed: self.seed,
            anchors: r.anchors,
        };
        let mut dimensions = Vec::new();
        let mut axes = Vec::new();
        let mut seen = Vec::new();
        for d in &r.dimensions {
            let schema: AttributeSchema = self.read_json(&d.schema)?;
            schema.validate().context(&d.schema)?;
            if seen.contains(&schema.dimension) {
                return Err(CliError::config(format!("dimension `{}` given twice", schema.dimension)));
            }
            seen.push(schema.dimension);
            let m = ScoreMatrix::from_csv(schema, &self.read(&d.scores)?).context(&d.scores)?;
            let what = format!("{} ordination", m.schema.dimension);
            let res = sustainability_index(&m, &params).context(&what)?;
            let lev = if r.leverage {
                Some(leverage(&m, &params).context(&what)?)
            } else {
                None
            };
            let mc = match r.monte_carlo {
                Some(c) => Some(
                    monte_carlo(
                        &m,
                        &MonteCarloParams {
                            trials: c.trials,
                            flip_prob: c.flip_prob,
                            seed: self.seed,
                        },
                        &params,
                    )
                    .context(&what)?,
                ),
                None => None,
            };
            let index = res.dimension_index();
            axes.push((res.dimension.to_string(), index));
            let objects: Vec<Value> = res
                .index
                .iter()
                .map(|(id, v)| json!({"id": id, "index": v, "category": categorize(*v).label()}))
                .collect();
            dimensions.push(json!({
                "dimension": res.dimension,
                "index": index,
                "category": categorize(index).label(),
                "stress": res.stress,
                "rsq": res.rsq,
                "iterations": res.iterations,
                "objects": objects,
                "out_of_range": res.out_of_range,
                "coordinates": res.rows,
                "leverage": lev.map(|l| l.attributes),
                "monte_carlo": mc,
                "inputs": self.digests(&[d.schema.clone(), d.scores.clone()]),
            }));
        }
        let report = json!({"params": params, "dimensions": dimensions});
        let files = vec![
            self.write_file("rap_report.json", &json_bytes(&report))?,
            self.write_file("rap_kite.svg", kite::render(&axes).as_bytes())?,
        ];
        let summary: BTreeMap<String, Value> = axes
            .iter()
            .map(|(d, v)| (d.clone(), json!({"index": v, "category": categorize(*v).label()})))
            .collect();
        Ok(StageOutput {
            files,
            summary: json!(summary),
        })
    }

    fn judgment_node(&mut self, input: &JudgmentInput) -> Result<JudgmentNode, CliError> {
        let matrix = match &input.matrix {
            Some(p) => Some(parse_pairwise_csv(&self.read(p)?).context(p)?),
            None => None,
        };
        let children = input
            .children
            .iter()
            .map(|c| self.judgment_node(c))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(JudgmentNode {
            name: input.name.clone(),
            matrix,
            children,
        })
    }

    fn ensure_ahp(&mut self) -> Result<(), CliError> {
        if self.ahp.is_some() {
            return Ok(());
        }
        let a = self.cfg.config.ahp.clone().expect("validated");
        let outcome = match (&a.hierarchy, &a.judgments) {
            (Some(p), _) => {
                let h: Hierarchy = self.read_json(p)?;
                h.validate().context(p)?;
                AhpOutcome {
                    hierarchy: h,
                    source: "hierarchy",
                    matrices: Vec::new(),
                }
            }
            (None, Some(j)) => {
                let goal = self.judgment_node(j)?;
                let (hierarchy, matrices) =
                    derive_hierarchy(&goal, PowerOptions::default(), self.strict).context("judgment tree")?;
                AhpOutcome {
                    hierarchy,
                    source: "judgments",
                    matrices,
                }
            }
            (None, None) => unreachable!("validated"),
        };
        self.ahp = Some(outcome);
        Ok(())
    }

    fn ahp(&mut self) -> Result<StageOutput, CliError> {
        self.ensure_ahp()?;
        let a = self.ahp.as_ref().expect("computed");
        let coefficients = compile_coefficients(&a.hierarchy).context("hierarchy")?;
        let inconsistent: Vec<&str> = a
            .matrices
            .iter()
            .filter(|m| !m.assessment.consistency.consistent)
            .map(|m| m.path.as_str())
            .collect();
        let report = json!({
            "source": a.source,
            "strict": self.strict,
            "cr_threshold": CR_THRESHOLD,
            "matrices": a.matrices,
            "inconsistent": inconsistent,
            "hierarchy": a.hierarchy,
            "coefficients": coefficients,
        });
        let mut csv = String::from("aspect,subcriterion,aspect_weight,score,coefficient\n");
        for asp in &a.hierarchy.aspects {
            for s in &asp.subcriteria {
                csv.push_str(&format!(
                    "{},{},{},{},{}\n",
                    csv_field(&asp.name),
                    csv_field(&s.name),
                    asp.weight,
                    s.score,
                    asp.weight * s.score
                ));
            }
        }
        let max_cr = a
            .matrices
            .iter()
            .map(|m| m.assessment.consistency.cr)
            .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))));
        let summary = json!({
            "source": a.source,
            "aspect_weights": a.hierarchy.aspects.iter().map(|x| (x.name.clone(), x.weight)).collect::<BTreeMap<_, _>>(),
            "max_cr": max_cr,
            "coefficients": coefficients.len(),
        });
        let files = vec![
            self.write_file("ahp_report.json", &json_bytes(&report))?,
            self.write_file("ahp_coefficients.csv", csv.as_bytes())?,
        ];
        Ok(StageOutput { files, summary })
    }

    fn ensure_overlay(&mut self) -> Result<(), CliError> {
        if self.overlay.is_some() {
            return Ok(());
        }
        self.ensure_ahp()?;
        let o = self.cfg.config.overlay.clone().expect("validated");
        let h = self.ahp.as_ref().expect("computed").hierarchy.clone();
        let wanted: Vec<&str> = h
            .aspects
            .iter()
            .flat_map(|a| a.subcriteria.iter().map(|s| s.name.as_str()))
            .collect();
        if let Some(extra) = o.layers.keys().find(|k| !wanted.contains(&k.as_str())) {
            return Err(CliError::config(format!("layer `{extra}` matches no subcriterion")));
        }
        let mut layers = BTreeMap::new();
        let mut inputs = Vec::new();
        for a in &h.aspects {
            for s in &a.subcriteria {
                let input = o
                    .layers
                    .get(&s.name)
                    .ok_or_else(|| CliError::config(format!("no layer for subcriterion `{}`", s.name)))?;
                let raster = self.read_categorical(input)?;
                let values = s.classes.iter().map(|c| (c.label.clone(), c.value)).collect();
                let layer = SubcriterionLayer::new(s.name.clone(), raster, values).context(&input.legend)?;
                layers.insert(s.name.clone(), layer);
                inputs.extend([input.raster.clone(), input.legend.clone()]);
            }
        }
        let surfaces = aspect_surfaces(&h, &layers).context("aspect surfaces")?;
        let (variant, weights) = match &o.weights {
            Some(w) => {
                if w.values.len() != h.aspects.len() {
                    return Err(CliError::config(format!(
                        "`overlay.weights` has {} values for {} aspects",
                        w.values.len(),
                        h.aspects.len()
                    )));
                }
                (w.variant.clone(), w.values.clone())
            }
            None => ("hierarchy".to_string(), h.aspect_weights()),
        };
        let refs: Vec<&AspectSurface> = surfaces.iter().collect();
        let composite = weighted_composite(
            &refs,
            &weights,
            CompositeOptions {
                renormalize: o.renormalize,
            },
        )
        .context("composite")?;
        self.overlay = Some(OverlayOutcome {
            surfaces,
            composite,
            variant,
            inputs,
        });
        Ok(())
    }

    fn overlay(&mut self) -> Result<StageOutput, CliError> {
        self.ensure_overlay()?;
        let decimals = self.cfg.config.overlay.as_ref().expect("validated").decimals;
        let h = self.ahp.as_ref().expect("computed").hierarchy.clone();
        let o = self.overlay.as_ref().expect("computed");
        let mut files = Vec::new();
        let mut aspects = Vec::new();
        for (a, s) in h.aspects.iter().zip(&o.surfaces) {
            let name = format!("s_{}.asc", slug(&a.name));
            files.push(self.write_file(&name, serialize_ascii_grid(&s.raster, decimals).as_bytes())?);
            let (lo, hi) = aspect_bounds(a);
            aspects.push(json!({
                "name": a.name,
                "file": name,
                "weight_in_hierarchy": a.weight,
                "subcriteria": a.subcriteria.iter().map(|sc| json!({
                    "name": sc.name,
                    "score": sc.score,
                    "class_values": sc.classes.iter().map(|c| (c.label.clone(), c.value)).collect::<BTreeMap<_, _>>(),
                })).collect::<Vec<_>>(),
                "achievable_range": [lo, hi],
                "value_range": s.raster.range(),
            }));
        }
        files.push(self.write_file("sp_corn.asc", serialize_ascii_grid(&o.composite.raster, decimals).as_bytes())?);
        let provenance = json!({
            "weights": {
                "variant": o.variant,
                "supplied": o.composite.weights.supplied,
                "used": o.composite.weights.used,
                "supplied_sum": o.composite.weights.supplied_sum,
                "renormalized": o.composite.weights.renormalized,
            },
            "aspects": aspects,
            "composite": {"file": "sp_corn.asc", "value_range": o.composite.raster.range()},
            "decimals": decimals,
            "inputs": self.digests(&o.inputs),
        });
        files.push(self.write_file("overlay_provenance.json", &json_bytes(&provenance))?);
        let summary = json!({
            "weights_variant": o.variant,
            "weights": o.composite.weights.used,
            "composite_range": o.composite.raster.range(),
        });
        Ok(StageOutput { files, summary })
    }

    fn classify(&mut self) -> Result<StageOutput, CliError> {
        let cl = self.cfg.config.classify.clone().expect("validated");
        let (raster, source): (NumericRaster, String) = match &cl.input {
            Some(p) => (parse_ascii_grid(&self.read(p)?).context(p)?, p.clone()),
            None => {
                self.ensure_overlay()?;
                let o = self.overlay.as_ref().expect("computed");
                (o.composite.raster.clone(), "overlay composite".into())
            }
        };
        let values = raster.valid_values();
        let (method, breaks) = match &cl.breaks {
            Some(b) => ("fixed", breaks_result(&values, b).context("classify")?),
            None => ("natural breaks", jenks_breaks(&values, cl.k).context("classify")?),
        };
        let priorities = classify_raster(&raster, &breaks).context("classify")?;
        let classes: Vec<Value> = summarize_priorities(&raster, &priorities)
            .into_iter()
            .map(|s| {
                let directions = cl.directions.get(&s.priority).cloned().unwrap_or_default();
                let mut v = serde_json::to_value(&s).expect("serializable");
                v["directions"] = json!(directions);
                v
            })
            .collect();
        let report = json!({
            "source": source,
            "method": method,
            "k": breaks.k,
            "breaks": breaks.breaks,
            "sdam": breaks.sdam,
            "sdcm": breaks.sdcm,
            "gvf": breaks.gvf,
            "boundary_rule": "right-closed: a value equal to a break belongs to the class below it; priority 1 holds values above the top break",
            "nodata_cells": raster.header.cell_count() - values.len(),
            "classes": classes,
        });
        let files = vec![
            self.write_file("priority.asc", serialize_ascii_grid(&priorities.to_numeric(), 0).as_bytes())?,
            self.write_file("classify_report.json", &json_bytes(&report))?,
        ];
        let summary = json!({
            "method": method,
            "breaks": breaks.breaks,
            "gvf": breaks.gvf,
            "hectares": classes.iter().map(|c| (c["label"].as_str().unwrap_or_default().to_string(), c["hectares"].clone())).collect::<BTreeMap<_, _>>(),
        });
        Ok(StageOutput { files, summary })
    }
}
