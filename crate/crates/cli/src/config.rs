//! Pipeline configuration: one JSON document whose relative paths resolve
//! against the directory holding it.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use agromcda::rapcorn::AnchorPolicy;
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub strict: bool,
    #[serde(default)]
    pub output_dir: Option<String>,
    pub suitability: Option<SuitabilityConfig>,
    pub rap: Option<RapConfig>,
    pub ahp: Option<AhpConfig>,
    pub overlay: Option<OverlayConfig>,
    pub classify: Option<ClassifyConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RasterInput {
    pub raster: String,
    pub legend: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuitabilityConfig {
    pub requirements: String,
    pub observations: String,
    /// Map of land units; legend labels are unit ids.
    #[serde(default)]
    pub units: Option<RasterInput>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RapDimensionInput {
    pub schema: String,
    pub scores: String,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloConfig {
    pub trials: usize,
    pub flip_prob: f64,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RapConfig {
    pub dimensions: Vec<RapDimensionInput>,
    #[serde(default)]
    pub max_iter: Option<usize>,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub anchors: AnchorPolicy,
    #[serde(default = "default_true")]
    pub leverage: bool,
    #[serde(default)]
    pub monte_carlo: Option<MonteCarloConfig>,
}

/// Judgment tree as written in the config: interior nodes name the CSV
/// file of their pairwise matrix, leaves are class labels.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JudgmentInput {
    pub name: String,
    #[serde(default)]
    pub matrix: Option<String>,
    #[serde(default)]
    pub children: Vec<JudgmentInput>,
}

impl JudgmentInput {
    pub fn matrix_paths(&self) -> Vec<&str> {
        let mut out: Vec<&str> = self.matrix.iter().map(String::as_str).collect();
        for c in &self.children {
            out.extend(c.matrix_paths());
        }
        out
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AhpConfig {
    #[serde(default)]
    pub hierarchy: Option<String>,
    #[serde(default)]
    pub judgments: Option<JudgmentInput>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsConfig {
    /// Free-form name of the weight set, recorded in the provenance.
    pub variant: String,
    pub values: Vec<f64>,
}

fn default_decimals() -> usize {
    6
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OverlayConfig {
    /// Class raster and legend per subcriterion name.
    pub layers: BTreeMap<String, RasterInput>,
    /// Composite weights in aspect order; the hierarchy's aspect weights
    /// when absent.
    #[serde(default)]
    pub weights: Option<WeightsConfig>,
    #[serde(default)]
    pub renormalize: bool,
    #[serde(default = "default_decimals")]
    pub decimals: usize,
}

fn default_k() -> usize {
    3
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyConfig {
    #[serde(default = "default_k")]
    pub k: usize,
    /// Fixed interior breaks instead of natural breaks.
    #[serde(default)]
    pub breaks: Option<Vec<f64>>,
    /// Raster to classify; the overlay composite when absent.
    #[serde(default)]
    pub input: Option<String>,
    /// Development directions per priority number.
    #[serde(default)]
    pub directions: BTreeMap<usize, Vec<String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Suitability,
    Rap,
    Ahp,
    Overlay,
    Classify,
}

impl Stage {
    pub const ALL: [Stage; 5] = [Stage::Suitability, Stage::Rap, Stage::Ahp, Stage::Overlay, Stage::Classify];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Suitability => "suitability",
            Stage::Rap => "rap",
            Stage::Ahp => "ahp",
            Stage::Overlay => "overlay",
            Stage::Classify => "classify",
        }
    }
}

/// A parsed config together with where it came from.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: PipelineConfig,
    pub base_dir: PathBuf,
    pub digest: String,
}

impl LoadedConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let bytes = std::fs::read(path).map_err(|e| CliError::io(path.display().to_string(), e))?;
        let config: PipelineConfig =
            serde_json::from_slice(&bytes).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(LoadedConfig {
            config,
            base_dir,
            digest: crate::sha256_hex(&bytes),
        })
    }

    pub fn resolve(&self, rel: &str) -> PathBuf {
        self.base_dir.join(rel)
    }

    /// Whether `stage` can run from this config, or why not.
    pub fn availability(&self, stage: Stage) -> Result<(), String> {
        let c = &self.config;
        let missing = |s: &str| Err(format!("no `{s}` section in config"));
        match stage {
            Stage::Suitability if c.suitability.is_none() => missing("suitability"),
            Stage::Rap if c.rap.is_none() => missing("rap"),
            Stage::Ahp if c.ahp.is_none() => missing("ahp"),
            Stage::Overlay if c.overlay.is_none() => missing("overlay"),
            Stage::Overlay if c.ahp.is_none() => Err("overlay needs an `ahp` section for its coefficients".into()),
            Stage::Classify if c.classify.is_none() => missing("classify"),
            Stage::Classify => match &c.classify {
                Some(cl) if cl.input.is_none() && (c.overlay.is_none() || c.ahp.is_none()) => {
                    Err("classify needs an `input` raster or `overlay` and `ahp` sections".into())
                }
                _ => Ok(()),
            },
            _ => Ok(()),
        }
    }

    /// Check the sections needed by `stages` and that every file they name
    /// exists, before anything is computed.
    pub fn validate(&self, stages: &[Stage]) -> Result<(), CliError> {
        let c = &self.config;
        let mut paths: Vec<&str> = Vec::new();
        let needs = |s: Stage| stages.contains(&s);
        let needs_ahp = needs(Stage::Ahp)
            || needs(Stage::Overlay)
            || (needs(Stage::Classify) && c.classify.as_ref().is_some_and(|cl| cl.input.is_none()));
        let needs_overlay =
            needs(Stage::Overlay) || (needs(Stage::Classify) && c.classify.as_ref().is_some_and(|cl| cl.input.is_none()));

        if needs(Stage::Suitability) {
            let s = c.suitability.as_ref().ok_or_else(|| CliError::config("no `suitability` section"))?;
            paths.extend([s.requirements.as_str(), s.observations.as_str()]);
            if let Some(u) = &s.units {
                paths.extend([u.raster.as_str(), u.legend.as_str()]);
            }
        }
        if needs(Stage::Rap) {
            let r = c.rap.as_ref().ok_or_else(|| CliError::config("no `rap` section"))?;
            if r.dimensions.is_empty() {
                return Err(CliError::config("`rap.dimensions` is empty"));
            }
            if let Some(mc) = r.monte_carlo {
                if mc.trials == 0 || !(0.0..=1.0).contains(&mc.flip_prob) {
                    return Err(CliError::config("`rap.monte_carlo` needs trials ≥ 1 and flip_prob in [0, 1]"));
                }
            }
            for d in &r.dimensions {
                paths.extend([d.schema.as_str(), d.scores.as_str()]);
            }
        }
        if needs_ahp {
            let a = c.ahp.as_ref().ok_or_else(|| CliError::config("no `ahp` section"))?;
            match (&a.hierarchy, &a.judgments) {
                (Some(h), None) => paths.push(h),
                (None, Some(j)) => paths.extend(j.matrix_paths()),
                _ => {
                    return Err(CliError::config(
                        "`ahp` needs exactly one of `hierarchy` or `judgments`",
                    ))
                }
            }
        }
        if needs_overlay {
            let o = c.overlay.as_ref().ok_or_else(|| CliError::config("no `overlay` section"))?;
            if o.layers.is_empty() {
                return Err(CliError::config("`overlay.layers` is empty"));
            }
            if o.decimals > 15 {
                return Err(CliError::config("`overlay.decimals` must be at most 15"));
            }
            for l in o.layers.values() {
                paths.extend([l.raster.as_str(), l.legend.as_str()]);
            }
        }
        if needs(Stage::Classify) {
            let cl = c.classify.as_ref().ok_or_else(|| CliError::config("no `classify` section"))?;
            if cl.k == 0 {
                return Err(CliError::config("`classify.k` must be at least 1"));
            }
            if let Some(b) = &cl.breaks {
                if b.len() + 1 != cl.k {
                    return Err(CliError::config(format!(
                        "`classify.breaks` has {} entries; k = {} needs {}",
                        b.len(),
                        cl.k,
                        cl.k - 1
                    )));
                }
            }
            if let Some(p) = cl.directions.keys().find(|p| **p == 0 || **p > cl.k) {
                return Err(CliError::config(format!("directions given for priority {p}, outside 1..={}", cl.k)));
            }
            if let Some(i) = &cl.input {
                paths.push(i);
            }
        }
        for p in paths {
            if !self.resolve(p).is_file() {
                return Err(CliError::config(format!("input file `{p}` does not exist")));
            }
        }
        Ok(())
    }
}
