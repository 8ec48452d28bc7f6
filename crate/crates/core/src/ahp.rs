//! Analytic Hierarchy Process.
//!
//! Priority weights come from the principal eigenvector of a reciprocal
//! judgment matrix (power iteration); the row geometric mean is available
//! as a cross-check. A [`Hierarchy`] of aspect weights, subcriterion scores
//! and class values compiles into the coefficients used by the overlay.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `a_ij * a_ji = 1` and on the unit diagonal.
pub const RECIPROCITY_TOLERANCE: f64 = 1e-9;

/// Aspect weights and subcriterion scores must each sum to 1 within this.
pub const SUM_TOLERANCE: f64 = 0.02;

pub const CR_THRESHOLD: f64 = 0.1;

/// Random consistency index by matrix order, 1 through 10.
const RANDOM_INDEX: [f64; 10] = [0.0, 0.0, 0.58, 0.90, 1.12, 1.24, 1.32, 1.41, 1.45, 1.49];

pub fn random_index(n: usize) -> Option<f64> {
    n.checked_sub(1).and_then(|i| RANDOM_INDEX.get(i)).copied()
}

/// Square matrix of positive pairwise judgments, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl PairwiseMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n < 2 {
            return Err(Error::invalid("pairwise matrix", "order must be at least 2"));
        }
        if let Some(r) = rows.iter().position(|r| r.len() != n) {
            return Err(Error::invalid(
                "pairwise matrix",
                format!("row {} has {} entries, expected {n}", r + 1, rows[r].len()),
            ));
        }
        let entries: Vec<f64> = rows.into_iter().flatten().collect();
        if let Some(i) = entries.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::invalid(
                "pairwise matrix",
                format!("entry ({}, {}) must be positive, got {}", i / n + 1, i % n + 1, entries[i]),
            ));
        }
        Ok(PairwiseMatrix { n, entries })
    }

    /// Consistent matrix `a_ij = w_i / w_j`.
    pub fn from_weights(w: &[f64]) -> Result<Self> {
        PairwiseMatrix::new(
            w.iter()
                .map(|wi| w.iter().map(|wj| wi / wj).collect())
                .collect(),
        )
    }

    /// Build from the upper triangle (row by row, excluding the diagonal);
    /// the lower triangle is filled with reciprocals.
    pub fn from_upper(n: usize, upper: &[f64]) -> Result<Self> {
        if upper.len() != n * n.saturating_sub(1) / 2 {
            return Err(Error::invalid("pairwise matrix", "wrong number of upper-triangle entries"));
        }
        let mut rows = vec![vec![1.0; n]; n];
        let mut it = upper.iter();
        for i in 0..n {
            for j in i + 1..n {
                let v = *it.next().unwrap();
                rows[i][j] = v;
                rows[j][i] = 1.0 / v;
            }
        }
        PairwiseMatrix::new(rows)
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn transpose(&self) -> PairwiseMatrix {
        let n = self.n;
        let entries = (0..n * n).map(|k| self.get(k % n, k / n)).collect();
        PairwiseMatrix { n, entries }
    }

    /// Reorder rows and columns: entry (i, j) of the result is entry
    /// (perm[i], perm[j]) of `self`.
    pub fn permuted(&self, perm: &[usize]) -> PairwiseMatrix {
        let n = self.n;
        let entries = (0..n * n).map(|k| self.get(perm[k / n], perm[k % n])).collect();
        PairwiseMatrix { n, entries }
    }

    fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }
}

/// Entry outside the 1/9..9 judgment scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaleWarning {
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

/// Check the unit diagonal and reciprocity. Returns the entries that fall
/// outside the 1/9..9 scale; those are reported but accepted.
pub fn validate_matrix(m: &PairwiseMatrix) -> Result<Vec<ScaleWarning>> {
    let n = m.order();
    for i in 0..n {
        if (m.get(i, i) - 1.0).abs() > RECIPROCITY_TOLERANCE {
            return Err(Error::invalid(
                "pairwise matrix",
                format!("diagonal entry ({}, {}) is {}, expected 1", i + 1, i + 1, m.get(i, i)),
            ));
        }
    }
    let mut warnings = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let v = m.get(i, j);
            if v <= 0.0 {
                return Err(Error::invalid(
                    "pairwise matrix",
                    format!("entry ({}, {}) must be positive", i + 1, j + 1),
                ));
            }
            if j > i {
                let product = v * m.get(j, i);
                if (product - 1.0).abs() > RECIPROCITY_TOLERANCE {
                    return Err(Error::NotReciprocal {
                        row: i + 1,
                        col: j + 1,
                        product,
                    });
                }
            }
            let slack = 1e-12;
            if v > 9.0 + slack || v < 1.0 / 9.0 - slack {
                warnings.push(ScaleWarning {
                    row: i + 1,
                    col: j + 1,
                    value: v,
                });
            }
        }
    }
    Ok(warnings)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PowerOptions {
    fn default() -> Self {
        PowerOptions {
            tol: 1e-12,
            max_iter: 10_000,
        }
    }
}

/// Principal eigenvector by power iteration from the uniform vector,
/// normalised to sum 1. Stops when successive iterates differ by less than
/// `tol` in the max-norm.
pub fn principal_weights(m: &PairwiseMatrix, opts: PowerOptions) -> Result<Vec<f64>> {
    let n = m.order();
    let mut x = vec![1.0 / n as f64; n];
    for _ in 0..opts.max_iter {
        let mut y = m.mul_vec(&x);
        let s: f64 = y.iter().sum();
        y.iter_mut().for_each(|v| *v /= s);
        let diff = y
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        x = y;
        if diff < opts.tol {
            return Ok(x);
        }
    }
    Err(Error::NoConvergence(opts.max_iter))
}

/// Row geometric means, normalised to sum 1.
pub fn geometric_mean_weights(m: &PairwiseMatrix) -> Vec<f64> {
    let n = m.order();
    // mean of logs keeps large orders away from overflow
    let g: Vec<f64> = (0..n)
        .map(|i| (m.row(i).iter().map(|v| v.ln()).sum::<f64>() / n as f64).exp())
        .collect();
    let s: f64 = g.iter().sum();
    g.into_iter().map(|v| v / s).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub lambda_max: f64,
    pub ci: f64,
    pub ri: f64,
    pub cr: f64,
    pub consistent: bool,
}

/// Consistency of `w` against `m`, with the random index taken from the
/// standard table (orders up to 10).
pub fn consistency(m: &PairwiseMatrix, w: &[f64]) -> Result<ConsistencyReport> {
    let ri = random_index(m.order()).ok_or_else(|| {
        Error::invalid(
            "consistency",
            format!("no tabulated random index for order {}; supply one explicitly", m.order()),
        )
    })?;
    consistency_with_ri(m, w, ri)
}

pub fn consistency_with_ri(m: &PairwiseMatrix, w: &[f64], ri: f64) -> Result<ConsistencyReport> {
    let n = m.order();
    if w.len() != n {
        return Err(Error::invalid("consistency", "weight vector length differs from matrix order"));
    }
    let mw = m.mul_vec(w);
    let lambda_max = mw.iter().zip(w).map(|(a, b)| a / b).sum::<f64>() / n as f64;
    let ci = (lambda_max - n as f64) / (n as f64 - 1.0);
    let cr = if n <= 2 || ri <= 0.0 { 0.0 } else { ci / ri };
    Ok(ConsistencyReport {
        lambda_max,
        ci,
        ri,
        cr,
        consistent: cr <= CR_THRESHOLD,
    })
}

/// Weights and consistency of one judgment matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatrixAssessment {
    pub weights: Vec<f64>,
    pub consistency: ConsistencyReport,
    pub scale_warnings: Vec<ScaleWarning>,
}

/// Validate, weight and check one matrix. Under `strict`, a consistency
/// ratio above the threshold is an error.
pub fn assess(m: &PairwiseMatrix, opts: PowerOptions, strict: bool) -> Result<MatrixAssessment> {
    let scale_warnings = validate_matrix(m)?;
    let weights = principal_weights(m, opts)?;
    let consistency = consistency(m, &weights)?;
    if strict && !consistency.consistent {
        return Err(Error::Inconsistent {
            cr: consistency.cr,
            limit: CR_THRESHOLD,
        });
    }
    Ok(MatrixAssessment {
        weights,
        consistency,
        scale_warnings,
    })
}

/// Parse `n` rows of `n` comma-separated entries. Entries may be written as
/// fractions such as `1/3`. Blank lines and `#` comments are skipped.
pub fn parse_pairwise_csv(text: &str) -> Result<PairwiseMatrix> {
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split(',')
            .map(|tok| parse_judgment(tok.trim()))
            .collect::<Option<Vec<f64>>>()
            .ok_or_else(|| Error::Parse {
                line: idx + 1,
                message: format!("cannot parse judgment row `{line}`"),
            })?;
        rows.push(row);
    }
    PairwiseMatrix::new(rows)
}

fn parse_judgment(tok: &str) -> Option<f64> {
    match tok.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().ok()?;
            let b: f64 = b.trim().parse().ok()?;
            (b != 0.0).then(|| a / b)
        }
        None => tok.parse().ok(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassValue {
    pub label: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Subcriterion {
    pub name: String,
    pub score: f64,
    pub classes: Vec<ClassValue>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aspect {
    pub name: String,
    pub weight: f64,
    pub subcriteria: Vec<Subcriterion>,
}

/// Goal → aspect → subcriterion → class tree with its priorities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hierarchy {
    pub aspects: Vec<Aspect>,
}

fn check_sum(what: &str, values: impl Iterator<Item = f64>) -> Result<()> {
    let s: f64 = values.sum();
    if (s - 1.0).abs() > SUM_TOLERANCE + 1e-12 {
        return Err(Error::invalid(
            "hierarchy",
            format!("{what} sum to {s:.4}, outside 1 ± {SUM_TOLERANCE}"),
        ));
    }
    Ok(())
}

impl Hierarchy {
    pub fn validate(&self) -> Result<()> {
        if self.aspects.is_empty() {
            return Err(Error::invalid("hierarchy", "no aspects"));
        }
        check_sum("aspect weights", self.aspects.iter().map(|a| a.weight))?;
        let mut names = BTreeSet::new();
        for a in &self.aspects {
            if !(a.weight.is_finite() && a.weight >= 0.0) {
                return Err(Error::invalid("hierarchy", format!("aspect `{}` has a bad weight", a.name)));
            }
            if a.subcriteria.is_empty() {
                return Err(Error::invalid("hierarchy", format!("aspect `{}` has no subcriteria", a.name)));
            }
            check_sum(
                &format!("subcriterion scores of `{}`", a.name),
                a.subcriteria.iter().map(|s| s.score),
            )?;
            for s in &a.subcriteria {
                if !names.insert(s.name.as_str()) {
                    return Err(Error::invalid(
                        "hierarchy",
                        format!("subcriterion `{}` appears twice", s.name),
                    ));
                }
                if s.classes.len() < 2 {
                    return Err(Error::invalid(
                        "hierarchy",
                        format!("subcriterion `{}` needs at least two classes", s.name),
                    ));
                }
                let labels: BTreeSet<&str> = s.classes.iter().map(|c| c.label.as_str()).collect();
                if labels.len() != s.classes.len() {
                    return Err(Error::invalid(
                        "hierarchy",
                        format!("subcriterion `{}` repeats a class label", s.name),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn aspect(&self, name: &str) -> Option<&Aspect> {
        self.aspects.iter().find(|a| a.name == name)
    }

    pub fn aspect_weights(&self) -> Vec<f64> {
        self.aspects.iter().map(|a| a.weight).collect()
    }
}

/// Overlay coefficient of one subcriterion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Coefficient {
    pub aspect: String,
    pub subcriterion: String,
    /// aspect weight × subcriterion score
    pub coefficient: f64,
    pub class_values: BTreeMap<String, f64>,
}

pub fn compile_coefficients(h: &Hierarchy) -> Result<Vec<Coefficient>> {
    h.validate()?;
    Ok(h.aspects
        .iter()
        .flat_map(|a| {
            a.subcriteria.iter().map(move |s| Coefficient {
                aspect: a.name.clone(),
                subcriterion: s.name.clone(),
                coefficient: a.weight * s.score,
                class_values: s.classes.iter().map(|c| (c.label.clone(), c.value)).collect(),
            })
        })
        .collect())
}

/// Node of a judgment tree. Interior nodes carry a matrix comparing their
/// children; leaves are class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct JudgmentNode {
    pub name: String,
    pub matrix: Option<PairwiseMatrix>,
    pub children: Vec<JudgmentNode>,
}

/// Assessment of one matrix in a judgment tree, keyed by the node path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeAssessment {
    pub path: String,
    pub items: Vec<String>,
    #[serde(flatten)]
    pub assessment: MatrixAssessment,
}

fn assess_node(
    node: &JudgmentNode,
    path: &str,
    opts: PowerOptions,
    strict: bool,
    out: &mut Vec<NodeAssessment>,
) -> Result<Vec<f64>> {
    let m = node
        .matrix
        .as_ref()
        .ok_or_else(|| Error::missing("judgment matrix", path))?;
    if m.order() != node.children.len() {
        return Err(Error::invalid(
            "judgment tree",
            format!(
                "`{path}` compares {} items but has {} children",
                m.order(),
                node.children.len()
            ),
        ));
    }
    let assessment = assess(m, opts, strict)?;
    let weights = assessment.weights.clone();
    out.push(NodeAssessment {
        path: path.to_string(),
        items: node.children.iter().map(|c| c.name.clone()).collect(),
        assessment,
    });
    Ok(weights)
}

/// Derive a [`Hierarchy`] from a goal node whose children are aspects,
/// grandchildren subcriteria and great-grandchildren classes.
pub fn derive_hierarchy(
    goal: &JudgmentNode,
    opts: PowerOptions,
    strict: bool,
) -> Result<(Hierarchy, Vec<NodeAssessment>)> {
    let mut reports = Vec::new();
    let aspect_w = assess_node(goal, &goal.name, opts, strict, &mut reports)?;
    let mut aspects = Vec::new();
    for (a, weight) in goal.children.iter().zip(aspect_w) {
        let a_path = format!("{}/{}", goal.name, a.name);
        let sub_w = assess_node(a, &a_path, opts, strict, &mut reports)?;
        let mut subcriteria = Vec::new();
        for (s, score) in a.children.iter().zip(sub_w) {
            let s_path = format!("{a_path}/{}", s.name);
            let class_w = assess_node(s, &s_path, opts, strict, &mut reports)?;
            let classes = s
                .children
                .iter()
                .zip(class_w)
                .map(|(c, value)| ClassValue {
                    label: c.name.clone(),
                    value,
                })
                .collect();
            subcriteria.push(Subcriterion {
                name: s.name.clone(),
                score,
                classes,
            });
        }
        aspects.push(Aspect {
            name: a.name.clone(),
            weight,
            subcriteria,
        });
    }
    let h = Hierarchy { aspects };
    h.validate()?;
    Ok((h, reports))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn fixture() -> PairwiseMatrix {
        PairwiseMatrix::new(vec![
            vec![1.0, 2.0, 0.5],
            vec![0.5, 1.0, 4.0],
            vec![2.0, 0.25, 1.0],
        ])
        .unwrap()
    }

    #[test]
    fn all_ones_is_uniform() {
        let m = PairwiseMatrix::new(vec![vec![1.0; 3]; 3]).unwrap();
        assert!(validate_matrix(&m).unwrap().is_empty());
        let w = principal_weights(&m, PowerOptions::default()).unwrap();
        for v in &w {
            assert_abs_diff_eq!(*v, 1.0 / 3.0, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(consistency(&m, &w).unwrap().cr, 0.0, epsilon = 1e-15);
        for v in geometric_mean_weights(&m) {
            assert_abs_diff_eq!(v, 1.0 / 3.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn recovers_consistent_weights() {
        let w = [4.0 / 7.0, 2.0 / 7.0, 1.0 / 7.0];
        let m = PairwiseMatrix::from_weights(&w).unwrap();
        let p = principal_weights(&m, PowerOptions::default()).unwrap();
        let g = geometric_mean_weights(&m);
        for i in 0..3 {
            assert_abs_diff_eq!(p[i], w[i], epsilon = 1e-9);
            assert_abs_diff_eq!(g[i], p[i], epsilon = 1e-12);
        }
        let c = consistency(&m, &p).unwrap();
        assert_abs_diff_eq!(c.lambda_max, 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c.ci, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c.cr, 0.0, epsilon = 1e-12);
        assert!(c.consistent);
    }

    #[test]
    fn reciprocity_violation_names_indices() {
        let m = PairwiseMatrix::new(vec![vec![1.0, 2.0], vec![0.4, 1.0]]).unwrap();
        match validate_matrix(&m) {
            Err(Error::NotReciprocal { row, col, .. }) => assert_eq!((row, col), (1, 2)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn out_of_scale_entry_warns() {
        let m = PairwiseMatrix::from_upper(3, &[12.0, 1.0, 1.0]).unwrap();
        let w = validate_matrix(&m).unwrap();
        assert_eq!(w.len(), 2); // 12 and 1/12
        assert_eq!((w[0].row, w[0].col, w[0].value), (1, 2, 12.0));
        let at_bound = PairwiseMatrix::from_upper(2, &[9.0]).unwrap();
        assert!(validate_matrix(&at_bound).unwrap().is_empty());
    }

    #[test]
    fn non_positive_entries_rejected() {
        assert!(PairwiseMatrix::new(vec![vec![1.0, 0.0], vec![1.0, 1.0]]).is_err());
        assert!(PairwiseMatrix::new(vec![vec![1.0]]).is_err());
        assert!(PairwiseMatrix::new(vec![vec![1.0, 2.0], vec![0.5]]).is_err());
    }

    #[test]
    fn order_above_ten_needs_explicit_ri() {
        let m = PairwiseMatrix::new(vec![vec![1.0; 11]; 11]).unwrap();
        let w = vec![1.0 / 11.0; 11];
        assert!(consistency(&m, &w).is_err());
        let r = consistency_with_ri(&m, &w, 1.51).unwrap();
        assert_abs_diff_eq!(r.cr, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn two_by_two_has_zero_cr() {
        let m = PairwiseMatrix::from_upper(2, &[5.0]).unwrap();
        let w = principal_weights(&m, PowerOptions::default()).unwrap();
        assert_abs_diff_eq!(w[0], 5.0 / 6.0, epsilon = 1e-12);
        assert_eq!(consistency(&m, &w).unwrap().cr, 0.0);
    }

    #[test]
    fn non_convergence_reported() {
        let opts = PowerOptions { tol: 0.0, max_iter: 3 };
        assert!(matches!(principal_weights(&fixture(), opts), Err(Error::NoConvergence(3))));
    }

    #[test]
    fn strict_mode_rejects_inconsistency() {
        let m = fixture();
        let lax = assess(&m, PowerOptions::default(), false).unwrap();
        assert!(lax.consistency.cr > CR_THRESHOLD);
        assert!(matches!(
            assess(&m, PowerOptions::default(), true),
            Err(Error::Inconsistent { .. })
        ));
    }

    #[test]
    fn csv_fractions() {
        let m = parse_pairwise_csv("# aspects\n1, 3, 5\n1/3, 1, 2\n1/5, 1/2, 1\n").unwrap();
        assert_abs_diff_eq!(m.get(1, 0), 1.0 / 3.0, epsilon = 1e-15);
        assert!(validate_matrix(&m).unwrap().is_empty());
        assert!(matches!(
            parse_pairwise_csv("1,2\n1/x,1\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(parse_pairwise_csv("1,2\n1/0,1\n").is_err());
    }

    fn table3() -> Hierarchy {
        serde_json::from_str(
            r#"{"aspects":[
              {"name":"Ecological","weight":0.46,"subcriteria":[
                {"name":"Fertilization","score":0.47,"classes":[{"label":"Not Fertilization","value":0.06},{"label":"Less Fertilization","value":0.22},{"label":"Great Fertilization","value":0.72}]},
                {"name":"Use of Organic Ingredients","score":0.21,"classes":[{"label":"Not Use","value":0.05},{"label":"Less Use","value":0.21},{"label":"Many Use","value":0.73}]},
                {"name":"Soil Organic C Nutrient Suitability","score":0.32,"classes":[{"label":"Not Appropriate","value":0.06},{"label":"Suitable enough","value":0.19},{"label":"Suitable","value":0.75}]}]},
              {"name":"Economic","weight":0.31,"subcriteria":[
                {"name":"Profit","score":1.0,"classes":[{"label":"Low","value":0.12},{"label":"High","value":0.88}]}]},
              {"name":"Social","weight":0.23,"subcriteria":[
                {"name":"Education","score":1.0,"classes":[{"label":"SD","value":0.14},{"label":"Bachelor","value":0.86}]}]}]}"#,
        )
        .unwrap()
    }

    #[test]
    fn coefficient_is_weight_times_score() {
        let c = compile_coefficients(&table3()).unwrap();
        assert_eq!(c.len(), 5);
        assert_abs_diff_eq!(c[0].coefficient, 0.46 * 0.47, epsilon = 1e-15);
        assert_abs_diff_eq!(c[0].coefficient, 0.2162, epsilon = 1e-12);
        assert_eq!(c[0].class_values["Great Fertilization"], 0.72);
        let total: f64 = c.iter().map(|c| c.coefficient).sum();
        assert!((total - 1.0).abs() <= SUM_TOLERANCE);

        let single = Hierarchy {
            aspects: vec![Aspect {
                name: "a".into(),
                weight: 1.0,
                subcriteria: vec![Subcriterion {
                    name: "s".into(),
                    score: 1.0,
                    classes: vec![
                        ClassValue { label: "x".into(), value: 0.2 },
                        ClassValue { label: "y".into(), value: 0.8 },
                    ],
                }],
            }],
        };
        assert_eq!(compile_coefficients(&single).unwrap()[0].coefficient, 1.0);
    }

    #[test]
    fn hierarchy_validation() {
        let mut h = table3();
        h.aspects[0].weight = 0.40;
        assert!(h.validate().is_err());
        let mut h = table3();
        h.aspects[1].subcriteria[0].classes.pop();
        assert!(h.validate().is_err());
        let mut h = table3();
        h.aspects[0].subcriteria[0].score = 0.46; // 0.99 total, inside tolerance
        assert!(h.validate().is_ok());
    }

    #[test]
    fn coefficients_linear_in_aspect_weight() {
        let base = compile_coefficients(&table3()).unwrap();
        let mut h = table3();
        h.aspects[1].weight *= 2.0;
        h.aspects[0].weight -= 0.31; // keep the sum valid
        let changed = compile_coefficients(&h).unwrap();
        assert_eq!(changed[3].coefficient, 2.0 * base[3].coefficient);
        assert_eq!(changed[4].coefficient, base[4].coefficient);
    }

    #[test]
    fn judgment_tree_builds_hierarchy() {
        let leaf = |n: &str| JudgmentNode { name: n.into(), matrix: None, children: vec![] };
        let sub = |n: &str, upper: f64| JudgmentNode {
            name: n.into(),
            matrix: Some(PairwiseMatrix::from_upper(2, &[upper]).unwrap()),
            children: vec![leaf("low"), leaf("high")],
        };
        let aspect = |n: &str, a: &str, b: &str| JudgmentNode {
            name: n.into(),
            matrix: Some(PairwiseMatrix::from_upper(2, &[1.0]).unwrap()),
            children: vec![sub(a, 1.0 / 3.0), sub(b, 1.0 / 4.0)],
        };
        let goal = JudgmentNode {
            name: "goal".into(),
            matrix: Some(PairwiseMatrix::from_upper(2, &[3.0]).unwrap()),
            children: vec![aspect("eco", "s1", "s2"), aspect("soc", "s3", "s4")],
        };
        let (h, reports) = derive_hierarchy(&goal, PowerOptions::default(), true).unwrap();
        assert_eq!(reports.len(), 7);
        assert_abs_diff_eq!(h.aspects[0].weight, 0.75, epsilon = 1e-12);
        assert_abs_diff_eq!(h.aspects[1].subcriteria[1].classes[1].value, 0.8, epsilon = 1e-12);
        assert_eq!(reports[1].path, "goal/eco");

        let mut broken = goal.clone();
        broken.children[0].children[0].matrix = None;
        assert!(matches!(
            derive_hierarchy(&broken, PowerOptions::default(), false),
            Err(Error::Missing { .. })
        ));
    }

    fn reciprocal(n: usize) -> impl Strategy<Value = PairwiseMatrix> {
        let scale: Vec<f64> = vec![1.0 / 9.0, 1.0 / 7.0, 1.0 / 5.0, 1.0 / 3.0, 1.0, 3.0, 5.0, 7.0, 9.0];
        proptest::collection::vec(prop::sample::select(scale), n * (n - 1) / 2)
            .prop_map(move |u| PairwiseMatrix::from_upper(n, &u).unwrap())
    }

    proptest! {
        #[test]
        fn permutation_permutes_weights(m in reciprocal(4), perm in Just(vec![0usize,1,2,3]).prop_shuffle()) {
            let opts = PowerOptions::default();
            let w = principal_weights(&m, opts).unwrap();
            let wp = principal_weights(&m.permuted(&perm), opts).unwrap();
            for i in 0..4 {
                prop_assert!((wp[i] - w[perm[i]]).abs() < 1e-9);
            }
        }

        #[test]
        fn transpose_keeps_lambda_max(m in reciprocal(4)) {
            let opts = PowerOptions::default();
            let w = principal_weights(&m, opts).unwrap();
            let t = m.transpose();
            let wt = principal_weights(&t, opts).unwrap();
            let a = consistency(&m, &w).unwrap();
            let b = consistency(&t, &wt).unwrap();
            prop_assert!((a.lambda_max - b.lambda_max).abs() < 1e-8);
            prop_assert!((a.cr - b.cr).abs() < 1e-8);
            prop_assert!(a.lambda_max >= 4.0 - 1e-9);
        }
    }
}
