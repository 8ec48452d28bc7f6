//! Metric SMACOF in two dimensions and good–bad axis alignment.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// Relative tolerance on symmetry of the input distances.
const SYMMETRY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmacofOptions {
    pub max_iter: usize,
    /// Stop once raw stress, normalised by the sum of squared target
    /// distances, drops by less than this in one iteration.
    pub tol: f64,
    /// Only used when classical scaling gives no usable start.
    pub seed: u64,
}

impl Default for SmacofOptions {
    fn default() -> Self {
        SmacofOptions {
            max_iter: 500,
            tol: 1e-8,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MdsSolution {
    pub coords: Vec<Point>,
    /// Kruskal stress-1 of the final configuration.
    pub stress: f64,
    pub rsq: f64,
    pub iterations: usize,
    /// Raw stress of the start configuration followed by one entry per
    /// Guttman transform.
    pub stress_history: Vec<f64>,
}

fn check_distances(d: &[Vec<f64>]) -> Result<usize> {
    let n = d.len();
    if n == 0 {
        return Err(Error::invalid("distance matrix", "empty"));
    }
    let scale = d
        .iter()
        .flatten()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(1.0);
    for (i, row) in d.iter().enumerate() {
        if row.len() != n {
            return Err(Error::invalid("distance matrix", format!("row {i} has wrong length")));
        }
        for (j, &v) in row.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::invalid(
                    "distance matrix",
                    format!("entry ({i}, {j}) must be finite and non-negative, got {v}"),
                ));
            }
            if i == j && v != 0.0 {
                return Err(Error::invalid("distance matrix", format!("diagonal entry {i} is {v}")));
            }
            if (v - d[j][i]).abs() > SYMMETRY_TOLERANCE * scale {
                return Err(Error::invalid(
                    "distance matrix",
                    format!("not symmetric at ({i}, {j})"),
                ));
            }
        }
    }
    Ok(n)
}

fn dist(a: &Point, b: &Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn raw_stress(x: &[Point], d: &[Vec<f64>]) -> f64 {
    let mut s = 0.0;
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            let r = dist(&x[i], &x[j]) - d[i][j];
            s += r * r;
        }
    }
    s
}

/// Torgerson classical scaling onto the two leading eigenvectors. Returns
/// `None` when the doubly centred matrix has no positive eigenvalue.
pub fn classical_scaling(d: &[Vec<f64>]) -> Option<Vec<Point>> {
    let n = d.len();
    let sq = DMatrix::from_fn(n, n, |i, j| d[i][j] * d[i][j]);
    let row_means: Vec<f64> = (0..n).map(|i| sq.row(i).sum() / n as f64).collect();
    let grand = row_means.iter().sum::<f64>() / n as f64;
    let b = DMatrix::from_fn(n, n, |i, j| -0.5 * (sq[(i, j)] - row_means[i] - row_means[j] + grand));
    let eig = SymmetricEigen::new(b);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let top = eig.eigenvalues[order[0]];
    let floor = 1e-12 * sq.iter().fold(0.0f64, |m, v| m.max(*v)).max(f64::MIN_POSITIVE);
    if !(top > floor) {
        return None;
    }
    let mut coords = vec![[0.0; 2]; n];
    for (axis, &k) in order.iter().take(2).enumerate() {
        let lambda = eig.eigenvalues[k];
        if lambda <= floor.max(1e-10 * top) {
            continue;
        }
        let s = lambda.sqrt();
        for (i, c) in coords.iter_mut().enumerate() {
            c[axis] = eig.eigenvectors[(i, k)] * s;
        }
    }
    Some(coords)
}

fn guttman_transform(x: &[Point], d: &[Vec<f64>]) -> Vec<Point> {
    let n = x.len();
    let mut out = vec![[0.0; 2]; n];
    for i in 0..n {
        let mut diag = 0.0;
        let mut acc = [0.0; 2];
        for j in 0..n {
            if i == j {
                continue;
            }
            let dij = dist(&x[i], &x[j]);
            if dij > 0.0 {
                let b = -d[i][j] / dij;
                diag -= b;
                acc[0] += b * x[j][0];
                acc[1] += b * x[j][1];
            }
        }
        out[i] = [
            (acc[0] + diag * x[i][0]) / n as f64,
            (acc[1] + diag * x[i][1]) / n as f64,
        ];
    }
    out
}

/// Kruskal stress-1 and squared correlation between target and fitted
/// distances.
pub fn fit_statistics(x: &[Point], d: &[Vec<f64>]) -> (f64, f64) {
    let mut resid = 0.0;
    let mut fitted_sq = 0.0;
    let (mut sx, mut sy, mut sxx, mut syy, mut sxy, mut m) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            let f = dist(&x[i], &x[j]);
            let t = d[i][j];
            resid += (f - t) * (f - t);
            fitted_sq += f * f;
            sx += t;
            sy += f;
            sxx += t * t;
            syy += f * f;
            sxy += t * f;
            m += 1.0;
        }
    }
    let stress = if fitted_sq > 0.0 { (resid / fitted_sq).sqrt() } else { 0.0 };
    let rsq = if m == 0.0 {
        1.0
    } else {
        let cov = sxy - sx * sy / m;
        let vt = sxx - sx * sx / m;
        let vf = syy - sy * sy / m;
        let tiny = 1e-24 * (sxx + syy).max(1.0);
        if vt <= tiny || vf <= tiny {
            if resid <= tiny { 1.0 } else { 0.0 }
        } else {
            (cov * cov / (vt * vf)).clamp(0.0, 1.0)
        }
    };
    (stress, rsq)
}

/// Two-dimensional metric MDS by stress majorization.
///
/// Starts from classical scaling, falling back to a seeded random
/// configuration when that is degenerate, and applies Guttman transforms
/// until the normalised stress decrease falls below `tol` or `max_iter` is
/// reached.
pub fn smacof_mds(d: &[Vec<f64>], opts: &SmacofOptions) -> Result<MdsSolution> {
    let n = check_distances(d)?;
    let mut x = classical_scaling(d).unwrap_or_else(|| {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        (0..n)
            .map(|_| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
            .collect()
    });
    let norm: f64 = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .map(|(i, j)| d[i][j] * d[i][j])
        .sum();
    let mut stress = raw_stress(&x, d);
    let mut history = vec![stress];
    let mut iterations = 0;
    if norm > 0.0 {
        while iterations < opts.max_iter {
            let next = guttman_transform(&x, d);
            let next_stress = raw_stress(&next, d);
            iterations += 1;
            history.push(next_stress);
            let decrease = (stress - next_stress) / norm;
            x = next;
            stress = next_stress;
            if decrease < opts.tol {
                break;
            }
        }
    } else {
        // every target distance is zero: collapse onto the centroid
        x = guttman_transform(&x, d);
        history.push(raw_stress(&x, d));
        iterations = 1;
    }
    let (stress1, rsq) = fit_statistics(&x, d);
    Ok(MdsSolution {
        coords: x,
        stress: stress1,
        rsq,
        iterations,
        stress_history: history,
    })
}

/// Similarity transform putting `bad` at (0, 0) and `good` at (100, 0).
///
/// The reflection is chosen so the summed second coordinate is
/// non-negative, which makes the result independent of any rigid motion
/// applied to the input.
pub fn align_to_axis(coords: &[Point], good: usize, bad: usize) -> Result<Vec<Point>> {
    let g = coords
        .get(good)
        .ok_or_else(|| Error::invalid("alignment", "GOOD row out of range"))?;
    let b = coords
        .get(bad)
        .ok_or_else(|| Error::invalid("alignment", "BAD row out of range"))?;
    let u = [g[0] - b[0], g[1] - b[1]];
    let len_sq = u[0] * u[0] + u[1] * u[1];
    let extent = coords
        .iter()
        .flat_map(|p| p.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    if !(len_sq > 0.0) || len_sq.sqrt() <= 1e-12 * extent.max(f64::MIN_POSITIVE) {
        return Err(Error::Degenerate("GOOD and BAD reference points coincide".into()));
    }
    let mut out: Vec<Point> = coords
        .iter()
        .map(|p| {
            let v = [p[0] - b[0], p[1] - b[1]];
            let along = (v[0] * u[0] + v[1] * u[1]) / len_sq;
            let across = (u[0] * v[1] - u[1] * v[0]) / len_sq;
            [100.0 * along, 100.0 * across]
        })
        .collect();
    let total: f64 = out.iter().map(|p| p[1]).sum();
    let flip = if total.abs() > 1e-9 * out.len() as f64 {
        total < 0.0
    } else {
        out.iter()
            .map(|p| p[1])
            .find(|y| y.abs() > 1e-9)
            .is_some_and(|y| y < 0.0)
    };
    if flip {
        out.iter_mut().for_each(|p| p[1] = -p[1]);
    }
    // exact anchors
    out[bad] = [0.0, 0.0];
    out[good] = [100.0, 0.0];
    Ok(out)
}
