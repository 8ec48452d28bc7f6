//! Reference computations that share no code with the library.
#![allow(dead_code)]

/// Largest real root of det(A - λI) for a positive 3×3 matrix, by bisection
/// on the characteristic cubic.
pub fn lambda_max_3x3(a: &[[f64; 3]; 3]) -> f64 {
    let tr = a[0][0] + a[1][1] + a[2][2];
    let minors = a[0][0] * a[1][1] - a[0][1] * a[1][0] + a[0][0] * a[2][2] - a[0][2] * a[2][0]
        + a[1][1] * a[2][2]
        - a[1][2] * a[2][1];
    let det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
        - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
    let p = |l: f64| ((l - tr) * l + minors) * l - det;
    // Perron root is bounded by the largest row sum and above every other
    // real root
    let bound = a.iter().map(|r| r.iter().sum::<f64>()).fold(0.0, f64::max) + 1.0;
    // walk down from the bound to bracket the largest sign change
    let step = bound / 4096.0;
    let mut x = bound;
    while x > 0.0 && p(x) > 0.0 {
        x -= step;
    }
    let mut lo = x.max(0.0);
    let mut hi = (x + step).min(bound);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if p(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Eigenvector for `lambda`, from the cross product of two rows of A - λI,
/// normalised to sum 1.
pub fn eigenvector_3x3(a: &[[f64; 3]; 3], lambda: f64) -> [f64; 3] {
    let r = |i: usize| {
        let mut row = a[i];
        row[i] -= lambda;
        row
    };
    let (u, v) = (r(0), r(1));
    let w = [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ];
    let s: f64 = w.iter().sum();
    [w[0] / s, w[1] / s, w[2] / s]
}

/// Minimum within-class squared deviation over every contiguous partition
/// of the sorted values into `k` classes.
pub fn brute_force_sdcm(values: &[f64], k: usize) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    let mut best = f64::INFINITY;
    // k - 1 cut positions in 1..n, strictly increasing
    let mut cuts: Vec<usize> = (1..k).collect();
    loop {
        let mut bounds = vec![0];
        bounds.extend(&cuts);
        bounds.push(n);
        let mut total = 0.0;
        for w in bounds.windows(2) {
            let cls = &v[w[0]..w[1]];
            let mean = cls.iter().sum::<f64>() / cls.len() as f64;
            total += cls.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>();
        }
        best = best.min(total);
        // next combination
        let mut i = cuts.len();
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if cuts[i] < n - (cuts.len() - i) {
                cuts[i] += 1;
                for j in i + 1..cuts.len() {
                    cuts[j] = cuts[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Within-class squared deviation of integer data as an exact fraction
/// `(numerator, denominator)` in lowest terms.
pub fn exact_sdcm(classes: &[Vec<i64>]) -> (i128, i128) {
    let mut acc = (0i128, 1i128);
    for cls in classes {
        let n = cls.len() as i128;
        let s1: i128 = cls.iter().map(|&x| x as i128).sum();
        let s2: i128 = cls.iter().map(|&x| (x as i128) * (x as i128)).sum();
        // Σ(x - mean)² = (n·Σx² - (Σx)²) / n
        acc = reduce(acc.0 * n + (n * s2 - s1 * s1) * acc.1, acc.1 * n);
    }
    acc
}

fn reduce(num: i128, den: i128) -> (i128, i128) {
    let (mut a, mut b) = (num.abs(), den.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    let g = a.max(1);
    (num / g, den / g)
}

/// Exact minimum of [`exact_sdcm`] over every split of the sorted integers
/// into `k` non-empty runs, ties between equal values included.
pub fn brute_force_exact_sdcm(values: &[i64], k: usize) -> (i128, i128) {
    let mut v = values.to_vec();
    v.sort();
    let n = v.len();
    let mut best: Option<(i128, i128)> = None;
    let mut cuts: Vec<usize> = (1..k).collect();
    loop {
        let mut bounds = vec![0];
        bounds.extend(&cuts);
        bounds.push(n);
        let classes: Vec<Vec<i64>> = bounds.windows(2).map(|w| v[w[0]..w[1]].to_vec()).collect();
        let c = exact_sdcm(&classes);
        if best.is_none_or(|b| c.0 * b.1 < b.0 * c.1) {
            best = Some(c);
        }
        let mut i = cuts.len();
        loop {
            if i == 0 {
                return best.expect("at least one split");
            }
            i -= 1;
            if cuts[i] < n - (cuts.len() - i) {
                cuts[i] += 1;
                for j in i + 1..cuts.len() {
                    cuts[j] = cuts[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Split integers into classes by right-closed breaks.
pub fn split_by_breaks(values: &[i64], breaks: &[f64]) -> Vec<Vec<i64>> {
    let mut classes = vec![Vec::new(); breaks.len() + 1];
    for &x in values {
        let c = breaks.iter().filter(|b| (x as f64) > **b).count();
        classes[c].push(x);
    }
    classes
}
