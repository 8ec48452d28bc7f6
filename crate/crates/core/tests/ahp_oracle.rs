mod oracle;

use agromcda::ahp::{assess, consistency, principal_weights, PairwiseMatrix, PowerOptions};
use nalgebra::Matrix3;
use proptest::prelude::*;

const INCONSISTENT: [[f64; 3]; 3] = [[1.0, 3.0, 1.0 / 5.0], [1.0 / 3.0, 1.0, 7.0], [5.0, 1.0 / 7.0, 1.0]];

fn matrix(a: &[[f64; 3]; 3]) -> PairwiseMatrix {
    PairwiseMatrix::new(a.iter().map(|r| r.to_vec()).collect()).unwrap()
}

#[test]
fn inconsistent_fixture_against_characteristic_polynomial() {
    let m = matrix(&INCONSISTENT);
    let a = assess(&m, PowerOptions::default(), false).unwrap();
    let lambda = oracle::lambda_max_3x3(&INCONSISTENT);
    assert!((a.consistency.lambda_max - lambda).abs() < 1e-6);
    let cr = (lambda - 3.0) / 2.0 / 0.58;
    assert!((a.consistency.cr - cr).abs() < 1e-6);
    assert!(cr > 0.1);
    let w = oracle::eigenvector_3x3(&INCONSISTENT, lambda);
    for (x, y) in a.weights.iter().zip(w) {
        assert!((x - y).abs() < 1e-6);
    }
    assert!(assess(&m, PowerOptions::default(), true).is_err());
}

#[test]
fn inconsistent_fixture_against_dense_eigensolver() {
    let m = Matrix3::from_fn(|i, j| INCONSISTENT[i][j]);
    let lambda = m
        .complex_eigenvalues()
        .iter()
        .filter(|z| z.im.abs() < 1e-9)
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max);
    let w = principal_weights(&matrix(&INCONSISTENT), PowerOptions::default()).unwrap();
    let c = consistency(&matrix(&INCONSISTENT), &w).unwrap();
    assert!((c.lambda_max - lambda).abs() < 1e-6);
}

#[test]
fn oracle_on_consistent_matrix() {
    let w = [0.5, 0.3, 0.2];
    let a: [[f64; 3]; 3] = std::array::from_fn(|i| std::array::from_fn(|j| w[i] / w[j]));
    assert!((oracle::lambda_max_3x3(&a) - 3.0).abs() < 1e-9);
}

fn reciprocal_3x3() -> impl Strategy<Value = [[f64; 3]; 3]> {
    let entry = prop_oneof![1.0f64..=9.0, (1.0f64..=9.0).prop_map(|v| 1.0 / v)];
    (entry.clone(), entry.clone(), entry).prop_map(|(a, b, c)| {
        [[1.0, a, b], [1.0 / a, 1.0, c], [1.0 / b, 1.0 / c, 1.0]]
    })
}

proptest! {
    #[test]
    fn random_reciprocal_matrices(a in reciprocal_3x3()) {
        let r = assess(&matrix(&a), PowerOptions::default(), false).unwrap();
        let lambda = oracle::lambda_max_3x3(&a);
        prop_assert!((r.consistency.lambda_max - lambda).abs() < 1e-6 * lambda);
        prop_assert!(r.consistency.lambda_max >= 3.0 - 1e-9);
        let w = oracle::eigenvector_3x3(&a, lambda);
        for (x, y) in r.weights.iter().zip(w) {
            prop_assert!((x - y).abs() < 1e-6);
        }
    }

    #[test]
    fn consistent_matrices_recover_weights(raw in proptest::collection::vec(0.05f64..1.0, 3..=7)) {
        let s: f64 = raw.iter().sum();
        let w: Vec<f64> = raw.iter().map(|v| v / s).collect();
        let r = assess(&PairwiseMatrix::from_weights(&w).unwrap(), PowerOptions::default(), true).unwrap();
        for (x, y) in r.weights.iter().zip(&w) {
            prop_assert!((x - y).abs() < 1e-9);
        }
        prop_assert!(r.consistency.cr.abs() < 1e-9);
    }
}
