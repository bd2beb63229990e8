//! Kernels checked against independent reference computations.

use irspec_core::features::{pca_fit, pca_transform, pls_fit};
use irspec_core::metrics::{auc, r_squared, rmse};
use irspec_core::preprocess::{asls_baseline, asls_objective};
use irspec_core::Spectrum64;
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn random_rows(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Vec<Vec<f64>> {
    let mix: Vec<f64> = (0..d).map(|j| 1.0 + j as f64 * 0.7).collect();
    (0..n)
        .map(|_| {
            (0..d)
                .map(|j| {
                    mix[j] * {
                        let z: f64 = StandardNormal.sample(rng);
                        z
                    }
                })
                .collect()
        })
        .collect()
}

fn covariance(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let n = rows.len();
    let d = rows[0].len();
    let x = DMatrix::from_fn(n, d, |i, j| rows[i][j]);
    let means = x.row_mean();
    let xc = DMatrix::from_fn(n, d, |i, j| x[(i, j)] - means[j]);
    xc.transpose() * &xc / (n as f64 - 1.0)
}

#[test]
fn pca_matches_nalgebra_eigendecomposition() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..20 {
        let n = rng.random_range(8..40);
        let d = rng.random_range(2..6);
        let rows = random_rows(&mut rng, n, d);
        let k = d.min(n - 1);
        let model = pca_fit(&rows, k).unwrap();
        let eig = SymmetricEigen::new(covariance(&rows));
        let mut oracle: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        oracle.sort_by(|a, b| b.total_cmp(a));
        for (a, b) in model.variances.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-8 * oracle[0].max(1.0));
        }
        let scores = pca_transform(&model, &rows).unwrap();
        for c in 0..model.n_components() {
            let col: Vec<f64> = scores.iter().map(|r| r[c]).collect();
            let m = col.iter().sum::<f64>() / n as f64;
            let var = col.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n as f64 - 1.0);
            assert!((var - model.variances[c]).abs() < 1e-6);
        }
    }
}

#[test]
fn pls_first_weight_is_normalised_cross_covariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let rows = random_rows(&mut rng, 25, 5);
    let y: Vec<f64> = rows
        .iter()
        .map(|r| {
            r[1] - 0.5 * r[4]
                + 0.1 * {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    z
                }
        })
        .collect();
    let m = pls_fit(&rows, &y, 3).unwrap();
    let n = rows.len() as f64;
    let ym = y.iter().sum::<f64>() / n;
    let mut xty = vec![0.0; 5];
    for j in 0..5 {
        let xm = rows.iter().map(|r| r[j]).sum::<f64>() / n;
        xty[j] = rows.iter().zip(&y).map(|(r, v)| (r[j] - xm) * (v - ym)).sum();
    }
    let norm = xty.iter().map(|v| v * v).sum::<f64>().sqrt();
    for (a, b) in m.weights[0].iter().zip(&xty) {
        assert!((a - b / norm).abs() < 1e-8);
    }
}

fn auc_brute(scores: &[f64], pos: &[bool]) -> f64 {
    let mut total = 0.0;
    let (mut np, mut nn) = (0.0, 0.0);
    for (i, &si) in scores.iter().enumerate() {
        if !pos[i] {
            continue;
        }
        np += 1.0;
        for (j, &sj) in scores.iter().enumerate() {
            if pos[j] {
                continue;
            }
            total += if si > sj {
                1.0
            } else if si == sj {
                0.5
            } else {
                0.0
            };
        }
    }
    for &p in pos {
        if !p {
            nn += 1.0;
        }
    }
    total / (np * nn)
}

#[test]
fn metrics_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..300 {
        let n = rng.random_range(2..30);
        let scores: Vec<f64> = (0..n).map(|_| rng.random_range(0..6) as f64 / 5.0).collect();
        let mut pos: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
        pos[0] = true;
        pos[1] = false;
        assert_eq!(auc(&scores, &pos).unwrap(), auc_brute(&scores, &pos));
        let truth: Vec<f64> = (0..n).map(|i| i as f64 + rng.random_range(-1.0..1.0)).collect();
        let pred: Vec<f64> = truth.iter().map(|t| t + rng.random_range(-2.0..2.0)).collect();
        let m = truth.iter().sum::<f64>() / n as f64;
        let ss_res: f64 = truth.iter().zip(&pred).map(|(t, p)| (t - p).powi(2)).sum();
        let ss_tot: f64 = truth.iter().map(|t| (t - m).powi(2)).sum();
        assert!((r_squared(&pred, &truth).unwrap() - (1.0 - ss_res / ss_tot)).abs() < 1e-12);
        assert!((rmse(&pred, &truth).unwrap() - (ss_res / n as f64).sqrt()).abs() < 1e-12);
    }
}

#[test]
fn asls_beats_trivial_baselines_on_random_spectra() {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    for _ in 0..20 {
        let n = rng.random_range(30..150);
        let g: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let y: Vec<f64> = g
            .iter()
            .map(|x| (x / 9.0).sin() + rng.random_range(-0.3..0.3))
            .collect();
        let s = Spectrum64::new("r", g, y.clone()).unwrap();
        let (lambda, p) = (10f64.powf(rng.random_range(1.0..6.0)), rng.random_range(0.001..0.2));
        let out = asls_baseline(&s, lambda, p, 15).unwrap();
        assert!(out.objective.windows(2).all(|w| w[1] <= w[0]));
        let f = asls_objective(&y, out.baseline.intensities(), lambda, p);
        let mean = y.iter().sum::<f64>() / n as f64;
        assert!(f <= asls_objective(&y, &y, lambda, p));
        assert!(f <= asls_objective(&y, &vec![mean; n], lambda, p));
    }
}
