//! Seeded synthetic datasets used by tests, fixtures and demos.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::error::Result;
use crate::model::{FeatureMatrix, Label, SpectralDataset, Spectrum, Split, TaskType};

fn gauss(x: f64, c: f64, w: f64) -> f64 {
    (-(x - c).powi(2) / (2.0 * w * w)).exp()
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// NIR-range classification set: each class mixes the same four bands in
/// its own proportions and carries one band of its own, under random
/// additive/multiplicative scatter, a sloped baseline and white noise.
pub fn ink_like(n_per_class: usize, n_classes: usize, seed: u64) -> Result<SpectralDataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid: Vec<f64> = (0..201).map(|i| 900.0 + 4.0 * i as f64).collect();
    let shared = [(1150.0, 35.0), (1210.0, 25.0), (1420.0, 45.0), (1530.0, 30.0)];
    let mut spectra = Vec::new();
    let mut labels = Vec::new();
    for c in 0..n_classes {
        let mix: Vec<f64> = (0..shared.len()).map(|_| rng.random_range(0.3..1.0)).collect();
        let own_centre = 1000.0 + 600.0 * (c as f64 + 0.5) / n_classes as f64;
        for k in 0..n_per_class {
            let offset = 0.05 * normal(&mut rng);
            let gain = 1.0 + 0.08 * normal(&mut rng);
            let slope = 2e-4 * normal(&mut rng);
            let y: Vec<f64> = grid
                .iter()
                .map(|&x| {
                    let bands: f64 = shared
                        .iter()
                        .zip(&mix)
                        .map(|(&(centre, w), &h)| h * gauss(x, centre, w))
                        .sum::<f64>()
                        + 0.6 * gauss(x, own_centre, 20.0);
                    offset + gain * bands + slope * (x - 900.0) + 0.004 * normal(&mut rng)
                })
                .collect();
            spectra.push(Spectrum::new(
                format!("ink{}_{:03}", (b'A' + c as u8) as char, k),
                grid.clone(),
                y,
            )?);
            labels.push(Label::Class(format!("ink_{}", (b'A' + c as u8) as char)));
        }
    }
    SpectralDataset::new("ink", TaskType::Classification, spectra, labels)
}

/// UV-Vis absorbance set with chemical oxygen demand as the response. The
/// organic absorption scales with COD on top of a random smooth baseline
/// and a turbidity-like interferent.
pub fn wastewater(n: usize, seed: u64) -> Result<SpectralDataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid: Vec<f64> = (0..201).map(|i| 200.0 + 3.0 * i as f64).collect();
    let mut spectra = Vec::new();
    let mut labels = Vec::new();
    for k in 0..n {
        let cod: f64 = rng.random_range(20.0..300.0);
        let base = rng.random_range(0.1..0.4);
        let decay = rng.random_range(80.0..200.0);
        let turbidity = rng.random_range(0.0..0.15);
        let y: Vec<f64> = grid
            .iter()
            .map(|&x| {
                base * (-(x - 200.0) / decay).exp()
                    + turbidity * (400.0 / x).powi(2)
                    + cod / 300.0 * (gauss(x, 254.0, 18.0) + 0.35 * gauss(x, 330.0, 40.0))
                    + 0.003 * normal(&mut rng)
            })
            .collect();
        spectra.push(Spectrum::new(format!("ww{k:03}"), grid.clone(), y)?);
        labels.push(Label::Value {
            value: (cod * 100.0).round() / 100.0,
            unit: "mg/L".into(),
        });
    }
    SpectralDataset::new("waste water", TaskType::Regression, spectra, labels)
}

/// Isotropic Gaussian blobs, one per class, with centres `separation` apart
/// along successive axes.
pub fn separable_blobs(
    n_per_class: usize,
    n_classes: usize,
    dim: usize,
    separation: f64,
    seed: u64,
) -> Result<(FeatureMatrix, Vec<Label>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 1.0).expect("unit normal");
    let mut ids = Vec::new();
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for c in 0..n_classes {
        for k in 0..n_per_class {
            let row: Vec<f64> = (0..dim)
                .map(|j| noise.sample(&mut rng) + if j == c % dim { separation * c as f64 } else { 0.0 })
                .collect();
            ids.push(format!("c{c}_{k:03}"));
            rows.push(row);
            labels.push(Label::Class(format!("class{c}")));
        }
    }
    let names = (1..=dim).map(|j| format!("f{j}")).collect();
    Ok((FeatureMatrix::new(ids, names, rows)?, labels))
}

/// Two-class feature set in which class `B` has a tight sub-cluster lying
/// next to class `A`. The sub-cluster never appears in the training part of
/// a [`UndercoveredDesign::split`], so first-round exemplars do not cover it.
#[derive(Debug, Clone)]
pub struct UndercoveredDesign {
    pub features: FeatureMatrix,
    pub labels: Vec<Label>,
    /// 0 = class A, 1 = main B cluster, 2 = B sub-cluster.
    pub groups: Vec<u8>,
}

impl UndercoveredDesign {
    pub const GROUP_SIZES: [usize; 3] = [36, 32, 12];

    pub fn generate(seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = [((0.0, 0.0), 0.4), ((6.0, 0.0), 0.5), ((2.6, 0.0), 0.1)];
        let mut ids = Vec::new();
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        let mut groups = Vec::new();
        for (g, (&n, &((cx, cy), sd))) in Self::GROUP_SIZES.iter().zip(&spec).enumerate() {
            for k in 0..n {
                rows.push(vec![cx + sd * normal(&mut rng), cy + sd * normal(&mut rng)]);
                ids.push(format!("{}{k:02}", ["a", "b", "b2_"][g]));
                labels.push(Label::Class(if g == 0 { "A" } else { "B" }.into()));
                groups.push(g as u8);
            }
        }
        Ok(Self {
            features: FeatureMatrix::new(ids, vec!["f1".into(), "f2".into()], rows)?,
            labels,
            groups,
        })
    }

    /// 40/20/20 split: A and main-B fill training, the sub-cluster is shared
    /// between validation and test. Membership is shuffled by `seed`.
    pub fn split(&self, seed: u64) -> Split {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut by_group: Vec<Vec<usize>> = vec![Vec::new(); 3];
        for (i, &g) in self.groups.iter().enumerate() {
            by_group[g as usize].push(i);
        }
        for g in &mut by_group {
            g.shuffle(&mut rng);
        }
        // (train, validation, test) per group
        let quotas = [(20, 8, 8), (20, 6, 6), (0, 6, 6)];
        let mut split = Split {
            train: Vec::new(),
            validation: Vec::new(),
            test: Vec::new(),
        };
        for (g, &(tr, va, _)) in by_group.iter().zip(&quotas) {
            split.train.extend(&g[..tr]);
            split.validation.extend(&g[tr..tr + va]);
            split.test.extend(&g[tr + va..]);
        }
        split.train.sort_unstable();
        split.validation.sort_unstable();
        split.test.sort_unstable();
        split
    }
}
