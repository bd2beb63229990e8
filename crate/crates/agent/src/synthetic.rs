//! Generators behind the bundled fixtures: the entity-extraction case set
//! and the demo ink dataset.

use irspec_core::model::{SpectralDataset, TaskType};
use irspec_core::synthetic::ink_like;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::extraction::EntityEvalCase;

pub const ENTITY_CASES_SEED: u64 = 42;
pub const ENTITY_CASE_COUNT: usize = 100;
pub const DEMO_DATASET_SEED: u64 = 7;

const MATERIALS: &[&str] = &[
    "Ink",
    "Chinese medicine",
    "CRP",
    "Pu'er tea",
    "Waste water",
    "olive oil",
    "honey",
    "milk powder",
    "coffee",
    "wheat flour",
    "soil",
    "microplastics",
    "gasoline",
    "wine",
    "cotton",
    "rice",
    // outside the mock's lexicon
    "jade",
    "lubricating oil",
    "silk",
    "amber",
];

const CLASSIFICATION: &[&str] = &[
    "Can NIR spectra tell which brand a {} sample comes from?",
    "Classify {} samples by geographic origin using infrared spectroscopy.",
    "Identify the grade of {} from its mid-infrared spectrum.",
    "Which variety does this {} belong to, based on FTIR data?",
];
const REGRESSION: &[&str] = &[
    "Predict the moisture content of {} from NIR spectra.",
    "Estimate the protein concentration in {} using infrared spectra.",
    "How much active compound is in {}? Work it out from the spectrum.",
    "Quantify the chemical oxygen demand of {} with UV-Vis absorbance.",
];
const ANOMALY: &[&str] = &[
    "Detect counterfeit {} samples using NIR spectroscopy.",
    "Flag abnormal {} batches from their infrared spectra.",
    "Find adulterated {} among the measured samples.",
    "Screen {} for contamination with FTIR.",
];

/// Questions with their gold research object (as written in the question)
/// and task; tasks cycle so each gets a third of the cases.
pub fn entity_cases(seed: u64, n: usize) -> Vec<EntityEvalCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let (task, templates) = match i % 3 {
                0 => (TaskType::Classification, CLASSIFICATION),
                1 => (TaskType::Regression, REGRESSION),
                _ => (TaskType::AnomalyDetection, ANOMALY),
            };
            let m = MATERIALS[rng.random_range(0..MATERIALS.len())];
            let t = templates[rng.random_range(0..templates.len())];
            EntityEvalCase {
                question: t.replace("{}", m),
                gold_object: m.to_string(),
                gold_task: task,
            }
        })
        .collect()
}

pub fn cases_to_jsonl(cases: &[EntityEvalCase]) -> String {
    cases
        .iter()
        .map(|c| serde_json::to_string(c).expect("case serialises") + "\n")
        .collect()
}

/// 80-sample, four-class ink-like NIR set used by the demo run.
pub fn demo_dataset() -> SpectralDataset {
    ink_like(20, 4, DEMO_DATASET_SEED).expect("generator parameters are valid")
}
