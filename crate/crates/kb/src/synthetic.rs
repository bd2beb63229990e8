//! Bundled records: the five material plans used in the experiments plus
//! distractors, and a seeded 200-document retrieval benchmark.

use std::collections::BTreeSet;

use irspec_core::features::FeatureSpec;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::eval::LabeledQuery;
use crate::record::KbRecord;

pub const BENCHMARK_SEED: u64 = 2025;

fn record(
    id: &str,
    material: &str,
    technique: &str,
    bands: &str,
    chain: &[&str],
    feature: FeatureSpec,
    model: &str,
    citation: &str,
) -> KbRecord {
    KbRecord {
        id: id.into(),
        material_focus: material.into(),
        technique: technique.into(),
        wavelength_bands: bands.into(),
        best_preprocessing: chain.iter().map(|s| s.to_string()).collect(),
        best_feature: feature,
        model_architecture: model.into(),
        citation: citation.into(),
    }
}

fn pca() -> FeatureSpec {
    FeatureSpec::PCA { n_components: 5 }
}

/// Query text and expected record id for each of the five materials.
pub const MATERIAL_QUERIES: [(&str, &str); 5] = [
    ("Ink", "kb-ink-001"),
    ("Chinese medicine", "kb-tcm-001"),
    ("CRP", "kb-crp-001"),
    ("Pu'er tea", "kb-tea-001"),
    ("Waste water", "kb-ww-001"),
];

/// Contents of `fixtures/kb.jsonl`.
pub fn fixture_records() -> Vec<KbRecord> {
    let nir = "near infrared spectroscopy";
    let lbp = FeatureSpec::LambertBeerPearson { n_top: 3, n_bins: 3 };
    vec![
        record(
            "kb-ink-001",
            "stamp pad ink",
            nir,
            "900-1700 nm",
            &["SG", "SNV"],
            pca(),
            "SVM",
            "Forensic discrimination of stamp pad inks",
        ),
        record(
            "kb-tcm-001",
            "traditional Chinese medicine",
            nir,
            "1000-2500 nm",
            &["SNV", "FD"],
            pca(),
            "PLS-DA",
            "Origin tracing of Chinese medicinal herbs",
        ),
        record(
            "kb-crp-001",
            "Citri Reticulatae Pericarpium (CRP)",
            nir,
            "1000-2500 nm",
            &["SGFD", "SNV"],
            pca(),
            "KNN",
            "Storage age of CRP",
        ),
        record(
            "kb-tea-001",
            "Pu'er tea",
            nir,
            "1000-1800 nm",
            &["SNV"],
            pca(),
            "RF",
            "Grade identification of Pu'er tea",
        ),
        record(
            "kb-ww-001",
            "waste water chemical oxygen demand (COD)",
            "ultraviolet visible absorption spectroscopy",
            "200-800 nm",
            &["BC"],
            lbp,
            "LR",
            "COD estimation from UV-Vis absorbance",
        ),
        record(
            "kb-dis-001",
            "green tea catechins",
            nir,
            "1100-2300 nm",
            &["MSC"],
            FeatureSpec::PLS { n_latent: 6 },
            "PLSR",
            "Catechin content of green tea",
        ),
        record(
            "kb-dis-002",
            "drinking water hardness",
            "Raman spectroscopy",
            "200-3200 cm-1",
            &["DT"],
            pca(),
            "SVR",
            "Hardness screening of tap water",
        ),
        record(
            "kb-dis-003",
            "wheat flour protein",
            nir,
            "1100-2500 nm",
            &["MSC", "SD"],
            FeatureSpec::PLS { n_latent: 8 },
            "PLSR",
            "Protein in wheat flour",
        ),
        record(
            "kb-dis-004",
            "olive oil adulteration",
            "Fourier transform infrared spectroscopy",
            "4000-600 cm-1",
            &["SNV", "SD"],
            pca(),
            "LDA",
            "Adulterated olive oil",
        ),
        record(
            "kb-dis-005",
            "milk powder melamine",
            nir,
            "1000-2500 nm",
            &["SG", "MSC"],
            pca(),
            "SIMCA",
            "Melamine in milk powder",
        ),
        record(
            "kb-dis-006",
            "soil organic carbon",
            "visible near infrared spectroscopy",
            "350-2500 nm",
            &["SGFD"],
            FeatureSpec::PLS { n_latent: 10 },
            "PLSR",
            "Soil carbon mapping",
        ),
        record(
            "kb-dis-007",
            "pharmaceutical tablets",
            "Raman spectroscopy",
            "200-1800 cm-1",
            &["BC", "SNV"],
            FeatureSpec::Peaks {
                prominence: 0.05,
                max_peaks: 5,
            },
            "PLSR",
            "Tablet API content",
        ),
        record(
            "kb-dis-008",
            "polymer pellets",
            "mid infrared spectroscopy",
            "4000-400 cm-1",
            &["MinMax"],
            FeatureSpec::CWT {
                scales: vec![2.0, 4.0, 8.0, 16.0],
                wavelet: Default::default(),
            },
            "KNN",
            "Plastic sorting",
        ),
        record(
            "kb-dis-009",
            "honey botanical origin",
            nir,
            "1100-2500 nm",
            &["SNV", "DT"],
            FeatureSpec::NMF {
                rank: 4,
                iters: 200,
                seed: 0,
            },
            "SVM",
            "Honey authentication",
        ),
        record(
            "kb-dis-010",
            "coffee roasting degree",
            nir,
            "900-1700 nm",
            &["SG"],
            FeatureSpec::Stats,
            "RF",
            "Roast degree of coffee beans",
        ),
    ]
}

const TECHNIQUES: [&str; 7] = [
    "near infrared spectroscopy",
    "Fourier transform infrared spectroscopy",
    "Raman spectroscopy",
    "ultraviolet visible spectroscopy",
    "mid infrared spectroscopy",
    "hyperspectral imaging spectroscopy",
    "portable near infrared spectrometer",
];

const BANDS: [&str; 6] = [
    "900-1700 nm",
    "1000-2500 nm",
    "4000-400 cm-1",
    "200-800 nm",
    "400-1000 nm",
    "1100-2300 nm",
];

struct Category {
    name: &'static str,
    docs: usize,
    queries: usize,
    doc_objects: &'static [&'static str],
    topics: &'static [&'static str],
    query_objects: &'static [&'static str],
}

const CATEGORIES: [Category; 4] = [
    Category {
        name: "ink",
        docs: 10,
        queries: 25,
        doc_objects: &[
            "stamp pad ink",
            "red seal ink",
            "stamp ink",
            "seal stamp pad ink",
            "inkpad ink",
        ],
        topics: &[
            "discrimination",
            "forensic document examination",
            "ageing",
            "brand identification",
        ],
        query_objects: &["stamp pad ink", "ink", "seal ink"],
    },
    Category {
        name: "water",
        docs: 20,
        queries: 25,
        doc_objects: &[
            "waste water",
            "wastewater",
            "municipal waste water",
            "industrial wastewater effluent",
            "sewage water",
        ],
        topics: &[
            "chemical oxygen demand",
            "COD prediction",
            "water quality monitoring",
            "nitrate content",
        ],
        query_objects: &["waste water", "wastewater COD", "water quality"],
    },
    Category {
        name: "medicine",
        docs: 10,
        queries: 25,
        doc_objects: &[
            "traditional Chinese medicine",
            "Chinese herbal medicine",
            "TCM herbal materials",
            "Chinese medicinal materials",
        ],
        topics: &["geographical origin", "adulteration", "quality grading"],
        query_objects: &[
            "Chinese medicine",
            "traditional Chinese medicine",
            "Chinese herbal medicine",
        ],
    },
    Category {
        name: "tea",
        docs: 10,
        queries: 25,
        doc_objects: &["Pu'er tea", "Pu-erh tea", "fermented Pu'er tea", "aged Puer tea"],
        topics: &["storage age", "fermentation degree", "grade identification"],
        query_objects: &["Pu'er tea", "Puer tea", "Pu-erh tea"],
    },
];

const NOISE_SUBSTANCES: [&str; 50] = [
    "olive oil",
    "wheat flour",
    "milk powder",
    "honey",
    "coffee beans",
    "cocoa",
    "soybean",
    "rice",
    "corn kernels",
    "apple",
    "orange juice",
    "red wine",
    "beer",
    "cheese",
    "pork",
    "beef",
    "fish fillet",
    "polymer pellets",
    "cotton fabric",
    "wool",
    "paracetamol tablets",
    "soil",
    "coal",
    "crude oil",
    "diesel fuel",
    "gasoline",
    "plastic waste",
    "textile fibers",
    "wood",
    "paper",
    "leather",
    "tobacco leaves",
    "sugar cane",
    "peanuts",
    "almonds",
    "walnuts",
    "grapes",
    "strawberries",
    "tomatoes",
    "potatoes",
    "blood serum",
    "urine",
    "saliva",
    "bone",
    "tooth enamel",
    "cement",
    "gypsum",
    "limestone",
    "gemstones",
    "printer toner",
];

const NOISE_TOPICS: [&str; 7] = [
    "quality",
    "adulteration detection",
    "moisture content",
    "origin tracing",
    "protein content",
    "sugar content",
    "classification",
];

fn plain_record(id: String, material: String, technique: &str, bands: &str) -> KbRecord {
    record(&id, &material, technique, bands, &["SNV"], pca(), "", "")
}

/// 200 documents (10 ink, 20 water, 10 medicine, 10 tea, 150 noise) and
/// 100 queries labelled with the ids of their category's documents.
pub fn retrieval_benchmark(seed: u64) -> (Vec<KbRecord>, Vec<LabeledQuery>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut docs = Vec::new();
    let mut queries = Vec::new();
    for cat in &CATEGORIES {
        let mut ids = BTreeSet::new();
        for i in 0..cat.docs {
            let id = format!("{}-{:03}", cat.name, i);
            let obj = cat.doc_objects.choose(&mut rng).unwrap();
            let topic = cat.topics.choose(&mut rng).unwrap();
            let material = if rng.random_bool(0.5) {
                format!("{topic} of {obj}")
            } else {
                format!("{obj} {topic}")
            };
            docs.push(plain_record(
                id.clone(),
                material,
                TECHNIQUES.choose(&mut rng).unwrap(),
                BANDS.choose(&mut rng).unwrap(),
            ));
            ids.insert(id);
        }
        for _ in 0..cat.queries {
            let mut q = cat.query_objects.choose(&mut rng).unwrap().to_string();
            if rng.random_bool(0.6) {
                q.push(' ');
                q.push_str(TECHNIQUES.choose(&mut rng).unwrap());
            }
            if rng.random_bool(0.4) {
                q.push(' ');
                q.push_str(BANDS.choose(&mut rng).unwrap());
            }
            queries.push(LabeledQuery {
                query: q,
                relevant: ids.clone(),
            });
        }
    }
    for i in 0..150 {
        let substance = NOISE_SUBSTANCES[i % NOISE_SUBSTANCES.len()];
        let topic = NOISE_TOPICS.choose(&mut rng).unwrap();
        docs.push(plain_record(
            format!("noise-{i:03}"),
            format!("{substance} {topic}"),
            TECHNIQUES.choose(&mut rng).unwrap(),
            BANDS.choose(&mut rng).unwrap(),
        ));
    }
    (docs, queries)
}
