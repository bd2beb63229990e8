//! Dataset files.
//!
//! CSV layout: header `wavelength,<id1>,<id2>,...`, one row per wavelength.
//! Labels live in a sidecar JSON object keyed by sample id
//! (`<stem>.labels.json` next to the CSV):
//!
//! ```json
//! { "$meta": {"material": "ink"}, "s1": {"class": "A"}, "s2": {"flag": true}, "s3": {"value": 12.5, "unit": "mg/L"} }
//! ```
//!
//! The JSON format stores everything in one document, see [`DatasetDocument`].

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::dataset::{Label, LabelRecord, SpectralDataset, TaskType};
use super::spectrum::Spectrum;
use crate::error::{Error, Result};
use crate::scalar::Real;

pub const META_KEY: &str = "$meta";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetFormat {
    Csv,
    Json,
}

impl DatasetFormat {
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => DatasetFormat::Json,
            _ => DatasetFormat::Csv,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SidecarMeta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub material: Option<String>,
}

/// Single-file JSON dataset.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct DatasetDocument<T: Real = f64> {
    pub material: String,
    pub task: TaskType,
    pub wavelengths: Vec<T>,
    pub samples: Vec<SampleDocument<T>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SampleDocument<T: Real = f64> {
    pub id: String,
    pub intensities: Vec<T>,
    pub label: Label,
}

/// Sidecar path for a CSV file: `data.csv` → `data.labels.json`.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    let stem = csv.file_stem().and_then(|s| s.to_str()).unwrap_or("dataset");
    csv.with_file_name(format!("{stem}.labels.json"))
}

pub fn load_dataset<T: Real>(path: &Path, format: DatasetFormat) -> Result<SpectralDataset<T>> {
    match format {
        DatasetFormat::Csv => load_csv(path, &sidecar_path(path)),
        DatasetFormat::Json => load_json(path),
    }
}

pub fn save_dataset<T: Real>(ds: &SpectralDataset<T>, path: &Path, format: DatasetFormat) -> Result<()> {
    match format {
        DatasetFormat::Csv => save_csv(ds, path, &sidecar_path(path)),
        DatasetFormat::Json => save_json(ds, path),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn parse_num<T: Real>(s: &str, what: impl FnOnce() -> String) -> Result<T> {
    s.trim()
        .parse::<T>()
        .map_err(|_| Error::Parse(format!("{}: `{s}` is not a number", what())))
}

/// Parses the CSV body into (ids, grid, per-sample columns) without labels.
pub fn parse_spectra_csv<T: Real>(text: &str) -> Result<(Vec<String>, Vec<T>, Vec<Vec<T>>)> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let Some((_, header)) = lines.next() else {
        return Err(Error::Parse("empty CSV file".into()));
    };
    let mut cols = header.split(',').map(str::trim);
    match cols.next() {
        Some(h) if h.eq_ignore_ascii_case("wavelength") => {}
        other => {
            return Err(Error::Parse(format!(
                "row 1: first header column must be `wavelength`, found `{}`",
                other.unwrap_or("")
            )))
        }
    }
    let ids: Vec<String> = cols.map(str::to_string).collect();
    if let Some(id) = ids.iter().find(|id| id.is_empty()) {
        return Err(Error::Parse(format!("row 1: empty sample id `{id}`")));
    }
    let mut grid = Vec::new();
    let mut columns: Vec<Vec<T>> = vec![Vec::new(); ids.len()];
    for (lineno, line) in lines {
        let row = lineno + 1;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != ids.len() + 1 {
            return Err(Error::LengthMismatch(format!(
                "row {row}: {} fields, header has {}",
                fields.len(),
                ids.len() + 1
            )));
        }
        let w: T = parse_num(fields[0], || format!("row {row}, wavelength"))?;
        if let Some(&prev) = grid.last() {
            if !(w > prev) {
                return Err(Error::NonUniformGrid(format!(
                    "row {row}: wavelength {w} does not increase (previous {prev})"
                )));
            }
        }
        grid.push(w);
        for (c, f) in fields[1..].iter().enumerate() {
            let id = &ids[c];
            columns[c].push(parse_num(f, || format!("row {row}, sample `{id}`"))?);
        }
    }
    Ok((ids, grid, columns))
}

pub fn load_csv<T: Real>(csv: &Path, sidecar: &Path) -> Result<SpectralDataset<T>> {
    let (ids, grid, columns) = parse_spectra_csv::<T>(&read(csv)?)?;
    let mut side: BTreeMap<String, serde_json::Value> =
        serde_json::from_str(&read(sidecar)?).map_err(|e| Error::Parse(format!("{}: {e}", sidecar.display())))?;
    let meta: SidecarMeta = match side.remove(META_KEY) {
        Some(v) => serde_json::from_value(v).map_err(|e| Error::Parse(format!("{META_KEY}: {e}")))?,
        None => SidecarMeta::default(),
    };
    let material = meta.material.unwrap_or_else(|| {
        csv.file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("dataset")
            .to_string()
    });
    let mut labels = Vec::with_capacity(ids.len());
    for id in &ids {
        let v = side.get(id).ok_or_else(|| Error::MissingLabel(id.clone()))?;
        let rec: LabelRecord =
            serde_json::from_value(v.clone()).map_err(|e| Error::Parse(format!("label of `{id}`: {e}")))?;
        labels.push(Label::try_from(rec).map_err(|e| Error::Parse(format!("label of `{id}`: {e}")))?);
    }
    assemble(material, grid, ids, columns, labels)
}

fn assemble<T: Real>(
    material: String,
    grid: Vec<T>,
    ids: Vec<String>,
    columns: Vec<Vec<T>>,
    labels: Vec<Label>,
) -> Result<SpectralDataset<T>> {
    let task = match labels.first() {
        Some(l) => l.task(),
        None => {
            // empty datasets still need a valid grid to be useful downstream
            return Ok(SpectralDataset::empty(material, TaskType::Classification, grid));
        }
    };
    if let Some((id, l)) = ids.iter().zip(&labels).find(|(_, l)| l.task() != task) {
        return Err(Error::InvalidLabel(format!(
            "sample `{id}` has a {} label but the dataset is {task}",
            l.task()
        )));
    }
    let grid: Arc<[T]> = Arc::from(grid);
    let spectra = ids
        .into_iter()
        .zip(columns)
        .map(|(id, col)| Spectrum::on_grid(id, Arc::clone(&grid), col))
        .collect::<Result<Vec<_>>>()?;
    SpectralDataset::on_grid(material, task, grid, spectra, labels)
}

pub fn save_csv<T: Real>(ds: &SpectralDataset<T>, csv: &Path, sidecar: &Path) -> Result<()> {
    fs::write(csv, spectra_csv(ds)).map_err(|e| Error::io(csv, e))?;
    let mut side = serde_json::Map::new();
    side.insert(
        META_KEY.into(),
        serde_json::to_value(SidecarMeta {
            material: Some(ds.material().to_string()),
        })
        .expect("serialisable"),
    );
    for (s, l) in ds.spectra().iter().zip(ds.labels()) {
        side.insert(s.id().to_string(), serde_json::to_value(l).expect("serialisable"));
    }
    let text = serde_json::to_string_pretty(&side).expect("serialisable") + "\n";
    fs::write(sidecar, text).map_err(|e| Error::io(sidecar, e))
}

/// CSV text of the spectra (no labels).
pub fn spectra_csv<T: Real>(ds: &SpectralDataset<T>) -> String {
    let mut out = String::from("wavelength");
    for s in ds.spectra() {
        out.push(',');
        out.push_str(s.id());
    }
    out.push('\n');
    for (j, w) in ds.wavelengths().iter().enumerate() {
        out.push_str(&w.to_string());
        for s in ds.spectra() {
            out.push(',');
            out.push_str(&s.intensities()[j].to_string());
        }
        out.push('\n');
    }
    out
}

pub fn load_json<T: Real>(path: &Path) -> Result<SpectralDataset<T>> {
    let doc: DatasetDocument<T> =
        serde_json::from_str(&read(path)?).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let grid: Arc<[T]> = Arc::from(doc.wavelengths);
    let mut spectra = Vec::with_capacity(doc.samples.len());
    let mut labels = Vec::with_capacity(doc.samples.len());
    for s in doc.samples {
        spectra.push(Spectrum::on_grid(s.id, Arc::clone(&grid), s.intensities)?);
        labels.push(s.label);
    }
    SpectralDataset::on_grid(doc.material, doc.task, grid, spectra, labels)
}

pub fn save_json<T: Real>(ds: &SpectralDataset<T>, path: &Path) -> Result<()> {
    let doc = DatasetDocument {
        material: ds.material().to_string(),
        task: ds.task(),
        wavelengths: ds.wavelengths().to_vec(),
        samples: ds
            .spectra()
            .iter()
            .zip(ds.labels())
            .map(|(s, l)| SampleDocument {
                id: s.id().to_string(),
                intensities: s.intensities().to_vec(),
                label: l.clone(),
            })
            .collect(),
    };
    let text = serde_json::to_string(&doc).expect("serialisable") + "\n";
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
