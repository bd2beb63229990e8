use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::spectrum::Spectrum;
use crate::error::{Error, Result};
use crate::scalar::{all_finite, Real};

/// The three analysis tasks the pipeline supports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskType {
    Classification,
    AnomalyDetection,
    Regression,
}

impl TaskType {
    pub const ALL: [TaskType; 3] = [
        TaskType::Classification,
        TaskType::AnomalyDetection,
        TaskType::Regression,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TaskType::Classification => "classification",
            TaskType::AnomalyDetection => "anomaly_detection",
            TaskType::Regression => "regression",
        }
    }
}

impl fmt::Display for TaskType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TaskType {
    type Err = Error;

    /// Accepts the canonical snake_case names; case, spaces and hyphens are
    /// folded first.
    fn from_str(s: &str) -> Result<Self> {
        let folded: String = s
            .trim()
            .chars()
            .map(|c| match c {
                ' ' | '-' => '_',
                c => c.to_ascii_lowercase(),
            })
            .collect();
        TaskType::ALL
            .into_iter()
            .find(|t| t.as_str() == folded)
            .ok_or_else(|| Error::Parse(format!("unknown task type `{s}`")))
    }
}

/// Ground-truth annotation of one sample.
#[derive(Debug, Clone, PartialEq)]
pub enum Label {
    Class(String),
    /// `true` = belongs to the reference (normal) class.
    Flag(bool),
    Value {
        value: f64,
        unit: String,
    },
}

impl Label {
    pub fn task(&self) -> TaskType {
        match self {
            Label::Class(_) => TaskType::Classification,
            Label::Flag(_) => TaskType::AnomalyDetection,
            Label::Value { .. } => TaskType::Regression,
        }
    }

    pub fn as_class(&self) -> Option<&str> {
        match self {
            Label::Class(c) => Some(c),
            _ => None,
        }
    }

    pub fn as_flag(&self) -> Option<bool> {
        match self {
            Label::Flag(f) => Some(*f),
            _ => None,
        }
    }

    pub fn as_value(&self) -> Option<f64> {
        match self {
            Label::Value { value, .. } => Some(*value),
            _ => None,
        }
    }

    /// Text used when the label is shown to a model or written to a table.
    pub fn render(&self) -> String {
        match self {
            Label::Class(c) => c.clone(),
            Label::Flag(f) => f.to_string(),
            Label::Value { value, .. } => value.to_string(),
        }
    }
}

/// On-disk form of a label: exactly one of `class`, `flag`, `value`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabelRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flag: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit: Option<String>,
}

impl TryFrom<LabelRecord> for Label {
    type Error = Error;

    fn try_from(r: LabelRecord) -> Result<Self> {
        match (r.class, r.flag, r.value) {
            (Some(c), None, None) => Ok(Label::Class(c)),
            (None, Some(f), None) => Ok(Label::Flag(f)),
            (None, None, Some(v)) if v.is_finite() => Ok(Label::Value {
                value: v,
                unit: r.unit.unwrap_or_default(),
            }),
            (None, None, Some(v)) => Err(Error::InvalidLabel(format!("non-finite value {v}"))),
            _ => Err(Error::InvalidLabel(
                "expected exactly one of `class`, `flag`, `value`".into(),
            )),
        }
    }
}

impl From<&Label> for LabelRecord {
    fn from(l: &Label) -> Self {
        match l {
            Label::Class(c) => LabelRecord {
                class: Some(c.clone()),
                ..Default::default()
            },
            Label::Flag(f) => LabelRecord {
                flag: Some(*f),
                ..Default::default()
            },
            Label::Value { value, unit } => LabelRecord {
                value: Some(*value),
                unit: if unit.is_empty() { None } else { Some(unit.clone()) },
                ..Default::default()
            },
        }
    }
}

impl Serialize for Label {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        LabelRecord::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Label {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = LabelRecord::deserialize(d)?;
        Label::try_from(r).map_err(serde::de::Error::custom)
    }
}

/// A labelled batch of spectra sharing one wavelength grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDataset<T: Real = f64> {
    material: String,
    task: TaskType,
    grid: Arc<[T]>,
    spectra: Vec<Spectrum<T>>,
    labels: Vec<Label>,
}

impl<T: Real> SpectralDataset<T> {
    /// Validates that every spectrum sits on the same grid, ids are unique,
    /// and every label matches `task`.
    ///
    /// An empty dataset needs an explicit grid, see [`SpectralDataset::empty`].
    pub fn new(
        material: impl Into<String>,
        task: TaskType,
        spectra: Vec<Spectrum<T>>,
        labels: Vec<Label>,
    ) -> Result<Self> {
        let Some(first) = spectra.first() else {
            return Err(Error::TooFewSamples("dataset has no spectra".into()));
        };
        let grid = Arc::clone(first.grid());
        Self::on_grid(material, task, grid, spectra, labels)
    }

    pub fn empty(material: impl Into<String>, task: TaskType, grid: Vec<T>) -> Self {
        Self {
            material: material.into(),
            task,
            grid: Arc::from(grid),
            spectra: Vec::new(),
            labels: Vec::new(),
        }
    }

    pub fn on_grid(
        material: impl Into<String>,
        task: TaskType,
        grid: Arc<[T]>,
        spectra: Vec<Spectrum<T>>,
        labels: Vec<Label>,
    ) -> Result<Self> {
        if spectra.len() != labels.len() {
            return Err(Error::LengthMismatch(format!(
                "{} spectra but {} labels",
                spectra.len(),
                labels.len()
            )));
        }
        let mut ids = BTreeSet::new();
        let mut shared = Vec::with_capacity(spectra.len());
        for s in spectra {
            if s.wavelengths() != &grid[..] {
                return Err(Error::NonUniformGrid(format!(
                    "spectrum `{}` does not share the dataset grid",
                    s.id()
                )));
            }
            if !ids.insert(s.id().to_string()) {
                return Err(Error::InvalidSpectrum {
                    id: s.id().to_string(),
                    reason: "duplicate sample id".into(),
                });
            }
            // re-anchor on the shared allocation
            let id = s.id().to_string();
            shared.push(Spectrum::on_grid(id, Arc::clone(&grid), s.into_intensities())?);
        }
        for (s, l) in shared.iter().zip(&labels) {
            if l.task() != task {
                return Err(Error::InvalidLabel(format!(
                    "sample `{}` has a {} label in a {task} dataset",
                    s.id(),
                    l.task()
                )));
            }
        }
        Ok(Self {
            material: material.into(),
            task,
            grid,
            spectra: shared,
            labels,
        })
    }

    pub fn material(&self) -> &str {
        &self.material
    }

    pub fn task(&self) -> TaskType {
        self.task
    }

    pub fn wavelengths(&self) -> &[T] {
        &self.grid
    }

    pub fn grid(&self) -> &Arc<[T]> {
        &self.grid
    }

    pub fn spectra(&self) -> &[Spectrum<T>] {
        &self.spectra
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.spectra.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spectra.is_empty()
    }

    pub fn ids(&self) -> Vec<String> {
        self.spectra.iter().map(|s| s.id().to_string()).collect()
    }

    /// Sorted distinct class names (classification datasets only).
    pub fn classes(&self) -> Vec<String> {
        let set: BTreeSet<&str> = self.labels.iter().filter_map(Label::as_class).collect();
        set.into_iter().map(str::to_string).collect()
    }

    pub fn class_counts(&self) -> BTreeMap<String, usize> {
        let mut m = BTreeMap::new();
        for c in self.labels.iter().filter_map(Label::as_class) {
            *m.entry(c.to_string()).or_insert(0) += 1;
        }
        m
    }

    /// Replaces all spectra, keeping labels. Used by batch transforms.
    pub fn with_spectra(&self, spectra: Vec<Spectrum<T>>) -> Result<Self> {
        Self::on_grid(
            self.material.clone(),
            self.task,
            Arc::clone(&self.grid),
            spectra,
            self.labels.clone(),
        )
    }

    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let spectra = indices.iter().map(|&i| self.spectra[i].clone()).collect();
        let labels = indices.iter().map(|&i| self.labels[i].clone()).collect();
        Self::on_grid(
            self.material.clone(),
            self.task,
            Arc::clone(&self.grid),
            spectra,
            labels,
        )
    }

    /// Intensity rows as a matrix, one row per sample.
    pub fn intensity_rows(&self) -> Vec<Vec<T>> {
        self.spectra.iter().map(|s| s.intensities().to_vec()).collect()
    }
}

/// Per-sample feature vectors handed to reasoning and the baselines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct FeatureMatrix<T: Real = f64> {
    ids: Vec<String>,
    feature_names: Vec<String>,
    rows: Vec<Vec<T>>,
}

impl<T: Real> FeatureMatrix<T> {
    pub fn new(ids: Vec<String>, feature_names: Vec<String>, rows: Vec<Vec<T>>) -> Result<Self> {
        let dim = feature_names.len();
        if dim == 0 {
            return Err(Error::InvalidParameter(
                "feature matrix needs at least one feature".into(),
            ));
        }
        if ids.len() != rows.len() {
            return Err(Error::LengthMismatch(format!(
                "{} ids for {} feature rows",
                ids.len(),
                rows.len()
            )));
        }
        for (id, r) in ids.iter().zip(&rows) {
            if r.len() != dim {
                return Err(Error::DimMismatch {
                    expected: dim,
                    actual: r.len(),
                });
            }
            if !all_finite(r) {
                return Err(Error::InvalidSpectrum {
                    id: id.clone(),
                    reason: "non-finite feature value".into(),
                });
            }
        }
        Ok(Self {
            ids,
            feature_names,
            rows,
        })
    }

    pub fn dim(&self) -> usize {
        self.feature_names.len()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn rows(&self) -> &[Vec<T>] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.rows[i]
    }

    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            ids: indices.iter().map(|&i| self.ids[i].clone()).collect(),
            feature_names: self.feature_names.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }

    /// Canonical little-endian byte image, used for content hashing.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for name in &self.feature_names {
            out.extend_from_slice(name.as_bytes());
            out.push(0);
        }
        for (id, row) in self.ids.iter().zip(&self.rows) {
            out.extend_from_slice(id.as_bytes());
            out.push(0);
            for v in row {
                out.extend_from_slice(&v.as_f64().to_le_bytes());
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Vec<f64> {
        vec![1.0, 2.0, 3.0, 4.0, 5.0]
    }

    #[test]
    fn task_parsing_folds_case_and_separators() {
        assert_eq!(
            "Anomaly Detection".parse::<TaskType>().unwrap(),
            TaskType::AnomalyDetection
        );
        assert_eq!(
            "anomaly-detection".parse::<TaskType>().unwrap(),
            TaskType::AnomalyDetection
        );
        assert!("clustering".parse::<TaskType>().is_err());
    }

    #[test]
    fn label_kind_must_match_task() {
        let s = Spectrum::new("a", grid(), vec![0.0; 5]).unwrap();
        let err = SpectralDataset::new("m", TaskType::Regression, vec![s], vec![Label::Flag(true)]);
        assert!(matches!(err, Err(Error::InvalidLabel(_))));
    }

    #[test]
    fn grids_must_match() {
        let a = Spectrum::new("a", grid(), vec![0.0; 5]).unwrap();
        let b = Spectrum::new("b", vec![1.0, 2.0, 3.0, 4.0, 6.0], vec![0.0; 5]).unwrap();
        let r = SpectralDataset::new(
            "m",
            TaskType::Classification,
            vec![a, b],
            vec![Label::Class("x".into()), Label::Class("y".into())],
        );
        assert!(r.is_err());
    }

    #[test]
    fn label_record_requires_exactly_one_kind() {
        let r: std::result::Result<Label, _> = serde_json::from_str(r#"{"class":"a","flag":true}"#);
        assert!(r.is_err());
        let l: Label = serde_json::from_str(r#"{"value":3.5,"unit":"mg/L"}"#).unwrap();
        assert_eq!(
            l,
            Label::Value {
                value: 3.5,
                unit: "mg/L".into()
            }
        );
    }

    #[test]
    fn feature_matrix_rejects_ragged_rows() {
        let r = FeatureMatrix::new(
            vec!["a".into(), "b".into()],
            vec!["f1".into(), "f2".into()],
            vec![vec![1.0, 2.0], vec![1.0]],
        );
        assert!(matches!(r, Err(Error::DimMismatch { .. })));
    }
}
