//! The ordered preprocessing chain plus feature extractor chosen for a run.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureSpec;
use crate::preprocess::{chain_abbrev, parse_chain, PreprocessStep};

/// Provenance marker for plans not derived from knowledge-base records.
pub const MANUAL: &str = "manual";

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodPlan {
    pub steps: Vec<PreprocessStep>,
    pub feature: FeatureSpec,
    /// Knowledge-base record ids, or `["manual"]`.
    pub provenance: Vec<String>,
    /// Set when an empty `steps` list is intentional.
    #[serde(default, skip_serializing_if = "is_false")]
    pub empty_chain: bool,
}

impl MethodPlan {
    pub fn new(steps: Vec<PreprocessStep>, feature: FeatureSpec, provenance: Vec<String>) -> Self {
        let empty_chain = steps.is_empty();
        Self {
            steps,
            feature,
            provenance,
            empty_chain,
        }
    }

    pub fn manual(steps: Vec<PreprocessStep>, feature: FeatureSpec) -> Self {
        Self::new(steps, feature, vec![MANUAL.into()])
    }

    /// Builds from short names, e.g. `("SG+SNV", "PCA")`.
    pub fn from_names(chain: &str, feature: &str, provenance: Vec<String>) -> Result<Self> {
        let steps = parse_chain(chain)?;
        let feature = FeatureSpec::from_name(feature)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown feature extractor `{feature}`")))?;
        Ok(Self::new(steps, feature, provenance))
    }

    pub fn is_manual(&self) -> bool {
        self.provenance.iter().any(|p| p == MANUAL)
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps.is_empty() && !self.empty_chain {
            return Err(Error::InvalidParameter(
                "plan has no steps and no empty-chain marker".into(),
            ));
        }
        if !self.steps.is_empty() && self.empty_chain {
            return Err(Error::InvalidParameter(
                "plan marked as empty chain but has steps".into(),
            ));
        }
        for (i, s) in self.steps.iter().enumerate() {
            s.validate().map_err(|e| Error::StepFailed {
                index: i,
                kind: s.kind_name().into(),
                source: Box::new(e),
            })?;
        }
        self.feature.validate()
    }

    /// `SG+SNV → PCA` style one-liner.
    pub fn summary(&self) -> String {
        format!("{} → {}", chain_abbrev(&self.steps), self.feature.kind_name())
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let p: Self = serde_json::from_str(text).map_err(|e| Error::Parse(format!("method plan: {e}")))?;
        p.validate()?;
        Ok(p)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        let mut text = self.to_json()?;
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))
    }
}
