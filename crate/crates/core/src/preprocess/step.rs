use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_ASLS_LAMBDA: f64 = 1e5;
pub const DEFAULT_ASLS_P: f64 = 0.01;
pub const DEFAULT_ASLS_ITERS: usize = 10;
pub const DEFAULT_SG_HALF_WINDOW: usize = 5;
pub const DEFAULT_SG_DEGREE: usize = 2;

fn default_lambda() -> f64 {
    DEFAULT_ASLS_LAMBDA
}
fn default_p() -> f64 {
    DEFAULT_ASLS_P
}
fn default_iters() -> usize {
    DEFAULT_ASLS_ITERS
}
fn default_m() -> usize {
    DEFAULT_SG_HALF_WINDOW
}
fn default_degree() -> usize {
    DEFAULT_SG_DEGREE
}
fn default_detrend_order() -> u8 {
    1
}
fn is_zero(v: &u8) -> bool {
    *v == 0
}

/// One preprocessing routine with its parameters.
///
/// Serialised with an inline `kind` tag, e.g.
/// `{"kind":"SavitzkyGolay","m":5,"degree":2}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum PreprocessStep {
    /// Asymmetric least squares baseline removal.
    AsLS {
        #[serde(default = "default_lambda")]
        lambda: f64,
        #[serde(default = "default_p")]
        p: f64,
        #[serde(default = "default_iters")]
        iters: usize,
    },
    SavitzkyGolay {
        #[serde(default = "default_m")]
        m: usize,
        #[serde(default = "default_degree")]
        degree: usize,
        #[serde(default, skip_serializing_if = "is_zero")]
        deriv_order: u8,
    },
    MinMax,
    SNV,
    /// Multiplicative scatter correction against the batch mean, or an
    /// explicit reference spectrum on the same grid.
    MSC {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        reference: Option<Vec<f64>>,
    },
    Detrend {
        #[serde(default = "default_detrend_order")]
        order: u8,
    },
    FirstDerivative,
    SecondDerivative,
}

impl PreprocessStep {
    pub fn asls_default() -> Self {
        PreprocessStep::AsLS {
            lambda: DEFAULT_ASLS_LAMBDA,
            p: DEFAULT_ASLS_P,
            iters: DEFAULT_ASLS_ITERS,
        }
    }

    pub fn sg_default(deriv_order: u8) -> Self {
        PreprocessStep::SavitzkyGolay {
            m: DEFAULT_SG_HALF_WINDOW,
            degree: DEFAULT_SG_DEGREE,
            deriv_order,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            PreprocessStep::AsLS { .. } => "AsLS",
            PreprocessStep::SavitzkyGolay { .. } => "SavitzkyGolay",
            PreprocessStep::MinMax => "MinMax",
            PreprocessStep::SNV => "SNV",
            PreprocessStep::MSC { .. } => "MSC",
            PreprocessStep::Detrend { .. } => "Detrend",
            PreprocessStep::FirstDerivative => "FirstDerivative",
            PreprocessStep::SecondDerivative => "SecondDerivative",
        }
    }

    /// Steps that need the whole batch rather than one spectrum.
    pub fn is_batch_only(&self) -> bool {
        matches!(self, PreprocessStep::MSC { reference: None })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        match *self {
            PreprocessStep::AsLS { lambda, p, iters } => {
                if !(lambda > 0.0) || !lambda.is_finite() {
                    return bad(format!("AsLS lambda must be > 0, got {lambda}"));
                }
                if !(p > 0.0 && p < 1.0) {
                    return bad(format!("AsLS p must lie in (0, 1), got {p}"));
                }
                if iters < 1 {
                    return bad("AsLS iters must be ≥ 1".into());
                }
            }
            PreprocessStep::SavitzkyGolay { m, degree, deriv_order } => {
                if degree < 1 {
                    return bad("Savitzky-Golay degree must be ≥ 1".into());
                }
                if 2 * m + 1 < degree + 2 {
                    return bad(format!(
                        "Savitzky-Golay window 2m+1 = {} must be ≥ degree + 2 = {}",
                        2 * m + 1,
                        degree + 2
                    ));
                }
                if deriv_order > 2 || deriv_order as usize > degree {
                    return bad(format!(
                        "Savitzky-Golay deriv_order {deriv_order} must be ≤ min(2, degree)"
                    ));
                }
            }
            PreprocessStep::Detrend { order } => {
                if !(order == 1 || order == 2) {
                    return bad(format!("detrend order must be 1 or 2, got {order}"));
                }
            }
            PreprocessStep::MSC { reference: Some(ref r) } if r.iter().any(|v| !v.is_finite()) => {
                return bad("MSC reference contains non-finite values".into());
            }
            _ => {}
        }
        Ok(())
    }

    /// Resolves a literature abbreviation (`SG`, `SNV`, `FD`, `SGFD`, `BC`, ...)
    /// or a canonical kind name to a step with default parameters.
    pub fn from_abbrev(token: &str) -> Option<Self> {
        let t: String = token
            .trim()
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_uppercase();
        Some(match t.as_str() {
            "SG" | "SAVITZKYGOLAY" | "SMOOTHING" => Self::sg_default(0),
            "SGFD" | "SGD1" | "SG1D" => Self::sg_default(1),
            "SGSD" | "SGD2" | "SG2D" => Self::sg_default(2),
            "SNV" => PreprocessStep::SNV,
            "MSC" => PreprocessStep::MSC { reference: None },
            "FD" | "D1" | "1D" | "FIRSTDERIVATIVE" => PreprocessStep::FirstDerivative,
            "SD" | "D2" | "2D" | "SECONDDERIVATIVE" => PreprocessStep::SecondDerivative,
            "BC" | "ASLS" | "ALS" | "BASELINE" => Self::asls_default(),
            "MINMAX" | "MM" | "NORM" | "NORMALIZATION" => PreprocessStep::MinMax,
            "DT" | "DETREND" => PreprocessStep::Detrend { order: 1 },
            "DT2" | "DETREND2" => PreprocessStep::Detrend { order: 2 },
            _ => return None,
        })
    }

    /// Short label, inverse of [`PreprocessStep::from_abbrev`] for default steps.
    pub fn abbrev(&self) -> &'static str {
        match self {
            PreprocessStep::AsLS { .. } => "BC",
            PreprocessStep::SavitzkyGolay { deriv_order: 0, .. } => "SG",
            PreprocessStep::SavitzkyGolay { deriv_order: 1, .. } => "SGFD",
            PreprocessStep::SavitzkyGolay { .. } => "SGSD",
            PreprocessStep::MinMax => "MinMax",
            PreprocessStep::SNV => "SNV",
            PreprocessStep::MSC { .. } => "MSC",
            PreprocessStep::Detrend { .. } => "DT",
            PreprocessStep::FirstDerivative => "FD",
            PreprocessStep::SecondDerivative => "SD",
        }
    }

    /// Key hyperparameters as `name=value` pairs, in a stable order.
    pub fn params(&self) -> Vec<(&'static str, String)> {
        match self {
            PreprocessStep::AsLS { lambda, p, iters } => vec![
                ("lambda", lambda.to_string()),
                ("p", p.to_string()),
                ("iters", iters.to_string()),
            ],
            PreprocessStep::SavitzkyGolay { m, degree, deriv_order } => vec![
                ("m", m.to_string()),
                ("degree", degree.to_string()),
                ("deriv_order", deriv_order.to_string()),
            ],
            PreprocessStep::Detrend { order } => vec![("order", order.to_string())],
            _ => Vec::new(),
        }
    }

    /// Sets one named parameter from text, validating the result.
    pub fn set_param(&mut self, name: &str, value: &str) -> Result<()> {
        fn num<V: std::str::FromStr>(name: &str, v: &str) -> Result<V> {
            v.trim()
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("`{v}` is not a valid value for {name}")))
        }
        let mut next = self.clone();
        match (&mut next, name) {
            (PreprocessStep::AsLS { lambda, .. }, "lambda") => *lambda = num(name, value)?,
            (PreprocessStep::AsLS { p, .. }, "p") => *p = num(name, value)?,
            (PreprocessStep::AsLS { iters, .. }, "iters") => *iters = num(name, value)?,
            (PreprocessStep::SavitzkyGolay { m, .. }, "m") => *m = num(name, value)?,
            (PreprocessStep::SavitzkyGolay { degree, .. }, "degree") => *degree = num(name, value)?,
            (PreprocessStep::SavitzkyGolay { deriv_order, .. }, "deriv_order") => *deriv_order = num(name, value)?,
            (PreprocessStep::Detrend { order }, "order") => *order = num(name, value)?,
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "{} has no parameter `{name}`",
                    self.kind_name()
                )))
            }
        }
        next.validate()?;
        *self = next;
        Ok(())
    }
}

impl fmt::Display for PreprocessStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let params = self.params();
        if params.is_empty() {
            f.write_str(self.kind_name())
        } else {
            let p: Vec<String> = params.iter().map(|(k, v)| format!("{k}={v}")).collect();
            write!(f, "{}({})", self.kind_name(), p.join(", "))
        }
    }
}

/// Parses `SG+SNV` style chains. An empty string or `none` is the empty chain.
pub fn parse_chain(text: &str) -> Result<Vec<PreprocessStep>> {
    let t = text.trim();
    if t.is_empty() || t.eq_ignore_ascii_case("none") {
        return Ok(Vec::new());
    }
    t.split(['+', ',', '>'])
        .map(|tok| {
            PreprocessStep::from_abbrev(tok)
                .ok_or_else(|| Error::InvalidParameter(format!("unknown preprocessing step `{}`", tok.trim())))
        })
        .collect()
}

/// Renders a chain back in `SG+SNV` form.
pub fn chain_abbrev(steps: &[PreprocessStep]) -> String {
    if steps.is_empty() {
        return "none".into();
    }
    steps.iter().map(PreprocessStep::abbrev).collect::<Vec<_>>().join("+")
}
