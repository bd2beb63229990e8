//! Turn-based method selection: show the retrieved plans, let the user
//! pick, edit parameters or type a chain by hand, preview the result on a
//! few spectra and accept.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use irspec_core::features::FeatureSpec;
use irspec_core::model::SpectralDataset;
use irspec_core::plan::MANUAL;
use irspec_core::preprocess::{apply_chain, parse_chain, QualityReport};
use irspec_core::MethodPlan;
use thiserror::Error;

/// Spectra run through the chain for the preview.
pub const PREVIEW_SAMPLES: usize = 5;

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("session aborted by user")]
    AbortedByUser,
    #[error("terminal i/o: {0}")]
    Io(#[from] std::io::Error),
}

pub struct Session<'a, R, W> {
    input: R,
    out: W,
    candidates: &'a [MethodPlan],
    citations: &'a BTreeMap<String, String>,
    preview: &'a SpectralDataset,
}

enum Edit {
    Applied(String),
    Rejected(String),
}

/// One-line description of a plan: kind, key parameters and sources.
pub fn rationale(plan: &MethodPlan, citations: &BTreeMap<String, String>) -> String {
    let steps: Vec<String> = plan.steps.iter().map(|s| s.to_string()).collect();
    let chain = if steps.is_empty() {
        "no preprocessing".into()
    } else {
        steps.join(" → ")
    };
    let sources: Vec<String> = plan
        .provenance
        .iter()
        .map(|id| match citations.get(id) {
            Some(c) => format!("{id}: {c}"),
            None => id.clone(),
        })
        .collect();
    format!("{chain} ⇒ {} [{}]", plan.feature, sources.join("; "))
}

fn format_quality(q: &QualityReport) -> String {
    let mut s = format!(
        "preview: finite={} baseline_flatness={:.4e} noise_estimate={:.4e}",
        q.finite, q.baseline_flatness, q.noise_estimate
    );
    for w in &q.warnings {
        s.push_str(&format!("\n  warning: {w}"));
    }
    s
}

/// Applies `name=value` to the first step carrying that parameter, or to
/// the feature extractor. `3.m=7` targets step 3, `feature.n_top=2` the
/// extractor.
fn apply_edit(plan: &mut MethodPlan, text: &str) -> Edit {
    let Some((lhs, value)) = text.split_once('=') else {
        return Edit::Rejected(format!("`{text}` is not a parameter edit"));
    };
    let (target, name) = match lhs.trim().split_once('.') {
        Some((t, n)) => (Some(t.trim()), n.trim()),
        None => (None, lhs.trim()),
    };
    let value = value.trim();
    let result = match target {
        Some("feature") => plan.feature.set_param(name, value).map(|_| plan.feature.to_string()),
        Some(t) => match t.parse::<usize>() {
            Ok(i) if i >= 1 && i <= plan.steps.len() => plan.steps[i - 1]
                .set_param(name, value)
                .map(|_| plan.steps[i - 1].to_string()),
            _ => return Edit::Rejected(format!("no step `{t}`; steps are numbered 1..={}", plan.steps.len())),
        },
        None => match plan
            .steps
            .iter_mut()
            .find(|s| s.params().iter().any(|(k, _)| *k == name))
        {
            Some(step) => step.set_param(name, value).map(|_| step.to_string()),
            None => plan.feature.set_param(name, value).map(|_| plan.feature.to_string()),
        },
    };
    match result {
        Ok(now) => Edit::Applied(now),
        Err(e) => Edit::Rejected(e.to_string()),
    }
}

/// `SG+SNV PCA` (chain, then extractor) to a manual plan.
fn manual_plan(text: &str) -> Result<MethodPlan, String> {
    let t = text.trim();
    let (chain, feature) = t
        .rsplit_once(char::is_whitespace)
        .ok_or("expected `<chain> <extractor>`")?;
    let steps = parse_chain(chain).map_err(|e| e.to_string())?;
    let feature = FeatureSpec::from_name(feature).ok_or_else(|| format!("unknown feature extractor `{feature}`"))?;
    let plan = MethodPlan::new(steps, feature, vec![MANUAL.into()]);
    plan.validate().map_err(|e| e.to_string())?;
    Ok(plan)
}

impl<'a, R: BufRead, W: Write> Session<'a, R, W> {
    pub fn new(
        input: R,
        out: W,
        candidates: &'a [MethodPlan],
        citations: &'a BTreeMap<String, String>,
        preview: &'a SpectralDataset,
    ) -> Self {
        Self {
            input,
            out,
            candidates,
            citations,
            preview,
        }
    }

    fn ask(&mut self, prompt: &str) -> Result<String, SessionError> {
        write!(self.out, "{prompt}")?;
        self.out.flush()?;
        let mut line = String::new();
        if self.input.read_line(&mut line)? == 0 {
            writeln!(self.out)?;
            return Err(SessionError::AbortedByUser);
        }
        let line = line.trim().to_string();
        // echo so a replayed transcript reads like the live one
        writeln!(self.out, "{line}")?;
        Ok(line)
    }

    fn list(&mut self) -> Result<(), SessionError> {
        writeln!(self.out, "Candidate methods:")?;
        for (i, p) in self.candidates.iter().enumerate() {
            writeln!(self.out, "  {}) {}", i + 1, p.summary())?;
            writeln!(self.out, "     {}", rationale(p, self.citations))?;
        }
        writeln!(self.out, "  0) none of these: enter a chain by hand")?;
        Ok(())
    }

    fn show_preview(&mut self, plan: &MethodPlan) -> Result<(), SessionError> {
        let n = self.preview.len().min(PREVIEW_SAMPLES);
        let idx: Vec<usize> = (0..n).collect();
        let text = match self.preview.subset(&idx) {
            Ok(sub) if n > 0 => match apply_chain(&sub, &plan.steps) {
                Ok((_, q)) => format_quality(&q),
                Err(e) => format!("preview failed: {e}"),
            },
            Ok(_) => "preview skipped: no spectra".into(),
            Err(e) => format!("preview failed: {e}"),
        };
        writeln!(self.out, "{text}")?;
        Ok(())
    }

    fn choose(&mut self) -> Result<MethodPlan, SessionError> {
        loop {
            self.list()?;
            let a = self.ask("select> ")?;
            match a.to_ascii_lowercase().as_str() {
                "quit" | "q" | "exit" => return Err(SessionError::AbortedByUser),
                "0" | "reject" | "none" => loop {
                    let t = self.ask("chain and extractor, e.g. `SG+SNV PCA`> ")?;
                    if t.eq_ignore_ascii_case("quit") {
                        return Err(SessionError::AbortedByUser);
                    }
                    match manual_plan(&t) {
                        Ok(p) => return Ok(p),
                        Err(e) => writeln!(self.out, "{e}")?,
                    }
                },
                s => match s.parse::<usize>() {
                    Ok(i) if i >= 1 && i <= self.candidates.len() => return Ok(self.candidates[i - 1].clone()),
                    _ => writeln!(self.out, "enter a number between 0 and {}", self.candidates.len())?,
                },
            }
        }
    }

    /// Runs the dialogue until a plan is accepted.
    pub fn run(mut self) -> Result<MethodPlan, SessionError> {
        let mut plan = self.choose()?;
        loop {
            writeln!(self.out, "selected: {}", rationale(&plan, self.citations))?;
            self.show_preview(&plan)?;
            loop {
                let a = self.ask("accept, edit (name=value), back or quit> ")?;
                match a.to_ascii_lowercase().as_str() {
                    "accept" | "a" | "yes" | "y" => return Ok(plan),
                    "quit" | "q" | "exit" => return Err(SessionError::AbortedByUser),
                    "back" | "b" => {
                        plan = self.choose()?;
                        break;
                    }
                    _ => match apply_edit(&mut plan, &a) {
                        Edit::Applied(now) => {
                            writeln!(self.out, "updated: {now}")?;
                            break;
                        }
                        Edit::Rejected(why) => writeln!(self.out, "{why}")?,
                    },
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plan() -> MethodPlan {
        MethodPlan::from_names("SG+SNV", "PCA", vec!["kb-ink-001".into()]).unwrap()
    }

    #[test]
    fn edits_reach_the_right_place() {
        let mut p = plan();
        assert!(matches!(apply_edit(&mut p, "m=7"), Edit::Applied(_)));
        assert_eq!(p.steps[0].params()[0], ("m", "7".to_string()));
        assert!(matches!(apply_edit(&mut p, "n_components=3"), Edit::Applied(_)));
        assert_eq!(p.feature, FeatureSpec::PCA { n_components: 3 });
        assert!(matches!(apply_edit(&mut p, "2.m=3"), Edit::Rejected(_)));
        assert!(matches!(apply_edit(&mut p, "m=abc"), Edit::Rejected(_)));
        assert!(matches!(apply_edit(&mut p, "hello"), Edit::Rejected(_)));
    }

    #[test]
    fn manual_entry() {
        let p = manual_plan("BC+SNV PLS").unwrap();
        assert!(p.is_manual());
        assert_eq!(p.summary(), "BC+SNV → PLS");
        assert!(manual_plan("PCA").is_err());
    }
}
