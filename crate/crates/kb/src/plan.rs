use std::collections::{BTreeSet, HashMap};

use irspec_core::preprocess::PreprocessStep;
use irspec_core::MethodPlan;

use crate::error::{KbError, Result};
use crate::index::RetrievalHit;
use crate::record::KbRecord;

/// The plan a single record recommends, or `None` if any step is unknown.
pub fn resolve_record(r: &KbRecord) -> Option<MethodPlan> {
    let steps: Option<Vec<PreprocessStep>> = r
        .best_preprocessing
        .iter()
        .map(|s| PreprocessStep::from_abbrev(s))
        .collect();
    let plan = MethodPlan::new(steps?, r.best_feature.clone(), vec![r.id.clone()]);
    plan.validate().ok()?;
    Some(plan)
}

/// Distinct (chain, feature) pairs from the hit records, best rank first.
/// Records recommending the same pair are merged into one candidate whose
/// provenance lists every contributing id in rank order.
pub fn plan_from_records(hits: &[RetrievalHit], records: &[KbRecord]) -> Result<Vec<MethodPlan>> {
    if hits.is_empty() {
        return Err(KbError::NoResolvablePlan("no hits".into()));
    }
    let by_id: HashMap<&str, &KbRecord> = records.iter().map(|r| (r.id.as_str(), r)).collect();
    let mut ordered: Vec<&RetrievalHit> = hits.iter().collect();
    ordered.sort_by_key(|h| h.rank);
    let mut plans: Vec<MethodPlan> = Vec::new();
    let mut unresolved = Vec::new();
    for h in ordered {
        let Some(plan) = by_id.get(h.id.as_str()).and_then(|r| resolve_record(r)) else {
            unresolved.push(h.id.clone());
            continue;
        };
        match plans
            .iter_mut()
            .find(|p| p.steps == plan.steps && p.feature == plan.feature)
        {
            Some(p) => {
                if !p.provenance.contains(&h.id) {
                    p.provenance.push(h.id.clone());
                }
            }
            None => plans.push(plan),
        }
    }
    if plans.is_empty() {
        let ids: BTreeSet<String> = unresolved.into_iter().collect();
        return Err(KbError::NoResolvablePlan(format!(
            "records {} name unknown steps or are missing",
            ids.into_iter().collect::<Vec<_>>().join(", ")
        )));
    }
    Ok(plans)
}
