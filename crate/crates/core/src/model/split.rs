use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dataset::{Label, SpectralDataset, TaskType};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Minimum dataset size accepted by the splitter.
pub const MIN_SPLIT_SAMPLES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitRatio {
    pub train: u32,
    pub validation: u32,
    pub test: u32,
}

impl Default for SplitRatio {
    /// 4:2:2 train/validation/test.
    fn default() -> Self {
        Self {
            train: 4,
            validation: 2,
            test: 2,
        }
    }
}

impl SplitRatio {
    fn parts(&self) -> [u64; 3] {
        [self.train as u64, self.validation as u64, self.test as u64]
    }
}

/// Disjoint train/validation/test index lists covering every sample.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
}

impl Split {
    pub fn len(&self) -> usize {
        self.train.len() + self.validation.len() + self.test.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Checks disjointness and that indices `0..n` are all covered.
    pub fn validate(&self, n: usize) -> Result<()> {
        let mut seen = vec![false; n];
        for &i in self.train.iter().chain(&self.validation).chain(&self.test) {
            if i >= n {
                return Err(Error::InvalidParameter(format!("split index {i} out of range {n}")));
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidParameter(format!("split index {i} appears twice")));
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidParameter(format!("split does not cover index {i}")));
        }
        Ok(())
    }
}

/// Largest-remainder apportionment of `n` items over `parts`.
/// Ties on the fractional part go to the earlier part.
fn apportion(n: usize, parts: [u64; 3]) -> [usize; 3] {
    let total: u64 = parts.iter().sum();
    let mut counts = [0usize; 3];
    let mut rems = [(0u64, 0usize); 3];
    for p in 0..3 {
        let num = n as u64 * parts[p];
        counts[p] = (num / total) as usize;
        rems[p] = (num % total, p);
    }
    let mut left = n - counts.iter().sum::<usize>();
    rems.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    for &(_, p) in rems.iter() {
        if left == 0 {
            break;
        }
        counts[p] += 1;
        left -= 1;
    }
    counts
}

/// Stratum key per sample: class for classification, flag for anomaly
/// detection, a single stratum for regression.
fn strata(labels: &[Label], task: TaskType) -> BTreeMap<String, Vec<usize>> {
    let mut m: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, l) in labels.iter().enumerate() {
        let key = match (task, l) {
            (TaskType::Classification, Label::Class(c)) => c.clone(),
            (TaskType::AnomalyDetection, Label::Flag(f)) => f.to_string(),
            _ => String::new(),
        };
        m.entry(key).or_default().push(i);
    }
    m
}

/// Splits sample indices by `ratio`, stratified when the task has discrete
/// labels. Deterministic for a fixed seed.
pub fn split_indices(labels: &[Label], task: TaskType, ratio: SplitRatio, seed: u64) -> Result<Split> {
    let n = labels.len();
    if n < MIN_SPLIT_SAMPLES {
        return Err(Error::TooFewSamples(format!(
            "{n} samples, at least {MIN_SPLIT_SAMPLES} required for splitting"
        )));
    }
    let parts = ratio.parts();
    if parts.contains(&0) {
        return Err(Error::InvalidParameter("split ratio parts must be positive".into()));
    }
    let total: u64 = parts.iter().sum();
    let strata = strata(labels, task);
    if task == TaskType::Classification {
        if let Some((c, idx)) = strata.iter().find(|(_, v)| v.len() < 2) {
            return Err(Error::TooFewSamples(format!(
                "class `{c}` has {} sample(s), at least 2 required",
                idx.len()
            )));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut groups: Vec<Vec<usize>> = strata.into_values().collect();
    for g in &mut groups {
        g.shuffle(&mut rng);
    }
    // seeded stratum order decides who receives remainder units first
    let mut order: Vec<usize> = (0..groups.len()).collect();
    order.shuffle(&mut rng);

    let target = apportion(n, parts);
    let mut quota: Vec<[usize; 3]> = vec![[0; 3]; groups.len()];
    let mut need = target;
    let mut leftover = vec![0usize; groups.len()];
    let mut candidates = Vec::new();
    let mut frac = vec![[false; 3]; groups.len()];
    for (s, g) in groups.iter().enumerate() {
        let c = g.len() as u64;
        for p in 0..3 {
            let num = c * parts[p];
            quota[s][p] = (num / total) as usize;
            need[p] -= quota[s][p];
            if !num.is_multiple_of(total) {
                frac[s][p] = true;
                candidates.push((num % total, s, p));
            }
        }
        leftover[s] = g.len() - quota[s].iter().sum::<usize>();
    }
    let rank: Vec<usize> = {
        let mut r = vec![0; groups.len()];
        for (pos, &s) in order.iter().enumerate() {
            r[s] = pos;
        }
        r
    };
    // each stratum gets the floor or the ceiling of its exact share per part
    let mut bumped = vec![[false; 3]; groups.len()];
    candidates.sort_by(|a, b| b.0.cmp(&a.0).then(rank[a.1].cmp(&rank[b.1])).then(a.2.cmp(&b.2)));
    for &(_, s, p) in &candidates {
        if leftover[s] > 0 && need[p] > 0 {
            bumped[s][p] = true;
            leftover[s] -= 1;
            need[p] -= 1;
        }
    }
    // greedy can strand units; reroute along augmenting paths
    while let Some(path) = augmenting_path(&order, &leftover, &need, &frac, &bumped) {
        let (s0, _) = path[0];
        let (_, p_end) = path[path.len() - 1];
        leftover[s0] -= 1;
        need[p_end] -= 1;
        for &(s, p) in &path {
            bumped[s][p] = !bumped[s][p];
        }
    }
    // unreachable for valid margins; kept so every sample is still placed
    for &s in &order {
        for p in 0..3 {
            while leftover[s] > 0 && need[p] > 0 {
                quota[s][p] += 1;
                leftover[s] -= 1;
                need[p] -= 1;
            }
        }
    }
    for (q, b) in quota.iter_mut().zip(&bumped) {
        for p in 0..3 {
            q[p] += b[p] as usize;
        }
    }

    let mut out = [Vec::new(), Vec::new(), Vec::new()];
    for (g, q) in groups.iter().zip(&quota) {
        let mut it = g.iter().copied();
        for p in 0..3 {
            out[p].extend(it.by_ref().take(q[p]));
        }
    }
    for part in &mut out {
        part.sort_unstable();
    }
    let [train, validation, test] = out;
    Ok(Split {
        train,
        validation,
        test,
    })
}

/// Breadth-first search for an alternating path from a stratum with spare
/// units to a part still short of its target. Returns the edges to flip.
fn augmenting_path(
    order: &[usize],
    leftover: &[usize],
    need: &[usize; 3],
    frac: &[[bool; 3]],
    bumped: &[[bool; 3]],
) -> Option<Vec<(usize, usize)>> {
    use std::collections::VecDeque;
    let ns = frac.len();
    let mut prev_part: Vec<Option<(usize, usize)>> = vec![None; 3];
    let mut seen_s = vec![false; ns];
    let mut seen_p = [false; 3];
    let mut queue = VecDeque::new();
    let mut via_s: Vec<Option<usize>> = vec![None; ns];
    for &s in order {
        if leftover[s] > 0 {
            seen_s[s] = true;
            queue.push_back(s);
        }
    }
    while let Some(s) = queue.pop_front() {
        for p in 0..3 {
            if seen_p[p] || !frac[s][p] || bumped[s][p] {
                continue;
            }
            seen_p[p] = true;
            prev_part[p] = Some((s, p));
            if need[p] > 0 {
                let mut path = vec![(s, p)];
                let mut cur = s;
                while let Some(pp) = via_s[cur] {
                    let (s2, _) = prev_part[pp].expect("visited part");
                    path.push((cur, pp));
                    path.push((s2, pp));
                    cur = s2;
                }
                path.reverse();
                return Some(path);
            }
            for s2 in 0..ns {
                if !seen_s[s2] && bumped[s2][p] {
                    seen_s[s2] = true;
                    via_s[s2] = Some(p);
                    queue.push_back(s2);
                }
            }
        }
    }
    None
}

pub fn split_dataset<T: Real>(ds: &SpectralDataset<T>, ratio: SplitRatio, seed: u64) -> Result<Split> {
    split_indices(ds.labels(), ds.task(), ratio, seed)
}
