//! Subject-disjoint dataset splits and frame sampling.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::IoError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceRecord {
    pub id: String,
    pub subjects: Vec<String>,
    pub frame_count: usize,
    pub frame_rate: f64,
}

impl SequenceRecord {
    pub fn validate(&self) -> Result<(), IoError> {
        if self.subjects.is_empty() {
            return Err(IoError::Split(format!("sequence {} has no subjects", self.id)));
        }
        if !(self.frame_rate.is_finite() && self.frame_rate > 0.0) {
            return Err(IoError::Split(format!(
                "sequence {} has frame rate {}",
                self.id, self.frame_rate
            )));
        }
        Ok(())
    }
}

/// Sequence counts of the reference real-data split (train, val, test).
pub const REFERENCE_SPLIT_TARGETS: SplitTargets = SplitTargets {
    train: 73,
    val: 11,
    test: 38,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitTargets {
    pub train: usize,
    pub val: usize,
    pub test: usize,
}

impl SplitTargets {
    pub fn new(train: usize, val: usize, test: usize) -> Self {
        Self { train, val, test }
    }

    fn as_array(&self) -> [usize; 3] {
        [self.train, self.val, self.test]
    }

    pub fn total(&self) -> usize {
        self.train + self.val + self.test
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitOptions {
    /// How far a split may exceed its target; `None` is unbounded.
    pub overshoot_tolerance: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnmetTarget {
    pub split: String,
    pub target: usize,
    pub achieved: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub targets: SplitTargets,
    pub train: Vec<String>,
    pub val: Vec<String>,
    pub test: Vec<String>,
    pub removed: Vec<String>,
    /// Sum of absolute differences between achieved and target counts.
    pub deviation: usize,
    pub unmet: Vec<UnmetTarget>,
}

impl SplitSpec {
    pub fn splits(&self) -> [&[String]; 3] {
        [&self.train, &self.val, &self.test]
    }
}

const SPLIT_NAMES: [&str; 3] = ["train", "val", "test"];

/// Groups of sequence indices connected through shared subjects, ordered by
/// their first sequence.
pub fn subject_components(sequences: &[SequenceRecord]) -> Vec<Vec<usize>> {
    let n = sequences.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut first_seen: HashMap<&str, usize> = HashMap::new();
    for (i, s) in sequences.iter().enumerate() {
        for subj in &s.subjects {
            match first_seen.get(subj.as_str()) {
                Some(&j) => {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
                None => {
                    first_seen.insert(subj, i);
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    let mut out: Vec<Vec<usize>> = groups.into_values().collect();
    out.sort_by_key(|g| g[0]);
    out
}

/// Assigns whole subject components to train/val/test, minimizing the number
/// of removed sequences and then the deviation from the targets. Exact over
/// all reachable count states.
pub fn subject_disjoint_split(
    sequences: &[SequenceRecord],
    targets: SplitTargets,
    options: &SplitOptions,
) -> Result<SplitSpec, IoError> {
    if sequences.is_empty() {
        return Err(IoError::Split("no sequences".into()));
    }
    for s in sequences {
        s.validate()?;
    }
    if targets.total() > sequences.len() {
        return Err(IoError::Split(format!(
            "targets sum to {} but only {} sequences exist",
            targets.total(),
            sequences.len()
        )));
    }
    let comps = subject_components(sequences);
    let t = targets.as_array();
    let cap: [usize; 3] = match options.overshoot_tolerance {
        Some(tol) => t.map(|x| x + tol),
        None => [sequences.len(); 3],
    };

    // layers[k]: state after the first k components -> choice that reached it
    type State = [usize; 3];
    let mut layers: Vec<HashMap<State, u8>> = Vec::with_capacity(comps.len() + 1);
    let mut frontier: Vec<State> = vec![[0, 0, 0]];
    layers.push(HashMap::from([([0, 0, 0], u8::MAX)]));
    for comp in &comps {
        let size = comp.len();
        let mut next: HashMap<State, u8> = HashMap::new();
        let mut order = Vec::new();
        for s in &frontier {
            for choice in 0..4u8 {
                let mut ns = *s;
                if choice < 3 {
                    let k = choice as usize;
                    ns[k] += size;
                    if ns[k] > cap[k] {
                        continue;
                    }
                }
                if let std::collections::hash_map::Entry::Vacant(e) = next.entry(ns) {
                    e.insert(choice);
                    order.push(ns);
                }
            }
        }
        frontier = order;
        layers.push(next);
    }
    let total = sequences.len();
    let deviation = |s: &State| -> usize { (0..3).map(|k| s[k].abs_diff(t[k])).sum() };
    let best = *frontier
        .iter()
        .min_by_key(|s| (total - s.iter().sum::<usize>(), deviation(s), std::cmp::Reverse(**s)))
        .expect("the all-removed state is always reachable");

    // walk back through the layers
    let mut assignment = vec![3u8; comps.len()];
    let mut state = best;
    for k in (0..comps.len()).rev() {
        let choice = layers[k + 1][&state];
        assignment[k] = choice;
        if choice < 3 {
            state[choice as usize] -= comps[k].len();
        }
    }

    let mut buckets: [Vec<usize>; 4] = Default::default();
    for (comp, &choice) in comps.iter().zip(&assignment) {
        buckets[choice as usize].extend(comp.iter().copied());
    }
    let names = |idx: &mut Vec<usize>| -> Vec<String> {
        idx.sort_unstable();
        idx.iter().map(|&i| sequences[i].id.clone()).collect()
    };
    let [mut tr, mut va, mut te, mut rm] = buckets;
    let unmet = (0..3)
        .filter(|&k| best[k] != t[k])
        .map(|k| UnmetTarget {
            split: SPLIT_NAMES[k].into(),
            target: t[k],
            achieved: best[k],
        })
        .collect::<Vec<_>>();
    for u in &unmet {
        log::warn!("split {}: target {} not met, got {}", u.split, u.target, u.achieved);
    }
    let spec = SplitSpec {
        targets,
        train: names(&mut tr),
        val: names(&mut va),
        test: names(&mut te),
        removed: names(&mut rm),
        deviation: deviation(&best),
        unmet,
    };
    debug_assert!(check_subject_disjoint(sequences, &spec).is_ok());
    Ok(spec)
}

/// Fails if any subject appears in two splits.
pub fn check_subject_disjoint(sequences: &[SequenceRecord], spec: &SplitSpec) -> Result<(), IoError> {
    let by_id: HashMap<&str, &SequenceRecord> = sequences.iter().map(|s| (s.id.as_str(), s)).collect();
    let mut owner: HashMap<&str, usize> = HashMap::new();
    for (k, split) in spec.splits().iter().enumerate() {
        for id in split.iter() {
            let seq = by_id
                .get(id.as_str())
                .ok_or_else(|| IoError::Split(format!("unknown sequence {id}")))?;
            for subj in &seq.subjects {
                if let Some(&prev) = owner.get(subj.as_str()) {
                    if prev != k {
                        return Err(IoError::Split(format!(
                            "subject {subj} appears in {} and {}",
                            SPLIT_NAMES[prev], SPLIT_NAMES[k]
                        )));
                    }
                }
                owner.insert(subj, k);
            }
        }
    }
    Ok(())
}

/// Frame indices `0, s, 2s, ...` with stride `s = floor(fps / rate)`.
pub fn sample_frames(seq: &SequenceRecord, rate: f64) -> Result<Vec<usize>, IoError> {
    seq.validate()?;
    if !(rate.is_finite() && rate > 0.0) {
        return Err(IoError::Sampling(format!("rate {rate} must be positive")));
    }
    if rate > seq.frame_rate {
        return Err(IoError::Sampling(format!(
            "rate {rate} Hz exceeds the sequence frame rate {} Hz",
            seq.frame_rate
        )));
    }
    let stride = ((seq.frame_rate / rate).floor() as usize).max(1);
    Ok((0..seq.frame_count).step_by(stride).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(id: &str, subjects: &[&str]) -> SequenceRecord {
        SequenceRecord {
            id: id.into(),
            subjects: subjects.iter().map(|s| s.to_string()).collect(),
            frame_count: 90,
            frame_rate: 30.0,
        }
    }

    #[test]
    fn disjoint_singletons_split_exactly() {
        let seqs = vec![seq("a", &["1"]), seq("b", &["2"]), seq("c", &["3"]), seq("d", &["4"])];
        let s = subject_disjoint_split(&seqs, SplitTargets::new(2, 1, 1), &SplitOptions::default()).unwrap();
        assert_eq!((s.train.len(), s.val.len(), s.test.len()), (2, 1, 1));
        assert!(s.removed.is_empty() && s.unmet.is_empty() && s.deviation == 0);
        check_subject_disjoint(&seqs, &s).unwrap();
    }

    #[test]
    fn shared_subject_collapses_to_one_split() {
        let seqs: Vec<_> = (0..5).map(|i| seq(&format!("s{i}"), &["p", &format!("q{i}")])).collect();
        let s = subject_disjoint_split(&seqs, SplitTargets::new(3, 1, 1), &SplitOptions::default()).unwrap();
        let non_empty = s.splits().iter().filter(|x| !x.is_empty()).count();
        assert_eq!(non_empty, 1);
        assert_eq!(s.unmet.len(), 3);
        check_subject_disjoint(&seqs, &s).unwrap();
    }

    #[test]
    fn zero_overshoot_removes_sequences() {
        // components of sizes 3, 2, 1, 1 and targets summing to 5
        let seqs = vec![
            seq("a", &["1"]),
            seq("b", &["1"]),
            seq("c", &["1"]),
            seq("d", &["2"]),
            seq("e", &["2"]),
            seq("f", &["3"]),
            seq("g", &["4"]),
        ];
        let opts = SplitOptions { overshoot_tolerance: Some(0) };
        let s = subject_disjoint_split(&seqs, SplitTargets::new(3, 1, 1), &opts).unwrap();
        assert_eq!(s.train, vec!["a", "b", "c"]);
        assert_eq!(s.removed, vec!["d", "e"]);
        assert_eq!(s.deviation, 0);
    }

    #[test]
    fn too_large_targets_fail() {
        let seqs = vec![seq("a", &["1"])];
        assert!(subject_disjoint_split(&seqs, SplitTargets::new(1, 1, 0), &SplitOptions::default()).is_err());
        assert!(subject_disjoint_split(&[], SplitTargets::new(0, 0, 0), &SplitOptions::default()).is_err());
    }

    #[test]
    fn frame_sampling() {
        let s = seq("a", &["1"]);
        assert_eq!(sample_frames(&s, 1.0).unwrap(), vec![0, 30, 60]);
        assert_eq!(sample_frames(&s, 30.0).unwrap(), (0..90).collect::<Vec<_>>());
        assert!(sample_frames(&s, 31.0).is_err());
        let s24 = SequenceRecord {
            frame_count: 100,
            frame_rate: 24.0,
            ..s
        };
        assert_eq!(sample_frames(&s24, 1.0).unwrap(), vec![0, 24, 48, 72, 96]);
    }
}
