use std::collections::HashMap;

use super::scores::{ScoreRecord, ScoreSet};
use crate::error::{Error, Result};

/// Maps a set's scores affinely onto [0, 1]; a constant set maps to 0.
pub fn min_max_normalize(set: &ScoreSet) -> Result<ScoreSet> {
    let (lo, hi) = set
        .records()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
            (lo.min(r.score), hi.max(r.score))
        });
    let range = hi - lo;
    set.map_scores(|s| if range > 0.0 { (s - lo) / range } else { 0.0 })
}

/// Score-level fusion: per-set min-max normalization, then a weighted mean
/// per utterance. Output follows the first set's record order.
pub fn fuse_score_sets(sets: &[ScoreSet], weights: Option<&[f64]>) -> Result<ScoreSet> {
    let first = sets
        .first()
        .ok_or_else(|| Error::UniverseMismatch("no score sets to fuse".into()))?;
    let weights: Vec<f64> = match weights {
        Some(w) => w.to_vec(),
        None => vec![1.0; sets.len()],
    };
    if weights.len() != sets.len() {
        return Err(Error::NonPositiveWeight(format!(
            "{} weights for {} sets",
            weights.len(),
            sets.len()
        )));
    }
    if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
        return Err(Error::NonPositiveWeight(format!("weight {w}")));
    }

    let normalized = sets
        .iter()
        .map(min_max_normalize)
        .collect::<Result<Vec<_>>>()?;
    let index: Vec<HashMap<&str, &ScoreRecord>> = normalized
        .iter()
        .map(|s| s.records().iter().map(|r| (r.utt_id.as_str(), r)).collect())
        .collect();
    for (i, set) in sets.iter().enumerate().skip(1) {
        if set.len() != first.len() {
            return Err(Error::UniverseMismatch(format!(
                "set 0 has {} records, set {i} has {}",
                first.len(),
                set.len()
            )));
        }
    }

    let total: f64 = weights.iter().sum();
    let mut fused = Vec::with_capacity(first.len());
    for base in normalized[0].records() {
        let mut acc = 0.0;
        for (i, lookup) in index.iter().enumerate() {
            let r = lookup.get(base.utt_id.as_str()).ok_or_else(|| {
                Error::UniverseMismatch(format!("`{}` missing from set {i}", base.utt_id))
            })?;
            if r.label != base.label || r.attack != base.attack || r.codec != base.codec {
                return Err(Error::LabelConflict(base.utt_id.clone()));
            }
            acc += weights[i] * r.score;
        }
        fused.push(ScoreRecord {
            score: acc / total,
            ..base.clone()
        });
    }
    ScoreSet::new(fused)
}
