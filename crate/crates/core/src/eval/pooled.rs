use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::eer::{compute_eer, EerResult};
use super::scores::{Label, ScoreRecord, ScoreSet};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupBy {
    Attack,
    Codec,
}

impl GroupBy {
    fn tag(self, r: &ScoreRecord) -> Option<&str> {
        match self {
            GroupBy::Attack => r.attack.as_deref(),
            GroupBy::Codec => r.codec.as_deref(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GroupBy::Attack => "attack",
            GroupBy::Codec => "codec",
        }
    }
}

/// One group's EER; `result` is `None` when the group lacks a class.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PooledRow {
    pub bonafide: usize,
    pub spoof: usize,
    #[serde(flatten)]
    pub result: Option<EerResult>,
}

/// Rows keyed by group tag in lexicographic order.
pub type PooledTable = BTreeMap<String, PooledRow>;

/// Attack pooling scores every bona fide record against the spoofs of one
/// attack. Codec pooling restricts both classes to the same codec.
pub fn pooled_eer(scores: &ScoreSet, group_by: GroupBy) -> Result<PooledTable> {
    let groups: BTreeSet<&str> = scores
        .records()
        .iter()
        .filter_map(|r| group_by.tag(r))
        .collect();
    if groups.is_empty() {
        return Err(Error::MissingTag(group_by.name().into()));
    }
    groups
        .into_par_iter()
        .map(|g| {
            let subset: Vec<ScoreRecord> = scores
                .records()
                .iter()
                .filter(|r| {
                    let tagged = group_by.tag(r) == Some(g);
                    match (group_by, r.label) {
                        (GroupBy::Attack, Label::Bonafide) => true,
                        _ => tagged,
                    }
                })
                .cloned()
                .collect();
            let set = ScoreSet::new(subset)?;
            let (bonafide, spoof) = (set.count(Label::Bonafide), set.count(Label::Spoof));
            let result = if bonafide > 0 && spoof > 0 {
                Some(compute_eer(&set)?)
            } else {
                None
            };
            Ok((
                g.to_string(),
                PooledRow {
                    bonafide,
                    spoof,
                    result,
                },
            ))
        })
        .collect::<Result<Vec<_>>>()
        .map(|rows| rows.into_iter().collect())
}
