use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::io;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SCORE_HEADER: &str = "utt_id\tlabel\tscore\tattack\tcodec";
const ABSENT: &str = "-";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Bonafide,
    Spoof,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Bonafide => "bonafide",
            Label::Spoof => "spoof",
        })
    }
}

impl FromStr for Label {
    type Err = ();

    fn from_str(s: &str) -> std::result::Result<Self, ()> {
        match s {
            "bonafide" => Ok(Label::Bonafide),
            "spoof" => Ok(Label::Spoof),
            _ => Err(()),
        }
    }
}

/// Higher scores mean more bona fide.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRecord {
    pub utt_id: String,
    pub label: Label,
    pub score: f64,
    pub attack: Option<String>,
    pub codec: Option<String>,
}

impl ScoreRecord {
    pub fn new(utt_id: impl Into<String>, label: Label, score: f64) -> Self {
        Self {
            utt_id: utt_id.into(),
            label,
            score,
            attack: None,
            codec: None,
        }
    }

    pub fn with_attack(mut self, attack: impl Into<String>) -> Self {
        self.attack = Some(attack.into());
        self
    }

    pub fn with_codec(mut self, codec: impl Into<String>) -> Self {
        self.codec = Some(codec.into());
        self
    }
}

/// Records with unique utterance ids, in input order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScoreSet {
    records: Vec<ScoreRecord>,
}

impl ScoreSet {
    pub fn new(records: Vec<ScoreRecord>) -> Result<Self> {
        let mut seen: HashMap<&str, usize> = HashMap::with_capacity(records.len());
        for (i, r) in records.iter().enumerate() {
            if r.utt_id.is_empty() {
                return Err(Error::ParseError {
                    line: i + 1,
                    message: "empty utt_id".into(),
                });
            }
            if !r.score.is_finite() {
                return Err(Error::ParseError {
                    line: i + 1,
                    message: format!("score for `{}` is not finite", r.utt_id),
                });
            }
            if let Some(first) = seen.insert(&r.utt_id, i) {
                return Err(Error::DuplicateUttId {
                    utt_id: r.utt_id.clone(),
                    first_line: first + 1,
                    second_line: i + 1,
                });
            }
        }
        Ok(Self { records })
    }

    pub fn records(&self) -> &[ScoreRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn count(&self, label: Label) -> usize {
        self.records.iter().filter(|r| r.label == label).count()
    }

    /// Same records with every score passed through `f`.
    pub fn map_scores(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(
            self.records
                .iter()
                .map(|r| ScoreRecord {
                    score: f(r.score),
                    ..r.clone()
                })
                .collect(),
        )
    }
}

/// Parses the score TSV. Line numbers in errors are 1-based file lines.
pub fn parse_scores(text: &str) -> Result<ScoreSet> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim_end_matches('\r') == SCORE_HEADER => {}
        Some((_, header)) => {
            return Err(Error::ParseError {
                line: 1,
                message: format!("expected header `{SCORE_HEADER}`, got `{header}`"),
            })
        }
        None => {
            return Err(Error::ParseError {
                line: 1,
                message: "missing header".into(),
            })
        }
    }
    let mut records = Vec::new();
    let mut line_of: HashMap<String, usize> = HashMap::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        let raw = raw.trim_end_matches('\r');
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split('\t').collect();
        if fields.len() != 5 {
            return Err(Error::ParseError {
                line,
                message: format!("expected 5 tab-separated fields, got {}", fields.len()),
            });
        }
        let utt_id = fields[0].to_string();
        if utt_id.is_empty() {
            return Err(Error::ParseError {
                line,
                message: "empty utt_id".into(),
            });
        }
        let label = fields[1].parse::<Label>().map_err(|_| Error::UnknownLabel {
            line,
            label: fields[1].to_string(),
        })?;
        let score = fields[2]
            .parse::<f64>()
            .ok()
            .filter(|s| s.is_finite())
            .ok_or_else(|| Error::ParseError {
                line,
                message: format!("invalid score `{}`", fields[2]),
            })?;
        let tag = |s: &str| (s != ABSENT && !s.is_empty()).then(|| s.to_string());
        if let Some(&first_line) = line_of.get(&utt_id) {
            return Err(Error::DuplicateUttId {
                utt_id,
                first_line,
                second_line: line,
            });
        }
        line_of.insert(utt_id.clone(), line);
        records.push(ScoreRecord {
            utt_id,
            label,
            score,
            attack: tag(fields[3]),
            codec: tag(fields[4]),
        });
    }
    ScoreSet::new(records)
}

pub fn load_scores(path: impl AsRef<Path>) -> Result<ScoreSet> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => Error::FileNotFound(path.to_path_buf()),
        _ => Error::Io(e),
    })?;
    parse_scores(&text)
}

pub fn write_scores(set: &ScoreSet, path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::with_capacity(32 * (set.len() + 1));
    out.push_str(SCORE_HEADER);
    out.push('\n');
    for r in set.records() {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\n",
            r.utt_id,
            r.label,
            r.score,
            r.attack.as_deref().unwrap_or(ABSENT),
            r.codec.as_deref().unwrap_or(ABSENT)
        ));
    }
    fs::write(path, out)?;
    Ok(())
}
