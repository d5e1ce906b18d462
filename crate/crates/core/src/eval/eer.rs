use serde::{Serialize, Serializer};

use super::scores::{Label, ScoreSet};
use crate::error::{Error, Result};

/// Operating point where false acceptance and false rejection meet.
///
/// `threshold` may be infinite when the crossing sits at one of the sweep
/// sentinels; it then serializes as the string `"inf"` or `"-inf"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EerResult {
    pub eer: f64,
    #[serde(serialize_with = "serialize_threshold")]
    pub threshold: f64,
    pub far: f64,
    pub frr: f64,
}

fn serialize_threshold<S: Serializer>(t: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if t.is_finite() {
        s.serialize_f64(*t)
    } else if *t > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

/// Sweeps thresholds at every distinct score plus both infinities
/// (accept iff `score >= threshold`) and reports `(FAR + FRR) / 2` where
/// `|FAR - FRR|` is smallest. Ties prefer smaller `FAR + FRR`, then the
/// smaller threshold.
pub fn compute_eer(scores: &ScoreSet) -> Result<EerResult> {
    let mut points: Vec<(f64, Label)> = scores
        .records()
        .iter()
        .map(|r| (r.score, r.label))
        .collect();
    let n_bona = points.iter().filter(|p| p.1 == Label::Bonafide).count();
    let n_spoof = points.len() - n_bona;
    if n_bona == 0 || n_spoof == 0 {
        return Err(Error::DegenerateSet {
            bonafide: n_bona,
            spoof: n_spoof,
        });
    }
    points.sort_by(|a, b| a.0.total_cmp(&b.0));

    let rates = |bona_rejected: usize, spoof_rejected: usize| {
        let frr = bona_rejected as f64 / n_bona as f64;
        let far = (n_spoof - spoof_rejected) as f64 / n_spoof as f64;
        (far, frr)
    };
    let mut best: Option<(f64, f64, f64)> = None;
    let mut consider = |threshold: f64, far: f64, frr: f64| {
        let better = match best {
            None => true,
            Some((bt, bfar, bfrr)) => {
                let (d, bd) = ((far - frr).abs(), (bfar - bfrr).abs());
                d < bd || (d == bd && (far + frr < bfar + bfrr || (far + frr == bfar + bfrr && threshold < bt)))
            }
        };
        if better {
            best = Some((threshold, far, frr));
        }
    };

    // thresholds ascend, so everything before index i is rejected
    let (far, frr) = rates(0, 0);
    consider(f64::NEG_INFINITY, far, frr);
    let (mut bona_rej, mut spoof_rej) = (0usize, 0usize);
    let mut i = 0;
    while i < points.len() {
        let threshold = points[i].0;
        let (far, frr) = rates(bona_rej, spoof_rej);
        consider(threshold, far, frr);
        while i < points.len() && points[i].0 == threshold {
            match points[i].1 {
                Label::Bonafide => bona_rej += 1,
                Label::Spoof => spoof_rej += 1,
            }
            i += 1;
        }
    }
    let (far, frr) = rates(n_bona, n_spoof);
    consider(f64::INFINITY, far, frr);

    let (threshold, far, frr) = best.expect("sweep has at least two points");
    Ok(EerResult {
        eer: (far + frr) / 2.0,
        threshold,
        far,
        frr,
    })
}
