//! Scoring workflow: EER, pooled tables, fusion and the JSON report.
//!
//! cargo run --example eer_eval [scores.tsv ...]

use std::error::Error;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spoofaug::cli::format_percent;
use spoofaug::eval::{EvalReport, FusionInfo};
use spoofaug::{compute_eer, fuse_score_sets, load_scores, pooled_eer, GroupBy, Label, ScoreRecord, ScoreSet};

/// Two synthetic systems scoring the same utterances. `skill` shifts the
/// spoof distribution per attack.
fn synthetic(seed: u64, skill: &[f64]) -> ScoreSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let codecs = ["none", "mp3", "m4a"];
    let mut records = Vec::new();
    for i in 0..300 {
        let codec = codecs[i % 3];
        let noise = rng.random_range(-1.0..1.0) + rng.random_range(-1.0..1.0);
        records.push(ScoreRecord::new(format!("bona_{i:04}"), Label::Bonafide, 2.0 + noise).with_codec(codec));
    }
    for (a, shift) in skill.iter().enumerate() {
        for i in 0..100 {
            let noise = rng.random_range(-1.0..1.0) + rng.random_range(-1.0..1.0);
            records.push(
                ScoreRecord::new(format!("A{a:02}_{i:04}"), Label::Spoof, 2.0 - shift + noise)
                    .with_attack(format!("A{:02}", a + 1))
                    .with_codec(codecs[i % 3]),
            );
        }
    }
    ScoreSet::new(records).unwrap()
}

fn main() -> Result<(), Box<dyn Error>> {
    let paths: Vec<String> = std::env::args().skip(1).collect();
    let sets = if paths.is_empty() {
        vec![synthetic(1, &[3.0, 1.5, 0.5]), synthetic(2, &[1.0, 2.5, 1.5])]
    } else {
        paths.iter().map(load_scores).collect::<Result<_, _>>()?
    };

    for (i, set) in sets.iter().enumerate() {
        let r = compute_eer(set)?;
        println!("system {i}: EER {} at threshold {:.4}", format_percent(r.eer), r.threshold);
    }
    let fused = fuse_score_sets(&sets, None)?;
    let overall = compute_eer(&fused)?;
    println!("fused: EER {}", format_percent(overall.eer));

    let mut report = EvalReport::new(overall);
    for by in [GroupBy::Attack, GroupBy::Codec] {
        let Ok(table) = pooled_eer(&fused, by) else { continue };
        println!("pooled by {}:", by.name());
        for (group, row) in &table {
            let eer = row.result.map_or("undefined".into(), |r| format_percent(r.eer));
            println!("  {group:<6} {eer:>8}  ({} bonafide, {} spoof)", row.bonafide, row.spoof);
        }
        match by {
            GroupBy::Attack => report.pooled_by_attack = Some(table),
            GroupBy::Codec => report.pooled_by_codec = Some(table),
        }
    }
    report.fusion = Some(FusionInfo {
        inputs: (0..sets.len()).map(|i| format!("system {i}")).collect(),
        weights: vec![1.0; sets.len()],
        method: "min-max normalized weighted mean".into(),
    });
    print!("{}", report.to_json()?);
    Ok(())
}
