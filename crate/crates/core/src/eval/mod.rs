//! Detection-score evaluation: equal error rate, score fusion and pooled
//! per-attack / per-codec analysis.

mod eer;
mod fusion;
mod pooled;
mod report;
mod scores;

pub use eer::{compute_eer, EerResult};
pub use fusion::{fuse_score_sets, min_max_normalize};
pub use pooled::{pooled_eer, GroupBy, PooledRow, PooledTable};
pub use report::{write_report, EvalReport, FusionInfo};
pub use scores::{load_scores, parse_scores, write_scores, Label, ScoreRecord, ScoreSet, SCORE_HEADER};
