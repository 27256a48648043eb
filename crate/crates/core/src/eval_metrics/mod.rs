//! KITTI-style evaluation: difficulty levels, greedy score-ordered matching,
//! precision/recall curves, 11- and 40-point interpolated AP, and recall at
//! fixed IoU thresholds.
//!
//! True negatives are undefined for detection and reported as 0.

mod curve;
mod difficulty;
mod evaluate;
mod matching;
mod report;

use thiserror::Error;

use crate::box_geometry::GeometryError;
use crate::kitti_io::{FrameId, KittiError};

pub use curve::{
    ap11, ap11_levels, ap40, ap40_levels, interp_precision, pr_curve, recall_at, ConfusionCounts,
    PrCurve, PrPoint,
};
pub use difficulty::{assign_difficulty, Bucket, Difficulty};
pub use evaluate::{
    evaluate, evaluate_records, load_predictions, ApEntry, EvalConfig, EvalReport,
    FrameDiagnostics, Interpolation, RecallEntry,
};
pub use matching::{match_frame, match_records, FrameMatch, GtRole, PredOutcome};
pub use report::{ap_table, pr_curve_csv, pr_curve_svg, recall_table};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("no ground-truth objects in scope")]
    NoGroundTruth,
    #[error("prediction {index}{} has no score", frame.map(|f| format!(" of frame {f}")).unwrap_or_default())]
    MissingScore { frame: Option<FrameId>, index: usize },
    #[error("predictions refer to frame {0}, which is not in the dataset")]
    PredictionForUnknownFrame(FrameId),
    #[error("invalid evaluation config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Kitti(#[from] KittiError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}
