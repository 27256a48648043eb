use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::matching::{match_in_order, prediction_order};
use super::{
    ap11, ap40, pr_curve, Bucket, ConfusionCounts, Difficulty, EvalError, FrameMatch, GtRole,
    PrCurve, PredOutcome,
};
use crate::box_geometry::{box_iou, label_to_box, IouMode};
use crate::kitti_io::{read_label_file, DatasetIndex, FrameId, KittiError, LabelRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interpolation {
    Ap11,
    Ap40,
    #[default]
    Both,
}

impl Interpolation {
    pub fn ap11(self) -> bool {
        self != Interpolation::Ap40
    }

    pub fn ap40(self) -> bool {
        self != Interpolation::Ap11
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    /// IoU thresholds at which AP is computed.
    pub ap_thresholds: Vec<f64>,
    /// IoU thresholds at which score-agnostic recall is computed.
    pub recall_thresholds: Vec<f64>,
    pub iou_mode: IouMode,
    pub interpolation: Interpolation,
    pub difficulties: Vec<Difficulty>,
    /// Only records of this class are evaluated; other ground truths are
    /// treated as don't-care regions.
    pub class_name: String,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            ap_thresholds: vec![0.7],
            recall_thresholds: vec![0.3, 0.5],
            iou_mode: IouMode::ThreeD,
            interpolation: Interpolation::Both,
            difficulties: Difficulty::LEVELS.to_vec(),
            class_name: "Car".to_string(),
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<(), EvalError> {
        let thresholds = self.ap_thresholds.iter().chain(&self.recall_thresholds);
        if let Some(t) = thresholds.into_iter().find(|t| !(**t > 0.0 && **t <= 1.0)) {
            return Err(EvalError::InvalidConfig(format!("IoU threshold {t} is outside (0, 1]")));
        }
        if self.difficulties.contains(&Difficulty::Ignored) {
            return Err(EvalError::InvalidConfig("\"ignored\" is not an evaluation level".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApEntry {
    pub difficulty: Difficulty,
    pub iou_threshold: f64,
    pub gt_count: usize,
    /// Percentages; absent when not requested or when the level has no
    /// ground truth.
    pub ap11: Option<f64>,
    pub ap40: Option<f64>,
    pub counts: ConfusionCounts,
    pub curve: PrCurve,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecallEntry {
    pub bucket: Bucket,
    pub iou_threshold: f64,
    pub gt_count: usize,
    pub recall: Option<f64>,
    pub counts: ConfusionCounts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameDiagnostics {
    pub frame: FrameId,
    pub ground_truths: usize,
    pub predictions: usize,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub method: String,
    pub dataset: String,
    pub predictions: String,
    pub config: EvalConfig,
    pub frames: usize,
    pub ap: Vec<ApEntry>,
    pub recall: Vec<RecallEntry>,
    /// Counts over all ground truths of the class at `diagnostics_iou`.
    pub diagnostics_iou: f64,
    pub per_frame: Vec<FrameDiagnostics>,
}

impl EvalReport {
    pub fn ap_entry(&self, difficulty: Difficulty, iou: f64) -> Option<&ApEntry> {
        self.ap
            .iter()
            .find(|e| e.difficulty == difficulty && e.iou_threshold == iou)
    }

    pub fn recall_entry(&self, bucket: Bucket, iou: f64) -> Option<&RecallEntry> {
        self.recall
            .iter()
            .find(|e| e.bucket == bucket && e.iou_threshold == iou)
    }
}

/// One frame ready for matching: predictions in matching order, ground
/// truths with their class flag, IoU of every pair.
struct PreparedFrame {
    id: FrameId,
    gts: Vec<LabelRecord>,
    gt_is_class: Vec<bool>,
    preds: Vec<LabelRecord>,
    scores: Vec<f64>,
    order: Vec<usize>,
    iou: Vec<Vec<f64>>,
}

impl PreparedFrame {
    fn new(
        id: FrameId,
        gts: &[LabelRecord],
        preds: &[LabelRecord],
        cfg: &EvalConfig,
    ) -> Result<Self, EvalError> {
        // ground truths without a usable box (DontCare sentinels) cannot overlap anything
        let gts: Vec<(LabelRecord, _)> = gts
            .iter()
            .filter_map(|g| label_to_box(g).ok().map(|b| (g.clone(), b)))
            .collect();
        let preds: Vec<LabelRecord> = preds
            .iter()
            .filter(|p| p.class_name == cfg.class_name)
            .cloned()
            .collect();
        let scores = preds
            .iter()
            .enumerate()
            .map(|(index, p)| p.score.ok_or(EvalError::MissingScore { frame: Some(id), index }))
            .collect::<Result<Vec<_>, _>>()?;
        let pred_boxes = preds.iter().map(label_to_box).collect::<Result<Vec<_>, _>>()?;
        let iou = pred_boxes
            .iter()
            .map(|pb| {
                gts.iter()
                    .map(|(_, gb)| box_iou(cfg.iou_mode, pb, gb))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut order: Vec<usize> = (0..preds.len()).collect();
        order.sort_by(|&a, &b| prediction_order(&preds[a], &preds[b]).then(a.cmp(&b)));
        Ok(Self {
            id,
            gt_is_class: gts.iter().map(|(g, _)| g.class_name == cfg.class_name).collect(),
            gts: gts.into_iter().map(|(g, _)| g).collect(),
            preds,
            scores,
            order,
            iou,
        })
    }

    fn matches(&self, bucket: Bucket, threshold: f64) -> FrameMatch {
        let roles: Vec<GtRole> = self
            .gts
            .iter()
            .zip(&self.gt_is_class)
            .map(|(g, is_class)| {
                if *is_class && bucket.admits(g) {
                    GtRole::Valid
                } else {
                    GtRole::Ignored
                }
            })
            .collect();
        let mut m = match_in_order(&self.order, &self.scores, &roles, threshold, |p, g| {
            self.iou[p][g]
        });
        let min_height = bucket.min_pred_height();
        for (outcome, pred) in m.preds.iter_mut().zip(&self.preds) {
            if *outcome == PredOutcome::Fp && pred.bbox2d.height() < min_height {
                *outcome = PredOutcome::Ignored;
            }
        }
        m
    }

    fn class_gts(&self) -> usize {
        self.gt_is_class.iter().filter(|c| **c).count()
    }
}

/// Evaluates in-memory labels. Every frame of `ground_truth` takes part;
/// frames without predictions contribute only false negatives.
pub fn evaluate_records(
    ground_truth: &BTreeMap<FrameId, Vec<LabelRecord>>,
    predictions: &BTreeMap<FrameId, Vec<LabelRecord>>,
    cfg: &EvalConfig,
) -> Result<EvalReport, EvalError> {
    cfg.validate()?;
    if let Some(unknown) = predictions.keys().find(|f| !ground_truth.contains_key(f)) {
        return Err(EvalError::PredictionForUnknownFrame(*unknown));
    }
    let frames = ground_truth
        .par_iter()
        .map(|(id, gts)| {
            let preds = predictions.get(id).map_or(&[][..], Vec::as_slice);
            PreparedFrame::new(*id, gts, preds, cfg)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let run = |bucket: Bucket, threshold: f64| -> Vec<FrameMatch> {
        frames.iter().map(|f| f.matches(bucket, threshold)).collect()
    };

    let mut ap = Vec::new();
    for &threshold in &cfg.ap_thresholds {
        for &difficulty in &cfg.difficulties {
            let matches = run(difficulty.into(), threshold);
            let counts = ConfusionCounts::from_matches(&matches);
            let (curve, ap11_value, ap40_value) = match pr_curve(&matches) {
                Ok(curve) => {
                    let a11 = cfg.interpolation.ap11().then(|| ap11(&curve));
                    let a40 = cfg.interpolation.ap40().then(|| ap40(&curve));
                    (curve, a11, a40)
                }
                Err(EvalError::NoGroundTruth) => (PrCurve::default(), None, None),
                Err(e) => return Err(e),
            };
            ap.push(ApEntry {
                difficulty,
                iou_threshold: threshold,
                gt_count: counts.tp + counts.fn_,
                ap11: ap11_value,
                ap40: ap40_value,
                counts,
                curve,
            });
        }
    }

    let buckets = std::iter::once(Bucket::Overall).chain(cfg.difficulties.iter().map(|d| (*d).into()));
    let mut recall = Vec::new();
    for bucket in buckets {
        for &threshold in &cfg.recall_thresholds {
            let counts = ConfusionCounts::from_matches(&run(bucket, threshold));
            recall.push(RecallEntry {
                bucket,
                iou_threshold: threshold,
                gt_count: counts.tp + counts.fn_,
                recall: counts.recall(),
                counts,
            });
        }
    }

    let diagnostics_iou = cfg
        .ap_thresholds
        .first()
        .or(cfg.recall_thresholds.first())
        .copied()
        .unwrap_or(0.7);
    let per_frame = frames
        .iter()
        .map(|f| {
            let m = f.matches(Bucket::Overall, diagnostics_iou);
            FrameDiagnostics {
                frame: f.id,
                ground_truths: f.class_gts(),
                predictions: f.preds.len(),
                tp: m.tp(),
                fp: m.fp(),
                fn_: m.fn_count(),
            }
        })
        .collect();

    Ok(EvalReport {
        method: String::new(),
        dataset: String::new(),
        predictions: String::new(),
        config: cfg.clone(),
        frames: frames.len(),
        ap,
        recall,
        diagnostics_iou,
        per_frame,
    })
}

/// Evaluates a prediction set against every frame of a validated dataset.
pub fn evaluate(
    dataset: &DatasetIndex,
    predictions: &BTreeMap<FrameId, Vec<LabelRecord>>,
    cfg: &EvalConfig,
) -> Result<EvalReport, EvalError> {
    if let Some(unknown) = predictions.keys().find(|f| !dataset.frames.contains(f)) {
        return Err(EvalError::PredictionForUnknownFrame(*unknown));
    }
    let ground_truth = dataset
        .frames
        .par_iter()
        .map(|f| Ok((*f, read_label_file(&dataset.path("label_2", *f), false)?)))
        .collect::<Result<BTreeMap<_, _>, KittiError>>()?;
    let mut report = evaluate_records(&ground_truth, predictions, cfg)?;
    report.dataset = dataset.root.display().to_string();
    Ok(report)
}

/// Reads every `NNNNNN.txt` results file in `dir`; other entries are skipped.
pub fn load_predictions(dir: &Path) -> Result<BTreeMap<FrameId, Vec<LabelRecord>>, EvalError> {
    let entries = fs::read_dir(dir).map_err(|e| KittiError::io(dir, e))?;
    let mut paths: Vec<_> = entries.filter_map(|e| e.ok()).map(|e| e.path()).collect();
    paths.sort();
    let mut out = BTreeMap::new();
    for path in paths {
        if path.extension().and_then(|e| e.to_str()) != Some("txt") {
            continue;
        }
        let Some(frame) = path
            .file_stem()
            .and_then(|s| s.to_str())
            .and_then(|s| s.parse::<FrameId>().ok())
        else {
            continue;
        };
        out.insert(frame, read_label_file(&path, true)?);
    }
    Ok(out)
}
