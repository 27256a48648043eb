use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::box_geometry::{box_iou, label_to_box, IouMode};
use crate::kitti_io::LabelRecord;

/// Whether a ground truth counts towards recall or only absorbs predictions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GtRole {
    Valid,
    /// Matched predictions are neither true nor false positives.
    Ignored,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PredOutcome {
    /// Matched the ground truth at this index.
    Tp(usize),
    Fp,
    Ignored,
}

/// Matching result of one frame, index-aligned with the inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameMatch {
    pub preds: Vec<PredOutcome>,
    pub scores: Vec<f64>,
    pub gt_roles: Vec<GtRole>,
    /// Index of the prediction that claimed each ground truth.
    pub gt_matched: Vec<Option<usize>>,
}

impl FrameMatch {
    pub fn tp(&self) -> usize {
        self.preds.iter().filter(|o| matches!(o, PredOutcome::Tp(_))).count()
    }

    pub fn fp(&self) -> usize {
        self.preds.iter().filter(|o| **o == PredOutcome::Fp).count()
    }

    pub fn valid_gts(&self) -> usize {
        self.gt_roles.iter().filter(|r| **r == GtRole::Valid).count()
    }

    pub fn fn_count(&self) -> usize {
        self.valid_gts() - self.tp()
    }
}

/// Greedy matching. Predictions are visited by descending score (ties in
/// `order`, else index order); each claims the unmatched valid ground truth
/// of highest IoU (lowest index on ties) when that IoU reaches `threshold`,
/// otherwise the best such ignored ground truth, otherwise it is a false
/// positive. `iou(p, g)` gives the overlap of prediction `p` with ground
/// truth `g`.
pub fn match_frame(
    scores: &[f64],
    gt_roles: &[GtRole],
    threshold: f64,
    iou: impl Fn(usize, usize) -> f64,
) -> FrameMatch {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    match_in_order(&order, scores, gt_roles, threshold, iou)
}

pub(crate) fn match_in_order(
    order: &[usize],
    scores: &[f64],
    gt_roles: &[GtRole],
    threshold: f64,
    iou: impl Fn(usize, usize) -> f64,
) -> FrameMatch {
    let mut gt_matched = vec![None; gt_roles.len()];
    let mut preds = vec![PredOutcome::Fp; scores.len()];
    for &p in order {
        let mut best: [Option<(usize, f64)>; 2] = [None, None];
        for (g, role) in gt_roles.iter().enumerate() {
            if gt_matched[g].is_some() {
                continue;
            }
            let overlap = iou(p, g);
            if overlap < threshold {
                continue;
            }
            let slot = &mut best[usize::from(*role == GtRole::Ignored)];
            if slot.is_none_or(|(_, o)| overlap > o) {
                *slot = Some((g, overlap));
            }
        }
        if let Some((g, _)) = best[0] {
            gt_matched[g] = Some(p);
            preds[p] = PredOutcome::Tp(g);
        } else if let Some((g, _)) = best[1] {
            gt_matched[g] = Some(p);
            preds[p] = PredOutcome::Ignored;
        }
    }
    FrameMatch {
        preds,
        scores: scores.to_vec(),
        gt_roles: gt_roles.to_vec(),
        gt_matched,
    }
}

/// Total order on predictions: score descending, then the remaining label
/// fields, so that equal-score predictions are matched in an order that does
/// not depend on file order.
pub(crate) fn prediction_order(a: &LabelRecord, b: &LabelRecord) -> Ordering {
    let key = |r: &LabelRecord| {
        [
            r.location[0],
            r.location[1],
            r.location[2],
            r.dims.height,
            r.dims.width,
            r.dims.length,
            r.rotation_y,
            r.alpha,
            r.bbox2d.left,
            r.bbox2d.top,
            r.bbox2d.right,
            r.bbox2d.bottom,
            r.truncation,
        ]
    };
    let score = |r: &LabelRecord| r.score.unwrap_or(f64::NEG_INFINITY);
    score(b).total_cmp(&score(a)).then_with(|| {
        key(a)
            .iter()
            .zip(key(b))
            .map(|(x, y)| x.total_cmp(&y))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    })
}

/// Matches scored predictions against ground truths, all of them valid.
pub fn match_records(
    preds: &[LabelRecord],
    gts: &[LabelRecord],
    mode: IouMode,
    threshold: f64,
) -> Result<FrameMatch, EvalError> {
    let scores = preds
        .iter()
        .enumerate()
        .map(|(index, p)| p.score.ok_or(EvalError::MissingScore { frame: None, index }))
        .collect::<Result<Vec<_>, _>>()?;
    let pred_boxes = preds.iter().map(label_to_box).collect::<Result<Vec<_>, _>>()?;
    let gt_boxes = gts.iter().map(label_to_box).collect::<Result<Vec<_>, _>>()?;
    let mut iou = vec![vec![0.0; gts.len()]; preds.len()];
    for (p, pb) in pred_boxes.iter().enumerate() {
        for (g, gb) in gt_boxes.iter().enumerate() {
            iou[p][g] = box_iou(mode, pb, gb)?;
        }
    }
    let mut order: Vec<usize> = (0..preds.len()).collect();
    order.sort_by(|&a, &b| prediction_order(&preds[a], &preds[b]).then(a.cmp(&b)));
    Ok(match_in_order(
        &order,
        &scores,
        &vec![GtRole::Valid; gts.len()],
        threshold,
        |p, g| iou[p][g],
    ))
}
