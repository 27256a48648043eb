use serde::{Deserialize, Serialize};

use super::{EvalError, FrameMatch, PredOutcome};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrPoint {
    /// Predictions scoring at least this are counted.
    pub score: f64,
    pub recall: f64,
    pub precision: f64,
}

/// Points ordered by descending score threshold, hence non-decreasing recall.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PrCurve {
    pub points: Vec<PrPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    /// Undefined for detection; always 0.
    pub tn: usize,
}

impl ConfusionCounts {
    pub fn from_matches(matches: &[FrameMatch]) -> Self {
        let (tp, fp, gts) = matches.iter().fold((0, 0, 0), |(tp, fp, gts), m| {
            (tp + m.tp(), fp + m.fp(), gts + m.valid_gts())
        });
        Self {
            tp,
            fp,
            fn_: gts - tp,
            tn: 0,
        }
    }

    pub fn precision(&self) -> f64 {
        if self.tp + self.fp == 0 {
            0.0
        } else {
            self.tp as f64 / (self.tp + self.fp) as f64
        }
    }

    pub fn recall(&self) -> Option<f64> {
        let gts = self.tp + self.fn_;
        (gts > 0).then(|| self.tp as f64 / gts as f64)
    }
}

/// Sweeps the score threshold over every distinct score of the counted
/// (true or false positive) predictions, highest first.
pub fn pr_curve(matches: &[FrameMatch]) -> Result<PrCurve, EvalError> {
    let gt_count: usize = matches.iter().map(FrameMatch::valid_gts).sum();
    if gt_count == 0 {
        return Err(EvalError::NoGroundTruth);
    }
    let mut scored: Vec<(f64, bool)> = matches
        .iter()
        .flat_map(|m| {
            m.preds.iter().zip(&m.scores).filter_map(|(o, s)| match o {
                PredOutcome::Tp(_) => Some((*s, true)),
                PredOutcome::Fp => Some((*s, false)),
                PredOutcome::Ignored => None,
            })
        })
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut points = Vec::new();
    let (mut tp, mut fp) = (0usize, 0usize);
    for (i, (score, is_tp)) in scored.iter().enumerate() {
        if *is_tp {
            tp += 1;
        } else {
            fp += 1;
        }
        if scored.get(i + 1).is_some_and(|next| next.0 == *score) {
            continue;
        }
        points.push(PrPoint {
            score: *score,
            recall: tp as f64 / gt_count as f64,
            precision: tp as f64 / (tp + fp) as f64,
        });
    }
    Ok(PrCurve { points })
}

/// Highest precision among points with recall at least `r`; 0 if none.
pub fn interp_precision(curve: &PrCurve, r: f64) -> f64 {
    curve
        .points
        .iter()
        .filter(|p| p.recall >= r)
        .map(|p| p.precision)
        .fold(0.0, f64::max)
}

/// {0, 0.1, ..., 1.0}
pub fn ap11_levels() -> Vec<f64> {
    (0..=10).map(|k| k as f64 / 10.0).collect()
}

/// {0.025, 0.05, ..., 1.0}
pub fn ap40_levels() -> Vec<f64> {
    (1..=40).map(|k| k as f64 / 40.0).collect()
}

fn mean_interp(curve: &PrCurve, levels: &[f64]) -> f64 {
    100.0 * levels.iter().map(|r| interp_precision(curve, *r)).sum::<f64>() / levels.len() as f64
}

pub fn ap11(curve: &PrCurve) -> f64 {
    mean_interp(curve, &ap11_levels())
}

pub fn ap40(curve: &PrCurve) -> f64 {
    mean_interp(curve, &ap40_levels())
}

/// TP / (TP + FN) over every prediction regardless of score.
pub fn recall_at(matches: &[FrameMatch]) -> Result<f64, EvalError> {
    ConfusionCounts::from_matches(matches)
        .recall()
        .ok_or(EvalError::NoGroundTruth)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval_metrics::{match_frame, GtRole};

    fn curve(points: &[(f64, f64)]) -> PrCurve {
        PrCurve {
            points: points
                .iter()
                .map(|&(recall, precision)| PrPoint {
                    score: 1.0,
                    recall,
                    precision,
                })
                .collect(),
        }
    }

    /// `n_gts` ground truths; predictions given as (score, is_tp) in one frame.
    fn frame(n_gts: usize, preds: &[(f64, bool)]) -> FrameMatch {
        let scores: Vec<f64> = preds.iter().map(|p| p.0).collect();
        let mut next_gt = 0;
        let hits: Vec<Option<usize>> = preds
            .iter()
            .map(|p| {
                p.1.then(|| {
                    next_gt += 1;
                    next_gt - 1
                })
            })
            .collect();
        match_frame(&scores, &vec![GtRole::Valid; n_gts], 0.5, |p, g| {
            if hits[p] == Some(g) {
                1.0
            } else {
                0.0
            }
        })
    }

    #[test]
    fn zig_zag_suffix_max() {
        let c = curve(&[(0.2, 0.4), (0.5, 0.9), (0.8, 0.3)]);
        assert_eq!(interp_precision(&c, 0.1), 0.9);
        assert_eq!(interp_precision(&c, 0.6), 0.3);
        assert_eq!(interp_precision(&c, 0.9), 0.0);
    }

    #[test]
    fn eight_tp_two_fp() {
        let preds: Vec<(f64, bool)> = (0..10).map(|i| (1.0 - i as f64 * 0.05, i != 3 && i != 6)).collect();
        let c = pr_curve(&[frame(10, &preds)]).unwrap();
        let last = c.points.last().unwrap();
        assert_eq!((last.recall, last.precision), (0.8, 0.8));
        assert_eq!(c.points.len(), 10);
    }

    #[test]
    fn half_recall_full_precision() {
        let preds: Vec<(f64, bool)> = (0..5).map(|i| (0.9 - i as f64 * 0.1, true)).collect();
        let c = pr_curve(&[frame(10, &preds)]).unwrap();
        assert!((ap11(&c) - 600.0 / 11.0).abs() < 1e-9);
        assert!((ap40(&c) - 50.0).abs() < 1e-9);
    }

    #[test]
    fn perfect_and_empty() {
        let perfect = pr_curve(&[frame(4, &[(1.0, true); 4])]).unwrap();
        assert_eq!(perfect.points, vec![PrPoint { score: 1.0, recall: 1.0, precision: 1.0 }]);
        assert_eq!(ap11(&perfect), 100.0);
        assert_eq!(ap40(&perfect), 100.0);
        let empty = pr_curve(&[frame(4, &[])]).unwrap();
        assert!(empty.points.is_empty());
        assert_eq!((ap11(&empty), ap40(&empty)), (0.0, 0.0));
    }

    #[test]
    fn all_false_positives() {
        let c = pr_curve(&[frame(3, &[(0.9, false), (0.5, false)])]).unwrap();
        assert!(c.points.iter().all(|p| p.recall == 0.0 && p.precision == 0.0));
        assert_eq!(ap40(&c), 0.0);
    }

    #[test]
    fn no_ground_truth() {
        assert!(matches!(pr_curve(&[frame(0, &[(0.9, false)])]), Err(EvalError::NoGroundTruth)));
        assert!(matches!(recall_at(&[]), Err(EvalError::NoGroundTruth)));
    }

    #[test]
    fn level_sets() {
        assert_eq!(ap11_levels().len(), 11);
        assert_eq!(ap40_levels().len(), 40);
        assert_eq!(ap40_levels()[0], 0.025);
        assert_eq!(*ap40_levels().last().unwrap(), 1.0);
    }
}
