//! The bundled fixture under `fixtures/eval` was scored by
//! `reference_eval.py`, an independent implementation using shapely for the
//! footprint overlap. These tests hold the Rust evaluator to its numbers and
//! text tables.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use sotifkit::eval_metrics::{
    ap_table, evaluate, load_predictions, recall_table, Bucket, Difficulty, EvalConfig, EvalReport,
};
use sotifkit::kitti_io::{read_label_file, validate_dataset, DatasetIndex, FrameId, LabelRecord};

#[derive(Deserialize)]
struct ExpectedAp {
    difficulty: Difficulty,
    iou_threshold: f64,
    gt_count: usize,
    tp: usize,
    fp: usize,
    #[serde(rename = "fn")]
    fn_: usize,
    ap11: Option<f64>,
    ap40: Option<f64>,
}

#[derive(Deserialize)]
struct ExpectedRecall {
    bucket: Bucket,
    iou_threshold: f64,
    gt_count: usize,
    tp: usize,
    #[serde(rename = "fn")]
    fn_: usize,
    recall: Option<f64>,
}

#[derive(Deserialize)]
struct Expected {
    ap: Vec<ExpectedAp>,
    recall: Vec<ExpectedRecall>,
}

fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/eval")
}

fn fixture() -> (DatasetIndex, BTreeMap<FrameId, Vec<LabelRecord>>) {
    let dir = fixture_dir();
    let index = validate_dataset(&dir.join("dataset")).unwrap();
    let preds = load_predictions(&dir.join("predictions")).unwrap();
    (index, preds)
}

fn fixture_report(preds: &BTreeMap<FrameId, Vec<LabelRecord>>) -> EvalReport {
    let (index, _) = fixture();
    let mut report = evaluate(&index, preds, &EvalConfig::default()).unwrap();
    report.method = "fixture".to_string();
    report
}

fn close(a: Option<f64>, b: Option<f64>) -> bool {
    match (a, b) {
        (Some(a), Some(b)) => (a - b).abs() <= 1e-9,
        (None, None) => true,
        _ => false,
    }
}

#[test]
fn matches_reference_numbers() {
    let (_, preds) = fixture();
    let report = fixture_report(&preds);
    let text = std::fs::read_to_string(fixture_dir().join("expected_report.json")).unwrap();
    let expected: Expected = serde_json::from_str(&text).unwrap();

    assert_eq!(report.ap.len(), expected.ap.len());
    for e in &expected.ap {
        let got = report.ap_entry(e.difficulty, e.iou_threshold).unwrap();
        assert_eq!(got.gt_count, e.gt_count, "{:?}", e.difficulty);
        assert_eq!((got.counts.tp, got.counts.fp, got.counts.fn_), (e.tp, e.fp, e.fn_));
        assert!(close(got.ap11, e.ap11), "{:?}: {:?} vs {:?}", e.difficulty, got.ap11, e.ap11);
        assert!(close(got.ap40, e.ap40), "{:?}: {:?} vs {:?}", e.difficulty, got.ap40, e.ap40);
    }
    assert_eq!(report.recall.len(), expected.recall.len());
    for e in &expected.recall {
        let got = report.recall_entry(e.bucket, e.iou_threshold).unwrap();
        assert_eq!(got.gt_count, e.gt_count);
        assert_eq!((got.counts.tp, got.counts.fn_), (e.tp, e.fn_));
        assert!(close(got.recall, e.recall), "{:?} @ {}", e.bucket, e.iou_threshold);
    }
}

#[test]
fn tables_match_golden_files() {
    let (_, preds) = fixture();
    let report = fixture_report(&preds);
    let reports = [report];
    let golden = |name: &str| std::fs::read_to_string(fixture_dir().join(name)).unwrap();
    assert_eq!(ap_table(&reports), golden("expected_ap_table.txt"));
    assert_eq!(recall_table(&reports), golden("expected_recall_table.txt"));
}

#[test]
fn prediction_order_does_not_matter() {
    let (_, preds) = fixture();
    let baseline = fixture_report(&preds);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let mut shuffled = preds.clone();
        for records in shuffled.values_mut() {
            records.shuffle(&mut rng);
        }
        assert_eq!(fixture_report(&shuffled), baseline);
    }
}

#[test]
fn ground_truth_scores_perfectly() {
    let (index, _) = fixture();
    let preds: BTreeMap<FrameId, Vec<LabelRecord>> = index
        .frames
        .iter()
        .map(|f| {
            let labels = read_label_file(&index.path("label_2", *f), false).unwrap();
            let scored = labels
                .into_iter()
                .filter(|r| r.class_name == "Car")
                .map(|mut r| {
                    r.score = Some(1.0);
                    r
                })
                .collect();
            (*f, scored)
        })
        .collect();
    let report = fixture_report(&preds);
    for e in &report.ap {
        assert_eq!(e.ap11, Some(100.0));
        assert_eq!(e.ap40, Some(100.0));
    }
    for e in &report.recall {
        assert_eq!(e.recall, Some(1.0));
    }
}

#[test]
fn empty_predictions_score_zero() {
    let report = fixture_report(&BTreeMap::new());
    for e in &report.ap {
        assert_eq!(e.ap11, Some(0.0));
        assert_eq!(e.ap40, Some(0.0));
        assert_eq!(e.counts.fn_, e.gt_count);
    }
    for e in &report.recall {
        assert_eq!(e.recall, Some(0.0));
    }
}
