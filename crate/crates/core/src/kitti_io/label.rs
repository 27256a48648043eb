use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{write_atomic, KittiError};

const FIELD_NAMES: [&str; 16] = [
    "type",
    "truncated",
    "occluded",
    "alpha",
    "bbox_left",
    "bbox_top",
    "bbox_right",
    "bbox_bottom",
    "height",
    "width",
    "length",
    "x",
    "y",
    "z",
    "rotation_y",
    "score",
];

/// Angles written with two decimals (or four, by other toolkits) may land a
/// hair outside [-pi, pi].
const ANGLE_SLACK: f64 = 0.01;

/// Class name whose numeric fields carry sentinel values in stock KITTI labels.
const DONT_CARE: &str = "DontCare";

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BBox2D {
    pub left: f64,
    pub top: f64,
    pub right: f64,
    pub bottom: f64,
}

impl BBox2D {
    pub fn height(&self) -> f64 {
        self.bottom - self.top
    }

    pub fn width(&self) -> f64 {
        self.right - self.left
    }
}

/// Box extents in KITTI label order (height, width, length), metres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dimensions {
    pub height: f64,
    pub width: f64,
    pub length: f64,
}

/// One line of a KITTI `label_2` (ground truth) or results (prediction) file.
///
/// `location` is the bottom-centre of the box in the rectified camera frame.
/// Predictions written by common toolkits use `-1` for `truncation` and
/// `occlusion`; that sentinel is accepted only on scored records.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelRecord {
    pub class_name: String,
    pub truncation: f64,
    pub occlusion: i8,
    pub alpha: f64,
    pub bbox2d: BBox2D,
    pub dims: Dimensions,
    pub location: [f64; 3],
    pub rotation_y: f64,
    pub score: Option<f64>,
}

impl LabelRecord {
    pub fn is_prediction(&self) -> bool {
        self.score.is_some()
    }
}

pub fn parse_label_line(line: &str, expect_score: bool) -> Result<LabelRecord, KittiError> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    let expected = if expect_score { 16 } else { 15 };
    if fields.len() != expected {
        return Err(KittiError::FieldCountMismatch {
            expected,
            found: fields.len(),
        });
    }
    let num = |index: usize| -> Result<f64, KittiError> {
        fields[index]
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| KittiError::NumericParse {
                index,
                name: FIELD_NAMES[index],
                text: fields[index].to_string(),
            })
    };
    let values = (1..expected).map(num).collect::<Result<Vec<f64>, _>>()?;
    let v = |index: usize| values[index - 1];

    let occlusion_raw = v(2);
    if occlusion_raw.fract() != 0.0 {
        return Err(KittiError::NumericParse {
            index: 2,
            name: FIELD_NAMES[2],
            text: fields[2].to_string(),
        });
    }
    let rec = LabelRecord {
        class_name: fields[0].to_string(),
        truncation: v(1),
        occlusion: occlusion_raw.clamp(-128.0, 127.0) as i8,
        alpha: v(3),
        bbox2d: BBox2D {
            left: v(4),
            top: v(5),
            right: v(6),
            bottom: v(7),
        },
        dims: Dimensions {
            height: v(8),
            width: v(9),
            length: v(10),
        },
        location: [v(11), v(12), v(13)],
        rotation_y: v(14),
        score: expect_score.then(|| v(15)),
    };
    if rec.class_name != DONT_CARE {
        check_ranges(&rec, occlusion_raw)?;
    }
    Ok(rec)
}

fn check_ranges(rec: &LabelRecord, occlusion_raw: f64) -> Result<(), KittiError> {
    let violation = |index: usize, value: f64| KittiError::RangeViolation {
        index,
        name: FIELD_NAMES[index],
        value,
    };
    let sentinel_ok = rec.is_prediction();
    let truncation_ok =
        (0.0..=1.0).contains(&rec.truncation) || (sentinel_ok && rec.truncation == -1.0);
    if !truncation_ok {
        return Err(violation(1, rec.truncation));
    }
    let occlusion_ok =
        (0.0..=3.0).contains(&occlusion_raw) || (sentinel_ok && occlusion_raw == -1.0);
    if !occlusion_ok {
        return Err(violation(2, occlusion_raw));
    }
    if rec.alpha.abs() > PI + ANGLE_SLACK {
        return Err(violation(3, rec.alpha));
    }
    if rec.bbox2d.right < rec.bbox2d.left {
        return Err(violation(6, rec.bbox2d.right));
    }
    if rec.bbox2d.bottom < rec.bbox2d.top {
        return Err(violation(7, rec.bbox2d.bottom));
    }
    for (index, value) in [(8, rec.dims.height), (9, rec.dims.width), (10, rec.dims.length)] {
        if value <= 0.0 {
            return Err(violation(index, value));
        }
    }
    if rec.rotation_y.abs() > PI + ANGLE_SLACK {
        return Err(violation(14, rec.rotation_y));
    }
    Ok(())
}

/// Geometry with two decimals, score with four (KITTI convention).
pub fn serialize_label(rec: &LabelRecord) -> String {
    let b = &rec.bbox2d;
    let d = &rec.dims;
    let [x, y, z] = rec.location;
    let mut out = format!(
        "{} {:.2} {} {:.2} {:.2} {:.2} {:.2} {:.2} {:.2} {:.2} {:.2} {:.2} {:.2} {:.2} {:.2}",
        rec.class_name,
        rec.truncation,
        rec.occlusion,
        rec.alpha,
        b.left,
        b.top,
        b.right,
        b.bottom,
        d.height,
        d.width,
        d.length,
        x,
        y,
        z,
        rec.rotation_y
    );
    if let Some(score) = rec.score {
        let _ = write!(out, " {score:.4}");
    }
    out
}

/// Reads every non-blank line of a label or results file.
pub fn read_label_file(path: &Path, expect_score: bool) -> Result<Vec<LabelRecord>, KittiError> {
    let text = fs::read_to_string(path).map_err(|e| KittiError::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, line)| !line.trim().is_empty())
        .map(|(i, line)| {
            parse_label_line(line, expect_score).map_err(|source| KittiError::Line {
                path: path.to_path_buf(),
                line: i + 1,
                source: Box::new(source),
            })
        })
        .collect()
}

pub fn write_label_file(records: &[LabelRecord], path: &Path) -> Result<(), KittiError> {
    let mut text = String::new();
    for rec in records {
        text.push_str(&serialize_label(rec));
        text.push('\n');
    }
    write_atomic(path, text.as_bytes())
}
