//! KITTI object-detection file formats and dataset layout.
//!
//! ```text
//! <root>/
//!   velodyne/NNNNNN.bin     little-endian f32 x, y, z, intensity; no header
//!   label_2/NNNNNN.txt      one object per line, 15 fields (16 with score)
//!   calib/NNNNNN.txt        P0..P3, R0_rect, Tr_velo_to_cam, Tr_imu_to_velo
//!   image_2/NNNNNN.png
//!   ImageSets/test.txt      newline-separated frame ids
//!   ImageSets/val.txt
//! ```

mod calib;
mod dataset;
mod fsutil;
mod label;
mod velodyne;

use std::path::PathBuf;

use thiserror::Error;

pub use calib::{
    parse_calib, read_calib, serialize_calib, write_calib, CalibrationSet, RIGID_TOLERANCE,
};
pub use dataset::{
    frame_file, validate_dataset, write_split_file, DatasetIndex, FrameId, Split, Violation,
    DATASET_DIRS,
};
pub use fsutil::write_atomic;
pub use label::{
    parse_label_line, read_label_file, serialize_label, write_label_file, BBox2D, Dimensions,
    LabelRecord,
};
pub use velodyne::{decode_velodyne, encode_velodyne, read_velodyne, write_velodyne, Point, PointCloud};

#[derive(Debug, Error)]
pub enum KittiError {
    #[error("velodyne data of {len} bytes is not a multiple of 16")]
    TruncatedFile { len: usize },
    #[error("point {index} has a non-finite coordinate or intensity")]
    NonFiniteValue { index: usize },
    #[error("point {index} has intensity {value} outside [0, 1]")]
    IntensityOutOfRange { index: usize, value: f32 },
    #[error("expected {expected} fields, found {found}")]
    FieldCountMismatch { expected: usize, found: usize },
    #[error("field {index} ({name}): cannot parse {text:?} as a finite number")]
    NumericParse {
        index: usize,
        name: &'static str,
        text: String,
    },
    #[error("field {index} ({name}): value {value} out of range")]
    RangeViolation {
        index: usize,
        name: &'static str,
        value: f64,
    },
    #[error("calibration key {0:?} is missing")]
    MissingKey(String),
    #[error("calibration key {key:?}: expected {expected} values, found {found}")]
    MatrixShape {
        key: String,
        expected: usize,
        found: usize,
    },
    #[error("{path}:{line}: {source}")]
    Line {
        path: PathBuf,
        line: usize,
        #[source]
        source: Box<KittiError>,
    },
    #[error("dataset structure invalid ({} violation(s)): {}", .0.len(), summarize(.0))]
    StructureViolation(Vec<Violation>),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn summarize(violations: &[Violation]) -> String {
    const SHOWN: usize = 5;
    let mut parts: Vec<String> = violations.iter().take(SHOWN).map(|v| v.to_string()).collect();
    if violations.len() > SHOWN {
        parts.push(format!("... and {} more", violations.len() - SHOWN));
    }
    parts.join("; ")
}

impl KittiError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        KittiError::Io {
            path: path.into(),
            source,
        }
    }
}
