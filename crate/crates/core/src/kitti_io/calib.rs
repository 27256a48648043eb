use std::collections::HashMap;
use std::fs;
use std::path::Path;

use nalgebra::{Matrix3, Matrix3x4};

use super::{write_atomic, KittiError};

/// Orthonormality / determinant tolerance for the rigid parts of a generated
/// calibration.
pub const RIGID_TOLERANCE: f64 = 1e-9;

const PROJECTION_KEYS: [&str; 4] = ["P0", "P1", "P2", "P3"];

/// Per-frame KITTI calibration. Matrices are stored row-major on disk.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationSet {
    pub projections: [Matrix3x4<f64>; 4],
    pub r0_rect: Matrix3<f64>,
    pub tr_velo_to_cam: Matrix3x4<f64>,
    pub tr_imu_to_velo: Matrix3x4<f64>,
}

impl CalibrationSet {
    /// Camera 2 projection, the one label `bbox2d` fields refer to.
    pub fn p2(&self) -> &Matrix3x4<f64> {
        &self.projections[2]
    }

    /// Identity rectification and an axis permutation from the LiDAR frame
    /// (x forward, y left, z up) to the camera frame (x right, y down,
    /// z forward), with no offset.
    pub fn identity_rigid() -> Self {
        let k = Matrix3x4::new(
            721.5377, 0.0, 609.5593, 0.0, //
            0.0, 721.5377, 172.854, 0.0, //
            0.0, 0.0, 1.0, 0.0,
        );
        Self {
            projections: [k; 4],
            r0_rect: Matrix3::identity(),
            tr_velo_to_cam: Matrix3x4::new(
                0.0, -1.0, 0.0, 0.0, //
                0.0, 0.0, -1.0, 0.0, //
                1.0, 0.0, 0.0, 0.0,
            ),
            tr_imu_to_velo: Matrix3x4::identity(),
        }
    }

    /// Fixed calibration written for every generated frame: KITTI-like camera
    /// intrinsics and stereo offsets, with exactly orthonormal rigid parts.
    pub fn generated_default() -> Self {
        let (fx, cx, cy) = (721.5377, 609.5593, 172.854);
        let intrinsics = |tx: f64, ty: f64, tz: f64| {
            Matrix3x4::new(
                fx, 0.0, cx, tx, //
                0.0, fx, cy, ty, //
                0.0, 0.0, 1.0, tz,
            )
        };
        Self {
            projections: [
                intrinsics(0.0, 0.0, 0.0),
                intrinsics(-387.5744, 0.0, 0.0),
                intrinsics(44.85728, 0.2163791, 0.002745884),
                intrinsics(-334.5525, 2.330660, 0.003201153),
            ],
            r0_rect: Matrix3::identity(),
            tr_velo_to_cam: Matrix3x4::new(
                0.0, -1.0, 0.0, 0.0, //
                0.0, 0.0, -1.0, -0.08, //
                1.0, 0.0, 0.0, -0.27,
            ),
            tr_imu_to_velo: Matrix3x4::new(
                1.0, 0.0, 0.0, -0.81, //
                0.0, 1.0, 0.0, 0.32, //
                0.0, 0.0, 1.0, -0.80,
            ),
        }
    }

    /// Maximum deviation from the rigid-transform invariants: orthonormal
    /// rotation blocks and a unit-determinant rectification.
    pub fn rigid_error(&self) -> f64 {
        let ortho = |m: &Matrix3x4<f64>| {
            let r: Matrix3<f64> = m.fixed_view::<3, 3>(0, 0).into_owned();
            (r.transpose() * r - Matrix3::identity()).abs().max()
        };
        let r0_ortho = (self.r0_rect.transpose() * self.r0_rect - Matrix3::identity())
            .abs()
            .max();
        [
            ortho(&self.tr_velo_to_cam),
            ortho(&self.tr_imu_to_velo),
            r0_ortho,
            (self.r0_rect.determinant() - 1.0).abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn is_rigid(&self, tolerance: f64) -> bool {
        self.rigid_error() <= tolerance
    }
}

/// KITTI writes calibration values as `%.12e` with a signed two-digit
/// exponent, e.g. `7.215377000000e+02`.
fn format_sci(value: f64) -> String {
    let s = format!("{value:.12e}");
    let (mantissa, exponent) = s.split_once('e').expect("exponent present");
    let exponent: i32 = exponent.parse().expect("integer exponent");
    let sign = if exponent < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exponent.abs())
}

fn format_row(key: &str, values: impl Iterator<Item = f64>) -> String {
    let mut line = format!("{key}:");
    for v in values {
        line.push(' ');
        line.push_str(&format_sci(v));
    }
    line
}

fn row_major<const C: usize>(
    m: &nalgebra::SMatrix<f64, 3, C>,
) -> impl Iterator<Item = f64> + '_ {
    (0..3).flat_map(move |r| (0..C).map(move |c| m[(r, c)]))
}

pub fn serialize_calib(calib: &CalibrationSet) -> String {
    let mut lines: Vec<String> = PROJECTION_KEYS
        .iter()
        .zip(&calib.projections)
        .map(|(key, p)| format_row(key, row_major(p)))
        .collect();
    lines.push(format_row("R0_rect", row_major(&calib.r0_rect)));
    lines.push(format_row("Tr_velo_to_cam", row_major(&calib.tr_velo_to_cam)));
    lines.push(format_row("Tr_imu_to_velo", row_major(&calib.tr_imu_to_velo)));
    let mut text = lines.join("\n");
    text.push('\n');
    text
}

pub fn parse_calib(text: &str) -> Result<CalibrationSet, KittiError> {
    let mut entries: HashMap<&str, Vec<f64>> = HashMap::new();
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let Some((key, values)) = line.split_once(':') else {
            continue;
        };
        let key = key.trim();
        let parsed = values
            .split_whitespace()
            .enumerate()
            .map(|(index, tok)| {
                tok.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| KittiError::NumericParse {
                        index,
                        name: "calibration value",
                        text: format!("{key}: {tok}"),
                    })
            })
            .collect::<Result<Vec<_>, _>>()?;
        entries.insert(key, parsed);
    }
    let take = |key: &str, expected: usize| -> Result<&Vec<f64>, KittiError> {
        let values = entries
            .get(key)
            .ok_or_else(|| KittiError::MissingKey(key.to_string()))?;
        if values.len() != expected {
            return Err(KittiError::MatrixShape {
                key: key.to_string(),
                expected,
                found: values.len(),
            });
        }
        Ok(values)
    };
    let m34 = |key: &str| take(key, 12).map(|v| Matrix3x4::from_row_slice(v));
    Ok(CalibrationSet {
        projections: [m34("P0")?, m34("P1")?, m34("P2")?, m34("P3")?],
        r0_rect: Matrix3::from_row_slice(take("R0_rect", 9)?),
        tr_velo_to_cam: m34("Tr_velo_to_cam")?,
        tr_imu_to_velo: m34("Tr_imu_to_velo")?,
    })
}

pub fn read_calib(path: &Path) -> Result<CalibrationSet, KittiError> {
    let text = fs::read_to_string(path).map_err(|e| KittiError::io(path, e))?;
    parse_calib(&text)
}

pub fn write_calib(calib: &CalibrationSet, path: &Path) -> Result<(), KittiError> {
    write_atomic(path, serialize_calib(calib).as_bytes())
}
