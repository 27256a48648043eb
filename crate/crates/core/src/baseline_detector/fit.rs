use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::Vector3;

use super::{DetectorConfig, GroundPlane};
use crate::box_geometry::{Box3D, Dims, Frame};
use crate::kitti_io::Point;

/// Extents below this are widened so that single-surface clusters still
/// give a valid box.
const MIN_EXTENT: f64 = 0.02;

/// Upright box around `points` (LiDAR frame). Yaw is the principal axis of
/// the bird's-eye-view scatter, taken in (-pi/2, pi/2] so the heading points
/// into the sensor's forward half-space; extents are the rotated min/max.
/// Score is `min(1, points / score_norm)`.
pub fn fit_box(points: &[Point], cfg: &DetectorConfig) -> Box3D {
    let n = points.len().max(1) as f64;
    let (mx, my) = points
        .iter()
        .fold((0.0, 0.0), |(x, y), p| (x + p.x as f64, y + p.y as f64));
    let (mx, my) = (mx / n, my / n);
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for p in points {
        let (dx, dy) = (p.x as f64 - mx, p.y as f64 - my);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    let mut yaw = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    if yaw <= -FRAC_PI_2 {
        yaw += PI;
    } else if yaw > FRAC_PI_2 {
        yaw -= PI;
    }
    let (s, c) = yaw.sin_cos();
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for p in points {
        let (x, y) = (p.x as f64, p.y as f64);
        let local = [c * x + s * y, -s * x + c * y, p.z as f64];
        for k in 0..3 {
            lo[k] = lo[k].min(local[k]);
            hi[k] = hi[k].max(local[k]);
        }
    }
    let mid: Vec<f64> = (0..3).map(|k| (lo[k] + hi[k]) / 2.0).collect();
    let ext: Vec<f64> = (0..3).map(|k| (hi[k] - lo[k]).max(MIN_EXTENT)).collect();
    let center = [c * mid[0] - s * mid[1], s * mid[0] + c * mid[1], mid[2]];
    Box3D::new(center, Dims::new(ext[0], ext[1], ext[2]), yaw, Frame::KittiLidar)
        .expect("extents are positive")
        .with_score((points.len() as f64 / cfg.score_norm).min(1.0))
}

/// Grows a fitted box to a plausible car: a cluster no longer than a car is
/// wide and thinner than `face_depth` is read as a single face, so its long
/// axis is taken as the width; extents below the prior are extended on the
/// side facing away from the sensor, and the box is dropped to the ground.
pub fn complete_box(fitted: &Box3D, ground: &GroundPlane, cfg: &DetectorConfig) -> Box3D {
    let mut yaw = fitted.yaw;
    let (mut length, mut width) = (fitted.dims.length, fitted.dims.width);
    if length <= cfg.prior.width * 1.3 && width <= cfg.face_depth {
        std::mem::swap(&mut length, &mut width);
        yaw += if yaw > 0.0 { -FRAC_PI_2 } else { FRAC_PI_2 };
    }
    let box_axes = Box3D::new(fitted.center, Dims::new(length, width, 1.0), yaw, Frame::KittiLidar)
        .expect("extents are positive")
        .axes();
    let mut center = fitted.center_vec();
    for (axis, extent, prior) in [
        (box_axes[0], &mut length, cfg.prior.length),
        (box_axes[1], &mut width, cfg.prior.width),
    ] {
        if *extent < prior {
            let away = Vector3::new(axis.x, axis.y, 0.0) * center.xy().dot(&axis.xy()).signum();
            center += away * (prior - *extent) / 2.0;
            *extent = prior;
        }
    }
    let top = fitted.center[2] + fitted.dims.height / 2.0;
    let bottom = ground.height_at(center.x, center.y).min(top - MIN_EXTENT);
    let mut out = Box3D::new(
        [center.x, center.y, (top + bottom) / 2.0],
        Dims::new(length, width, top - bottom),
        yaw,
        Frame::KittiLidar,
    )
    .expect("extents are positive");
    out.score = fitted.score;
    out
}
