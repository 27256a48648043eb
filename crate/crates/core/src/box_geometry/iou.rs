use serde::{Deserialize, Serialize};

use super::{Box3D, GeometryError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum IouMode {
    #[default]
    #[serde(rename = "3d")]
    ThreeD,
    Bev,
}

fn same_frame(a: &Box3D, b: &Box3D) -> Result<(), GeometryError> {
    b.require_frame(a.frame)
}

fn same_geometry(a: &Box3D, b: &Box3D) -> bool {
    a.center == b.center && a.dims == b.dims && a.yaw == b.yaw
}

fn ratio(intersection: f64, union: f64) -> f64 {
    if union <= 0.0 {
        return 0.0;
    }
    (intersection / union).clamp(0.0, 1.0)
}

/// Footprint overlap area over footprint union area.
pub fn bev_iou(a: &Box3D, b: &Box3D) -> Result<f64, GeometryError> {
    same_frame(a, b)?;
    if same_geometry(a, b) {
        return Ok(1.0);
    }
    let (pa, pb) = (a.bev_polygon(), b.bev_polygon());
    let inter = pa.intersection_area(&pb);
    Ok(ratio(inter, pa.area() + pb.area() - inter))
}

/// Volume IoU: footprint overlap times vertical overlap, over the union.
pub fn iou_3d(a: &Box3D, b: &Box3D) -> Result<f64, GeometryError> {
    same_frame(a, b)?;
    if same_geometry(a, b) {
        return Ok(1.0);
    }
    let (a_lo, a_hi) = a.vertical_extent();
    let (b_lo, b_hi) = b.vertical_extent();
    let overlap_h = (a_hi.min(b_hi) - a_lo.max(b_lo)).max(0.0);
    if overlap_h == 0.0 {
        return Ok(0.0);
    }
    let inter = a.bev_polygon().intersection_area(&b.bev_polygon()) * overlap_h;
    Ok(ratio(inter, a.dims.volume() + b.dims.volume() - inter))
}

pub fn box_iou(mode: IouMode, a: &Box3D, b: &Box3D) -> Result<f64, GeometryError> {
    match mode {
        IouMode::ThreeD => iou_3d(a, b),
        IouMode::Bev => bev_iou(a, b),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::box_geometry::{Dims, Frame};
    use std::f64::consts::PI;

    fn cube(center: [f64; 3], yaw: f64, frame: Frame) -> Box3D {
        Box3D::new(center, Dims::new(1.0, 1.0, 1.0), yaw, frame).unwrap()
    }

    #[test]
    fn identical_boxes() {
        let a = Box3D::new([5.0, 1.0, 0.2], Dims::new(4.1, 1.8, 1.5), 0.3, Frame::KittiLidar).unwrap();
        assert_eq!(iou_3d(&a, &a).unwrap(), 1.0);
        assert_eq!(bev_iou(&a, &a).unwrap(), 1.0);
    }

    #[test]
    fn disjoint_boxes() {
        let a = cube([0.0; 3], 0.0, Frame::KittiLidar);
        let b = cube([100.0, 0.0, 0.0], 0.0, Frame::KittiLidar);
        assert_eq!(bev_iou(&a, &b).unwrap(), 0.0);
        assert_eq!(iou_3d(&a, &b).unwrap(), 0.0);
    }

    #[test]
    fn half_shift_is_one_third() {
        for frame in [Frame::KittiLidar, Frame::KittiCamera, Frame::CarlaWorld] {
            let a = cube([0.0; 3], 0.0, frame);
            let b = cube([0.5, 0.0, 0.0], 0.0, frame);
            assert!((bev_iou(&a, &b).unwrap() - 1.0 / 3.0).abs() < 1e-12);
            assert!((iou_3d(&a, &b).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn vertical_shift_only_affects_3d() {
        let a = cube([0.0; 3], 0.0, Frame::KittiLidar);
        let b = cube([0.0, 0.0, 0.5], 0.0, Frame::KittiLidar);
        assert_eq!(bev_iou(&a, &b).unwrap(), 1.0);
        assert!((iou_3d(&a, &b).unwrap() - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn half_turn_is_self_overlap() {
        let a = Box3D::new([2.0, 3.0, 0.0], Dims::new(4.0, 2.0, 1.5), 0.4, Frame::KittiCamera).unwrap();
        let mut b = a.clone();
        b.yaw = crate::box_geometry::normalize_angle(a.yaw + PI);
        assert!((iou_3d(&a, &b).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn frame_mismatch() {
        let a = cube([0.0; 3], 0.0, Frame::KittiLidar);
        let b = cube([0.0; 3], 0.0, Frame::KittiCamera);
        assert_eq!(
            iou_3d(&a, &b),
            Err(GeometryError::FrameMismatch {
                expected: Frame::KittiLidar,
                found: Frame::KittiCamera
            })
        );
    }
}
