use nalgebra::Matrix3x4;

use super::{normalize_angle, project_to_image, Box3D, Dims, Frame, GeometryError};
use crate::kitti_io::{Dimensions, LabelRecord};

/// Camera-frame box described by a label. The label's bottom-centre
/// `location` is lifted by half the height (camera y points down).
pub fn label_to_box(rec: &LabelRecord) -> Result<Box3D, GeometryError> {
    let [x, y, z] = rec.location;
    let h = rec.dims.height;
    let mut b = Box3D::new(
        [x, y - h / 2.0, z],
        Dims::new(rec.dims.length, rec.dims.width, h),
        rec.rotation_y,
        Frame::KittiCamera,
    )?;
    b.class_name.clone_from(&rec.class_name);
    b.score = rec.score;
    Ok(b)
}

/// Label for a camera-frame box: 2D box and truncation come from projecting
/// with `p2`, `alpha` is the heading relative to the viewing ray. Occlusion
/// is left at 0 for the caller to fill in.
pub fn box_to_label(b: &Box3D, p2: &Matrix3x4<f64>) -> Result<LabelRecord, GeometryError> {
    b.require_frame(Frame::KittiCamera)?;
    let proj = project_to_image(b, p2)?;
    let [x, y, z] = b.center;
    Ok(LabelRecord {
        class_name: b.class_name.clone(),
        truncation: proj.truncation,
        occlusion: 0,
        alpha: normalize_angle(b.yaw - x.atan2(z)),
        bbox2d: proj.bbox,
        dims: Dimensions {
            height: b.dims.height,
            width: b.dims.width,
            length: b.dims.length,
        },
        location: [x, y + b.dims.height / 2.0, z],
        rotation_y: b.yaw,
        score: b.score,
    })
}
