//! Oriented 3D box algebra for upright (gravity-aligned) boxes.
//!
//! Three frames are tagged explicitly on every [`Box3D`]:
//!
//! | frame         | axes                               | vertical | yaw about |
//! |---------------|------------------------------------|----------|-----------|
//! | `CarlaWorld`  | x forward, y right, z up (left-handed)  | +z  | z, clockwise seen from above |
//! | `KittiLidar`  | x forward, y left, z up            | +z       | z, counter-clockwise |
//! | `KittiCamera` | x right, y down, z forward         | -y       | y (`rotation_y`) |
//!
//! `CarlaWorld` boxes are expressed relative to the sensor mount, so the
//! conversion to `KittiLidar` is a pure handedness flip.

mod box3d;
mod iou;
mod label_box;
mod polygon;
mod projection;
mod transform;

use thiserror::Error;

pub use box3d::{normalize_angle, Box3D, Dims, Frame};
pub use iou::{bev_iou, box_iou, iou_3d, IouMode};
pub use label_box::{box_to_label, label_to_box};
pub use polygon::ConvexPolygon2D;
pub use projection::{project_to_image, Projection, IMAGE_HEIGHT, IMAGE_WIDTH, NEAR_PLANE};
pub use transform::{
    camera_to_lidar, carla_to_kitti, carla_to_lidar, kitti_to_carla, lidar_to_camera,
    lidar_to_carla, CameraRig,
};

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("expected a box in the {expected:?} frame, got {found:?}")]
    FrameMismatch { expected: Frame, found: Frame },
    #[error("box dimensions must be finite and positive: {0:?}")]
    InvalidDims(Dims),
    #[error("box centre or yaw is not finite")]
    NonFinite,
    #[error("box lies entirely behind the image plane")]
    BehindCamera,
    #[error("calibration rotation block is singular")]
    SingularCalibration,
}
