use nalgebra::{Matrix3, Vector3};

use super::{normalize_angle, Box3D, Frame, GeometryError};
use crate::kitti_io::CalibrationSet;

/// The rigid LiDAR → rectified-camera map `p_cam = R0_rect (R p + t)`,
/// precomputed with its inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct CameraRig {
    rotation: Matrix3<f64>,
    translation: Vector3<f64>,
    inverse_rotation: Matrix3<f64>,
}

impl CameraRig {
    pub fn new(calib: &CalibrationSet) -> Result<Self, GeometryError> {
        let r: Matrix3<f64> = calib.tr_velo_to_cam.fixed_view::<3, 3>(0, 0).into_owned();
        let t: Vector3<f64> = calib.tr_velo_to_cam.column(3).into_owned();
        let rotation = calib.r0_rect * r;
        let inverse_rotation = rotation
            .try_inverse()
            .ok_or(GeometryError::SingularCalibration)?;
        Ok(Self {
            rotation,
            translation: calib.r0_rect * t,
            inverse_rotation,
        })
    }

    pub fn lidar_point_to_camera(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * p + self.translation
    }

    pub fn camera_point_to_lidar(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.inverse_rotation * (p - self.translation)
    }

    pub fn lidar_to_camera(&self, b: &Box3D) -> Result<Box3D, GeometryError> {
        b.require_frame(Frame::KittiLidar)?;
        let center = self.lidar_point_to_camera(&b.center_vec());
        let heading = self.rotation * Vector3::new(b.yaw.cos(), b.yaw.sin(), 0.0);
        let rotation_y = (-heading.z).atan2(heading.x);
        Ok(Box3D {
            center: center.into(),
            yaw: normalize_angle(rotation_y),
            frame: Frame::KittiCamera,
            ..b.clone()
        })
    }

    pub fn camera_to_lidar(&self, b: &Box3D) -> Result<Box3D, GeometryError> {
        b.require_frame(Frame::KittiCamera)?;
        let center = self.camera_point_to_lidar(&b.center_vec());
        let heading = self.inverse_rotation * Vector3::new(b.yaw.cos(), 0.0, -b.yaw.sin());
        Ok(Box3D {
            center: center.into(),
            yaw: normalize_angle(heading.y.atan2(heading.x)),
            frame: Frame::KittiLidar,
            ..b.clone()
        })
    }
}

/// Left-handed CARLA axes to right-handed KITTI LiDAR axes: y ↦ -y, yaw ↦ -yaw.
pub fn carla_to_lidar(b: &Box3D) -> Result<Box3D, GeometryError> {
    b.require_frame(Frame::CarlaWorld)?;
    Ok(mirror_y(b, Frame::KittiLidar))
}

pub fn lidar_to_carla(b: &Box3D) -> Result<Box3D, GeometryError> {
    b.require_frame(Frame::KittiLidar)?;
    Ok(mirror_y(b, Frame::CarlaWorld))
}

fn mirror_y(b: &Box3D, frame: Frame) -> Box3D {
    let [x, y, z] = b.center;
    Box3D {
        center: [x, -y, z],
        yaw: normalize_angle(-b.yaw),
        frame,
        ..b.clone()
    }
}

pub fn lidar_to_camera(b: &Box3D, calib: &CalibrationSet) -> Result<Box3D, GeometryError> {
    CameraRig::new(calib)?.lidar_to_camera(b)
}

pub fn camera_to_lidar(b: &Box3D, calib: &CalibrationSet) -> Result<Box3D, GeometryError> {
    CameraRig::new(calib)?.camera_to_lidar(b)
}

/// CARLA (sensor-relative) box to a KITTI camera box. For the usual axis
/// permutation calibration this yields `rotation_y = -yaw_lidar - pi/2`,
/// i.e. `yaw_carla - pi/2`.
pub fn carla_to_kitti(b: &Box3D, calib: &CalibrationSet) -> Result<Box3D, GeometryError> {
    lidar_to_camera(&carla_to_lidar(b)?, calib)
}

pub fn kitti_to_carla(b: &Box3D, calib: &CalibrationSet) -> Result<Box3D, GeometryError> {
    lidar_to_carla(&camera_to_lidar(b, calib)?)
}
