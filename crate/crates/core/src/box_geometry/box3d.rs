use std::f64::consts::PI;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::{ConvexPolygon2D, GeometryError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Frame {
    CarlaWorld,
    KittiLidar,
    KittiCamera,
}

/// Box extents in metres: `length` along the heading, `width` across it,
/// `height` along the vertical.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dims {
    pub length: f64,
    pub width: f64,
    pub height: f64,
}

impl Dims {
    pub fn new(length: f64, width: f64, height: f64) -> Self {
        Self {
            length,
            width,
            height,
        }
    }

    pub fn volume(&self) -> f64 {
        self.length * self.width * self.height
    }

    fn is_valid(&self) -> bool {
        [self.length, self.width, self.height]
            .iter()
            .all(|v| v.is_finite() && *v > 0.0)
    }
}

/// Wraps an angle into [-pi, pi].
pub fn normalize_angle(angle: f64) -> f64 {
    let mut a = angle.rem_euclid(2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    }
    a
}

/// An upright oriented box. `center` is the geometric centre in every frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Box3D {
    pub center: [f64; 3],
    pub dims: Dims,
    pub yaw: f64,
    pub frame: Frame,
    pub class_name: String,
    pub score: Option<f64>,
}

impl Box3D {
    pub fn new(center: [f64; 3], dims: Dims, yaw: f64, frame: Frame) -> Result<Self, GeometryError> {
        if !dims.is_valid() {
            return Err(GeometryError::InvalidDims(dims));
        }
        if !center.iter().all(|v| v.is_finite()) || !yaw.is_finite() {
            return Err(GeometryError::NonFinite);
        }
        Ok(Self {
            center,
            dims,
            yaw: normalize_angle(yaw),
            frame,
            class_name: "Car".to_string(),
            score: None,
        })
    }

    pub fn with_score(mut self, score: f64) -> Self {
        self.score = Some(score);
        self
    }

    pub fn require_frame(&self, expected: Frame) -> Result<(), GeometryError> {
        if self.frame == expected {
            Ok(())
        } else {
            Err(GeometryError::FrameMismatch {
                expected,
                found: self.frame,
            })
        }
    }

    pub fn center_vec(&self) -> Vector3<f64> {
        Vector3::from(self.center)
    }

    /// Unit vectors (forward, left, up) of the box in its frame.
    pub fn axes(&self) -> [Vector3<f64>; 3] {
        let (s, c) = self.yaw.sin_cos();
        match self.frame {
            Frame::CarlaWorld | Frame::KittiLidar => [
                Vector3::new(c, s, 0.0),
                Vector3::new(-s, c, 0.0),
                Vector3::z(),
            ],
            Frame::KittiCamera => [
                Vector3::new(c, 0.0, -s),
                Vector3::new(s, 0.0, c),
                -Vector3::y(),
            ],
        }
    }

    /// The eight corners: indices 0-3 on the bottom face, 4-7 on the top face
    /// directly above them. Within a face the order is front-left,
    /// rear-left, rear-right, front-right relative to the heading.
    pub fn corners(&self) -> [Vector3<f64>; 8] {
        let [f, l, u] = self.axes();
        let c = self.center_vec();
        let (hl, hw, hh) = (
            self.dims.length / 2.0,
            self.dims.width / 2.0,
            self.dims.height / 2.0,
        );
        let footprint = [(hl, hw), (-hl, hw), (-hl, -hw), (hl, -hw)];
        let mut out = [Vector3::zeros(); 8];
        for (i, (a, b)) in footprint.iter().enumerate() {
            out[i] = c + f * *a + l * *b - u * hh;
            out[i + 4] = c + f * *a + l * *b + u * hh;
        }
        out
    }

    /// Maps a frame point to plane coordinates (u, v) for the bird's-eye
    /// view: (x, y) for z-up frames, (x, z) for the camera frame.
    pub fn bev_coords(frame: Frame, p: &Vector3<f64>) -> [f64; 2] {
        match frame {
            Frame::CarlaWorld | Frame::KittiLidar => [p.x, p.y],
            Frame::KittiCamera => [p.x, p.z],
        }
    }

    pub fn bev_polygon(&self) -> ConvexPolygon2D {
        let corners = self.corners();
        ConvexPolygon2D::from_points(
            corners[..4]
                .iter()
                .map(|p| Self::bev_coords(self.frame, p))
                .collect(),
        )
    }

    /// (min, max) along the frame's vertical axis, in the up direction.
    pub fn vertical_extent(&self) -> (f64, f64) {
        let up = match self.frame {
            Frame::CarlaWorld | Frame::KittiLidar => self.center[2],
            Frame::KittiCamera => -self.center[1],
        };
        let hh = self.dims.height / 2.0;
        (up - hh, up + hh)
    }

    /// Whether `p` lies inside the box grown by `margin` on every side.
    pub fn contains(&self, p: &Vector3<f64>, margin: f64) -> bool {
        let d = p - self.center_vec();
        let [f, l, u] = self.axes();
        d.dot(&f).abs() <= self.dims.length / 2.0 + margin
            && d.dot(&l).abs() <= self.dims.width / 2.0 + margin
            && d.dot(&u).abs() <= self.dims.height / 2.0 + margin
    }
}
