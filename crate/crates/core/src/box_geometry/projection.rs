use nalgebra::{Matrix3x4, Vector3, Vector4};

use super::{Box3D, Frame, GeometryError};
use crate::kitti_io::BBox2D;

/// KITTI camera 2 image size in pixels.
pub const IMAGE_WIDTH: f64 = 1242.0;
pub const IMAGE_HEIGHT: f64 = 375.0;

/// Box edges are clipped to depth >= this before projection, metres.
pub const NEAR_PLANE: f64 = 0.1;

const EDGES: [(usize, usize); 12] = [
    (0, 1),
    (1, 2),
    (2, 3),
    (3, 0),
    (4, 5),
    (5, 6),
    (6, 7),
    (7, 4),
    (0, 4),
    (1, 5),
    (2, 6),
    (3, 7),
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    /// Axis-aligned hull of the projected box, clipped to the image.
    pub bbox: BBox2D,
    /// Hull before clipping to the image bounds.
    pub unclipped: BBox2D,
    /// `1 - clipped area / unclipped area`; 1.0 when nothing is in the image.
    pub truncation: f64,
}

impl Projection {
    pub fn is_in_image(&self) -> bool {
        self.truncation < 1.0
    }
}

fn clip_edge_to_near(a: Vector3<f64>, b: Vector3<f64>) -> Option<(Vector3<f64>, Vector3<f64>)> {
    match (a.z >= NEAR_PLANE, b.z >= NEAR_PLANE) {
        (true, true) => Some((a, b)),
        (false, false) => None,
        (a_in, _) => {
            let t = (NEAR_PLANE - a.z) / (b.z - a.z);
            let cut = a + (b - a) * t;
            Some(if a_in { (a, cut) } else { (cut, b) })
        }
    }
}

pub fn project_to_image(b: &Box3D, p2: &Matrix3x4<f64>) -> Result<Projection, GeometryError> {
    b.require_frame(Frame::KittiCamera)?;
    let corners = b.corners();
    let mut u_min = f64::INFINITY;
    let mut u_max = f64::NEG_INFINITY;
    let mut v_min = f64::INFINITY;
    let mut v_max = f64::NEG_INFINITY;
    let mut any = false;
    for (i, j) in EDGES {
        let Some((p, q)) = clip_edge_to_near(corners[i], corners[j]) else {
            continue;
        };
        for point in [p, q] {
            let h = p2 * Vector4::new(point.x, point.y, point.z, 1.0);
            let (u, v) = (h.x / h.z, h.y / h.z);
            u_min = u_min.min(u);
            u_max = u_max.max(u);
            v_min = v_min.min(v);
            v_max = v_max.max(v);
            any = true;
        }
    }
    if !any {
        return Err(GeometryError::BehindCamera);
    }
    let unclipped = BBox2D {
        left: u_min,
        top: v_min,
        right: u_max,
        bottom: v_max,
    };
    let bbox = BBox2D {
        left: u_min.clamp(0.0, IMAGE_WIDTH),
        top: v_min.clamp(0.0, IMAGE_HEIGHT),
        right: u_max.clamp(0.0, IMAGE_WIDTH),
        bottom: v_max.clamp(0.0, IMAGE_HEIGHT),
    };
    let full = unclipped.width() * unclipped.height();
    let kept = bbox.width() * bbox.height();
    let truncation = if full > 0.0 {
        (1.0 - kept / full).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(Projection {
        bbox,
        unclipped,
        truncation,
    })
}
