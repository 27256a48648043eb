use nalgebra::Vector3;

use super::{sensor_scene, LidarConfig, SceneState, SimError};
use crate::box_geometry::{Box3D, Dims, Frame, IMAGE_HEIGHT, IMAGE_WIDTH};
use crate::kitti_io::PointCloud;

const PX_PER_M: f64 = 5.0;
/// Pixel position of the sensor.
const ORIGIN: (f64, f64) = (250.0, IMAGE_HEIGHT as f64 / 2.0);

const BACKGROUND: [u8; 3] = [16, 16, 24];
const LANE: [u8; 3] = [90, 90, 90];
const POINT: [u8; 3] = [70, 110, 160];
const EGO: [u8; 3] = [60, 220, 90];
const VEHICLE: [u8; 3] = [235, 70, 60];

struct Canvas {
    pixels: Vec<u8>,
    width: usize,
    height: usize,
}

impl Canvas {
    fn new(width: usize, height: usize) -> Self {
        let mut pixels = Vec::with_capacity(width * height * 3);
        for _ in 0..width * height {
            pixels.extend_from_slice(&BACKGROUND);
        }
        Self {
            pixels,
            width,
            height,
        }
    }

    fn put(&mut self, x: i64, y: i64, color: [u8; 3]) {
        if x < 0 || y < 0 || x >= self.width as i64 || y >= self.height as i64 {
            return;
        }
        let i = (y as usize * self.width + x as usize) * 3;
        self.pixels[i..i + 3].copy_from_slice(&color);
    }

    fn line(&mut self, (x0, y0): (i64, i64), (x1, y1): (i64, i64), color: [u8; 3]) {
        let (dx, dy) = ((x1 - x0).abs(), -(y1 - y0).abs());
        let (sx, sy) = (if x0 < x1 { 1 } else { -1 }, if y0 < y1 { 1 } else { -1 });
        let (mut x, mut y, mut err) = (x0, y0, dx + dy);
        loop {
            self.put(x, y, color);
            if x == x1 && y == y1 {
                break;
            }
            let e2 = 2 * err;
            if e2 >= dy {
                err += dy;
                x += sx;
            }
            if e2 <= dx {
                err += dx;
                y += sy;
            }
        }
    }

    fn outline(&mut self, b: &Box3D, color: [u8; 3]) {
        let corners = b.corners();
        let px: Vec<(i64, i64)> = corners[..4].iter().map(to_pixel).collect();
        for i in 0..4 {
            self.line(px[i], px[(i + 1) % 4], color);
        }
        // heading tick from the centre to the front face
        let front = (corners[0] + corners[3]) / 2.0;
        self.line(to_pixel(&b.center_vec()), to_pixel(&front), color);
    }
}

/// LiDAR-frame point to pixel: forward is right, left is up.
fn to_pixel(p: &Vector3<f64>) -> (i64, i64) {
    (
        (ORIGIN.0 + p.x * PX_PER_M).round() as i64,
        (ORIGIN.1 - p.y * PX_PER_M).round() as i64,
    )
}

/// Draws a schematic bird's-eye view of the frame (lane markings, LiDAR
/// returns, vehicle outlines) at the KITTI image size and encodes it as PNG.
pub fn render_bev_png(
    state: &SceneState,
    lidar: &LidarConfig,
    cloud: &PointCloud,
) -> Result<Vec<u8>, SimError> {
    let mut canvas = Canvas::new(IMAGE_WIDTH as usize, IMAGE_HEIGHT as usize);
    let ego = state.ego();
    let lanes = state.vehicles.iter().map(|v| v.lane).fold(ego.lane, f64::max).ceil() as i64 + 1;
    let ego_y = state.lateral(ego);
    for boundary in 0..=lanes {
        // lane boundaries sit half a lane either side of each centre line
        let carla_y = (boundary as f64 - 0.5) * state.lane_width - ego_y;
        let row = (ORIGIN.1 + carla_y * PX_PER_M).round() as i64;
        let mut x = 0;
        while x < canvas.width as i64 {
            canvas.line((x, row), ((x + 14).min(canvas.width as i64 - 1), row), LANE);
            x += 30;
        }
    }
    for p in &cloud.points {
        let (x, y) = to_pixel(&Vector3::new(p.x as f64, p.y as f64, 0.0));
        canvas.put(x, y, POINT);
    }
    let ego_box = Box3D::new(
        [0.0, 0.0, 0.0],
        Dims::new(ego.box_dims.length, ego.box_dims.width, ego.box_dims.height),
        -ego.yaw,
        Frame::KittiLidar,
    )?;
    canvas.outline(&ego_box, EGO);
    for ob in sensor_scene(state, lidar) {
        canvas.outline(&ob.bbox, VEHICLE);
    }

    let mut bytes = Vec::new();
    let io_err = |e: png::EncodingError| SimError::Config(format!("png encoding: {e}"));
    {
        let mut encoder = png::Encoder::new(&mut bytes, canvas.width as u32, canvas.height as u32);
        encoder.set_color(png::ColorType::Rgb);
        encoder.set_depth(png::BitDepth::Eight);
        let mut writer = encoder.write_header().map_err(io_err)?;
        writer.write_image_data(&canvas.pixels).map_err(io_err)?;
        writer.finish().map_err(io_err)?;
    }
    Ok(bytes)
}
