use std::fs;
use std::path::Path;

use super::{write_atomic, KittiError};

const POINT_STRIDE: usize = 16;

/// One LiDAR return in the sensor frame: metres, intensity unitless in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f32,
    pub y: f32,
    pub z: f32,
    pub intensity: f32,
}

impl Point {
    pub fn new(x: f32, y: f32, z: f32, intensity: f32) -> Self {
        Self { x, y, z, intensity }
    }

    pub fn range(&self) -> f64 {
        let (x, y, z) = (self.x as f64, self.y as f64, self.z as f64);
        (x * x + y * y + z * z).sqrt()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointCloud {
    pub points: Vec<Point>,
}

impl PointCloud {
    pub fn new(points: Vec<Point>) -> Self {
        Self { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Checks that every value is finite and every intensity lies in [0, 1].
    pub fn validate(&self) -> Result<(), KittiError> {
        self.points.iter().enumerate().try_for_each(|(index, p)| check_point(index, p))
    }
}

fn check_point(index: usize, p: &Point) -> Result<(), KittiError> {
    if ![p.x, p.y, p.z, p.intensity].iter().all(|v| v.is_finite()) {
        return Err(KittiError::NonFiniteValue { index });
    }
    if !(0.0..=1.0).contains(&p.intensity) {
        return Err(KittiError::IntensityOutOfRange {
            index,
            value: p.intensity,
        });
    }
    Ok(())
}

/// Decodes raw velodyne bytes. Any input either decodes or yields an error.
pub fn decode_velodyne(bytes: &[u8]) -> Result<PointCloud, KittiError> {
    if bytes.len() % POINT_STRIDE != 0 {
        return Err(KittiError::TruncatedFile { len: bytes.len() });
    }
    let points = bytes
        .chunks_exact(POINT_STRIDE)
        .enumerate()
        .map(|(index, chunk)| {
            let f = |i: usize| f32::from_le_bytes(chunk[i * 4..i * 4 + 4].try_into().unwrap());
            let p = Point::new(f(0), f(1), f(2), f(3));
            check_point(index, &p).map(|_| p)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PointCloud { points })
}

pub fn encode_velodyne(cloud: &PointCloud) -> Result<Vec<u8>, KittiError> {
    cloud.validate()?;
    let mut bytes = Vec::with_capacity(cloud.len() * POINT_STRIDE);
    for p in &cloud.points {
        for v in [p.x, p.y, p.z, p.intensity] {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(bytes)
}

pub fn read_velodyne(path: &Path) -> Result<PointCloud, KittiError> {
    let bytes = fs::read(path).map_err(|e| KittiError::io(path, e))?;
    decode_velodyne(&bytes)
}

pub fn write_velodyne(cloud: &PointCloud, path: &Path) -> Result<(), KittiError> {
    write_atomic(path, &encode_velodyne(cloud)?)
}
