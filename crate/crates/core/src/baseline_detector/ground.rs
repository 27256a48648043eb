use nalgebra::{Matrix3, Vector3};

use super::{DetectorConfig, DetectorError};
use crate::kitti_io::{Point, PointCloud};

/// Clouds smaller than this cannot support a plane fit.
pub const MIN_GROUND_POINTS: usize = 10;

/// The road surface `z = a x + b y + c` in the LiDAR frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundPlane {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl GroundPlane {
    pub fn height_at(&self, x: f64, y: f64) -> f64 {
        self.a * x + self.b * y + self.c
    }

    /// Signed vertical offset of `p` above the plane.
    pub fn residual(&self, p: &Point) -> f64 {
        p.z as f64 - self.height_at(p.x as f64, p.y as f64)
    }
}

fn least_squares<'a>(points: impl Iterator<Item = &'a Point>) -> Option<GroundPlane> {
    let mut normal = Matrix3::zeros();
    let mut rhs = Vector3::zeros();
    let mut n = 0usize;
    for p in points {
        let row = Vector3::new(p.x as f64, p.y as f64, 1.0);
        normal += row * row.transpose();
        rhs += row * p.z as f64;
        n += 1;
    }
    if n < 3 {
        return None;
    }
    let sol = normal.try_inverse()? * rhs;
    sol.iter()
        .all(|v| v.is_finite())
        .then_some(GroundPlane {
            a: sol.x,
            b: sol.y,
            c: sol.z,
        })
}

/// Least-squares plane through the lowest `ground_quantile` of the points by
/// height, refitted once on every point within `ground_z_band` of the first
/// estimate. A degenerate footprint (all points collinear) falls back to a
/// horizontal plane at their mean height.
pub fn fit_ground(cloud: &PointCloud, cfg: &DetectorConfig) -> Result<GroundPlane, DetectorError> {
    let n = cloud.points.len();
    if n < MIN_GROUND_POINTS {
        return Err(DetectorError::DegenerateCloud { points: n });
    }
    let mut by_height: Vec<&Point> = cloud.points.iter().collect();
    by_height.sort_by(|a, b| a.z.total_cmp(&b.z));
    let take = ((n as f64 * cfg.ground_quantile).ceil() as usize).clamp(MIN_GROUND_POINTS, n);
    let lowest = &by_height[..take];
    let first = least_squares(lowest.iter().copied()).unwrap_or_else(|| GroundPlane {
        a: 0.0,
        b: 0.0,
        c: lowest.iter().map(|p| p.z as f64).sum::<f64>() / take as f64,
    });
    let refined = least_squares(
        cloud
            .points
            .iter()
            .filter(|p| first.residual(p).abs() <= cfg.ground_z_band),
    );
    Ok(refined.unwrap_or(first))
}

/// Drops every point within `ground_z_band` of the fitted ground plane.
pub fn remove_ground(cloud: &PointCloud, cfg: &DetectorConfig) -> Result<PointCloud, DetectorError> {
    let plane = fit_ground(cloud, cfg)?;
    Ok(split_ground(cloud, &plane, cfg))
}

pub(crate) fn split_ground(cloud: &PointCloud, plane: &GroundPlane, cfg: &DetectorConfig) -> PointCloud {
    PointCloud {
        points: cloud
            .points
            .iter()
            .filter(|p| plane.residual(p).abs() > cfg.ground_z_band)
            .copied()
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn flat_ground(n: usize, z: f32, seed: u64) -> Vec<Point> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                Point::new(
                    rng.random_range(-40.0..40.0),
                    rng.random_range(-20.0..20.0),
                    z + rng.random_range(-0.02..0.02),
                    0.3,
                )
            })
            .collect()
    }

    #[test]
    fn pure_ground_is_removed() {
        let cloud = PointCloud::new(flat_ground(20_000, -1.73, 1));
        let cfg = DetectorConfig::default();
        let plane = fit_ground(&cloud, &cfg).unwrap();
        assert!((plane.c + 1.73).abs() < 0.01 && plane.a.abs() < 1e-3 && plane.b.abs() < 1e-3);
        let rest = remove_ground(&cloud, &cfg).unwrap();
        assert!(rest.points.len() * 100 <= cloud.points.len());
    }

    #[test]
    fn box_points_survive() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut points = flat_ground(20_000, -1.73, 3);
        let body: Vec<Point> = (0..2_000)
            .map(|_| {
                Point::new(
                    rng.random_range(10.0..14.5),
                    rng.random_range(-0.9..0.9),
                    rng.random_range(-1.4..-0.3),
                    0.7,
                )
            })
            .collect();
        points.extend(&body);
        let rest = remove_ground(&PointCloud::new(points), &DetectorConfig::default()).unwrap();
        let kept = body.iter().filter(|p| rest.points.contains(p)).count();
        assert!(kept * 100 >= body.len() * 95, "{kept}");
    }

    #[test]
    fn tilted_plane_is_recovered() {
        let points: Vec<Point> = flat_ground(5_000, 0.0, 4)
            .into_iter()
            .map(|p| Point::new(p.x, p.y, p.z + 0.02 * p.x - 1.5, p.intensity))
            .collect();
        let plane = fit_ground(&PointCloud::new(points), &DetectorConfig::default()).unwrap();
        assert!((plane.a - 0.02).abs() < 1e-3 && (plane.c + 1.5).abs() < 0.01);
    }

    #[test]
    fn tiny_cloud_is_degenerate() {
        let cloud = PointCloud::new(flat_ground(5, -1.7, 5));
        assert!(matches!(
            remove_ground(&cloud, &DetectorConfig::default()),
            Err(DetectorError::DegenerateCloud { points: 5 })
        ));
    }
}
