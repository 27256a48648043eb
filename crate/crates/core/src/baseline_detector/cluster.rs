use std::collections::HashMap;

use petgraph::unionfind::UnionFind;

use super::DetectorConfig;
use crate::kitti_io::PointCloud;

/// Connected components of the graph joining points closer than
/// `cluster_radius`, found with a hash grid of that cell size. Components
/// smaller than `min_cluster_points` are dropped. Each returned set is
/// sorted, and sets are ordered by their first index.
pub fn cluster(cloud: &PointCloud, cfg: &DetectorConfig) -> Vec<Vec<usize>> {
    let r = cfg.cluster_radius;
    let r2 = r * r;
    let cell = |v: f32| (v as f64 / r).floor() as i64;
    let mut grid: HashMap<(i64, i64, i64), Vec<usize>> = HashMap::new();
    for (i, p) in cloud.points.iter().enumerate() {
        grid.entry((cell(p.x), cell(p.y), cell(p.z))).or_default().push(i);
    }
    let mut uf = UnionFind::<usize>::new(cloud.points.len());
    for (i, p) in cloud.points.iter().enumerate() {
        let (cx, cy, cz) = (cell(p.x), cell(p.y), cell(p.z));
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    let Some(members) = grid.get(&(cx + dx, cy + dy, cz + dz)) else {
                        continue;
                    };
                    for &j in members {
                        if j <= i {
                            continue;
                        }
                        let q = &cloud.points[j];
                        let d2 = (p.x as f64 - q.x as f64).powi(2)
                            + (p.y as f64 - q.y as f64).powi(2)
                            + (p.z as f64 - q.z as f64).powi(2);
                        if d2 <= r2 {
                            uf.union(i, j);
                        }
                    }
                }
            }
        }
    }
    let mut components: HashMap<usize, Vec<usize>> = HashMap::new();
    for i in 0..cloud.points.len() {
        components.entry(uf.find(i)).or_default().push(i);
    }
    let mut out: Vec<Vec<usize>> = components
        .into_values()
        .filter(|c| c.len() >= cfg.min_cluster_points)
        .collect();
    out.sort_by_key(|c| c[0]);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kitti_io::Point;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn blob(rng: &mut ChaCha8Rng, center: [f32; 3], n: usize) -> Vec<Point> {
        (0..n)
            .map(|_| {
                Point::new(
                    center[0] + rng.random_range(-1.0..1.0),
                    center[1] + rng.random_range(-0.5..0.5),
                    center[2] + rng.random_range(-0.5..0.5),
                    0.5,
                )
            })
            .collect()
    }

    #[test]
    fn two_blobs() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut points = blob(&mut rng, [10.0, 0.0, -1.0], 200);
        points.extend(blob(&mut rng, [20.0, 0.0, -1.0], 150));
        let clusters = cluster(&PointCloud::new(points), &DetectorConfig::default());
        assert_eq!(clusters.len(), 2);
        assert_eq!(clusters[0], (0..200).collect::<Vec<_>>());
        assert_eq!(clusters[1], (200..350).collect::<Vec<_>>());
    }

    #[test]
    fn single_blob() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let points = blob(&mut rng, [5.0, 3.0, 0.0], 100);
        let clusters = cluster(&PointCloud::new(points), &DetectorConfig::default());
        assert_eq!(clusters, vec![(0..100).collect::<Vec<_>>()]);
    }

    #[test]
    fn sparse_noise_has_no_clusters() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        // 300 points over 100 m x 100 m x 4 m: mean spacing far above the radius
        let points: Vec<Point> = (0..300)
            .map(|_| {
                Point::new(
                    rng.random_range(-50.0..50.0),
                    rng.random_range(-50.0..50.0),
                    rng.random_range(-2.0..2.0),
                    0.1,
                )
            })
            .collect();
        assert!(cluster(&PointCloud::new(points), &DetectorConfig::default()).is_empty());
    }

    #[test]
    fn clusters_are_disjoint() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut points = Vec::new();
        for k in 0..6 {
            points.extend(blob(&mut rng, [k as f32 * 1.5, 0.0, 0.0], 40));
        }
        let clusters = cluster(&PointCloud::new(points), &DetectorConfig::default());
        let mut seen = std::collections::HashSet::new();
        for c in &clusters {
            for i in c {
                assert!(seen.insert(*i));
            }
        }
    }
}
