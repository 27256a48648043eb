use std::fmt;

use serde::{Deserialize, Serialize};

use crate::kitti_io::LabelRecord;

/// KITTI difficulty level of a ground-truth object.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Difficulty {
    Easy,
    Moderate,
    Hard,
    Ignored,
}

impl Difficulty {
    pub const LEVELS: [Difficulty; 3] = [Difficulty::Easy, Difficulty::Moderate, Difficulty::Hard];

    /// (min 2D box height px, max occlusion, max truncation); `None` for Ignored.
    pub fn limits(self) -> Option<(f64, i8, f64)> {
        match self {
            Difficulty::Easy => Some((40.0, 0, 0.15)),
            Difficulty::Moderate => Some((25.0, 1, 0.30)),
            Difficulty::Hard => Some((25.0, 2, 0.50)),
            Difficulty::Ignored => None,
        }
    }

    /// Whether `rec` satisfies this level's limits. Levels are cumulative:
    /// an Easy object also meets Moderate and Hard.
    pub fn admits(self, rec: &LabelRecord) -> bool {
        self.limits().is_some_and(|(height, occlusion, truncation)| {
            rec.bbox2d.height() >= height
                && (0..=occlusion).contains(&rec.occlusion)
                && (0.0..=truncation).contains(&rec.truncation)
        })
    }
}

impl fmt::Display for Difficulty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Difficulty::Easy => "Easy",
            Difficulty::Moderate => "Moderate",
            Difficulty::Hard => "Hard",
            Difficulty::Ignored => "Ignored",
        })
    }
}

/// The strictest level `rec` qualifies for.
pub fn assign_difficulty(rec: &LabelRecord) -> Difficulty {
    Difficulty::LEVELS
        .into_iter()
        .find(|level| level.admits(rec))
        .unwrap_or(Difficulty::Ignored)
}

/// A set of ground truths that is evaluated together.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bucket {
    Easy,
    Moderate,
    Hard,
    /// Every Car ground truth regardless of size, occlusion or truncation.
    Overall,
}

impl Bucket {
    pub const ALL: [Bucket; 4] = [Bucket::Easy, Bucket::Moderate, Bucket::Hard, Bucket::Overall];

    pub fn difficulty(self) -> Option<Difficulty> {
        match self {
            Bucket::Easy => Some(Difficulty::Easy),
            Bucket::Moderate => Some(Difficulty::Moderate),
            Bucket::Hard => Some(Difficulty::Hard),
            Bucket::Overall => None,
        }
    }

    pub fn admits(self, rec: &LabelRecord) -> bool {
        self.difficulty().is_none_or(|d| d.admits(rec))
    }

    /// Unmatched predictions whose 2D box is shorter than this are not
    /// counted as false positives.
    pub fn min_pred_height(self) -> f64 {
        self.difficulty()
            .and_then(Difficulty::limits)
            .map_or(0.0, |(h, _, _)| h)
    }
}

impl From<Difficulty> for Bucket {
    fn from(d: Difficulty) -> Self {
        match d {
            Difficulty::Easy => Bucket::Easy,
            Difficulty::Moderate => Bucket::Moderate,
            Difficulty::Hard => Bucket::Hard,
            Difficulty::Ignored => Bucket::Overall,
        }
    }
}

impl fmt::Display for Bucket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.difficulty() {
            Some(d) => d.fmt(f),
            None => f.write_str("Overall"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kitti_io::{BBox2D, Dimensions};

    fn gt(height: f64, occlusion: i8, truncation: f64) -> LabelRecord {
        LabelRecord {
            class_name: "Car".into(),
            truncation,
            occlusion,
            alpha: 0.0,
            bbox2d: BBox2D {
                left: 100.0,
                top: 100.0,
                right: 150.0,
                bottom: 100.0 + height,
            },
            dims: Dimensions {
                height: 1.5,
                width: 1.8,
                length: 4.5,
            },
            location: [0.0, 1.7, 20.0],
            rotation_y: 0.0,
            score: None,
        }
    }

    #[test]
    fn examples() {
        assert_eq!(assign_difficulty(&gt(50.0, 0, 0.0)), Difficulty::Easy);
        assert_eq!(assign_difficulty(&gt(30.0, 1, 0.2)), Difficulty::Moderate);
        assert_eq!(assign_difficulty(&gt(20.0, 0, 0.0)), Difficulty::Ignored);
    }

    #[test]
    fn boundaries() {
        assert_eq!(assign_difficulty(&gt(40.0, 0, 0.15)), Difficulty::Easy);
        assert_eq!(assign_difficulty(&gt(39.99, 0, 0.0)), Difficulty::Moderate);
        assert_eq!(assign_difficulty(&gt(25.0, 2, 0.5)), Difficulty::Hard);
        assert_eq!(assign_difficulty(&gt(60.0, 3, 0.0)), Difficulty::Ignored);
        assert_eq!(assign_difficulty(&gt(60.0, 0, 0.51)), Difficulty::Ignored);
    }

    #[test]
    fn buckets_are_cumulative() {
        let easy = gt(50.0, 0, 0.0);
        assert!(Bucket::ALL.iter().all(|b| b.admits(&easy)));
        let hard = gt(30.0, 2, 0.4);
        assert!(!Bucket::Easy.admits(&hard) && !Bucket::Moderate.admits(&hard));
        assert!(Bucket::Hard.admits(&hard) && Bucket::Overall.admits(&hard));
        assert!(Bucket::Overall.admits(&gt(5.0, 3, 0.9)));
    }
}
