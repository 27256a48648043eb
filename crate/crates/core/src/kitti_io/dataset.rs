use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{write_atomic, KittiError};

/// Per-frame directories and the file extension each one holds.
pub const DATASET_DIRS: [(&str, &str); 4] = [
    ("velodyne", "bin"),
    ("label_2", "txt"),
    ("calib", "txt"),
    ("image_2", "png"),
];

const IMAGE_SETS: &str = "ImageSets";
const PNG_MAGIC: [u8; 8] = [0x89, b'P', b'N', b'G', 0x0d, 0x0a, 0x1a, 0x0a];

/// A frame identifier, rendered as six zero-padded digits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct FrameId(pub u32);

impl fmt::Display for FrameId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:06}", self.0)
    }
}

impl FromStr for FrameId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.len() == 6 && s.bytes().all(|b| b.is_ascii_digit()) {
            Ok(FrameId(s.parse().unwrap()))
        } else {
            Err(format!("{s:?} is not a six-digit frame id"))
        }
    }
}

impl From<FrameId> for String {
    fn from(id: FrameId) -> Self {
        id.to_string()
    }
}

impl TryFrom<String> for FrameId {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Test,
    Val,
}

impl Split {
    pub const ALL: [Split; 2] = [Split::Test, Split::Val];

    pub fn file_name(self) -> &'static str {
        match self {
            Split::Test => "test.txt",
            Split::Val => "val.txt",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Test => "test",
            Split::Val => "val",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    MissingDirectory(String),
    MissingSplitFile(Split),
    MalformedFrameId { split: Split, line: usize, text: String },
    UnsortedSplit { split: Split, frame: FrameId },
    SplitOverlap(FrameId),
    MissingFile { frame: FrameId, dir: &'static str },
    OrphanFile(PathBuf),
    InvalidPng(FrameId),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MissingDirectory(dir) => write!(f, "directory {dir}/ is missing"),
            Violation::MissingSplitFile(split) => {
                write!(f, "{IMAGE_SETS}/{} is missing", split.file_name())
            }
            Violation::MalformedFrameId { split, line, text } => {
                write!(f, "{IMAGE_SETS}/{}:{line}: malformed frame id {text:?}", split.file_name())
            }
            Violation::UnsortedSplit { split, frame } => write!(
                f,
                "{IMAGE_SETS}/{}: frame {frame} is not in strictly increasing order",
                split.file_name()
            ),
            Violation::SplitOverlap(frame) => write!(f, "frame {frame} is listed in both splits"),
            Violation::MissingFile { frame, dir } => write!(f, "frame {frame}: no file in {dir}/"),
            Violation::OrphanFile(path) => {
                write!(f, "{} does not belong to any listed frame", path.display())
            }
            Violation::InvalidPng(frame) => write!(f, "frame {frame}: image is not a PNG file"),
        }
    }
}

/// A validated dataset tree.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetIndex {
    pub root: PathBuf,
    pub frames: Vec<FrameId>,
    pub splits: BTreeMap<FrameId, Split>,
}

impl DatasetIndex {
    pub fn path(&self, dir: &str, frame: FrameId) -> PathBuf {
        frame_file(&self.root, dir, frame)
    }

    pub fn frames_in(&self, split: Split) -> Vec<FrameId> {
        self.frames
            .iter()
            .copied()
            .filter(|f| self.splits.get(f) == Some(&split))
            .collect()
    }
}

/// Path of a per-frame file, e.g. `root/velodyne/000042.bin`.
pub fn frame_file(root: &Path, dir: &str, frame: FrameId) -> PathBuf {
    let ext = DATASET_DIRS
        .iter()
        .find(|(d, _)| *d == dir)
        .map(|(_, e)| *e)
        .unwrap_or("txt");
    root.join(dir).join(format!("{frame}.{ext}"))
}

pub fn write_split_file(root: &Path, split: Split, frames: &[FrameId]) -> Result<(), KittiError> {
    let dir = root.join(IMAGE_SETS);
    fs::create_dir_all(&dir).map_err(|e| KittiError::io(&dir, e))?;
    let text: String = frames.iter().map(|f| format!("{f}\n")).collect();
    write_atomic(&dir.join(split.file_name()), text.as_bytes())
}

fn read_split(root: &Path, split: Split, violations: &mut Vec<Violation>) -> Vec<FrameId> {
    let path = root.join(IMAGE_SETS).join(split.file_name());
    let Ok(text) = fs::read_to_string(&path) else {
        violations.push(Violation::MissingSplitFile(split));
        return Vec::new();
    };
    let mut frames: Vec<FrameId> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        match line.parse::<FrameId>() {
            Ok(frame) => {
                if frames.last().is_some_and(|last| *last >= frame) {
                    violations.push(Violation::UnsortedSplit { split, frame });
                }
                frames.push(frame);
            }
            Err(_) => violations.push(Violation::MalformedFrameId {
                split,
                line: i + 1,
                text: line.to_string(),
            }),
        }
    }
    frames
}

/// Checks the tree shape: both split files present, every listed frame in
/// exactly one split with exactly one file in each per-frame directory, no
/// stray files, and PNG magic bytes on every image. Root-level files outside
/// the per-frame directories (manifests) are not inspected.
pub fn validate_dataset(root: &Path) -> Result<DatasetIndex, KittiError> {
    if !root.is_dir() {
        return Err(KittiError::io(
            root,
            std::io::Error::new(std::io::ErrorKind::NotFound, "dataset root is not a directory"),
        ));
    }
    let mut violations = Vec::new();
    let mut splits: BTreeMap<FrameId, Split> = BTreeMap::new();
    for split in Split::ALL {
        for frame in read_split(root, split, &mut violations) {
            if splits.insert(frame, split).is_some() {
                violations.push(Violation::SplitOverlap(frame));
            }
        }
    }
    let frames: Vec<FrameId> = splits.keys().copied().collect();
    let listed: BTreeSet<FrameId> = frames.iter().copied().collect();

    for (dir, ext) in DATASET_DIRS {
        let dir_path = root.join(dir);
        let Ok(entries) = fs::read_dir(&dir_path) else {
            violations.push(Violation::MissingDirectory(dir.to_string()));
            continue;
        };
        let mut present = BTreeSet::new();
        let mut names: Vec<PathBuf> = entries.filter_map(|e| e.ok()).map(|e| e.path()).collect();
        names.sort();
        for path in names {
            let frame = path
                .extension()
                .filter(|e| *e == ext)
                .and_then(|_| path.file_stem())
                .and_then(|s| s.to_str())
                .and_then(|s| s.parse::<FrameId>().ok())
                .filter(|f| listed.contains(f) && path.is_file());
            match frame {
                Some(frame) => {
                    present.insert(frame);
                }
                None => violations.push(Violation::OrphanFile(
                    path.strip_prefix(root).unwrap_or(&path).to_path_buf(),
                )),
            }
        }
        for frame in &frames {
            if !present.contains(frame) {
                violations.push(Violation::MissingFile { frame: *frame, dir });
            } else if dir == "image_2" && !has_png_magic(&frame_file(root, dir, *frame)) {
                violations.push(Violation::InvalidPng(*frame));
            }
        }
    }

    if violations.is_empty() {
        Ok(DatasetIndex {
            root: root.to_path_buf(),
            frames,
            splits,
        })
    } else {
        Err(KittiError::StructureViolation(violations))
    }
}

fn has_png_magic(path: &Path) -> bool {
    use std::io::Read;
    let mut magic = [0u8; 8];
    fs::File::open(path)
        .and_then(|mut f| f.read_exact(&mut magic))
        .map(|_| magic == PNG_MAGIC)
        .unwrap_or(false)
}
