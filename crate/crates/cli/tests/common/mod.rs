#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use sha2::{Digest, Sha256};
use walkdir::WalkDir;

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn sotifkit(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_sotifkit"))
        .args(args)
        .output()
        .expect("binary runs");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

pub fn s(path: &Path) -> &str {
    path.to_str().expect("utf-8 path")
}

/// sha256 over relative paths and contents of every file below `root`,
/// skipping per-run manifests (they carry timestamps).
pub fn tree_hash(root: &Path) -> String {
    let mut hasher = Sha256::new();
    for entry in WalkDir::new(root).sort_by_file_name() {
        let entry = entry.unwrap();
        if !entry.file_type().is_file() || entry.file_name() == "run_manifest.json" {
            continue;
        }
        hasher.update(entry.path().strip_prefix(root).unwrap().to_string_lossy().as_bytes());
        hasher.update([0]);
        hasher.update(fs::read(entry.path()).unwrap());
    }
    hex::encode(hasher.finalize())
}

pub fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn eval_fixture() -> PathBuf {
    workspace_root().join("crates/core/tests/fixtures/eval")
}

pub fn short_config() -> PathBuf {
    workspace_root().join("configs/clear_noon_short.toml")
}

pub fn count_files(dir: &Path, ext: &str) -> usize {
    fs::read_dir(dir)
        .unwrap()
        .filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == ext))
        .count()
}
