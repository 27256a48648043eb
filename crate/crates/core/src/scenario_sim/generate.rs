use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    build_timeline, occlusion_grade, render_bev_png, sensor_scene, simulate_sweep, HitSource,
    LidarConfig, LidarSweep, SceneState, SimConfig, SimError, MIN_RETURNS,
};
use crate::box_geometry::{box_to_label, label_to_box, CameraRig, GeometryError};
use crate::kitti_io::{
    frame_file, parse_label_line, serialize_label, validate_dataset, write_atomic, write_calib,
    write_label_file, write_split_file, write_velodyne, CalibrationSet, DatasetIndex, FrameId,
    LabelRecord, Split, DATASET_DIRS,
};

/// Sidecar file at the dataset root tying each frame to its scene state.
pub const MANIFEST_FILE: &str = "manifest.json";

/// Points are counted inside a label box grown by this much, metres. Covers
/// the two-decimal rounding of the stored label.
pub const LABEL_POINT_MARGIN: f64 = 0.03;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameManifest {
    pub weather: String,
    pub state_hash: String,
    pub sim_step: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub seed: u64,
    pub frames: BTreeMap<FrameId, FrameManifest>,
}

/// Seed of one frame's LiDAR noise, derived from the run seed.
pub fn frame_seed(seed: u64, frame_index: u32) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::from(frame_index) + 1);
    rng.next_u64()
}

/// Ground-truth labels for the vehicles that appear in the camera image and
/// have at least [`MIN_RETURNS`] of `sweep`'s returns inside their stored
/// (rounded) box, in vehicle-id order.
pub fn labels_for_frame(
    state: &SceneState,
    lidar: &LidarConfig,
    sweep: &LidarSweep,
    calib: &CalibrationSet,
) -> Result<Vec<LabelRecord>, SimError> {
    let rig = CameraRig::new(calib)?;
    let scene = sensor_scene(state, lidar);
    let mut labels = Vec::new();
    for ob in &scene {
        let cam = rig.lidar_to_camera(&ob.bbox)?;
        let mut rec = match box_to_label(&cam, calib.p2()) {
            Ok(rec) => rec,
            Err(GeometryError::BehindCamera) => continue,
            Err(e) => return Err(e.into()),
        };
        rec.occlusion = occlusion_grade(&scene, ob.id);
        let stored = parse_label_line(&serialize_label(&rec), false)?;
        if stored.truncation >= 1.0 {
            continue;
        }
        let back = rig.camera_to_lidar(&label_to_box(&stored)?)?;
        let returns = sweep
            .cloud
            .points
            .iter()
            .zip(&sweep.sources)
            .filter(|(p, src)| {
                **src == HitSource::Vehicle(ob.id)
                    && back.contains(
                        &nalgebra::Vector3::new(p.x as f64, p.y as f64, p.z as f64),
                        LABEL_POINT_MARGIN,
                    )
            })
            .count();
        if returns >= MIN_RETURNS {
            labels.push(stored);
        }
    }
    Ok(labels)
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> SimError + '_ {
    move |source| SimError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn prepare_output(root: &Path) -> Result<(), SimError> {
    if root.exists() {
        let mut entries = fs::read_dir(root).map_err(io_err(root))?;
        if entries.next().is_some() {
            return Err(SimError::OutputNotEmpty(root.to_path_buf()));
        }
    }
    for dir in DATASET_DIRS.iter().map(|(d, _)| *d).chain(["ImageSets"]) {
        let path = root.join(dir);
        fs::create_dir_all(&path).map_err(io_err(&path))?;
    }
    Ok(())
}

/// Simulates the configured run and writes it under `out_root` as a KITTI
/// tree plus [`MANIFEST_FILE`]. `out_root` must be absent or empty.
///
/// Recorded frames are every `record_every`-th simulation step starting at
/// step 0. The first `test_val_split[0]` frames form the test split.
pub fn generate_dataset(cfg: &SimConfig, out_root: &Path) -> Result<DatasetIndex, SimError> {
    cfg.validate()?;
    let scenario = &cfg.scenario;
    let table = cfg.table()?;
    let total = scenario.total_recorded_frames as usize;
    let presets = cfg.schedule().assign(&table, total)?;
    let timeline = build_timeline(scenario)?;
    prepare_output(out_root)?;

    let calib = CalibrationSet::generated_default();
    let recorded: Vec<&SceneState> = timeline
        .iter()
        .step_by(scenario.record_every as usize)
        .take(total)
        .collect();

    let entries = recorded
        .par_iter()
        .zip(presets.par_iter())
        .enumerate()
        .map(|(i, (state, weather))| {
            let frame = FrameId(i as u32);
            let scene = sensor_scene(state, &cfg.lidar);
            let sweep = simulate_sweep(&scene, &cfg.lidar, weather, frame_seed(scenario.seed, frame.0));
            let labels = labels_for_frame(state, &cfg.lidar, &sweep, &calib)?;
            let png = render_bev_png(state, &cfg.lidar, &sweep.cloud)?;

            write_velodyne(&sweep.cloud, &frame_file(out_root, "velodyne", frame))?;
            write_label_file(&labels, &frame_file(out_root, "label_2", frame))?;
            write_calib(&calib, &frame_file(out_root, "calib", frame))?;
            write_atomic(&frame_file(out_root, "image_2", frame), &png)?;
            Ok((
                frame,
                FrameManifest {
                    weather: weather.name.clone(),
                    state_hash: state.state_hash(),
                    sim_step: state.step,
                },
            ))
        })
        .collect::<Result<BTreeMap<_, _>, SimError>>()?;

    let frames: Vec<FrameId> = entries.keys().copied().collect();
    let test_len = scenario.test_val_split[0] as usize;
    write_split_file(out_root, Split::Test, &frames[..test_len])?;
    write_split_file(out_root, Split::Val, &frames[test_len..])?;

    let manifest = Manifest {
        seed: scenario.seed,
        frames: entries,
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write_atomic(&out_root.join(MANIFEST_FILE), json.as_bytes())?;

    Ok(validate_dataset(out_root)?)
}

pub fn read_manifest(root: &Path) -> Result<Manifest, SimError> {
    let path = root.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    serde_json::from_str(&text).map_err(|e| SimError::Config(format!("{}: {e}", path.display())))
}
