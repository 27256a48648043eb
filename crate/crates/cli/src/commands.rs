use std::fs;
use std::path::{Path, PathBuf};

use anyhow::anyhow;
use chrono::Utc;
use rayon::prelude::*;
use sotifkit::baseline_detector::{detect_frame, DetectorConfig};
use sotifkit::box_geometry::IouMode;
use sotifkit::eval_metrics::{
    ap_table, evaluate as run_evaluation, load_predictions, pr_curve_csv, pr_curve_svg,
    recall_table, EvalConfig, EvalError, EvalReport, Interpolation,
};
use sotifkit::kitti_io::{
    read_calib, read_velodyne, validate_dataset, write_atomic, write_label_file, DatasetIndex,
    KittiError, Split,
};
use sotifkit::scenario_sim::{generate_dataset, SimConfig, SimError, DEFAULT_CONFIG_TOML};

use crate::failure::{Classify, Code, Failure};
use crate::manifest::RunManifest;
use crate::{
    DetectArgs, EvaluateArgs, GenerateArgs, InterpArg, IouModeArg, PlotArgs, ReportArgs,
    ValidateArgs,
};

const REPORT_FILE: &str = "report.json";

fn usage(msg: impl Into<String>) -> Failure {
    Failure::new(Code::Usage, anyhow!(msg.into()))
}

fn load_toml<T: serde::de::DeserializeOwned + Default>(path: Option<&Path>) -> Result<T, Failure> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = fs::read_to_string(path)
        .map_err(|e| usage(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn split_counts(index: &DatasetIndex) -> (usize, usize) {
    (
        index.frames_in(Split::Test).len(),
        index.frames_in(Split::Val).len(),
    )
}

fn open_dataset(root: &Path) -> Result<DatasetIndex, Failure> {
    validate_dataset(root).usage()
}

fn create_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir)
        .map_err(|e| Failure::new(Code::Runtime, anyhow!("{}: {e}", dir.display())))
}

pub fn generate(args: GenerateArgs) -> Result<(), Failure> {
    let started = Utc::now();
    let mut cfg = match &args.config {
        Some(path) => SimConfig::load(path).usage()?,
        None => SimConfig::from_toml(DEFAULT_CONFIG_TOML).runtime()?,
    };
    if let Some(seed) = args.seed {
        cfg.scenario.seed = seed;
    }
    cfg.validate().usage()?;
    let index = generate_dataset(&cfg, &args.out).map_err(|e| {
        let code = match e {
            SimError::InfeasibleConfig(_)
            | SimError::Config(_)
            | SimError::UnknownPreset(_)
            | SimError::OutputNotEmpty(_) => Code::Usage,
            _ => Code::Runtime,
        };
        Failure::new(code, e)
    })?;
    let (test, val) = split_counts(&index);
    println!(
        "wrote {} frames ({test} test, {val} val) to {}",
        index.frames.len(),
        args.out.display()
    );
    let mut manifest = RunManifest::new("generate", &cfg, started);
    manifest.seed = Some(cfg.scenario.seed);
    manifest.inputs = args.config.into_iter().collect();
    manifest.outputs = vec![args.out.clone()];
    manifest.write(&args.out).runtime()
}

pub fn validate(args: ValidateArgs) -> Result<(), Failure> {
    match validate_dataset(&args.dataset) {
        Ok(index) => {
            let (test, val) = split_counts(&index);
            println!(
                "{}: valid, {} frames ({test} test, {val} val)",
                args.dataset.display(),
                index.frames.len()
            );
            Ok(())
        }
        Err(KittiError::StructureViolation(violations)) => {
            for v in &violations {
                println!("{v}");
            }
            Err(usage(format!(
                "{}: {} violation(s)",
                args.dataset.display(),
                violations.len()
            )))
        }
        Err(e) => Err(Failure::new(Code::Usage, e)),
    }
}

pub fn detect(args: DetectArgs) -> Result<(), Failure> {
    let started = Utc::now();
    let cfg: DetectorConfig = load_toml(args.config.as_deref())?;
    cfg.validate().usage()?;
    let index = open_dataset(&args.dataset)?;
    create_dir(&args.out)?;
    let detections: usize = index
        .frames
        .par_iter()
        .map(|frame| -> anyhow::Result<usize> {
            let cloud = read_velodyne(&index.path("velodyne", *frame))?;
            let calib = read_calib(&index.path("calib", *frame))?;
            let preds = detect_frame(&cloud, &calib, &cfg)?;
            write_label_file(&preds, &args.out.join(format!("{frame}.txt")))?;
            Ok(preds.len())
        })
        .collect::<anyhow::Result<Vec<_>>>()
        .runtime()?
        .into_iter()
        .sum();
    println!(
        "{detections} detections over {} frames written to {}",
        index.frames.len(),
        args.out.display()
    );
    let mut manifest = RunManifest::new("detect", &cfg, started);
    manifest.inputs = std::iter::once(args.dataset.clone())
        .chain(args.config.clone())
        .collect();
    manifest.outputs = vec![args.out.clone()];
    manifest.write(&args.out).runtime()
}

fn eval_config(args: &EvaluateArgs) -> Result<EvalConfig, Failure> {
    let mut cfg: EvalConfig = load_toml(args.config.as_deref())?;
    if !args.iou.is_empty() {
        cfg.ap_thresholds = args.iou.clone();
    }
    if let Some(interp) = args.interp {
        cfg.interpolation = match interp {
            InterpArg::Ap11 => Interpolation::Ap11,
            InterpArg::Ap40 => Interpolation::Ap40,
            InterpArg::Both => Interpolation::Both,
        };
    }
    if let Some(mode) = args.iou_mode {
        cfg.iou_mode = match mode {
            IouModeArg::ThreeD => IouMode::ThreeD,
            IouModeArg::Bev => IouMode::Bev,
        };
    }
    cfg.validate().usage()?;
    Ok(cfg)
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    write_atomic(path, text.as_bytes()).runtime()
}

fn read_report(path: &Path) -> Result<EvalReport, Failure> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

/// CSV per (difficulty, threshold) and one SVG per threshold.
fn write_curves(report: &EvalReport, dir: &Path) -> Result<Vec<PathBuf>, Failure> {
    create_dir(dir)?;
    let mut written = Vec::new();
    for entry in &report.ap {
        let name = format!(
            "pr_{}_iou{:.2}.csv",
            entry.difficulty.to_string().to_lowercase(),
            entry.iou_threshold
        );
        write_text(&dir.join(&name), &pr_curve_csv(entry))?;
        written.push(dir.join(name));
    }
    for &t in &report.config.ap_thresholds {
        let entries: Vec<(String, _)> = report
            .ap
            .iter()
            .filter(|e| e.iou_threshold == t)
            .map(|e| (e.difficulty.to_string(), e))
            .collect();
        let title = format!("{}: precision/recall at IoU {t:.2}", report.method);
        let name = format!("pr_iou{t:.2}.svg");
        write_text(&dir.join(&name), &pr_curve_svg(&title, &entries))?;
        written.push(dir.join(name));
    }
    Ok(written)
}

pub fn evaluate(args: EvaluateArgs) -> Result<(), Failure> {
    let started = Utc::now();
    let cfg = eval_config(&args)?;
    let index = open_dataset(&args.dataset)?;
    let predictions = load_predictions(&args.predictions).usage()?;
    if predictions.is_empty() {
        return Err(Failure::new(
            Code::Empty,
            anyhow!("{}: no prediction files", args.predictions.display()),
        ));
    }
    if !predictions.keys().any(|f| index.frames.contains(f)) {
        return Err(Failure::new(
            Code::Empty,
            anyhow!("no prediction file matches a dataset frame"),
        ));
    }
    let mut report = run_evaluation(&index, &predictions, &cfg).map_err(|e| {
        let code = match e {
            EvalError::PredictionForUnknownFrame(_)
            | EvalError::MissingScore { .. }
            | EvalError::InvalidConfig(_)
            | EvalError::Kitti(_)
            | EvalError::Geometry(_) => Code::Usage,
            EvalError::NoGroundTruth => Code::Runtime,
        };
        Failure::new(code, e)
    })?;
    report.method = args.method.clone().unwrap_or_else(|| {
        args.predictions
            .file_name()
            .map_or_else(|| "predictions".to_string(), |n| n.to_string_lossy().into_owned())
    });
    report.predictions = args.predictions.display().to_string();

    create_dir(&args.out)?;
    let reports = std::slice::from_ref(&report);
    let ap = ap_table(reports);
    let recall = recall_table(reports);
    let json = serde_json::to_string_pretty(&report).runtime()?;
    write_text(&args.out.join(REPORT_FILE), &json)?;
    write_text(&args.out.join("ap_table.txt"), &ap)?;
    write_text(&args.out.join("recall_table.txt"), &recall)?;
    let mut outputs = vec![
        args.out.join(REPORT_FILE),
        args.out.join("ap_table.txt"),
        args.out.join("recall_table.txt"),
    ];
    outputs.extend(write_curves(&report, &args.out.join("pr_curves"))?);
    println!("{ap}\n{recall}");

    let mut manifest = RunManifest::new("evaluate", &cfg, started);
    manifest.inputs = [args.dataset.clone(), args.predictions.clone()]
        .into_iter()
        .chain(args.config.clone())
        .collect();
    manifest.outputs = outputs;
    manifest.write(&args.out).runtime()
}

pub fn report(args: ReportArgs) -> Result<(), Failure> {
    let reports = args
        .reports
        .iter()
        .map(|p| read_report(p))
        .collect::<Result<Vec<_>, _>>()?;
    let text = format!("{}\n{}", ap_table(&reports), recall_table(&reports));
    print!("{text}");
    if let Some(out) = &args.out {
        write_text(out, &text)?;
    }
    Ok(())
}

pub fn plot(args: PlotArgs) -> Result<(), Failure> {
    let started = Utc::now();
    let report = read_report(&args.report)?;
    let written = write_curves(&report, &args.out)?;
    println!("wrote {} files to {}", written.len(), args.out.display());
    let mut manifest = RunManifest::new("plot", &report.config, started);
    manifest.inputs = vec![args.report.clone()];
    manifest.outputs = written;
    manifest.write(&args.out).runtime()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_config_file_is_usage_error() {
        let err = load_toml::<DetectorConfig>(Some(Path::new("/nonexistent/detector.toml"))).unwrap_err();
        assert_eq!(err.code, Code::Usage);
    }

    #[test]
    fn detector_config_from_partial_toml() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.toml");
        fs::write(&path, "cluster_radius = 0.5\n").unwrap();
        let cfg: DetectorConfig = load_toml(Some(&path)).unwrap();
        assert_eq!(cfg.cluster_radius, 0.5);
        assert_eq!(cfg.min_cluster_points, DetectorConfig::default().min_cluster_points);
    }
}
