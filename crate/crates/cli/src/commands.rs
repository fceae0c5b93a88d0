use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use dort_core::eval::{
    box_map, pareto_svg, sweep, tracklet_map, write_results_csv, CostModel, EvalSequence, SequenceBoxes, SweepConfig,
};
use dort_core::featmap::{FeatureExtractor, Tensor3};
use dort_core::geometry::BoundingBox;
use dort_core::pipeline::{
    read_decisions, run_with_features, write_decisions, CachedDetector, DecisionRecord, Detector, DetectorNoise, Mode,
    PipelineConfig, SimulatedDetector,
};
use dort_core::scheduler::{load_checkpoint, save_checkpoint, sidecar_path, train as fit, Action, LabelConfig, SchedulerConfig, SchedulerModel, TrainConfig};
use dort_core::synthdata::{
    build_scheduler_dataset, list_sequences, load_sequence, read_boxes, read_groundtruth, save_sequence, sequence_name,
    suite_scenes, write_boxes, DatasetConfig, GroundtruthTable, SuiteConfig,
};

use crate::manifest::RunManifest;
use crate::{worker_count, CliError, CliResult};

pub const MANIFEST: &str = "manifest.json";
pub const EVAL_MANIFEST: &str = "eval_manifest.json";

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

fn training(e: impl std::fmt::Display) -> CliError {
    CliError::Training(e.to_string())
}

fn eval_input(e: impl std::fmt::Display) -> CliError {
    CliError::EvalInput(e.to_string())
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// Order-preserving map over `items` split across `threads` scoped workers.
fn par_map<T: Sync, R: Send>(items: &[T], threads: usize, f: impl Fn(usize, &T) -> R + Sync) -> Vec<R> {
    let threads = threads.clamp(1, items.len().max(1));
    if threads == 1 {
        return items.iter().enumerate().map(|(i, t)| f(i, t)).collect();
    }
    let chunk = items.len().div_ceil(threads);
    let f = &f;
    std::thread::scope(|scope| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .enumerate()
            .map(|(c, part)| scope.spawn(move || part.iter().enumerate().map(|(k, t)| f(c * chunk + k, t)).collect::<Vec<_>>()))
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect()
    })
}

/// A sequence directory reduced to its feature maps; pixels are dropped once
/// extracted.
struct FeatureSequence {
    name: String,
    features: Vec<Arc<Tensor3>>,
    gt: Option<GroundtruthTable>,
}

struct FeatureSet {
    sequences: Vec<FeatureSequence>,
    frame_dims: (usize, usize),
    total_stride: usize,
}

fn load_features(root: &Path, extractor_seed: u64) -> dort_core::Result<FeatureSet> {
    let names = list_sequences(root)?;
    if names.is_empty() {
        return Err(dort_core::Error::Config(format!("no sequence directories under {}", root.display())));
    }
    let loaded = par_map(&names, worker_count(), |_, name| -> dort_core::Result<_> {
        let seq = load_sequence(&root.join(name))?;
        let first = &seq.frames[0];
        let dims = (first.height(), first.width());
        let fx = FeatureExtractor::new(extractor_seed, first.channels());
        let features = seq.frames.iter().map(|f| fx.extract(f).map(Arc::new)).collect::<dort_core::Result<Vec<_>>>()?;
        Ok((FeatureSequence { name: name.clone(), features, gt: seq.gt }, dims, fx.total_stride()))
    });
    let mut sequences = Vec::with_capacity(names.len());
    let mut shape = None;
    for item in loaded {
        let (seq, dims, stride) = item?;
        match shape {
            None => shape = Some((dims, stride)),
            Some((d, _)) if d != dims => {
                return Err(dort_core::Error::ShapeMismatch(format!("{} has frames {:?}, expected {:?}", seq.name, dims, d)));
            }
            _ => {}
        }
        sequences.push(seq);
    }
    let (frame_dims, total_stride) = shape.expect("at least one sequence");
    Ok(FeatureSet { sequences, frame_dims, total_stride })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerateParams {
    pub suite: SuiteConfig,
    pub seed: u64,
    pub out: PathBuf,
}

pub fn generate(p: &GenerateParams) -> CliResult<RunManifest> {
    let scenes = suite_scenes(&p.suite, p.seed).map_err(|e| CliError::Usage(format!("spec: {}", e)))?;
    fs::create_dir_all(&p.out).map_err(runtime)?;
    let mut manifest = RunManifest::start("generate", p, &[("scene", p.seed)]);
    let manifest_path = p.out.join(MANIFEST);
    manifest.write(&manifest_path)?;
    let spec_path = p.out.join("suite.toml");
    fs::write(&spec_path, toml::to_string(&p.suite).expect("suite serializes")).map_err(runtime)?;
    let mut artifacts = vec![spec_path];
    for (i, scene) in scenes.iter().enumerate() {
        let seq = dort_core::synthdata::generate(scene).map_err(|e| CliError::Usage(format!("spec: {}", e)))?;
        let name = sequence_name(i);
        save_sequence(&p.out, &name, &seq).map_err(runtime)?;
        artifacts.push(p.out.join(name));
    }
    println!("generated {} sequences of {} frames in {}", scenes.len(), p.suite.frames, p.out.display());
    manifest.finish(artifacts);
    manifest.write(&manifest_path)?;
    Ok(manifest)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainParams {
    pub data: PathBuf,
    /// Checkpoint path; the sidecar, loss curve and manifest sit next to it.
    pub out: PathBuf,
    /// Initialization seed of the scheduler head.
    pub seed: u64,
    pub extractor_seed: u64,
    pub dataset: DatasetConfig,
    pub train: TrainConfig,
    pub scheduler: SchedulerConfig,
}

pub fn train(p: &TrainParams) -> CliResult<RunManifest> {
    if let Some(parent) = p.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(runtime)?;
    }
    let seeds = [("init", p.seed), ("dataset", p.dataset.seed), ("train", p.train.seed), ("extractor", p.extractor_seed)];
    let mut manifest = RunManifest::start("train", p, &seeds);
    let manifest_path = with_suffix(&p.out, ".manifest.json");
    manifest.write(&manifest_path)?;

    if !p.data.is_dir() {
        return Err(CliError::Training(format!("data directory {} does not exist", p.data.display())));
    }
    let set = load_features(&p.data, p.extractor_seed).map_err(training)?;
    let mut pairs = Vec::with_capacity(set.sequences.len());
    for s in &set.sequences {
        let gt = s.gt.as_ref().ok_or_else(|| CliError::Training(format!("sequence {} has no gt.csv", s.name)))?;
        pairs.push((s.features.as_slice(), gt));
    }
    let labels = LabelConfig::new(set.total_stride, set.frame_dims);
    let dataset = build_scheduler_dataset(&pairs, &labels, &p.dataset).map_err(training)?;
    println!("dataset: {} pairs, {} detect, {} track", dataset.samples.len(), dataset.n_detect, dataset.n_track);

    let dims = set.sequences[0].features[0].dims();
    let mut model = SchedulerModel::new(dims, &p.scheduler, p.seed).map_err(training)?;
    let report = fit(&mut model, &dataset.samples, &p.train).map_err(training)?;

    save_checkpoint(&model, &p.out).map_err(runtime)?;
    let loss_path = with_suffix(&p.out, ".loss.csv");
    let mut loss = String::from("epoch,loss\n");
    for (e, l) in report.loss_curve.iter().enumerate() {
        writeln!(loss, "{},{}", e + 1, l).expect("string write");
    }
    fs::write(&loss_path, loss).map_err(runtime)?;
    if let Some(last) = report.loss_curve.last() {
        println!("final loss {:.6}", last);
    }
    println!("train_accuracy {}", report.train_accuracy);
    manifest.finish(vec![p.out.clone(), sidecar_path(&p.out), loss_path]);
    manifest.write(&manifest_path)?;
    Ok(manifest)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunParams {
    pub data: PathBuf,
    pub out: PathBuf,
    pub model: Option<PathBuf>,
    pub pipeline: PipelineConfig,
    pub noise: DetectorNoise,
    pub detector_seed: u64,
    /// Directory of `<sequence>.csv` detection caches replacing the simulated detector.
    pub detections: Option<PathBuf>,
    pub extractor_seed: u64,
}

fn check_pipeline(cfg: &PipelineConfig, model: Option<&Path>) -> CliResult<()> {
    if cfg.sigma == 0 {
        return Err(CliError::Usage("--sigma must be at least 1".into()));
    }
    if !(cfg.delta > 0.0 && cfg.delta < 1.0) {
        return Err(CliError::Usage(format!("--delta {} outside (0, 1)", cfg.delta)));
    }
    if cfg.mode == Mode::Dort && model.is_none() {
        return Err(CliError::Usage("--model is required with --mode dort".into()));
    }
    Ok(())
}

fn load_model(path: Option<&Path>) -> CliResult<Option<SchedulerModel>> {
    path.map(|m| load_checkpoint(m).map_err(|e| CliError::Runtime(format!("{}: {}", m.display(), e)))).transpose()
}

pub fn run(p: &RunParams) -> CliResult<RunManifest> {
    check_pipeline(&p.pipeline, p.model.as_deref())?;
    fs::create_dir_all(&p.out).map_err(runtime)?;
    let mut manifest = RunManifest::start("run", p, &[("detector", p.detector_seed), ("extractor", p.extractor_seed)]);
    let manifest_path = p.out.join(MANIFEST);
    manifest.write(&manifest_path)?;

    let model = load_model(p.model.as_deref())?;
    let set = load_features(&p.data, p.extractor_seed).map_err(runtime)?;
    if p.pipeline.mode == Mode::Oracle {
        if let Some(s) = set.sequences.iter().find(|s| s.gt.is_none()) {
            return Err(CliError::Runtime(format!("oracle mode needs groundtruth; {} has no gt.csv", s.name)));
        }
    }
    let outputs = par_map(&set.sequences, worker_count(), |i, s| -> CliResult<_> {
        let mut detector: Box<dyn Detector> = match (&p.detections, &s.gt) {
            (Some(dir), _) => Box::new(CachedDetector::new(read_boxes(&dir.join(format!("{}.csv", s.name))).map_err(runtime)?)),
            (None, Some(gt)) => Box::new(
                SimulatedDetector::new(gt.clone(), p.noise.clone(), p.detector_seed, i as u64, set.frame_dims).map_err(runtime)?,
            ),
            (None, None) => {
                return Err(CliError::Runtime(format!("{} has no gt.csv to simulate detections; pass --detections", s.name)));
            }
        };
        let out = run_with_features(
            &s.features,
            None,
            s.gt.as_ref(),
            detector.as_mut(),
            model.as_ref(),
            set.total_stride,
            set.frame_dims,
            &p.pipeline,
        )
        .map_err(|e| CliError::Runtime(format!("{}: {}", s.name, e)))?;
        Ok(out)
    });
    let cost = CostModel::default();
    let mut artifacts = Vec::new();
    for (s, out) in set.sequences.iter().zip(outputs) {
        let out = out?;
        let dir = p.out.join(&s.name);
        fs::create_dir_all(&dir).map_err(runtime)?;
        write_boxes(&dir.join("results.csv"), &out.boxes).map_err(runtime)?;
        write_decisions(&dir.join("decisions.csv"), &out.decisions).map_err(runtime)?;
        println!(
            "{}: {} frames, {} detect, {:.2} fps (cost model)",
            s.name,
            s.features.len(),
            out.detect_count(),
            dort_core::eval::effective_fps(&out.decisions, &cost)
        );
        artifacts.push(dir);
    }
    manifest.finish(artifacts);
    manifest.write(&manifest_path)?;
    Ok(manifest)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalParams {
    /// Directory of run outputs (`<sequence>/results.csv`); unused with a sweep.
    pub pred: Option<PathBuf>,
    /// Dataset root holding `<sequence>/gt.csv` (and frames, for a sweep).
    pub gt: PathBuf,
    pub out: PathBuf,
    pub sweep: Option<Vec<u32>>,
    pub modes: Vec<Mode>,
    pub model: Option<PathBuf>,
    pub pipeline: PipelineConfig,
    pub noise: DetectorNoise,
    pub detector_seed: u64,
    pub extractor_seed: u64,
    pub cost: CostModel,
    pub box_iou: f64,
    pub tracklet_iou: f64,
}

pub fn eval(p: &EvalParams) -> CliResult<RunManifest> {
    fs::create_dir_all(&p.out).map_err(runtime)?;
    let mut manifest = RunManifest::start("eval", p, &[("detector", p.detector_seed), ("extractor", p.extractor_seed)]);
    let manifest_path = p.out.join(EVAL_MANIFEST);
    manifest.write(&manifest_path)?;
    let artifacts = match &p.sweep {
        Some(sigmas) => eval_sweep(p, sigmas)?,
        None => eval_predictions(p)?,
    };
    manifest.finish(artifacts);
    manifest.write(&manifest_path)?;
    Ok(manifest)
}

fn prediction_names(pred: &Path) -> CliResult<Vec<String>> {
    let entries = fs::read_dir(pred).map_err(|e| CliError::EvalInput(format!("{}: {}", pred.display(), e)))?;
    let mut names = Vec::new();
    for entry in entries {
        let entry = entry.map_err(eval_input)?;
        if entry.path().join("results.csv").is_file() {
            names.push(entry.file_name().to_string_lossy().into_owned());
        }
    }
    names.sort();
    Ok(names)
}

struct SequenceEval {
    name: String,
    predictions: Vec<BoundingBox>,
    groundtruth: Vec<BoundingBox>,
    decisions: Option<Vec<DecisionRecord>>,
}

fn eval_predictions(p: &EvalParams) -> CliResult<Vec<PathBuf>> {
    let pred = p.pred.as_deref().ok_or_else(|| CliError::Usage("--pred is required without --sweep".into()))?;
    let names = prediction_names(pred)?;
    let gt_names = list_sequences(&p.gt).map_err(|e| CliError::EvalInput(format!("{}: {}", p.gt.display(), e)))?;
    if names.is_empty() {
        return Err(CliError::EvalInput(format!("no <sequence>/results.csv under {}", pred.display())));
    }
    if names != gt_names {
        return Err(CliError::EvalInput(format!(
            "sequence sets differ: predictions {:?}, groundtruth {:?}",
            names, gt_names
        )));
    }
    let mut seqs = Vec::with_capacity(names.len());
    for name in &names {
        let predictions = read_boxes(&pred.join(name).join("results.csv")).map_err(eval_input)?;
        let groundtruth = read_groundtruth(&p.gt.join(name).join("gt.csv")).map_err(eval_input)?.all_boxes();
        let log_path = pred.join(name).join("decisions.csv");
        let decisions = if log_path.is_file() { Some(read_decisions(&log_path).map_err(eval_input)?) } else { None };
        seqs.push(SequenceEval { name: name.clone(), predictions, groundtruth, decisions });
    }

    let mut table = String::from("sequence,box_map,tracklet_map,fps,n_detect,n_track\n");
    let metrics = |group: &[&SequenceEval]| -> CliResult<(f64, f64)> {
        let pairs: Vec<SequenceBoxes<'_>> =
            group.iter().map(|s| SequenceBoxes { predictions: &s.predictions, groundtruth: &s.groundtruth }).collect();
        let tmap = tracklet_map(&pairs, p.box_iou, p.tracklet_iou).map_err(eval_input)?;
        Ok((box_map(&pairs, p.box_iou).map, tmap.map))
    };
    let timing = |group: &[&SequenceEval]| -> Option<(f64, usize, usize)> {
        let logs: Option<Vec<&Vec<DecisionRecord>>> = group.iter().map(|s| s.decisions.as_ref()).collect();
        let logs = logs?;
        let frames: usize = logs.iter().map(|l| l.len() + 1).sum();
        let ms: f64 = logs.iter().map(|l| p.cost.sequence_ms(l)).sum();
        let detect: usize = logs.iter().map(|l| 1 + l.iter().filter(|d| d.action == Action::Detect).count()).sum();
        Some((1000.0 * frames as f64 / ms, detect, frames - detect))
    };
    let mut row = |label: &str, group: &[&SequenceEval]| -> CliResult<()> {
        let (bmap, tmap) = metrics(group)?;
        let (fps, nd, nt) = match timing(group) {
            Some((f, d, t)) => (f.to_string(), d.to_string(), t.to_string()),
            None => Default::default(),
        };
        writeln!(table, "{},{},{},{},{},{}", label, bmap, tmap, fps, nd, nt).expect("string write");
        println!("{:>10}  box mAP {:.4}  tracklet mAP {:.4}  fps {}", label, bmap, tmap, if fps.is_empty() { "-" } else { &fps });
        Ok(())
    };
    for s in &seqs {
        row(&s.name, &[s])?;
    }
    row("all", &seqs.iter().collect::<Vec<_>>())?;
    let path = p.out.join("metrics.csv");
    fs::write(&path, table).map_err(runtime)?;
    Ok(vec![path])
}

fn eval_sweep(p: &EvalParams, sigmas: &[u32]) -> CliResult<Vec<PathBuf>> {
    let mut check = p.pipeline.clone();
    for &mode in &p.modes {
        check.mode = mode;
        check_pipeline(&check, p.model.as_deref())?;
    }
    if sigmas.contains(&0) {
        return Err(CliError::Usage("sweep sigmas must be at least 1".into()));
    }
    let model = load_model(p.model.as_deref())?;
    let set = load_features(&p.gt, p.extractor_seed).map_err(|e| CliError::EvalInput(format!("{}: {}", p.gt.display(), e)))?;
    let mut sequences = Vec::with_capacity(set.sequences.len());
    for (i, s) in set.sequences.into_iter().enumerate() {
        let gt = s.gt.ok_or_else(|| CliError::EvalInput(format!("{} has no gt.csv", s.name)))?;
        sequences.push(EvalSequence { name: s.name, features: s.features, gt, stream: i as u64 });
    }
    let cfg = SweepConfig {
        sigmas: sigmas.to_vec(),
        modes: p.modes.clone(),
        pipeline: p.pipeline.clone(),
        noise: p.noise.clone(),
        detector_seed: p.detector_seed,
        cost: p.cost,
        total_stride: set.total_stride,
        frame_dims: set.frame_dims,
        threads: worker_count(),
    };
    let result = sweep(&sequences, model.as_ref(), &cfg).map_err(runtime)?;
    println!("{:>7} {:>5} {:>9} {:>9} {:>13} {:>8} {:>8}", "mode", "sigma", "fps", "box_mAP", "tracklet_mAP", "detect", "track");
    for r in &result.rows {
        println!(
            "{:>7} {:>5} {:>9.2} {:>9.4} {:>13.4} {:>8} {:>8}",
            r.mode.as_str(), r.sigma, r.fps, r.box_map, r.tracklet_map, r.n_detect, r.n_track
        );
    }
    let violations = result.oracle_violations();
    if !violations.is_empty() {
        println!("oracle below fixed at sigma {:?}", violations);
    }
    let csv_path = p.out.join("results.csv");
    let svg_path = p.out.join("pareto.svg");
    write_results_csv(&csv_path, &result).map_err(runtime)?;
    fs::write(&svg_path, pareto_svg(&result)).map_err(runtime)?;
    Ok(vec![csv_path, svg_path])
}

/// A command with its resolved parameters, as stored in a manifest.
#[derive(Clone, Debug, PartialEq)]
pub enum Command {
    Generate(GenerateParams),
    Train(TrainParams),
    Run(RunParams),
    Eval(EvalParams),
}

impl Command {
    pub fn from_manifest(m: &RunManifest) -> CliResult<Command> {
        let bad = |e: serde_json::Error| CliError::Usage(format!("manifest config for {}: {}", m.command, e));
        let c = m.config.clone();
        Ok(match m.command.as_str() {
            "generate" => Command::Generate(serde_json::from_value(c).map_err(bad)?),
            "train" => Command::Train(serde_json::from_value(c).map_err(bad)?),
            "run" => Command::Run(serde_json::from_value(c).map_err(bad)?),
            "eval" => Command::Eval(serde_json::from_value(c).map_err(bad)?),
            other => return Err(CliError::Usage(format!("unknown manifest command {:?}", other))),
        })
    }

    /// Redirects the outputs, keeping every other parameter.
    pub fn with_out(mut self, out: PathBuf) -> Command {
        match &mut self {
            Command::Generate(p) => p.out = out,
            Command::Train(p) => p.out = out,
            Command::Run(p) => p.out = out,
            Command::Eval(p) => p.out = out,
        }
        self
    }

    pub fn execute(&self) -> CliResult<RunManifest> {
        match self {
            Command::Generate(p) => generate(p),
            Command::Train(p) => train(p),
            Command::Run(p) => run(p),
            Command::Eval(p) => eval(p),
        }
    }
}

/// Re-executes the command recorded in a manifest, optionally writing to `out`.
pub fn replay(manifest: &Path, out: Option<PathBuf>) -> CliResult<RunManifest> {
    let m = RunManifest::read(manifest)?;
    if m.version != env!("CARGO_PKG_VERSION") {
        eprintln!("warning: manifest written by version {}, replaying with {}", m.version, env!("CARGO_PKG_VERSION"));
    }
    let mut cmd = Command::from_manifest(&m)?;
    if let Some(out) = out {
        cmd = cmd.with_out(out);
    }
    cmd.execute()
}
