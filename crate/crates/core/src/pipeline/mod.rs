//! The sequential detect-or-track loop.
//!
//! Frame 1 is always detected. Each later frame either runs the detector and
//! inherits ids from the previous frame's boxes, or propagates the keyframe
//! detections with the RoI tracker. Output for frame `i` is final before frame
//! `i + 1` is read.

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::association::{associate, IdCounter};
use crate::featmap::{FeatureExtractor, Image, Tensor3};
use crate::geometry::BoundingBox;
use crate::scheduler::{label_pair, schedule, Action, LabelConfig, SchedulerModel, SchedulerState};
use crate::synthdata::GroundtruthTable;
use crate::tracker::{roi_track_all, TrackState, TrackerConfig};
use crate::{Error, Result};

mod detector;

pub use detector::{CachedDetector, Detector, DetectorNoise, SimulatedDetector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Learned scheduler, consulted every `sigma` frames.
    Dort,
    /// Detect every `sigma` frames, track in between.
    Fixed,
    /// Groundtruth labels, consulted every `sigma` frames.
    Oracle,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Dort => "dort",
            Mode::Fixed => "fixed",
            Mode::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Mode> {
        match s {
            "dort" => Ok(Mode::Dort),
            "fixed" => Ok(Mode::Fixed),
            "oracle" => Ok(Mode::Oracle),
            other => Err(Error::Config(format!("unknown mode {:?}", other))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub sigma: u32,
    /// Minimum track probability for the scheduler to choose track.
    pub delta: f64,
    pub mode: Mode,
    /// Association gate: pairs below this IOU never share an id.
    pub gate_iou: f64,
    /// IOU a tracked box must keep for an oracle track label.
    pub label_iou: f64,
    pub tracker: TrackerConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig { sigma: 10, delta: 0.97, mode: Mode::Dort, gate_iou: 0.3, label_iou: 0.8, tracker: TrackerConfig::default() }
    }
}

/// Who produced a frame's action.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecisionSource {
    Scheduler,
    Oracle,
    Fixed,
    /// Between consultations; track without asking anyone.
    Stride,
}

impl DecisionSource {
    pub fn as_str(self) -> &'static str {
        match self {
            DecisionSource::Scheduler => "scheduler",
            DecisionSource::Oracle => "oracle",
            DecisionSource::Fixed => "fixed",
            DecisionSource::Stride => "stride",
        }
    }

    pub fn parse(s: &str) -> Option<DecisionSource> {
        match s {
            "scheduler" => Some(DecisionSource::Scheduler),
            "oracle" => Some(DecisionSource::Oracle),
            "fixed" => Some(DecisionSource::Fixed),
            "stride" => Some(DecisionSource::Stride),
            _ => None,
        }
    }

    /// Whether a decision model was run for this frame.
    pub fn consulted(self) -> bool {
        matches!(self, DecisionSource::Scheduler | DecisionSource::Oracle)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionRecord {
    pub frame: u32,
    pub source: DecisionSource,
    pub p_track: Option<f64>,
    pub action: Action,
    /// Keyframe the decision compared against.
    pub reference: u32,
    /// Keyframe after acting: the last detect event at or before `frame`.
    pub keyframe: u32,
}

/// Boxes of one frame plus the decision that produced them (none for frame 1).
#[derive(Clone, Debug, PartialEq)]
pub struct FrameOutput {
    pub boxes: Vec<BoundingBox>,
    pub decision: Option<DecisionRecord>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PipelineOutput {
    /// Every emitted box, frame by frame.
    pub boxes: Vec<BoundingBox>,
    /// One record per frame after the first.
    pub decisions: Vec<DecisionRecord>,
}

impl PipelineOutput {
    pub fn detect_count(&self) -> usize {
        1 + self.decisions.iter().filter(|d| d.action == Action::Detect).count()
    }
}

/// Streaming detect-or-track state for one video.
pub struct Pipeline<'a> {
    cfg: PipelineConfig,
    scheduler: Option<&'a SchedulerModel>,
    total_stride: usize,
    frame_dims: (usize, usize),
    ids: IdCounter,
    frame: u32,
    keyframe: u32,
    keyframe_feature: Option<Arc<Tensor3>>,
    keyframe_gt: Vec<BoundingBox>,
    last_consulted: u32,
    track: Option<TrackState>,
    prev_boxes: Vec<BoundingBox>,
}

impl<'a> Pipeline<'a> {
    /// `frame_dims` is `(height, width)` in pixels; `total_stride` is the
    /// feature extractor's stride.
    pub fn new(
        cfg: &PipelineConfig,
        scheduler: Option<&'a SchedulerModel>,
        total_stride: usize,
        frame_dims: (usize, usize),
    ) -> Result<Pipeline<'a>> {
        if cfg.sigma == 0 {
            return Err(Error::Config("sigma must be at least 1".into()));
        }
        if cfg.mode == Mode::Dort && scheduler.is_none() {
            return Err(Error::Config("dort mode needs a scheduler model".into()));
        }
        Ok(Pipeline {
            cfg: cfg.clone(),
            scheduler,
            total_stride,
            frame_dims,
            ids: IdCounter::default(),
            frame: 0,
            keyframe: 0,
            keyframe_feature: None,
            keyframe_gt: Vec::new(),
            last_consulted: 0,
            track: None,
            prev_boxes: Vec::new(),
        })
    }

    pub fn keyframe(&self) -> u32 {
        self.keyframe
    }

    fn decide(&self, i: u32, feature: &Arc<Tensor3>, gt: Option<&[BoundingBox]>) -> Result<(DecisionSource, Option<f64>, Action)> {
        let cfg = &self.cfg;
        if cfg.mode == Mode::Fixed {
            let a = if i - self.keyframe >= cfg.sigma { Action::Detect } else { Action::Track };
            return Ok((DecisionSource::Fixed, None, a));
        }
        if i - self.last_consulted < cfg.sigma {
            return Ok((DecisionSource::Stride, None, Action::Track));
        }
        let key = self.keyframe_feature.as_ref().expect("frame 1 sets the keyframe");
        match cfg.mode {
            Mode::Dort => {
                let model = self.scheduler.expect("checked in new");
                let state = SchedulerState::new(self.keyframe, Arc::clone(key), i, Arc::clone(feature))?;
                let (p, _) = schedule(model, &state)?;
                let a = if p >= cfg.delta { Action::Track } else { Action::Detect };
                Ok((DecisionSource::Scheduler, Some(p), a))
            }
            Mode::Oracle => {
                let gt = gt.ok_or(Error::MissingGroundtruth)?;
                let label_cfg = LabelConfig {
                    iou_threshold: cfg.label_iou,
                    total_stride: self.total_stride,
                    frame_dims: self.frame_dims,
                    tracker: cfg.tracker,
                };
                let a = label_pair(&self.keyframe_gt, gt, key, feature, &label_cfg)?;
                Ok((DecisionSource::Oracle, None, a))
            }
            Mode::Fixed => unreachable!(),
        }
    }

    /// Processes the next frame. `gt` is that frame's groundtruth, required in
    /// oracle mode.
    pub fn step(
        &mut self,
        feature: Arc<Tensor3>,
        image: Option<&Image>,
        gt: Option<&[BoundingBox]>,
        detector: &mut dyn Detector,
    ) -> Result<FrameOutput> {
        if self.cfg.mode == Mode::Oracle && gt.is_none() {
            return Err(Error::MissingGroundtruth);
        }
        let i = self.frame + 1;
        let (decision, action) = if i == 1 {
            (None, Action::Detect)
        } else {
            let (source, p_track, action) = self.decide(i, &feature, gt)?;
            if source.consulted() {
                self.last_consulted = i;
            }
            let reference = self.keyframe;
            let keyframe = if action == Action::Detect { i } else { self.keyframe };
            (Some(DecisionRecord { frame: i, source, p_track, action, reference, keyframe }), action)
        };
        let boxes = match action {
            Action::Detect => {
                let mut detections = detector.detect(i, image)?;
                detections.iter_mut().for_each(|b| b.fid = i);
                let boxes = associate(&self.prev_boxes, &detections, self.cfg.gate_iou, &mut self.ids);
                self.track = Some(TrackState::new((*feature).clone(), boxes.clone(), self.total_stride, self.frame_dims, self.cfg.tracker)?);
                self.keyframe = i;
                self.keyframe_feature = Some(feature);
                self.keyframe_gt = gt.map(<[BoundingBox]>::to_vec).unwrap_or_default();
                if i == 1 {
                    self.last_consulted = 1;
                }
                boxes
            }
            Action::Track => {
                let state = self.track.as_mut().expect("frame 1 is a detect");
                roi_track_all(state, &feature, i)?.boxes
            }
        };
        self.frame = i;
        self.prev_boxes = boxes.clone();
        Ok(FrameOutput { boxes, decision })
    }
}

/// Runs a sequence from precomputed features (frame 1 first). `images` is
/// handed to the detector when given.
pub fn run_with_features(
    features: &[Arc<Tensor3>],
    images: Option<&[Image]>,
    gt: Option<&GroundtruthTable>,
    detector: &mut dyn Detector,
    scheduler: Option<&SchedulerModel>,
    total_stride: usize,
    frame_dims: (usize, usize),
    cfg: &PipelineConfig,
) -> Result<PipelineOutput> {
    if features.is_empty() {
        return Err(Error::EmptySequence);
    }
    if cfg.mode == Mode::Oracle && gt.is_none() {
        return Err(Error::MissingGroundtruth);
    }
    let gt_frames = gt.map(|g| g.by_frame(features.len() as u32));
    let mut pipeline = Pipeline::new(cfg, scheduler, total_stride, frame_dims)?;
    let mut out = PipelineOutput::default();
    for (k, feature) in features.iter().enumerate() {
        let image = images.and_then(|imgs| imgs.get(k));
        let frame_gt = gt_frames.as_ref().map(|g| g[k].as_slice());
        let step = pipeline.step(Arc::clone(feature), image, frame_gt, detector)?;
        out.boxes.extend(step.boxes);
        out.decisions.extend(step.decision);
    }
    Ok(out)
}

/// Runs a sequence end to end, extracting each frame's features just before
/// it is processed.
pub fn run_sequence(
    frames: &[Image],
    gt: Option<&GroundtruthTable>,
    extractor: &FeatureExtractor,
    detector: &mut dyn Detector,
    scheduler: Option<&SchedulerModel>,
    cfg: &PipelineConfig,
) -> Result<PipelineOutput> {
    let first = frames.first().ok_or(Error::EmptySequence)?;
    if cfg.mode == Mode::Oracle && gt.is_none() {
        return Err(Error::MissingGroundtruth);
    }
    let frame_dims = (first.height(), first.width());
    let gt_frames = gt.map(|g| g.by_frame(frames.len() as u32));
    let mut pipeline = Pipeline::new(cfg, scheduler, extractor.total_stride(), frame_dims)?;
    let mut out = PipelineOutput::default();
    for (k, frame) in frames.iter().enumerate() {
        let feature = Arc::new(extractor.extract(frame)?);
        let frame_gt = gt_frames.as_ref().map(|g| g[k].as_slice());
        let step = pipeline.step(feature, Some(frame), frame_gt, detector)?;
        out.boxes.extend(step.boxes);
        out.decisions.extend(step.decision);
    }
    Ok(out)
}

pub const DECISION_HEADER: [&str; 4] = ["frame_id", "source", "p_track", "action"];

/// Decision log CSV; `p_track` is empty when no scheduler ran.
pub fn write_decisions(path: &Path, log: &[DecisionRecord]) -> Result<()> {
    let err = |e: csv::Error| Error::Parse { path: path.display().to_string(), line: 0, msg: e.to_string() };
    let mut w = csv::Writer::from_path(path).map_err(err)?;
    w.write_record(DECISION_HEADER).map_err(err)?;
    for d in log {
        w.write_record([
            d.frame.to_string(),
            d.source.as_str().to_string(),
            d.p_track.map(|p| p.to_string()).unwrap_or_default(),
            d.action.as_str().to_string(),
        ])
        .map_err(err)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a decision log and reconstructs the keyframe columns, taking frame 1
/// as the initial keyframe.
pub fn read_decisions(path: &Path) -> Result<Vec<DecisionRecord>> {
    let name = path.display().to_string();
    let bad = |line: u64, msg: String| Error::Parse { path: name.clone(), line, msg };
    let mut reader = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => bad(1, format!("{:?}", other)),
    })?;
    let header = reader.headers().map_err(|e| bad(1, e.to_string()))?.clone();
    if header.iter().ne(DECISION_HEADER) {
        return Err(bad(1, format!("expected header {}", DECISION_HEADER.join(","))));
    }
    let mut keyframe = 1;
    let mut log = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| bad(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        let frame: u32 = rec[0].parse().map_err(|_| bad(line, format!("bad frame_id {:?}", &rec[0])))?;
        let source = DecisionSource::parse(&rec[1]).ok_or_else(|| bad(line, format!("bad source {:?}", &rec[1])))?;
        let p_track = match &rec[2] {
            "" => None,
            s => Some(s.parse().map_err(|_| bad(line, format!("bad p_track {:?}", s)))?),
        };
        let action = Action::parse(&rec[3]).ok_or_else(|| bad(line, format!("bad action {:?}", &rec[3])))?;
        let reference = keyframe;
        if action == Action::Detect {
            keyframe = frame;
        }
        log.push(DecisionRecord { frame, source, p_track, action, reference, keyframe });
    }
    Ok(log)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheduler::SchedulerConfig;
    use crate::synthdata::{generate, Motion, ObjectSpec, SceneSpec};

    fn scene(frames: u32, motion: Motion) -> SceneSpec {
        SceneSpec {
            frames,
            height: 96,
            width: 160,
            background_seed: 4,
            objects: vec![
                ObjectSpec { id: 1, class_id: 0, width: 36, height: 36, texture_seed: 1, x: 10.0, y: 10.0, motion, enter: 1, exit: None },
                ObjectSpec {
                    id: 2,
                    class_id: 2,
                    width: 40,
                    height: 34,
                    texture_seed: 2,
                    x: 100.0,
                    y: 50.0,
                    motion: Motion::Static,
                    enter: 1,
                    exit: None,
                },
            ],
        }
    }

    fn features(frames: &[Image], fx: &FeatureExtractor) -> Vec<Arc<Tensor3>> {
        frames.iter().map(|f| Arc::new(fx.extract(f).unwrap())).collect()
    }

    fn run(spec: &SceneSpec, cfg: &PipelineConfig, noise: DetectorNoise, model: Option<&SchedulerModel>) -> PipelineOutput {
        let seq = generate(spec).unwrap();
        let fx = FeatureExtractor::new(0, 3);
        let mut det = SimulatedDetector::new(seq.gt.clone(), noise, 1, 0, (96, 160)).unwrap();
        run_sequence(&seq.frames, Some(&seq.gt), &fx, &mut det, model, cfg).unwrap()
    }

    #[test]
    fn fixed_sigma_one_never_tracks() {
        let cfg = PipelineConfig { mode: Mode::Fixed, sigma: 1, ..PipelineConfig::default() };
        let out = run(&scene(12, Motion::Linear { vx: 2.0, vy: 1.0 }), &cfg, DetectorNoise::default(), None);
        assert_eq!(out.decisions.len(), 11);
        assert!(out.decisions.iter().all(|d| d.action == Action::Detect && d.keyframe == d.frame));
        assert_eq!(out.detect_count(), 12);
    }

    #[test]
    fn fixed_sigma_ten_detects_every_tenth() {
        let cfg = PipelineConfig { mode: Mode::Fixed, sigma: 10, ..PipelineConfig::default() };
        let out = run(&scene(100, Motion::Static), &cfg, DetectorNoise::perfect(), None);
        let mut detects = vec![1];
        detects.extend(out.decisions.iter().filter(|d| d.action == Action::Detect).map(|d| d.frame));
        assert_eq!(detects, vec![1, 11, 21, 31, 41, 51, 61, 71, 81, 91]);
        for d in &out.decisions {
            assert_eq!(d.keyframe, 1 + 10 * ((d.frame - 1) / 10));
        }
    }

    #[test]
    fn fixed_sigma_three_detects_at_four() {
        let cfg = PipelineConfig { mode: Mode::Fixed, sigma: 3, ..PipelineConfig::default() };
        let out = run(&scene(5, Motion::Static), &cfg, DetectorNoise::perfect(), None);
        let actions: Vec<Action> = out.decisions.iter().map(|d| d.action).collect();
        assert_eq!(actions, vec![Action::Track, Action::Track, Action::Detect, Action::Track]);
    }

    #[test]
    fn oracle_tracks_static_scene() {
        let cfg = PipelineConfig { mode: Mode::Oracle, sigma: 1, ..PipelineConfig::default() };
        let out = run(&scene(15, Motion::Static), &cfg, DetectorNoise::perfect(), None);
        assert!(out.decisions.iter().all(|d| d.action == Action::Track && d.source == DecisionSource::Oracle));
        assert_eq!(out.boxes.len(), 30);
    }

    #[test]
    fn oracle_detects_on_disappearance() {
        let mut spec = scene(10, Motion::Static);
        spec.objects[1].exit = Some(6);
        let cfg = PipelineConfig { mode: Mode::Oracle, sigma: 1, ..PipelineConfig::default() };
        let out = run(&spec, &cfg, DetectorNoise::perfect(), None);
        let detects: Vec<u32> = out.decisions.iter().filter(|d| d.action == Action::Detect).map(|d| d.frame).collect();
        assert_eq!(detects, vec![6]);
        assert!(out.boxes.iter().filter(|b| b.fid >= 6).all(|b| b.id == Some(1)));
    }

    #[test]
    fn dort_consults_every_sigma() {
        let spec = scene(25, Motion::Static);
        let model = SchedulerModel::new((22, 38, 16), &SchedulerConfig::default(), 0).unwrap();
        // an untrained head sits near p = 0.5, so every consultation detects
        let cfg = PipelineConfig { mode: Mode::Dort, sigma: 10, ..PipelineConfig::default() };
        let out = run(&spec, &cfg, DetectorNoise::perfect(), Some(&model));
        for d in &out.decisions {
            if (d.frame - 1) % 10 == 0 {
                assert_eq!(d.source, DecisionSource::Scheduler);
                assert!(d.p_track.is_some());
                assert_eq!(d.action, Action::Detect);
            } else {
                assert_eq!(d.source, DecisionSource::Stride);
                assert_eq!(d.action, Action::Track);
            }
        }
        // threshold 0 always tracks
        let cfg = PipelineConfig { delta: 0.0, ..cfg };
        let out = run(&spec, &cfg, DetectorNoise::perfect(), Some(&model));
        assert_eq!(out.detect_count(), 1);
    }

    #[test]
    fn ids_unique_and_constant_between_detects() {
        let cfg = PipelineConfig { mode: Mode::Fixed, sigma: 4, ..PipelineConfig::default() };
        let out = run(&scene(30, Motion::Linear { vx: 1.5, vy: 0.5 }), &cfg, DetectorNoise::default(), None);
        let keyframes: Vec<u32> = std::iter::once(1).chain(out.decisions.iter().map(|d| d.keyframe)).collect();
        for f in 1..=30u32 {
            let boxes: Vec<&BoundingBox> = out.boxes.iter().filter(|b| b.fid == f).collect();
            let mut ids: Vec<u64> = boxes.iter().map(|b| b.id.unwrap()).collect();
            ids.sort_unstable();
            assert!(ids.windows(2).all(|w| w[0] < w[1]));
            let key = keyframes[f as usize - 1];
            let mut key_boxes: Vec<&BoundingBox> = out.boxes.iter().filter(|b| b.fid == key).collect();
            key_boxes.sort_by_key(|b| b.id);
            let mut sorted = boxes.clone();
            sorted.sort_by_key(|b| b.id);
            assert_eq!(sorted.len(), key_boxes.len());
            for (a, k) in sorted.iter().zip(&key_boxes) {
                assert_eq!((a.id, a.rect.w, a.rect.h, a.score), (k.id, k.rect.w, k.rect.h, k.score));
            }
        }
    }

    #[test]
    fn fixed_sigma_one_equals_detect_then_associate() {
        let spec = scene(15, Motion::Linear { vx: 3.0, vy: -1.0 });
        let cfg = PipelineConfig { mode: Mode::Fixed, sigma: 1, ..PipelineConfig::default() };
        let out = run(&spec, &cfg, DetectorNoise::default(), None);
        let seq = generate(&spec).unwrap();
        let det = SimulatedDetector::new(seq.gt.clone(), DetectorNoise::default(), 1, 0, (96, 160)).unwrap();
        let mut ids = IdCounter::default();
        let mut prev: Vec<BoundingBox> = Vec::new();
        let mut expected = Vec::new();
        for f in 1..=15 {
            prev = associate(&prev, &det.detections(f), 0.3, &mut ids);
            expected.extend(prev.iter().copied());
        }
        assert_eq!(out.boxes, expected);
    }

    #[test]
    fn replay_is_identical_and_features_path_agrees() {
        let spec = scene(20, Motion::Sine { vx: 1.0, vy: 0.0, ax: 4.0, ay: 2.0, period: 12.0 });
        let cfg = PipelineConfig { mode: Mode::Oracle, sigma: 2, ..PipelineConfig::default() };
        let a = run(&spec, &cfg, DetectorNoise::default(), None);
        let b = run(&spec, &cfg, DetectorNoise::default(), None);
        assert_eq!(a, b);
        let seq = generate(&spec).unwrap();
        let fx = FeatureExtractor::new(0, 3);
        let mut det = SimulatedDetector::new(seq.gt.clone(), DetectorNoise::default(), 1, 0, (96, 160)).unwrap();
        let c = run_with_features(&features(&seq.frames, &fx), None, Some(&seq.gt), &mut det, None, 4, (96, 160), &cfg).unwrap();
        assert_eq!(a, c);
    }

    #[test]
    fn errors() {
        let seq = generate(&scene(3, Motion::Static)).unwrap();
        let fx = FeatureExtractor::new(0, 3);
        let mut det = SimulatedDetector::new(seq.gt.clone(), DetectorNoise::perfect(), 1, 0, (96, 160)).unwrap();
        let oracle = PipelineConfig { mode: Mode::Oracle, ..PipelineConfig::default() };
        assert!(matches!(run_sequence(&seq.frames, None, &fx, &mut det, None, &oracle), Err(Error::MissingGroundtruth)));
        assert!(matches!(run_sequence(&[], None, &fx, &mut det, None, &oracle), Err(Error::EmptySequence)));
        let dort = PipelineConfig::default();
        assert!(matches!(run_sequence(&seq.frames, None, &fx, &mut det, None, &dort), Err(Error::Config(_))));
        let zero = PipelineConfig { sigma: 0, mode: Mode::Fixed, ..PipelineConfig::default() };
        assert!(matches!(run_sequence(&seq.frames, None, &fx, &mut det, None, &zero), Err(Error::Config(_))));
    }

    #[test]
    fn empty_detection_still_moves_keyframe() {
        let cfg = PipelineConfig { mode: Mode::Fixed, sigma: 2, ..PipelineConfig::default() };
        let noise = DetectorNoise { drop_prob: 1.0, spurious_rate: 0.0, ..DetectorNoise::default() };
        let out = run(&scene(6, Motion::Static), &cfg, noise, None);
        assert!(out.boxes.is_empty());
        assert_eq!(out.decisions.last().unwrap().keyframe, 5);
    }

    #[test]
    fn decision_csv_round_trip() {
        let cfg = PipelineConfig { mode: Mode::Fixed, sigma: 3, ..PipelineConfig::default() };
        let out = run(&scene(10, Motion::Static), &cfg, DetectorNoise::perfect(), None);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("decisions.csv");
        write_decisions(&path, &out.decisions).unwrap();
        assert_eq!(read_decisions(&path).unwrap(), out.decisions);
        let mut log = out.decisions.clone();
        log[0].p_track = Some(0.25);
        log[0].source = DecisionSource::Scheduler;
        write_decisions(&path, &log).unwrap();
        assert_eq!(read_decisions(&path).unwrap(), log);
    }
}
