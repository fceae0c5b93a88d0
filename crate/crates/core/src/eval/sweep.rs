use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{box_map, tracklet_map, SequenceBoxes};
use crate::featmap::Tensor3;
use crate::geometry::BoundingBox;
use crate::pipeline::{run_with_features, DecisionRecord, DetectorNoise, Mode, PipelineConfig, PipelineOutput, SimulatedDetector};
use crate::scheduler::{Action, SchedulerModel};
use crate::synthdata::GroundtruthTable;
use crate::{Error, Result};

/// Per-operation latencies in milliseconds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostModel {
    pub detect_ms: f64,
    pub track_ms: f64,
    pub scheduler_ms: f64,
    pub hungarian_ms: f64,
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel { detect_ms: 1000.0 / 8.33, track_ms: 10.0, scheduler_ms: 10.0, hungarian_ms: 1.5 }
    }
}

impl CostModel {
    /// Simulated time of one sequence. Frame 1 is a detect; the log covers
    /// frames 2 onward.
    pub fn sequence_ms(&self, log: &[DecisionRecord]) -> f64 {
        let detect = self.detect_ms + self.hungarian_ms;
        log.iter().fold(detect, |acc, d| {
            let act = match d.action {
                Action::Detect => detect,
                Action::Track => self.track_ms,
            };
            acc + act + if d.source.consulted() { self.scheduler_ms } else { 0.0 }
        })
    }
}

/// Frames per second under the cost model.
pub fn effective_fps(log: &[DecisionRecord], model: &CostModel) -> f64 {
    1000.0 * (log.len() + 1) as f64 / model.sequence_ms(log)
}

/// One sequence prepared for repeated pipeline runs.
#[derive(Clone, Debug)]
pub struct EvalSequence {
    pub name: String,
    /// Per-frame features, frame 1 first.
    pub features: Vec<Arc<Tensor3>>,
    pub gt: GroundtruthTable,
    /// Detector stream id; keeps detections of different sequences independent.
    pub stream: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub sigmas: Vec<u32>,
    pub modes: Vec<Mode>,
    /// Base pipeline settings; `sigma` and `mode` are overridden per row.
    pub pipeline: PipelineConfig,
    pub noise: DetectorNoise,
    pub detector_seed: u64,
    pub cost: CostModel,
    pub total_stride: usize,
    /// `(height, width)` of the frames.
    pub frame_dims: (usize, usize),
    /// Worker threads across sequences.
    pub threads: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub mode: Mode,
    pub sigma: u32,
    pub fps: f64,
    pub box_map: f64,
    pub tracklet_map: f64,
    pub n_detect: usize,
    pub n_track: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn row(&self, mode: Mode, sigma: u32) -> Option<&SweepRow> {
        self.rows.iter().find(|r| r.mode == mode && r.sigma == sigma)
    }

    /// Sigmas where the oracle's tracklet mAP falls below the fixed baseline's.
    pub fn oracle_violations(&self) -> Vec<u32> {
        self.rows
            .iter()
            .filter(|r| r.mode == Mode::Fixed)
            .filter_map(|f| self.row(Mode::Oracle, f.sigma).filter(|o| o.tracklet_map < f.tracklet_map).map(|_| f.sigma))
            .collect()
    }
}

/// Runs the pipeline on every sequence with a simulated detector, in parallel
/// over `threads` workers. Output order follows `sequences`.
pub fn run_suite(
    sequences: &[EvalSequence],
    scheduler: Option<&SchedulerModel>,
    pipeline: &PipelineConfig,
    noise: &DetectorNoise,
    detector_seed: u64,
    total_stride: usize,
    frame_dims: (usize, usize),
    threads: usize,
) -> Result<Vec<PipelineOutput>> {
    let run_one = |s: &EvalSequence| -> Result<PipelineOutput> {
        let mut det = SimulatedDetector::new(s.gt.clone(), noise.clone(), detector_seed, s.stream, frame_dims)?;
        run_with_features(&s.features, None, Some(&s.gt), &mut det, scheduler, total_stride, frame_dims, pipeline)
    };
    let threads = threads.max(1).min(sequences.len().max(1));
    if threads == 1 {
        return sequences.iter().map(run_one).collect();
    }
    let chunk = sequences.len().div_ceil(threads);
    let parts: Vec<Result<Vec<PipelineOutput>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = sequences
            .chunks(chunk)
            .map(|part| scope.spawn(move || part.iter().map(run_one).collect::<Result<Vec<_>>>()))
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let mut out = Vec::with_capacity(sequences.len());
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

/// Every `(mode, sigma)` combination over the whole suite. Metrics pool all
/// sequences; fps is total frames over total simulated time.
pub fn sweep(sequences: &[EvalSequence], scheduler: Option<&SchedulerModel>, cfg: &SweepConfig) -> Result<SweepResult> {
    let gt_boxes: Vec<Vec<BoundingBox>> = sequences.iter().map(|s| s.gt.all_boxes()).collect();
    let mut rows = Vec::new();
    for &mode in &cfg.modes {
        for &sigma in &cfg.sigmas {
            let pipeline = PipelineConfig { mode, sigma, ..cfg.pipeline.clone() };
            let outputs = run_suite(sequences, scheduler, &pipeline, &cfg.noise, cfg.detector_seed, cfg.total_stride, cfg.frame_dims, cfg.threads)?;
            let pairs: Vec<SequenceBoxes<'_>> = outputs
                .iter()
                .zip(&gt_boxes)
                .map(|(o, g)| SequenceBoxes { predictions: &o.boxes, groundtruth: g })
                .collect();
            let frames: usize = outputs.iter().map(|o| o.decisions.len() + 1).sum();
            let ms: f64 = outputs.iter().map(|o| cfg.cost.sequence_ms(&o.decisions)).sum();
            let n_detect: usize = outputs.iter().map(PipelineOutput::detect_count).sum();
            rows.push(SweepRow {
                mode,
                sigma,
                fps: if ms > 0.0 { 1000.0 * frames as f64 / ms } else { 0.0 },
                box_map: box_map(&pairs, 0.5).map,
                tracklet_map: tracklet_map(&pairs, 0.5, 0.5)?.map,
                n_detect,
                n_track: frames - n_detect,
            });
        }
    }
    Ok(SweepResult { rows })
}

pub const RESULTS_HEADER: [&str; 7] = ["mode", "sigma", "fps", "box_map", "tracklet_map", "n_detect", "n_track"];

pub fn write_results_csv(path: &Path, result: &SweepResult) -> Result<()> {
    let err = |e: csv::Error| Error::Parse { path: path.display().to_string(), line: 0, msg: e.to_string() };
    let mut w = csv::Writer::from_path(path).map_err(err)?;
    w.write_record(RESULTS_HEADER).map_err(err)?;
    for r in &result.rows {
        w.write_record([
            r.mode.to_string(),
            r.sigma.to_string(),
            r.fps.to_string(),
            r.box_map.to_string(),
            r.tracklet_map.to_string(),
            r.n_detect.to_string(),
            r.n_track.to_string(),
        ])
        .map_err(err)?;
    }
    w.flush()?;
    Ok(())
}

/// Speed/accuracy plot: fps on x, tracklet mAP on y, one polyline per mode.
pub fn pareto_svg(result: &SweepResult) -> String {
    const W: f64 = 640.0;
    const H: f64 = 420.0;
    const M: f64 = 60.0;
    let (mut lo, mut hi) = result.rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), r| (a.min(r.fps), b.max(r.fps)));
    if !lo.is_finite() {
        (lo, hi) = (0.0, 1.0);
    }
    if hi - lo < 1e-9 {
        hi = lo + 1.0;
    }
    let pad = 0.05 * (hi - lo);
    let (lo, hi) = ((lo - pad).max(0.0), hi + pad);
    let px = |fps: f64| M + (fps - lo) / (hi - lo) * (W - 2.0 * M);
    let py = |map: f64| H - M - map.clamp(0.0, 1.0) * (H - 2.0 * M);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<line x1="{M}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#, H - M, W - M, H - M);
    let _ = writeln!(s, r#"<line x1="{M}" y1="{M}" x2="{M}" y2="{}" stroke="black"/>"#, H - M);
    for k in 0..=5 {
        let v = k as f64 / 5.0;
        let _ = writeln!(s, r#"<text x="{}" y="{:.1}" text-anchor="end">{:.1}</text>"#, M - 6.0, py(v) + 4.0, v);
        let f = lo + v * (hi - lo);
        let _ = writeln!(s, r#"<text x="{:.1}" y="{}" text-anchor="middle">{:.1}</text>"#, px(f), H - M + 18.0, f);
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">effective fps</text>"#, W / 2.0, H - 15.0);
    let _ = writeln!(s, r#"<text x="16" y="{}" transform="rotate(-90 16 {})" text-anchor="middle">tracklet mAP</text>"#, H / 2.0, H / 2.0);

    let mut modes: Vec<Mode> = result.rows.iter().map(|r| r.mode).collect();
    modes.sort();
    modes.dedup();
    for (k, mode) in modes.iter().enumerate() {
        let color = ["#1f77b4", "#d62728", "#2ca02c"][k % 3];
        let mut pts: Vec<&SweepRow> = result.rows.iter().filter(|r| r.mode == *mode).collect();
        pts.sort_by(|a, b| a.fps.total_cmp(&b.fps));
        let line: Vec<String> = pts.iter().map(|r| format!("{:.1},{:.1}", px(r.fps), py(r.tracklet_map))).collect();
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#, line.join(" "));
        for r in &pts {
            let (x, y) = (px(r.fps), py(r.tracklet_map));
            let _ = writeln!(s, r#"<circle cx="{x:.1}" cy="{y:.1}" r="3" fill="{color}"/>"#);
            let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" font-size="10">σ={}</text>"#, x + 4.0, y - 4.0, r.sigma);
        }
        let ly = M + 16.0 * k as f64;
        let _ = writeln!(s, r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, W - M - 90.0, W - M - 70.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, W - M - 64.0, ly + 4.0, mode);
    }
    s.push_str("</svg>\n");
    s
}
